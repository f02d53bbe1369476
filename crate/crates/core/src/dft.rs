//! Per-spectrum DFT completing the filter bank.
//!
//! Forward transform, negative exponent, no normalization:
//! `X[k] = sum_n x[n] * exp(-2 pi i k n / N)`. Arithmetic is in `f64`; inputs
//! and outputs are `f32`.

use std::f64::consts::PI;
use std::thread;

use num_complex::Complex64;

use crate::error::{PpfError, Result};
use crate::fir::FilteredBlock;
use crate::ComplexSample;

/// Frequency-domain spectra, spectrum-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelizedOutput {
    pub bins: Vec<ComplexSample>,
    pub n_channels: usize,
    pub n_spectra: usize,
}

impl ChannelizedOutput {
    pub fn spectrum(&self, s: usize) -> &[ComplexSample] {
        &self.bins[s * self.n_channels..(s + 1) * self.n_channels]
    }
}

fn widen(x: ComplexSample) -> Complex64 {
    Complex64::new(x.re as f64, x.im as f64)
}

fn narrow(x: Complex64) -> ComplexSample {
    ComplexSample::new(x.re as f32, x.im as f32)
}

/// `exp(-2 pi i j / n)` for `j` in `0..count`.
fn twiddles(n: usize, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| {
            let angle = -2.0 * PI * j as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Direct O(N^2) evaluation of the DFT.
pub fn dft_naive(spectrum: &[ComplexSample]) -> Vec<ComplexSample> {
    let n = spectrum.len();
    let table = twiddles(n, n);
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in spectrum.iter().enumerate() {
                acc += widen(x) * table[(k * j) % n];
            }
            narrow(acc)
        })
        .collect()
}

/// Iterative radix-2 decimation-in-time FFT of a fixed power-of-two size.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    twiddles: Vec<Complex64>,
    bit_reverse: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(PpfError::UnsupportedSize(n));
        }
        let bits = n.trailing_zeros();
        let bit_reverse = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(FftPlan {
            n,
            twiddles: twiddles(n, n / 2),
            bit_reverse,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transforms `data` in place. `data.len()` must equal the plan size.
    pub fn process(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "buffer does not match plan size");
        for i in 0..self.n {
            let j = self.bit_reverse[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < self.n {
            let stride = self.n / (2 * half);
            for group in data.chunks_exact_mut(2 * half) {
                let (lo, hi) = group.split_at_mut(half);
                for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let t = *b * self.twiddles[k * stride];
                    *b = *a - t;
                    *a += t;
                }
            }
            half *= 2;
        }
    }
}

/// Fast DFT for power-of-two lengths.
pub fn fft(spectrum: &[ComplexSample]) -> Result<Vec<ComplexSample>> {
    let plan = FftPlan::new(spectrum.len())?;
    let mut buf: Vec<Complex64> = spectrum.iter().copied().map(widen).collect();
    plan.process(&mut buf);
    Ok(buf.into_iter().map(narrow).collect())
}

/// Row transform for a fixed channel count: the FFT when the count is a
/// power of two, otherwise the direct DFT.
#[derive(Clone, Debug)]
pub struct Channelizer {
    n_channels: usize,
    plan: Option<FftPlan>,
}

impl Channelizer {
    pub fn new(n_channels: usize, fft_fallback: bool) -> Result<Self> {
        if n_channels == 0 {
            return Err(PpfError::config("channel count must be at least 1"));
        }
        let plan = match FftPlan::new(n_channels) {
            Ok(plan) => Some(plan),
            Err(_) if fft_fallback => None,
            Err(e) => return Err(e),
        };
        Ok(Channelizer { n_channels, plan })
    }

    pub fn uses_fft(&self) -> bool {
        self.plan.is_some()
    }

    pub fn apply(&self, filtered: &FilteredBlock, workers: usize) -> Result<ChannelizedOutput> {
        if filtered.n_channels != self.n_channels {
            return Err(PpfError::config(format!(
                "block has {} channels but the transform expects {}",
                filtered.n_channels, self.n_channels
            )));
        }
        if workers == 0 {
            return Err(PpfError::config("worker count must be at least 1"));
        }
        let mut bins = vec![ComplexSample::new(0.0, 0.0); filtered.spectra.len()];
        let rows = filtered.n_spectra_out;
        if workers == 1 || rows <= 1 {
            self.transform_rows(&filtered.spectra, &mut bins);
        } else {
            let per_worker = rows.div_ceil(workers.min(rows)) * self.n_channels;
            thread::scope(|scope| {
                for (src, dst) in filtered.spectra.chunks(per_worker).zip(bins.chunks_mut(per_worker)) {
                    scope.spawn(move || self.transform_rows(src, dst));
                }
            });
        }
        Ok(ChannelizedOutput {
            bins,
            n_channels: self.n_channels,
            n_spectra: rows,
        })
    }

    fn transform_rows(&self, src: &[ComplexSample], dst: &mut [ComplexSample]) {
        let n = self.n_channels;
        match &self.plan {
            Some(plan) => {
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for (row, out) in src.chunks_exact(n).zip(dst.chunks_exact_mut(n)) {
                    for (b, &x) in buf.iter_mut().zip(row) {
                        *b = widen(x);
                    }
                    plan.process(&mut buf);
                    for (o, &b) in out.iter_mut().zip(&buf) {
                        *o = narrow(b);
                    }
                }
            }
            None => {
                for (row, out) in src.chunks_exact(n).zip(dst.chunks_exact_mut(n)) {
                    out.copy_from_slice(&dft_naive(row));
                }
            }
        }
    }
}

/// Transforms every row of a filtered block.
///
/// Non-power-of-two channel counts use [`dft_naive`] when `fft_fallback` is
/// set and fail with [`PpfError::UnsupportedSize`] otherwise.
pub fn channelize_block(filtered: &FilteredBlock, fft_fallback: bool) -> Result<ChannelizedOutput> {
    Channelizer::new(filtered.n_channels, fft_fallback)?.apply(filtered, 1)
}

/// FLOPs of the DFT stage: `5 N log2 N` per spectrum for power-of-two `N`,
/// `8 N^2` per spectrum for the direct transform.
pub fn flops_for_dft(n_channels: usize, n_spectra: usize) -> u64 {
    let n = n_channels as u64;
    let per_spectrum = if n_channels.is_power_of_two() {
        5 * n * n_channels.trailing_zeros() as u64
    } else {
        8 * n * n
    };
    per_spectrum * n_spectra as u64
}
