//! Polyphase FIR stage.
//!
//! Output spectrum `s`, channel `c` is `sum_t b[t][c] * x[s + t][c]`, where
//! `b[t][c]` is branch `c`, tap `t` of the prototype. Only fully-populated
//! windows are produced, so `n_in` spectra give `n_in - n_taps + 1` outputs.
//!
//! Coefficients are applied at `f32` precision (the precision of the stored
//! coefficient file) and products accumulate in `f64`, in ascending tap order.
//! Both entry points perform the same floating point operations per output, so
//! they agree bit for bit.

use std::thread;

use crate::coeffgen::FilterCoefficients;
use crate::error::{PpfError, Result};
use crate::ComplexSample;

/// A run of time-domain samples holding a whole number of spectra.
///
/// Sample `n` belongs to spectrum `n / n_channels`, channel `n % n_channels`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBlock {
    samples: Vec<ComplexSample>,
    n_channels: usize,
}

impl SampleBlock {
    pub fn new(samples: Vec<ComplexSample>, n_channels: usize) -> Result<Self> {
        if n_channels == 0 {
            return Err(PpfError::config("channel count must be at least 1"));
        }
        if samples.is_empty() || samples.len() % n_channels != 0 {
            return Err(PpfError::config(format!(
                "block of {} samples is not a positive multiple of {n_channels} channels",
                samples.len()
            )));
        }
        Ok(SampleBlock {
            samples,
            n_channels,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_spectra(&self) -> usize {
        self.samples.len() / self.n_channels
    }

    pub fn samples(&self) -> &[ComplexSample] {
        &self.samples
    }

    pub fn spectrum(&self, s: usize) -> &[ComplexSample] {
        &self.samples[s * self.n_channels..(s + 1) * self.n_channels]
    }

    pub fn into_samples(self) -> Vec<ComplexSample> {
        self.samples
    }
}

/// Output of the FIR stage, spectrum-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredBlock {
    pub spectra: Vec<ComplexSample>,
    pub n_channels: usize,
    pub n_spectra_out: usize,
}

impl FilteredBlock {
    pub fn empty(n_channels: usize) -> Self {
        FilteredBlock {
            spectra: Vec::new(),
            n_channels,
            n_spectra_out: 0,
        }
    }

    pub fn spectrum(&self, s: usize) -> &[ComplexSample] {
        &self.spectra[s * self.n_channels..(s + 1) * self.n_channels]
    }
}

fn check_shapes(input: &SampleBlock, n_channels: usize, n_taps: usize) -> Result<usize> {
    if input.n_channels() != n_channels {
        return Err(PpfError::config(format!(
            "input has {} channels but the filter has {n_channels}",
            input.n_channels()
        )));
    }
    let available = input.n_spectra();
    if available < n_taps {
        return Err(PpfError::InsufficientHistory {
            required: n_taps,
            available,
        });
    }
    Ok(available - n_taps + 1)
}

/// Direct transcription of the serial loop nest: spectra, then channels,
/// then taps.
pub fn ppf_fir_reference(
    input: &SampleBlock,
    coeffs: &FilterCoefficients,
) -> Result<FilteredBlock> {
    let nc = coeffs.n_channels();
    let nt = coeffs.n_taps();
    let n_out = check_shapes(input, nc, nt)?;
    let x = input.samples();

    let mut spectra = Vec::with_capacity(n_out * nc);
    for s in 0..n_out {
        for c in 0..nc {
            let mut re = 0.0f64;
            let mut im = 0.0f64;
            for t in 0..nt {
                let b = coeffs.tap(c, t) as f32 as f64;
                let v = x[(s + t) * nc + c];
                re += b * v.re as f64;
                im += b * v.im as f64;
            }
            spectra.push(ComplexSample::new(re as f32, im as f32));
        }
    }
    Ok(FilteredBlock {
        spectra,
        n_channels: nc,
        n_spectra_out: n_out,
    })
}

/// Multithreaded FIR with a fixed partitioning over output spectra.
pub fn ppf_fir_optimized(
    input: &SampleBlock,
    coeffs: &FilterCoefficients,
    workers: usize,
) -> Result<FilteredBlock> {
    FirKernel::new(coeffs).apply(input, workers)
}

/// Prepared FIR weights, reusable across blocks.
///
/// Each tap row is expanded to `2 * n_channels` doubles (one per real and
/// imaginary lane) so a block row can be treated as a flat `f32` slice and
/// the inner loop runs contiguously over channels.
#[derive(Clone, Debug)]
pub struct FirKernel {
    n_channels: usize,
    n_taps: usize,
    weights: Vec<f64>,
}

impl FirKernel {
    pub fn new(coeffs: &FilterCoefficients) -> Self {
        let nc = coeffs.n_channels();
        let nt = coeffs.n_taps();
        let mut weights = Vec::with_capacity(2 * nc * nt);
        for t in 0..nt {
            for &b in coeffs.tap_row(t) {
                let b = b as f32 as f64;
                weights.push(b);
                weights.push(b);
            }
        }
        FirKernel {
            n_channels: nc,
            n_taps: nt,
            weights,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn apply(&self, input: &SampleBlock, workers: usize) -> Result<FilteredBlock> {
        if workers == 0 {
            return Err(PpfError::config("worker count must be at least 1"));
        }
        let n_out = check_shapes(input, self.n_channels, self.n_taps)?;
        let mut spectra = vec![ComplexSample::new(0.0, 0.0); n_out * self.n_channels];
        self.filter_into(input.samples(), &mut spectra, workers);
        Ok(FilteredBlock {
            spectra,
            n_channels: self.n_channels,
            n_spectra_out: n_out,
        })
    }

    fn filter_into(&self, input: &[ComplexSample], out: &mut [ComplexSample], workers: usize) {
        let lanes = 2 * self.n_channels;
        let n_out = out.len() / self.n_channels;
        let input: &[f32] = bytemuck::cast_slice(input);
        let out: &mut [f32] = bytemuck::cast_slice_mut(out);

        let per_worker = n_out.div_ceil(workers.min(n_out).max(1));
        if workers == 1 || n_out <= 1 {
            self.filter_rows(input, out, 0);
            return;
        }
        thread::scope(|scope| {
            for (i, chunk) in out.chunks_mut(per_worker * lanes).enumerate() {
                scope.spawn(move || self.filter_rows(input, chunk, i * per_worker));
            }
        });
    }

    /// Computes the output spectra in `out`, the first of which is spectrum
    /// `first` of the block.
    fn filter_rows(&self, input: &[f32], out: &mut [f32], first: usize) {
        #[cfg(target_arch = "x86_64")]
        {
            if std::arch::is_x86_feature_detected!("avx2") {
                // SAFETY: the required CPU feature was just detected.
                unsafe { self.filter_rows_avx2(input, out, first) };
                return;
            }
        }
        self.filter_rows_generic(input, out, first);
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn filter_rows_avx2(&self, input: &[f32], out: &mut [f32], first: usize) {
        self.filter_rows_generic(input, out, first);
    }

    #[inline(always)]
    fn filter_rows_generic(&self, input: &[f32], out: &mut [f32], first: usize) {
        let lanes = 2 * self.n_channels;
        let mut acc = vec![0.0f64; lanes];
        for (i, dst) in out.chunks_exact_mut(lanes).enumerate() {
            let s = first + i;
            acc.fill(0.0);
            for t in 0..self.n_taps {
                let row = &input[(s + t) * lanes..(s + t + 1) * lanes];
                let w = &self.weights[t * lanes..(t + 1) * lanes];
                for ((a, &b), &x) in acc.iter_mut().zip(w).zip(row) {
                    *a += b * x as f64;
                }
            }
            for (d, &a) in dst.iter_mut().zip(&acc) {
                *d = a as f32;
            }
        }
    }
}

/// FLOPs of the FIR stage: one complex-by-real multiply-accumulate (two
/// multiplies, two adds) per channel, tap and output spectrum.
pub fn flops_for_fir(n_channels: usize, n_taps: usize, n_spectra_out: usize) -> u64 {
    n_spectra_out as u64 * n_channels as u64 * n_taps as u64 * 4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffgen::{generate_prototype, WindowSpec};

    fn c(re: f32, im: f32) -> ComplexSample {
        ComplexSample::new(re, im)
    }

    fn ramp(n_spectra: usize, n_channels: usize) -> SampleBlock {
        let samples = (0..n_spectra * n_channels)
            .map(|i| c((i as f32 * 0.37).sin(), (i as f32 * 0.11).cos()))
            .collect();
        SampleBlock::new(samples, n_channels).unwrap()
    }

    #[test]
    fn unit_taps_are_identity() {
        let ones = FilterCoefficients::from_values(8, 1, vec![1.0; 8]).unwrap();
        let input = ramp(5, 8);
        let out = ppf_fir_reference(&input, &ones).unwrap();
        assert_eq!(out.n_spectra_out, 5);
        assert_eq!(out.spectra, input.samples());
        let out = ppf_fir_optimized(&input, &ones, 3).unwrap();
        assert_eq!(out.spectra, input.samples());
    }

    #[test]
    fn impulse_reproduces_branch_kernel() {
        let (nc, nt) = (4, 3);
        let values: Vec<f64> = (0..nc * nt).map(|i| 1.0 + i as f64).collect();
        let coeffs = FilterCoefficients::from_values(nc, nt, values).unwrap();
        // impulse in the last window position of spectrum nt-1 so every tap sees it
        let n_in = 2 * nt - 1;
        let ch = 2;
        let mut samples = vec![c(0.0, 0.0); n_in * nc];
        samples[(nt - 1) * nc + ch] = c(1.0, 0.0);
        let out = ppf_fir_reference(&SampleBlock::new(samples, nc).unwrap(), &coeffs).unwrap();
        assert_eq!(out.n_spectra_out, nt);
        for s in 0..nt {
            for k in 0..nc {
                let v = out.spectrum(s)[k];
                if k == ch {
                    // correlation form: output s sees the impulse at tap nt-1-s
                    assert_eq!(v, c(coeffs.tap(ch, nt - 1 - s) as f32, 0.0));
                } else {
                    assert_eq!(v, c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn shape_errors() {
        let coeffs = generate_prototype(8, 4, WindowSpec::Rectangular).unwrap();
        let short = ramp(3, 8);
        assert!(matches!(
            ppf_fir_reference(&short, &coeffs),
            Err(PpfError::InsufficientHistory { required: 4, available: 3 })
        ));
        assert!(ppf_fir_optimized(&short, &coeffs, 2).is_err());
        let wrong = ramp(8, 4);
        assert!(matches!(ppf_fir_reference(&wrong, &coeffs), Err(PpfError::Config(_))));
        assert!(ppf_fir_optimized(&ramp(8, 8), &coeffs, 0).is_err());
    }

    #[test]
    fn sample_block_validation() {
        assert!(SampleBlock::new(vec![], 4).is_err());
        assert!(SampleBlock::new(vec![c(0.0, 0.0); 6], 4).is_err());
        assert!(SampleBlock::new(vec![c(0.0, 0.0); 8], 0).is_err());
        assert_eq!(SampleBlock::new(vec![c(0.0, 0.0); 8], 4).unwrap().n_spectra(), 2);
    }

    #[test]
    fn workers_do_not_change_bits() {
        let coeffs = generate_prototype(16, 8, WindowSpec::Kaiser { beta: 9.0 }).unwrap();
        let input = ramp(40, 16);
        let reference = ppf_fir_reference(&input, &coeffs).unwrap();
        for workers in [1, 2, 3, 8, 64] {
            let out = ppf_fir_optimized(&input, &coeffs, workers).unwrap();
            assert_eq!(out, reference, "workers={workers}");
        }
    }

    #[test]
    fn flop_counts() {
        assert_eq!(flops_for_fir(1, 1, 1), 4);
        assert_eq!(flops_for_fir(256, 8, 1000), 8_192_000);
        assert_eq!(flops_for_fir(1024, 16, 1), 65_536);
    }
}
