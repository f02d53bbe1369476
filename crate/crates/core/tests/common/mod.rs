#![allow(dead_code)]

use ppf::ComplexSample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_samples(rng: &mut ChaCha8Rng, n: usize) -> Vec<ComplexSample> {
    (0..n)
        .map(|_| ComplexSample::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn max_abs(xs: &[ComplexSample]) -> f64 {
    xs.iter().map(|c| c.norm() as f64).fold(0.0, f64::max)
}

/// Largest elementwise error, relative to the largest reference magnitude.
pub fn max_rel_err(got: &[ComplexSample], want: &[ComplexSample]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = max_abs(want).max(f64::MIN_POSITIVE);
    got.iter()
        .zip(want)
        .map(|(a, b)| (*a - *b).norm() as f64)
        .fold(0.0, f64::max)
        / scale
}

/// Error norm relative to the reference vector norm.
pub fn norm_rel_err(got: &[ComplexSample], want: &[ComplexSample]) -> f64 {
    assert_eq!(got.len(), want.len());
    let num: f64 = got.iter().zip(want).map(|(a, b)| (*a - *b).norm_sqr() as f64).sum();
    let den: f64 = want.iter().map(|b| b.norm_sqr() as f64).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Per-channel direct correlation, written independently of the library:
/// y_c[s] = sum_t h[t * nc + c] * x[(s + t) * nc + c].
pub fn brute_force_fir(x: &[ComplexSample], h: &[f64], nc: usize, nt: usize) -> Vec<ComplexSample> {
    let n_in = x.len() / nc;
    let n_out = n_in + 1 - nt;
    let mut out = vec![ComplexSample::new(0.0, 0.0); n_out * nc];
    for c in 0..nc {
        let series: Vec<(f64, f64)> = (0..n_in)
            .map(|s| (x[s * nc + c].re as f64, x[s * nc + c].im as f64))
            .collect();
        let kernel: Vec<f64> = (0..nt).map(|t| h[t * nc + c]).collect();
        for s in 0..n_out {
            let (re, im) = kernel
                .iter()
                .zip(&series[s..s + nt])
                .fold((0.0, 0.0), |(r, i), (k, (xr, xi))| (r + k * xr, i + k * xi));
            out[s * nc + c] = ComplexSample::new(re as f32, im as f32);
        }
    }
    out
}
