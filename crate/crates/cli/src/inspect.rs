//! Power summaries of channelized output.

use std::fmt::Write;

use ppf::ComplexSample;

/// Mean `|X|²` per channel over all spectra; zeros for an empty input.
pub fn channel_powers(samples: &[ComplexSample], n_channels: usize) -> Vec<f64> {
    let mut sums = vec![0.0f64; n_channels];
    for spectrum in samples.chunks_exact(n_channels) {
        for (acc, x) in sums.iter_mut().zip(spectrum) {
            *acc += f64::from(x.norm_sqr());
        }
    }
    let n = samples.len() / n_channels;
    if n > 0 {
        sums.iter_mut().for_each(|s| *s /= n as f64);
    }
    sums
}

/// The `k` strongest channels, strongest first; ties keep channel order.
pub fn top_channels(powers: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..powers.len()).collect();
    idx.sort_by(|&a, &b| powers[b].total_cmp(&powers[a]));
    idx.truncate(k.min(powers.len()));
    idx
}

pub fn summary(samples: &[ComplexSample], n_channels: usize, top_k: usize) -> String {
    let powers = channel_powers(samples, n_channels);
    let mut out = String::new();
    let _ = writeln!(out, "spectra: {}", samples.len() / n_channels);
    let _ = writeln!(out, "channels: {n_channels}");
    let _ = writeln!(out, "channel\tmean_power");
    for (c, p) in powers.iter().enumerate() {
        let _ = writeln!(out, "{c}\t{p:.6e}");
    }
    let top = top_channels(&powers, top_k);
    let _ = writeln!(out, "top {}:", top.len());
    for (rank, &c) in top.iter().enumerate() {
        let _ = writeln!(out, "{}\t{c}\t{:.6e}", rank + 1, powers[c]);
    }
    out
}

pub fn power_csv(samples: &[ComplexSample], n_channels: usize) -> String {
    let mut out = String::from("spectrum,channel,power\n");
    for (s, spectrum) in samples.chunks_exact(n_channels).enumerate() {
        for (c, x) in spectrum.iter().enumerate() {
            let _ = writeln!(out, "{s},{c},{}", x.norm_sqr());
        }
    }
    out
}
