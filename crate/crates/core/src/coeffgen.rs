//! Prototype lowpass design: a sampled sinc tapered by a Kaiser window,
//! normalized to unit DC gain and laid out as polyphase branches.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::DEFAULT_CUTOFF;
use crate::error::{PpfError, Result};

/// Largest argument accepted by [`bessel_i0`]; `I0(700)` is about `1e302`.
pub const BESSEL_I0_MAX_ARG: f64 = 700.0;

/// Taper applied to the truncated sinc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum WindowSpec {
    Kaiser { beta: f64 },
    /// Identical to `Kaiser { beta: 0.0 }`.
    Rectangular,
}

impl WindowSpec {
    pub fn beta(&self) -> f64 {
        match *self {
            WindowSpec::Kaiser { beta } => beta,
            WindowSpec::Rectangular => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let beta = self.beta();
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(PpfError::config(format!(
                "Kaiser beta must be finite and nonnegative, got {beta}"
            )));
        }
        if beta > BESSEL_I0_MAX_ARG {
            return Err(PpfError::config(format!(
                "Kaiser beta {beta} exceeds {BESSEL_I0_MAX_ARG}"
            )));
        }
        Ok(())
    }
}

/// Real prototype filter of length `n_channels * n_taps`.
///
/// Storage is tap-major: branch `c`, tap `t` lives at `values[t * n_channels + c]`,
/// so one tap across all channels is a contiguous slice.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterCoefficients {
    n_channels: usize,
    n_taps: usize,
    values: Vec<f64>,
}

impl FilterCoefficients {
    /// Wraps an arbitrary finite kernel. No symmetry or normalization is
    /// imposed; use [`generate_prototype`] for a designed filter.
    pub fn from_values(n_channels: usize, n_taps: usize, values: Vec<f64>) -> Result<Self> {
        if n_channels == 0 || n_taps == 0 {
            return Err(PpfError::config("channel and tap counts must be at least 1"));
        }
        if values.len() != n_channels * n_taps {
            return Err(PpfError::config(format!(
                "expected {} coefficients for {n_channels} channels x {n_taps} taps, got {}",
                n_channels * n_taps,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PpfError::config(format!("coefficient {i} is not finite")));
        }
        Ok(FilterCoefficients {
            n_channels,
            n_taps,
            values,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat prototype in storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Weight of branch `channel` at tap `tap`.
    #[inline]
    pub fn tap(&self, channel: usize, tap: usize) -> f64 {
        self.values[tap * self.n_channels + channel]
    }

    /// All channels' weights for one tap.
    pub fn tap_row(&self, tap: usize) -> &[f64] {
        &self.values[tap * self.n_channels..(tap + 1) * self.n_channels]
    }

    /// Tap weights of one polyphase branch, in tap order.
    pub fn branch(&self, channel: usize) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .skip(channel)
            .step_by(self.n_channels)
            .copied()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest relative mismatch between `values[k]` and its mirror.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.values.len();
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        (0..n / 2)
            .map(|k| (self.values[k] - self.values[n - 1 - k]).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Unnormalized sinc, `sin(x) / x`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Modified Bessel function of the first kind, order zero.
///
/// Evaluates `(1/pi) * integral_0^pi exp(x cos t) dt` with the trapezoid rule.
/// The integrand is smooth and periodic, so the rule converges geometrically;
/// the node count grows with `sqrt(|x|)` to keep the aliasing error (which is
/// of order `I_M(x) / I_0(x)` for `M` nodes) below double precision.
pub fn bessel_i0(x: f64) -> Result<f64> {
    let x = x.abs();
    if !(x <= BESSEL_I0_MAX_ARG) {
        return Err(PpfError::Domain(format!(
            "bessel_i0 argument must satisfy |x| <= {BESSEL_I0_MAX_ARG}, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    // Even node count; nodes j and M-j share a cosine.
    let half = 12 + (5.0 * x.sqrt()).ceil() as usize;
    let nodes = 2 * half;
    let step = PI / half as f64;
    let mut sum = x.exp() + (-x).exp();
    for j in 1..half {
        sum += 2.0 * (x * (j as f64 * step).cos()).exp();
    }
    Ok(sum / nodes as f64)
}

/// Symmetric Kaiser window of `length` points.
///
/// `w[k] = I0(beta * sqrt(1 - (2k/(L-1) - 1)^2)) / I0(beta)`; a single point
/// window is `[1.0]`. The right half is mirrored from the left so the result
/// is exactly symmetric.
pub fn kaiser_window(length: usize, beta: f64) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(PpfError::config("window length must be at least 1"));
    }
    if !(beta >= 0.0) {
        return Err(PpfError::Domain(format!(
            "Kaiser beta must be nonnegative, got {beta}"
        )));
    }
    if length == 1 {
        return Ok(vec![1.0]);
    }
    let denom = bessel_i0(beta)?;
    let span = (length - 1) as f64;
    let mut w = vec![0.0; length];
    for k in 0..length.div_ceil(2) {
        let r = 2.0 * k as f64 / span - 1.0;
        let arg = beta * (1.0 - r * r).max(0.0).sqrt();
        let v = bessel_i0(arg)? / denom;
        w[k] = v;
        w[length - 1 - k] = v;
    }
    Ok(w)
}

/// Designs the prototype with the default passband width.
pub fn generate_prototype(
    n_channels: usize,
    n_taps: usize,
    window: WindowSpec,
) -> Result<FilterCoefficients> {
    generate_prototype_with_cutoff(n_channels, n_taps, window, DEFAULT_CUTOFF)
}

/// Designs the prototype lowpass.
///
/// With `L = n_channels * n_taps` and midpoint `m = (L - 1) / 2`,
/// `raw[k] = sinc(pi * cutoff * (k - m) / n_channels) * w[k]`, and the result
/// is `raw / sum(raw)`. `cutoff` is the passband width in channel widths.
pub fn generate_prototype_with_cutoff(
    n_channels: usize,
    n_taps: usize,
    window: WindowSpec,
    cutoff: f64,
) -> Result<FilterCoefficients> {
    if n_channels == 0 || n_taps == 0 {
        return Err(PpfError::config("channel and tap counts must be at least 1"));
    }
    window.validate()?;
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(PpfError::config(format!("cutoff must be positive, got {cutoff}")));
    }

    let len = n_channels * n_taps;
    let w = kaiser_window(len, window.beta())?;
    let scale = PI * cutoff / n_channels as f64;
    let span = (len - 1) as f64;

    let mut raw = vec![0.0; len];
    for k in 0..len.div_ceil(2) {
        // k - m, exact for any realistic length
        let offset = (2.0 * k as f64 - span) * 0.5;
        let v = sinc(scale * offset) * w[k];
        raw[k] = v;
        raw[len - 1 - k] = v;
    }

    let total: f64 = raw.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(PpfError::DegenerateFilter);
    }
    raw.iter_mut().for_each(|v| *v /= total);
    FilterCoefficients::from_values(n_channels, n_taps, raw)
}
