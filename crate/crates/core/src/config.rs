use serde::Serialize;

use crate::coeffgen::WindowSpec;
use crate::error::{PpfError, Result};

/// Kaiser shape parameter used when none is given.
pub const DEFAULT_BETA: f64 = 9.0;

/// Prototype passband width, in channel widths.
///
/// A value of 1.0 puts the channel crossover at the half-amplitude point
/// (-6 dB); widening it slightly flattens the response across each bin.
pub const DEFAULT_CUTOFF: f64 = 1.2;

pub const DEFAULT_BLOCK_SPECTRA: usize = 4096;

/// One second of the reference stream: 6.5 GB, decimal.
pub const REFERENCE_RATE_BYTES_PER_SEC: u64 = 6_500_000_000;

/// Parameters shared by every stage of the channelizer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PpfConfig {
    pub n_channels: usize,
    pub n_taps: usize,
    pub window: WindowSpec,
    /// Sinc passband width in channel widths.
    pub cutoff: f64,
    /// Spectra per processing block. Performance only; never changes output.
    pub block_spectra: usize,
    pub reference_rate_bytes_per_sec: u64,
    /// Use the O(N^2) DFT when `n_channels` is not a power of two.
    pub fft_fallback: bool,
    /// Pre-fill the tap history with zeros so every input spectrum yields an
    /// output spectrum.
    pub zero_prime: bool,
}

impl PpfConfig {
    pub fn new(n_channels: usize, n_taps: usize) -> Self {
        PpfConfig {
            n_channels,
            n_taps,
            window: WindowSpec::Kaiser { beta: DEFAULT_BETA },
            cutoff: DEFAULT_CUTOFF,
            block_spectra: DEFAULT_BLOCK_SPECTRA.max(n_taps),
            reference_rate_bytes_per_sec: REFERENCE_RATE_BYTES_PER_SEC,
            fft_fallback: true,
            zero_prime: false,
        }
    }

    pub fn with_window(mut self, window: WindowSpec) -> Self {
        self.window = window;
        self
    }

    pub fn with_block_spectra(mut self, block_spectra: usize) -> Self {
        self.block_spectra = block_spectra;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_channels == 0 {
            return Err(PpfError::config("channel count must be at least 1"));
        }
        if self.n_taps == 0 {
            return Err(PpfError::config("tap count must be at least 1"));
        }
        if self.n_channels > u32::MAX as usize || self.n_taps > u32::MAX as usize {
            return Err(PpfError::config("channel or tap count exceeds u32 range"));
        }
        self.window.validate()?;
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return Err(PpfError::config(format!(
                "cutoff must be a positive number of channel widths, got {}",
                self.cutoff
            )));
        }
        if self.block_spectra < self.n_taps {
            return Err(PpfError::config(format!(
                "block size ({} spectra) must be at least the tap count ({})",
                self.block_spectra, self.n_taps
            )));
        }
        if self.reference_rate_bytes_per_sec == 0 {
            return Err(PpfError::config("reference data rate must be positive"));
        }
        Ok(())
    }

    /// Bytes in one spectrum of interleaved f32 complex samples.
    pub fn spectrum_bytes(&self) -> usize {
        self.n_channels * crate::SAMPLE_BYTES
    }
}
