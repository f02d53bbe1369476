//! Streaming polyphase filter bank channelizer.
//!
//! The channelizer splits a stream of complex voltage samples into
//! `n_channels` frequency channels in two stages: a polyphase FIR that
//! weights `n_taps` consecutive spectra with a windowed-sinc prototype, then
//! a DFT of every filtered spectrum.
//!
//! ```
//! use ppf::{generate_prototype, ppf_fir_reference, channelize_block, SampleBlock, WindowSpec};
//! use ppf::ComplexSample;
//!
//! let coeffs = generate_prototype(8, 4, WindowSpec::Kaiser { beta: 9.0 }).unwrap();
//! let input = SampleBlock::new(vec![ComplexSample::new(1.0, 0.0); 8 * 6], 8).unwrap();
//! let filtered = ppf_fir_reference(&input, &coeffs).unwrap();
//! let bins = channelize_block(&filtered, true).unwrap();
//! assert_eq!(bins.n_spectra, 3);
//! // a DC input lands in bin 0 with unit gain
//! assert!((bins.spectrum(0)[0].re - 1.0).abs() < 1e-6);
//! ```

pub mod bench;
pub mod coeff_file;
pub mod coeffgen;
pub mod config;
pub mod dft;
mod error;
pub mod fir;
pub mod pipeline;

pub use bench::{data_seconds, realtime_multiple, run_benchmark, sweep, BenchmarkReport};
pub use coeff_file::{read_coefficients, write_coefficients, write_coefficients_text, CoefficientFile};
pub use coeffgen::{
    bessel_i0, generate_prototype, generate_prototype_with_cutoff, kaiser_window, sinc,
    FilterCoefficients, WindowSpec,
};
pub use config::PpfConfig;
pub use dft::{channelize_block, dft_naive, fft, flops_for_dft, ChannelizedOutput};
pub use error::{PpfError, Result};
pub use fir::{flops_for_fir, ppf_fir_optimized, ppf_fir_reference, FilteredBlock, SampleBlock};
pub use pipeline::{carry_history, process_stream, Pipeline, StreamState};

/// One complex voltage sample.
pub type ComplexSample = num_complex::Complex32;

/// Bytes per sample in the raw stream format (two little-endian `f32`).
pub const SAMPLE_BYTES: usize = 8;

/// The guide's chapters, compiled and run as doctests so their snippets stay
/// in sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/prototype.md")]
    mod prototype {}
    #[doc = include_str!("../../../book/src/polyphase-fir.md")]
    mod polyphase_fir {}
    #[doc = include_str!("../../../book/src/dft.md")]
    mod dft {}
    #[doc = include_str!("../../../book/src/streaming.md")]
    mod streaming {}
    #[doc = include_str!("../../../book/src/realtime.md")]
    mod realtime {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
