//! Streaming channelizer: raw complex samples in, channelized spectra out.
//!
//! The stream format on both sides is headerless little-endian `f32`
//! interleaved `(re, im)`, spectrum-major. Each block read from the source is
//! prefixed with the previous `n_taps - 1` spectra, so the output does not
//! depend on where block boundaries fall.

use std::io::{self, Read, Write};

use crate::coeffgen::{generate_prototype_with_cutoff, FilterCoefficients};
use crate::config::PpfConfig;
use crate::dft::{ChannelizedOutput, Channelizer};
use crate::error::{PpfError, Result};
use crate::fir::{FilteredBlock, FirKernel, SampleBlock};
use crate::{ComplexSample, SAMPLE_BYTES};

/// Per-stream bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamState {
    n_channels: usize,
    n_taps: usize,
    /// The last `n_taps - 1` input spectra seen.
    pub history: Vec<ComplexSample>,
    pub spectra_processed: u64,
    /// Bytes of complete input spectra consumed.
    pub bytes_in: u64,
    pub bytes_out: u64,
    /// Trailing bytes that did not form a complete spectrum.
    pub discarded_bytes: u64,
}

impl StreamState {
    /// Empty history: the first output needs `n_taps` input spectra.
    pub fn new(n_channels: usize, n_taps: usize) -> Self {
        StreamState {
            n_channels,
            n_taps,
            history: Vec::new(),
            spectra_processed: 0,
            bytes_in: 0,
            bytes_out: 0,
            discarded_bytes: 0,
        }
    }

    /// History pre-filled with `n_taps - 1` zero spectra.
    pub fn zero_primed(n_channels: usize, n_taps: usize) -> Self {
        let mut state = Self::new(n_channels, n_taps);
        state.history = vec![ComplexSample::new(0.0, 0.0); (n_taps - 1) * n_channels];
        state
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn history_spectra(&self) -> usize {
        self.history.len() / self.n_channels
    }

    /// Sidecar text: one `key=value` per line.
    pub fn metadata(&self, beta: f64) -> String {
        format!(
            "nChannels={}\nnTaps={}\nbeta={}\nspectraProcessed={}\nbytesIn={}\nbytesOut={}\n",
            self.n_channels, self.n_taps, beta, self.spectra_processed, self.bytes_in, self.bytes_out
        )
    }
}

/// Prepends the stored history to `block` and keeps the last `n_taps - 1`
/// spectra of the result as the new history.
pub fn carry_history(state: &mut StreamState, block: SampleBlock) -> SampleBlock {
    let keep = (state.n_taps - 1) * state.n_channels;
    if keep == 0 {
        return block;
    }
    let nc = block.n_channels();
    let mut joined = std::mem::take(&mut state.history);
    joined.extend_from_slice(block.samples());
    state.history = joined[joined.len().saturating_sub(keep)..].to_vec();
    SampleBlock::new(joined, nc).expect("history and block hold whole spectra")
}

/// Decodes little-endian interleaved `f32` pairs. `offset` is the stream
/// position of `bytes[0]`, used in error reports.
pub fn decode_samples(bytes: &[u8], offset: u64) -> Result<Vec<ComplexSample>> {
    if bytes.len() % SAMPLE_BYTES != 0 {
        let at = offset + (bytes.len() - bytes.len() % SAMPLE_BYTES) as u64;
        return Err(PpfError::Decode {
            offset: at,
            reason: format!(
                "truncated sample ({} of {SAMPLE_BYTES} bytes)",
                bytes.len() % SAMPLE_BYTES
            ),
        });
    }
    let mut out = Vec::with_capacity(bytes.len() / SAMPLE_BYTES);
    for (i, chunk) in bytes.chunks_exact(SAMPLE_BYTES).enumerate() {
        let re = f32::from_le_bytes(chunk[..4].try_into().unwrap());
        let im = f32::from_le_bytes(chunk[4..].try_into().unwrap());
        if !(re.is_finite() && im.is_finite()) {
            return Err(PpfError::Decode {
                offset: offset + (i * SAMPLE_BYTES) as u64,
                reason: "non-finite sample".into(),
            });
        }
        out.push(ComplexSample::new(re, im));
    }
    Ok(out)
}

pub fn encode_samples(samples: &[ComplexSample], out: &mut Vec<u8>) {
    out.reserve(samples.len() * SAMPLE_BYTES);
    for s in samples {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
}

/// Reads until `buf` is full or the source is exhausted.
fn read_full<R: Read>(source: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match source.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// FIR + DFT engine for one configuration.
#[derive(Clone, Debug)]
pub struct Pipeline {
    config: PpfConfig,
    kernel: FirKernel,
    channelizer: Channelizer,
    workers: usize,
}

impl Pipeline {
    /// Designs the prototype from `config`.
    pub fn new(config: PpfConfig, workers: usize) -> Result<Self> {
        config.validate()?;
        let coeffs = generate_prototype_with_cutoff(
            config.n_channels,
            config.n_taps,
            config.window,
            config.cutoff,
        )?;
        Self::with_coefficients(config, &coeffs, workers)
    }

    /// Uses externally supplied coefficients, which must match the
    /// configured channel and tap counts.
    pub fn with_coefficients(
        config: PpfConfig,
        coeffs: &FilterCoefficients,
        workers: usize,
    ) -> Result<Self> {
        config.validate()?;
        if workers == 0 {
            return Err(PpfError::config("worker count must be at least 1"));
        }
        if coeffs.n_channels() != config.n_channels || coeffs.n_taps() != config.n_taps {
            return Err(PpfError::config(format!(
                "coefficients are {}x{} but the configuration is {}x{}",
                coeffs.n_channels(),
                coeffs.n_taps(),
                config.n_channels,
                config.n_taps
            )));
        }
        let channelizer = Channelizer::new(config.n_channels, config.fft_fallback)?;
        Ok(Pipeline {
            kernel: FirKernel::new(coeffs),
            channelizer,
            config,
            workers,
        })
    }

    pub fn config(&self) -> &PpfConfig {
        &self.config
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn new_state(&self) -> StreamState {
        if self.config.zero_prime {
            StreamState::zero_primed(self.config.n_channels, self.config.n_taps)
        } else {
            StreamState::new(self.config.n_channels, self.config.n_taps)
        }
    }

    /// Runs one block through history, FIR and DFT. Updates every counter in
    /// `state` except `bytes_in`, which belongs to the decoder.
    pub fn process_block(
        &self,
        state: &mut StreamState,
        block: SampleBlock,
    ) -> Result<ChannelizedOutput> {
        let input = carry_history(state, block);
        let filtered = if input.n_spectra() >= self.config.n_taps {
            self.kernel.apply(&input, self.workers)?
        } else {
            FilteredBlock::empty(self.config.n_channels)
        };
        let out = self.channelizer.apply(&filtered, self.workers)?;
        state.spectra_processed += out.n_spectra as u64;
        state.bytes_out += (out.bins.len() * SAMPLE_BYTES) as u64;
        Ok(out)
    }

    /// Streams `source` to `sink` block by block in a single pass.
    pub fn process_stream<R: Read, W: Write>(&self, mut source: R, mut sink: W) -> Result<StreamState> {
        let spectrum_bytes = self.config.spectrum_bytes();
        let mut raw = vec![0u8; self.config.block_spectra * spectrum_bytes];
        let mut encoded = Vec::new();
        let mut state = self.new_state();
        let mut offset = 0u64;

        loop {
            let filled = read_full(&mut source, &mut raw)?;
            let whole = filled - filled % spectrum_bytes;
            if filled % SAMPLE_BYTES != 0 {
                return Err(PpfError::Decode {
                    offset: offset + (filled - filled % SAMPLE_BYTES) as u64,
                    reason: "stream ends inside a sample".into(),
                });
            }
            if whole > 0 {
                let samples = decode_samples(&raw[..whole], offset)?;
                state.bytes_in += whole as u64;
                let block = SampleBlock::new(samples, self.config.n_channels)?;
                let out = self.process_block(&mut state, block)?;
                encoded.clear();
                encode_samples(&out.bins, &mut encoded);
                sink.write_all(&encoded).map_err(PpfError::Write)?;
            }
            if filled < raw.len() {
                // Finite values are still required in the discarded tail.
                decode_samples(&raw[whole..filled], offset + whole as u64)?;
                state.discarded_bytes = (filled - whole) as u64;
                break;
            }
            offset += filled as u64;
        }
        sink.flush().map_err(PpfError::Write)?;
        Ok(state)
    }
}

/// Convenience wrapper: designs the filter from `config` and streams with
/// as many workers as the machine offers.
pub fn process_stream<R: Read, W: Write>(
    config: &PpfConfig,
    source: R,
    sink: W,
) -> Result<StreamState> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    Pipeline::new(config.clone(), workers)?.process_stream(source, sink)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectra(ids: &[f32], nc: usize) -> SampleBlock {
        let samples = ids
            .iter()
            .flat_map(|&id| (0..nc).map(move |c| ComplexSample::new(id, c as f32)))
            .collect();
        SampleBlock::new(samples, nc).unwrap()
    }

    #[test]
    fn carry_without_lookback() {
        let mut state = StreamState::new(2, 1);
        let block = spectra(&[1.0, 2.0], 2);
        assert_eq!(carry_history(&mut state, block.clone()), block);
        assert!(state.history.is_empty());
    }

    #[test]
    fn carry_symbolic() {
        let nc = 3;
        let mut state = StreamState::new(nc, 4);
        state.history = spectra(&[1.0, 2.0, 3.0], nc).into_samples();
        let out = carry_history(&mut state, spectra(&[4.0, 5.0], nc));
        assert_eq!(out, spectra(&[1.0, 2.0, 3.0, 4.0, 5.0], nc));
        assert_eq!(state.history, spectra(&[3.0, 4.0, 5.0], nc).into_samples());
    }

    #[test]
    fn carry_short_history_grows() {
        let mut state = StreamState::new(1, 4);
        carry_history(&mut state, spectra(&[1.0], 1));
        assert_eq!(state.history_spectra(), 1);
        carry_history(&mut state, spectra(&[2.0], 1));
        let out = carry_history(&mut state, spectra(&[3.0, 4.0], 1));
        assert_eq!(out, spectra(&[1.0, 2.0, 3.0, 4.0], 1));
        assert_eq!(state.history, spectra(&[2.0, 3.0, 4.0], 1).into_samples());
    }

    #[test]
    fn decode_reports_offsets() {
        let mut bytes = Vec::new();
        encode_samples(&[ComplexSample::new(1.0, 2.0), ComplexSample::new(f32::NAN, 0.0)], &mut bytes);
        match decode_samples(&bytes, 100) {
            Err(PpfError::Decode { offset, .. }) => assert_eq!(offset, 108),
            other => panic!("{other:?}"),
        }
        match decode_samples(&bytes[..11], 0) {
            Err(PpfError::Decode { offset, .. }) => assert_eq!(offset, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn metadata_lines() {
        let mut state = StreamState::new(4, 2);
        state.spectra_processed = 3;
        state.bytes_in = 128;
        state.bytes_out = 96;
        assert_eq!(
            state.metadata(9.0),
            "nChannels=4\nnTaps=2\nbeta=9\nspectraProcessed=3\nbytesIn=128\nbytesOut=96\n"
        );
    }
}
