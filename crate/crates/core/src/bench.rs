//! Real-time throughput measurement.
//!
//! The real-time multiple is `data_seconds / wall_seconds`, where
//! `data_seconds` is how long the reference stream takes to deliver the
//! processed bytes. Two multiples are reported:
//!
//! * `m_c`: FIR + DFT over input already resident in memory.
//! * `m_b`: end to end, decoding the input from storage and encoding the
//!   output back to storage. On a CPU this stands in for the host/device
//!   transfers an accelerator would pay.
//!
//! GB is 10^9 bytes. Bandwidth counts input read plus output written.

use std::fs::File;
use std::hint::black_box;
use std::io::{BufWriter, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::PpfConfig;
use crate::dft::flops_for_dft;
use crate::error::{PpfError, Result};
use crate::fir::{flops_for_fir, SampleBlock};
use crate::pipeline::{encode_samples, Pipeline};
use crate::{ComplexSample, SAMPLE_BYTES};

/// Timed repetitions per phase; one extra warm-up run is discarded.
pub const REPETITIONS: usize = 5;

/// Seed of the synthetic input.
pub const INPUT_SEED: u64 = 0x5EED_0F_9F;

/// Printed alongside reports.
pub const REPORT_NOTES: &str = "\
# m_c: FIR+DFT with input resident in memory; m_b: end to end incl. storage decode/encode
# bandwidth_gb_per_sec counts bytes read plus bytes written; GB = 1e9 bytes
# timings: median of 5 runs after one discarded warm-up";

pub fn realtime_multiple(data_seconds: f64, wall_seconds: f64) -> Result<f64> {
    if !(data_seconds > 0.0 && wall_seconds > 0.0) {
        return Err(PpfError::Domain(format!(
            "real-time multiple needs positive durations, got data={data_seconds} wall={wall_seconds}"
        )));
    }
    Ok(data_seconds / wall_seconds)
}

/// Seconds of the reference stream contained in `bytes`.
pub fn data_seconds(bytes: u64, reference_rate_bytes_per_sec: u64) -> f64 {
    bytes as f64 / reference_rate_bytes_per_sec as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Compute,
    EndToEnd,
}

/// Measures how long `work` takes. Injectable so the metric arithmetic can
/// be tested without a real clock.
pub trait Timer {
    fn time(&mut self, phase: Phase, work: &mut dyn FnMut() -> Result<()>) -> Result<f64>;
}

/// Wall-clock timer.
#[derive(Clone, Copy, Debug, Default)]
pub struct MonotonicTimer;

impl Timer for MonotonicTimer {
    fn time(&mut self, _phase: Phase, work: &mut dyn FnMut() -> Result<()>) -> Result<f64> {
        let start = Instant::now();
        work()?;
        Ok(start.elapsed().as_secs_f64())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub config: PpfConfig,
    pub workers: usize,
    pub total_spectra: u64,
    pub bytes_in: u64,
    pub bytes_out: u64,
    pub fir_flops: u64,
    pub dft_flops: u64,
    pub wall_compute_sec: f64,
    pub wall_end_to_end_sec: f64,
    pub data_seconds: f64,
    pub m_b: f64,
    pub m_c: f64,
    pub gflops_per_sec: f64,
    pub bandwidth_gb_per_sec: f64,
}

/// Output spectra the pipeline emits for `total_spectra` input spectra.
pub fn output_spectra(config: &PpfConfig, total_spectra: u64) -> u64 {
    if config.zero_prime {
        total_spectra
    } else {
        (total_spectra + 1).saturating_sub(config.n_taps as u64)
    }
}

impl BenchmarkReport {
    /// Derives every metric from the configuration and two timings.
    pub fn from_timings(
        config: &PpfConfig,
        workers: usize,
        total_spectra: u64,
        wall_compute_sec: f64,
        wall_end_to_end_sec: f64,
    ) -> Result<Self> {
        let nc = config.n_channels;
        let spectrum_bytes = (nc * SAMPLE_BYTES) as u64;
        let out_spectra = output_spectra(config, total_spectra);
        let bytes_in = total_spectra * spectrum_bytes;
        let bytes_out = out_spectra * spectrum_bytes;
        let fir_flops = flops_for_fir(nc, config.n_taps, out_spectra as usize);
        let dft_flops = flops_for_dft(nc, out_spectra as usize);
        let secs = data_seconds(bytes_in, config.reference_rate_bytes_per_sec);
        Ok(BenchmarkReport {
            config: config.clone(),
            workers,
            total_spectra,
            bytes_in,
            bytes_out,
            fir_flops,
            dft_flops,
            wall_compute_sec,
            wall_end_to_end_sec,
            data_seconds: secs,
            m_b: realtime_multiple(secs, wall_end_to_end_sec)?,
            m_c: realtime_multiple(secs, wall_compute_sec)?,
            gflops_per_sec: (fir_flops + dft_flops) as f64 / wall_compute_sec / 1e9,
            bandwidth_gb_per_sec: (bytes_in + bytes_out) as f64 / wall_compute_sec / 1e9,
        })
    }

    pub fn total_flops(&self) -> u64 {
        self.fir_flops + self.dft_flops
    }
}

/// Reproducible uniform noise in `[-1, 1)` for both components.
pub fn synthetic_input(n_samples: usize, seed: u64) -> Vec<ComplexSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| ComplexSample::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn timed_median(
    timer: &mut dyn Timer,
    phase: Phase,
    work: &mut dyn FnMut() -> Result<()>,
) -> Result<f64> {
    timer.time(phase, work)?;
    let runs = (0..REPETITIONS)
        .map(|_| timer.time(phase, work))
        .collect::<Result<Vec<_>>>()?;
    Ok(median(runs))
}

pub fn run_benchmark(config: &PpfConfig, total_spectra: usize, workers: usize) -> Result<BenchmarkReport> {
    run_benchmark_with(config, total_spectra, workers, &mut MonotonicTimer)
}

/// Benchmarks one configuration with the given timer.
pub fn run_benchmark_with(
    config: &PpfConfig,
    total_spectra: usize,
    workers: usize,
    timer: &mut dyn Timer,
) -> Result<BenchmarkReport> {
    config.validate()?;
    if total_spectra < config.n_taps {
        return Err(PpfError::config(format!(
            "benchmark needs at least {} spectra, got {total_spectra}",
            config.n_taps
        )));
    }
    let pipeline = Pipeline::new(config.clone(), workers)?;
    let nc = config.n_channels;
    let input = synthetic_input(total_spectra * nc, INPUT_SEED);
    let expected_out = output_spectra(config, total_spectra as u64);

    let mut compute = || -> Result<()> {
        let mut state = pipeline.new_state();
        for chunk in input.chunks(config.block_spectra * nc) {
            let block = SampleBlock::new(chunk.to_vec(), nc)?;
            black_box(pipeline.process_block(&mut state, block)?);
        }
        debug_assert_eq!(state.spectra_processed, expected_out);
        Ok(())
    };
    let wall_compute = timed_median(timer, Phase::Compute, &mut compute)?;

    let dir = tempfile::tempdir()?;
    let in_path = dir.path().join("input.raw");
    let out_path = dir.path().join("output.raw");
    {
        let mut bytes = Vec::new();
        encode_samples(&input, &mut bytes);
        let mut f = BufWriter::new(File::create(&in_path)?);
        f.write_all(&bytes)?;
        f.flush()?;
    }
    let mut end_to_end = || -> Result<()> {
        let source = File::open(&in_path)?;
        let sink = File::create(&out_path).map_err(PpfError::Write)?;
        let state = pipeline.process_stream(source, sink)?;
        if state.spectra_processed != expected_out {
            return Err(PpfError::config(format!(
                "end-to-end run produced {} spectra, expected {expected_out}",
                state.spectra_processed
            )));
        }
        Ok(())
    };
    let wall_end_to_end = timed_median(timer, Phase::EndToEnd, &mut end_to_end)?;

    BenchmarkReport::from_timings(config, workers, total_spectra as u64, wall_compute, wall_end_to_end)
}

pub fn sweep(
    base: &PpfConfig,
    grid: &[(usize, usize)],
    total_bytes: u64,
    workers: usize,
) -> Vec<Result<BenchmarkReport>> {
    sweep_with(base, grid, total_bytes, workers, &mut MonotonicTimer)
}

/// Configuration for one `(n_channels, n_taps)` grid point, keeping the
/// rest of `base`.
pub fn sweep_config(base: &PpfConfig, n_channels: usize, n_taps: usize) -> PpfConfig {
    let mut cfg = base.clone();
    cfg.n_channels = n_channels;
    cfg.n_taps = n_taps;
    cfg.block_spectra = base.block_spectra.max(n_taps);
    cfg
}

/// Spectra that fit in `total_bytes` at `n_channels`.
pub fn spectra_for_bytes(total_bytes: u64, n_channels: usize) -> u64 {
    total_bytes / (n_channels * SAMPLE_BYTES) as u64
}

/// Benchmarks each grid point in order. A failing point leaves its error in
/// place and the sweep continues.
pub fn sweep_with(
    base: &PpfConfig,
    grid: &[(usize, usize)],
    total_bytes: u64,
    workers: usize,
    timer: &mut dyn Timer,
) -> Vec<Result<BenchmarkReport>> {
    grid.iter()
        .map(|&(nc, nt)| {
            let cfg = sweep_config(base, nc, nt);
            cfg.validate()?;
            let spectra = spectra_for_bytes(total_bytes, nc);
            run_benchmark_with(&cfg, spectra as usize, workers, timer)
        })
        .collect()
}

pub const CSV_COLUMNS: [&str; 10] = [
    "n_channels",
    "n_taps",
    "workers",
    "m_b",
    "m_c",
    "gflops_per_sec",
    "bandwidth_gb_per_sec",
    "fir_flops",
    "dft_flops",
    "bytes_in",
];

/// One header row, then one row per report.
pub fn write_csv<W: Write>(reports: &[BenchmarkReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| PpfError::Write(e.into());
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in reports {
        w.write_record([
            r.config.n_channels.to_string(),
            r.config.n_taps.to_string(),
            r.workers.to_string(),
            r.m_b.to_string(),
            r.m_c.to_string(),
            r.gflops_per_sec.to_string(),
            r.bandwidth_gb_per_sec.to_string(),
            r.fir_flops.to_string(),
            r.dft_flops.to_string(),
            r.bytes_in.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(PpfError::Write)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Returns fixed durations per phase and still runs the work.
    pub(crate) struct FixedTimer {
        pub compute: f64,
        pub end_to_end: f64,
        pub calls: usize,
    }

    impl Timer for FixedTimer {
        fn time(&mut self, phase: Phase, work: &mut dyn FnMut() -> Result<()>) -> Result<f64> {
            work()?;
            self.calls += 1;
            Ok(match phase {
                Phase::Compute => self.compute,
                Phase::EndToEnd => self.end_to_end,
            })
        }
    }

    #[test]
    fn multiple_examples() {
        assert_eq!(realtime_multiple(1.0, 0.5).unwrap(), 2.0);
        assert_eq!(realtime_multiple(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(realtime_multiple(2.5, 0.4).unwrap(), 6.25);
        assert!(realtime_multiple(0.0, 1.0).is_err());
        assert!(realtime_multiple(1.0, -1.0).is_err());
        assert!(realtime_multiple(1.0, f64::NAN).is_err());
    }

    #[test]
    fn data_seconds_examples() {
        assert_eq!(data_seconds(6_500_000_000, 6_500_000_000), 1.0);
        assert_eq!(data_seconds(3_250_000_000, 6_500_000_000), 0.5);
        assert!((data_seconds(1_000_000, 6_500_000_000) - 1.5385e-4).abs() < 1e-8);
    }

    #[test]
    fn median_of_runs() {
        assert_eq!(median(vec![5.0, 1.0, 3.0, 2.0, 4.0]), 3.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
    }

    #[test]
    fn injected_timer_drives_metrics() {
        let mut cfg = PpfConfig::new(8, 4);
        cfg.reference_rate_bytes_per_sec = 64 * 8 * 8; // 64 spectra per second
        let mut timer = FixedTimer { compute: 0.2, end_to_end: 0.5, calls: 0 };
        let r = run_benchmark_with(&cfg, 64, 1, &mut timer).unwrap();
        assert_eq!(timer.calls, 2 * (REPETITIONS + 1));
        assert_eq!(r.data_seconds, 1.0);
        assert_eq!(r.m_c, 5.0);
        assert_eq!(r.m_b, 2.0);
        assert_eq!(r.fir_flops, flops_for_fir(8, 4, 61));
        assert_eq!(r.dft_flops, flops_for_dft(8, 61));
        assert_eq!(r.bytes_out, 61 * 64);
    }

    #[test]
    fn synthetic_input_is_reproducible() {
        assert_eq!(synthetic_input(100, 7), synthetic_input(100, 7));
        assert_ne!(synthetic_input(100, 7), synthetic_input(100, 8));
        assert!(synthetic_input(1000, 1)
            .iter()
            .all(|c| (-1.0..1.0).contains(&c.re) && (-1.0..1.0).contains(&c.im)));
    }

    #[test]
    fn rejects_short_runs() {
        let cfg = PpfConfig::new(8, 16);
        assert!(run_benchmark(&cfg, 15, 1).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = PpfConfig::new(64, 8);
        let r = BenchmarkReport::from_timings(&cfg, 2, 100, 0.01, 0.02).unwrap();
        let mut buf = Vec::new();
        write_csv(&[r.clone(), r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].starts_with("64,8,2,"));
    }
}
