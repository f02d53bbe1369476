use ppf::bench::{
    run_benchmark_with, sweep_with, BenchmarkReport, MonotonicTimer, Phase, Timer,
};
use ppf::{flops_for_dft, flops_for_fir, run_benchmark, PpfConfig, Result};

/// Deterministic clock: every compute run takes `compute` seconds, every
/// end-to-end run `end_to_end`.
struct FakeClock {
    compute: f64,
    end_to_end: f64,
}

impl Timer for FakeClock {
    fn time(&mut self, phase: Phase, work: &mut dyn FnMut() -> Result<()>) -> Result<f64> {
        work()?;
        Ok(match phase {
            Phase::Compute => self.compute,
            Phase::EndToEnd => self.end_to_end,
        })
    }
}

fn strip_timing(r: &BenchmarkReport) -> BenchmarkReport {
    BenchmarkReport {
        wall_compute_sec: 0.0,
        wall_end_to_end_sec: 0.0,
        m_b: 0.0,
        m_c: 0.0,
        gflops_per_sec: 0.0,
        bandwidth_gb_per_sec: 0.0,
        ..r.clone()
    }
}

#[test]
fn metric_arithmetic_with_fake_clock() {
    let cfg = PpfConfig::new(16, 4);
    let mut clock = FakeClock { compute: 0.25, end_to_end: 0.5 };
    let r = run_benchmark_with(&cfg, 100, 2, &mut clock).unwrap();
    let secs = (100 * 16 * 8) as f64 / 6.5e9;
    assert_eq!(r.data_seconds, secs);
    assert_eq!(r.m_b, secs / 0.5);
    assert_eq!(r.m_c, secs / 0.25);
    let flops = flops_for_fir(16, 4, 97) + flops_for_dft(16, 97);
    assert_eq!(r.total_flops(), flops);
    assert_eq!(r.gflops_per_sec, flops as f64 / 0.25 / 1e9);
    assert_eq!(r.bandwidth_gb_per_sec, ((100 + 97) * 16 * 8) as f64 / 0.25 / 1e9);
}

#[test]
fn compute_only_is_faster_than_end_to_end() {
    let r = run_benchmark(&PpfConfig::new(256, 8), 2000, 2).unwrap();
    assert!(r.m_c >= r.m_b, "m_c={} m_b={}", r.m_c, r.m_b);
    assert!(r.wall_compute_sec > 0.0 && r.wall_end_to_end_sec > 0.0);
    assert!((r.m_b - r.data_seconds / r.wall_end_to_end_sec).abs() <= 1e-9 * r.m_b);
    assert!((r.m_c - r.data_seconds / r.wall_compute_sec).abs() <= 1e-9 * r.m_c);
}

#[test]
fn singleton_sweep_equals_single_run() {
    let base = PpfConfig::new(32, 4);
    let total_bytes = 32 * 8 * 200;
    let mut clock = FakeClock { compute: 0.1, end_to_end: 0.2 };
    let swept = sweep_with(&base, &[(32, 4)], total_bytes, 1, &mut clock);
    let single = run_benchmark_with(&base, 200, 1, &mut clock).unwrap();
    assert_eq!(swept.len(), 1);
    assert_eq!(swept[0].as_ref().unwrap(), &single);
}

#[test]
fn sweep_keeps_bytes_and_order() {
    let base = PpfConfig::new(1, 1);
    let total_bytes = 1024 * 8 * 64;
    let mut clock = FakeClock { compute: 0.1, end_to_end: 0.2 };
    let out = sweep_with(&base, &[(64, 8), (1024, 8)], total_bytes, 1, &mut clock);
    let a = out[0].as_ref().unwrap();
    let b = out[1].as_ref().unwrap();
    assert_eq!((a.config.n_channels, b.config.n_channels), (64, 1024));
    assert_eq!(a.bytes_in, total_bytes);
    assert_eq!(a.bytes_in, b.bytes_in);
}

#[test]
fn fir_flops_scale_linearly_in_taps() {
    let base = PpfConfig::new(64, 2);
    let total_bytes = 64 * 8 * 500;
    let mut clock = FakeClock { compute: 0.1, end_to_end: 0.2 };
    let grid = [(64, 2), (64, 4), (64, 8), (64, 16)];
    let reports: Vec<_> = sweep_with(&base, &grid, total_bytes, 1, &mut clock)
        .into_iter()
        .map(|r| r.unwrap())
        .collect();
    for (r, &(nc, nt)) in reports.iter().zip(&grid) {
        let out = 500 - nt as u64 + 1;
        assert_eq!(r.fir_flops, flops_for_fir(nc, nt, out as usize));
        assert_eq!(r.fir_flops, out * 64 * nt as u64 * 4);
        assert_eq!(r.dft_flops, flops_for_dft(nc, out as usize));
    }
    // per-output-spectrum FIR cost is exactly proportional to taps
    let per_spectrum: Vec<u64> = reports
        .iter()
        .map(|r| r.fir_flops / (r.total_spectra + 1 - r.config.n_taps as u64))
        .collect();
    assert_eq!(per_spectrum, vec![512, 1024, 2048, 4096]);
}

#[test]
fn sweep_records_errors_in_place() {
    let base = PpfConfig::new(1, 1);
    let mut clock = FakeClock { compute: 0.1, end_to_end: 0.2 };
    // 4 spectra at 64 channels: enough for 2 taps, not for 16; channel count 0 is invalid
    let out = sweep_with(&base, &[(64, 16), (0, 2), (64, 2)], 64 * 8 * 4, 1, &mut clock);
    assert!(out[0].is_err());
    assert!(out[1].is_err());
    assert!(out[2].is_ok());
}

#[test]
fn non_timing_fields_are_reproducible() {
    let cfg = PpfConfig::new(64, 4);
    let a = run_benchmark_with(&cfg, 300, 2, &mut MonotonicTimer).unwrap();
    let b = run_benchmark_with(&cfg, 300, 2, &mut MonotonicTimer).unwrap();
    assert_eq!(strip_timing(&a), strip_timing(&b));
}

#[test]
fn json_report_has_snake_case_fields() {
    let cfg = PpfConfig::new(8, 2);
    let r = BenchmarkReport::from_timings(&cfg, 1, 10, 0.5, 1.0).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    for key in [
        "config",
        "wall_compute_sec",
        "wall_end_to_end_sec",
        "data_seconds",
        "m_b",
        "m_c",
        "gflops_per_sec",
        "bandwidth_gb_per_sec",
        "workers",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["n_channels"], 8);
    assert_eq!(v["config"]["window"]["kind"], "Kaiser");
    assert_eq!(v["m_b"], r.data_seconds);
}

#[test]
fn reference_scenario_is_one_second() {
    // 6.5e9 bytes is not a whole number of 8 KiB spectra; take the nearest.
    let cfg = PpfConfig::new(1024, 16);
    let spectra = (6.5e9f64 / (1024.0 * 8.0)).round() as u64;
    let r = BenchmarkReport::from_timings(&cfg, 4, spectra, 0.2, 0.4).unwrap();
    assert!((r.data_seconds - 1.0).abs() < 2e-6);
    assert!((r.m_c - r.data_seconds / 0.2).abs() < 1e-12);
    assert!((r.m_b - r.data_seconds / 0.4).abs() < 1e-12);

    let exact = BenchmarkReport::from_timings(&PpfConfig::new(1, 1), 1, 812_500_000, 0.2, 0.5).unwrap();
    assert_eq!(exact.data_seconds, 1.0);
    assert_eq!(exact.m_c, 5.0);
    assert_eq!(exact.m_b, 2.0);
}
