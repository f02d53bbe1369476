use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ppf::bench::{spectra_for_bytes, sweep, sweep_config, write_csv, REPORT_NOTES};
use ppf::{
    generate_prototype_with_cutoff, read_coefficients, write_coefficients,
    write_coefficients_text, Pipeline, PpfConfig, WindowSpec,
};
use tempfile::NamedTempFile;

use crate::inspect;
use crate::{BenchArgs, CliError, CoeffArgs, Format, InspectArgs, RunArgs, StreamArgs};

type CliResult<T = ()> = Result<T, CliError>;

/// Output destination. File output goes to a temporary file next to the
/// destination and is renamed into place only on success, so a failed
/// command never leaves a partial file behind.
enum Sink {
    Stdout(BufWriter<io::Stdout>),
    File { writer: BufWriter<NamedTempFile>, dest: PathBuf },
}

impl Sink {
    fn open(path: Option<&Path>) -> CliResult<Sink> {
        let Some(dest) = path else {
            return Ok(Sink::Stdout(BufWriter::new(io::stdout())));
        };
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir)
            .map_err(|e| CliError::write(format!("cannot create {}: {e}", dest.display())))?;
        Ok(Sink::File { writer: BufWriter::new(tmp), dest: dest.to_path_buf() })
    }

    fn writer(&mut self) -> &mut dyn Write {
        match self {
            Sink::Stdout(w) => w,
            Sink::File { writer, .. } => writer,
        }
    }

    fn commit(self) -> CliResult {
        let fail = |e: &dyn std::fmt::Display| CliError::write(format!("write failed: {e}"));
        match self {
            Sink::Stdout(mut w) => w.flush().map_err(|e| fail(&e)),
            Sink::File { writer, dest } => {
                let tmp = writer.into_inner().map_err(|e| fail(e.error()))?;
                tmp.persist(&dest).map_err(|e| fail(&e.error))?;
                Ok(())
            }
        }
    }
}

fn open_input(path: &Path) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::usage(format!("cannot open {}: {e}", path.display())))
}

fn stream_config(
    n_channels: usize,
    n_taps: usize,
    beta: f64,
    cutoff: f64,
    stream: &StreamArgs,
) -> PpfConfig {
    let mut cfg = PpfConfig::new(n_channels, n_taps).with_window(WindowSpec::Kaiser { beta });
    cfg.cutoff = cutoff;
    if let Some(b) = stream.block_spectra {
        cfg.block_spectra = b;
    }
    cfg.reference_rate_bytes_per_sec = stream.rate_bytes;
    cfg.zero_prime = stream.zero_prime;
    cfg
}

pub fn coeff(args: CoeffArgs) -> CliResult {
    let beta = args.design.beta();
    let coeffs = generate_prototype_with_cutoff(
        args.channels,
        args.taps,
        WindowSpec::Kaiser { beta },
        args.design.cutoff(),
    )?;
    let mut sink = Sink::open(args.out.as_deref())?;
    let written = if args.text {
        write_coefficients_text(&coeffs, sink.writer())
    } else {
        write_coefficients(&coeffs, beta, sink.writer())
    };
    written.map_err(|e| CliError::write(e.to_string()))?;
    sink.commit()
}

pub fn run(args: RunArgs) -> CliResult {
    if args.meta && args.out.is_none() {
        return Err(CliError::usage("--meta requires --out"));
    }
    if args.stream.workers == 0 {
        return Err(CliError::usage("worker count must be at least 1"));
    }

    let (pipeline, beta) = match &args.coeff_file {
        Some(path) => {
            if args.channels.is_some() || args.taps.is_some() || args.design.given() {
                eprintln!(
                    "ppf: warning: using {}; --channels/--taps/--beta/--cutoff are ignored",
                    path.display()
                );
            }
            let file = read_coefficients(io::BufReader::new(open_input(path)?))?;
            let c = &file.coefficients;
            let cfg = stream_config(
                c.n_channels(),
                c.n_taps(),
                file.beta,
                args.design.cutoff(),
                &args.stream,
            );
            (Pipeline::with_coefficients(cfg, c, args.stream.workers)?, file.beta)
        }
        None => {
            let (Some(nc), Some(nt)) = (args.channels, args.taps) else {
                return Err(CliError::usage(
                    "--channels and --taps are required without --coeff-file",
                ));
            };
            let beta = args.design.beta();
            let cfg = stream_config(nc, nt, beta, args.design.cutoff(), &args.stream);
            (Pipeline::new(cfg, args.stream.workers)?, beta)
        }
    };

    let input = open_input(&args.input)?;
    let mut sink = Sink::open(args.out.as_deref())?;
    let state = pipeline.process_stream(input, sink.writer())?;
    sink.commit()?;

    if state.discarded_bytes > 0 {
        eprintln!(
            "ppf: warning: discarded {} trailing bytes (incomplete spectrum)",
            state.discarded_bytes
        );
    }
    if let (true, Some(out)) = (args.meta, &args.out) {
        let mut path = OsString::from(out.as_os_str());
        path.push(".meta");
        let mut meta = Sink::open(Some(Path::new(&path)))?;
        meta.writer()
            .write_all(state.metadata(beta).as_bytes())
            .map_err(|e| CliError::write(e.to_string()))?;
        meta.commit()?;
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> CliResult {
    if args.stream.workers == 0 {
        return Err(CliError::usage("worker count must be at least 1"));
    }
    let base = stream_config(1, 1, args.design.beta(), args.design.cutoff(), &args.stream);
    let grid: Vec<(usize, usize)> = args
        .channels
        .iter()
        .flat_map(|&nc| args.taps.iter().map(move |&nt| (nc, nt)))
        .collect();

    // reject the whole grid before timing anything
    for &(nc, nt) in &grid {
        let cfg = sweep_config(&base, nc, nt);
        cfg.validate()
            .map_err(|e| CliError::usage(format!("channels={nc} taps={nt}: {e}")))?;
        let spectra = spectra_for_bytes(args.total_bytes, nc);
        if spectra < nt as u64 {
            return Err(CliError::usage(format!(
                "channels={nc} taps={nt}: --total-bytes {} holds {spectra} spectra, need at least {nt}",
                args.total_bytes
            )));
        }
    }

    let mut sink = Sink::open(args.out.as_deref())?;
    eprint!("{REPORT_NOTES}");
    let reports = sweep(&base, &grid, args.total_bytes, args.stream.workers)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        eprintln!(
            "channels={} taps={} M_c={:.3} M_b={:.3} GFLOP/s={:.3}",
            r.config.n_channels, r.config.n_taps, r.m_c, r.m_b, r.gflops_per_sec
        );
    }

    let w = sink.writer();
    let written = match args.format {
        Format::Csv => write_csv(&reports, w).map_err(|e| CliError::write(e.to_string())),
        Format::Json => reports.iter().try_for_each(|r| {
            serde_json::to_writer(&mut *w, r)
                .map_err(io::Error::from)
                .and_then(|()| w.write_all(b"\n"))
                .map_err(|e| CliError::write(e.to_string()))
        }),
    };
    written?;
    sink.commit()
}

pub fn inspect(args: InspectArgs) -> CliResult {
    if args.channels == 0 {
        return Err(CliError::usage("channel count must be at least 1"));
    }
    let mut bytes = Vec::new();
    open_input(&args.input)?
        .read_to_end(&mut bytes)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.input.display())))?;
    let spectrum_bytes = args.channels * ppf::SAMPLE_BYTES;
    if bytes.len() % spectrum_bytes != 0 {
        return Err(CliError::data(format!(
            "{} bytes is not a whole number of {}-channel spectra ({spectrum_bytes} bytes each)",
            bytes.len(),
            args.channels
        )));
    }
    let samples = ppf::pipeline::decode_samples(&bytes, 0)?;

    let mut sink = Sink::open(None)?;
    let w = sink.writer();
    let text = if args.csv {
        inspect::power_csv(&samples, args.channels)
    } else {
        inspect::summary(&samples, args.channels, args.top_k)
    };
    w.write_all(text.as_bytes()).map_err(|e| CliError::write(e.to_string()))?;
    sink.commit()
}
