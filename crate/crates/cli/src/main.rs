// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `taco` command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use taco_core::analysis::report::{self, CodecRecord, CollectiveRecord, SweepRecord};
use taco_core::analysis::{
    block_size_sweep, compare_codecs, excess_kurtosis, generate, relative_l2, reshaping_summary, Distribution,
    ReportFormat, SyntheticSpec,
};
use taco_core::collective::scenario::{rank_inputs, Scenario};
use taco_core::{
    archive, compress_with, compressed_ratio, decompress_with, error_vs_frequency, tensor_file, Algorithm, CodecConfig,
    CodecKind, Execution, Fp8Variant, RankSet, TacoError,
};

#[derive(Parser)]
#[command(
    name = "taco",
    version,
    about = "Adaptive Scale-Hadamard + dual-scale FP8 tensor compression"
)]
struct Cli {
    /// Suppress wall-clock timings so reruns produce identical output.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a tensor file into a TACOCMP1 archive.
    Compress {
        input: PathBuf,
        output: PathBuf,
        /// Treat the input as headerless little-endian f32.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Decompress an archive into a TACOTNSR tensor file.
    Decompress {
        input: PathBuf,
        output: PathBuf,
        /// Tensor file to measure the reconstruction against.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Compare codecs on a tensor and emit an error report.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        /// Comma-separated codec list.
        #[arg(long, value_delimiter = ',', default_value = "int8,fp8,taco")]
        codecs: Vec<CodecKind>,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        /// Directory for per-codec error histograms.
        #[arg(long)]
        hist_dir: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate a compressed AllReduce.
    Simulate {
        /// TOML scenario; overrides the individual flags below.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(2..))]
        ranks: u32,
        #[arg(long, default_value_t = 1 << 20)]
        length: usize,
        #[arg(long, default_value = "all")]
        algorithm: AlgorithmChoice,
        /// gaussian, mixture or file:<path>.
        #[arg(long, default_value = "gaussian")]
        distribution: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Transport frame size in bytes.
        #[arg(long)]
        chunk_bytes: Option<usize>,
        /// Run every rank on the calling thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sweep block sizes for one codec.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        #[command(flatten)]
        codec: CodecArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args, Clone)]
struct CodecArgs {
    #[arg(long, default_value = "taco")]
    codec: CodecKind,
    #[arg(long, default_value = "e4m3")]
    format: Fp8Variant,
    #[arg(long, default_value_t = 256)]
    block_size: usize,
    /// Target block RMS.
    #[arg(long, default_value_t = 1.0)]
    tau: f32,
    #[arg(long, default_value_t = 1e-12)]
    epsilon: f32,
}

impl CodecArgs {
    fn config(&self) -> CodecConfig {
        CodecConfig {
            kind: self.codec,
            block_size: self.block_size,
            target_energy: self.tau,
            stability_epsilon: self.epsilon,
            format: self.format,
            ..CodecConfig::default()
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SyntheticKind {
    Gaussian,
    Mixture,
}

#[derive(Args)]
struct SourceArgs {
    /// Input tensor file. Required unless --synthetic is given.
    input: Option<PathBuf>,
    #[arg(long)]
    raw: bool,
    #[arg(long, conflicts_with = "input")]
    synthetic: Option<SyntheticKind>,
    #[arg(long, default_value_t = 1 << 20)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dense_sigma: f32,
    #[arg(long, default_value_t = 1.0)]
    tail_sigma: f32,
    #[arg(long, default_value_t = 0.01)]
    tail_fraction: f64,
}

impl SourceArgs {
    fn load(&self) -> Result<Vec<f32>, CliError> {
        let distribution = match (&self.input, self.synthetic) {
            (Some(path), _) => Distribution::File {
                path: path.clone(),
                raw: self.raw,
            },
            (None, Some(SyntheticKind::Gaussian)) => Distribution::Gaussian { sigma: 1.0 },
            (None, Some(SyntheticKind::Mixture)) => Distribution::NearZeroMixture {
                dense_sigma: self.dense_sigma,
                tail_sigma: self.tail_sigma,
                tail_fraction: self.tail_fraction,
            },
            (None, None) => return Err(CliError::Usage("an input file or --synthetic is required".into())),
        };
        Ok(generate(&SyntheticSpec {
            distribution,
            n: self.length,
            seed: self.seed,
        })?)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Report path, or `csv`/`json` for standard output.
    #[arg(long)]
    out: Option<String>,
    /// Overrides the format implied by the --out extension.
    #[arg(long)]
    report_format: Option<ReportFormat>,
}

impl OutArgs {
    fn write<T: serde::Serialize>(&self, records: &[T]) -> Result<(), CliError> {
        let (path, implied) = match self.out.as_deref() {
            None => (None, ReportFormat::Csv),
            Some(s) => match s.parse::<ReportFormat>() {
                Ok(f) => (None, f),
                Err(_) => (Some(PathBuf::from(s)), ReportFormat::from_path(Path::new(s))),
            },
        };
        let format = self.report_format.unwrap_or(implied);
        match path {
            None => report::emit(records, format, io::stdout().lock())?,
            Some(p) => {
                let mut w = create(&p)?;
                report::emit(records, format, &mut w)?;
                w.flush().map_err(|e| io_err(&p, e))?;
            }
        }
        Ok(())
    }

    /// Summaries go to stderr when the report itself is on stdout.
    fn summary(&self) -> Box<dyn Write> {
        match self.out.as_deref() {
            Some(s) if s.parse::<ReportFormat>().is_err() => Box::new(io::stdout()),
            _ => Box::new(io::stderr()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum AlgorithmChoice {
    All,
    One(Algorithm),
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(AlgorithmChoice::All)
        } else {
            s.parse().map(AlgorithmChoice::One)
        }
    }
}

enum CliError {
    Usage(String),
    Core(TacoError),
}

impl From<TacoError> for CliError {
    fn from(e: TacoError) -> Self {
        CliError::Core(e)
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Core(TacoError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

struct Clock {
    start: Instant,
    enabled: bool,
}

impl Clock {
    fn start(deterministic: bool) -> Self {
        Clock {
            start: Instant::now(),
            enabled: !deterministic,
        }
    }

    fn suffix(&self) -> String {
        if self.enabled {
            format!(" wall={:.3}s", self.start.elapsed().as_secs_f64())
        } else {
            String::new()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TACO_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TACO_THREADS must be a positive integer, got `{value}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} worker threads: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let clock = Clock::start(cli.deterministic);
    match cli.command {
        Command::Compress {
            input,
            output,
            raw,
            codec,
        } => {
            let cfg = codec.config();
            cfg.validate()?;
            let x = if raw {
                tensor_file::read_raw(&input)?
            } else {
                tensor_file::read(&input)?
            };
            let ct = compress_with(&x, &cfg, Execution::Parallel)?;
            archive::write_file(&output, &ct)?;
            println!(
                "compressed n={} blocks={} codec={} bytes={} ratio={:.4}{}",
                x.len(),
                ct.blocks.len(),
                cfg.label(),
                archive::archive_len(ct.encoding, ct.block_size, x.len()),
                compressed_ratio(&cfg, x.len()),
                clock.suffix()
            );
        }
        Command::Decompress {
            input,
            output,
            reference,
        } => {
            let ct = archive::read_file(&input)?;
            let y = decompress_with(&ct, Execution::Parallel)?;
            tensor_file::write(&output, &y)?;
            let mut line = format!("decompressed n={} codec={}", y.len(), ct.kind.name());
            if let Some(r) = reference {
                let x = tensor_file::read(&r)?;
                if x.len() != y.len() {
                    return Err(TacoError::LengthMismatch {
                        expected: x.len(),
                        actual: y.len(),
                    }
                    .into());
                }
                line += &format!(" relative_l2={:.6e}", relative_l2(&x, &y));
            }
            println!("{line}{}", clock.suffix());
        }
        Command::Analyze {
            source,
            codecs,
            bins,
            hist_dir,
            codec,
            out,
        } => {
            let x = source.load()?;
            let base = codec.config();
            let configs: Vec<CodecConfig> = codecs.iter().map(|&k| base.with_kind(k)).collect();
            let rows = compare_codecs(&x, &configs, bins)?;
            out.write(&rows.iter().map(CodecRecord::from).collect::<Vec<_>>())?;
            if let Some(dir) = hist_dir {
                std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
                for row in &rows {
                    let path = dir.join(format!("{}.csv", row.label));
                    let mut w = create(&path)?;
                    report::emit_histogram(&row.report.histogram, &mut w)?;
                    w.flush().map_err(|e| io_err(&path, e))?;
                }
            }
            let shape = reshaping_summary(&x, &base.with_kind(CodecKind::Taco))?;
            let k = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.3}"));
            let mut s = out.summary();
            let _ = writeln!(
                s,
                "analyzed n={} codecs={} kurtosis raw={} hadamard={} post_ash={}{}",
                x.len(),
                rows.len(),
                k(excess_kurtosis(&x)),
                k(shape.hadamard),
                k(shape.post_ash),
                clock.suffix()
            );
        }
        Command::Simulate {
            scenario,
            ranks,
            length,
            algorithm,
            distribution,
            seed,
            chunk_bytes,
            sequential,
            codec,
            out,
        } => {
            let (inputs, cfg, algorithms, chunk_bytes) = match scenario {
                Some(path) => {
                    let s = Scenario::load(&path)?;
                    (s.inputs()?, s.codec, s.algorithms()?, s.chunk_bytes)
                }
                None => {
                    let cfg = codec.config();
                    cfg.validate()?;
                    let algorithms = match algorithm {
                        AlgorithmChoice::All => Algorithm::ALL.to_vec(),
                        AlgorithmChoice::One(a) => vec![a],
                    };
                    (
                        rank_inputs(&distribution, ranks as usize, length, seed)?,
                        cfg,
                        algorithms,
                        chunk_bytes,
                    )
                }
            };
            let (p, n) = (inputs.len(), inputs[0].len());
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let rs = RankSet::new(inputs, algorithms[0], cfg)
                .with_chunk_bytes(chunk_bytes)
                .with_execution(exec);
            let rows: Vec<_> = error_vs_frequency(&rs)?
                .into_iter()
                .filter(|r| algorithms.contains(&r.algorithm))
                .collect();
            let label = cfg.label();
            out.write(
                &rows
                    .iter()
                    .map(|r| CollectiveRecord::new(r, p, n, &label))
                    .collect::<Vec<_>>(),
            )?;
            let mut s = out.summary();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{} ranks={p} n={n} relative_l2={:.6e} invocations={} bytes_on_wire={}",
                    r.algorithm, r.relative_l2, r.compress_invocations, r.bytes_on_wire
                );
            }
            let _ = writeln!(s, "simulated codec={label}{}", clock.suffix());
        }
        Command::Sweep {
            source,
            sizes,
            bins,
            codec,
            out,
        } => {
            let x = source.load()?;
            let rows = block_size_sweep(&x, &sizes, &codec.config(), bins)?;
            out.write(&rows.iter().map(SweepRecord::from).collect::<Vec<_>>())?;
            let mut s = out.summary();
            for r in &rows {
                let _ = writeln!(
                    s,
                    "b={} relative_l2={:.6e} ratio={:.4}",
                    r.block_size, r.report.relative_l2, r.ratio
                );
            }
            let _ = writeln!(s, "swept n={} sizes={}{}", x.len(), rows.len(), clock.suffix());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let mut lines = rendered.lines();
            let first = lines.next().unwrap_or_default();
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            for line in lines {
                eprintln!("{line}");
            }
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error[usage]: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
