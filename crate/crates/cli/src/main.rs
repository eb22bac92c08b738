use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use posit_resilience::bitweight::{bit_weight_report, BitWeightReport};
use posit_resilience::exact::format_scientific;
use posit_resilience::ml::{
    generate_synthetic, parse_dataset_csv, run_benchmark, BenchConfig, FaultPolicy, FeatureConfig, SyntheticSpec,
    TimeSeriesDataset,
};
use posit_resilience::sweep::{
    nan_creation_oracle, run_sweep, write_histogram_csv, write_summary_csv, CorpusError, CorpusSource, SweepConfig,
    SweepError, WordCorpus, RECORD_CSV_HEADER,
};
use posit_resilience::{Format, RawWord32, UpsetMode, VERSION};

#[derive(Parser)]
#[command(name = "posit-resilience", version, about = "Bit-flip resilience of binary32 versus posit(32,2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inject faults into every word of a corpus and write records, summary and histogram CSVs.
    Sweep(SweepArgs),
    /// Per-bit error weights of one word.
    Weights(WeightsArgs),
    /// Classifier accuracy with faulted inputs, both formats.
    Mlbench(MlbenchArgs),
    /// Exact single-flip probabilities of creating NaN or NaR.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "seu")]
    mode: UpsetMode,
    /// uniform:N | seq:START:N | exhaustive | file:PATH
    #[arg(long)]
    corpus: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Skip MRED for words whose golden value is zero (otherwise they abort the run).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    exclude_zero_golden: bool,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated subset of float32,posit32.
    #[arg(long, value_delimiter = ',', default_value = "float32,posit32")]
    formats: Vec<Format>,
}

#[derive(Args)]
struct WeightsArgs {
    /// Eight hex digits.
    word: String,
    /// float32 or posit32.
    format: String,
}

#[derive(Args)]
struct MlbenchArgs {
    /// Built-in generator, e.g. classes=4,per=200,len=256[,noise=0.5].
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    synthetic: Option<String>,
    /// CSV with rows label,s0,s1,...
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    window: usize,
    #[arg(long, default_value_t = 64)]
    stride: usize,
    #[arg(long, default_value_t = 3)]
    levels: u32,
    #[arg(long, default_value_t = 8)]
    tree_depth: usize,
    /// Share of test vectors that receive one bit flip.
    #[arg(long, default_value_t = 1.0)]
    vector_fraction: f64,
    /// Baseline only: no flips.
    #[arg(long)]
    no_faults: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for bench.csv; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Directory for oracle.csv; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn header_line(args: &str) -> String {
    format!("# posit-resilience {VERSION} {args}")
}

fn formats_arg(formats: &[Format]) -> String {
    formats.iter().map(|f| f.as_str()).collect::<Vec<_>>().join(",")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(io_at(&path))?))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let source = CorpusSource::parse_spec(&args.corpus, args.seed).map_err(|e| match e {
        CorpusError::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Config(other.to_string()),
    })?;
    let mut formats = args.formats.clone();
    formats.dedup();
    if formats.is_empty() {
        return Err(Failure::Config("--formats selects nothing".into()));
    }
    let config = SweepConfig {
        corpus: WordCorpus {
            source,
            exclude_zero_golden: args.exclude_zero_golden,
        },
        mode: args.mode,
        seed: args.seed,
        workers: args.workers,
    };
    if let Some(warning) = config.cost_warning() {
        eprintln!("warning: {warning}");
    }
    let header = header_line(&format!(
        "sweep --mode {} --corpus {} --seed {} --exclude-zero-golden {} --formats {}",
        args.mode,
        args.corpus,
        args.seed,
        args.exclude_zero_golden,
        formats_arg(&formats)
    ));
    fs::create_dir_all(&args.out).map_err(io_at(&args.out))?;
    let mut records = create(&args.out, "records.csv")?;
    writeln!(records, "{header}")?;
    writeln!(records, "{RECORD_CSV_HEADER}")?;
    let summary = run_sweep(&config, |r| {
        if formats.contains(&r.format) {
            writeln!(records, "{}", r.csv_line())?;
        }
        Ok(())
    })
    .map_err(|e| match e {
        SweepError::Io(e) => Failure::Io(e.to_string()),
        other => Failure::Config(other.to_string()),
    })?;
    records.flush()?;
    let mut out = create(&args.out, "summary.csv")?;
    writeln!(out, "{header}")?;
    write_summary_csv(&mut out, &summary, &formats)?;
    out.flush()?;
    let mut out = create(&args.out, "histogram.csv")?;
    writeln!(out, "{header}")?;
    write_histogram_csv(&mut out, &summary, &formats)?;
    out.flush()?;
    println!("{}", summary.headline());
    Ok(())
}

fn weights_csv(report: &BitWeightReport, header: &str) -> String {
    let mut out = format!("{header}\nbit,region,flipped_word,outcome_class,outcome_value,abs_error,relative_error,closed_form,layout_changed\n");
    for b in &report.bits {
        let value = if b.outcome.class.has_value() {
            b.outcome.value.to_decimal_string()
        } else {
            String::new()
        };
        let abs = b.abs_error.as_ref().map(|e| e.to_decimal_string()).unwrap_or_default();
        let rel = b
            .relative_error(report.golden.value)
            .map(|r| format_scientific(&r, 17))
            .unwrap_or_default();
        let closed = b.closed_form.map(|c| c.to_decimal_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            b.bit,
            b.region.as_str(),
            b.flipped,
            b.outcome.class.as_str(),
            value,
            abs,
            rel,
            closed,
            b.layout_changed
        );
    }
    out
}

fn cmd_weights(args: WeightsArgs) -> Result<(), Failure> {
    let word: RawWord32 = args
        .word
        .parse()
        .map_err(|e: posit_resilience::word::ParseWordError| Failure::Config(e.to_string()))?;
    let format: Format = args
        .format
        .parse()
        .map_err(|e: posit_resilience::word::ParseFormatError| Failure::Config(e.to_string()))?;
    let report = bit_weight_report(word, format).map_err(|e| Failure::Config(e.to_string()))?;
    let header = header_line(&format!("weights {word} {format}"));
    io::stdout().write_all(weights_csv(&report, &header).as_bytes())?;
    Ok(())
}

fn load_dataset(args: &MlbenchArgs) -> Result<(TimeSeriesDataset, String), Failure> {
    if let Some(spec) = &args.synthetic {
        let spec: SyntheticSpec = spec.parse().map_err(|e: posit_resilience::ml::MlError| Failure::Config(e.to_string()))?;
        let ds = generate_synthetic(spec, args.seed).map_err(|e| Failure::Config(e.to_string()))?;
        let canonical = format!(
            "--synthetic classes={},per={},len={},noise={}",
            spec.classes, spec.per_class, spec.length, spec.noise
        );
        return Ok((ds, canonical));
    }
    let path = args.data.as_ref().expect("clap requires --synthetic or --data");
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let ds = parse_dataset_csv(&path.display().to_string(), &text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok((ds, format!("--data {}", path.display())))
}

fn cmd_mlbench(args: MlbenchArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.vector_fraction) {
        return Err(Failure::Config("--vector-fraction must lie in [0, 1]".into()));
    }
    let (dataset, source) = load_dataset(&args)?;
    let policy = if args.no_faults {
        FaultPolicy::disabled()
    } else {
        FaultPolicy {
            enabled: true,
            vector_fraction: args.vector_fraction,
        }
    };
    let config = BenchConfig {
        features: FeatureConfig {
            window_len: args.window,
            stride: args.stride,
            levels: args.levels,
        },
        tree_depth: args.tree_depth,
        policy,
        train_fraction: 0.7,
        seed: args.seed,
        workers: args.workers,
    };
    let report = run_benchmark(&dataset, &config).map_err(|e| Failure::Config(e.to_string()))?;
    let header = header_line(&format!(
        "mlbench {source} --seed {} --window {} --stride {} --levels {} --tree-depth {} --vector-fraction {}{} # policy={}",
        args.seed,
        args.window,
        args.stride,
        args.levels,
        args.tree_depth,
        args.vector_fraction,
        if args.no_faults { " --no-faults" } else { "" },
        policy.describe()
    ));
    let text = format!("{header}\n{}", report.csv());
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_at(dir))?;
            let path = dir.join("bench.csv");
            fs::write(&path, text).map_err(io_at(&path))?;
            eprintln!(
                "mean accuracy drop: float32 {:.4} posit32 {:.4}",
                report.mean_drop(Format::Float32),
                report.mean_drop(Format::Posit32)
            );
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let text = format!("{}\n{}", header_line("oracle"), nan_creation_oracle().csv());
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_at(dir))?;
            let path = dir.join("oracle.csv");
            fs::write(&path, text).map_err(io_at(&path))?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Weights(a) => cmd_weights(a),
        Command::Mlbench(a) => cmd_mlbench(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
