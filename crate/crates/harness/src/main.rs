use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qvar_harness::env::init_thread_pool;
use qvar_harness::scans::{
    approx_error_scan, arc_classify, dump_multiplier, multifreq_constant_scan,
    variation_ratio_scan, verify_arith,
};
use qvar_harness::{ExperimentConfig, FamilySpec, HarnessError, Result, RunRecord};

#[derive(Parser, Debug)]
#[command(
    name = "qvar",
    version,
    about = "Numerical scans for q-variation of discrete averages"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat TOML config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ramanujan sums, residue counts, continuous averages and complete sums.
    VerifyArith {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long)]
        hua_limit: Option<u64>,
    },
    /// Sup-norm error between kernel transforms and approximating multipliers.
    ApproxScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<FamilySpec>,
        /// Comma-separated, increasing.
        #[arg(long, value_delimiter = ',')]
        n_grid: Option<Vec<u64>>,
        #[arg(long)]
        s_max: Option<u32>,
        #[arg(long)]
        density: Option<usize>,
    },
    /// Variation ratios of averages of random sequences.
    VariationScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<FamilySpec>,
        #[arg(long)]
        n_max: Option<u64>,
        #[arg(long)]
        ensemble: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        windows: Option<Vec<usize>>,
    },
    /// Constants of the multi-frequency variation bounds.
    MultifreqScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        freq_counts: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Classifies frequencies read as CSV rows into major and minor arcs.
    ArcClassify {
        #[command(flatten)]
        common: Common,
        /// CSV of frequencies, one per row; `-` reads standard input.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
    /// Samples the full approximating multiplier on a uniform grid.
    DumpMultiplier {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<FamilySpec>,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s_max: Option<u32>,
        /// Grid points per axis.
        #[arg(long, default_value_t = 256)]
        points: usize,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn run(command: Command) -> Result<(RunRecord, Common)> {
    let (rec, common) = match command {
        Command::VerifyArith {
            common,
            limit,
            hua_limit,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.limit, limit);
            set(&mut cfg.hua_limit, hua_limit);
            (verify_arith(&cfg)?, common)
        }
        Command::ApproxScan {
            common,
            family,
            n_grid,
            s_max,
            density,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.family, family);
            set(&mut cfg.n_grid, n_grid);
            set(&mut cfg.density, density);
            if s_max.is_some() {
                cfg.s_max = s_max;
            }
            cfg.validate()?;
            (approx_error_scan(&cfg)?, common)
        }
        Command::VariationScan {
            common,
            family,
            n_max,
            ensemble,
            windows,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.family, family);
            set(&mut cfg.variation_n_max, n_max);
            set(&mut cfg.ensemble, ensemble);
            set(&mut cfg.windows, windows);
            cfg.validate()?;
            (variation_ratio_scan(&cfg)?, common)
        }
        Command::MultifreqScan {
            common,
            freq_counts,
            trials,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.freq_counts, freq_counts);
            set(&mut cfg.trials, trials);
            (multifreq_constant_scan(&cfg)?, common)
        }
        Command::ArcClassify {
            common,
            input,
            n,
            dim,
        } => {
            let mut cfg = load(&common)?;
            if cfg.family.dim() != dim {
                cfg.family = FamilySpec::Poly(dim);
            }
            let text = if input.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin().read_to_string(&mut s)?;
                s
            } else {
                std::fs::read_to_string(&input).map_err(|e| {
                    HarnessError::Usage(format!("cannot read {}: {e}", input.display()))
                })?
            };
            (arc_classify(&cfg, &text, n)?, common)
        }
        Command::DumpMultiplier {
            common,
            family,
            n,
            s_max,
            points,
        } => {
            let mut cfg = load(&common)?;
            set(&mut cfg.family, family);
            if s_max.is_some() {
                cfg.s_max = s_max;
            }
            (dump_multiplier(&cfg, n, points)?, common)
        }
    };
    Ok((rec, common))
}

fn emit(rec: &RunRecord, common: &Common) -> Result<()> {
    let text = match common.format {
        Format::Csv => rec.to_csv(),
        Format::Json => rec.to_json(),
    };
    let target = common
        .out
        .clone()
        .or_else(|| rec.config.output_path.as_ref().map(PathBuf::from));
    match target {
        Some(p) => std::fs::write(&p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_thread_pool();
    let start = Instant::now();
    let outcome = run(cli.command).and_then(|(mut rec, common)| {
        rec.wall_clock = Some(start.elapsed());
        emit(&rec, &common)?;
        Ok(rec)
    });
    match outcome {
        Ok(rec) => {
            eprintln!("{}: {:.2} s", rec.command, start.elapsed().as_secs_f64());
            for c in rec.checks.iter().filter(|c| !c.passed) {
                eprintln!("check failed: {} ({})", c.name, c.detail);
            }
            ExitCode::from(if rec.all_passed() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
