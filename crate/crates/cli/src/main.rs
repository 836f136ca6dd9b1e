use clap::{Args, Parser, Subcommand};
use lorentzlab_cli::{render, run, write_atomic, Analysis, CliError, Options};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "lorentzlab", version, about = "Numerical pseudo-Riemannian geometry on coordinate charts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Manifold spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Report file (JSON), written atomically.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated chart point; defaults to the spec file's point or the sample box center.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a plot-ready CSV table (scan-cx, geodesic).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Metric, Christoffel symbols, Riemann tensor and sectional-curvature spread at a point.
    Curvature {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Scan for lightlike geodesic hypersurfaces through a point.
    ScanCx {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 16)]
        resolution: usize,
    },
    /// Killing residuals of the spec file's fields and a lightlike search over a builtin basis.
    Killing {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
    /// Warped-product criterion for a product chart.
    Warped {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate a geodesic from --point with initial --velocity.
    Geodesic {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        velocity: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("LORENTZLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Schema(format!("LORENTZLAB_THREADS must be a positive integer, got `{v}`")))?;
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let (common, opts) = match cli.command {
        Command::Curvature { common, samples } => {
            let mut o = Options::new(Analysis::Curvature);
            o.samples = samples;
            (common, o)
        }
        Command::ScanCx { common, resolution } => {
            let mut o = Options::new(Analysis::ScanCx);
            o.resolution = resolution;
            (common, o)
        }
        Command::Killing { common, trials } => {
            let mut o = Options::new(Analysis::Killing);
            o.trials = trials;
            (common, o)
        }
        Command::Warped { common } => (common, Options::new(Analysis::Warped)),
        Command::Geodesic { common, velocity, s_max, step } => {
            let mut o = Options::new(Analysis::Geodesic);
            o.velocity = Some(velocity);
            o.s_max = s_max;
            o.step = step;
            (common, o)
        }
    };
    let opts = Options { point: common.point, seed: common.seed, ..opts };
    let input = std::fs::read(&common.spec).map_err(|source| CliError::Io { path: common.spec.clone(), source })?;
    let start = Instant::now();
    let outcome = run(&input, &opts)?;
    eprintln!("lorentzlab {}: {:.3}s", opts.analysis.name(), start.elapsed().as_secs_f64());
    write_atomic(&common.out, &render(&outcome.report))?;
    if let Some(path) = &common.csv {
        match &outcome.csv {
            Some(table) => write_atomic(path, table)?,
            None => eprintln!("lorentzlab: {} has no CSV table; --csv ignored", opts.analysis.name()),
        }
    }
    Ok(outcome.rejected)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lorentzlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
