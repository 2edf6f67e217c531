mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use breptok::fixtures::FixtureKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// B-rep tokenization: validation, Bézier decomposition, trimmed-surface
/// tessellation, patch ordering and face-token embedding.
#[derive(Debug, Parser)]
#[command(name = "breptok", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Output path; `-` writes to stdout.
    #[arg(short, long, global = true, default_value = "-")]
    pub output: PathBuf,

    /// Subdivision levels below a knot-span cell.
    #[arg(long, global = true)]
    pub max_depth: Option<u32>,

    /// Weight of the pull towards the unfitted control net in boundary fits.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,

    /// Fraction of triangles dropped per face before embedding, in [0, 1).
    #[arg(long, global = true)]
    pub mask_ratio: Option<f64>,

    /// Seed for fixtures, loop breaks, masking and weight initialization.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Working degree for tessellation; target degree for `decompose`.
    #[arg(long, global = true)]
    pub degree: Option<usize>,

    /// Keep model coordinates instead of fitting them into the unit cube.
    #[arg(long, global = true)]
    pub no_normalize: bool,

    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    pub report: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check references, loop closure, trims and manifoldness.
    Validate { input: PathBuf },
    /// Split a curve or surface document into Bézier pieces.
    Decompose { input: PathBuf },
    /// Triangulate every face and report deviations from the surfaces.
    Tessellate { input: PathBuf },
    /// Print each face's triangles in z-order.
    Order { input: PathBuf },
    /// Turn a model into a token file with one row per face.
    Tokenize {
        input: PathBuf,
        /// Weight file; seeded random weights when absent.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run the face-token encoder over a token file.
    Embed {
        input: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Entity counts and the curve-segments-per-edge histogram.
    Stats { input: PathBuf },
    /// Write a synthetic fixture model.
    Gen {
        #[arg(value_parser = parse_kind)]
        kind: FixtureKind,
        #[command(flatten)]
        params: GenParams,
    },
}

#[derive(Debug, Clone, Args)]
pub struct GenParams {
    #[arg(long)]
    pub size: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub sides: Option<usize>,
    #[arg(long)]
    pub holes: Option<usize>,
    #[arg(long)]
    pub hole_radius: Option<f64>,
    #[arg(long)]
    pub spans: Option<usize>,
    #[arg(long)]
    pub amplitude: Option<f64>,
}

fn parse_kind(s: &str) -> Result<FixtureKind, String> {
    s.parse().map_err(|e: breptok::Error| e.to_string())
}

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<breptok::Error> for Failure {
    fn from(e: breptok::Error) -> Self {
        use breptok::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => Failure::Usage(msg),
            E::Domain { .. }
            | E::Barycentric { .. }
            | E::Geometry(_)
            | E::DegreeLowering { .. }
            | E::DepthLimit { .. } => Failure::Numeric(msg),
            _ => Failure::Validation(msg),
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("BRT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("BRT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
