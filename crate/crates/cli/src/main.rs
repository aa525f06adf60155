//! `schwarzian` command-line tool: evaluate generalized Schwarzians, run the
//! verification suites and emit CSV or JSON tables.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Errors in the invocation itself rather than in the numerics.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "schwarzian", version, about = "Generalized Schwarzian derivatives and related numerical checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,

    /// Allow tolerances looser than the defaults.
    #[arg(long = "unsafe", global = true)]
    pub allow_unsafe: bool,

    /// Record the runtime in the JSON summary (reports are then no longer reproducible byte for byte).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A function given as an expression in `z`, or as `@family` /
/// `@family:name=value,...` for a catalog entry.
#[derive(Args, Debug, Clone, Serialize)]
pub struct FunctionArg {
    #[arg(short = 'f', long = "function")]
    pub function: String,
}

/// Either a single point `-z`, or a polar grid made of a center and rings around it.
#[derive(Args, Debug, Clone, Serialize)]
pub struct PointArgs {
    /// Single evaluation point, e.g. `0.5-1i`.
    #[arg(short = 'z')]
    pub z: Option<String>,
    #[arg(long, default_value = "0")]
    pub grid_center: String,
    #[arg(long, default_value_t = 0.9)]
    pub grid_radius: f64,
    #[arg(long, default_value_t = 4)]
    pub grid_rings: usize,
    #[arg(long, default_value_t = 16)]
    pub grid_per_ring: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// S_k(f) by the recursion, compared against the closed form.
    Eval {
        #[command(flatten)]
        f: FunctionArg,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        points: PointArgs,
        /// Relative tolerance between recursion and closed form.
        #[arg(long)]
        tol_oracle: Option<f64>,
    },
    /// Partitions of k as multiplicity tuples.
    Partitions {
        #[arg(short)]
        k: usize,
    },
    /// Exact closed-form coefficients of S_k in terms of g = f''/f'.
    Coefficients {
        #[arg(short)]
        k: usize,
    },
    /// Split S_k into its extremal terms and P[g], checking Grahl's conditions.
    Grahl {
        #[arg(short)]
        k: usize,
    },
    /// Pole order of S_k(f) at a point.
    PoleOrder {
        #[command(flatten)]
        f: FunctionArg,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(short = 'z', default_value = "0")]
        z: String,
    },
    /// Check that h = (f')^(-1/k) solves h^(k) + (S_k(f)/k) h = 0.
    OdeLink {
        #[command(flatten)]
        f: FunctionArg,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        points: PointArgs,
        #[arg(long)]
        tol_link: Option<f64>,
    },
    /// Count zeros of solutions of y^(k) + p0 y = 0 in a convex cell.
    Disconjugacy {
        /// The coefficient p0 as an expression in z.
        #[arg(short = 'f', long = "function")]
        p0: String,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Shape::Disk)]
        shape: Shape,
        #[arg(long, default_value = "0")]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        diameter: f64,
        #[arg(long, default_value_t = 25)]
        trials: usize,
    },
    /// Number of cells and the pole bound for ||S_k(f)|| <= M on the unit disk.
    PoleBound {
        #[arg(short)]
        k: usize,
        #[arg(short = 'M', long = "bound")]
        m: f64,
        /// List the covering cells instead of the summary row.
        #[arg(long)]
        cells: bool,
    },
    /// Bessel functions J0, Y0 and the quotient counterexample.
    Bessel {
        #[command(subcommand)]
        action: BesselAction,
    },
    /// Marty-type inequality (f')^# < 2|f''/f'| at points.
    Marty {
        #[command(flatten)]
        f: FunctionArg,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Suprema of a transform over a family with one varying parameter.
    FamilyProbe {
        #[arg(long)]
        family: String,
        /// Name of the varying parameter.
        #[arg(long, default_value = "n")]
        vary: String,
        /// Comma-separated parameter values.
        #[arg(long, default_value = "1,2,4,8,16,32,64,128,256,512,1024")]
        values: String,
        /// Comma-separated `name=value` pairs held fixed.
        #[arg(long, default_value = "")]
        fixed: String,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value = "spherical")]
        transform: String,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Whether S_k(f) avoids a function b on a grid.
    OmitCheck {
        #[command(flatten)]
        f: FunctionArg,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(short = 'b', default_value = "0")]
        b: String,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Run a verification suite (or `all`).
    Verify {
        suite: String,
        /// Orders to test, comma-separated; suite default if absent.
        #[arg(short, value_delimiter = ',')]
        k: Vec<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        tol_suite: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disk,
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    J0,
    Y0,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
pub enum BesselAction {
    /// Values of J0 or Y0.
    Eval {
        #[arg(long, value_enum, default_value_t = Kind::J0)]
        kind: Kind,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Positive zeros against their asymptotic positions.
    Zeros {
        #[arg(long, value_enum, default_value_t = Kind::J0)]
        kind: Kind,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// S_2(J0(e^(z/2))/Y0(e^(z/2))) against e^z/2 on a strip.
    Counterexample {
        /// Half-width of the strip |Im z| <= W (with |Re z| <= 3).
        #[arg(long, default_value_t = 1.0)]
        grid_strip: f64,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        tol_bessel: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::Partitions { .. } => "partitions",
            Command::Coefficients { .. } => "coefficients",
            Command::Grahl { .. } => "grahl",
            Command::PoleOrder { .. } => "pole-order",
            Command::OdeLink { .. } => "ode-link",
            Command::Disconjugacy { .. } => "disconjugacy",
            Command::PoleBound { .. } => "pole-bound",
            Command::Bessel { action } => match action {
                BesselAction::Eval { .. } => "bessel eval",
                BesselAction::Zeros { .. } => "bessel zeros",
                BesselAction::Counterexample { .. } => "bessel counterexample",
            },
            Command::Marty { .. } => "marty",
            Command::FamilyProbe { .. } => "family-probe",
            Command::OmitCheck { .. } => "omit-check",
            Command::Verify { .. } => "verify",
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SCHWARZIAN_LOG", "off");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let start = Instant::now();
    let out = commands::run(cli)?;
    let runtime = cli.timing.then(|| start.elapsed().as_millis());
    let sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let written = match cli.format {
        Format::Csv => out.write_csv(sink),
        Format::Json => {
            let config = serde_json::json!({
                "args": &cli.command,
                "seed": cli.seed,
                "unsafe": cli.allow_unsafe,
            });
            out.write_json(sink, cli.command.name(), config, runtime)
        }
    };
    if let Err(e) = written {
        // a closed pipe (e.g. `| head`) is not an error of the run itself
        let closed = e
            .chain()
            .filter_map(|c| c.downcast_ref::<io::Error>())
            .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || e.downcast_ref::<csv::Error>().is_some_and(|c| matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == io::ErrorKind::BrokenPipe));
        if !closed {
            return Err(e);
        }
    }
    eprintln!(
        "{} {}: {} rows, max error {:e}",
        if out.pass { "PASS" } else { "FAIL" },
        cli.command.name(),
        out.rows(),
        out.max_error
    );
    Ok(out.pass)
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
