//! Argument parsing and validation. A [`CommandPlan`] only exists for
//! parameters that satisfy the preconditions of its task.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gjms_core::asymptotic::DEFAULT_RADII;
use gjms_core::space_forms::DEFAULT_LIMIT_RADII;
use gjms_core::{DimPair, LensSpec, SpaceFormGroup};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "gjms", version, about = "Green functions and conformal masses of GJMS operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random sample in the run.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Write the run's table to this CSV file instead of embedding it in the JSON.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,

    /// Include wall-clock seconds per check (makes reports run-dependent).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The constant c_{n,k} of the flat Green function.
    Constants {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Closed-form mass over a point sample.
    Mass {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 16)]
        samples: usize,
    },
    /// Mass extracted from the Green function expansion, against the closed form.
    MassLimit {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Decreasing chart radii for the extrapolation.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LIMIT_RADII)]
        radii: Vec<f64>,
    },
    /// Scalar curvature of the canonical metric `A² g` of a 3-dimensional space form.
    HjScan {
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
    /// Run one verification suite.
    Verify {
        #[command(subcommand)]
        suite: VerifyCommand,
    },
    /// Run every verification suite.
    Report,
}

#[derive(Debug, Args)]
struct SpaceArgs {
    /// Lens space `L(p;q1,...,qm)`.
    #[arg(long)]
    space: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Distance identity under random Moebius compositions.
    Moebius {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Pairing of the flat Green function with a test function.
    Dirac {
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Restrict to one dimension pair (needs `--k` too).
        #[arg(long, requires = "k")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        k: Option<usize>,
    },
    /// Conformal covariance of P₁ and P₂ on ℝ⁵.
    Covariance {
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// The zeroth-order term of P₂ does not depend on the function acted on.
    Prop21 {
        #[arg(long, default_value_t = 10)]
        triples: usize,
    },
    /// Mass of a covering against the mass of the quotient.
    Covering {
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Closed-form mass against the asymptotic mass of the blow-up.
    Thm51 {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RADII)]
        radii: Vec<f64>,
    },
}

/// A lens space with its validated group.
#[derive(Debug, Clone)]
pub struct Space {
    pub spec: LensSpec,
    pub group: SpaceFormGroup,
}

impl Space {
    fn parse(s: &str) -> Result<Self, UsageError> {
        let spec: LensSpec = s.parse().map_err(|e| UsageError::Invalid(format!("--space: {e}")))?;
        let group = spec.group().map_err(|e| UsageError::Invalid(format!("--space {spec}: {e}")))?;
        Ok(Self { spec, group })
    }

    pub fn label(&self) -> String {
        self.spec.to_string()
    }

    fn dims(&self, k: usize) -> Result<DimPair, UsageError> {
        DimPair::new(self.spec.sphere_dim(), k).map_err(|e| UsageError::Invalid(format!("{}: {e}", self.spec)))
    }
}

#[derive(Debug, Clone)]
pub enum Task {
    Constants { dims: DimPair },
    Mass { space: Space, dims: DimPair, samples: usize },
    MassLimit { space: Space, dims: DimPair, samples: usize, radii: Vec<f64> },
    HjScan { space: Space, samples: usize },
    VerifyMoebius { trials: usize },
    VerifyDirac { cases: Vec<DimPair>, levels: usize },
    VerifyCovariance { points: usize },
    VerifyProp21 { triples: usize },
    VerifyCovering { points: usize },
    VerifyThm51 { space: Space, dims: DimPair, radii: Vec<f64> },
    Report,
}

impl Task {
    /// Subcommand path as typed, e.g. `verify thm51`.
    pub fn name(&self) -> &'static str {
        match self {
            Task::Constants { .. } => "constants",
            Task::Mass { .. } => "mass",
            Task::MassLimit { .. } => "mass-limit",
            Task::HjScan { .. } => "hj-scan",
            Task::VerifyMoebius { .. } => "verify moebius",
            Task::VerifyDirac { .. } => "verify dirac",
            Task::VerifyCovariance { .. } => "verify covariance",
            Task::VerifyProp21 { .. } => "verify prop21",
            Task::VerifyCovering { .. } => "verify covering",
            Task::VerifyThm51 { .. } => "verify thm51",
            Task::Report => "report",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommandPlan {
    pub task: Task,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub timings: bool,
}

#[derive(Debug)]
pub enum UsageError {
    /// Clap's own errors, including `--help` and `--version` requests.
    Clap(clap::Error),
    Invalid(String),
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UsageError::Clap(e) => write!(f, "{e}"),
            UsageError::Invalid(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl std::error::Error for UsageError {}

pub const DIRAC_CASES: [(usize, usize); 4] = [(3, 1), (5, 1), (5, 2), (7, 2)];

/// Parses `argv` (including the program name) into a validated plan.
pub fn parse_args<I, T>(argv: I) -> Result<CommandPlan, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(UsageError::Clap)?;
    let task = match cli.command {
        Command::Constants { n, k } => {
            Task::Constants { dims: DimPair::new(n, k).map_err(|e| UsageError::Invalid(e.to_string()))? }
        }
        Command::Mass { space, samples } => {
            let (space, dims) = mass_space(&space)?;
            Task::Mass { space, dims, samples: positive("--samples", samples)? }
        }
        Command::MassLimit { space, samples, radii } => {
            let (space, dims) = mass_space(&space)?;
            if radii.len() < 2 || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|&r| !(r > 0.0 && r < 0.5)) {
                return Err(UsageError::Invalid(format!(
                    "--radii must be at least two decreasing values in (0, 0.5), got {radii:?}"
                )));
            }
            Task::MassLimit { space, dims, samples: positive("--samples", samples)?, radii }
        }
        Command::HjScan { space, samples } => {
            let space = Space::parse(&space)?;
            if space.spec.sphere_dim() != 3 {
                return Err(UsageError::Invalid(format!("hj-scan needs a 3-dimensional space, got {}", space.spec)));
            }
            Task::HjScan { space, samples: positive("--samples", samples)? }
        }
        Command::Verify { suite } => match suite {
            VerifyCommand::Moebius { trials } => Task::VerifyMoebius { trials: positive("--trials", trials)? },
            VerifyCommand::Dirac { levels, n, k } => {
                if levels < 2 {
                    return Err(UsageError::Invalid("--levels must be at least 2 to judge convergence".into()));
                }
                let pairs = match (n, k) {
                    (Some(n), Some(k)) => vec![(n, k)],
                    _ => DIRAC_CASES.to_vec(),
                };
                let cases = pairs
                    .into_iter()
                    .map(|(n, k)| DimPair::new(n, k).map_err(|e| UsageError::Invalid(e.to_string())))
                    .collect::<Result<_, _>>()?;
                Task::VerifyDirac { cases, levels }
            }
            VerifyCommand::Covariance { points } => Task::VerifyCovariance { points: positive("--points", points)? },
            VerifyCommand::Prop21 { triples } => Task::VerifyProp21 { triples: positive("--triples", triples)? },
            VerifyCommand::Covering { points } => Task::VerifyCovering { points: positive("--points", points)? },
            VerifyCommand::Thm51 { space, radii } => {
                let (space, dims) = mass_space(&space)?;
                if dims.k() > 2 {
                    return Err(UsageError::Invalid("asymptotic masses are implemented for k = 1 and k = 2".into()));
                }
                if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
                    return Err(UsageError::Invalid(format!(
                        "--radii must be at least three increasing positive values, got {radii:?}"
                    )));
                }
                Task::VerifyThm51 { space, dims, radii }
            }
        },
        Command::Report => Task::Report,
    };
    Ok(CommandPlan { task, seed: cli.seed, csv: cli.csv, timings: cli.timings })
}

fn mass_space(args: &SpaceArgs) -> Result<(Space, DimPair), UsageError> {
    let space = Space::parse(&args.space)?;
    let dims = space.dims(args.k)?;
    if !dims.mass_range() {
        return Err(UsageError::Invalid(format!("the mass is defined for 2k+1 ≤ n ≤ 2k+3, got {dims}")));
    }
    Ok((space, dims))
}

fn positive(flag: &str, v: usize) -> Result<usize, UsageError> {
    if v == 0 {
        Err(UsageError::Invalid(format!("{flag} must be positive")))
    } else {
        Ok(v)
    }
}
