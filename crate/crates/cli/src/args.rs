use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stark_weierstrass::analysis::SearchBox;
use stark_weierstrass::stark::{CartesianState, StarkModel};

use crate::error::CliError;

/// Closed-form propagation and analysis of the three-dimensional Stark
/// problem.
#[derive(Debug, Parser)]
#[command(name = "stark", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a trajectory on a uniform time (or fictitious-time) grid.
    Propagate(PropagateArgs),
    /// Bound/unbound classification, periods and asymptotic azimuth.
    Classify(ClassifyArgs),
    /// Search for quasi-periodic (n, m) or periodic (n, m, p) orbits.
    Search(SearchArgs),
    /// Compare the closed form against direct numerical integration.
    Verify(VerifyArgs),
    /// Stationary equilibrium and displaced circular orbits.
    Equilibrium(EquilibriumArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Propagate(_) => "propagate",
            Command::Classify(_) => "classify",
            Command::Search(_) => "search",
            Command::Verify(_) => "verify",
            Command::Equilibrium(_) => "equilibrium",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Gravitational parameter.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Field strength along +z.
    #[arg(long)]
    pub eps: f64,
}

impl ModelArgs {
    pub fn model(&self) -> Result<StarkModel, CliError> {
        Ok(StarkModel::new(self.mu, self.eps)?)
    }
}

fn parse_state(s: &str) -> Result<[f64; 6], String> {
    let v = parse_list(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 6 comma-separated numbers x,y,z,vx,vy,vz, got {}", v.len()))
}

fn parse_box(s: &str) -> Result<[f64; 8], String> {
    let v = parse_list(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 8 numbers zlo,zhi,rholo,rhohi,klo,khi,epslo,epshi, got {}", v.len()))
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            let x = x.trim();
            match x.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("'{x}' is not a finite number")),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Args)]
pub struct StateArgs {
    /// Initial state `x,y,z,vx,vy,vz`.
    #[arg(long, value_parser = parse_state, allow_hyphen_values = true)]
    pub state: [f64; 6],
}

impl StateArgs {
    pub fn state(&self) -> CartesianState {
        CartesianState::from_slice(&self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// Uniform in physical time.
    T,
    /// Uniform in fictitious time.
    Tau,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub state: StateArgs,
    /// End of the grid (physical time, or fictitious time with `--grid tau`).
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: f64,
    /// Number of grid points, both ends included.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = Grid::T)]
    pub grid: Grid,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    /// Azimuthal order; makes the target periodic.
    #[arg(long)]
    pub p: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of global random samples.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    /// Local refinements started from the best samples.
    #[arg(long, default_value_t = 6)]
    pub starts: usize,
    #[arg(long, default_value_t = 400)]
    pub max_iter: usize,
    /// Residual threshold for success.
    #[arg(long, default_value_t = 1e-18)]
    pub tol: f64,
    /// Search box `zlo,zhi,rholo,rhohi,klo,khi,epslo,epshi`.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub search_box: Option<[f64; 8]>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SearchArgs {
    pub fn search_box(&self) -> SearchBox {
        match self.search_box {
            Some(b) => SearchBox { lower: [b[0], b[2], b[4], b[6]], upper: [b[1], b[3], b[5], b[7]] },
            None => SearchBox::default(),
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Largest acceptable relative position/velocity error.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Relative perturbation of the field strength on the closed-form side
    /// only; exercises the failure path.
    #[arg(long, hide = true)]
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Height of a displaced circular orbit, `0 < z < z*`.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
