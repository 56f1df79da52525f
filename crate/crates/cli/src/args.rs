use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use marscore::io::{ReportFormat, TermSpec};
use marscore::score::Variant;
use marscore::sim::{Example1Config, Example2Config, StudyConfig, WVariant, DEFAULT_C0};

pub const DEFAULT_REPS: usize = 2000;
pub const FULL_REPS: usize = 5000;

#[derive(Debug, Parser)]
#[command(name = "marscore", version, about = "Score tests of missing at random against missing not at random")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test a CSV dataset.
    Test(TestArgs),
    /// Estimate rejection rates on a simulation design.
    Simulate(SimulateArgs),
    /// Rejection rates along a grid of departures from MAR.
    PowerCurve(PowerCurveArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report file, written atomically.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Headed, comma-delimited input file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub outcome: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub covariates: Vec<String>,
    /// Covariates of the propensity model [default: all].
    #[arg(long, value_delimiter = ',')]
    pub propensity: Option<Vec<String>>,
    /// Mean terms such as `1,x,x^2,a*b` [default: intercept and covariates].
    #[arg(long, value_delimiter = ',', value_parser = parse_term)]
    pub mean_basis: Option<Vec<TermSpec>>,
    /// Log-variance terms [default: 1].
    #[arg(long, value_delimiter = ',', value_parser = parse_term)]
    pub logvar_basis: Option<Vec<TermSpec>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_variant, default_value = "s1,s2")]
    pub variants: Vec<Variant>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Test each level of this column separately.
    #[arg(long)]
    pub group_by: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Simulation design.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub example: u8,
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub n: usize,
    /// Design 2: ξ₁,ξ₂,ξ₃,ξ₄ [default: -1,1,0.5,0].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub xi: Option<Vec<f64>>,
    /// Design 2: β₀,β₁ [default: 0.85,0].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub beta: Option<Vec<f64>>,
    /// Design 2: γ [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Design 2: fit S1 with a constant variance.
    #[arg(long)]
    pub homoskedastic_fit: bool,
    /// Design 1: coefficient of Z in Y [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub bz: Option<f64>,
    /// Design 1: probit intercept [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<f64>,
    /// Design 1: coefficient of w(Y) [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<f64>,
    /// Design 1: coefficient of U [default: 0].
    #[arg(long, allow_hyphen_values = true)]
    pub c2: Option<f64>,
    /// Design 1: identity, quad04 or indicator [default: identity].
    #[arg(long, value_parser = parse_w)]
    pub w: Option<WVariant>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = DEFAULT_REPS, value_parser = parse_positive, conflicts_with = "full")]
    pub reps: usize,
    /// Use 5000 replications.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    /// Worker threads [default: all cores]; 1 runs serially.
    #[arg(long, value_parser = parse_positive)]
    pub threads: Option<usize>,
}

impl RunArgs {
    pub fn replications(&self) -> usize {
        if self.full {
            FULL_REPS
        } else {
            self.reps
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PowerCurveArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Values of c1 (design 1) or γ (design 2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1, required = true)]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

impl DesignArgs {
    /// The design, or a usage message when flags of the other design or
    /// malformed vectors are given.
    pub fn study_config(&self) -> Result<StudyConfig, String> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("--{name} must be finite"))
            }
        };
        match self.example {
            1 => {
                let stray = [
                    ("xi", self.xi.is_some()),
                    ("beta", self.beta.is_some()),
                    ("gamma", self.gamma.is_some()),
                    ("homoskedastic-fit", self.homoskedastic_fit),
                ];
                if let Some((name, _)) = stray.iter().find(|(_, set)| *set) {
                    return Err(format!("--{name} does not apply to --example 1"));
                }
                let mut c = Example1Config::new(self.n);
                c.b_z = finite("bz", self.bz.unwrap_or(c.b_z))?;
                c.c0 = finite("c0", self.c0.unwrap_or(DEFAULT_C0))?;
                c.c1 = finite("c1", self.c1.unwrap_or(c.c1))?;
                c.c2 = finite("c2", self.c2.unwrap_or(c.c2))?;
                c.w = self.w.unwrap_or(c.w);
                Ok(c.into())
            }
            _ => {
                let stray = [
                    ("bz", self.bz.is_some()),
                    ("c0", self.c0.is_some()),
                    ("c1", self.c1.is_some()),
                    ("c2", self.c2.is_some()),
                    ("w", self.w.is_some()),
                ];
                if let Some((name, _)) = stray.iter().find(|(_, set)| *set) {
                    return Err(format!("--{name} does not apply to --example 2"));
                }
                let mut c = Example2Config::homoskedastic(self.n, 0.0);
                if let Some(xi) = &self.xi {
                    c.xi_true = xi
                        .as_slice()
                        .try_into()
                        .map_err(|_| format!("--xi takes 4 values, got {}", xi.len()))?;
                }
                if let Some(beta) = &self.beta {
                    let [b0, b1]: [f64; 2] = beta
                        .as_slice()
                        .try_into()
                        .map_err(|_| format!("--beta takes 2 values, got {}", beta.len()))?;
                    c.beta0 = b0;
                    c.beta1 = b1;
                }
                c.gamma = self.gamma.unwrap_or(0.0);
                c.homoskedastic_fit = self.homoskedastic_fit;
                for v in c.xi_true.iter().chain(&[c.beta0, c.beta1, c.gamma]) {
                    finite("xi/--beta/--gamma", *v)?;
                }
                Ok(c.into())
            }
        }
    }
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_term(s: &str) -> Result<TermSpec, String> {
    s.parse().map_err(|e: marscore::Error| e.to_string())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: marscore::Error| e.to_string())
}

fn parse_w(s: &str) -> Result<WVariant, String> {
    s.parse().map_err(|e: marscore::Error| e.to_string())
}
