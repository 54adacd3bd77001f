use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use missing_mass_bounds::bounds::BoundSide;
use missing_mass_bounds::missing_mass::{Model, Side};
use missing_mass_bounds::na_checks::MonotoneFn;
use missing_mass_bounds::sampling::DEFAULT_SEED;

use crate::spec::DistSpec;

#[derive(Debug, Parser)]
#[command(name = "mmb", version, about = "Missing-mass concentration bounds: evaluate, simulate and verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Master seed for Monte-Carlo runs.
    #[arg(long, env = "MMB_SEED", default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundSideArg {
    Upper,
    Lower,
    #[value(alias = "two-sided", alias = "two_sided")]
    Two,
}

impl From<BoundSideArg> for BoundSide {
    fn from(side: BoundSideArg) -> Self {
        match side {
            BoundSideArg::Upper => BoundSide::Upper,
            BoundSideArg::Lower => BoundSide::Lower,
            BoundSideArg::Two => BoundSide::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Upper,
    Lower,
}

impl From<SideArg> for Side {
    fn from(side: SideArg) -> Self {
        match side {
            SideArg::Upper => Side::Upper,
            SideArg::Lower => Side::Lower,
        }
    }
}

impl From<SideArg> for BoundSide {
    fn from(side: SideArg) -> Self {
        match side {
            SideArg::Upper => BoundSide::Upper,
            SideArg::Lower => BoundSide::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SidesArg {
    Upper,
    Lower,
    Both,
}

impl SidesArg {
    pub fn sides(self) -> &'static [Side] {
        match self {
            SidesArg::Upper => &[Side::Upper],
            SidesArg::Lower => &[Side::Lower],
            SidesArg::Both => &[Side::Upper, Side::Lower],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformOp {
    Split,
    Absorb,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Exact when the support is small enough, Monte Carlo otherwise.
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct ModelFlag {
    /// Use independent occupancy indicators instead of multinomial sampling.
    #[arg(long)]
    pub independent: bool,
}

impl ModelFlag {
    pub fn model(&self) -> Model {
        if self.independent {
            Model::Independent
        } else {
            Model::Multinomial
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the deviation bound at (epsilon, n).
    Bound {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = BoundSideArg::Upper)]
        side: BoundSideArg,
    },
    /// Optimal gamma, c(epsilon), minimum sample size and compensation gap.
    Gamma {
        #[arg(long)]
        epsilon: f64,
    },
    /// Deviation size below which the bound beats exp(-a n eps^2).
    Crossover {
        #[arg(long)]
        coefficient: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Upper)]
        side: SideArg,
        /// Free-text source of the coefficient.
        #[arg(long)]
        label: Option<String>,
    },
    /// Mean and variance proxies of the missing mass.
    Stats {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        n: u64,
    },
    /// Exact deviation probability (support of at most 20 bins).
    Exact {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Upper)]
        side: SideArg,
        #[command(flatten)]
        model: ModelFlag,
    },
    /// Monte-Carlo deviation probability with a 99% Clopper-Pearson interval.
    Simulate {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Upper)]
        side: SideArg,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[command(flatten)]
        model: ModelFlag,
    },
    /// Compare deviation probabilities with the bound over a grid.
    Verify {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        /// Comma-separated deviation sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilon_grid: Vec<f64>,
        /// Comma-separated sample sizes; `min`, `2min`, ... are multiples of
        /// the minimum sample size for each epsilon.
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<NPoint>,
        #[arg(long, value_enum, default_value_t = SidesArg::Both)]
        side: SidesArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = 200_000)]
        trials: u64,
    },
    /// Apply the split and/or absorb thresholding.
    Transform {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = TransformOp::Both)]
        op: TransformOp,
    },
    /// Chernoff-entropy monotonicity under coarse binning.
    EntropyCheck {
        /// JSON file {"values": [...], "probs": [...]}.
        #[arg(long)]
        pmf: PathBuf,
        /// JSON file {"groups": [[0, 1], [2], ...]}.
        #[arg(long)]
        partition: PathBuf,
        /// Comma-separated deviation levels.
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    /// Negative-association checks on multinomial counts.
    NaCheck {
        /// uniform:N=.., zipf:N=..,s=.., geometric:N=..,r=.., spike:N=..,m=.. or file:PATH
        #[arg(long)]
        dist: DistSpec,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 200_000)]
        trials: u64,
        /// Run one test on these 0-based indices instead of the default battery.
        #[arg(long, value_delimiter = ',', requires = "set_b")]
        set_a: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',', requires = "set_a")]
        set_b: Option<Vec<usize>>,
        /// Function of the counts in set A: sum, max, or above:<t>.
        #[arg(long, default_value = "sum", value_parser = parse_monotone)]
        f: MonotoneFn,
        #[arg(long, default_value = "sum", value_parser = parse_monotone)]
        g: MonotoneFn,
    },
}

/// Entry of `--n-grid`: a fixed sample size or a multiple of `n_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NPoint {
    Fixed(u64),
    MinMultiple(u64),
}

impl std::str::FromStr for NPoint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(k) = s.strip_suffix("min") {
            let k = if k.is_empty() { 1 } else { k.parse().map_err(|_| format!("bad multiple in {s:?}"))? };
            if k == 0 {
                return Err("multiple of n_min must be positive".into());
            }
            return Ok(NPoint::MinMultiple(k));
        }
        s.parse().map(NPoint::Fixed).map_err(|_| format!("expected a count or `<k>min`, got {s:?}"))
    }
}

fn parse_monotone(s: &str) -> Result<MonotoneFn, String> {
    match s {
        "sum" => Ok(MonotoneFn::Sum),
        "max" => Ok(MonotoneFn::Max),
        "const" | "constant" => Ok(MonotoneFn::Constant),
        _ => s
            .strip_prefix("above:")
            .and_then(|t| t.parse().ok())
            .map(MonotoneFn::IndicatorAbove)
            .ok_or_else(|| format!("expected sum, max, constant or above:<t>, got {s:?}")),
    }
}
