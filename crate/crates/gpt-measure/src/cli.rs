use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gptm_core::incompatibility::DEFAULT_PRODUCT_LIMIT;

use crate::config::{Format, Mode};

#[derive(Debug, Parser)]
#[command(name = "gpt-measure", version, about = "Exact measurement theory on polyhedral GPTs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Arithmetic mode; certificate-emitting commands require exact.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Output format; defaults to json, or csv for tabular demos.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized spot checks; GPTM_SEED overrides it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest joint outcome set built for compatibility programs.
    #[arg(long, global = true, default_value_t = DEFAULT_PRODUCT_LIMIT)]
    pub product_limit: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Order unit spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Effect-valued measures.
    #[command(subcommand)]
    Evm(EvmCmd),
    /// State discrimination gain.
    #[command(subcommand)]
    Gain(GainCmd),
    /// Post-processing order.
    #[command(subcommand)]
    Order(OrderCmd),
    /// Simulability and its robustness measures.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Compatibility and robustness of incompatibility.
    #[command(subcommand)]
    Incomp(IncompCmd),
    /// Statistical experiments.
    #[command(subcommand)]
    Exper(ExperCmd),
    /// Built-in scenarios that need no input files.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
    },
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    Validate { space: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum EvmCmd {
    Validate { evm: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GainCmd {
    /// Gain of a w*-family against one measurement, or the best of several.
    Eval {
        family: PathBuf,
        #[arg(required = true)]
        evms: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OrderCmd {
    /// Is A a post-processing of B?
    Test { a: PathBuf, b: PathBuf },
    /// Are A and B post-processings of each other?
    Equiv { a: PathBuf, b: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Is the target simulable by the simulators?
    Test {
        target: PathBuf,
        #[arg(required = true)]
        simulators: Vec<PathBuf>,
    },
    /// Maximal success probability of simulation.
    Qsucc {
        target: PathBuf,
        #[arg(required = true)]
        simulators: Vec<PathBuf>,
    },
    /// Robustness of unsimulability.
    Runs {
        target: PathBuf,
        #[arg(required = true)]
        simulators: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum IncompCmd {
    /// Is the family compatible?
    Test {
        #[arg(required = true)]
        family: Vec<PathBuf>,
    },
    /// Best discrimination value with one measurement serving every part.
    Pgcomp { ensemble: PathBuf },
    /// Robustness of incompatibility.
    Rinc {
        #[arg(required = true)]
        family: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperCmd {
    /// Is E1 a garbling of E2?
    Compare { e1: PathBuf, e2: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    /// Gain of the two-outcome guessing family on a (p, q) grid.
    PgepGrid,
    /// The two gbit axis measurements compared both ways.
    GbitIncomparable,
    /// Robustness of incompatibility of the gbit axis measurements.
    GbitRinc,
}

impl Command {
    pub fn inputs(&self) -> Vec<PathBuf> {
        let mut v = Vec::new();
        match self {
            Command::Space(SpaceCmd::Validate { space }) => v.push(space.clone()),
            Command::Evm(EvmCmd::Validate { evm }) => v.push(evm.clone()),
            Command::Gain(GainCmd::Eval { family, evms }) => {
                v.push(family.clone());
                v.extend(evms.iter().cloned());
            }
            Command::Order(OrderCmd::Test { a, b } | OrderCmd::Equiv { a, b }) => v.extend([a.clone(), b.clone()]),
            Command::Sim(SimCmd::Test { target, simulators } | SimCmd::Qsucc { target, simulators } | SimCmd::Runs { target, simulators }) => {
                v.push(target.clone());
                v.extend(simulators.iter().cloned());
            }
            Command::Incomp(IncompCmd::Test { family } | IncompCmd::Rinc { family }) => v.extend(family.iter().cloned()),
            Command::Incomp(IncompCmd::Pgcomp { ensemble }) => v.push(ensemble.clone()),
            Command::Exper(ExperCmd::Compare { e1, e2 }) => v.extend([e1.clone(), e2.clone()]),
            Command::Demo { .. } => {}
        }
        v
    }

    /// Commands that may run in float mode emit no certificates.
    pub fn allows_float(&self) -> bool {
        matches!(self, Command::Gain(_) | Command::Demo { name: DemoName::PgepGrid })
    }
}
