use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "flatcheck", version, about = "Flatness by pure prolongation for nonlinear control systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed of the random evaluation points.
    #[arg(long, global = true, env = "FLATCHECK_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Evaluation points per rank computation.
    #[arg(long, global = true, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Cap on the recursion depth (default: n + max-prolong).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_k: Option<u64>,
    /// Cap on the prolongation search box (default: 2n).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_prolong: Option<u32>,
    /// Total degree of the flat-output ansatz.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub ansatz_degree: u32,
    /// Print the σ trace of every initialization (text mode).
    #[arg(long, global = true)]
    pub trace: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide flatness by pure prolongation.
    Analyze {
        file: PathBuf,
    },
    /// Check the file's `flatoutput` candidates.
    Verify {
        file: PathBuf,
        /// Prolongation orders `j1,j2,…` (default: the analysed minimum).
        #[arg(long, value_delimiter = ',')]
        prolong: Option<Vec<u32>>,
    },
    /// Print `ad_A^pow B` for fields `g0`, `g1`…, or `d/d<coordinate>`.
    Bracket {
        file: PathBuf,
        a: String,
        b: String,
        #[arg(long, default_value_t = 1)]
        pow: u32,
        /// Prolongation orders of the space the fields live on.
        #[arg(long, value_delimiter = ',')]
        prolong: Option<Vec<u32>>,
    },
    /// Parse the file and report errors only.
    Lint {
        file: PathBuf,
    },
}
