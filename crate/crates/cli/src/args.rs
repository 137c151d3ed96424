use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Random greedy independent sets on dense graphs.
#[derive(Debug, Parser, Serialize)]
#[command(name = "rgis", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Top-level seed; trial `t` uses the derived stream `(seed, t)`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (output does not depend on this).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    /// Flat tables only; JSON is the canonical format.
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Generate a host graph as an edge list.
    Gen(GenArgs),
    /// Run the greedy process once and record its trajectory.
    Run(RunArgs),
    /// Check the typicality predicates on a host.
    Typical(TypicalArgs),
    /// Build and verify covers of the non-edges.
    Cover(CoverArgs),
    /// Monte Carlo estimates.
    Estimate(EstimateArgs),
    /// Evaluate the closed-form bounds for (n, p).
    Bounds(BoundsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gnp,
    Empty,
    Complete,
    Star,
    Path,
    Cycle,
    Bipartite,
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = Family::Gnp)]
    pub family: Family,
    /// Vertex count (for `bipartite`, use --a and --b instead).
    #[arg(long, required_unless_present_any = ["a", "b"])]
    pub n: Option<usize>,
    /// Edge probability (gnp only).
    #[arg(long, required_if_eq("family", "gnp"))]
    pub p: Option<f64>,
    #[arg(long, requires = "b")]
    pub a: Option<usize>,
    #[arg(long, requires = "a")]
    pub b: Option<usize>,
}

/// Where the host comes from: a file, or a fresh `G(n, p)` sample.
#[derive(Debug, Args, Serialize)]
pub struct HostArgs {
    /// Edge-list file.
    #[arg(long, conflicts_with_all = ["n", "graph_seed"])]
    pub input: Option<PathBuf>,
    /// Sample `G(n, p)` with this many vertices.
    #[arg(long, required_unless_present = "input")]
    pub n: Option<usize>,
    /// Edge probability; defaults to the edge density of --input.
    #[arg(long, required_unless_present = "input")]
    pub p: Option<f64>,
    /// Seed of the sampled host; defaults to --seed.
    #[arg(long)]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ParamArgs {
    /// `k = floor(k_coef * log(pn) / p)`.
    #[arg(long, default_value_t = 0.5, conflicts_with = "epsilon")]
    pub k_coef: f64,
    /// Use the asymptotic-regime constants: `k_coef = epsilon / 1024`.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Override the process length.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub host: HostArgs,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct TypicalArgs {
    #[command(flatten)]
    pub host: HostArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Subsets per size tested for P1.
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Largest P1 subset size (default k).
    #[arg(long)]
    pub max_size: Option<usize>,
    /// Multiplies the slack constants; below 1 is stricter.
    #[arg(long, default_value_t = 1.0)]
    pub strict_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    /// `t` independent copies of `I_k`.
    Theta1,
    /// `t` partitions of `s` disjointified copies.
    Pdim,
    /// Copies until every non-edge is covered.
    Adaptive,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverArgs {
    #[command(flatten)]
    pub host: HostArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = CoverMode::Theta1)]
    pub mode: CoverMode,
    /// Sets (theta1) or partitions (pdim); defaults to the formula budget.
    #[arg(long)]
    pub t: Option<usize>,
    /// Sets per partition; defaults to ceil(n / k).
    #[arg(long)]
    pub s: Option<usize>,
    /// Multiplier in the partition budget.
    #[arg(long, default_value_t = 1.0)]
    pub c_eps: f64,
    /// Adaptive mode: build partitions instead of single sets.
    #[arg(long)]
    pub partitions: bool,
    /// Adaptive mode: give up after this many sets or partitions.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_t: usize,
    /// Exit with status 1 if any non-edge is uncovered.
    #[arg(long)]
    pub strict: bool,
    /// Verify this cover (JSON) against the host instead of building one.
    #[arg(long, conflicts_with_all = ["t", "s", "partitions"])]
    pub verify: Option<PathBuf>,
    /// Omit the sets themselves from the report.
    #[arg(long)]
    pub summary_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum What {
    Membership,
    Pair,
    Chain,
    Bipartite,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long, value_enum)]
    pub what: What,
    /// Host (not used by `bipartite`).
    #[arg(long, conflicts_with_all = ["n", "graph_seed"])]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub graph_seed: Option<u64>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Non-edges sampled for pair estimates.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    /// Chain: step at which `u` is chosen.
    #[arg(long)]
    pub i: Option<usize>,
    /// Chain: step at which `v` is chosen.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub v: Option<usize>,
    /// Bipartite: size of the part containing the pair.
    #[arg(long)]
    pub a: Option<usize>,
    /// Bipartite: size of the other part.
    #[arg(long)]
    pub b: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1.0)]
    pub c_eps: f64,
}
