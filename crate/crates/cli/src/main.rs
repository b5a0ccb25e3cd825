//! `reftrade`: reference quality, quantity and budget experiments.
//!
//! Every command writes its TSV/JSON outputs plus `manifest.json` into
//! `--out`. Exit status: 0 success, 1 data error, 2 usage error.

mod commands;
mod parse;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reftrade::allocator::{VendorLevel, DEFAULT_PATIENCE, DEFAULT_TEMPERATURE};
use reftrade::corpus::Level;
use reftrade::metaeval::{Aggregation, CurveMode, TiePolicy, DEFAULT_THRESHOLD};
use reftrade::metrics::Orientation;
use serde::Serialize;

use parse::Budget;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl From<reftrade::Error> for CliError {
    fn from(e: reftrade::Error) -> Self {
        use reftrade::Error as E;
        match e {
            E::InvalidArgument(_) | E::Selector { .. } | E::BudgetBelowCoverage { .. } | E::InstanceTooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "reftrade",
    version,
    about = "Reference quality, quantity and budget experiments for MT metrics"
)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a corpus, print its counts and optionally export a copy.
    Import(ImportArgs),
    /// Kendall tau of every metric against each single reference level.
    Table2(Table2Args),
    /// Multi-reference aggregation against the single references.
    Table3(Table3Args),
    /// Mean raw metric value per reference set.
    Table5(Table5Args),
    /// Tau gain of post-edited over original references, per proficiency.
    PeDiff(PeDiffArgs),
    /// Tau against the number of randomly drawn references.
    Curve(CurveArgs),
    /// Tau when a fraction of segments switches from one level to another.
    Mix(MixArgs),
    /// Allocate a reference budget across vendor levels.
    Allocate(AllocateArgs),
    /// Mean tau over a budget x lambda grid of allocations.
    Grid(GridArgs),
    /// Export native metric scores in the ingestible layout.
    Score(ScoreArgs),
    /// Export the golden relative-ranking pairs.
    Pairs(PairsArgs),
    /// Replay the command recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Output {
    /// Output directory (created if missing).
    #[arg(long, default_value = "reftrade-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Data {
    /// Corpus directory in canonical layout.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Metric columns: native bleu, chrf, ter and the names of ingested score
    /// files (default: all native and ingested metrics).
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    /// Externally computed scores (`system_id seg_id ref_key value`).
    #[arg(long = "scores")]
    pub scores: Vec<PathBuf>,
    /// Orientation of score files without a JSON sidecar.
    #[arg(long)]
    pub orientation: Option<Orientation>,
    /// Minimum DA difference of a golden pair.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// How metric ties on golden pairs count.
    #[arg(long, default_value = "discordant")]
    pub ties: TiePolicy,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ImportArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Export directory; without it the corpus is only validated.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Table2Args {
    #[command(flatten)]
    pub data: Data,
    /// Column selectors (repeatable; default: each reference level).
    #[arg(long = "selector")]
    pub selectors: Vec<String>,
    #[arg(long, default_value = "single")]
    pub aggregation: Aggregation,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Table3Args {
    #[command(flatten)]
    pub data: Data,
    /// Multi-reference pool.
    #[arg(long = "selector", default_value = "Rx")]
    pub selector: String,
    /// Aggregations of the pool (repeatable; default: avg and max).
    #[arg(long = "aggregation")]
    pub aggregations: Vec<Aggregation>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Table5Args {
    #[command(flatten)]
    pub data: Data,
    /// Column selectors (repeatable; default: each level, then each level's
    /// post-edits).
    #[arg(long = "selector")]
    pub selectors: Vec<String>,
    /// Keep lower-is-better metrics unnegated.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PeDiffArgs {
    #[command(flatten)]
    pub data: Data,
    /// Aggregation over several post-edits of one level and proficiency.
    #[arg(long, default_value = "avg")]
    pub aggregation: Aggregation,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CurveArgs {
    #[command(flatten)]
    pub data: Data,
    /// Pool to draw references from.
    #[arg(long = "selector", default_value = "all")]
    pub selector: String,
    /// Reference counts, e.g. `1-10` or `1,2,4`.
    #[arg(long = "x", default_value = "1-10", value_parser = parse::counts)]
    pub xs: parse::Counts,
    #[arg(long, default_value_t = 10)]
    pub repetitions: usize,
    #[arg(long, default_value = "per-segment")]
    pub mode: CurveMode,
    #[arg(long, default_value = "avg")]
    pub aggregation: Aggregation,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MixArgs {
    #[command(flatten)]
    pub data: Data,
    /// Level every segment starts from.
    #[arg(long, default_value = "R1")]
    pub from: Level,
    /// Level a fraction of segments switches to.
    #[arg(long, default_value = "R3")]
    pub to: Level,
    #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1", value_parser = parse::number)]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LevelArgs {
    /// Vendor levels as `id:cost:utility` (default R1:1:1,R2:1:2,R3:2:4,R4:3:3).
    #[arg(long, value_delimiter = ',', value_parser = parse::level)]
    pub levels: Vec<VendorLevel>,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    /// Rejected attempts before giving up.
    #[arg(long, default_value_t = DEFAULT_PATIENCE)]
    pub patience: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AllocateArgs {
    /// Problem JSON; replaces every other problem flag.
    #[arg(long, conflicts_with_all = ["corpus", "segments", "budget", "lambda"])]
    pub problem: Option<PathBuf>,
    /// Corpus whose segments are allocated; with `--metrics` the allocation
    /// is also correlated.
    #[arg(long, conflicts_with = "segments")]
    pub corpus: Option<PathBuf>,
    /// Allocate over `s1..sN` instead of a corpus.
    #[arg(long)]
    pub segments: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<String>,
    #[arg(long = "scores")]
    pub scores: Vec<PathBuf>,
    #[arg(long)]
    pub orientation: Option<Orientation>,
    /// Budget in cost units, or `<k>x` for k per segment.
    #[arg(long, value_parser = parse::budget)]
    pub budget: Option<Budget>,
    /// Probability of proposing a promotion.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: Data,
    #[arg(long = "budget", value_delimiter = ',', default_value = "1x,2x,3x", value_parser = parse::budget)]
    pub budgets: Vec<Budget>,
    #[arg(
        long = "lambda",
        value_delimiter = ',',
        default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7",
        value_parser = parse::number
    )]
    pub lambdas: Vec<f64>,
    /// Allocations per cell.
    #[arg(long, default_value_t = 10)]
    pub seeds_per_cell: usize,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: Data,
    #[arg(long = "selector", default_value = "all")]
    pub selector: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PairsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RerunArgs {
    /// A `manifest.json` written by an earlier run.
    pub manifest: PathBuf,
    /// Output directory of the replay (default: the recorded one).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn dispatch(cli: Cli, args: Vec<String>) -> Result<(), CliError> {
    match cli.command {
        Command::Import(a) => commands::import(a, args),
        Command::Table2(a) => commands::table2(a, args),
        Command::Table3(a) => commands::table3(a, args),
        Command::Table5(a) => commands::table5(a, args),
        Command::PeDiff(a) => commands::pe_diff(a, args),
        Command::Curve(a) => commands::curve(a, args),
        Command::Mix(a) => commands::mix(a, args),
        Command::Allocate(a) => commands::allocate(a, args),
        Command::Grid(a) => commands::grid(a, args),
        Command::Score(a) => commands::score(a, args),
        Command::Pairs(a) => commands::pairs(a, args),
        Command::Rerun(a) => {
            let replay = commands::rerun_args(&a)?;
            let cli = Cli::try_parse_from(std::iter::once("reftrade".to_string()).chain(replay.iter().cloned()))
                .map_err(|e| CliError::Usage(format!("recorded command no longer parses: {e}")))?;
            if matches!(cli.command, Command::Rerun(_)) {
                return Err(CliError::Usage("a manifest cannot replay another rerun".into()));
            }
            run(cli, replay)
        }
    }
}

fn run(cli: Cli, args: Vec<String>) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(cli, args)),
        None => dispatch(cli, args),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
