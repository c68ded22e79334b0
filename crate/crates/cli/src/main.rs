mod workspace;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pepr_core::dataset::{self, BugSpec, RepairDataset};
use pepr_core::features::{BugFeatures, JavaExtractor, SkippedLine};
use pepr_core::history::{FixStatus, HistoryStore};
use pepr_core::ranker::{rank, Ranking};
use pepr_core::simulation::{simulate, SimulationConfig, Strategy};
use serde::Serialize;
use serde_json::json;

use workspace::Workspace;

#[derive(Parser)]
#[command(
    name = "pepr",
    version,
    about = "Rank program-repair tools for a bug by repair patterns and history"
)]
struct Cli {
    /// Workspace file (TOML, or JSON by extension).
    #[arg(long, global = true, env = "PEPR_WORKSPACE")]
    workspace: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank the registered tools for a bug.
    Rank {
        #[command(flatten)]
        bug: BugArgs,
        /// Keep only the best N tools.
        #[arg(long)]
        top_k: Option<usize>,
        /// Pattern bonus coefficient (overrides the workspace).
        #[arg(long)]
        em_alpha: Option<f64>,
    },
    /// Record a tool's verdict on a bug in the history.
    Report {
        #[arg(long)]
        tool: String,
        /// correct, overfit or fail.
        #[arg(long)]
        status: String,
        #[command(flatten)]
        bug: BugArgs,
    },
    /// Replay recorded repair results under a selection strategy.
    Simulate(SimulateArgs),
    #[command(subcommand)]
    Tool(ToolCommand),
    #[command(subcommand)]
    Pattern(PatternCommand),
    #[command(subcommand)]
    History(HistoryCommand),
}

#[derive(Args)]
struct BugArgs {
    /// Buggy Java source file.
    #[arg(long, required_unless_present = "features")]
    bug: Option<PathBuf>,
    /// Suspicious line numbers, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "features")]
    lines: Vec<u32>,
    /// Failing-test log to read the test error type from.
    #[arg(long)]
    test_log: Option<PathBuf>,
    /// Test error type given directly; wins over --test-log.
    #[arg(long)]
    error_type: Option<String>,
    /// Precomputed bug features (JSON) instead of a source file.
    #[arg(long, conflicts_with_all = ["bug", "lines", "test_log", "error_type"])]
    features: Option<PathBuf>,
    #[arg(long)]
    bug_id: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON-lines file of {bug_id, tool, outcome}.
    #[arg(long)]
    outcomes: PathBuf,
    /// Bug features file.
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value = "pepr")]
    strategy: String,
    /// One or more k values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    top_k: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    em_alpha: Option<f64>,
    /// Bug ids, one per line, giving the processing order.
    #[arg(long)]
    order_file: Option<PathBuf>,
    /// History to start from; the tool roster follows its registration order.
    #[arg(long)]
    initial_history: Option<PathBuf>,
    /// Do not feed verdicts back into the history during the replay.
    #[arg(long)]
    no_dynamic_update: bool,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ToolCommand {
    /// Register a tool.
    Add {
        name: String,
        /// Pattern ids the tool implements, comma separated.
        #[arg(long, value_delimiter = ',')]
        patterns: Vec<String>,
        /// Repair history to import for the tool (JSON-lines).
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// List registered tools with their patterns.
    List,
}

#[derive(Subcommand)]
enum PatternCommand {
    /// List the patterns in effect.
    List,
    /// Print the patterns in effect as a pattern config document.
    Export,
}

#[derive(Subcommand)]
enum HistoryCommand {
    /// Apply repair results from a JSON-lines file.
    Import { file: PathBuf },
    /// Print the history document.
    Export,
    /// Print history records, optionally for one tool.
    Show {
        #[arg(long)]
        tool: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let ws = Workspace::open(cli.workspace.as_deref())?;
    match cli.command {
        Command::Rank { bug, top_k, em_alpha } => cmd_rank(&ws, bug, top_k, em_alpha),
        Command::Report { tool, status, bug } => cmd_report(&ws, &tool, &status, bug),
        Command::Simulate(args) => cmd_simulate(&ws, args),
        Command::Tool(ToolCommand::Add {
            name,
            patterns,
            history,
        }) => cmd_tool_add(&ws, name, patterns, history),
        Command::Tool(ToolCommand::List) => {
            let store = ws.history()?;
            let tools: Vec<_> = store
                .roster()
                .iter()
                .map(|(name, entry)| json!({ "name": name, "patterns": entry.patterns }))
                .collect();
            print_json(&tools)
        }
        Command::Pattern(PatternCommand::List) => {
            let registry = ws.patterns()?;
            let mut out = std::io::stdout().lock();
            for p in registry.iter() {
                let implementers: Vec<&str> = p.implementers.iter().map(String::as_str).collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    p.id,
                    p.feature_kind,
                    p.name,
                    implementers.join(",")
                )?;
            }
            Ok(())
        }
        Command::Pattern(PatternCommand::Export) => print_json(&ws.patterns()?.to_config()),
        Command::History(HistoryCommand::Import { file }) => {
            let mut store = ws.history()?;
            import_file(&mut store, &file)?;
            ws.save_history(&store)
        }
        Command::History(HistoryCommand::Export) => {
            println!("{}", ws.history()?.to_json());
            Ok(())
        }
        Command::History(HistoryCommand::Show { tool }) => {
            let store = ws.history()?;
            if let Some(t) = &tool {
                store.roster().require(t)?;
            }
            let mut out = std::io::stdout().lock();
            for r in store.records().filter(|r| tool.as_deref().is_none_or(|t| r.tool == t)) {
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
            }
            Ok(())
        }
    }
}

fn print_json<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn load_bug(args: BugArgs) -> Result<(BugFeatures, Vec<SkippedLine>)> {
    if let Some(path) = args.features {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut bug: BugFeatures =
            serde_json::from_str(&text).with_context(|| format!("parsing bug features {}", path.display()))?;
        if let Some(id) = args.bug_id {
            bug.bug_id = id;
        }
        if bug.lines.is_empty() {
            bail!("bug features in {} have no lines", path.display());
        }
        return Ok((bug, Vec::new()));
    }
    let source = args.bug.expect("clap requires --bug without --features");
    if !source.is_file() {
        bail!("buggy source {} does not exist", source.display());
    }
    let bug_id = args.bug_id.unwrap_or_else(|| {
        source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let spec = BugSpec::Source {
        bug_id,
        source_path: source,
        lines: args.lines,
        error_type: args.error_type,
        test_log: args.test_log,
    };
    Ok(spec.resolve(Path::new("."), &JavaExtractor::new())?)
}

fn cmd_rank(ws: &Workspace, bug: BugArgs, top_k: Option<usize>, em_alpha: Option<f64>) -> Result<()> {
    let registry = ws.patterns()?;
    let history = ws.history()?;
    let mut config = ws.ranker.clone();
    if let Some(a) = em_alpha {
        config.em_alpha = a;
    }
    if top_k == Some(0) {
        bail!("--top-k must be at least 1");
    }
    let (features, skipped) = load_bug(bug)?;
    for s in &skipped {
        eprintln!("warning: skipped line {}: {}", s.line_id, s.reason);
    }
    let mut ranking: Ranking = rank(&features, history.roster().names(), &registry, &history, &config)
        .context("no tools registered; add some with `pepr tool add`")?;
    if let Some(k) = top_k {
        ranking.truncate(k);
    }
    print_json(&json!({
        "bug": features,
        "skipped": skipped.iter().map(|s| json!({"line_id": s.line_id, "reason": s.reason.to_string()})).collect::<Vec<_>>(),
        "em_alpha": config.em_alpha,
        "ranking": ranking.entries,
    }))
}

fn cmd_report(ws: &Workspace, tool: &str, status: &str, bug: BugArgs) -> Result<()> {
    let status: FixStatus = status.parse().map_err(anyhow::Error::msg)?;
    let mut store = ws.history()?;
    store.roster().require(tool)?;
    let (features, skipped) = load_bug(bug)?;
    for s in &skipped {
        eprintln!("warning: skipped line {}: {}", s.line_id, s.reason);
    }
    store.update(tool, &features, status)?;
    ws.save_history(&store)
}

fn import_file(store: &mut HistoryStore, file: &Path) -> Result<()> {
    let base = file.parent().unwrap_or(Path::new("."));
    let records = dataset::read_import_records(file)?;
    let extractor = JavaExtractor::new();
    let mut observations = Vec::with_capacity(records.len());
    let mut failed = 0;
    for (i, record) in records.into_iter().enumerate() {
        match record.resolve(base, &extractor) {
            Ok(obs) => observations.push(obs),
            Err(e) => {
                failed += 1;
                eprintln!("warning: record {}: {e}", i + 1);
            }
        }
    }
    let summary = store.import_history(observations);
    for (i, e) in &summary.rejected {
        eprintln!("warning: observation {}: {e}", i + 1);
    }
    for t in &summary.registered {
        eprintln!("registered new tool `{t}`");
    }
    eprintln!(
        "applied {} record(s), rejected {}",
        summary.applied,
        summary.rejected.len() + failed
    );
    Ok(())
}

fn cmd_tool_add(ws: &Workspace, name: String, patterns: Vec<String>, history: Option<PathBuf>) -> Result<()> {
    let registry = ws.patterns()?;
    for p in &patterns {
        if !registry.contains(p) {
            bail!("unknown pattern `{p}`");
        }
    }
    let mut store = ws.history()?;
    store.roster_mut().register(name.clone(), patterns)?;
    if let Some(file) = history {
        import_file(&mut store, &file)?;
    }
    ws.save_history(&store)
}

fn cmd_simulate(ws: &Workspace, args: SimulateArgs) -> Result<()> {
    let strategy: Strategy = args.strategy.parse()?;
    let registry = ws.patterns()?;
    let initial = match &args.initial_history {
        Some(p) => HistoryStore::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => HistoryStore::new(),
    };

    let features_base = args.features.parent().unwrap_or(Path::new("."));
    let extractor = JavaExtractor::new();
    let bugs = dataset::read_bug_specs(&args.features)?
        .into_iter()
        .map(|spec| spec.resolve(features_base, &extractor).map(|(b, _)| b))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = dataset::read_outcomes(&args.outcomes)?;
    let data = RepairDataset::new(bugs, outcomes, initial.roster().clone())?;

    let mut config = SimulationConfig::new(strategy, args.top_k.first().copied().unwrap_or(1)).with_seed(args.seed);
    config.ranker = ws.ranker.clone();
    if let Some(a) = args.em_alpha {
        config.ranker.em_alpha = a;
    }
    config.dynamic_update = !args.no_dynamic_update;
    if let Some(p) = &args.order_file {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        config.bug_order = Some(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        );
    }

    let report = simulate(&data, &registry, &initial, &config, &args.top_k)?;
    let csv = report.to_csv();
    match &args.csv {
        Some(p) => fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    if let Some(p) = &args.json {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
