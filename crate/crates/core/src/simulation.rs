//! Replays recorded repair results under a tool-selection strategy.
//!
//! Per bug a strategy picks an ordered list of tools. Every picked tool costs
//! one invocation (TIT). Plausible patches from picked tools are reviewed in
//! pick order; the bug's validation cost (HVT) is the position of the first
//! correct patch among them, or the number of plausible patches if none is
//! correct.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Outcome, RepairDataset};
use crate::history::HistoryStore;
use crate::metrics::{hvsp, tisp};
use crate::patterns::PatternRegistry;
use crate::ranker::{rank, RankError, RankerConfig, DEFAULT_EM_ALPHA};

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error("unknown strategy `{0}` (expected pepr, random, optimal or all)")]
    UnknownStrategy(String),
    #[error("top-k must be at least 1")]
    ZeroK,
    #[error("{0}")]
    BugOrder(String),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    History(#[from] crate::history::HistoryError),
    #[error("dataset has no tools")]
    NoTools,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Top-k of the preference ranking, updating history after every bug.
    Pepr,
    /// A uniformly shuffled roster, truncated to k.
    Random,
    /// Tools that fix the bug correctly, then those with a plausible patch,
    /// then the rest; truncated to k.
    Optimal,
    /// The whole roster in registration order.
    All,
}

impl FromStr for Strategy {
    type Err = SimulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pepr" => Ok(Strategy::Pepr),
            "random" => Ok(Strategy::Random),
            "optimal" => Ok(Strategy::Optimal),
            "all" => Ok(Strategy::All),
            _ => Err(SimulationError::UnknownStrategy(s.to_string())),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Pepr => "pepr",
            Strategy::Random => "random",
            Strategy::Optimal => "optimal",
            Strategy::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub strategy: Strategy,
    pub k: usize,
    pub seed: u64,
    pub ranker: RankerConfig,
    /// Processing order of bug ids; a seeded shuffle when absent.
    pub bug_order: Option<Vec<String>>,
    /// Feed each verdict back into the history (pepr only).
    pub dynamic_update: bool,
}

impl SimulationConfig {
    pub fn new(strategy: Strategy, k: usize) -> Self {
        Self {
            strategy,
            k,
            seed: 1,
            ranker: RankerConfig {
                em_alpha: DEFAULT_EM_ALPHA,
                tie_break_priority: Vec::new(),
            },
            bug_order: None,
            dynamic_update: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// What happened to one bug.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugTrace {
    pub bug_id: String,
    pub selected: Vec<String>,
    pub correct: bool,
    pub plausible: bool,
    pub patches: u64,
    pub hvt: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: Strategy,
    /// Tools selected per bug at most; the roster size for `all`.
    pub k: usize,
    pub correct_fixed: u64,
    pub plausible_fixed: u64,
    pub plausible_patches: u64,
    pub tit: u64,
    pub hvt: u64,
    pub traces: Vec<BugTrace>,
}

/// Validation cost of reviewing the plausible patches of `outcomes` in order.
pub fn validation_cost(outcomes: impl IntoIterator<Item = Outcome>) -> u64 {
    let mut reviewed = 0;
    for o in outcomes.into_iter().filter(|o| o.is_plausible()) {
        reviewed += 1;
        if o == Outcome::Correct {
            return reviewed;
        }
    }
    reviewed
}

/// Bug processing order: the configured one, or a shuffle seeded by `seed`.
pub fn bug_order(dataset: &RepairDataset, config: &SimulationConfig) -> Result<Vec<String>, SimulationError> {
    match &config.bug_order {
        Some(order) => {
            dataset.check_order(order).map_err(SimulationError::BugOrder)?;
            Ok(order.clone())
        }
        None => {
            let mut ids: Vec<String> = dataset.bug_ids().map(str::to_string).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            ids.shuffle(&mut rng);
            Ok(ids)
        }
    }
}

/// Replays the dataset under `config.strategy`. `initial` seeds the history
/// the pepr strategy starts from; it is not modified.
pub fn run_strategy(
    dataset: &RepairDataset,
    registry: &PatternRegistry,
    initial: &HistoryStore,
    config: &SimulationConfig,
) -> Result<StrategyResult, SimulationError> {
    if config.k == 0 && config.strategy != Strategy::All {
        return Err(SimulationError::ZeroK);
    }
    config.ranker.validate()?;
    let tools: Vec<&str> = dataset.roster().names().collect();
    if tools.is_empty() {
        return Err(SimulationError::NoTools);
    }
    let order = bug_order(dataset, config)?;

    let mut history = initial.clone();
    for (name, entry) in dataset.roster().iter() {
        history.roster_mut().ensure(name);
        let merged = history.roster_mut().get_mut(name).expect("just ensured");
        merged.patterns.extend(entry.patterns.iter().cloned());
    }
    let mut pick_rng = ChaCha8Rng::seed_from_u64(config.seed);
    pick_rng.set_stream(1);

    let k = match config.strategy {
        Strategy::All => tools.len(),
        _ => config.k,
    };
    let mut result = StrategyResult {
        strategy: config.strategy,
        k,
        correct_fixed: 0,
        plausible_fixed: 0,
        plausible_patches: 0,
        tit: 0,
        hvt: 0,
        traces: Vec::with_capacity(order.len()),
    };

    for bug_id in &order {
        let bug = dataset.bug(bug_id).expect("order checked against dataset");
        let selected: Vec<String> = match config.strategy {
            Strategy::Pepr => rank(bug, tools.iter().copied(), registry, &history, &config.ranker)?
                .top_k(k)
                .into_iter()
                .map(str::to_string)
                .collect(),
            Strategy::Random => {
                let mut shuffled = tools.clone();
                shuffled.shuffle(&mut pick_rng);
                shuffled.into_iter().take(k).map(str::to_string).collect()
            }
            Strategy::Optimal => {
                let mut ordered = tools.clone();
                ordered.sort_by_key(|t| match dataset.outcome(bug_id, t) {
                    Outcome::Correct => 0,
                    Outcome::Overfit => 1,
                    Outcome::None => 2,
                });
                ordered.into_iter().take(k).map(str::to_string).collect()
            }
            Strategy::All => tools.iter().map(|t| t.to_string()).collect(),
        };

        let outcomes: Vec<Outcome> = selected.iter().map(|t| dataset.outcome(bug_id, t)).collect();
        let trace = BugTrace {
            bug_id: bug_id.clone(),
            correct: outcomes.contains(&Outcome::Correct),
            plausible: outcomes.iter().any(|o| o.is_plausible()),
            patches: outcomes.iter().filter(|o| o.is_plausible()).count() as u64,
            hvt: validation_cost(outcomes.iter().copied()),
            selected,
        };
        result.tit += trace.selected.len() as u64;
        result.hvt += trace.hvt;
        result.plausible_patches += trace.patches;
        result.correct_fixed += trace.correct as u64;
        result.plausible_fixed += trace.plausible as u64;

        if config.strategy == Strategy::Pepr && config.dynamic_update {
            for (tool, outcome) in trace.selected.iter().zip(&outcomes) {
                history.update(tool, bug, outcome.status())?;
            }
        }
        result.traces.push(trace);
    }
    Ok(result)
}

/// One row of a simulation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub strategy: Strategy,
    pub k: usize,
    pub correct: u64,
    pub plausible: u64,
    pub patches: u64,
    pub tit: u64,
    pub hvt: u64,
    pub tisp: Option<f64>,
    pub hvsp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub bugs: usize,
    pub tools: usize,
    pub rows: Vec<ReportRow>,
}

impl SimulationReport {
    /// Rows for `results`, with savings measured against `all`. The
    /// baseline itself is appended as the last row unless already present.
    pub fn new(dataset: &RepairDataset, results: &[StrategyResult], all: &StrategyResult) -> Self {
        let row = |r: &StrategyResult| ReportRow {
            strategy: r.strategy,
            k: r.k,
            correct: r.correct_fixed,
            plausible: r.plausible_fixed,
            patches: r.plausible_patches,
            tit: r.tit,
            hvt: r.hvt,
            tisp: tisp(r.correct_fixed, all.correct_fixed, r.tit, all.tit).ok(),
            hvsp: hvsp(r.correct_fixed, all.correct_fixed, r.hvt, all.hvt).ok(),
        };
        let mut rows: Vec<ReportRow> = results.iter().map(row).collect();
        if !results.iter().any(|r| r.strategy == Strategy::All) {
            rows.push(row(all));
        }
        Self {
            bugs: dataset.bug_count(),
            tools: dataset.roster().len(),
            rows,
        }
    }

    /// CSV with columns `strategy,k,correct,plausible,patches,tit,hvt,tisp,hvsp`.
    /// Savings are printed with six decimals; undefined savings are empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "strategy",
            "k",
            "correct",
            "plausible",
            "patches",
            "tit",
            "hvt",
            "tisp",
            "hvsp",
        ])
        .expect("in-memory write");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.strategy.to_string(),
                r.k.to_string(),
                r.correct.to_string(),
                r.plausible.to_string(),
                r.patches.to_string(),
                r.tit.to_string(),
                r.hvt.to_string(),
                fmt(r.tisp),
                fmt(r.hvsp),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// Runs `base.strategy` at every k in `ks` plus the invoke-all baseline.
pub fn simulate(
    dataset: &RepairDataset,
    registry: &PatternRegistry,
    initial: &HistoryStore,
    base: &SimulationConfig,
    ks: &[usize],
) -> Result<SimulationReport, SimulationError> {
    let all_config = SimulationConfig {
        strategy: Strategy::All,
        ..base.clone()
    };
    let all = run_strategy(dataset, registry, initial, &all_config)?;
    let results = if base.strategy == Strategy::All {
        vec![all.clone()]
    } else {
        ks.iter()
            .map(|&k| run_strategy(dataset, registry, initial, &SimulationConfig { k, ..base.clone() }))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(SimulationReport::new(dataset, &results, &all))
}
