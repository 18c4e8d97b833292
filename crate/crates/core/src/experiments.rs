//! Benchmark protocols: repeated training runs per scenario, the
//! three-scenario comparison table and the hidden-layer sweep.
//!
//! Run `i` of a protocol uses `init_seed = base_seed + i` and
//! `shuffle_seed = base_seed + 1_000_000 + i`. Runs are independent, so they
//! execute on a rayon pool and are gathered back in run order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::sampler::Splits;
use crate::tinynet::{evaluate, train, AdamConfig, Curves, Mlp, MlpArchitecture, TrainConfig};

/// Offset between the init seed and the shuffle seed of a run.
pub const SHUFFLE_SEED_OFFSET: u64 = 1_000_000;

/// Hidden sizes of the default sweep.
pub const DEFAULT_SWEEP_SIZES: [usize; 8] = [5, 10, 15, 20, 30, 50, 100, 200];
pub const DEFAULT_SWEEP_REPS: usize = 10;
pub const DEFAULT_RUNS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "network", rename_all = "snake_case")]
pub enum Scenario {
    Deep { hidden: usize },
    FrozenDeep { hidden: usize },
    Shallow,
}

impl Scenario {
    pub fn architecture(&self) -> MlpArchitecture {
        match *self {
            Scenario::Deep { hidden } => MlpArchitecture::deep(hidden),
            Scenario::FrozenDeep { hidden } => MlpArchitecture::frozen_deep(hidden),
            Scenario::Shallow => MlpArchitecture::shallow(),
        }
    }

    pub fn hidden(&self) -> Option<usize> {
        match *self {
            Scenario::Deep { hidden } | Scenario::FrozenDeep { hidden } => Some(hidden),
            Scenario::Shallow => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Deep { .. } => "deep",
            Scenario::FrozenDeep { .. } => "frozen_deep",
            Scenario::Shallow => "shallow",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden() == Some(0) {
            return Err(Error::config("hidden layer size must be at least 1"));
        }
        Ok(())
    }

    /// The five cells of the comparison table, in display order.
    pub fn table1() -> [Scenario; 5] {
        [
            Scenario::Deep { hidden: 20 },
            Scenario::Deep { hidden: 30 },
            Scenario::FrozenDeep { hidden: 20 },
            Scenario::FrozenDeep { hidden: 30 },
            Scenario::Shallow,
        ]
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Deep { hidden } => write!(f, "deep network ({hidden} hidden)"),
            Scenario::FrozenDeep { hidden } => write!(f, "deep network, frozen lower weights ({hidden} hidden)"),
            Scenario::Shallow => f.write_str("shallow network"),
        }
    }
}

/// Training hyperparameters shared by every run of a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for Protocol {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self { epochs: t.epochs, batch_size: t.batch_size, adam: t.adam, workers: 0 }
    }
}

impl Protocol {
    pub fn train_config(&self, init_seed: u64, shuffle_seed: u64) -> TrainConfig {
        TrainConfig { epochs: self.epochs, batch_size: self.batch_size, adam: self.adam, init_seed, shuffle_seed }
    }

    fn run_all<T, R>(&self, jobs: &[T], f: impl Fn(&T) -> Result<R> + Sync + Send) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(f).collect())
    }
}

/// Seeds of run `i` under `base_seed`.
pub fn run_seeds(base_seed: u64, i: usize) -> (u64, u64) {
    let i = i as u64;
    (base_seed.wrapping_add(i), base_seed.wrapping_add(SHUFFLE_SEED_OFFSET).wrapping_add(i))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: Scenario,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    pub final_test_accuracy: f64,
    pub curves: Curves,
    /// `confusion[true][predicted]` on the test split.
    pub confusion: [[usize; 3]; 3],
}

/// Trains once on the train split (validation for the curves) and scores the test split.
pub fn run_single(scenario: Scenario, init_seed: u64, shuffle_seed: u64, protocol: &Protocol, splits: &Splits) -> Result<RunResult> {
    run_single_with_net(scenario, init_seed, shuffle_seed, protocol, splits).map(|(r, _)| r)
}

/// [`run_single`], also returning the trained network.
pub fn run_single_with_net(
    scenario: Scenario,
    init_seed: u64,
    shuffle_seed: u64,
    protocol: &Protocol,
    splits: &Splits,
) -> Result<(RunResult, Mlp)> {
    scenario.validate()?;
    let cfg = protocol.train_config(init_seed, shuffle_seed);
    let out = train(&scenario.architecture(), &cfg, &splits.train, &splits.validation)?;
    let ev = evaluate(&out.net, &splits.test);
    let result = RunResult {
        scenario,
        init_seed,
        shuffle_seed,
        final_test_accuracy: ev.accuracy,
        curves: out.curves,
        confusion: ev.confusion,
    };
    Ok((result, out.net))
}

pub fn run_scenario(scenario: Scenario, n_runs: usize, base_seed: u64, protocol: &Protocol, splits: &Splits) -> Result<Vec<RunResult>> {
    run_many(&[scenario], n_runs, base_seed, protocol, splits)
}

/// `n_runs` runs of every scenario, grouped by scenario in input order.
fn run_many(scenarios: &[Scenario], n_runs: usize, base_seed: u64, protocol: &Protocol, splits: &Splits) -> Result<Vec<RunResult>> {
    if n_runs == 0 {
        return Err(Error::config("need at least one run"));
    }
    for s in scenarios {
        s.validate()?;
    }
    let jobs: Vec<(Scenario, usize)> = scenarios.iter().flat_map(|&s| (0..n_runs).map(move |i| (s, i))).collect();
    protocol.run_all(&jobs, |&(s, i)| {
        let (init, shuffle) = run_seeds(base_seed, i);
        run_single(s, init, shuffle, protocol, splits)
    })
}

/// Mean, unbiased standard deviation and range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `None` for fewer than two values.
    pub std: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    Ok(Summary {
        n,
        mean,
        std: sample_std(values).ok(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Standard deviation with the `n - 1` denominator.
pub fn sample_std(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    // Deviations from the first value are exactly zero for constant input.
    let shift = values[0];
    let mean = values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
    let ss: f64 = values.iter().map(|v| (v - shift - mean).powi(2)).sum();
    Ok((ss / (n - 1) as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub scenario: Scenario,
    pub accuracy: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub base_seed: u64,
    pub protocol: Protocol,
    pub runs: Vec<RunResult>,
    pub cells: Vec<CellSummary>,
}

impl Table1 {
    pub fn cell(&self, scenario: Scenario) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.scenario == scenario)
    }

    pub fn runs_of(&self, scenario: Scenario) -> impl Iterator<Item = &RunResult> {
        self.runs.iter().filter(move |r| r.scenario == scenario)
    }
}

/// Final test accuracy over `n_runs` seeds for every cell of the comparison table.
pub fn table1(n_runs: usize, base_seed: u64, protocol: &Protocol, splits: &Splits) -> Result<Table1> {
    let scenarios = Scenario::table1();
    let runs = run_many(&scenarios, n_runs, base_seed, protocol, splits)?;
    let cells = scenarios
        .iter()
        .map(|&scenario| {
            let acc: Vec<f64> =
                runs.iter().filter(|r| r.scenario == scenario).map(|r| r.final_test_accuracy).collect();
            Ok(CellSummary { scenario, accuracy: summarize(&acc)? })
        })
        .collect::<Result<_>>()?;
    Ok(Table1 { base_seed, protocol: *protocol, runs, cells })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub hidden: usize,
    /// Final test error of each repetition, in run order.
    pub test_errors: Vec<f64>,
    pub error: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub base_seed: u64,
    pub reps: usize,
    pub protocol: Protocol,
    pub entries: Vec<SweepEntry>,
    pub runs: Vec<RunResult>,
}

impl SweepResult {
    pub fn entry(&self, hidden: usize) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.hidden == hidden)
    }
}

/// Trains `Deep(h)` `reps` times for every `h` in `sizes`.
pub fn hidden_sweep(sizes: &[usize], reps: usize, base_seed: u64, protocol: &Protocol, splits: &Splits) -> Result<SweepResult> {
    if sizes.is_empty() {
        return Err(Error::config("sweep needs at least one hidden size"));
    }
    if reps < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: reps });
    }
    let scenarios: Vec<Scenario> = sizes.iter().map(|&hidden| Scenario::Deep { hidden }).collect();
    let runs = run_many(&scenarios, reps, base_seed, protocol, splits)?;
    let entries = sizes
        .iter()
        .zip(runs.chunks(reps))
        .map(|(&hidden, chunk)| {
            let test_errors: Vec<f64> = chunk.iter().map(|r| 1.0 - r.final_test_accuracy).collect();
            Ok(SweepEntry { hidden, error: summarize(&test_errors)?, test_errors })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { base_seed, reps, protocol: *protocol, entries, runs })
}
