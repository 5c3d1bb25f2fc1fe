use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::report::{harmonic, EvaluationReport, ReportRow};
use crate::automaton::{accepts, TimedAutomaton};
use crate::miner::{mine_stages, MineError, MinerConfig};
use crate::policy::{apply_policy, PolicyConfig, PolicyError};
use crate::trace::TimedTrace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KFoldOptions {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub k: usize,
}

impl Default for KFoldOptions {
    fn default() -> Self {
        KFoldOptions { folds: 10, repetitions: 1, seed: 0, k: 2 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("need at least 2 folds")]
    TooFewFolds,
    #[error("need at least one repetition")]
    NoRepetitions,
    #[error("need at least one configuration")]
    NoConfigs,
    #[error("{traces} valid traces cannot be split into {folds} folds")]
    TooFewTraces { traces: usize, folds: usize },
    #[error("fraction {0} is outside (0, 1]")]
    Fraction(f64),
    #[error("need at least one extraction")]
    NoExtractions,
    #[error("mining failed: {0}")]
    Mine(#[from] MineError),
    #[error("guard generation failed: {0}")]
    Policy(#[from] PolicyError),
    #[error("trace check failed: {0}")]
    Check(String),
}

/// Distinct seed per repetition or extraction, derived from the base seed.
fn derive_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Near-equal partition of a shuffled index range; the first `n % folds`
/// folds get one extra element.
fn partition(n: usize, folds: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut at = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        out.push(idx[at..at + len].to_vec());
        at += len;
    }
    out
}

fn accepted(model: &TimedAutomaton, trace: &TimedTrace) -> Result<bool, EvalError> {
    accepts(model, trace, true).map(|r| r.accepted).map_err(|e| EvalError::Check(e.to_string()))
}

fn fold_rows(
    training: &[TimedTrace],
    held_out: &[&TimedTrace],
    invalid: &[TimedTrace],
    configs: &[PolicyConfig],
    k: usize,
) -> Result<Vec<ReportRow>, EvalError> {
    // one refined model per absolute-clock setting, shared by all policies using it
    let mut refined: [Option<(TimedAutomaton, f64)>; 2] = [None, None];
    let events: usize = training.iter().map(TimedTrace::len).sum();
    let mut rows = Vec::with_capacity(configs.len());
    for cfg in configs {
        let slot = usize::from(cfg.absolute_guards);
        if refined[slot].is_none() {
            let start = Instant::now();
            let stages = mine_stages(training, &MinerConfig { k, absolute_clock: cfg.absolute_guards })?;
            refined[slot] = Some((stages.refined, start.elapsed().as_secs_f64() * 1e3));
        }
        let (base, stage_ms) = refined[slot].as_ref().expect("just filled");
        let start = Instant::now();
        let model = apply_policy(base, cfg)?;
        let policy_ms = start.elapsed().as_secs_f64() * 1e3;

        let mut hits = 0;
        for t in held_out {
            hits += usize::from(accepted(&model, t)?);
        }
        let sensitivity = hits as f64 / held_out.len() as f64;
        let specificity = if invalid.is_empty() {
            None
        } else {
            let mut rejected = 0;
            for t in invalid {
                rejected += usize::from(!accepted(&model, t)?);
            }
            Some(rejected as f64 / invalid.len() as f64)
        };
        let stats = model.stats();
        rows.push(ReportRow {
            config_id: cfg.label(),
            fraction: 1.0,
            sensitivity,
            specificity,
            harmonic_mean: specificity.map(|sp| harmonic(sensitivity, sp)),
            inference_ms: stage_ms + policy_ms,
            events_processed: events as f64,
            states: stats.states as f64,
            transitions: stats.transitions as f64,
            clocks: stats.clocks as f64,
        });
    }
    Ok(rows)
}

/// Repeated k-fold cross-validation of every configuration.
///
/// Each fold mines on the other folds' valid traces, measures sensitivity on
/// its own held-out valid traces and specificity on all invalid traces.
/// Results are averages over folds and repetitions, rows in `configs` order.
pub fn kfold_evaluate(
    valid: &[TimedTrace],
    invalid: &[TimedTrace],
    configs: &[PolicyConfig],
    options: &KFoldOptions,
) -> Result<EvaluationReport, EvalError> {
    if options.folds < 2 {
        return Err(EvalError::TooFewFolds);
    }
    if options.repetitions == 0 {
        return Err(EvalError::NoRepetitions);
    }
    if configs.is_empty() {
        return Err(EvalError::NoConfigs);
    }
    if valid.len() < options.folds {
        return Err(EvalError::TooFewTraces { traces: valid.len(), folds: options.folds });
    }
    let mut tasks = Vec::new();
    for rep in 0..options.repetitions {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, rep));
        let folds = partition(valid.len(), options.folds, &mut rng);
        let mut fold_of = vec![0; valid.len()];
        for (f, members) in folds.iter().enumerate() {
            for &i in members {
                fold_of[i] = f;
            }
        }
        for (f, members) in folds.iter().enumerate() {
            let training: Vec<TimedTrace> =
                valid.iter().enumerate().filter(|(i, _)| fold_of[*i] != f).map(|(_, t)| t.clone()).collect();
            let held_out: Vec<usize> = members.clone();
            tasks.push((training, held_out));
        }
    }
    let per_task: Vec<Vec<ReportRow>> = tasks
        .par_iter()
        .map(|(training, held)| {
            let held: Vec<&TimedTrace> = held.iter().map(|&i| &valid[i]).collect();
            fold_rows(training, &held, invalid, configs, options.k)
        })
        .collect::<Result<_, _>>()?;
    let rows = (0..configs.len())
        .map(|c| ReportRow::mean(&per_task.iter().map(|rows| rows[c].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(EvaluationReport { rows })
}

/// k-fold evaluation on random subsets of the valid traces.
///
/// For each fraction below 1, `extractions` subsets of `round(fraction·n)`
/// traces are drawn and their results averaged; fraction 1 evaluates the
/// full set once.
pub fn subset_study(
    valid: &[TimedTrace],
    invalid: &[TimedTrace],
    configs: &[PolicyConfig],
    fractions: &[f64],
    extractions: usize,
    options: &KFoldOptions,
) -> Result<EvaluationReport, EvalError> {
    if extractions == 0 {
        return Err(EvalError::NoExtractions);
    }
    let mut report = EvaluationReport::default();
    for &fraction in fractions {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(EvalError::Fraction(fraction));
        }
        let mut rows = if fraction == 1.0 {
            kfold_evaluate(valid, invalid, configs, options)?.rows
        } else {
            let size = (fraction * valid.len() as f64).round() as usize;
            let mut runs = Vec::with_capacity(extractions);
            for e in 0..extractions {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed.wrapping_add(1), e));
                let mut picked = index::sample(&mut rng, valid.len(), size).into_vec();
                picked.sort_unstable();
                let subset: Vec<TimedTrace> = picked.iter().map(|&i| valid[i].clone()).collect();
                runs.push(kfold_evaluate(&subset, invalid, configs, options)?.rows);
            }
            (0..configs.len())
                .map(|c| ReportRow::mean(&runs.iter().map(|r| r[c].clone()).collect::<Vec<_>>()))
                .collect()
        };
        for r in &mut rows {
            r.fraction = fraction;
        }
        report.rows.extend(rows);
    }
    Ok(report)
}
