//! Evaluation metrics over judged model outputs, and continuation prompts.

mod continuation;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::exec::PlanVerdict;
use crate::nl::NlError;

pub use continuation::{continuation_prompt, Continuation};
pub use report::{evaluate_outputs, metric_rows, render_table, MetricRow, ModelOutput};

/// Plans shorter than this never count as executable: a handful of steps is often
/// executable by accident.
pub const MIN_EXECUTABLE_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no records to aggregate")]
    Empty,
    #[error("instance `{id}` has {have} samples, fewer than k = {k}")]
    GroupTooSmall { id: String, k: usize, have: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("precision is undefined: no step was predicted to be a mistake")]
    UndefinedPrecision,
    #[error("recall is undefined: no step is an actual mistake")]
    UndefinedRecall,
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("prefix of {prefix} actions is not shorter than the {len}-action reference plan")]
    PrefixTooLong { prefix: usize, len: usize },
    #[error("reference prefix does not execute: {0}")]
    PrefixInexecutable(String),
    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Nl(#[from] NlError),
}

/// How records whose response could not be parsed enter the rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailurePolicy {
    /// Counted in the denominator with every flag false.
    #[default]
    AllFalse,
    /// Left out of the denominator.
    Exclude,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub executable: bool,
    pub valid: bool,
    pub goal_satisfiable: bool,
}

impl From<&PlanVerdict> for Outcome {
    fn from(v: &PlanVerdict) -> Self {
        Outcome { executable: v.executable, valid: v.valid, goal_satisfiable: v.goal_satisfiable }
    }
}

/// One judged sample. `outcome` and `plan_len` are present iff the response parsed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    pub domain: String,
    pub split: String,
    pub sample: usize,
    #[serde(default)]
    pub plan_len: Option<usize>,
    #[serde(default)]
    pub outcome: Option<Outcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
}

impl ResultRecord {
    pub fn parsed(id: impl Into<String>, sample: usize, plan_len: usize, outcome: Outcome) -> Self {
        ResultRecord { id: id.into(), domain: String::new(), split: String::new(), sample, plan_len: Some(plan_len), outcome: Some(outcome), parse_error: None }
    }

    pub fn failed(id: impl Into<String>, sample: usize, error: impl Into<String>) -> Self {
        ResultRecord { id: id.into(), domain: String::new(), split: String::new(), sample, plan_len: None, outcome: None, parse_error: Some(error.into()) }
    }

    pub fn is_valid(&self) -> bool {
        self.outcome.is_some_and(|o| o.valid)
    }

    /// Executable with at least [`MIN_EXECUTABLE_LEN`] actions.
    pub fn counts_executable(&self) -> bool {
        self.outcome.is_some_and(|o| o.executable) && self.plan_len.is_some_and(|n| n >= MIN_EXECUTABLE_LEN)
    }

    pub fn is_goal_satisfiable(&self) -> bool {
        self.outcome.is_some_and(|o| o.goal_satisfiable)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rates {
    pub validity: f64,
    pub executability: f64,
    pub goal_sat: f64,
    /// Denominator actually used.
    pub total: usize,
}

/// Validity, executability and goal-satisfiability fractions, one record per instance.
pub fn rates(records: &[ResultRecord], policy: ParseFailurePolicy) -> Result<Rates, EvalError> {
    let used: Vec<&ResultRecord> = records.iter().filter(|r| policy == ParseFailurePolicy::AllFalse || r.outcome.is_some()).collect();
    if used.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = used.len() as f64;
    let frac = |f: fn(&ResultRecord) -> bool| used.iter().filter(|r| f(r)).count() as f64 / n;
    Ok(Rates {
        validity: frac(ResultRecord::is_valid),
        executability: frac(ResultRecord::counts_executable),
        goal_sat: frac(ResultRecord::is_goal_satisfiable),
        total: used.len(),
    })
}

/// Groups records by instance id (first-seen order), each group sorted by sample index.
pub fn group_samples(records: &[ResultRecord]) -> Vec<Vec<ResultRecord>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: std::collections::HashMap<&str, Vec<ResultRecord>> = Default::default();
    for r in records {
        let g = groups.entry(&r.id).or_default();
        if g.is_empty() {
            order.push(&r.id);
        }
        g.push(r.clone());
    }
    order
        .into_iter()
        .map(|id| {
            let mut g = groups.remove(id).unwrap();
            g.sort_by_key(|r| r.sample);
            g
        })
        .collect()
}

/// Fraction of instances with a valid plan among their first `k` samples.
pub fn pass_at_k(groups: &[Vec<ResultRecord>], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    if groups.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut hits = 0;
    for g in groups {
        if g.len() < k {
            let id = g.first().map(|r| r.id.clone()).unwrap_or_default();
            return Err(EvalError::GroupTooSmall { id, k, have: g.len() });
        }
        if g[..k].iter().any(ResultRecord::is_valid) {
            hits += 1;
        }
    }
    Ok(hits as f64 / groups.len() as f64)
}

/// Next-token probabilities at one step of a self-correcting response.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub is_wrong: bool,
    pub p_wrong: f64,
    pub p_continue: f64,
}

impl ProbeRecord {
    /// Ties go to the continuation token.
    pub fn predicted_wrong(&self) -> bool {
        self.p_wrong > self.p_continue
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeScores {
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall of the removal token as a mistake detector.
pub fn probing_scores(records: &[ProbeRecord]) -> Result<ProbeScores, EvalError> {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for r in records {
        for p in [r.p_wrong, r.p_continue] {
            if !(0.0..=1.0).contains(&p) {
                return Err(EvalError::BadProbability(p));
            }
        }
        match (r.predicted_wrong(), r.is_wrong) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp + fp == 0 {
        return Err(EvalError::UndefinedPrecision);
    }
    if tp + fn_ == 0 {
        return Err(EvalError::UndefinedRecall);
    }
    Ok(ProbeScores { precision: tp as f64 / (tp + fp) as f64, recall: tp as f64 / (tp + fn_) as f64 })
}
