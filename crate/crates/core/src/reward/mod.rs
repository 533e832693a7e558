//! The LCCS reward: 1 for a valid plan, otherwise the longest contiguous run shared with the
//! reference plan divided by the reference length.

mod serve;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{judge, Plan};
use crate::pddl::{ActionKey, Domain, Problem};

pub use serve::{respond, score_request, serve, serve_tcp, ScoreRequest, ScoreResponse, ServeContext, ServeError};

fn same_action(a: &ActionKey, b: &ActionKey) -> bool {
    a.schema.eq_ignore_ascii_case(&b.schema) && a.args.len() == b.args.len() && a.args.iter().zip(&b.args).all(|(x, y)| x.eq_ignore_ascii_case(y))
}

/// Length of the longest run of consecutive actions occurring contiguously in both plans.
pub fn lccs_len(a: &Plan, b: &Plan) -> usize {
    let (a, b) = (&a.actions, &b.actions);
    // run[j] = length of the common run ending at a[i-1], b[j-1]
    let mut run = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = run[j + 1];
            run[j + 1] = if same_action(x, y) { diag + 1 } else { 0 };
            best = best.max(run[j + 1]);
            diag = up;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardScore {
    pub reward: f64,
    pub valid: bool,
    pub lccs_len: usize,
    pub ref_len: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("reference plan is not valid for the problem: {0}")]
    InvalidReference(String),
    #[error("no reference plan given")]
    NoReference,
}

/// Reward from an already known verdict.
pub fn reward_from(valid: bool, generated: &Plan, reference: &Plan) -> RewardScore {
    let lccs = lccs_len(generated, reference);
    let ref_len = reference.len();
    let reward = if valid {
        1.0
    } else if ref_len == 0 {
        0.0
    } else {
        lccs as f64 / ref_len as f64
    };
    RewardScore { reward, valid, lccs_len: lccs, ref_len }
}

/// Scores `generated` against one reference plan, which must itself be valid.
pub fn score(domain: &Domain, problem: &Problem, generated: &Plan, reference: &Plan) -> Result<RewardScore, RewardError> {
    let r = judge(domain, problem, reference);
    if !r.valid {
        return Err(RewardError::InvalidReference(r.to_string()));
    }
    Ok(reward_from(judge(domain, problem, generated).valid, generated, reference))
}

/// Best score over several references (each must be valid).
pub fn score_multi(domain: &Domain, problem: &Problem, generated: &Plan, references: &[Plan]) -> Result<RewardScore, RewardError> {
    let valid = judge(domain, problem, generated).valid;
    let mut best: Option<RewardScore> = None;
    for reference in references {
        let r = judge(domain, problem, reference);
        if !r.valid {
            return Err(RewardError::InvalidReference(r.to_string()));
        }
        let s = reward_from(valid, generated, reference);
        if best.is_none_or(|b| (s.reward, s.lccs_len) > (b.reward, b.lccs_len)) {
            best = Some(s);
        }
    }
    best.ok_or(RewardError::NoReference)
}
