//! Plan execution, the three-flag verdict, and a built-in reference planner.

mod plan;
mod search;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::pddl::{instantiate, ActionKey, Domain, GroundAction, Literal, PddlError, Problem, State};

pub use plan::Plan;
pub use search::{solve_reference, SearchError, SearchLimits};

/// `states[0]` is the initial state; `states[i + 1]` follows from applying step `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub states: Vec<State>,
}

impl Trace {
    pub fn final_state(&self) -> &State {
        self.states.last().expect("trace holds at least the initial state")
    }
}

/// Why a plan could not be executed, reported at the first failing step.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExecutionFailure {
    #[error("step {step}: unmet preconditions {}", fmt_literals(.unmet))]
    Unmet { step: usize, unmet: Vec<Literal> },
    #[error("step {step}: {source}")]
    Ungroundable { step: usize, source: PddlError },
}

impl ExecutionFailure {
    pub fn step(&self) -> usize {
        match self {
            ExecutionFailure::Unmet { step, .. } | ExecutionFailure::Ungroundable { step, .. } => *step,
        }
    }

    /// Unmet ground preconditions; empty when the step did not name a ground action.
    pub fn unmet(&self) -> &[Literal] {
        match self {
            ExecutionFailure::Unmet { unmet, .. } => unmet,
            ExecutionFailure::Ungroundable { .. } => &[],
        }
    }
}

fn fmt_literals(lits: &[Literal]) -> String {
    let parts: Vec<String> = lits.iter().map(ToString::to_string).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanVerdict {
    pub executable: bool,
    pub valid: bool,
    pub goal_satisfiable: bool,
    pub first_failure: Option<ExecutionFailure>,
    /// Last state of the trace, or the state in which execution stopped.
    pub final_state: State,
}

impl PlanVerdict {
    /// `valid`, `executable` or `neither`.
    pub fn label(&self) -> &'static str {
        if self.valid {
            "valid"
        } else if self.executable {
            "executable"
        } else {
            "neither"
        }
    }
}

impl fmt::Display for PlanVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (executable={}, valid={}, goal_satisfiable={})", self.label(), self.executable, self.valid, self.goal_satisfiable)?;
        if let Some(fail) = &self.first_failure {
            write!(f, "; first failure: {fail}")?;
        }
        Ok(())
    }
}

/// Serializable summary of a verdict for reports.
#[derive(Clone, Debug, Serialize)]
pub struct VerdictSummary {
    pub executable: bool,
    pub valid: bool,
    pub goal_satisfiable: bool,
    pub failure_step: Option<usize>,
    pub unmet: Vec<String>,
}

impl From<&PlanVerdict> for VerdictSummary {
    fn from(v: &PlanVerdict) -> Self {
        VerdictSummary {
            executable: v.executable,
            valid: v.valid,
            goal_satisfiable: v.goal_satisfiable,
            failure_step: v.first_failure.as_ref().map(ExecutionFailure::step),
            unmet: v.first_failure.iter().flat_map(|f| f.unmet().iter().map(ToString::to_string)).collect(),
        }
    }
}

fn unmet_preconditions(state: &State, action: &GroundAction) -> Vec<Literal> {
    action.precond.iter().filter(|l| !state.holds(l)).cloned().collect()
}

fn ground_steps(domain: &Domain, problem: &Problem, plan: &Plan) -> Vec<Result<GroundAction, PddlError>> {
    plan.iter().map(|k| instantiate(domain, problem, k)).collect()
}

/// Runs the plan from the initial state, stopping at the first step whose preconditions fail.
pub fn execute(domain: &Domain, problem: &Problem, plan: &Plan) -> Result<Trace, ExecutionFailure> {
    let steps = ground_steps(domain, problem, plan);
    run(problem.init_state(), &steps).map_err(|(f, _)| f)
}

fn run(init: State, steps: &[Result<GroundAction, PddlError>]) -> Result<Trace, (ExecutionFailure, State)> {
    let mut states = Vec::with_capacity(steps.len() + 1);
    states.push(init);
    for (i, step) in steps.iter().enumerate() {
        let cur = states.last().unwrap();
        let action = match step {
            Ok(a) => a,
            Err(e) => return Err((ExecutionFailure::Ungroundable { step: i, source: e.clone() }, cur.clone())),
        };
        let unmet = unmet_preconditions(cur, action);
        if !unmet.is_empty() {
            return Err((ExecutionFailure::Unmet { step: i, unmet }, cur.clone()));
        }
        let next = cur.apply(action);
        states.push(next);
    }
    Ok(Trace { states })
}

/// Executability, validity and goal satisfiability of `plan`.
///
/// Goal satisfiability applies every step's effects in order with preconditions ignored;
/// steps that do not name a ground action contribute no effects.
pub fn judge(domain: &Domain, problem: &Problem, plan: &Plan) -> PlanVerdict {
    let steps = ground_steps(domain, problem, plan);
    let init = problem.init_state();

    let mut relaxed = init.clone();
    for a in steps.iter().flatten() {
        relaxed.apply_mut(a);
    }
    let goal_satisfiable = relaxed.satisfies_all(&problem.goal);

    // same walk as `run`, without keeping the intermediate states
    let mut state = init;
    for (i, step) in steps.into_iter().enumerate() {
        let failure = match step {
            Err(source) => Some(ExecutionFailure::Ungroundable { step: i, source }),
            Ok(action) => {
                let unmet = unmet_preconditions(&state, &action);
                if unmet.is_empty() {
                    state.apply_mut(&action);
                    None
                } else {
                    Some(ExecutionFailure::Unmet { step: i, unmet })
                }
            }
        };
        if let Some(f) = failure {
            return PlanVerdict { executable: false, valid: false, goal_satisfiable, first_failure: Some(f), final_state: state };
        }
    }
    let valid = state.satisfies_all(&problem.goal);
    PlanVerdict { executable: true, valid, goal_satisfiable, first_failure: None, final_state: state }
}

/// Convenience wrapper: the problem with its initial state replaced by `state`.
pub fn with_init(problem: &Problem, state: &State) -> Problem {
    let mut p = problem.clone();
    p.init = state.atoms().iter().cloned().collect();
    p
}

/// True if `key` names a ground action of the problem (declared schema, typed objects).
pub fn is_groundable(domain: &Domain, problem: &Problem, key: &ActionKey) -> bool {
    instantiate(domain, problem, key).is_ok()
}
