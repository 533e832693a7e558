use super::EvalError;
use crate::corpus::CorpusInstance;
use crate::exec::{execute, with_init, Plan};
use crate::nl::{render_plan_lines, ResponseSyntax};
use crate::pddl::Problem;

/// A query whose plan block is already opened with a reference prefix, and the problem
/// against which the model's continuation alone is judged.
#[derive(Clone, Debug, PartialEq)]
pub struct Continuation {
    pub query: String,
    pub check: Problem,
    pub prefix: Plan,
}

pub fn continuation_prompt(instance: &CorpusInstance, prefix_len: usize, syntax: &ResponseSyntax) -> Result<Continuation, EvalError> {
    let r = instance.resolve()?;
    if prefix_len >= r.plan.len() {
        return Err(EvalError::PrefixTooLong { prefix: prefix_len, len: r.plan.len() });
    }
    if prefix_len == 0 {
        return Ok(Continuation { query: instance.query.clone(), check: r.problem, prefix: Plan::default() });
    }
    let prefix = Plan::new(r.plan.actions[..prefix_len].to_vec());
    let trace = execute(&r.entry.domain, &r.problem, &prefix).map_err(|e| EvalError::PrefixInexecutable(e.to_string()))?;
    let check = with_init(&r.problem, trace.final_state());

    let mut query = instance.query.clone();
    if !query.ends_with('\n') {
        query.push('\n');
    }
    query.push_str(&syntax.preamble);
    query.push('\n');
    query.push_str(&syntax.plan_open);
    query.push('\n');
    for line in render_plan_lines(&prefix, &r.entry.domain, &r.problem, &r.entry.templates)? {
        query.push_str(&line);
        query.push('\n');
    }
    Ok(Continuation { query, check, prefix })
}
