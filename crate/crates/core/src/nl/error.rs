use thiserror::Error;

use crate::exec::Plan;
use crate::pddl::PddlError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NlError {
    #[error("no template for {kind} `{name}`")]
    MissingTemplate { kind: &'static str, name: String },
    #[error("bad template for {context}: {msg}")]
    BadTemplate { context: String, msg: String },
    #[error("template file: {0}")]
    Toml(String),
    #[error("goal is empty; nothing to ask for")]
    DegenerateGoal,
    #[error("objects `{first}` and `{second}` both render as `{phrase}`")]
    AmbiguousObject { phrase: String, first: String, second: String },
    #[error("response has no [PLAN] ... [PLAN END] block")]
    MissingPlanMarkers,
    #[error("line {line}: cannot read `{text}` as an action")]
    UnparseableStep { line: usize, text: String, prefix: Plan },
    #[error("cannot read `{0}` as a fact")]
    UnparseableSentence(String),
    #[error("query layout: {0}")]
    BadQuery(String),
    #[error("obfuscation map: {0}")]
    BadObfuscation(String),
    #[error("response syntax: {0}")]
    BadSyntax(String),
    #[error(transparent)]
    Pddl(#[from] PddlError),
}
