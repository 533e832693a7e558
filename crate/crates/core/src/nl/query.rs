//! Query layout: context, action descriptions with restrictions, and the statement.

use std::collections::BTreeSet;

use super::error::NlError;
use super::matcher::match_atom;
use super::template::{capitalize, ObjectTable, TemplateSet};
use super::{normalize, normalize_piece};
use crate::pddl::{Atom, Domain, Literal, Problem};

const CONTEXT: &str = "[CONTEXT]";
const ACTIONS: &str = "[ACTION DESCRIPTION]";
const STATEMENT: &str = "[STATEMENT]";
const ACTIONS_INTRO: &str = "Here are the actions that can be performed:";
const RESTRICTIONS_INTRO: &str = "The following are the restrictions on the actions:";
const INIT_INTRO: &str = "As initial conditions I have that, ";
const INIT_NOTHING: &str = "As initial conditions I have nothing.";
const GOAL_INTRO: &str = "My goal is to have that ";

/// The four shuffleable lists of a query, plus its context paragraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryParts {
    pub context: String,
    /// One line per schema, without the final period.
    pub actions: Vec<String>,
    /// Precondition and effect restrictions, without the final period.
    pub restrictions: Vec<String>,
    pub init: Vec<String>,
    pub goal: Vec<String>,
}

/// Statement facts read back from a query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedQuery {
    pub parts: QueryParts,
    pub init: BTreeSet<Atom>,
    pub goal: BTreeSet<Literal>,
}

pub(crate) fn render_literal(lit: &Literal, templates: &TemplateSet, objects: &ObjectTable) -> Result<String, NlError> {
    let s = templates.render_atom(&lit.atom, objects)?;
    Ok(if lit.positive { s } else { format!("{}{}{}", templates.negation.0, s, templates.negation.1) })
}

/// Comma-separated goal list, as used in the statement and in goal annotations.
pub(crate) fn goal_sentences(problem: &Problem, templates: &TemplateSet, objects: &ObjectTable) -> Result<Vec<String>, NlError> {
    if problem.goal.is_empty() {
        return Err(NlError::DegenerateGoal);
    }
    problem.goal.iter().map(|g| render_literal(g, templates, objects)).collect()
}

pub(crate) fn goal_statement(goal: &[String]) -> String {
    format!("{GOAL_INTRO}{}.", goal.join(", "))
}

pub fn render_query_parts(domain: &Domain, problem: &Problem, templates: &TemplateSet) -> Result<QueryParts, NlError> {
    let objects = templates.object_table(domain, problem)?;
    let mut actions = Vec::new();
    let mut restrictions = Vec::new();
    for schema in &domain.schemas {
        let tpl = templates.action(&schema.name)?;
        actions.push(tpl.description.clone());
        for p in tpl.precond.iter().chain(&tpl.effect) {
            restrictions.push(capitalize(&p.render_generic()));
        }
    }
    let init = problem.init.iter().map(|a| templates.render_atom(a, &objects)).collect::<Result<_, _>>()?;
    let goal = goal_sentences(problem, templates, &objects)?;
    Ok(QueryParts { context: templates.context.clone(), actions, restrictions, init, goal })
}

/// Renders the full query text for a problem.
pub fn render_query(domain: &Domain, problem: &Problem, templates: &TemplateSet) -> Result<String, NlError> {
    Ok(render_query_parts(domain, problem, templates)?.render())
}

impl QueryParts {
    pub fn render(&self) -> String {
        let mut out = format!("{CONTEXT}\n{}\n{ACTIONS}\n{ACTIONS_INTRO}\n", self.context);
        for a in &self.actions {
            out.push_str(a);
            out.push_str(".\n");
        }
        out.push('\n');
        out.push_str(RESTRICTIONS_INTRO);
        out.push('\n');
        for r in &self.restrictions {
            out.push_str(r);
            out.push_str(".\n");
        }
        out.push('\n');
        out.push_str(STATEMENT);
        out.push('\n');
        if self.init.is_empty() {
            out.push_str(INIT_NOTHING);
        } else {
            out.push_str(&format!("{INIT_INTRO}{}.", self.init.join(", ")));
        }
        out.push_str("\n\n");
        out.push_str(&goal_statement(&self.goal));
        out
    }

    /// Splits query text back into its lists. Only the layout is checked here.
    pub fn parse(text: &str) -> Result<QueryParts, NlError> {
        let bad = |m: &str| NlError::BadQuery(m.to_string());
        let (_, rest) = text.split_once(CONTEXT).ok_or_else(|| bad("missing [CONTEXT]"))?;
        let (context, rest) = rest.split_once(ACTIONS).ok_or_else(|| bad("missing [ACTION DESCRIPTION]"))?;
        let (action_block, statement) = rest.split_once(STATEMENT).ok_or_else(|| bad("missing [STATEMENT]"))?;
        let (actions, restrictions) = action_block.split_once(RESTRICTIONS_INTRO).ok_or_else(|| bad("missing restriction list"))?;
        let actions = actions.trim().strip_prefix(ACTIONS_INTRO).ok_or_else(|| bad("missing action list"))?;
        let lines =
            |block: &str| -> Vec<String> { block.lines().map(str::trim).filter(|l| !l.is_empty()).map(|l| l.trim_end_matches('.').to_string()).collect() };
        let statement = statement.trim();
        let (init_line, goal_line) = statement.split_once(GOAL_INTRO).ok_or_else(|| bad("missing goal statement"))?;
        let init_line = init_line.trim();
        let init = if init_line == INIT_NOTHING {
            Vec::new()
        } else {
            let body = init_line.strip_prefix(INIT_INTRO).ok_or_else(|| bad("missing initial conditions"))?;
            split_list(body)
        };
        Ok(QueryParts {
            context: context.trim().to_string(),
            actions: lines(actions),
            restrictions: lines(restrictions),
            init,
            goal: split_list(goal_line.trim()),
        })
    }
}

fn split_list(body: &str) -> Vec<String> {
    let body = body.trim().strip_suffix('.').unwrap_or(body.trim());
    body.split(", ").map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Reads a (possibly negated) fact sentence.
pub(crate) fn parse_literal(sentence: &str, domain: &Domain, templates: &TemplateSet, objects: &ObjectTable) -> Result<Literal, NlError> {
    let norm = normalize(sentence);
    let (pre, post) = (normalize_piece(&templates.negation.0), normalize_piece(&templates.negation.1));
    let post = post.trim_end_matches('.').trim_end();
    if !pre.is_empty() || !post.is_empty() {
        if let Some(inner) = norm.strip_prefix(pre.as_str()).and_then(|s| s.strip_suffix(post)) {
            if let Some(atom) = match_atom(inner, domain, templates, objects) {
                return Ok(Literal::neg(atom));
            }
        }
    }
    match_atom(&norm, domain, templates, objects).map(Literal::pos).ok_or_else(|| NlError::UnparseableSentence(sentence.to_string()))
}

/// Reads a query back into its facts, resolving object phrases against `problem`'s objects.
pub fn parse_query(text: &str, domain: &Domain, problem: &Problem, templates: &TemplateSet) -> Result<ParsedQuery, NlError> {
    let parts = QueryParts::parse(text)?;
    let objects = templates.object_table(domain, problem)?;
    let mut init = BTreeSet::new();
    for s in &parts.init {
        let lit = parse_literal(s, domain, templates, &objects)?;
        if !lit.positive {
            return Err(NlError::UnparseableSentence(s.clone()));
        }
        init.insert(lit.atom);
    }
    let goal = parts.goal.iter().map(|s| parse_literal(s, domain, templates, &objects)).collect::<Result<_, _>>()?;
    Ok(ParsedQuery { parts, init, goal })
}
