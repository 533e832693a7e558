//! Plan responses: rendering and tolerant parsing.

use serde::{Deserialize, Serialize};

use super::error::NlError;
use super::matcher::match_action;
use super::template::{ObjectTable, TemplateSet};
use crate::exec::Plan;
use crate::pddl::{ActionKey, Domain, PddlError, Problem};

/// Tag dialect of annotated responses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSyntax {
    pub goal: (String, String),
    pub count: (String, String),
    pub precon: (String, String),
    pub effect: (String, String),
    pub removal: String,
    pub plan_open: String,
    pub plan_close: String,
    pub preamble: String,
}

impl Default for ResponseSyntax {
    fn default() -> Self {
        ResponseSyntax::angle()
    }
}

fn pair(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

impl ResponseSyntax {
    /// `<GOAL> … </GOAL>` tags; the canonical output form.
    pub fn angle() -> Self {
        ResponseSyntax {
            goal: pair("<GOAL>", "</GOAL>"),
            count: pair("<COUNT>", "</COUNT>"),
            precon: pair("<PRECON>", "</PRECON>"),
            effect: pair("<EFFECT>", "</EFFECT>"),
            ..Self::base()
        }
    }

    /// `[GOAL] … [GOAL END]` tags, accepted on input.
    pub fn square() -> Self {
        ResponseSyntax {
            goal: pair("[GOAL]", "[GOAL END]"),
            count: pair("[COUNT]", "[COUNT END]"),
            precon: pair("[PRECON]", "[PRECON END]"),
            effect: pair("[EFFECT]", "[EFFECT END]"),
            ..Self::base()
        }
    }

    fn base() -> Self {
        ResponseSyntax {
            goal: Default::default(),
            count: Default::default(),
            precon: Default::default(),
            effect: Default::default(),
            removal: "[WRONG]".into(),
            plan_open: "[PLAN]".into(),
            plan_close: "[PLAN END]".into(),
            preamble: "My plan is as follows:".into(),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "angle" => Some(Self::angle()),
            "square" => Some(Self::square()),
            _ => None,
        }
    }

    fn tags(&self) -> [&(String, String); 4] {
        [&self.goal, &self.count, &self.precon, &self.effect]
    }

    /// Tags must be nonempty and pairwise distinct; the removal token must not occur in any phrase.
    pub fn validate(&self, templates: &TemplateSet) -> Result<(), NlError> {
        let mut all: Vec<&str> = self.tags().iter().flat_map(|(a, b)| [a.as_str(), b.as_str()]).collect();
        all.extend([self.removal.as_str(), self.plan_open.as_str(), self.plan_close.as_str()]);
        if all.iter().any(|t| t.trim().is_empty()) {
            return Err(NlError::BadSyntax("empty tag".into()));
        }
        for (i, a) in all.iter().enumerate() {
            if all[i + 1..].contains(a) {
                return Err(NlError::BadSyntax(format!("tag `{a}` used twice")));
            }
        }
        let removal = self.removal.to_lowercase();
        for tpl in templates.actions.values() {
            for p in std::iter::once(&tpl.phrase).chain(&tpl.variants) {
                if p.literals().any(|l| l.to_lowercase().contains(&removal)) {
                    return Err(NlError::BadSyntax(format!("removal token occurs in action phrase of `{}`", tpl.description)));
                }
            }
        }
        Ok(())
    }

    /// Removes every tag span from `text`. An unclosed span ends at the next opening tag on the
    /// same line, or at the end of that line.
    pub fn strip_tags(&self, text: &str) -> String {
        let tags = self.tags();
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        loop {
            let next = tags.iter().filter_map(|(o, c)| rest.find(o.as_str()).map(|i| (i, o, c))).min_by_key(|t| t.0);
            let Some((at, open, close)) = next else {
                out.push_str(rest);
                break;
            };
            out.push_str(&rest[..at]);
            let body = &rest[at + open.len()..];
            let line_end = body.find('\n').unwrap_or(body.len());
            let next_open = tags.iter().filter_map(|(o, _)| body.find(o.as_str())).min();
            rest = match (body.find(close.as_str()), next_open) {
                (Some(c), n) if n.is_none_or(|n| c < n) => &body[c + close.len()..],
                (_, Some(n)) if n < line_end => &body[n..],
                _ => &body[line_end..],
            };
        }
        // stray closing tags
        for (_, c) in tags {
            out = out.replace(c.as_str(), "");
        }
        out
    }
}

/// One rendered line per action, in order.
pub fn render_plan_lines(plan: &Plan, domain: &Domain, problem: &Problem, templates: &TemplateSet) -> Result<Vec<String>, NlError> {
    let objects = templates.object_table(domain, problem)?;
    plan.iter().map(|k| render_action(k, domain, templates, &objects)).collect()
}

pub(crate) fn render_action(key: &ActionKey, domain: &Domain, templates: &TemplateSet, objects: &ObjectTable) -> Result<String, NlError> {
    let tpl = templates.action(&key.schema)?;
    let expected = domain.schema(&key.schema).map_or(0, |s| s.params.len());
    if key.args.len() != expected {
        return Err(PddlError::Arity { name: key.schema.clone(), expected, found: key.args.len() }.into());
    }
    Ok(tpl.phrase.render_grounded(&objects.phrases(&key.args)?))
}

/// Plain response: preamble, then the plan block.
pub fn render_response(plan: &Plan, domain: &Domain, problem: &Problem, templates: &TemplateSet, syntax: &ResponseSyntax) -> Result<String, NlError> {
    let lines = render_plan_lines(plan, domain, problem, templates)?;
    Ok(wrap_plan(&lines, syntax))
}

pub(crate) fn wrap_plan(lines: &[String], syntax: &ResponseSyntax) -> String {
    let mut out = format!("{}\n{}\n", syntax.preamble, syntax.plan_open);
    for l in lines {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str(&syntax.plan_close);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedResponse {
    pub plan: Plan,
    /// Step lines inside the plan block, wrong-marked ones included.
    pub raw_step_count: usize,
    /// Raw indices of wrong-marked steps, ascending.
    pub wrong_marked: Vec<usize>,
}

/// Reads a model response into a plan. Wrong-marked steps are dropped without being matched.
pub fn parse_response(text: &str, domain: &Domain, problem: &Problem, templates: &TemplateSet, syntax: &ResponseSyntax) -> Result<ParsedResponse, NlError> {
    let start = text.find(&syntax.plan_open).ok_or(NlError::MissingPlanMarkers)? + syntax.plan_open.len();
    let len = text[start..].find(&syntax.plan_close).ok_or(NlError::MissingPlanMarkers)?;
    let block = syntax.strip_tags(&text[start..start + len]);

    let mut steps: Vec<(String, bool)> = Vec::new();
    for line in block.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.strip_suffix(syntax.removal.as_str()) {
            Some(body) if body.trim().is_empty() => {
                if let Some(last) = steps.last_mut() {
                    last.1 = true;
                }
            }
            Some(body) => steps.push((body.trim().to_string(), true)),
            None => steps.push((line.to_string(), false)),
        }
    }

    let objects = templates.object_table(domain, problem)?;
    let mut plan = Vec::new();
    let mut wrong_marked = Vec::new();
    for (i, (text, wrong)) in steps.iter().enumerate() {
        if *wrong {
            wrong_marked.push(i);
            continue;
        }
        match match_action(text, domain, templates, &objects) {
            Some(k) => plan.push(k),
            None => return Err(NlError::UnparseableStep { line: i, text: text.clone(), prefix: Plan::new(plan) }),
        }
    }
    Ok(ParsedResponse { plan: Plan::new(plan), raw_step_count: steps.len(), wrong_marked })
}
