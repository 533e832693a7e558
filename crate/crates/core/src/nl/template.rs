//! Per-domain natural-language templates.
//!
//! A template string mixes literal text with slots. `{x}` is replaced by the phrase of the
//! object bound to parameter `x`. `{x:a block}` renders as `a block` in the generic action
//! description and as the object's article plus phrase (`the red block`) once grounded.

use std::collections::{BTreeMap, HashMap};

use serde::Deserialize;

use super::error::NlError;
use crate::pddl::{Atom, Domain, Problem, TypedName};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Piece {
    Lit(String),
    Slot { param: usize, generic: Option<String> },
}

/// A compiled template string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub(crate) pieces: Vec<Piece>,
}

impl Pattern {
    pub(crate) fn compile(src: &str, params: &[TypedName], context: &str) -> Result<Pattern, NlError> {
        let bad = |msg: String| NlError::BadTemplate { context: context.to_string(), msg };
        let mut pieces = Vec::new();
        let mut rest = src;
        while let Some(open) = rest.find('{') {
            if open > 0 {
                pieces.push(Piece::Lit(rest[..open].to_string()));
            }
            let close = rest[open..].find('}').ok_or_else(|| bad(format!("unclosed slot in `{src}`")))? + open;
            let body = &rest[open + 1..close];
            let (name, generic) = match body.split_once(':') {
                Some((n, g)) => (n.trim(), Some(g.to_string())),
                None => (body.trim(), None),
            };
            let param = params.iter().position(|p| p.name == name).ok_or_else(|| bad(format!("slot `{{{name}}}` is not a parameter")))?;
            pieces.push(Piece::Slot { param, generic });
            rest = &rest[close + 1..];
        }
        if rest.contains('}') {
            return Err(bad(format!("stray `}}` in `{src}`")));
        }
        if !rest.is_empty() {
            pieces.push(Piece::Lit(rest.to_string()));
        }
        // Adjacent slots cannot be told apart when reading text back.
        if pieces.windows(2).any(|w| matches!(w, [Piece::Slot { .. }, Piece::Slot { .. }])) {
            return Err(bad(format!("adjacent slots in `{src}`")));
        }
        Ok(Pattern { pieces })
    }

    pub(crate) fn literals(&self) -> impl Iterator<Item = &str> {
        self.pieces.iter().filter_map(|p| match p {
            Piece::Lit(s) => Some(s.as_str()),
            Piece::Slot { .. } => None,
        })
    }

    fn has_unmarked_slot(&self) -> bool {
        self.pieces.iter().any(|p| matches!(p, Piece::Slot { generic: None, .. }))
    }

    /// Fills slots with object phrases (grounded form).
    pub(crate) fn render_grounded(&self, args: &[&ObjectPhrase]) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Lit(s) => out.push_str(s),
                Piece::Slot { param, generic: None } => out.push_str(&args[*param].phrase),
                Piece::Slot { param, generic: Some(_) } => {
                    out.push_str(&args[*param].article);
                    out.push_str(&args[*param].phrase);
                }
            }
        }
        out
    }

    /// Fills slots with their generic text.
    pub(crate) fn render_generic(&self) -> String {
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Lit(s) => out.push_str(s),
                Piece::Slot { generic, .. } => out.push_str(generic.as_deref().unwrap_or_default()),
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionTemplate {
    pub description: String,
    pub phrase: Pattern,
    pub variants: Vec<Pattern>,
    pub precond: Vec<Pattern>,
    pub effect: Vec<Pattern>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRule {
    #[serde(default, rename = "type")]
    pub ty: Option<String>,
    #[serde(default)]
    pub prefix: Option<String>,
    pub render: String,
    #[serde(default)]
    pub article: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ActionFile {
    description: String,
    phrase: String,
    #[serde(default)]
    variants: Vec<String>,
    #[serde(default)]
    precond: Vec<String>,
    #[serde(default)]
    effect: Vec<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct PredicateFile {
    sentence: String,
}

/// On-disk template layout (TOML).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TemplateFile {
    context: String,
    #[serde(default)]
    negation: Option<String>,
    #[serde(default)]
    objects: Vec<ObjectRule>,
    #[serde(default)]
    actions: BTreeMap<String, ActionFile>,
    #[serde(default)]
    predicates: BTreeMap<String, PredicateFile>,
}

pub const DEFAULT_NEGATION: &str = "it is not the case that {sentence}";

/// Templates bound to one domain: every schema and predicate is covered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateSet {
    pub domain: String,
    pub context: String,
    /// `(before, after)` around a negated sentence.
    pub negation: (String, String),
    pub objects: Vec<ObjectRule>,
    pub actions: BTreeMap<String, ActionTemplate>,
    pub predicates: BTreeMap<String, Pattern>,
}

/// Rendering of one object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectPhrase {
    pub name: String,
    pub phrase: String,
    pub article: String,
}

impl TemplateSet {
    /// Parses TOML template text and binds it to `domain`.
    pub fn from_toml(text: &str, domain: &Domain) -> Result<TemplateSet, NlError> {
        let file: TemplateFile = toml::from_str(text).map_err(|e| NlError::Toml(e.to_string()))?;
        Self::compile(file, domain)
    }

    pub(crate) fn compile(file: TemplateFile, domain: &Domain) -> Result<TemplateSet, NlError> {
        for name in file.actions.keys() {
            if domain.schema(name).is_none() {
                return Err(NlError::BadTemplate { context: format!("action `{name}`"), msg: "not in the domain".into() });
            }
        }
        for name in file.predicates.keys() {
            if domain.predicate(name).is_none() {
                return Err(NlError::BadTemplate { context: format!("predicate `{name}`"), msg: "not in the domain".into() });
            }
        }
        let mut actions = BTreeMap::new();
        for schema in &domain.schemas {
            let f = file.actions.get(&schema.name).ok_or_else(|| NlError::MissingTemplate { kind: "action", name: schema.name.clone() })?;
            let ctx = format!("action `{}`", schema.name);
            let compile_all = |srcs: &[String]| -> Result<Vec<Pattern>, NlError> { srcs.iter().map(|s| Pattern::compile(s, &schema.params, &ctx)).collect() };
            let phrase = Pattern::compile(&f.phrase, &schema.params, &ctx)?;
            for i in 0..schema.params.len() {
                if !phrase.pieces.iter().any(|p| matches!(p, Piece::Slot { param, .. } if *param == i)) {
                    return Err(NlError::BadTemplate { context: ctx, msg: format!("phrase omits parameter `{}`", schema.params[i].name) });
                }
            }
            let precond = compile_all(&f.precond)?;
            let effect = compile_all(&f.effect)?;
            if precond.iter().chain(&effect).any(Pattern::has_unmarked_slot) {
                return Err(NlError::BadTemplate { context: ctx, msg: "restriction slots need a generic form `{x:...}`".into() });
            }
            actions.insert(
                schema.name.clone(),
                ActionTemplate { description: f.description.clone(), phrase, variants: compile_all(&f.variants)?, precond, effect },
            );
        }
        let mut predicates = BTreeMap::new();
        for pred in &domain.predicates {
            let f = file.predicates.get(&pred.name).ok_or_else(|| NlError::MissingTemplate { kind: "predicate", name: pred.name.clone() })?;
            let ctx = format!("predicate `{}`", pred.name);
            if f.sentence.contains(", ") {
                return Err(NlError::BadTemplate { context: ctx, msg: "sentences are listed with `, ` and cannot contain it".into() });
            }
            predicates.insert(pred.name.clone(), Pattern::compile(&f.sentence, &pred.params, &ctx)?);
        }
        let negation_src = file.negation.as_deref().unwrap_or(DEFAULT_NEGATION);
        let (before, after) = negation_src
            .split_once("{sentence}")
            .ok_or_else(|| NlError::BadTemplate { context: "negation".into(), msg: "needs a `{sentence}` slot".into() })?;
        Ok(TemplateSet {
            domain: domain.name.clone(),
            context: file.context,
            negation: (before.to_string(), after.to_string()),
            objects: file.objects,
            actions,
            predicates,
        })
    }

    pub fn action(&self, name: &str) -> Result<&ActionTemplate, NlError> {
        self.actions.get(name).ok_or_else(|| NlError::MissingTemplate { kind: "action", name: name.to_string() })
    }

    pub fn predicate(&self, name: &str) -> Result<&Pattern, NlError> {
        self.predicates.get(name).ok_or_else(|| NlError::MissingTemplate { kind: "predicate", name: name.to_string() })
    }

    /// Phrase and article of a single object under the first matching rule.
    pub fn object_phrase(&self, domain: &Domain, name: &str, ty: &str) -> ObjectPhrase {
        for rule in &self.objects {
            let type_ok = rule.ty.as_deref().is_none_or(|t| domain.types.is_subtype(ty, t));
            let prefix_ok = rule.prefix.as_deref().is_none_or(|p| name.starts_with(p));
            if type_ok && prefix_ok {
                let rest = rule.prefix.as_deref().map_or(name, |p| &name[p.len()..]);
                let phrase = rule.render.replace("{name}", name).replace("{rest}", rest);
                return ObjectPhrase { name: name.to_string(), phrase, article: rule.article.clone() };
            }
        }
        ObjectPhrase { name: name.to_string(), phrase: name.to_string(), article: String::new() }
    }

    /// Phrases for every object (constants included) of a problem; fails if two collide.
    pub fn object_table(&self, domain: &Domain, problem: &Problem) -> Result<ObjectTable, NlError> {
        let mut by_name = HashMap::new();
        let mut by_phrase: HashMap<String, String> = HashMap::new();
        let mut universe: Vec<&TypedName> = problem.universe(domain);
        universe.sort_by(|a, b| a.name.cmp(&b.name));
        for o in universe {
            let p = self.object_phrase(domain, &o.name, &o.ty);
            if p.phrase.contains(", ") || p.phrase.trim().is_empty() {
                return Err(NlError::BadTemplate { context: format!("object `{}`", o.name), msg: format!("unusable phrase `{}`", p.phrase) });
            }
            let key = super::normalize(&p.phrase);
            if let Some(prev) = by_phrase.insert(key, o.name.clone()) {
                return Err(NlError::AmbiguousObject { phrase: p.phrase, first: prev, second: o.name.clone() });
            }
            by_name.insert(o.name.clone(), (p, o.ty.clone()));
        }
        Ok(ObjectTable { by_name })
    }

    pub fn render_atom(&self, atom: &Atom, objects: &ObjectTable) -> Result<String, NlError> {
        let pattern = self.predicate(&atom.predicate)?;
        let args = objects.phrases(&atom.args)?;
        Ok(pattern.render_grounded(&args))
    }
}

/// Object phrases for one problem, keyed by object name.
#[derive(Clone, Debug)]
pub struct ObjectTable {
    by_name: HashMap<String, (ObjectPhrase, String)>,
}

impl ObjectTable {
    pub fn get(&self, name: &str) -> Option<&ObjectPhrase> {
        self.by_name.get(name).map(|(p, _)| p)
    }

    pub(crate) fn phrases<'a>(&'a self, names: &[String]) -> Result<Vec<&'a ObjectPhrase>, NlError> {
        names.iter().map(|n| self.get(n).ok_or_else(|| NlError::MissingTemplate { kind: "object", name: n.clone() })).collect()
    }

    /// Objects conforming to `ty`, sorted by name.
    pub(crate) fn of_type<'a>(&'a self, domain: &Domain, ty: &str) -> Vec<&'a ObjectPhrase> {
        let mut out: Vec<&ObjectPhrase> = self.by_name.values().filter(|(_, t)| domain.types.is_subtype(t, ty)).map(|(p, _)| p).collect();
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out
    }
}

/// Upper-cases the first character.
pub(crate) fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().collect::<String>() + c.as_str(),
        None => String::new(),
    }
}
