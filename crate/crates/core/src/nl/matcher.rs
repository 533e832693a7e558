//! Template inversion: reads an action phrase or fact sentence back into symbols.

use super::template::{ObjectPhrase, ObjectTable, Pattern, Piece, TemplateSet};
use super::{normalize, normalize_piece};
use crate::pddl::{ActionKey, Atom, Domain, TypedName};

/// Tries to read `text` against `pattern`; returns the bound object names in parameter order.
fn match_pattern(pattern: &Pattern, params: &[TypedName], text: &str, domain: &Domain, objects: &ObjectTable) -> Option<Vec<String>> {
    let candidates: Vec<Vec<(String, &ObjectPhrase)>> =
        params.iter().map(|p| objects.of_type(domain, &p.ty).into_iter().map(|o| (normalize(&o.phrase), o)).collect()).collect();
    let mut bound: Vec<Option<&str>> = vec![None; params.len()];
    if step(&pattern.pieces, text, &candidates, &mut bound) {
        bound.into_iter().map(|b| b.map(str::to_string)).collect()
    } else {
        None
    }
}

fn step<'a>(pieces: &[Piece], text: &str, candidates: &'a [Vec<(String, &'a ObjectPhrase)>], bound: &mut Vec<Option<&'a str>>) -> bool {
    let Some((first, rest)) = pieces.split_first() else {
        return text.is_empty();
    };
    match first {
        Piece::Lit(lit) => {
            let lit = normalize_piece(lit);
            match text.strip_prefix(lit.as_str()) {
                Some(tail) => step(rest, tail, candidates, bound),
                None => false,
            }
        }
        Piece::Slot { param, generic } => {
            for (norm, obj) in &candidates[*param] {
                if bound[*param].is_some_and(|b| b != obj.name) {
                    continue;
                }
                let mut tail = text;
                if generic.is_some() {
                    match tail.strip_prefix(normalize_piece(&obj.article).as_str()) {
                        Some(t) => tail = t,
                        None => continue,
                    }
                }
                let Some(tail) = tail.strip_prefix(norm.as_str()) else { continue };
                let prev = bound[*param];
                bound[*param] = Some(&obj.name);
                if step(rest, tail, candidates, bound) {
                    return true;
                }
                bound[*param] = prev;
            }
            false
        }
    }
}

/// Reads one action sentence. Schemas are tried in name order, canonical phrase before variants.
pub fn match_action(text: &str, domain: &Domain, templates: &TemplateSet, objects: &ObjectTable) -> Option<ActionKey> {
    let text = normalize(text);
    for (name, tpl) in &templates.actions {
        let schema = domain.schema(name)?;
        for pattern in std::iter::once(&tpl.phrase).chain(&tpl.variants) {
            if let Some(args) = match_pattern(pattern, &schema.params, &text, domain, objects) {
                return Some(ActionKey { schema: name.clone(), args });
            }
        }
    }
    None
}

/// Reads one positive fact sentence.
pub fn match_atom(text: &str, domain: &Domain, templates: &TemplateSet, objects: &ObjectTable) -> Option<Atom> {
    let text = normalize(text);
    for (name, pattern) in &templates.predicates {
        let pred = domain.predicate(name)?;
        if let Some(args) = match_pattern(pattern, &pred.params, &text, domain, objects) {
            return Some(Atom { predicate: name.clone(), args });
        }
    }
    None
}
