//! PDDL pretty-printing. Output re-parses to an equal model.

use std::fmt::{self, Write};

use super::model::*;

fn typed_list(names: &[TypedName]) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < names.len() {
        let ty = &names[i].ty;
        let mut j = i;
        while j < names.len() && names[j].ty == *ty {
            j += 1;
        }
        for n in &names[i..j] {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&n.name);
        }
        let _ = write!(out, " - {ty}");
        i = j;
    }
    out
}

fn param_list(params: &[TypedName]) -> String {
    let prefixed: Vec<TypedName> = params.iter().map(|p| TypedName::new(format!("?{}", p.name), p.ty.clone())).collect();
    typed_list(&prefixed)
}

fn conj<T: fmt::Display>(items: &[T]) -> String {
    match items.len() {
        0 => "()".to_string(),
        1 => items[0].to_string(),
        _ => format!("(and {})", items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")),
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.declared.is_empty() {
            writeln!(f, "  (:types {})", typed_list(&self.types.declared))?;
        }
        if !self.constants.is_empty() {
            writeln!(f, "  (:constants {})", typed_list(&self.constants))?;
        }
        writeln!(f, "  (:predicates")?;
        for p in &self.predicates {
            if p.params.is_empty() {
                writeln!(f, "    ({})", p.name)?;
            } else {
                writeln!(f, "    ({} {})", p.name, param_list(&p.params))?;
            }
        }
        writeln!(f, "  )")?;
        for a in &self.schemas {
            writeln!(f, "  (:action {}", a.name)?;
            writeln!(f, "    :parameters ({})", param_list(&a.params))?;
            writeln!(f, "    :precondition {}", conj(&a.precond))?;
            let effects: Vec<String> = a.add.iter().map(ToString::to_string).chain(a.del.iter().map(|d| format!("(not {d})"))).collect();
            writeln!(f, "    :effect {})", conj(&effects))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        writeln!(f, "  (:objects {})", typed_list(&self.objects))?;
        writeln!(f, "  (:init")?;
        for a in &self.init {
            writeln!(f, "    {a}")?;
        }
        writeln!(f, "  )")?;
        writeln!(f, "  (:goal (and")?;
        for g in &self.goal {
            writeln!(f, "    {g}")?;
        }
        writeln!(f, "  ))")?;
        write!(f, ")")
    }
}
