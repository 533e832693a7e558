//! Typed-STRIPS front end: domains and problems.

use std::collections::HashSet;

use super::error::PddlError;
use super::model::*;
use super::sexpr::{read_one, Pos, SExpr};

const SUPPORTED_REQUIREMENTS: &[&str] = &[":strips", ":typing", ":negative-preconditions", ":equality"];

/// Formula heads outside the typed-STRIPS subset.
const UNSUPPORTED_HEADS: &[&str] = &[
    "or",
    "imply",
    "forall",
    "exists",
    "when",
    "increase",
    "decrease",
    "assign",
    "scale-up",
    "scale-down",
    "<",
    ">",
    "<=",
    ">=",
    "+",
    "-",
    "*",
    "/",
    "at",
    "over",
    "preference",
];

pub fn parse_domain(text: &str) -> Result<Domain, PddlError> {
    let root = read_one(text)?;
    let items = expect_define(&root)?;
    let header = expect_list(&items[1])?;
    if header.len() != 2 || header[0].as_symbol() != Some("domain") {
        return Err(PddlError::syntax(items[1].pos(), "expected `(domain <name>)`"));
    }
    let name = expect_symbol(&header[1])?.to_string();

    let mut domain =
        Domain { name, requirements: Vec::new(), types: TypeHierarchy::default(), constants: Vec::new(), predicates: Vec::new(), schemas: Vec::new() };
    let mut raw_actions = Vec::new();

    for section in &items[2..] {
        let list = expect_list(section)?;
        let head = list.first().and_then(SExpr::as_symbol).ok_or_else(|| PddlError::syntax(section.pos(), "empty section"))?;
        match head {
            ":requirements" => {
                for r in &list[1..] {
                    let req = expect_symbol(r)?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req) {
                        return Err(PddlError::unsupported(r.pos(), req));
                    }
                    domain.requirements.push(req.to_string());
                }
            }
            ":types" => {
                for tn in parse_typed_list(&list[1..])? {
                    if tn.name == ROOT_TYPE {
                        continue;
                    }
                    if domain.types.declared.iter().any(|t| t.name == tn.name) {
                        return Err(PddlError::Duplicate { kind: "type", name: tn.name });
                    }
                    domain.types.declared.push(tn);
                }
                // A supertype named only after `-` is declared implicitly under the root.
                let mut i = 0;
                while i < domain.types.declared.len() {
                    let parent = domain.types.declared[i].ty.clone();
                    if !domain.types.contains(&parent) {
                        domain.types.declared.push(TypedName::new(parent, ROOT_TYPE));
                    }
                    i += 1;
                }
            }
            ":constants" => domain.constants = parse_typed_list(&list[1..])?,
            ":predicates" => {
                for p in &list[1..] {
                    let plist = expect_list(p)?;
                    let pname = plist.first().map(expect_symbol).transpose()?.ok_or_else(|| PddlError::syntax(p.pos(), "empty predicate"))?;
                    if pname == EQUALITY {
                        return Err(PddlError::syntax(p.pos(), "`=` cannot be declared as a predicate"));
                    }
                    let params = parse_typed_list(&plist[1..])?;
                    if domain.predicates.iter().any(|q| q.name == pname) {
                        return Err(PddlError::Duplicate { kind: "predicate", name: pname.to_string() });
                    }
                    domain.predicates.push(Predicate { name: pname.to_string(), params });
                }
            }
            ":action" => raw_actions.push(section),
            ":functions" => return Err(PddlError::unsupported(section.pos(), "numeric fluents (:functions)")),
            ":derived" => return Err(PddlError::unsupported(section.pos(), "derived predicates (:derived)")),
            ":durative-action" => return Err(PddlError::unsupported(section.pos(), "durative actions")),
            ":axiom" => return Err(PddlError::unsupported(section.pos(), "axioms")),
            other => return Err(PddlError::syntax(section.pos(), format!("unknown domain section `{other}`"))),
        }
    }

    validate_types(&domain)?;
    for c in &domain.constants {
        check_type_declared(&domain, &c.ty)?;
    }
    for p in &domain.predicates {
        for param in &p.params {
            check_type_declared(&domain, &param.ty)?;
        }
    }
    for a in raw_actions {
        let schema = parse_action(&domain, a)?;
        if domain.schemas.iter().any(|s| s.name == schema.name) {
            return Err(PddlError::Duplicate { kind: "action", name: schema.name });
        }
        domain.schemas.push(schema);
    }
    Ok(domain)
}

pub fn parse_problem(text: &str, domain: &Domain) -> Result<Problem, PddlError> {
    let root = read_one(text)?;
    let items = expect_define(&root)?;
    let header = expect_list(&items[1])?;
    if header.len() != 2 || header[0].as_symbol() != Some("problem") {
        return Err(PddlError::syntax(items[1].pos(), "expected `(problem <name>)`"));
    }
    let mut problem =
        Problem { name: expect_symbol(&header[1])?.to_string(), domain_name: String::new(), objects: Vec::new(), init: Vec::new(), goal: Vec::new() };
    let mut init_raw = None;
    let mut goal_raw = None;
    for section in &items[2..] {
        let list = expect_list(section)?;
        let head = list.first().and_then(SExpr::as_symbol).ok_or_else(|| PddlError::syntax(section.pos(), "empty section"))?;
        match head {
            ":domain" => {
                let d = list.get(1).ok_or_else(|| PddlError::syntax(section.pos(), "missing domain name"))?;
                problem.domain_name = expect_symbol(d)?.to_string();
            }
            ":requirements" => {
                for r in &list[1..] {
                    let req = expect_symbol(r)?;
                    if !SUPPORTED_REQUIREMENTS.contains(&req) {
                        return Err(PddlError::unsupported(r.pos(), req));
                    }
                }
            }
            ":objects" => problem.objects = parse_typed_list(&list[1..])?,
            ":init" => init_raw = Some(&list[1..]),
            ":goal" => goal_raw = Some(section),
            ":metric" => return Err(PddlError::unsupported(section.pos(), "plan metrics (:metric)")),
            other => return Err(PddlError::syntax(section.pos(), format!("unknown problem section `{other}`"))),
        }
    }
    if problem.domain_name != domain.name {
        return Err(PddlError::DomainMismatch { expected: domain.name.clone(), found: problem.domain_name });
    }
    let mut seen = HashSet::new();
    for o in &problem.objects {
        check_type_declared(domain, &o.ty)?;
        if !seen.insert(o.name.as_str()) || domain.constant_type(&o.name).is_some() {
            return Err(PddlError::Duplicate { kind: "object", name: o.name.clone() });
        }
    }

    let mut init_seen = HashSet::new();
    for expr in init_raw.unwrap_or(&[]) {
        if expr.head() == Some("=") {
            return Err(PddlError::unsupported(expr.pos(), "numeric fluents (function assignment)"));
        }
        let lit = parse_ground_literal(domain, &problem, expr, "init")?;
        if !lit.positive {
            return Err(PddlError::syntax(expr.pos(), "negative literals are not allowed in :init"));
        }
        if init_seen.insert(lit.atom.clone()) {
            problem.init.push(lit.atom);
        }
    }

    let goal_expr = goal_raw.ok_or_else(|| PddlError::syntax(root.pos(), "missing :goal"))?;
    let goal_list = expect_list(goal_expr)?;
    let mut goal_seen = HashSet::new();
    if let Some(g) = goal_list.get(1) {
        let mut flat = Vec::new();
        flatten_and(g, &mut flat)?;
        for e in flat {
            let lit = parse_ground_literal(domain, &problem, e, "goal")?;
            if goal_seen.insert(lit.clone()) {
                problem.goal.push(lit);
            }
        }
    }
    Ok(problem)
}

fn expect_define(root: &SExpr) -> Result<&[SExpr], PddlError> {
    let items = expect_list(root)?;
    if items.len() < 2 || items[0].as_symbol() != Some("define") {
        return Err(PddlError::syntax(root.pos(), "expected `(define ...)`"));
    }
    Ok(items)
}

fn expect_list(e: &SExpr) -> Result<&[SExpr], PddlError> {
    e.as_list().ok_or_else(|| PddlError::syntax(e.pos(), "expected a list"))
}

fn expect_symbol(e: &SExpr) -> Result<&str, PddlError> {
    e.as_symbol().ok_or_else(|| PddlError::syntax(e.pos(), "expected a symbol"))
}

/// `a b - t c` style lists; untyped trailing names get `object`.
fn parse_typed_list(items: &[SExpr]) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            SExpr::Symbol { text, .. } if text == "-" => {
                let ty = items.get(i + 1).ok_or_else(|| PddlError::syntax(item.pos(), "missing type after `-`"))?;
                if ty.head() == Some("either") {
                    return Err(PddlError::unsupported(ty.pos(), "either types"));
                }
                let ty = expect_symbol(ty)?;
                if pending.is_empty() {
                    return Err(PddlError::syntax(item.pos(), "type annotation without names"));
                }
                out.extend(pending.drain(..).map(|n| TypedName::new(n, ty)));
                i += 2;
            }
            SExpr::Symbol { text, .. } => {
                pending.push(text.trim_start_matches('?').to_string());
                i += 1;
            }
            SExpr::List { pos, .. } => return Err(PddlError::syntax(*pos, "unexpected list in typed list")),
        }
    }
    out.extend(pending.into_iter().map(|n| TypedName::new(n, ROOT_TYPE)));
    Ok(out)
}

fn validate_types(domain: &Domain) -> Result<(), PddlError> {
    for t in &domain.types.declared {
        check_type_declared(domain, &t.ty)?;
        // Reject cycles: walking to the root must terminate.
        let mut cur = t.name.as_str();
        let mut steps = 0;
        while cur != ROOT_TYPE {
            cur = domain.types.parent(cur).unwrap_or(ROOT_TYPE);
            steps += 1;
            if steps > domain.types.declared.len() + 1 {
                return Err(PddlError::syntax(Pos::default(), format!("cyclic type hierarchy at `{}`", t.name)));
            }
        }
    }
    Ok(())
}

fn check_type_declared(domain: &Domain, ty: &str) -> Result<(), PddlError> {
    if domain.types.contains(ty) {
        Ok(())
    } else {
        Err(PddlError::Undeclared { kind: "type", name: ty.to_string() })
    }
}

fn flatten_and<'a>(e: &'a SExpr, out: &mut Vec<&'a SExpr>) -> Result<(), PddlError> {
    match e.head() {
        Some("and") => {
            for item in &e.as_list().unwrap()[1..] {
                flatten_and(item, out)?;
            }
            Ok(())
        }
        _ => {
            if let Some(list) = e.as_list() {
                if list.is_empty() {
                    return Ok(());
                }
            }
            out.push(e);
            Ok(())
        }
    }
}

/// Rejects out-of-subset formula heads; a declared predicate of the same name (e.g. `at`) wins.
fn check_head(domain: &Domain, e: &SExpr) -> Result<(), PddlError> {
    if let Some(h) = e.head() {
        if UNSUPPORTED_HEADS.contains(&h) && domain.predicate(h).is_none() {
            return Err(PddlError::unsupported(e.pos(), h));
        }
    }
    Ok(())
}

fn parse_action(domain: &Domain, section: &SExpr) -> Result<ActionSchema, PddlError> {
    let list = section.as_list().unwrap();
    let name = list.get(1).map(expect_symbol).transpose()?.ok_or_else(|| PddlError::syntax(section.pos(), "missing action name"))?;
    let mut schema = ActionSchema { name: name.to_string(), params: Vec::new(), precond: Vec::new(), add: Vec::new(), del: Vec::new() };
    let mut i = 2;
    while i < list.len() {
        let key = expect_symbol(&list[i])?;
        let value = list.get(i + 1).ok_or_else(|| PddlError::syntax(list[i].pos(), format!("missing value for {key}")))?;
        match key {
            ":parameters" => {
                schema.params = parse_typed_list(expect_list(value)?)?;
                let mut seen = HashSet::new();
                for p in &schema.params {
                    check_type_declared(domain, &p.ty)?;
                    if !seen.insert(p.name.clone()) {
                        return Err(PddlError::Duplicate { kind: "parameter", name: p.name.clone() });
                    }
                }
            }
            ":precondition" => {
                let mut flat = Vec::new();
                flatten_and(value, &mut flat)?;
                for e in flat {
                    schema.precond.push(parse_literal_schema(domain, &schema, e)?);
                }
            }
            ":effect" => {
                let mut flat = Vec::new();
                flatten_and(value, &mut flat)?;
                for e in flat {
                    let lit = parse_literal_schema(domain, &schema, e)?;
                    if lit.atom.predicate == EQUALITY {
                        return Err(PddlError::syntax(e.pos(), "equality cannot appear in effects"));
                    }
                    let target = if lit.positive { &mut schema.add } else { &mut schema.del };
                    if !target.contains(&lit.atom) {
                        target.push(lit.atom);
                    }
                }
            }
            other => return Err(PddlError::syntax(list[i].pos(), format!("unknown action key `{other}`"))),
        }
        i += 2;
    }
    Ok(schema)
}

fn parse_literal_schema(domain: &Domain, schema: &ActionSchema, e: &SExpr) -> Result<LiteralSchema, PddlError> {
    check_head(domain, e)?;
    let (positive, atom_expr) = match e.head() {
        Some("not") => {
            let inner = e.as_list().unwrap();
            if inner.len() != 2 {
                return Err(PddlError::syntax(e.pos(), "`not` takes exactly one argument"));
            }
            check_head(domain, &inner[1])?;
            if matches!(inner[1].head(), Some("and") | Some("not")) {
                return Err(PddlError::unsupported(inner[1].pos(), "negated compound formula"));
            }
            (false, &inner[1])
        }
        _ => (true, e),
    };
    let items = expect_list(atom_expr)?;
    let pred = items.first().map(expect_symbol).transpose()?.ok_or_else(|| PddlError::syntax(atom_expr.pos(), "empty atom"))?;
    let mut args = Vec::new();
    for a in &items[1..] {
        let sym = expect_symbol(a)?;
        if let Some(var) = sym.strip_prefix('?') {
            if schema.param_index(var).is_none() {
                return Err(PddlError::UnboundVariable { name: var.to_string(), context: schema.name.clone() });
            }
            args.push(Term::Var(var.to_string()));
        } else if domain.constant_type(sym).is_some() {
            args.push(Term::Const(sym.to_string()));
        } else {
            return Err(PddlError::Undeclared { kind: "constant", name: sym.to_string() });
        }
    }
    if pred == EQUALITY {
        if args.len() != 2 {
            return Err(PddlError::Arity { name: EQUALITY.into(), expected: 2, found: args.len() });
        }
    } else {
        let decl = domain.predicate(pred).ok_or_else(|| PddlError::Undeclared { kind: "predicate", name: pred.to_string() })?;
        if decl.params.len() != args.len() {
            return Err(PddlError::Arity { name: pred.to_string(), expected: decl.params.len(), found: args.len() });
        }
        for (t, p) in args.iter().zip(&decl.params) {
            let ty = match t {
                Term::Var(v) => schema.params[schema.param_index(v).unwrap()].ty.as_str(),
                Term::Const(c) => domain.constant_type(c).unwrap(),
            };
            if !domain.types.is_subtype(ty, &p.ty) {
                return Err(PddlError::TypeMismatch { context: format!("{} in {}", pred, schema.name), arg: t.to_string(), expected: p.ty.clone() });
            }
        }
    }
    Ok(LiteralSchema { atom: AtomSchema { predicate: pred.to_string(), args }, positive })
}

fn parse_ground_literal(domain: &Domain, problem: &Problem, e: &SExpr, context: &str) -> Result<Literal, PddlError> {
    check_head(domain, e)?;
    let (positive, atom_expr) = match e.head() {
        Some("not") => {
            let inner = e.as_list().unwrap();
            if inner.len() != 2 {
                return Err(PddlError::syntax(e.pos(), "`not` takes exactly one argument"));
            }
            check_head(domain, &inner[1])?;
            (false, &inner[1])
        }
        _ => (true, e),
    };
    let items = expect_list(atom_expr)?;
    let pred = items.first().map(expect_symbol).transpose()?.ok_or_else(|| PddlError::syntax(atom_expr.pos(), "empty atom"))?;
    let decl = domain.predicate(pred).ok_or_else(|| PddlError::Undeclared { kind: "predicate", name: pred.to_string() })?;
    if decl.params.len() != items.len() - 1 {
        return Err(PddlError::Arity { name: pred.to_string(), expected: decl.params.len(), found: items.len() - 1 });
    }
    let mut args = Vec::new();
    for (a, p) in items[1..].iter().zip(&decl.params) {
        let sym = expect_symbol(a)?;
        let ty = problem.object_type(domain, sym).ok_or_else(|| PddlError::Undeclared { kind: "object", name: sym.to_string() })?;
        if !domain.types.is_subtype(ty, &p.ty) {
            return Err(PddlError::TypeMismatch { context: format!("{pred} in {context}"), arg: sym.to_string(), expected: p.ty.clone() });
        }
        args.push(sym.to_string());
    }
    Ok(Literal { atom: Atom { predicate: pred.to_string(), args }, positive })
}
