//! Grounding of action schemas over a problem's object universe.

use std::collections::HashMap;

use super::error::PddlError;
use super::model::*;

/// Builds the ground action for `schema(args)`, checking arity and argument types.
pub fn instantiate(domain: &Domain, problem: &Problem, key: &ActionKey) -> Result<GroundAction, PddlError> {
    let schema = domain.schema(&key.schema).ok_or_else(|| PddlError::Undeclared { kind: "action", name: key.schema.clone() })?;
    if schema.params.len() != key.args.len() {
        return Err(PddlError::Arity { name: key.schema.clone(), expected: schema.params.len(), found: key.args.len() });
    }
    for (arg, p) in key.args.iter().zip(&schema.params) {
        let ty = problem.object_type(domain, arg).ok_or_else(|| PddlError::Undeclared { kind: "object", name: arg.clone() })?;
        if !domain.types.is_subtype(ty, &p.ty) {
            return Err(PddlError::TypeMismatch { context: key.to_string(), arg: arg.clone(), expected: p.ty.clone() });
        }
    }
    Ok(bind(schema, &key.args))
}

/// Instantiates a schema with arguments already known to be type-correct.
fn bind(schema: &ActionSchema, args: &[String]) -> GroundAction {
    let binding: HashMap<&str, &str> = schema.params.iter().map(|p| p.name.as_str()).zip(args.iter().map(String::as_str)).collect();
    let precond = dedup(schema.precond.iter().map(|l| Literal { atom: l.atom.ground(&binding), positive: l.positive }));
    let add = dedup(schema.add.iter().map(|a| a.ground(&binding)));
    let del = dedup(schema.del.iter().map(|a| a.ground(&binding)));
    GroundAction { schema: schema.name.clone(), args: args.to_vec(), precond, add, del }
}

fn dedup<T: PartialEq>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// All type-consistent bindings that satisfy the schema's equality constraints,
/// ordered by (schema name, argument tuple).
pub fn ground_actions(domain: &Domain, problem: &Problem) -> Vec<GroundAction> {
    ground_filtered(domain, problem, |_, _| true)
}

/// Like [`ground_actions`], but `keep(literal, ground)` may prune a partial binding as soon
/// as every variable of a precondition literal is bound.
pub(crate) fn ground_filtered<F>(domain: &Domain, problem: &Problem, keep: F) -> Vec<GroundAction>
where
    F: Fn(&LiteralSchema, &Literal) -> bool,
{
    let universe = problem.universe(domain);
    let by_type = objects_by_type(domain, &universe);
    let mut schemas: Vec<&ActionSchema> = domain.schemas.iter().collect();
    schemas.sort_by(|a, b| a.name.cmp(&b.name));

    let mut out = Vec::new();
    for schema in schemas {
        let candidates: Vec<&[&str]> = schema.params.iter().map(|p| by_type.get(p.ty.as_str()).map(Vec::as_slice).unwrap_or(&[])).collect();
        // Each precondition is checked at the depth where its last variable gets bound.
        let mut checks: Vec<Vec<&LiteralSchema>> = vec![Vec::new(); schema.params.len() + 1];
        for lit in &schema.precond {
            let depth = lit
                .atom
                .args
                .iter()
                .filter_map(|t| match t {
                    Term::Var(v) => schema.param_index(v).map(|i| i + 1),
                    Term::Const(_) => None,
                })
                .max()
                .unwrap_or(0);
            checks[depth].push(lit);
        }
        let mut args: Vec<&str> = Vec::with_capacity(schema.params.len());
        enumerate(schema, &candidates, &checks, &keep, &mut args, &mut out);
    }
    out
}

fn literal_under(schema: &ActionSchema, lit: &LiteralSchema, args: &[&str]) -> Literal {
    let atom = Atom {
        predicate: lit.atom.predicate.clone(),
        args: lit
            .atom
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => args[schema.param_index(v).unwrap()].to_string(),
                Term::Const(c) => c.clone(),
            })
            .collect(),
    };
    Literal { atom, positive: lit.positive }
}

fn passes<F>(schema: &ActionSchema, lits: &[&LiteralSchema], args: &[&str], keep: &F) -> bool
where
    F: Fn(&LiteralSchema, &Literal) -> bool,
{
    lits.iter().all(|l| {
        let g = literal_under(schema, l, args);
        if g.atom.is_equality() {
            (g.atom.args[0] == g.atom.args[1]) == g.positive
        } else {
            keep(l, &g)
        }
    })
}

fn enumerate<'a, F>(
    schema: &ActionSchema,
    candidates: &[&[&'a str]],
    checks: &[Vec<&LiteralSchema>],
    keep: &F,
    args: &mut Vec<&'a str>,
    out: &mut Vec<GroundAction>,
) where
    F: Fn(&LiteralSchema, &Literal) -> bool,
{
    let depth = args.len();
    if !passes(schema, &checks[depth], args, keep) {
        return;
    }
    if depth == schema.params.len() {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        out.push(bind(schema, &owned));
        return;
    }
    for &obj in candidates[depth] {
        args.push(obj);
        enumerate(schema, candidates, checks, keep, args, out);
        args.pop();
    }
}
