//! Vocabulary renaming of a domain, its problems and plans.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::error::NlError;
use super::template::{TemplateFile, TemplateSet};
use crate::exec::Plan;
use crate::pddl::*;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RenameFile {
    #[serde(default)]
    actions: BTreeMap<String, String>,
    #[serde(default)]
    predicates: BTreeMap<String, String>,
    #[serde(default)]
    types: BTreeMap<String, String>,
    #[serde(default)]
    objects: ObjectsFile,
}

#[derive(Clone, Debug, Default, Deserialize)]
struct ObjectsFile {
    #[serde(default)]
    pattern: Option<String>,
    #[serde(flatten)]
    table: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    domain_name: String,
    rename: RenameFile,
    templates: TemplateFile,
}

/// Rename tables plus the templates of the renamed domain.
#[derive(Clone, Debug)]
pub struct ObfuscationMap {
    pub domain_name: Option<String>,
    pub actions: BTreeMap<String, String>,
    pub predicates: BTreeMap<String, String>,
    pub types: BTreeMap<String, String>,
    pub objects: BTreeMap<String, String>,
    /// `{index}` pattern for problem objects missing from `objects`, numbered in name order.
    pub object_pattern: Option<String>,
    /// Unlisted symbols keep their names (identity map).
    pub keep_unlisted: bool,
    templates: TemplateFile,
}

/// Symbol maps for one renamed problem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    pub actions: BTreeMap<String, String>,
    pub objects: BTreeMap<String, String>,
}

impl Renaming {
    pub fn key(&self, key: &ActionKey) -> ActionKey {
        ActionKey {
            schema: self.actions.get(&key.schema).cloned().unwrap_or_else(|| key.schema.clone()),
            args: key.args.iter().map(|a| self.objects.get(a).cloned().unwrap_or_else(|| a.clone())).collect(),
        }
    }

    pub fn plan(&self, plan: &Plan) -> Plan {
        plan.iter().map(|k| self.key(k)).collect()
    }
}

pub struct Obfuscated {
    pub domain: Domain,
    pub problem: Problem,
    pub templates: TemplateSet,
    pub renaming: Renaming,
}

fn bad(msg: impl Into<String>) -> NlError {
    NlError::BadObfuscation(msg.into())
}

impl ObfuscationMap {
    pub fn load(text: &str) -> Result<ObfuscationMap, NlError> {
        let f: MapFile = toml::from_str(text).map_err(|e| NlError::Toml(e.to_string()))?;
        Ok(ObfuscationMap {
            domain_name: Some(f.domain_name),
            actions: f.rename.actions,
            predicates: f.rename.predicates,
            types: f.rename.types,
            objects: f.rename.objects.table,
            object_pattern: f.rename.objects.pattern,
            keep_unlisted: false,
            templates: f.templates,
        })
    }

    /// Renames nothing; `templates` is the TOML template text of the unrenamed domain.
    pub fn identity(templates: &str) -> Result<ObfuscationMap, NlError> {
        Ok(ObfuscationMap {
            domain_name: None,
            actions: BTreeMap::new(),
            predicates: BTreeMap::new(),
            types: BTreeMap::new(),
            objects: BTreeMap::new(),
            object_pattern: None,
            keep_unlisted: true,
            templates: toml::from_str(templates).map_err(|e| NlError::Toml(e.to_string()))?,
        })
    }

    /// Completes `table` over `symbols` and checks it is a bijection onto fresh names.
    fn table(&self, kind: &str, table: &BTreeMap<String, String>, symbols: &[&str]) -> Result<BTreeMap<String, String>, NlError> {
        let wanted: BTreeSet<&str> = symbols.iter().copied().collect();
        if let Some(extra) = table.keys().find(|k| !wanted.contains(k.as_str())) {
            return Err(bad(format!("{kind} `{extra}` is not in the domain")));
        }
        let mut out = BTreeMap::new();
        for s in &wanted {
            let target = match table.get(*s) {
                Some(t) => t.clone(),
                None if self.keep_unlisted => s.to_string(),
                None => return Err(bad(format!("{kind} `{s}` has no renaming"))),
            };
            check_symbol(&target)?;
            out.insert(s.to_string(), target);
        }
        injective(kind, &out)?;
        Ok(out)
    }

    fn type_table(&self, domain: &Domain) -> Result<BTreeMap<String, String>, NlError> {
        let names: Vec<&str> = domain.types.declared.iter().map(|t| t.name.as_str()).collect();
        let mut out = self.table("type", &self.types, &names)?;
        if out.values().any(|v| v == ROOT_TYPE) {
            return Err(bad(format!("a type cannot be renamed to `{ROOT_TYPE}`")));
        }
        out.insert(ROOT_TYPE.to_string(), ROOT_TYPE.to_string());
        Ok(out)
    }

    /// Object renaming over constants plus `objects`.
    fn object_table(&self, domain: &Domain, objects: &[TypedName]) -> Result<BTreeMap<String, String>, NlError> {
        let mut out = BTreeMap::new();
        let mut leftover = Vec::new();
        for o in domain.constants.iter().chain(objects) {
            match self.objects.get(&o.name) {
                Some(t) => {
                    out.insert(o.name.clone(), t.clone());
                }
                None if self.keep_unlisted => {
                    out.insert(o.name.clone(), o.name.clone());
                }
                None if self.object_pattern.is_some() && objects.iter().any(|x| x.name == o.name) => leftover.push(o.name.clone()),
                None => return Err(bad(format!("object `{}` has no renaming", o.name))),
            }
        }
        leftover.sort();
        if let Some(pattern) = &self.object_pattern {
            for (i, name) in leftover.into_iter().enumerate() {
                out.insert(name, pattern.replace("{index}", &(i + 1).to_string()));
            }
        }
        for v in out.values() {
            check_symbol(v)?;
        }
        injective("object", &out)?;
        Ok(out)
    }
}

fn check_symbol(s: &str) -> Result<(), NlError> {
    let ok = !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(bad(format!("`{s}` is not a usable symbol")))
    }
}

fn injective(kind: &str, map: &BTreeMap<String, String>) -> Result<(), NlError> {
    let mut seen = BTreeMap::new();
    for (k, v) in map {
        if let Some(prev) = seen.insert(v, k) {
            return Err(bad(format!("{kind}s `{prev}` and `{k}` both map to `{v}`")));
        }
    }
    Ok(())
}

fn rename_atom_schema(a: &AtomSchema, preds: &BTreeMap<String, String>, consts: &BTreeMap<String, String>) -> AtomSchema {
    AtomSchema {
        predicate: preds.get(&a.predicate).cloned().unwrap_or_else(|| a.predicate.clone()),
        args: a
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Var(v.clone()),
                Term::Const(c) => Term::Const(consts[c].clone()),
            })
            .collect(),
    }
}

fn rename_atom(a: &Atom, preds: &BTreeMap<String, String>, objs: &BTreeMap<String, String>) -> Atom {
    Atom { predicate: preds.get(&a.predicate).cloned().unwrap_or_else(|| a.predicate.clone()), args: a.args.iter().map(|x| objs[x].clone()).collect() }
}

fn rename_typed(list: &[TypedName], names: impl Fn(&str) -> String, types: &BTreeMap<String, String>) -> Vec<TypedName> {
    list.iter().map(|t| TypedName::new(names(&t.name), types[&t.ty].clone())).collect()
}

/// Renames a domain's name, types, constants, predicates and action schemas.
pub fn obfuscate_domain(domain: &Domain, map: &ObfuscationMap) -> Result<Domain, NlError> {
    let types = map.type_table(domain)?;
    let preds: Vec<&str> = domain.predicates.iter().map(|p| p.name.as_str()).collect();
    let preds = map.table("predicate", &map.predicates, &preds)?;
    let schemas: Vec<&str> = domain.schemas.iter().map(|s| s.name.as_str()).collect();
    let actions = map.table("action", &map.actions, &schemas)?;
    let consts = map.object_table(domain, &[])?;
    Ok(Domain {
        name: map.domain_name.clone().unwrap_or_else(|| domain.name.clone()),
        requirements: domain.requirements.clone(),
        types: TypeHierarchy { declared: rename_typed(&domain.types.declared, |n| types[n].clone(), &types) },
        constants: rename_typed(&domain.constants, |n| consts[n].clone(), &types),
        predicates: domain
            .predicates
            .iter()
            .map(|p| Predicate { name: preds[&p.name].clone(), params: rename_typed(&p.params, str::to_string, &types) })
            .collect(),
        schemas: domain
            .schemas
            .iter()
            .map(|s| ActionSchema {
                name: actions[&s.name].clone(),
                params: rename_typed(&s.params, str::to_string, &types),
                precond: s.precond.iter().map(|l| LiteralSchema { atom: rename_atom_schema(&l.atom, &preds, &consts), positive: l.positive }).collect(),
                add: s.add.iter().map(|a| rename_atom_schema(a, &preds, &consts)).collect(),
                del: s.del.iter().map(|a| rename_atom_schema(a, &preds, &consts)).collect(),
            })
            .collect(),
    })
}

/// Renames a problem of the unrenamed `domain`.
pub fn obfuscate_problem(domain: &Domain, problem: &Problem, map: &ObfuscationMap) -> Result<(Problem, Renaming), NlError> {
    let types = map.type_table(domain)?;
    let preds: Vec<&str> = domain.predicates.iter().map(|p| p.name.as_str()).collect();
    let preds = map.table("predicate", &map.predicates, &preds)?;
    let schemas: Vec<&str> = domain.schemas.iter().map(|s| s.name.as_str()).collect();
    let actions = map.table("action", &map.actions, &schemas)?;
    let objs = map.object_table(domain, &problem.objects)?;
    let out = Problem {
        name: problem.name.clone(),
        domain_name: map.domain_name.clone().unwrap_or_else(|| problem.domain_name.clone()),
        objects: rename_typed(&problem.objects, |n| objs[n].clone(), &types),
        init: problem.init.iter().map(|a| rename_atom(a, &preds, &objs)).collect(),
        goal: problem.goal.iter().map(|l| Literal { atom: rename_atom(&l.atom, &preds, &objs), positive: l.positive }).collect(),
    };
    Ok((out, Renaming { actions, objects: objs }))
}

/// Renamed domain and problem with templates bound to the renamed domain.
pub fn obfuscate(domain: &Domain, problem: &Problem, map: &ObfuscationMap) -> Result<Obfuscated, NlError> {
    let new_domain = obfuscate_domain(domain, map)?;
    let (new_problem, renaming) = obfuscate_problem(domain, problem, map)?;
    let templates = map.templates_for(&new_domain)?;
    Ok(Obfuscated { domain: new_domain, problem: new_problem, templates, renaming })
}

impl ObfuscationMap {
    /// The replacement templates, bound to the renamed domain.
    pub fn templates_for(&self, renamed: &Domain) -> Result<TemplateSet, NlError> {
        TemplateSet::compile(self.templates.clone(), renamed)
    }
}
