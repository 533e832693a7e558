//! In-memory typed-STRIPS model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of the implicit root type.
pub const ROOT_TYPE: &str = "object";
/// Reserved predicate name used for equality literals.
pub const EQUALITY: &str = "=";

/// A ground atom such as `(on a b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Atom { predicate: predicate.into(), args: args.into_iter().map(Into::into).collect() }
    }

    pub fn is_equality(&self) -> bool {
        self.predicate == EQUALITY
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A ground literal: an atom or its negation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// An atom over schema parameters and constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSchema {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl AtomSchema {
    pub fn ground(&self, binding: &HashMap<&str, &str>) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => binding[v.as_str()].to_string(),
                    Term::Const(c) => c.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for AtomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiteralSchema {
    pub atom: AtomSchema,
    pub positive: bool,
}

impl fmt::Display for LiteralSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "(not {})", self.atom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName { name: name.into(), ty: ty.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precond: Vec<LiteralSchema>,
    pub add: Vec<AtomSchema>,
    pub del: Vec<AtomSchema>,
}

impl ActionSchema {
    pub fn param_index(&self, var: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == var)
    }
}

/// Declared types in declaration order, each with its parent.
/// `object` is the implicit root and is never listed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeHierarchy {
    pub declared: Vec<TypedName>,
}

impl TypeHierarchy {
    pub fn contains(&self, ty: &str) -> bool {
        ty == ROOT_TYPE || self.declared.iter().any(|t| t.name == ty)
    }

    pub fn parent(&self, ty: &str) -> Option<&str> {
        self.declared.iter().find(|t| t.name == ty).map(|t| t.ty.as_str())
    }

    /// True when `sub` equals `sup` or descends from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sup == ROOT_TYPE {
            return true;
        }
        let mut cur = sub;
        // Bounded walk guards against cyclic declarations.
        for _ in 0..=self.declared.len() {
            if cur == sup {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: TypeHierarchy,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<Predicate>,
    pub schemas: Vec<ActionSchema>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.iter().find(|s| s.name == name)
    }

    pub fn constant_type(&self, name: &str) -> Option<&str> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.ty.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    /// Initial atoms in source order, duplicate-free.
    pub init: Vec<Atom>,
    /// Conjunctive goal in source order, duplicate-free.
    pub goal: Vec<Literal>,
}

impl Problem {
    pub fn init_state(&self) -> State {
        State::from_atoms(self.init.iter().cloned())
    }

    /// Canonical identity used for deduplication: sorted objects, init and goal.
    pub fn identity(&self) -> String {
        let mut objects: Vec<String> = self.objects.iter().map(|o| format!("{}-{}", o.name, o.ty)).collect();
        objects.sort();
        let init: BTreeSet<String> = self.init.iter().map(ToString::to_string).collect();
        let goal: BTreeSet<String> = self.goal.iter().map(ToString::to_string).collect();
        format!(
            "{}|{}|{}|{}",
            self.domain_name,
            objects.join(" "),
            init.into_iter().collect::<Vec<_>>().join(" "),
            goal.into_iter().collect::<Vec<_>>().join(" ")
        )
    }

    pub fn object_type<'a>(&'a self, domain: &'a Domain, name: &str) -> Option<&'a str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.ty.as_str()).or_else(|| domain.constant_type(name))
    }

    /// Constants followed by problem objects.
    pub fn universe<'a>(&'a self, domain: &'a Domain) -> Vec<&'a TypedName> {
        domain.constants.iter().chain(self.objects.iter()).collect()
    }
}

/// A fully instantiated action.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
    pub precond: Vec<Literal>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl GroundAction {
    /// Canonical `(schema, args)` tuple used for plan comparison.
    pub fn key(&self) -> ActionKey {
        ActionKey { schema: self.schema.clone(), args: self.args.clone() }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// Schema name plus arguments; identity of a ground action within a problem.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionKey {
    pub schema: String,
    pub args: Vec<String>,
}

impl ActionKey {
    pub fn new(schema: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        ActionKey { schema: schema.into().to_lowercase(), args: args.into_iter().map(|a| a.into().to_lowercase()).collect() }
    }
}

impl fmt::Display for ActionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.schema)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A set of ground atoms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    atoms: BTreeSet<Atom>,
}

impl State {
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        State { atoms: atoms.into_iter().collect() }
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Truth of a literal; equality literals are decided on their arguments.
    pub fn holds(&self, lit: &Literal) -> bool {
        let truth = if lit.atom.is_equality() { lit.atom.args.first() == lit.atom.args.get(1) } else { self.atoms.contains(&lit.atom) };
        truth == lit.positive
    }

    pub fn satisfies_all<'a>(&self, lits: impl IntoIterator<Item = &'a Literal>) -> bool {
        lits.into_iter().all(|l| self.holds(l))
    }

    /// `(state \ del) ∪ add`, leaving `self` untouched.
    pub fn apply(&self, action: &GroundAction) -> State {
        let mut atoms = self.atoms.clone();
        for d in &action.del {
            atoms.remove(d);
        }
        for a in &action.add {
            atoms.insert(a.clone());
        }
        State { atoms }
    }

    /// In-place form of [`State::apply`].
    pub fn apply_mut(&mut self, action: &GroundAction) {
        for d in &action.del {
            self.atoms.remove(d);
        }
        for a in &action.add {
            if !self.atoms.contains(a) {
                self.atoms.insert(a.clone());
            }
        }
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State::from_atoms(iter)
    }
}

/// Objects grouped by every type they conform to, names sorted.
pub(crate) fn objects_by_type<'a>(domain: &'a Domain, universe: &[&'a TypedName]) -> BTreeMap<&'a str, Vec<&'a str>> {
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let all_types = std::iter::once(ROOT_TYPE).chain(domain.types.declared.iter().map(|t| t.name.as_str()));
    for ty in all_types {
        let mut names: Vec<&str> = universe.iter().filter(|o| domain.types.is_subtype(&o.ty, ty)).map(|o| o.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        out.insert(ty, names);
    }
    out
}
