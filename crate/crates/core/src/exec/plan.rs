//! Plans and the VAL plan-file convention: one `(action arg ...)` per line, `;` comments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::sexpr::{read_all, SExpr};
use crate::pddl::{ActionKey, PddlError};

/// A sequence of ground actions identified by `(schema, args)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Plan {
    pub actions: Vec<ActionKey>,
}

impl Plan {
    pub fn new(actions: Vec<ActionKey>) -> Self {
        Plan { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ActionKey> {
        self.actions.iter()
    }

    /// Reads VAL-format text. Anything after `;` on a line is ignored.
    pub fn from_val(text: &str) -> Result<Plan, PddlError> {
        let mut actions = Vec::new();
        for expr in read_all(text)? {
            let items = expr.as_list().ok_or_else(|| PddlError::syntax(expr.pos(), "expected `(action args...)`"))?;
            let mut syms = items.iter().map(|e| match e {
                SExpr::Symbol { text, .. } => Ok(text.clone()),
                SExpr::List { pos, .. } => Err(PddlError::syntax(*pos, "nested list in plan step")),
            });
            let schema = syms.next().ok_or_else(|| PddlError::syntax(expr.pos(), "empty plan step"))??;
            let args = syms.collect::<Result<Vec<_>, _>>()?;
            actions.push(ActionKey { schema, args });
        }
        Ok(Plan { actions })
    }

    pub fn to_val(&self) -> String {
        let mut out = String::new();
        for a in &self.actions {
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_val())
    }
}

impl From<Vec<ActionKey>> for Plan {
    fn from(actions: Vec<ActionKey>) -> Self {
        Plan { actions }
    }
}

impl FromIterator<ActionKey> for Plan {
    fn from_iter<I: IntoIterator<Item = ActionKey>>(iter: I) -> Self {
        Plan { actions: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Plan {
    type Item = &'a ActionKey;
    type IntoIter = std::slice::Iter<'a, ActionKey>;

    fn into_iter(self) -> Self::IntoIter {
        self.actions.iter()
    }
}
