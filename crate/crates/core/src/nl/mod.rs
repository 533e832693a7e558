//! Natural-language codec: renders instances and plans through per-domain templates and
//! reads model responses back into plans.

mod error;
mod matcher;
mod obfuscate;
mod query;
mod response;
mod template;

pub use error::NlError;
pub use matcher::{match_action, match_atom};
pub use obfuscate::{obfuscate, obfuscate_domain, obfuscate_problem, Obfuscated, ObfuscationMap, Renaming};
pub use query::{parse_query, render_query, render_query_parts, ParsedQuery, QueryParts};
pub use response::{parse_response, render_plan_lines, render_response, ParsedResponse, ResponseSyntax};
pub use template::{ActionTemplate, ObjectPhrase, ObjectRule, ObjectTable, Pattern, TemplateSet, DEFAULT_NEGATION};

pub(crate) use query::{goal_sentences, goal_statement};
pub(crate) use response::{render_action, wrap_plan};
pub(crate) use template::capitalize;

/// Canonical form for matching: lower case, single spaces, no surrounding blanks or final period.
pub fn normalize(text: &str) -> String {
    let joined = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    joined.trim_end_matches('.').trim_end().to_string()
}

/// Like [`normalize`] but keeps a single leading/trailing space, for template fragments.
pub(crate) fn normalize_piece(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut space = false;
    for c in text.chars() {
        if c.is_whitespace() {
            space = true;
        } else {
            if space {
                out.push(' ');
                space = false;
            }
            out.extend(c.to_lowercase());
        }
    }
    if space {
        out.push(' ');
    }
    out
}
