//! Registry of the shipped domains, their templates and obfuscated variants.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::fixtures::{self, DOMAINS, OBFUSCATIONS};
use crate::nl::{obfuscate_domain, ObfuscationMap, TemplateSet};
use crate::pddl::{parse_domain, Domain};

/// A loadable domain: its model, templates and, for renamed variants, the map from the base domain.
pub struct CatalogEntry {
    pub name: String,
    pub domain: Domain,
    pub templates: TemplateSet,
    /// Base domain name; equals `name` for unrenamed domains.
    pub base: String,
    pub obfuscation: Option<ObfuscationMap>,
}

fn build() -> BTreeMap<String, CatalogEntry> {
    let mut out = BTreeMap::new();
    for f in DOMAINS {
        let domain = parse_domain(f.pddl).unwrap_or_else(|e| panic!("shipped domain {}: {e}", f.name));
        let templates = TemplateSet::from_toml(f.templates, &domain).unwrap_or_else(|e| panic!("templates for {}: {e}", f.name));
        out.insert(f.name.to_string(), CatalogEntry { name: f.name.to_string(), domain, templates, base: f.name.to_string(), obfuscation: None });
    }
    for (base, src) in OBFUSCATIONS {
        let map = ObfuscationMap::load(src).unwrap_or_else(|e| panic!("obfuscation map for {base}: {e}"));
        let renamed = obfuscate_domain(&out[*base].domain, &map).unwrap_or_else(|e| panic!("obfuscating {base}: {e}"));
        let templates = map.templates_for(&renamed).unwrap_or_else(|e| panic!("obfuscated templates for {base}: {e}"));
        let name = renamed.name.clone();
        out.insert(name.clone(), CatalogEntry { name, domain: renamed, templates, base: base.to_string(), obfuscation: Some(map) });
    }
    out
}

fn registry() -> &'static BTreeMap<String, CatalogEntry> {
    static REG: OnceLock<BTreeMap<String, CatalogEntry>> = OnceLock::new();
    REG.get_or_init(build)
}

/// Looks up a domain by name; renamed variants are listed under their renamed domain name.
pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    registry().get(name)
}

/// Base domains in name order.
pub fn base_names() -> Vec<&'static str> {
    DOMAINS.iter().map(|d| d.name).collect()
}

/// Entry of the renamed variant of `base`, if one ships.
pub fn obfuscated_of(base: &str) -> Option<&'static CatalogEntry> {
    fixtures::obfuscation_source(base)?;
    registry().values().find(|e| e.base == base && e.obfuscation.is_some())
}
