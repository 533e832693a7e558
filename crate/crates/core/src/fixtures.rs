//! Built-in domain fixtures, compiled into the library.

use crate::pddl::{parse_domain, Domain};

pub struct DomainFixture {
    pub name: &'static str,
    pub pddl: &'static str,
    pub templates: &'static str,
}

macro_rules! fixture {
    ($name:literal) => {
        DomainFixture {
            name: $name,
            pddl: include_str!(concat!("../fixtures/domains/", $name, "/domain.pddl")),
            templates: include_str!(concat!("../fixtures/domains/", $name, "/templates.toml")),
        }
    };
}

pub static DOMAINS: &[DomainFixture] = &[
    fixture!("barman"),
    fixture!("blocksworld"),
    fixture!("childsnack"),
    fixture!("depots"),
    fixture!("driverlog"),
    fixture!("grippers"),
    fixture!("hanoi"),
    fixture!("logistics"),
    fixture!("satellite"),
    fixture!("storage"),
];

/// Obfuscation maps by base domain name.
pub static OBFUSCATIONS: &[(&str, &str)] =
    &[("blocksworld", include_str!("../fixtures/obfuscation/blocksworld.toml")), ("logistics", include_str!("../fixtures/obfuscation/logistics.toml"))];

pub fn domain_fixture(name: &str) -> Option<&'static DomainFixture> {
    DOMAINS.iter().find(|d| d.name == name)
}

pub fn obfuscation_source(name: &str) -> Option<&'static str> {
    OBFUSCATIONS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parses a shipped domain. Shipped sources are tested to parse, so this only fails on unknown names.
pub fn load_domain(name: &str) -> Option<Domain> {
    domain_fixture(name).map(|f| parse_domain(f.pddl).expect("shipped domain parses"))
}

/// Worked examples bundled for tests and the CLI.
pub mod cases {
    pub const BLOCKSWORLD_NINE_PROBLEM: &str = include_str!("../fixtures/cases/blocksworld-nine.pddl");
    pub const BLOCKSWORLD_NINE_PLAN: &str = include_str!("../fixtures/cases/blocksworld-nine.plan");
    pub const DRIVERLOG_SMALL_PROBLEM: &str = include_str!("../fixtures/cases/driverlog-small.pddl");
    pub const DRIVERLOG_SMALL_RESPONSE: &str = include_str!("../fixtures/cases/driverlog-small.response.txt");
}
