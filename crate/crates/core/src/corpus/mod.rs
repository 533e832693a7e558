//! Corpus synthesis: random instances per split, strategy application and the JSONL
//! interchange format.

mod gen;

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{augment_response, permute_query, AugmentConfig, AugmentError};
use crate::catalog::{self, CatalogEntry};
use crate::exec::{judge, solve_reference, Plan, SearchError, SearchLimits};
use crate::nl::{obfuscate, render_query, render_response, NlError, ResponseSyntax};
use crate::pddl::{parse_problem, Literal, PddlError, Problem};
use crate::rng::{derive_rng, sha256_hex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    InDistrib,
    Long,
    Unseen,
    Obfuscated,
}

impl Split {
    pub const ALL: [Split; 5] = [Split::Train, Split::InDistrib, Split::Long, Split::Unseen, Split::Obfuscated];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::InDistrib => "in_distrib",
            Split::Long => "long",
            Split::Unseen => "unseen",
            Split::Obfuscated => "obfuscated",
        }
    }

    pub fn is_test(self) -> bool {
        self != Split::Train
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Split::ALL.into_iter().find(|x| x.as_str() == s).ok_or_else(|| format!("unknown split `{s}`"))
    }
}

/// One training or test example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusInstance {
    pub id: String,
    pub domain: String,
    pub split: Split,
    pub query: String,
    pub response: String,
    pub plan_length: usize,
    pub strategies: Vec<String>,
    pub reference_plan: String,
    /// PDDL problem text, so the instance can be judged without regenerating it.
    pub problem: String,
}

/// An instance with its domain, problem and reference plan loaded.
pub struct Resolved {
    pub entry: &'static CatalogEntry,
    pub problem: Problem,
    pub plan: Plan,
}

impl CorpusInstance {
    pub fn resolve(&self) -> Result<Resolved, CorpusError> {
        let entry = catalog::entry(&self.domain).ok_or_else(|| CorpusError::UnknownDomain(self.domain.clone()))?;
        let problem = parse_problem(&self.problem, &entry.domain).map_err(|e| CorpusError::BadInstance { id: self.id.clone(), source: e })?;
        let plan = Plan::from_val(&self.reference_plan).map_err(|e| CorpusError::BadInstance { id: self.id.clone(), source: e })?;
        Ok(Resolved { entry, problem, plan })
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no fixture for domain `{0}`")]
    UnknownDomain(String),
    #[error("{domain}: no instance with plan length in [{lo}, {hi}] after {attempts} attempts")]
    GenerationExhausted { domain: String, lo: usize, hi: usize, attempts: usize },
    #[error("{domain}.{split}: only {got} of {wanted} distinct instances could be generated")]
    CountUnsatisfiable { domain: String, split: Split, wanted: usize, got: usize },
    #[error("instance {id}: {source}")]
    BadInstance { id: String, source: PddlError },
    #[error("plan override for {id}: {msg}")]
    BadPlanOverride { id: String, msg: String },
    #[error("split spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Nl(#[from] NlError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: PathBuf, line: usize, source: serde_json::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// Bounds on a single `generate_instance` call.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenBudget {
    pub attempts: usize,
    /// Caps the sampler's size knob; `None` uses the sampler's own maximum.
    pub max_size: Option<usize>,
    pub limits: SearchLimits,
}

impl Default for GenBudget {
    fn default() -> Self {
        GenBudget { attempts: 60, max_size: None, limits: SearchLimits { max_expansions: 60_000, max_plan_length: 64 } }
    }
}

/// Samples problems of `domain` until the reference plan length lands in `[lo, hi]`.
///
/// The sampler's size knob moves up after too-short plans and down after too-long ones or a
/// search that ran out of budget. With `hi == 0` the goal is drawn from the initial facts.
pub fn generate_instance(domain: &str, range: (usize, usize), seed: u64, budget: &GenBudget) -> Result<(Problem, Plan), CorpusError> {
    let entry = catalog::entry(domain).filter(|e| e.obfuscation.is_none()).ok_or_else(|| CorpusError::UnknownDomain(domain.into()))?;
    let (sample, max) = gen::sampler(domain).ok_or_else(|| CorpusError::UnknownDomain(domain.into()))?;
    let (lo, hi) = range;
    let max = budget.max_size.map_or(max, |m| m.min(max)).max(1);
    let mut rng = derive_rng(seed, &["generate", domain]);
    let (a, b) = (gen::size_hint(domain, lo).clamp(1, max), gen::size_hint(domain, hi).clamp(1, max));
    let mut size = rng.gen_range(a..=b.max(a));
    for _ in 0..budget.attempts {
        let mut problem = sample(size, &mut rng);
        if hi == 0 {
            let mut init = problem.init.clone();
            init.shuffle(&mut rng);
            let k = rng.gen_range(1..=init.len().clamp(1, 3));
            problem.goal = init.into_iter().take(k).map(Literal::pos).collect();
        }
        match solve_reference(&entry.domain, &problem, budget.limits) {
            Ok(plan) if (lo..=hi).contains(&plan.len()) => return Ok((problem, plan)),
            Ok(plan) if plan.len() < lo => size = (size + 1).min(max),
            Ok(_) | Err(SearchError::LimitExceeded { .. }) => size = size.saturating_sub(1).max(1),
            Err(SearchError::Unsolvable) | Err(SearchError::BadLimits) => {}
        }
    }
    Err(CorpusError::GenerationExhausted { domain: domain.into(), lo, hi, attempts: budget.attempts })
}

/// One raw problem from the domain's sampler, with the size knob clamped to its maximum.
/// No plan is computed and the goal may be unreachable.
pub fn sample_problem(domain: &str, size: usize, seed: u64) -> Option<Problem> {
    let (sample, max) = gen::sampler(domain)?;
    let mut rng = derive_rng(seed, &["sample", domain]);
    Some(sample(size.clamp(1, max), &mut rng))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPlan {
    pub domains: Vec<String>,
    pub range: (usize, usize),
}

/// Per-split layout; splits left out of a config keep their defaults.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Splits {
    pub train: SplitPlan,
    pub in_distrib: SplitPlan,
    pub long: SplitPlan,
    pub unseen: SplitPlan,
    pub obfuscated: SplitPlan,
}

impl Splits {
    pub fn get(&self, split: Split) -> &SplitPlan {
        match split {
            Split::Train => &self.train,
            Split::InDistrib => &self.in_distrib,
            Split::Long => &self.long,
            Split::Unseen => &self.unseen,
            Split::Obfuscated => &self.obfuscated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub seed: u64,
    pub train_count: usize,
    pub test_count: usize,
    pub splits: Splits,
    pub budget: GenBudget,
    /// Directory of `<instance id>.plan` files that replace the built-in planner's plans.
    pub plan_dir: Option<PathBuf>,
}

const TRAIN_DOMAINS: [&str; 8] = ["barman", "blocksworld", "childsnack", "depots", "driverlog", "grippers", "logistics", "satellite"];

impl Default for Splits {
    fn default() -> Self {
        let plan = |d: &[&str], range| SplitPlan { domains: d.iter().map(|s| s.to_string()).collect(), range };
        Splits {
            train: plan(&TRAIN_DOMAINS, (3, 16)),
            in_distrib: plan(&TRAIN_DOMAINS, (3, 16)),
            long: plan(&TRAIN_DOMAINS, (17, 32)),
            unseen: plan(&["hanoi", "storage"], (3, 16)),
            obfuscated: plan(&["blocksworld", "logistics"], (3, 16)),
        }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { seed: 1111, train_count: 4000, test_count: 200, splits: Splits::default(), budget: GenBudget::default(), plan_dir: None }
    }
}

impl SplitSpec {
    /// Default layout with smaller counts.
    pub fn reduced(train_count: usize, test_count: usize) -> Self {
        SplitSpec { train_count, test_count, ..Default::default() }
    }

    pub fn count(&self, split: Split) -> usize {
        if split.is_test() {
            self.test_count
        } else {
            self.train_count
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for split in Split::ALL {
            let p = self.splits.get(split);
            if p.range.0 > p.range.1 {
                return Err(CorpusError::BadSpec(format!("{split}: empty length range")));
            }
            for d in &p.domains {
                if catalog::entry(d).is_none() || gen::sampler(d).is_none() {
                    return Err(CorpusError::UnknownDomain(d.clone()));
                }
                if split == Split::Obfuscated && catalog::obfuscated_of(d).is_none() {
                    return Err(CorpusError::BadSpec(format!("no obfuscation map for `{d}`")));
                }
            }
        }
        Ok(())
    }

    /// Keeps only the named domains in every split.
    pub fn restrict_domains(&mut self, keep: &[String]) {
        for split in Split::ALL {
            let p = match split {
                Split::Train => &mut self.splits.train,
                Split::InDistrib => &mut self.splits.in_distrib,
                Split::Long => &mut self.splits.long,
                Split::Unseen => &mut self.splits.unseen,
                Split::Obfuscated => &mut self.splits.obfuscated,
            };
            p.domains.retain(|d| keep.contains(d));
        }
    }
}

/// Builds the query/response pair for a generated problem. Training instances get the
/// strategies of `cfg`; test instances carry the plain reference plan.
pub fn build_instance(
    id: &str,
    base: &str,
    split: Split,
    problem: &Problem,
    plan: &Plan,
    cfg: &AugmentConfig,
    syntax: &ResponseSyntax,
) -> Result<CorpusInstance, CorpusError> {
    let entry = catalog::entry(base).ok_or_else(|| CorpusError::UnknownDomain(base.into()))?;
    let mut problem = problem.clone();
    problem.name = id.to_string();
    let (entry, problem, plan) = if split == Split::Obfuscated {
        let renamed = catalog::obfuscated_of(base).ok_or_else(|| CorpusError::BadSpec(format!("no obfuscation map for `{base}`")))?;
        let o = obfuscate(&entry.domain, &problem, renamed.obfuscation.as_ref().expect("renamed entry has a map"))?;
        let plan = o.renaming.plan(plan);
        (renamed, o.problem, plan)
    } else {
        (entry, problem, plan.clone())
    };
    let query = render_query(&entry.domain, &problem, &entry.templates)?;
    let mut inst = CorpusInstance {
        id: id.to_string(),
        domain: entry.name.clone(),
        split,
        query,
        response: String::new(),
        plan_length: plan.len(),
        strategies: Vec::new(),
        reference_plan: plan.to_val(),
        problem: problem.to_string(),
    };
    if split == Split::Train {
        inst = apply_strategies(&inst, entry, &problem, &plan, cfg, syntax)?;
    } else {
        inst.response = render_response(&plan, &entry.domain, &problem, &entry.templates, syntax)?;
    }
    Ok(inst)
}

fn apply_strategies(
    inst: &CorpusInstance,
    entry: &CatalogEntry,
    problem: &Problem,
    plan: &Plan,
    cfg: &AugmentConfig,
    syntax: &ResponseSyntax,
) -> Result<CorpusInstance, CorpusError> {
    cfg.validate()?;
    let mut rng = derive_rng(cfg.seed, &["augment", &inst.id]);
    let annotated = augment_response(&entry.domain, problem, plan, &entry.templates, cfg, &mut rng)?;
    let mut out = inst.clone();
    out.response = annotated.render(&entry.domain, problem, &entry.templates, syntax)?;
    out.query = render_query(&entry.domain, problem, &entry.templates)?;
    if cfg.permute {
        out = permute_query(&out, cfg.seed)?;
    }
    out.strategies = cfg.strategy_names();
    Ok(out)
}

/// Rebuilds query and response of an existing instance under `cfg`, from its stored problem
/// and reference plan.
pub fn reaugment(inst: &CorpusInstance, cfg: &AugmentConfig, syntax: &ResponseSyntax) -> Result<CorpusInstance, CorpusError> {
    let r = inst.resolve()?;
    apply_strategies(inst, r.entry, &r.problem, &r.plan, cfg, syntax)
}

/// Generated instances for one `(domain, split)` pair, in id order.
#[derive(Clone, Debug)]
pub struct SplitOutput {
    pub domain: String,
    pub split: Split,
    pub instances: Vec<CorpusInstance>,
}

impl SplitOutput {
    pub fn file_name(&self) -> String {
        format!("{}.{}.jsonl", self.domain, self.split)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for i in &self.instances {
            out.push_str(&serde_json::to_string(i).expect("instances serialize"));
            out.push('\n');
        }
        out
    }
}

fn plan_override(spec: &SplitSpec, id: &str) -> Result<Option<Plan>, CorpusError> {
    let Some(dir) = &spec.plan_dir else { return Ok(None) };
    let path = dir.join(format!("{id}.plan"));
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    Plan::from_val(&text).map(Some).map_err(|e| CorpusError::BadPlanOverride { id: id.into(), msg: e.to_string() })
}

/// Generates `spec.count(split)` distinct problems of `domain`, none of which occurs in `exclude`.
fn generate_split(spec: &SplitSpec, domain: &str, split: Split, exclude: &HashSet<String>) -> Result<Vec<(String, Problem, Plan)>, CorpusError> {
    let wanted = spec.count(split);
    let range = spec.splits.get(split).range;
    let max_candidates = wanted * 3 + 50;
    let mut seen: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(wanted);
    let mut next = 0usize;
    let mut last_err = None;
    while out.len() < wanted && next < max_candidates {
        let batch = ((wanted - out.len()) * 5 / 4 + 2).min(max_candidates - next);
        let results: Vec<Result<(Problem, Plan), CorpusError>> = (next..next + batch)
            .into_par_iter()
            .map(|k| {
                let seed: u64 = derive_rng(spec.seed, &["candidate", domain, split.as_str(), &k.to_string()]).gen();
                generate_instance(domain, range, seed, &spec.budget)
            })
            .collect();
        next += batch;
        for r in results {
            match r {
                Ok((problem, plan)) => {
                    let ident = problem.identity();
                    if out.len() < wanted && !exclude.contains(&ident) && seen.insert(ident) {
                        let id = format!("{domain}-{split}-{:05}", out.len());
                        out.push((id, problem, plan));
                    }
                }
                Err(e @ CorpusError::GenerationExhausted { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
    }
    if out.len() < wanted {
        if let Some(e) = last_err {
            log::warn!("{domain}.{split}: {e}");
        }
        return Err(CorpusError::CountUnsatisfiable { domain: domain.into(), split, wanted, got: out.len() });
    }
    // External plans replace the planner's output after ids are fixed.
    for (id, problem, plan) in &mut out {
        if let Some(p) = plan_override(spec, id)? {
            let entry = catalog::entry(domain).expect("validated domain");
            if !judge(&entry.domain, problem, &p).valid {
                return Err(CorpusError::BadPlanOverride { id: id.clone(), msg: "plan is not valid for the problem".into() });
            }
            if !(range.0..=range.1).contains(&p.len()) {
                return Err(CorpusError::BadPlanOverride { id: id.clone(), msg: format!("length {} is outside the split range", p.len()) });
            }
            *plan = p;
        }
    }
    Ok(out)
}

/// Generates every `(domain, split)` file of `spec` in memory. Train instances are generated
/// first so test splits can exclude them.
pub fn generate_splits(spec: &SplitSpec, cfg: &AugmentConfig, syntax: &ResponseSyntax) -> Result<Vec<SplitOutput>, CorpusError> {
    spec.validate()?;
    cfg.validate()?;
    let mut outputs = Vec::new();
    let mut train_ids: std::collections::HashMap<String, HashSet<String>> = Default::default();
    for split in Split::ALL {
        for domain in &spec.splits.get(split).domains {
            log::info!("generating {domain}.{split}");
            let exclude = train_ids.get(domain).cloned().unwrap_or_default();
            let picked = generate_split(spec, domain, split, &exclude)?;
            if split == Split::Train {
                train_ids.entry(domain.clone()).or_default().extend(picked.iter().map(|(_, p, _)| p.identity()));
            }
            let instances =
                picked.par_iter().map(|(id, problem, plan)| build_instance(id, domain, split, problem, plan, cfg, syntax)).collect::<Result<Vec<_>, _>>()?;
            outputs.push(SplitOutput { domain: domain.clone(), split, instances });
        }
    }
    Ok(outputs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub domain: String,
    pub split: Split,
    pub count: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes one JSONL file per output plus `manifest.json`.
pub fn write_corpus(dir: &Path, seed: u64, outputs: &[SplitOutput]) -> Result<Manifest, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    for o in outputs {
        let text = o.to_jsonl();
        let path = dir.join(o.file_name());
        fs::write(&path, &text).map_err(io_err(&path))?;
        files.push(ManifestEntry {
            file: o.file_name(),
            domain: o.domain.clone(),
            split: o.split,
            count: o.instances.len(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    files.sort_by(|a, b| a.file.cmp(&b.file));
    let manifest = Manifest { seed, files };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

/// Generates and writes the corpus described by `spec`.
pub fn build_splits(spec: &SplitSpec, cfg: &AugmentConfig, syntax: &ResponseSyntax, out_dir: &Path) -> Result<Manifest, CorpusError> {
    let outputs = generate_splits(spec, cfg, syntax)?;
    write_corpus(out_dir, spec.seed, &outputs)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<CorpusInstance>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| CorpusError::Json { path: path.to_path_buf(), line: i + 1, source }))
        .collect()
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|source| CorpusError::Json { path, line: 1, source })
}

/// Every instance listed in the manifest of `dir`.
pub fn read_corpus(dir: &Path) -> Result<Vec<CorpusInstance>, CorpusError> {
    let manifest = read_manifest(dir)?;
    let mut out = Vec::new();
    for f in &manifest.files {
        out.extend(read_jsonl(&dir.join(&f.file))?);
    }
    Ok(out)
}
