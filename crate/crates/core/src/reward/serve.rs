//! Newline-delimited JSON scoring service.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::thread;

use crossbeam_channel::unbounded;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{reward_from, RewardError, RewardScore};
use crate::catalog::{self, CatalogEntry};
use crate::corpus::CorpusInstance;
use crate::exec::{judge, Plan};
use crate::nl::{parse_response, NlError, ResponseSyntax, TemplateSet};
use crate::pddl::{parse_domain, parse_problem, Domain, Problem};

/// One scoring request. Either `instance` names a loaded corpus instance, or `domain`
/// (a catalog name or PDDL text) and `problem` (PDDL text) are given inline. The
/// generated plan is a model `response` or a plan in `(action args)` lines.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Several references: the best score over them is reported.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreResponse {
    Scored { id: String, reward: f64, valid: bool, lccs_len: usize, ref_len: usize },
    Failed { id: String, error: String },
}

impl ScoreResponse {
    pub fn id(&self) -> &str {
        match self {
            ScoreResponse::Scored { id, .. } | ScoreResponse::Failed { id, .. } => id,
        }
    }

    fn from_score(id: String, s: RewardScore) -> Self {
        ScoreResponse::Scored { id, reward: s.reward, valid: s.valid, lccs_len: s.lccs_len, ref_len: s.ref_len }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("unknown instance id `{0}`")]
    UnknownInstance(String),
    #[error("malformed request: {0}")]
    Malformed(String),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Nl(#[from] NlError),
    #[error("{0}")]
    Other(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a request may refer to.
#[derive(Default)]
pub struct ServeContext {
    pub instances: HashMap<String, CorpusInstance>,
    pub syntax: ResponseSyntax,
}

impl ServeContext {
    pub fn new(instances: impl IntoIterator<Item = CorpusInstance>, syntax: ResponseSyntax) -> Self {
        ServeContext { instances: instances.into_iter().map(|i| (i.id.clone(), i)).collect(), syntax }
    }
}

enum DomainRef {
    Catalog(&'static CatalogEntry),
    Inline(Domain, Option<&'static TemplateSet>),
}

impl DomainRef {
    fn domain(&self) -> &Domain {
        match self {
            DomainRef::Catalog(e) => &e.domain,
            DomainRef::Inline(d, _) => d,
        }
    }

    fn templates(&self) -> Option<&TemplateSet> {
        match self {
            DomainRef::Catalog(e) => Some(&e.templates),
            DomainRef::Inline(_, t) => *t,
        }
    }
}

fn bad(msg: impl ToString) -> ServeError {
    ServeError::Other(msg.to_string())
}

fn load_domain(text: &str) -> Result<DomainRef, ServeError> {
    if text.trim_start().starts_with('(') {
        let d = parse_domain(text).map_err(bad)?;
        let templates = catalog::entry(&d.name).map(|e| &e.templates);
        Ok(DomainRef::Inline(d, templates))
    } else {
        catalog::entry(text.trim()).map(DomainRef::Catalog).ok_or_else(|| bad(format!("unknown domain `{text}`")))
    }
}

/// Scores one request.
pub fn score_request(req: &ScoreRequest, ctx: &ServeContext) -> Result<RewardScore, ServeError> {
    let (dom, problem, mut references): (DomainRef, Problem, Vec<Plan>) = match (&req.instance, &req.domain, &req.problem) {
        (Some(id), None, None) => {
            let inst = ctx.instances.get(id).ok_or_else(|| ServeError::UnknownInstance(id.clone()))?;
            let r = inst.resolve().map_err(bad)?;
            (DomainRef::Catalog(r.entry), r.problem, vec![r.plan])
        }
        (None, Some(d), Some(p)) => {
            let dom = load_domain(d)?;
            let problem = parse_problem(p, dom.domain()).map_err(bad)?;
            (dom, problem, Vec::new())
        }
        _ => return Err(ServeError::Malformed("give either `instance` or both `domain` and `problem`".into())),
    };
    let explicit: Vec<Plan> = req.reference.iter().chain(&req.references).map(|t| Plan::from_val(t).map_err(bad)).collect::<Result<_, _>>()?;
    if !explicit.is_empty() {
        references = explicit;
    }
    if references.is_empty() {
        return Err(RewardError::NoReference.into());
    }
    let domain = dom.domain();

    // (plan, parsed completely)
    let (generated, complete) = match (&req.response, &req.plan) {
        (Some(text), None) => {
            let templates = dom.templates().ok_or_else(|| bad(format!("no templates for domain `{}`", domain.name)))?;
            match parse_response(text, domain, &problem, templates, &ctx.syntax) {
                Ok(parsed) => (parsed.plan, true),
                Err(NlError::UnparseableStep { prefix, .. }) => (prefix, false),
                Err(NlError::MissingPlanMarkers) => (Plan::default(), false),
                Err(e) => return Err(e.into()),
            }
        }
        (None, Some(text)) => (Plan::from_val(text).map_err(bad)?, true),
        _ => return Err(ServeError::Malformed("give exactly one of `response` and `plan`".into())),
    };

    let valid = complete && judge(domain, &problem, &generated).valid;
    let mut best: Option<RewardScore> = None;
    for reference in &references {
        let v = judge(domain, &problem, reference);
        if !v.valid {
            return Err(RewardError::InvalidReference(v.to_string()).into());
        }
        let s = reward_from(valid, &generated, reference);
        if best.is_none_or(|b| (s.reward, s.lccs_len) > (b.reward, b.lccs_len)) {
            best = Some(s);
        }
    }
    Ok(best.expect("at least one reference"))
}

/// Handles one request line; never fails, errors become `{id, error}` responses.
pub fn respond(line: &str, ctx: &ServeContext) -> ScoreResponse {
    let req: ScoreRequest = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => {
            // salvage the id if the line is at least a JSON object
            let id =
                serde_json::from_str::<serde_json::Value>(line).ok().and_then(|v| v.get("id").and_then(|i| i.as_str().map(str::to_string))).unwrap_or_default();
            return ScoreResponse::Failed { id, error: ServeError::Malformed(e.to_string()).to_string() };
        }
    };
    match score_request(&req, ctx) {
        Ok(s) => ScoreResponse::from_score(req.id, s),
        Err(e) => ScoreResponse::Failed { id: req.id, error: e.to_string() },
    }
}

/// Reads requests line by line and writes one JSON response per non-blank line.
/// With `workers > 1` responses may come back out of order; ids identify them.
pub fn serve<R: BufRead, W: Write + Send>(reader: R, mut writer: W, ctx: &ServeContext, workers: usize) -> Result<usize, ServeError> {
    let workers = workers.max(1);
    let (job_tx, job_rx) = unbounded::<String>();
    let (out_tx, out_rx) = unbounded::<ScoreResponse>();
    thread::scope(|s| {
        for _ in 0..workers {
            let (rx, tx) = (job_rx.clone(), out_tx.clone());
            s.spawn(move || {
                for line in rx {
                    if tx.send(respond(&line, ctx)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(out_tx);
        let writer_thread = s.spawn(move || -> Result<usize, ServeError> {
            let mut n = 0;
            for resp in out_rx {
                serde_json::to_writer(&mut writer, &resp).map_err(|e| ServeError::Io(e.into()))?;
                writer.write_all(b"\n")?;
                writer.flush()?;
                n += 1;
            }
            Ok(n)
        });
        let mut read_err = None;
        for line in reader.lines() {
            match line {
                Ok(l) if l.trim().is_empty() => {}
                Ok(l) => {
                    let _ = job_tx.send(l);
                }
                Err(e) => {
                    read_err = Some(e);
                    break;
                }
            }
        }
        drop(job_tx);
        let written = writer_thread.join().expect("writer thread panicked")?;
        match read_err {
            Some(e) => Err(e.into()),
            None => Ok(written),
        }
    })
}

/// Serves each accepted connection with [`serve`]; stops after `max_connections` if given.
pub fn serve_tcp(listener: &TcpListener, ctx: &ServeContext, workers: usize, max_connections: Option<usize>) -> Result<(), ServeError> {
    thread::scope(|s| {
        for (i, stream) in listener.incoming().enumerate() {
            if max_connections.is_some_and(|m| i >= m) {
                break;
            }
            let stream = stream?;
            s.spawn(move || {
                let reader = BufReader::new(stream.try_clone()?);
                match serve(reader, stream, ctx, workers) {
                    Ok(n) => log::debug!("connection closed after {n} responses"),
                    Err(e) => log::warn!("connection failed: {e}"),
                }
                Ok::<_, std::io::Error>(())
            });
            if max_connections.is_some_and(|m| i + 1 >= m) {
                break;
            }
        }
        Ok(())
    })
}
