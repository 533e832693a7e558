use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{group_samples, pass_at_k, rates, EvalError, Outcome, ParseFailurePolicy, ResultRecord};
use crate::corpus::CorpusInstance;
use crate::exec::judge;
use crate::nl::{parse_response, ResponseSyntax};

/// One line of a model-output file. `prefix` > 0 marks a continuation of that many
/// reference actions; the response is then judged against the advanced problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub id: String,
    #[serde(default)]
    pub sample: usize,
    pub response: String,
    #[serde(default)]
    pub prefix: usize,
}

/// Parses and judges every output against its instance.
pub fn evaluate_outputs(outputs: &[ModelOutput], instances: &HashMap<String, CorpusInstance>, syntax: &ResponseSyntax) -> Result<Vec<ResultRecord>, EvalError> {
    let mut out = Vec::with_capacity(outputs.len());
    for o in outputs {
        let inst = instances.get(&o.id).ok_or_else(|| EvalError::UnknownInstance(o.id.clone()))?;
        let r = inst.resolve()?;
        let (problem, text) = if o.prefix > 0 {
            let c = super::continuation_prompt(inst, o.prefix, syntax)?;
            // the open plan block lives in the prompt
            let text = if o.response.contains(&syntax.plan_open) { o.response.clone() } else { format!("{}\n{}", syntax.plan_open, o.response) };
            (c.check, text)
        } else {
            (r.problem, o.response.clone())
        };
        let mut rec = match parse_response(&text, &r.entry.domain, &problem, &r.entry.templates, syntax) {
            Ok(parsed) => {
                let v = judge(&r.entry.domain, &problem, &parsed.plan);
                ResultRecord::parsed(&o.id, o.sample, parsed.plan.len(), Outcome::from(&v))
            }
            Err(e) => ResultRecord::failed(&o.id, o.sample, e.to_string()),
        };
        rec.domain = inst.domain.clone();
        rec.split = inst.split.to_string();
        out.push(rec);
    }
    Ok(out)
}

/// Metrics for one (domain, split) cell. `pass_at` is `None` where a group had fewer than k samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricRow {
    pub domain: String,
    pub split: String,
    pub instances: usize,
    pub validity: f64,
    pub executability: f64,
    pub goal_sat: f64,
    pub pass_at: BTreeMap<usize, Option<f64>>,
}

/// One row per (domain, split). Rates use sample 0 of each instance.
pub fn metric_rows(records: &[ResultRecord], ks: &[usize], policy: ParseFailurePolicy) -> Result<Vec<MetricRow>, EvalError> {
    let mut cells: BTreeMap<(String, String), Vec<ResultRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.domain.clone(), r.split.clone())).or_default().push(r.clone());
    }
    let mut rows = Vec::new();
    for ((domain, split), recs) in cells {
        let groups = group_samples(&recs);
        let firsts: Vec<ResultRecord> = groups.iter().map(|g| g[0].clone()).collect();
        let rt = rates(&firsts, policy)?;
        let mut pass_at = BTreeMap::new();
        for &k in ks {
            let v = match pass_at_k(&groups, k) {
                Ok(v) => Some(v),
                Err(EvalError::GroupTooSmall { .. }) => None,
                Err(e) => return Err(e),
            };
            pass_at.insert(k, v);
        }
        rows.push(MetricRow { domain, split, instances: groups.len(), validity: rt.validity, executability: rt.executability, goal_sat: rt.goal_sat, pass_at });
    }
    Ok(rows)
}

/// Plain-text table with aligned columns.
pub fn render_table(rows: &[MetricRow]) -> String {
    let ks: Vec<usize> = rows.iter().flat_map(|r| r.pass_at.keys().copied()).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut header = vec!["domain".to_string(), "split".into(), "n".into(), "valid.".into(), "exec.".into(), "goal-sat.".into()];
    header.extend(ks.iter().map(|k| format!("pass@{k}")));
    let mut table = vec![header];
    for r in rows {
        let mut line = vec![
            r.domain.clone(),
            r.split.clone(),
            r.instances.to_string(),
            format!("{:.3}", r.validity),
            format!("{:.3}", r.executability),
            format!("{:.3}", r.goal_sat),
        ];
        for k in &ks {
            line.push(match r.pass_at.get(k).copied().flatten() {
                Some(v) => format!("{v:.3}"),
                None => "-".into(),
            });
        }
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len()).map(|c| table.iter().map(|l| l[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for line in &table {
        let cells: Vec<String> = line.iter().zip(&widths).enumerate().map(|(c, (s, w))| if c < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") }).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}
