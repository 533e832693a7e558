//! Data-side strategies: query permutation, goal/state chain-of-thought annotation and
//! self-correction mistake injection.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusInstance;
use crate::exec::Plan;
use crate::nl::{capitalize, goal_sentences, goal_statement, render_action, wrap_plan, NlError, QueryParts, ResponseSyntax, TemplateSet};
use crate::pddl::{ActionKey, Domain, Problem};
use crate::rng::derive_rng;

/// How wrong steps are synthesized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MistakeStyle {
    /// Copy of a later step of the same plan.
    #[default]
    Borrow,
    /// The current step with one argument swapped for another object of the same type.
    Perturb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub permute: bool,
    pub goal_cot: bool,
    pub state_cot: bool,
    pub self_correct: bool,
    pub mistake_rate: f64,
    pub seed: u64,
    pub mistake_style: MistakeStyle,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            permute: false,
            goal_cot: false,
            state_cot: false,
            self_correct: false,
            mistake_rate: 0.2,
            seed: 1111,
            mistake_style: MistakeStyle::Borrow,
        }
    }
}

impl AugmentConfig {
    /// All four strategies on, default rate and seed.
    pub fn all() -> Self {
        AugmentConfig { permute: true, goal_cot: true, state_cot: true, self_correct: true, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if (0.0..=1.0).contains(&self.mistake_rate) {
            Ok(())
        } else {
            Err(AugmentError::BadRate(self.mistake_rate))
        }
    }

    /// Names of the enabled strategies, in a fixed order.
    pub fn strategy_names(&self) -> Vec<String> {
        [("permute", self.permute), ("goal_cot", self.goal_cot), ("state_cot", self.state_cot), ("self_correct", self.self_correct)]
            .into_iter()
            .filter(|(_, on)| *on)
            .map(|(n, _)| n.to_string())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AugmentError {
    #[error("mistake rate {0} is outside [0, 1]")]
    BadRate(f64),
    #[error("mistake injection needs at least 2 steps, plan has {len}")]
    PlanTooShort { len: usize },
    #[error(transparent)]
    Nl(#[from] NlError),
}

/// One response step. `source` is the reference-plan position the action was taken from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedStep {
    pub action: ActionKey,
    pub source: usize,
    pub wrong: bool,
    pub goal: Option<String>,
    pub count: Option<usize>,
    pub precon: Vec<String>,
    pub effect: Vec<String>,
}

impl AnnotatedStep {
    fn bare(action: ActionKey, source: usize, wrong: bool) -> Self {
        AnnotatedStep { action, source, wrong, goal: None, count: None, precon: Vec::new(), effect: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedResponse {
    pub steps: Vec<AnnotatedStep>,
}

impl AnnotatedResponse {
    pub fn plain(plan: &Plan) -> Self {
        AnnotatedResponse { steps: plan.iter().enumerate().map(|(i, a)| AnnotatedStep::bare(a.clone(), i, false)).collect() }
    }

    /// The plan left after dropping wrong steps.
    pub fn kept_plan(&self) -> Plan {
        self.steps.iter().filter(|s| !s.wrong).map(|s| s.action.clone()).collect()
    }

    pub fn render(&self, domain: &Domain, problem: &Problem, templates: &TemplateSet, syntax: &ResponseSyntax) -> Result<String, NlError> {
        let objects = templates.object_table(domain, problem)?;
        let mut lines = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            let mut parts: Vec<String> = Vec::new();
            if let Some(g) = &s.goal {
                parts.push(format!("{} {} {}", syntax.goal.0, g, syntax.goal.1));
            }
            if let Some(c) = s.count {
                parts.push(format!("{} {} {}", syntax.count.0, c, syntax.count.1));
            }
            if !s.precon.is_empty() {
                parts.push(format!("{} {} {}", syntax.precon.0, s.precon.join(" "), syntax.precon.1));
            }
            parts.push(render_action(&s.action, domain, templates, &objects)?);
            if !s.effect.is_empty() {
                parts.push(format!("{} {} {}", syntax.effect.0, s.effect.join(" "), syntax.effect.1));
            }
            if s.wrong {
                parts.push(syntax.removal.clone());
            }
            lines.push(parts.join(" "));
        }
        Ok(wrap_plan(&lines, syntax))
    }
}

/// Inserts, before each step but the last, a wrong copy of a uniformly chosen later step with
/// probability `mistake_rate`.
pub fn inject_mistakes<R: Rng>(plan: &Plan, cfg: &AugmentConfig, rng: &mut R) -> Result<AnnotatedResponse, AugmentError> {
    cfg.validate()?;
    let n = plan.len();
    if n < 2 {
        return Err(AugmentError::PlanTooShort { len: n });
    }
    let mut steps = Vec::with_capacity(n + n / 4);
    for (i, a) in plan.iter().enumerate() {
        if i + 1 < n && rng.gen_bool(cfg.mistake_rate) {
            let j = rng.gen_range(i + 1..n);
            steps.push(AnnotatedStep::bare(plan.actions[j].clone(), j, true));
        }
        steps.push(AnnotatedStep::bare(a.clone(), i, false));
    }
    Ok(AnnotatedResponse { steps })
}

/// Like [`inject_mistakes`], but the wrong step is the current action with one argument replaced
/// by a different object of the parameter's type. Steps with no such object borrow instead.
pub fn perturb_mistakes<R: Rng>(domain: &Domain, problem: &Problem, plan: &Plan, cfg: &AugmentConfig, rng: &mut R) -> Result<AnnotatedResponse, AugmentError> {
    cfg.validate()?;
    let n = plan.len();
    if n < 2 {
        return Err(AugmentError::PlanTooShort { len: n });
    }
    let universe = problem.universe(domain);
    let mut steps = Vec::with_capacity(n + n / 4);
    for (i, a) in plan.iter().enumerate() {
        if i + 1 < n && rng.gen_bool(cfg.mistake_rate) {
            let mut options: Vec<ActionKey> = Vec::new();
            if let Some(schema) = domain.schema(&a.schema) {
                for (k, p) in schema.params.iter().enumerate().take(a.args.len()) {
                    for o in &universe {
                        if o.name != a.args[k] && domain.types.is_subtype(&o.ty, &p.ty) {
                            let mut args = a.args.clone();
                            args[k] = o.name.clone();
                            options.push(ActionKey { schema: a.schema.clone(), args });
                        }
                    }
                }
            }
            match options.choose(rng) {
                Some(k) => steps.push(AnnotatedStep::bare(k.clone(), i, true)),
                None => {
                    let j = rng.gen_range(i + 1..n);
                    steps.push(AnnotatedStep::bare(plan.actions[j].clone(), j, true));
                }
            }
        }
        steps.push(AnnotatedStep::bare(a.clone(), i, false));
    }
    Ok(AnnotatedResponse { steps })
}

/// Fills goal/count and grounded precondition/effect blocks. COUNT is the number of reference
/// steps left after the step's source position, so a borrowed step shows its source's count.
pub fn annotate_steps(
    response: &mut AnnotatedResponse,
    plan_len: usize,
    domain: &Domain,
    problem: &Problem,
    templates: &TemplateSet,
    cfg: &AugmentConfig,
) -> Result<(), NlError> {
    if !cfg.goal_cot && !cfg.state_cot {
        return Ok(());
    }
    let objects = templates.object_table(domain, problem)?;
    let goal = if cfg.goal_cot { Some(goal_statement(&goal_sentences(problem, templates, &objects)?)) } else { None };
    for s in &mut response.steps {
        if let Some(g) = &goal {
            s.goal = Some(g.clone());
            s.count = Some(plan_len.saturating_sub(s.source + 1));
        }
        if cfg.state_cot {
            let tpl = templates.action(&s.action.schema)?;
            let args = objects.phrases(&s.action.args)?;
            let sentence = |p: &crate::nl::Pattern| format!("{}.", capitalize(&p.render_grounded(&args)));
            s.precon = tpl.precond.iter().map(sentence).collect();
            s.effect = tpl.effect.iter().map(sentence).collect();
        }
    }
    Ok(())
}

/// Goal and/or state annotation of the reference plan.
pub fn annotate_cot(domain: &Domain, problem: &Problem, plan: &Plan, templates: &TemplateSet, cfg: &AugmentConfig) -> Result<AnnotatedResponse, NlError> {
    let mut r = AnnotatedResponse::plain(plan);
    annotate_steps(&mut r, plan.len(), domain, problem, templates, cfg)?;
    Ok(r)
}

/// Applies the response-side strategies of `cfg` to a reference plan.
pub fn augment_response<R: Rng>(
    domain: &Domain,
    problem: &Problem,
    plan: &Plan,
    templates: &TemplateSet,
    cfg: &AugmentConfig,
    rng: &mut R,
) -> Result<AnnotatedResponse, AugmentError> {
    let mut r = if cfg.self_correct && plan.len() >= 2 {
        match cfg.mistake_style {
            MistakeStyle::Borrow => inject_mistakes(plan, cfg, rng)?,
            MistakeStyle::Perturb => perturb_mistakes(domain, problem, plan, cfg, rng)?,
        }
    } else {
        AnnotatedResponse::plain(plan)
    };
    annotate_steps(&mut r, plan.len(), domain, problem, templates, cfg)?;
    Ok(r)
}

/// Shuffles the action, restriction, initial-fact and goal lists of a query independently.
pub fn permute_query(instance: &CorpusInstance, seed: u64) -> Result<CorpusInstance, NlError> {
    let mut parts = QueryParts::parse(&instance.query)?;
    let mut rng = derive_rng(seed, &["permute", &instance.id]);
    parts.actions.shuffle(&mut rng);
    parts.restrictions.shuffle(&mut rng);
    parts.init.shuffle(&mut rng);
    parts.goal.shuffle(&mut rng);
    let mut out = instance.clone();
    out.query = parts.render();
    Ok(out)
}
