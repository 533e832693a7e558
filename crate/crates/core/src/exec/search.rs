//! Deterministic reference planner over a compact bitset encoding.
//!
//! Breadth-first search with duplicate detection covers plans up to [`BFS_DEPTH`] steps;
//! beyond that (or once its share of the budget is spent) greedy best-first search on the
//! number of unsatisfied goal literals takes over. Ties break in ground-action order and
//! then first-in-first-out, so results are reproducible.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Plan;
use crate::pddl::{ground_filtered, Atom, Domain, Problem};

/// Plans up to this length are found by breadth-first search and are therefore shortest.
pub const BFS_DEPTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_expansions: usize,
    pub max_plan_length: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_expansions: 200_000, max_plan_length: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("search limit exceeded after {expansions} expansions")]
    LimitExceeded { expansions: usize },
    #[error("no plan exists within the given limits")]
    Unsolvable,
    #[error("search limits must be positive")]
    BadLimits,
}

type Bits = Box<[u64]>;

struct CompactAction {
    pre_pos: Vec<u32>,
    pre_neg: Vec<u32>,
    add: Vec<u32>,
    del: Vec<u32>,
}

struct CompactTask {
    actions: Vec<CompactAction>,
    keys: Vec<crate::pddl::ActionKey>,
    /// Actions bucketed by one positive precondition atom (the trigger).
    by_trigger: Vec<Vec<u32>>,
    /// Actions without positive preconditions; checked in every state.
    untriggered: Vec<u32>,
    init: Bits,
    goal_pos: Vec<u32>,
    goal_neg: Vec<u32>,
}

#[inline]
fn test(bits: &[u64], i: u32) -> bool {
    bits[(i / 64) as usize] >> (i % 64) & 1 == 1
}

#[inline]
fn set(bits: &mut [u64], i: u32) {
    bits[(i / 64) as usize] |= 1 << (i % 64);
}

#[inline]
fn clear(bits: &mut [u64], i: u32) {
    bits[(i / 64) as usize] &= !(1 << (i % 64));
}

impl CompactTask {
    /// `None` when a static goal literal is already false.
    fn build(domain: &Domain, problem: &Problem) -> Option<CompactTask> {
        let mut fluent_preds: HashSet<&str> = HashSet::new();
        for s in &domain.schemas {
            fluent_preds.extend(s.add.iter().map(|a| a.predicate.as_str()));
            fluent_preds.extend(s.del.iter().map(|a| a.predicate.as_str()));
        }
        let init: HashSet<&Atom> = problem.init.iter().collect();
        let is_static = |p: &str| !fluent_preds.contains(p);

        let ground = ground_filtered(domain, problem, |_, lit| if is_static(&lit.atom.predicate) { init.contains(&lit.atom) == lit.positive } else { true });

        for g in &problem.goal {
            if is_static(&g.atom.predicate) && init.contains(&g.atom) != g.positive {
                return None;
            }
        }

        let mut ids: HashMap<Atom, u32> = HashMap::new();
        let mut intern = |a: &Atom| -> u32 {
            let next = ids.len() as u32;
            *ids.entry(a.clone()).or_insert(next)
        };
        let mut actions = Vec::with_capacity(ground.len());
        let mut keys = Vec::with_capacity(ground.len());
        for ga in &ground {
            let mut ca = CompactAction { pre_pos: vec![], pre_neg: vec![], add: vec![], del: vec![] };
            for l in &ga.precond {
                if l.atom.is_equality() || is_static(&l.atom.predicate) {
                    continue;
                }
                let id = intern(&l.atom);
                if l.positive {
                    ca.pre_pos.push(id)
                } else {
                    ca.pre_neg.push(id)
                }
            }
            ca.add = ga.add.iter().map(&mut intern).collect();
            ca.del = ga.del.iter().map(&mut intern).collect();
            actions.push(ca);
            keys.push(ga.key());
        }
        let mut goal_pos = Vec::new();
        let mut goal_neg = Vec::new();
        for g in &problem.goal {
            if is_static(&g.atom.predicate) {
                continue;
            }
            let id = intern(&g.atom);
            if g.positive {
                goal_pos.push(id)
            } else {
                goal_neg.push(id)
            }
        }
        let init_ids: Vec<u32> = problem.init.iter().filter(|a| !is_static(&a.predicate)).map(&mut intern).collect();

        let n_atoms = ids.len();
        let words = n_atoms.div_ceil(64).max(1);
        let mut init_bits = vec![0u64; words].into_boxed_slice();
        for id in init_ids {
            set(&mut init_bits, id);
        }

        // Trigger on the least-shared positive precondition to keep buckets small.
        let mut usage = vec![0usize; n_atoms];
        for a in &actions {
            for &p in &a.pre_pos {
                usage[p as usize] += 1;
            }
        }
        let mut by_trigger = vec![Vec::new(); n_atoms];
        let mut untriggered = Vec::new();
        for (i, a) in actions.iter().enumerate() {
            match a.pre_pos.iter().min_by_key(|&&p| (usage[p as usize], p)) {
                Some(&t) => by_trigger[t as usize].push(i as u32),
                None => untriggered.push(i as u32),
            }
        }
        Some(CompactTask { actions, keys, by_trigger, untriggered, init: init_bits, goal_pos, goal_neg })
    }

    fn is_goal(&self, s: &[u64]) -> bool {
        self.goal_pos.iter().all(|&g| test(s, g)) && self.goal_neg.iter().all(|&g| !test(s, g))
    }

    fn unsatisfied(&self, s: &[u64]) -> usize {
        self.goal_pos.iter().filter(|&&g| !test(s, g)).count() + self.goal_neg.iter().filter(|&&g| test(s, g)).count()
    }

    fn applicable(&self, a: &CompactAction, s: &[u64]) -> bool {
        a.pre_pos.iter().all(|&p| test(s, p)) && a.pre_neg.iter().all(|&p| !test(s, p))
    }

    /// Applicable actions in ground order.
    fn successors(&self, s: &[u64], out: &mut Vec<u32>) {
        out.clear();
        for (w, &word) in s.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros();
                bits &= bits - 1;
                let atom = w * 64 + b as usize;
                if let Some(bucket) = self.by_trigger.get(atom) {
                    out.extend(bucket.iter().copied().filter(|&i| self.applicable(&self.actions[i as usize], s)));
                }
            }
        }
        out.extend(self.untriggered.iter().copied().filter(|&i| self.applicable(&self.actions[i as usize], s)));
        out.sort_unstable();
    }

    fn apply(&self, a: u32, s: &[u64]) -> Bits {
        let a = &self.actions[a as usize];
        let mut next: Bits = s.into();
        for &d in &a.del {
            clear(&mut next, d);
        }
        for &x in &a.add {
            set(&mut next, x);
        }
        next
    }
}

struct Node {
    parent: u32,
    action: u32,
    depth: u32,
}

fn extract(task: &CompactTask, nodes: &[Node], mut n: u32) -> Plan {
    let mut steps = Vec::new();
    while n != 0 {
        let node = &nodes[n as usize];
        steps.push(task.keys[node.action as usize].clone());
        n = node.parent;
    }
    steps.reverse();
    Plan::new(steps)
}

enum Outcome {
    Found(Plan),
    /// Reachable space within the depth bound is exhausted.
    Exhausted {
        truncated: bool,
    },
    Budget,
}

fn bfs(task: &CompactTask, budget: usize, depth_bound: usize, expansions: &mut usize) -> Outcome {
    let mut nodes = vec![Node { parent: 0, action: 0, depth: 0 }];
    let mut states: Vec<Bits> = vec![task.init.clone()];
    let mut seen: HashSet<Bits> = HashSet::from([task.init.clone()]);
    let mut queue = VecDeque::from([0u32]);
    let mut succ = Vec::new();
    let mut truncated = false;
    while let Some(n) = queue.pop_front() {
        if nodes[n as usize].depth as usize >= depth_bound {
            truncated = true;
            continue;
        }
        if *expansions >= budget {
            return Outcome::Budget;
        }
        *expansions += 1;
        task.successors(&states[n as usize], &mut succ);
        for &a in &succ {
            let next = task.apply(a, &states[n as usize]);
            if seen.contains(&next) {
                continue;
            }
            let id = nodes.len() as u32;
            nodes.push(Node { parent: n, action: a, depth: nodes[n as usize].depth + 1 });
            if task.is_goal(&next) {
                return Outcome::Found(extract(task, &nodes, id));
            }
            seen.insert(next.clone());
            states.push(next);
            queue.push_back(id);
        }
    }
    Outcome::Exhausted { truncated }
}

fn gbfs(task: &CompactTask, budget: usize, max_len: usize, expansions: &mut usize) -> Outcome {
    let mut nodes = vec![Node { parent: 0, action: 0, depth: 0 }];
    let mut states: Vec<Bits> = vec![task.init.clone()];
    let mut seen: HashSet<Bits> = HashSet::from([task.init.clone()]);
    let mut heap = BinaryHeap::from([Reverse((task.unsatisfied(&task.init), 0u32))]);
    let mut succ = Vec::new();
    let mut truncated = false;
    while let Some(Reverse((_, n))) = heap.pop() {
        if nodes[n as usize].depth as usize >= max_len {
            truncated = true;
            continue;
        }
        if *expansions >= budget {
            return Outcome::Budget;
        }
        *expansions += 1;
        task.successors(&states[n as usize], &mut succ);
        for &a in &succ {
            let next = task.apply(a, &states[n as usize]);
            if seen.contains(&next) {
                continue;
            }
            let id = nodes.len() as u32;
            nodes.push(Node { parent: n, action: a, depth: nodes[n as usize].depth + 1 });
            if task.is_goal(&next) {
                return Outcome::Found(extract(task, &nodes, id));
            }
            // Node ids grow monotonically, so equal heuristic values pop first-in-first-out.
            heap.push(Reverse((task.unsatisfied(&next), id)));
            seen.insert(next.clone());
            states.push(next);
        }
    }
    Outcome::Exhausted { truncated }
}

/// Finds a plan for `problem`. Plans of length up to [`BFS_DEPTH`] are shortest; longer plans
/// come from the greedy fallback and carry no optimality guarantee.
///
/// Breadth-first search may use up to half of `max_expansions` (rounded up); the greedy
/// fallback gets whatever remains.
pub fn solve_reference(domain: &Domain, problem: &Problem, limits: SearchLimits) -> Result<Plan, SearchError> {
    if limits.max_expansions == 0 || limits.max_plan_length == 0 {
        return Err(SearchError::BadLimits);
    }
    let task = CompactTask::build(domain, problem).ok_or(SearchError::Unsolvable)?;
    if task.is_goal(&task.init) {
        return Ok(Plan::default());
    }
    let mut expansions = 0;
    let bfs_budget = limits.max_expansions.div_ceil(2);
    let depth_bound = BFS_DEPTH.min(limits.max_plan_length);
    match bfs(&task, bfs_budget, depth_bound, &mut expansions) {
        Outcome::Found(p) => return Ok(p),
        Outcome::Exhausted { truncated: false } => return Err(SearchError::Unsolvable),
        Outcome::Exhausted { truncated: true } if depth_bound == limits.max_plan_length => return Err(SearchError::Unsolvable),
        _ => {}
    }
    match gbfs(&task, limits.max_expansions, limits.max_plan_length, &mut expansions) {
        Outcome::Found(p) => Ok(p),
        Outcome::Exhausted { .. } => Err(SearchError::Unsolvable),
        Outcome::Budget => Err(SearchError::LimitExceeded { expansions }),
    }
}
