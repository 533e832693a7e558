#![allow(dead_code)]

use plancorpus::catalog::{self, CatalogEntry};
use plancorpus::corpus::sample_problem;
use plancorpus::exec::{execute, Plan};
use plancorpus::pddl::{ground_actions, ActionKey, Atom, Domain, Literal, Problem, State};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SHIPPED: [&str; 10] = ["barman", "blocksworld", "childsnack", "depots", "driverlog", "grippers", "hanoi", "logistics", "satellite", "storage"];

pub fn entry(name: &str) -> &'static CatalogEntry {
    catalog::entry(name).unwrap_or_else(|| panic!("no catalog entry {name}"))
}

/// Up to `len` uniformly chosen applicable actions from the initial state (stops at dead ends).
pub fn random_walk(domain: &Domain, problem: &Problem, len: usize, rng: &mut ChaCha8Rng) -> Plan {
    let ground = ground_actions(domain, problem);
    let mut state = problem.init_state();
    let mut plan = Vec::new();
    for _ in 0..len {
        let options: Vec<_> = ground.iter().filter(|a| state.satisfies_all(&a.precond)).collect();
        let Some(a) = options.choose(rng) else { break };
        state = state.apply(a);
        plan.push(a.key());
    }
    Plan::new(plan)
}

/// A sampled problem whose goal is read off the end of a random walk, so the walk is a valid plan.
/// Returns `None` when the walk is shorter than `min_len`.
pub fn walk_instance(domain_name: &str, size: usize, len: usize, min_len: usize, rng: &mut ChaCha8Rng) -> Option<(Problem, Plan)> {
    let e = entry(domain_name);
    let mut problem = sample_problem(domain_name, size, rng.gen())?;
    let plan = random_walk(&e.domain, &problem, len, rng);
    if plan.len() < min_len {
        return None;
    }
    let last: State = execute(&e.domain, &problem, &plan).expect("walk executes").final_state().clone();
    let init = problem.init_state();
    let mut fresh: Vec<Atom> = last.atoms().iter().filter(|a| !init.contains(a)).cloned().collect();
    if fresh.is_empty() {
        fresh = last.atoms().iter().cloned().collect();
    }
    fresh.shuffle(rng);
    let k = rng.gen_range(1..=fresh.len().min(4));
    problem.goal = fresh.into_iter().take(k).map(Literal::pos).collect();
    problem.goal.sort();
    Some((problem, plan))
}

/// Keeps sampling until a walk of at least `min_len` steps comes out.
pub fn walk_instance_retry(domain_name: &str, size: usize, len: usize, min_len: usize, rng: &mut ChaCha8Rng) -> (Problem, Plan) {
    for _ in 0..200 {
        if let Some(x) = walk_instance(domain_name, size, len, min_len, rng) {
            return x;
        }
    }
    panic!("{domain_name}: no walk of {min_len} steps");
}

/// Random edits: drop, duplicate, swap or replace a step with an arbitrary ground action.
pub fn mutate(domain: &Domain, problem: &Problem, plan: &Plan, rng: &mut ChaCha8Rng) -> Plan {
    let ground: Vec<ActionKey> = ground_actions(domain, problem).iter().map(|g| g.key()).collect();
    let mut steps = plan.actions.clone();
    for _ in 0..rng.gen_range(1..=3) {
        match rng.gen_range(0..4) {
            0 if !steps.is_empty() => {
                let i = rng.gen_range(0..steps.len());
                steps.remove(i);
            }
            1 if !steps.is_empty() => {
                let i = rng.gen_range(0..steps.len());
                let s = steps[i].clone();
                steps.insert(i, s);
            }
            2 if steps.len() >= 2 => {
                let (i, j) = (rng.gen_range(0..steps.len()), rng.gen_range(0..steps.len()));
                steps.swap(i, j);
            }
            _ if !ground.is_empty() => {
                let a = ground.choose(rng).unwrap().clone();
                if steps.is_empty() {
                    steps.push(a);
                } else {
                    let i = rng.gen_range(0..steps.len());
                    steps[i] = a;
                }
            }
            _ => {}
        }
    }
    Plan::new(steps)
}

/// Longest common contiguous run by checking every pair of start positions.
pub fn brute_lccs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut best = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            best = best.max(k);
        }
    }
    best
}
