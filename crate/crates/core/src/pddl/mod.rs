//! Typed-STRIPS PDDL: parsing, the in-memory model, grounding and state update.
//!
//! The accepted subset is typed STRIPS with negative preconditions and equality.
//! Quantifiers, conditional effects, disjunctions and numeric fluents are rejected
//! when the source is parsed, with the offending construct named in the error.

mod error;
mod ground;
mod model;
mod parse;
mod print;
pub mod sexpr;

pub use error::PddlError;
pub(crate) use ground::ground_filtered;
pub use ground::{ground_actions, instantiate};
pub use model::*;
pub use parse::{parse_domain, parse_problem};

/// `(state \ del) ∪ add`; preconditions are not consulted.
pub fn apply(state: &State, action: &GroundAction) -> State {
    state.apply(action)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BW: &str = "(define (domain bw) (:requirements :strips :typing :equality)
      (:types block)
      (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block) (handempty) (holding ?x - block))
      (:action pick-up :parameters (?x - block)
        :precondition (and (clear ?x) (ontable ?x) (handempty))
        :effect (and (not (ontable ?x)) (not (clear ?x)) (not (handempty)) (holding ?x)))
      (:action stack :parameters (?x - block ?y - block)
        :precondition (and (holding ?x) (clear ?y) (not (= ?x ?y)))
        :effect (and (not (holding ?x)) (not (clear ?y)) (clear ?x) (handempty) (on ?x ?y))))";

    fn atom(p: &str, args: &[&str]) -> Atom {
        Atom::new(p, args.iter().copied())
    }

    #[test]
    fn apply_deletes_then_adds() {
        let d = parse_domain(BW).unwrap();
        let p = parse_problem("(define (problem p) (:domain bw) (:objects a - block) (:init) (:goal (holding a)))", &d).unwrap();
        let pick = instantiate(&d, &p, &ActionKey::new("pick-up", ["a"])).unwrap();
        let s = State::from_atoms([atom("clear", &["a"]), atom("ontable", &["a"]), atom("handempty", &[])]);
        let next = apply(&s, &pick);
        assert_eq!(next, State::from_atoms([atom("holding", &["a"])]));
        // input untouched
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn identity_action_and_readd() {
        let noop = GroundAction { schema: "noop".into(), args: vec![], precond: vec![], add: vec![], del: vec![] };
        let s = State::from_atoms([atom("handempty", &[])]);
        assert_eq!(apply(&s, &noop), s);
        let readd =
            GroundAction { schema: "touch".into(), args: vec![], precond: vec![], add: vec![atom("handempty", &[])], del: vec![atom("handempty", &[])] };
        let out = apply(&s, &readd);
        assert_eq!(out.atoms().iter().filter(|a| a.predicate == "handempty").count(), 1);
    }

    #[test]
    fn equality_prunes_groundings() {
        let d = parse_domain(BW).unwrap();
        let p = parse_problem("(define (problem p) (:domain bw) (:objects a b - block) (:init) (:goal (holding a)))", &d).unwrap();
        let g = ground_actions(&d, &p);
        let keys: Vec<String> = g.iter().map(|a| a.to_string()).collect();
        assert_eq!(keys, vec!["(pick-up a)", "(pick-up b)", "(stack a b)", "(stack b a)"]);
    }

    #[test]
    fn no_objects_no_groundings() {
        let d = parse_domain(BW).unwrap();
        let p = parse_problem("(define (problem p) (:domain bw) (:objects) (:init (handempty)) (:goal (handempty)))", &d).unwrap();
        assert!(ground_actions(&d, &p).is_empty());
    }

    #[test]
    fn instantiate_checks_arity_and_types() {
        let d = parse_domain(BW).unwrap();
        let p = parse_problem("(define (problem p) (:domain bw) (:objects a - block) (:init) (:goal (holding a)))", &d).unwrap();
        assert!(matches!(instantiate(&d, &p, &ActionKey::new("stack", ["a"])), Err(PddlError::Arity { .. })));
        assert!(matches!(instantiate(&d, &p, &ActionKey::new("fly", ["a"])), Err(PddlError::Undeclared { .. })));
        assert!(matches!(instantiate(&d, &p, &ActionKey::new("pick-up", ["z"])), Err(PddlError::Undeclared { .. })));
    }

    #[test]
    fn printed_model_reparses_equal() {
        let d = parse_domain(BW).unwrap();
        let again = parse_domain(&d.to_string()).unwrap();
        assert_eq!(d, again);
        let p =
            parse_problem("(define (problem p) (:domain bw) (:objects a b - block) (:init (clear a) (ontable a)) (:goal (and (on a b) (not (clear b)))))", &d)
                .unwrap();
        assert_eq!(p, parse_problem(&p.to_string(), &d).unwrap());
    }
}
