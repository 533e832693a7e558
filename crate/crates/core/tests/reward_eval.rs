mod common;

use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::{TcpListener, TcpStream};

use common::*;
use plancorpus::augment::AugmentConfig;
use plancorpus::corpus::{build_instance, Split};
use plancorpus::eval::*;
use plancorpus::exec::{judge, Plan};
use plancorpus::fixtures::cases;
use plancorpus::nl::{render_response, ResponseSyntax};
use plancorpus::pddl::{parse_problem, ActionKey};
use plancorpus::reward::*;
use plancorpus::rng::derive_rng;

fn nine() -> (&'static plancorpus::catalog::CatalogEntry, plancorpus::pddl::Problem, Plan) {
    let e = entry("blocksworld");
    let p = parse_problem(cases::BLOCKSWORLD_NINE_PROBLEM, &e.domain).unwrap();
    (e, p, Plan::from_val(cases::BLOCKSWORLD_NINE_PLAN).unwrap())
}

fn key(s: &str, args: &[&str]) -> ActionKey {
    ActionKey::new(s, args.iter().copied())
}

#[test]
fn lccs_worked_example() {
    let p = |xs: &[&str]| -> Plan { xs.iter().map(|x| key(x, &[])).collect() };
    assert_eq!(lccs_len(&p(&["w", "x", "b", "c", "d"]), &p(&["b", "c", "e", "d"])), 2);
}

#[test]
fn score_examples() {
    let (e, problem, reference) = nine();
    assert_eq!(score(&e.domain, &problem, &reference, &reference).unwrap().reward, 1.0);

    let four = Plan::new(reference.actions[..4].to_vec());
    let small = plancorpus::exec::with_init(&problem, &problem.init_state());
    let mut small = small.clone();
    // goal reached by the first four steps
    small.goal = vec![plancorpus::pddl::Literal::pos(plancorpus::pddl::Atom::new("on-table", ["black"]))];
    assert!(judge(&e.domain, &small, &four).valid);
    let empty = score(&e.domain, &small, &Plan::default(), &four).unwrap();
    assert_eq!((empty.reward, empty.valid), (0.0, false));

    // shares the run (put-down blue)(unstack black green) with the reference, then stops
    let generated = Plan::new(vec![four.actions[1].clone(), four.actions[2].clone()]);
    let s = score(&e.domain, &small, &generated, &four).unwrap();
    assert_eq!((s.reward, s.lccs_len, s.valid), (0.5, 2, false));

    let bad_reference = Plan::new(vec![key("pick-up", &["red"])]);
    assert!(matches!(score(&e.domain, &problem, &reference, &bad_reference), Err(RewardError::InvalidReference(_))));
}

#[test]
fn multi_reference_takes_the_best() {
    let (e, problem, reference) = nine();
    let mut generated = reference.clone();
    generated.actions.truncate(10);
    let single = score(&e.domain, &problem, &generated, &reference).unwrap();
    let multi = score_multi(&e.domain, &problem, &generated, &[reference.clone(), reference.clone()]).unwrap();
    assert_eq!(single, multi);
    assert!(matches!(score_multi(&e.domain, &problem, &generated, &[]), Err(RewardError::NoReference)));
}

fn instances(n: usize) -> Vec<plancorpus::corpus::CorpusInstance> {
    let mut rng = derive_rng(5, &["serve"]);
    let syntax = ResponseSyntax::angle();
    (0..n)
        .map(|i| {
            let d = SHIPPED[i % SHIPPED.len()];
            let (problem, plan) = walk_instance_retry(d, 3, 8, 2, &mut rng);
            build_instance(&format!("{d}-in_distrib-{i:05}"), d, Split::InDistrib, &problem, &plan, &AugmentConfig::default(), &syntax).unwrap()
        })
        .collect()
}

fn requests(insts: &[plancorpus::corpus::CorpusInstance]) -> Vec<ScoreRequest> {
    let mut out = Vec::new();
    for i in insts {
        out.push(ScoreRequest { id: format!("{}/full", i.id), instance: Some(i.id.clone()), response: Some(i.response.clone()), ..Default::default() });
        out.push(ScoreRequest { id: format!("{}/empty", i.id), instance: Some(i.id.clone()), plan: Some(String::new()), ..Default::default() });
        let first: String = i.reference_plan.lines().next().unwrap().to_string();
        out.push(ScoreRequest { id: format!("{}/first", i.id), instance: Some(i.id.clone()), plan: Some(first), ..Default::default() });
        let garbled = i.response.replacen("\n", "\nflap the wings of object 9\n", 2);
        out.push(ScoreRequest { id: format!("{}/garbled", i.id), instance: Some(i.id.clone()), response: Some(garbled), ..Default::default() });
    }
    out
}

#[test]
fn serve_matches_sequential_scoring() {
    let insts = instances(12);
    let ctx = ServeContext::new(insts.clone(), ResponseSyntax::angle());
    let reqs = requests(&insts);
    let mut input = String::new();
    for r in &reqs {
        input.push_str(&serde_json::to_string(r).unwrap());
        input.push('\n');
    }
    input.push_str("{not json\n");
    input.push_str("{\"id\":\"ghost\",\"instance\":\"nope\",\"plan\":\"\"}\n");

    let mut out = Vec::new();
    let n = serve(Cursor::new(input), &mut out, &ctx, 4).unwrap();
    assert_eq!(n, reqs.len() + 2);
    let mut got: std::collections::HashMap<String, ScoreResponse> = std::collections::HashMap::new();
    for line in String::from_utf8(out).unwrap().lines() {
        let r: ScoreResponse = serde_json::from_str(line).unwrap();
        got.insert(r.id().to_string(), r);
    }
    for r in &reqs {
        let s = score_request(r, &ctx).unwrap();
        let expected = ScoreResponse::Scored { id: r.id.clone(), reward: s.reward, valid: s.valid, lccs_len: s.lccs_len, ref_len: s.ref_len };
        assert_eq!(got[&r.id], expected);
        if r.id.ends_with("/full") {
            assert_eq!(s.reward, 1.0);
        }
        if r.id.ends_with("/empty") {
            assert_eq!(s.reward, 0.0);
        }
        if r.id.ends_with("/garbled") {
            // the parseable prefix is a single step
            assert!(!s.valid && s.lccs_len <= 1);
        }
    }
    assert!(matches!(&got[""], ScoreResponse::Failed { .. }));
    assert!(matches!(&got["ghost"], ScoreResponse::Failed { error, .. } if error.contains("unknown instance")));
}

#[test]
fn wire_field_names() {
    let r = ScoreResponse::Scored { id: "a".into(), reward: 0.5, valid: false, lccs_len: 1, ref_len: 2 };
    assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"id":"a","reward":0.5,"valid":false,"lccs_len":1,"ref_len":2}"#);
}

#[test]
fn inline_pddl_request() {
    let (e, problem, reference) = nine();
    let ctx = ServeContext::default();
    let response = render_response(&reference, &e.domain, &problem, &e.templates, &ResponseSyntax::angle()).unwrap();
    let req = ScoreRequest {
        id: "x".into(),
        domain: Some(e.domain.to_string()),
        problem: Some(cases::BLOCKSWORLD_NINE_PROBLEM.into()),
        response: Some(response),
        reference: Some(reference.to_val()),
        ..Default::default()
    };
    assert_eq!(score_request(&req, &ctx).unwrap().reward, 1.0);
    let both = ScoreRequest { instance: Some("y".into()), ..req.clone() };
    assert!(matches!(score_request(&both, &ctx), Err(ServeError::Malformed(_))));
    let no_ref = ScoreRequest { reference: None, ..req };
    assert!(matches!(score_request(&no_ref, &ctx), Err(ServeError::Reward(RewardError::NoReference))));
}

#[test]
fn tcp_service_answers_each_line() {
    let insts = instances(3);
    let ctx = ServeContext::new(insts.clone(), ResponseSyntax::angle());
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let reqs = requests(&insts);
    std::thread::scope(|s| {
        s.spawn(|| serve_tcp(&listener, &ctx, 2, Some(1)).unwrap());
        let mut stream = TcpStream::connect(addr).unwrap();
        for r in &reqs {
            writeln!(stream, "{}", serde_json::to_string(r).unwrap()).unwrap();
        }
        stream.shutdown(std::net::Shutdown::Write).unwrap();
        let lines: Vec<String> = BufReader::new(stream).lines().map(Result::unwrap).collect();
        assert_eq!(lines.len(), reqs.len());
    });
}

#[test]
fn rates_and_parse_failure_policy() {
    let o = |e, v, g| Outcome { executable: e, valid: v, goal_satisfiable: g };
    let recs = vec![ResultRecord::parsed("a", 0, 5, o(true, true, true)), ResultRecord::failed("b", 0, "x")];
    let all = rates(&recs, ParseFailurePolicy::AllFalse).unwrap();
    assert_eq!((all.validity, all.total), (0.5, 2));
    let ex = rates(&recs, ParseFailurePolicy::Exclude).unwrap();
    assert_eq!((ex.validity, ex.total), (1.0, 1));
    assert!(matches!(rates(&[], ParseFailurePolicy::AllFalse), Err(EvalError::Empty)));

    // a valid 3-action plan: validity can exceed executability as defined
    let short = [ResultRecord::parsed("s", 0, 3, o(true, true, true))];
    let r = rates(&short, ParseFailurePolicy::AllFalse).unwrap();
    assert!(r.validity > r.executability);
}

#[test]
fn pass_at_k_fixture_and_errors() {
    let o = |v: bool| Outcome { executable: v, valid: v, goal_satisfiable: v };
    let fl = [[false, true], [false, false], [true, true], [false, false]];
    let groups: Vec<Vec<ResultRecord>> =
        fl.iter().enumerate().map(|(g, f)| f.iter().enumerate().map(|(s, v)| ResultRecord::parsed(format!("{g}"), s, 4, o(*v))).collect()).collect();
    assert_eq!(pass_at_k(&groups, 2).unwrap(), 0.5);
    assert!(matches!(pass_at_k(&groups, 3), Err(EvalError::GroupTooSmall { k: 3, have: 2, .. })));
    assert!(matches!(pass_at_k(&groups, 0), Err(EvalError::ZeroK)));
}

#[test]
fn probing_ties_and_undefined_denominators() {
    let p = |w, a, b| ProbeRecord { is_wrong: w, p_wrong: a, p_continue: b };
    let perfect = probing_scores(&[p(true, 0.9, 0.1), p(false, 0.1, 0.9)]).unwrap();
    assert_eq!((perfect.precision, perfect.recall), (1.0, 1.0));
    let tie = probing_scores(&[p(true, 0.5, 0.5), p(true, 0.8, 0.2)]).unwrap();
    assert_eq!(tie.recall, 0.5);
    assert!(matches!(probing_scores(&[p(true, 0.1, 0.9)]), Err(EvalError::UndefinedPrecision)));
    assert!(matches!(probing_scores(&[p(false, 0.9, 0.1)]), Err(EvalError::UndefinedRecall)));
    assert!(matches!(probing_scores(&[p(false, 1.5, 0.1)]), Err(EvalError::BadProbability(_))));
}

#[test]
fn continuation_prompt_boundaries() {
    let mut rng = derive_rng(9, &["cont"]);
    let syntax = ResponseSyntax::angle();
    let (problem, plan) = walk_instance_retry("grippers", 6, 20, 20, &mut rng);
    let inst = build_instance("grippers-long-00000", "grippers", Split::Long, &problem, &plan, &AugmentConfig::default(), &syntax).unwrap();
    let zero = continuation_prompt(&inst, 0, &syntax).unwrap();
    assert_eq!(zero.query, inst.query);
    assert_eq!(zero.check, inst.resolve().unwrap().problem);
    let c = continuation_prompt(&inst, 15, &syntax).unwrap();
    let trace = plancorpus::exec::execute(&entry("grippers").domain, &zero.check, &Plan::new(plan.actions[..15].to_vec())).unwrap();
    assert_eq!(c.check.init_state(), *trace.final_state());
    assert!(c.query.starts_with(&inst.query));
    assert!(matches!(continuation_prompt(&inst, plan.len(), &syntax), Err(EvalError::PrefixTooLong { .. })));
}

#[test]
fn evaluation_report_shape() {
    let insts = instances(4);
    let map = insts.iter().map(|i| (i.id.clone(), i.clone())).collect();
    let mut outputs = Vec::new();
    for i in &insts {
        for s in 0..5 {
            let response = if s == 2 { i.response.clone() } else { "My plan is as follows:\n[PLAN]\n[PLAN END]".into() };
            outputs.push(ModelOutput { id: i.id.clone(), sample: s, response, prefix: 0 });
        }
    }
    let records = evaluate_outputs(&outputs, &map, &ResponseSyntax::angle()).unwrap();
    let rows = metric_rows(&records, &[1, 3, 5], ParseFailurePolicy::AllFalse).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.pass_at[&1], Some(0.0));
        assert_eq!(r.pass_at[&3], Some(1.0));
        assert_eq!(r.pass_at[&5], Some(1.0));
    }
    let table = render_table(&rows);
    let header = table.lines().next().unwrap();
    for col in ["valid.", "exec.", "goal-sat.", "pass@1", "pass@3", "pass@5"] {
        assert!(header.contains(col), "{header}");
    }
}
