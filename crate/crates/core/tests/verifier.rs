use fondgen::deadend::label_model;
use fondgen::pddl::load_task;
use fondgen::policy::{parse_policy, ConcretePolicy, GeneralPolicy};
use fondgen::state_space::{expand_model, FondModel, Label, DEFAULT_STATE_LIMIT};
use fondgen::verifier::{certificate_failure, parse_certificate, simulate_check, verify_policy, Reason, DEFAULT_MAX_STEPS};
use fondgen_benchmarks::{self as bench, policies, Instance};
use std::sync::Arc;

fn model(inst: &Instance) -> FondModel {
    let task = load_task(inst.domain, &inst.problem).unwrap();
    label_model(&expand_model(Arc::new(task), DEFAULT_STATE_LIMIT).unwrap()).model
}

fn certificate_holds(policy: &GeneralPolicy, m: &FondModel, cert: &str) -> bool {
    let concrete = ConcretePolicy::project(policy, m).unwrap();
    certificate_failure(&concrete, m, &parse_certificate(cert).unwrap()).unwrap().is_none()
}

#[test]
fn acrobatics_policy_and_certificate() {
    let policy = parse_policy(policies::ACROBATICS).unwrap();
    for n in 1..=10 {
        let m = model(&bench::acrobatics(n));
        assert!(verify_policy(&policy, &m).unwrap().solved, "acrobatics-{n}");
        assert!(certificate_holds(&policy, &m, policies::ACROBATICS_CERT), "acrobatics-{n}");
    }
}

#[test]
fn dropping_the_acrobatics_constraint_walks_into_a_dead_end() {
    let policy = parse_policy(&policies::without_constraints(policies::ACROBATICS)).unwrap();
    let m = model(&bench::acrobatics(3));
    let v = verify_policy(&policy, &m).unwrap();
    let Reason::ReachesDeadEnd(t) = v.reason else { panic!("{}", v.reason) };
    assert!(t.replays_on(&m));
    assert_eq!(t.states[0], m.init);
    assert_eq!(m.label(t.last()), Some(Label::Dead));
}

#[test]
fn islands_policy_and_certificates() {
    let policy = parse_policy(policies::ISLANDS).unwrap();
    for inst in bench::islands_suite() {
        let m = model(&inst);
        assert!(verify_policy(&policy, &m).unwrap().solved, "{}", inst.name);
        assert!(certificate_holds(&policy, &m, policies::ISLANDS_CERT), "{}", inst.name);
        let monkeys: usize = inst.name.rsplit('-').next().unwrap().parse().unwrap();
        assert_eq!(certificate_holds(&policy, &m, policies::ISLANDS_CERT_SHORT), monkeys == 0, "{}", inst.name);
    }
}

#[test]
fn blocks_policy_and_certificate() {
    let policy = parse_policy(policies::BLOCKS).unwrap();
    for n in 3..=7 {
        let m = model(&bench::blocks(n, n as u64));
        assert!(verify_policy(&policy, &m).unwrap().solved, "blocks-{n}");
        assert!(certificate_holds(&policy, &m, policies::BLOCKS_CERT), "blocks-{n}");
    }
}

#[test]
fn doors_reference_policy_gets_stuck_next_to_an_open_final_door() {
    let policy = parse_policy(policies::DOORS).unwrap();
    assert!(verify_policy(&policy, &model(&bench::doors(2))).unwrap().solved);
    for n in 3..=6 {
        let m = model(&bench::doors(n));
        let v = verify_policy(&policy, &m).unwrap();
        let Reason::Stuck(t) = &v.reason else { panic!("doors-{n}: {}", v.reason) };
        let state = m.state_string(t.last());
        assert!(state.contains("hold-key()") && state.contains(&format!("player-at(r{})", n - 1)), "{state}");
        assert!(state.contains(&format!("open(d{})", n - 1)), "{state}");
    }
}

#[test]
fn lottery_passes_simulation_but_not_verification() {
    let inst = bench::lottery();
    let policy = parse_policy(policies::LOTTERY).unwrap();
    let task = load_task(inst.domain, &inst.problem).unwrap();
    assert!(simulate_check(&policy, &task, 10, 0, DEFAULT_MAX_STEPS).unwrap());
    let v = verify_policy(&policy, &model(&inst)).unwrap();
    assert!(matches!(v.reason, Reason::ReachesDeadEnd(_)), "{}", v.reason);
    // enough runs hit the losing roll
    assert!(!simulate_check(&policy, &task, 1000, 0, DEFAULT_MAX_STEPS).unwrap());
}
