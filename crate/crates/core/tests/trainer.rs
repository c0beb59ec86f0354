use fondgen::learner::Mode;
use fondgen::policy::parse_policy;
use fondgen::trainer::{emit_report, incremental_train, train_suite, FailureClass, InstanceStatus, ReportFormat, RunConfig, RunReport, Suite};
use fondgen_benchmarks::{self as bench, Instance};
use std::path::PathBuf;

fn suite(insts: &[Instance]) -> Suite {
    Suite { domain: insts[0].domain.to_string(), problems: insts.iter().map(|i| (i.name.clone(), i.problem.clone())).collect() }
}

fn config(c_max: usize) -> RunConfig {
    RunConfig { c_max, ..RunConfig::new("domain.pddl", vec![PathBuf::from("p.pddl")]) }
}

fn without_timing(mut r: RunReport) -> RunReport {
    r.t_solve_secs = 0.0;
    r.t_wall_secs = 0.0;
    r.mem_mb = None;
    r
}

#[test]
fn acrobatics_suite_trains_on_few_instances() {
    let insts: Vec<Instance> = (1..=10).rev().map(bench::acrobatics).collect();
    let (policy, report) = train_suite(&config(4), &suite(&insts)).unwrap();
    assert_eq!(report.failure, None);
    assert_eq!(report.problems, 10);
    assert_eq!(report.solved, 10);
    assert!(report.training < report.problems);
    assert_eq!(report.instances[0].name, "acrobatics-1");
    assert!(report.instances[0].training);
    assert_eq!(report.num_features, policy.features.len());
    assert_eq!(report.total_cost, policy.features.iter().map(|f| f.weight() as u64).sum::<u64>());
    assert!(report.instances.iter().all(|i| i.status == InstanceStatus::Solved));
    // the written policy reads back
    assert_eq!(parse_policy(&policy.to_string()).unwrap(), policy);
}

#[test]
fn runs_are_reproducible() {
    let insts: Vec<Instance> = (1..=4).map(bench::acrobatics).collect();
    let a = train_suite(&config(3), &suite(&insts)).unwrap();
    let b = train_suite(&config(3), &suite(&insts)).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(without_timing(a.1), without_timing(b.1));
}

#[test]
fn doors_needs_more_than_complexity_one() {
    let insts: Vec<Instance> = (2..=4).map(bench::doors).collect();
    let (_, report) = train_suite(&config(1), &suite(&insts)).unwrap();
    assert_eq!(report.failure, Some(FailureClass::NoSolution));
    assert_eq!(report.training, 1);
    let table = emit_report(&report, ReportFormat::Table);
    let row: Vec<&str> = table.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(*row.last().unwrap(), "C");
}

#[test]
fn literal_budget_maps_to_class_i() {
    let insts = vec![bench::acrobatics(2)];
    let cfg = RunConfig { max_literals: Some(5), ..config(3) };
    let (_, report) = train_suite(&cfg, &suite(&insts)).unwrap();
    assert_eq!(report.failure, Some(FailureClass::TheoryTooLarge));
}

#[test]
fn state_limit_maps_to_class_m() {
    let insts = vec![bench::acrobatics(3)];
    let cfg = RunConfig { state_limit: 3, ..config(3) };
    let (_, report) = train_suite(&cfg, &suite(&insts)).unwrap();
    assert_eq!(report.failure, Some(FailureClass::Resources));
}

#[test]
fn report_formats() {
    let insts: Vec<Instance> = (1..=2).map(bench::acrobatics).collect();
    let (_, report) = train_suite(&config(3), &suite(&insts)).unwrap();
    let table = emit_report(&report, ReportFormat::Table);
    let header: Vec<&str> = table.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["|P|", "|T|", "|S|", "|O|_T", "|O|_P", "t_solve", "t_wall", "mem", "|F|", "|Φ|", "|C|", "k*", "c_Φ", "status"]);
    assert!(table.lines().nth(1).unwrap().ends_with("ok"));
    let json = emit_report(&report, ReportFormat::Json);
    assert_eq!(json.lines().count(), 1);
    let back: RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.instances, report.instances);
}

#[test]
fn config_from_toml() {
    let c = RunConfig::from_toml("domain = \"d.pddl\"\nproblems = [\"a.pddl\", \"b.pddl\"]\nmode = \"transition\"\nc_max = 6\n").unwrap();
    assert_eq!(c.mode, Mode::Transition);
    assert_eq!(c.c_max, 6);
    assert_eq!(c.trials, 10);
    assert!(RunConfig::from_toml("domain = \"d\"\nproblems = []\n").is_err());
    assert!(RunConfig::from_toml("domain = \"d\"\nproblems = [\"a\"]\nc_max = 0\n").is_err());
    assert!(RunConfig::from_toml("domain = \"d\"\nproblems = [\"a\"]\ncmax = 3\n").is_err());
}

#[test]
fn files_and_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let domain = dir.path().join("domain.pddl");
    std::fs::write(&domain, bench::domains::ACROBATICS).unwrap();
    let mut problems = Vec::new();
    for n in 1..=3 {
        let p = dir.path().join(format!("p{n}.pddl"));
        std::fs::write(&p, bench::acrobatics(n).problem).unwrap();
        problems.push(p);
    }
    let toml = "domain = \"domain.pddl\"\nproblems = [\"p1.pddl\", \"p2.pddl\", \"p3.pddl\"]\nc_max = 3\noutput_dir = \"out\"\n";
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(&cfg_path, toml).unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    assert_eq!(cfg.problems, problems);
    let (policy, report) = incremental_train(&cfg).unwrap();
    assert_eq!(report.solved, 3);
    let written = std::fs::read_to_string(dir.path().join("out/policy.txt")).unwrap();
    assert_eq!(parse_policy(&written).unwrap(), policy);
    assert!(dir.path().join("out/report.json").exists());
    assert!(std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap().contains("p3.pddl"));
}
