use fondgen_benchmarks::{self as bench, policies};
use fondgen_cli::run_cli;
use std::path::{Path, PathBuf};

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn acrobatics(sizes: std::ops::RangeInclusive<usize>) -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("domain.pddl"), bench::domains::ACROBATICS).unwrap();
        for n in sizes {
            std::fs::write(root.join(format!("p{n:02}.pddl")), bench::acrobatics(n).problem).unwrap();
        }
        std::fs::write(root.join("policy.txt"), policies::ACROBATICS).unwrap();
        std::fs::write(root.join("nob1.txt"), policies::without_constraints(policies::ACROBATICS)).unwrap();
        std::fs::write(root.join("cert.txt"), policies::ACROBATICS_CERT).unwrap();
        Fixture { _dir: dir, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).display().to_string()
    }

    fn problems(&self) -> Vec<String> {
        let mut v: Vec<String> = std::fs::read_dir(&self.root)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with('p') && p.extension().is_some_and(|e| e == "pddl"))
            .map(|p| p.display().to_string())
            .collect();
        v.sort();
        v
    }
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = run_cli(std::iter::once("fondgen").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn with_problems<'a>(mut args: Vec<&'a str>, problems: &'a [String]) -> Vec<&'a str> {
    args.push("--problems");
    args.extend(problems.iter().map(String::as_str));
    args
}

#[test]
fn verify_exact_passes_and_ablation_fails() {
    let f = Fixture::acrobatics(1..=3);
    let ps = f.problems();
    let (domain, policy, nob1) = (f.path("domain.pddl"), f.path("policy.txt"), f.path("nob1.txt"));
    let (code, out) = run(&with_problems(vec!["verify", "--domain", &domain, "--policy", &policy], &ps));
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with(": solved")).count(), 3);
    let (code, out) = run(&with_problems(vec!["verify", "--exact", "--witness", "--domain", &domain, "--policy", &nob1], &ps));
    assert_eq!(code, 1);
    assert!(out.contains("reaches-dead-end"), "{out}");
    assert!(out.contains("-->"), "{out}");
}

#[test]
fn verify_with_certificate_and_simulation() {
    let f = Fixture::acrobatics(1..=2);
    let ps = f.problems();
    let (domain, policy, cert) = (f.path("domain.pddl"), f.path("policy.txt"), f.path("cert.txt"));
    let (code, out) = run(&with_problems(vec!["verify", "--certificate", &cert, "--domain", &domain, "--policy", &policy], &ps));
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("certificate holds"));
    let (code, out) = run(&with_problems(vec!["verify", "--simulate", "--domain", &domain, "--policy", &policy], &ps));
    assert_eq!(code, 0, "{out}");
    let (code, _) = run(&with_problems(vec!["verify", "--simulate", "--exact", "--domain", &domain, "--policy", &policy], &ps));
    assert_eq!(code, 2);
}

#[test]
fn format_errors_exit_with_two() {
    let f = Fixture::acrobatics(1..=1);
    let ps = f.problems();
    let domain = f.path("domain.pddl");
    // a policy over predicates the domain does not have
    std::fs::write(f.root.join("bad.txt"), "mode: state\nfeature X bool:nullary(no-such-predicate)\nrule: X -> !X\n").unwrap();
    let bad = f.path("bad.txt");
    assert_eq!(run(&with_problems(vec!["verify", "--domain", &domain, "--policy", &bad], &ps)).0, 2);
    std::fs::write(f.root.join("garbled.txt"), "rule: -> \n").unwrap();
    let garbled = f.path("garbled.txt");
    assert_eq!(run(&with_problems(vec!["simulate", "--domain", &domain, "--policy", &garbled], &ps)).0, 2);
    assert_eq!(run(&["verify", "--domain", &domain]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
    let missing = f.path("missing.pddl");
    assert_eq!(run(&["deadends", "--domain", &missing, "--problems", &missing]).0, 2);
}

#[test]
fn deadends_and_features() {
    let f = Fixture::acrobatics(2..=2);
    let ps = f.problems();
    let domain = f.path("domain.pddl");
    let (code, out) = run(&with_problems(vec!["deadends", "--list", "--domain", &domain], &ps));
    assert_eq!(code, 0);
    assert!(out.contains("init=alive"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("  ")));
    let wcnf = f.path("theory.wcnf");
    let (code, out) = run(&with_problems(vec!["features", "--cmax", "3", "--dump-wcnf", &wcnf, "--domain", &domain], &ps));
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "1\tbool:nullary(up)"), "{out}");
    let text = std::fs::read_to_string(Path::new(&wcnf)).unwrap();
    assert!(text.lines().any(|l| l.starts_with("p wcnf ")));
}

#[test]
fn learn_from_flags_and_config() {
    let f = Fixture::acrobatics(1..=4);
    let ps = f.problems();
    let domain = f.path("domain.pddl");
    let outdir = f.path("out");
    let (code, out) = run(&with_problems(vec!["learn", "--domain", &domain, "--cmax", "3", "--output", &outdir], &ps));
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("mode: state"));
    assert!(out.contains("c_Φ"));
    assert!(Path::new(&outdir).join("policy.txt").exists());

    let list: Vec<String> = ps.iter().map(|p| format!("\"{p}\"")).collect();
    std::fs::write(f.root.join("run.toml"), format!("domain = \"domain.pddl\"\nproblems = [{}]\nc_max = 1\n", list.join(", "))).unwrap();
    let config = f.path("run.toml");
    // c_max 1 is too small; the flag overrides the file
    let (code, out) = run(&["learn", "--config", &config, "--format", "json"]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("\"failure\":\"C\""), "{out}");
    let (code, _) = run(&["learn", "--config", &config, "--cmax", "3", "--mode", "transition"]);
    assert_eq!(code, 0);
}
