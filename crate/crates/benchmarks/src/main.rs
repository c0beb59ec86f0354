//! Writes the benchmark families as PDDL files:
//! `fondgen-fixtures <out-dir> [family...]`.

use fondgen_benchmarks::{family, policies, FAMILIES};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{env, fs, io};

fn write_family(out: &Path, name: &str) -> io::Result<usize> {
    let Some(instances) = family(name) else {
        return Err(io::Error::new(io::ErrorKind::NotFound, format!("unknown family {name}")));
    };
    let dir = out.join(name);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("domain.pddl"), instances[0].domain)?;
    for inst in &instances {
        fs::write(dir.join(format!("{}.pddl", inst.name)), &inst.problem)?;
    }
    let extra: &[(&str, &str)] = match name {
        "acrobatics" => &[("policy.txt", policies::ACROBATICS), ("certificate.txt", policies::ACROBATICS_CERT)],
        "doors" => &[("policy.txt", policies::DOORS)],
        "islands" => &[("policy.txt", policies::ISLANDS), ("certificate.txt", policies::ISLANDS_CERT)],
        "blocks3ops" => &[("policy.txt", policies::BLOCKS), ("certificate.txt", policies::BLOCKS_CERT)],
        "detour" => &[("policy.txt", policies::DETOUR)],
        _ => &[],
    };
    for (file, text) in extra {
        fs::write(dir.join(file), text)?;
    }
    Ok(instances.len())
}

fn main() -> ExitCode {
    let mut args = env::args().skip(1);
    let Some(out) = args.next().map(PathBuf::from) else {
        eprintln!("usage: fondgen-fixtures <out-dir> [family...]\nfamilies: {}", FAMILIES.join(", "));
        return ExitCode::from(2);
    };
    let mut chosen: Vec<String> = args.collect();
    if chosen.is_empty() {
        chosen = FAMILIES.iter().map(|s| s.to_string()).collect();
    }
    for name in &chosen {
        match write_family(&out, name) {
            Ok(n) => println!("{name}: {n} problems"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::SUCCESS
}
