//! FOND benchmark domains, instance generators and reference policies.
//!
//! Every generator returns PDDL problem text for the matching domain constant
//! in [`domains`]. Generators are deterministic; the random ones take a seed.

pub mod domains;
pub mod policies;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A domain text together with one generated problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub domain: &'static str,
    pub problem: String,
}

impl Instance {
    fn new(name: String, domain: &'static str, problem: String) -> Self {
        Instance { name, domain, problem }
    }
}

fn problem(name: &str, domain: &str, objects: &[(Vec<String>, &str)], init: &[String], goal: &[String]) -> String {
    let mut s = format!("(define (problem {name})\n  (:domain {domain})\n");
    let objs: Vec<String> = objects.iter().filter(|(names, _)| !names.is_empty()).map(|(names, ty)| format!("{} - {ty}", names.join(" "))).collect();
    if !objs.is_empty() {
        s.push_str(&format!("  (:objects {})\n", objs.join(" ")));
    }
    s.push_str(&format!("  (:init {})\n", init.join(" ")));
    s.push_str(&format!("  (:goal (and {})))\n", goal.join(" ")));
    s
}

fn names(prefix: &str, range: impl Iterator<Item = usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

/// Beam with positions `p0..p(n+1)`; the ladder stands at `p0`, the goal is
/// to be up on the beam at the last position.
pub fn acrobatics(n: usize) -> Instance {
    assert!(n >= 1);
    let pos = names("p", 0..n + 2);
    let mut init = vec!["(position p0)".to_string(), "(ladder-at p0)".to_string()];
    for w in pos.windows(2) {
        init.push(format!("(next-fwd {} {})", w[0], w[1]));
        init.push(format!("(next-inv {} {})", w[1], w[0]));
    }
    let goal = [format!("(position {})", pos[n + 1]), "(up)".to_string()];
    let name = format!("acrobatics-{n}");
    let text = problem(&name, "acrobatics", &[(pos, "loc")], &init, &goal);
    Instance::new(name, domains::ACROBATICS, text)
}

/// `n` rooms in a row, all doors initially open, the key in the first room.
pub fn doors(n: usize) -> Instance {
    assert!(n >= 2);
    let rooms = names("r", 1..n + 1);
    let ds = names("d", 1..n);
    let mut init = vec!["(player-at r1)".to_string(), "(key-at r1)".to_string(), format!("(final-location r{n})")];
    for i in 1..n {
        init.push(format!("(door-out d{i} r{i})"));
        init.push(format!("(door-in d{i} r{})", i + 1));
        init.push(format!("(open d{i})"));
    }
    let goal = [format!("(player-at r{n})")];
    let name = format!("doors-{n}");
    let text = problem(&name, "doors", &[(rooms, "location"), (ds, "door")], &init, &goal);
    Instance::new(name, domains::DOORS, text)
}

/// Two islands of `n` locations each, joined by a one-way bridge whose
/// start is also the monkey drop location. Every location of the first
/// island except the bridge head has a swim road to the opposite location.
pub fn islands(n: usize, monkeys: usize) -> Instance {
    assert!(n >= 1);
    let a = names("a", 1..n + 1);
    let b = names("b", 1..n + 1);
    let ms = names("m", 1..monkeys + 1);
    let cs = names("c", 0..monkeys + 1);
    let mut init = vec!["(person-at a1)".to_string(), "(person-alive)".to_string()];
    for isl in [&a, &b] {
        for w in isl.windows(2) {
            init.push(format!("(road {} {})", w[0], w[1]));
            init.push(format!("(road {} {})", w[1], w[0]));
        }
    }
    init.push(format!("(bridge-road a{n} b1)"));
    init.push(format!("(bridge-drop-location a{n})"));
    for i in 1..n {
        init.push(format!("(swim-road a{i} b{i})"));
    }
    for m in &ms {
        init.push(format!("(monkey-on-bridge {m})"));
    }
    init.push("(count-zero c0)".to_string());
    for i in 0..monkeys {
        init.push(format!("(count-next c{i} c{})", i + 1));
    }
    init.push(format!("(monkey-count c{monkeys})"));
    let goal = [format!("(person-at b{n})")];
    let name = format!("islands-{n}-{monkeys}");
    let text = problem(&name, "islands", &[([a, b].concat(), "location"), (ms, "monkey"), (cs, "count")], &init, &goal);
    Instance::new(name, domains::ISLANDS, text)
}

/// The islands instances used as fixtures.
pub fn islands_suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for m in 0..=2 {
            out.push(islands(n, m));
        }
    }
    out
}

/// `n` blocks in random towers; the goal is a single tower in random order.
pub fn blocks(n: usize, seed: u64) -> Instance {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bs = names("b", 1..n + 1);
    let mut goal_order = bs.clone();
    goal_order.shuffle(&mut rng);
    let goal: Vec<String> = goal_order.windows(2).map(|w| format!("(on {} {})", w[1], w[0])).collect();
    loop {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut init = Vec::new();
        let mut covered = vec![false; n];
        let mut below: Option<usize> = None;
        for &b in &order {
            match below {
                Some(x) if rng.gen_bool(0.6) => {
                    init.push(format!("(on {} {})", bs[b], bs[x]));
                    covered[x] = true;
                }
                _ => init.push(format!("(ontable {})", bs[b])),
            }
            below = Some(b);
        }
        if goal.iter().all(|g| init.contains(g)) {
            continue;
        }
        init.extend((0..n).filter(|&b| !covered[b]).map(|b| format!("(clear {})", bs[b])));
        let name = format!("blocks-{n}-{seed}");
        let text = problem(&name, "blocks3ops", &[(bs, "block")], &init, &goal);
        return Instance::new(name, domains::BLOCKS3OPS, text);
    }
}

/// Triangle of side `2k+1`: locations `l-i-j` with `i+j <= 2k+2`. The first
/// row is the direct route and holds no spare tyres.
pub fn triangle_tireworld(k: usize) -> Instance {
    assert!(k >= 1);
    let n = 2 * k + 1;
    let valid = |i: usize, j: usize| i >= 1 && j >= 1 && i + j <= n + 1;
    let mut locs = Vec::new();
    let mut init = vec!["(vehicle-at l-1-1)".to_string(), "(not-flattire)".to_string()];
    for i in 1..=n {
        for j in 1..=n {
            if !valid(i, j) {
                continue;
            }
            locs.push(format!("l-{i}-{j}"));
            if i == 1 && valid(1, j + 1) {
                init.push(format!("(road l-1-{j} l-1-{})", j + 1));
            }
            if valid(i + 1, j) {
                init.push(format!("(road l-{i}-{j} l-{}-{j})", i + 1));
                if valid(i, j + 1) {
                    init.push(format!("(road l-{}-{j} l-{i}-{})", i + 1, j + 1));
                }
            }
            if i > 1 {
                init.push(format!("(spare-in l-{i}-{j})"));
            }
        }
    }
    let goal = [format!("(vehicle-at l-1-{n})")];
    let name = format!("triangle-tire-{k}");
    let text = problem(&name, "triangle-tire", &[(locs, "location")], &init, &goal);
    Instance::new(name, domains::TRIANGLE_TIREWORLD, text)
}

/// Random connected road network over `n` locations with spares at about a
/// third of them; drive from `l1` to `l<n>`.
pub fn tireworld(n: usize, seed: u64) -> Instance {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs = names("l", 1..n + 1);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i));
    }
    for _ in 0..n / 3 {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if x != y && !edges.contains(&(x.min(y), x.max(y))) {
            edges.push((x.min(y), x.max(y)));
        }
    }
    let mut init = vec!["(vehicle-at l1)".to_string(), "(not-flattire)".to_string()];
    for (x, y) in edges {
        init.push(format!("(road {} {})", locs[x], locs[y]));
        init.push(format!("(road {} {})", locs[y], locs[x]));
    }
    for l in &locs {
        if rng.gen_bool(0.35) {
            init.push(format!("(spare-in {l})"));
        }
    }
    let goal = [format!("(vehicle-at {})", locs[n - 1])];
    let name = format!("tire-{n}-{seed}");
    let text = problem(&name, "tire", &[(locs, "location")], &init, &goal);
    Instance::new(name, domains::TIREWORLD, text)
}

/// Tireworld instances of 3 to 7 locations whose initial state is alive.
pub fn tireworld_suite() -> Vec<Instance> {
    [(3, 3), (4, 2), (4, 6), (5, 2), (5, 10), (6, 1), (6, 4), (7, 7), (7, 10)].into_iter().map(|(n, seed)| tireworld(n, seed)).collect()
}

/// Corridor of `n` cells, start left, goal right.
pub fn chain(n: usize) -> Instance {
    assert!(n >= 1);
    let cells = names("c", 0..n);
    let mut init = vec!["(at c0)".to_string()];
    for w in cells.windows(2) {
        init.push(format!("(succ {} {})", w[0], w[1]));
    }
    let goal = [format!("(at c{})", n - 1)];
    let name = format!("chain-{n}");
    let text = problem(&name, "chain", &[(cells, "cell")], &init, &goal);
    Instance::new(name, domains::CHAIN, text)
}

pub fn lottery() -> Instance {
    let text = problem("lottery-1", "lottery", &[], &["(start)".to_string()], &["(done)".to_string()]);
    Instance::new("lottery-1".into(), domains::LOTTERY, text)
}

pub fn detour() -> Instance {
    let text = problem("detour-1", "detour", &[], &["(start)".to_string()], &["(done)".to_string()]);
    Instance::new("detour-1".into(), domains::DETOUR, text)
}

/// Corridor of `n` cells with a risky leap to the end and a trap below it.
pub fn cascade(n: usize) -> Instance {
    assert!(n >= 2);
    let cells = names("c", 0..n);
    let mut init = vec!["(at c0)".to_string(), "(first c0)".to_string(), format!("(last c{})", n - 1)];
    for w in cells.windows(2) {
        init.push(format!("(succ {} {})", w[0], w[1]));
    }
    let goal = [format!("(at c{})", n - 1)];
    let name = format!("cascade-{n}");
    let text = problem(&name, "cascade", &[(cells, "cell")], &init, &goal);
    Instance::new(name, domains::CASCADE, text)
}

/// Named families for the fixture writer, each with a default size range.
pub fn family(name: &str) -> Option<Vec<Instance>> {
    Some(match name {
        "acrobatics" => (1..=10).map(acrobatics).collect(),
        "doors" => (2..=8).map(doors).collect(),
        "islands" => islands_suite(),
        "blocks3ops" => (3..=7).map(|n| blocks(n, n as u64)).collect(),
        "triangle-tireworld" => (1..=2).map(triangle_tireworld).collect(),
        "tireworld" => tireworld_suite(),
        "chain" => (1..=5).map(chain).collect(),
        "detour" => vec![detour()],
        "lottery" => vec![lottery()],
        "cascade" => (2..=5).map(cascade).collect(),
        _ => return None,
    })
}

pub const FAMILIES: &[&str] = &["acrobatics", "doors", "islands", "blocks3ops", "triangle-tireworld", "tireworld", "chain", "detour", "cascade", "lottery"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(blocks(5, 3).problem, blocks(5, 3).problem);
        assert_eq!(tireworld(6, 1).problem, tireworld(6, 1).problem);
    }

    #[test]
    fn blocks_initial_state_is_not_the_goal() {
        for seed in 0..20 {
            let inst = blocks(3, seed);
            assert!(inst.problem.contains("(clear"));
        }
    }

    #[test]
    fn every_family_is_listed() {
        for f in FAMILIES {
            assert!(!family(f).unwrap().is_empty());
        }
        assert!(family("nope").is_none());
    }
}
