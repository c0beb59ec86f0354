//! Reference policies and descent certificates, in the text formats read by
//! `fondgen::policy::parse_policy` and `fondgen::verifier::parse_certificate`.
//!
//! Boolean features meaning "C is non-empty" are written as `empty(C)` with
//! the opposite polarity, so `!G` below reads "the player is at the goal".

pub const ACROBATICS: &str = "\
mode: state
feature U bool:nullary(up)
feature B bool:nullary(broken-leg)
feature d num:dist(position_0,next-fwd_0_1,position_G_0)
rule: U, d>0, !B -> dec(d)
rule: !B, !U -> U | inc(d)
constraint: B, !U
";

pub const ACROBATICS_CERT: &str = "\
feature U bool:nullary(up)
feature d num:dist(position_0,next-fwd_0_1,position_G_0)
term 1 - U
term -(1 - U) * d
term d
";

pub const DOORS: &str = "\
mode: state
# G true iff the player is NOT at the final location
feature G bool:empty(and(player-at_0,final-location_0))
feature S bool:empty(some(door-in_0_1,player-at_0))
feature K bool:nullary(hold-key)
# F true iff the player is NOT in the second-last room facing an open final door
feature F bool:empty(and(and(open_0,some(door-out_0_1,player-at_0)),some(door-in_0_1,final-location_0)))
rule: G, S, K, F -> !S
rule: G, S, K, !F -> !G, !S, F
rule: G, S, !K -> K | !G, !S, F
rule: G, !S, K, F -> {} | !F | !G
rule: G, !S, !K, !F -> !G, F
constraint: G, F, !S, !K
";

pub const ISLANDS: &str = "\
mode: state
feature A bool:nullary(person-alive)
feature dd num:dist(and(bridge-drop-location_0,bridge-road_0),road_0_1,person-at_0)
feature dg num:dist(person-at_G_0,road_0_1,person-at_0)
rule: A, dd=0, dg>0 -> {} | dec(dg), inc(dd)
rule: A, dd>0, dg>0 -> dec(dd) | dec(dg)
constraint: !A, dd>0, dg>0
";

pub const ISLANDS_CERT_SHORT: &str = "\
feature dd num:dist(and(bridge-drop-location_0,bridge-road_0),road_0_1,person-at_0)
feature dg num:dist(person-at_G_0,road_0_1,person-at_0)
term dg
term dd
";

pub const ISLANDS_CERT: &str = "\
feature dd num:dist(and(bridge-drop-location_0,bridge-road_0),road_0_1,person-at_0)
feature dg num:dist(person-at_G_0,road_0_1,person-at_0)
feature nm num:count(monkey-on-bridge_0)
term dg
term nm
term dd
";

pub const BLOCKS: &str = "\
mode: state
feature con num:count(some(plus(on_G_0_1),clear_0))
feature m num:count(some(rand(on_0_1,rnot(on_G_0_1)),top))
feature on num:count(on_0)
rule: con>0, m=0 -> inc(on), dec(con) | dec(on)
rule: m>0, on>0 -> dec(m), dec(on) | dec(m), dec(on), inc(con) | dec(on) | dec(on), inc(con)
";

pub const BLOCKS_CERT: &str = "\
feature con num:count(some(plus(on_G_0_1),clear_0))
feature m num:count(some(rand(on_0_1,rnot(on_G_0_1)),top))
feature on num:count(on_0)
term m * on
term con
term on
";

/// Finishes as soon as `done` can be made true; both finishing actions qualify.
pub const DETOUR: &str = "\
mode: state
feature D bool:nullary(done)
rule: !D -> D
";

/// Always rolls. Fails once in 64 runs, so short simulations tend to pass.
pub const LOTTERY: &str = "\
mode: state
feature S bool:nullary(start)
feature R bool:nullary(rolled)
rule: S, !R -> !S, R
rule: !S, R -> !R
";

/// The given policy text with its state constraints removed.
pub fn without_constraints(policy: &str) -> String {
    policy.lines().filter(|l| !l.starts_with("constraint:")).map(|l| format!("{l}\n")).collect()
}
