//! Domain files.

pub const ACROBATICS: &str = r#"(define (domain acrobatics)
  (:requirements :typing :strips :non-deterministic :negative-preconditions)
  (:types loc)
  (:predicates (up) (broken-leg) (position ?p - loc) (next-fwd ?from ?to - loc) (next-inv ?from ?to - loc) (ladder-at ?p - loc))
  (:action walk-on-beam
    :parameters (?from ?to - loc)
    :precondition (and (not (broken-leg)) (up) (position ?from) (next-fwd ?from ?to))
    :effect (oneof (and (not (position ?from)) (position ?to)) (not (up))))
  (:action walk-back-on-beam
    :parameters (?from ?to - loc)
    :precondition (and (not (broken-leg)) (up) (position ?from) (next-inv ?from ?to))
    :effect (oneof (and (not (position ?from)) (position ?to)) (not (up))))
  (:action walk-left
    :parameters (?from ?to - loc)
    :precondition (and (not (broken-leg)) (not (up)) (position ?from) (next-inv ?from ?to))
    :effect (and (not (position ?from)) (position ?to)))
  (:action walk-right
    :parameters (?from ?to - loc)
    :precondition (and (not (broken-leg)) (not (up)) (position ?from) (next-fwd ?from ?to))
    :effect (and (not (position ?from)) (position ?to)))
  (:action climb
    :parameters (?p - loc)
    :precondition (and (not (broken-leg)) (not (up)) (position ?p) (ladder-at ?p))
    :effect (up))
  (:action climb-down
    :parameters (?p - loc)
    :precondition (and (not (broken-leg)) (up) (position ?p) (ladder-at ?p))
    :effect (not (up)))
  (:action jump-over
    :parameters (?from ?middle ?to - loc)
    :precondition (and (not (broken-leg)) (up) (position ?from) (next-fwd ?from ?middle) (next-fwd ?middle ?to))
    :effect (oneof (and (not (position ?from)) (position ?to)) (and (not (up)) (broken-leg)))))
"#;

pub const DOORS: &str = r#"(define (domain doors)
  (:requirements :typing :strips :non-deterministic :negative-preconditions)
  (:types location door)
  (:predicates (player-at ?l - location) (final-location ?l - location) (key-at ?l - location) (hold-key)
               (door-in ?d - door ?l - location) (door-out ?d - door ?l - location) (open ?d - door))
  (:action pick-key
    :parameters (?l - location)
    :precondition (and (player-at ?l) (key-at ?l))
    :effect (and (hold-key) (not (key-at ?l))))
  (:action move-through-open
    :parameters (?from - location ?d - door ?to - location ?next - door)
    :precondition (and (player-at ?from) (door-out ?d ?from) (door-in ?d ?to) (open ?d) (door-out ?next ?to))
    :effect (and (not (player-at ?from)) (player-at ?to)
                 (oneof (open ?d) (not (open ?d)))
                 (oneof (open ?next) (not (open ?next)))))
  (:action move-through-closed
    :parameters (?from - location ?d - door ?to - location ?next - door)
    :precondition (and (player-at ?from) (door-out ?d ?from) (door-in ?d ?to) (not (open ?d)) (door-out ?next ?to))
    :effect (and (not (player-at ?from)) (player-at ?to)
                 (oneof (open ?d) (not (open ?d)))
                 (oneof (open ?next) (not (open ?next)))))
  (:action enter-final-open
    :parameters (?from - location ?d - door ?to - location)
    :precondition (and (player-at ?from) (door-out ?d ?from) (door-in ?d ?to) (final-location ?to) (open ?d))
    :effect (and (not (player-at ?from)) (player-at ?to)))
  (:action enter-final-with-key
    :parameters (?from - location ?d - door ?to - location)
    :precondition (and (player-at ?from) (door-out ?d ?from) (door-in ?d ?to) (final-location ?to) (not (open ?d)) (hold-key))
    :effect (and (not (player-at ?from)) (player-at ?to))))
"#;

pub const ISLANDS: &str = r#"(define (domain islands)
  (:requirements :typing :strips :non-deterministic :negative-preconditions)
  (:types location monkey count)
  (:predicates (person-at ?l - location) (person-alive) (road ?from ?to - location) (bridge-road ?from ?to - location)
               (swim-road ?from ?to - location) (bridge-drop-location ?l - location)
               (monkey-on-bridge ?m - monkey) (monkey-at ?m - monkey ?l - location)
               (monkey-count ?c - count) (count-next ?lo ?hi - count) (count-zero ?c - count))
  (:action move
    :parameters (?from ?to - location)
    :precondition (and (person-alive) (person-at ?from) (road ?from ?to))
    :effect (and (not (person-at ?from)) (person-at ?to)))
  (:action bridge-cross
    :parameters (?from ?to - location ?c - count)
    :precondition (and (person-alive) (person-at ?from) (bridge-road ?from ?to) (monkey-count ?c) (count-zero ?c))
    :effect (and (not (person-at ?from)) (person-at ?to)))
  (:action swim
    :parameters (?from ?to - location)
    :precondition (and (person-alive) (person-at ?from) (swim-road ?from ?to))
    :effect (oneof (and (not (person-at ?from)) (person-at ?to)) (not (person-alive))))
  (:action move-monkey
    :parameters (?m - monkey ?l - location ?c ?lower - count)
    :precondition (and (person-alive) (person-at ?l) (bridge-drop-location ?l) (monkey-on-bridge ?m) (monkey-count ?c) (count-next ?lower ?c))
    :effect (oneof (and (not (monkey-on-bridge ?m)) (monkey-at ?m ?l) (not (monkey-count ?c)) (monkey-count ?lower)) (and))))
"#;

pub const BLOCKS3OPS: &str = r#"(define (domain blocks3ops)
  (:requirements :typing :strips :non-deterministic :equality)
  (:types block)
  (:predicates (on ?x ?y - block) (ontable ?x - block) (clear ?x - block))
  (:action move-b-to-b
    :parameters (?b ?from ?to - block)
    :precondition (and (clear ?b) (clear ?to) (on ?b ?from) (not (= ?b ?to)) (not (= ?from ?to)))
    :effect (oneof (and (on ?b ?to) (not (on ?b ?from)) (clear ?from) (not (clear ?to)))
                   (and (ontable ?b) (not (on ?b ?from)) (clear ?from))))
  (:action move-b-to-t
    :parameters (?b ?from - block)
    :precondition (and (clear ?b) (on ?b ?from))
    :effect (and (ontable ?b) (not (on ?b ?from)) (clear ?from)))
  (:action move-t-to-b
    :parameters (?b ?to - block)
    :precondition (and (clear ?b) (clear ?to) (ontable ?b) (not (= ?b ?to)))
    :effect (oneof (and (on ?b ?to) (not (ontable ?b)) (not (clear ?to))) (and))))
"#;

pub const TRIANGLE_TIREWORLD: &str = r#"(define (domain triangle-tire)
  (:requirements :typing :strips :non-deterministic)
  (:types location)
  (:predicates (vehicle-at ?loc - location) (spare-in ?loc - location) (road ?from ?to - location) (not-flattire))
  (:action move-car
    :parameters (?from ?to - location)
    :precondition (and (vehicle-at ?from) (road ?from ?to) (not-flattire))
    :effect (and (vehicle-at ?to) (not (vehicle-at ?from)) (oneof (and) (not (not-flattire)))))
  (:action changetire
    :parameters (?loc - location)
    :precondition (and (spare-in ?loc) (vehicle-at ?loc))
    :effect (and (not (spare-in ?loc)) (not-flattire))))
"#;

pub const TIREWORLD: &str = r#"(define (domain tire)
  (:requirements :typing :strips :non-deterministic)
  (:types location)
  (:predicates (vehicle-at ?loc - location) (spare-in ?loc - location) (road ?from ?to - location) (not-flattire) (hasspare))
  (:action move-car
    :parameters (?from ?to - location)
    :precondition (and (vehicle-at ?from) (road ?from ?to) (not-flattire))
    :effect (and (vehicle-at ?to) (not (vehicle-at ?from)) (oneof (and) (not (not-flattire)))))
  (:action loadtire
    :parameters (?loc - location)
    :precondition (and (vehicle-at ?loc) (spare-in ?loc))
    :effect (and (hasspare) (not (spare-in ?loc))))
  (:action changetire
    :parameters ()
    :precondition (hasspare)
    :effect (and (not (hasspare)) (not-flattire))))
"#;

/// Deterministic corridor: `step` moves one cell right.
pub const CHAIN: &str = r#"(define (domain chain)
  (:requirements :typing :strips)
  (:types cell)
  (:predicates (at ?c - cell) (succ ?a ?b - cell))
  (:action step
    :parameters (?a ?b - cell)
    :precondition (and (at ?a) (succ ?a ?b))
    :effect (and (not (at ?a)) (at ?b))))
"#;

/// Two ways to finish: a safe one and a risky one that may break the agent.
pub const DETOUR: &str = r#"(define (domain detour)
  (:requirements :strips :non-deterministic)
  (:predicates (start) (done) (broken))
  (:action finish-safely
    :parameters ()
    :precondition (start)
    :effect (and (not (start)) (done)))
  (:action finish-riskily
    :parameters ()
    :precondition (start)
    :effect (oneof (and (not (start)) (done)) (and (not (start)) (broken)))))
"#;

/// Dead-ends that only show up after a second round of action removal: from
/// the trap the agent may escape back to the start or fall into a hole.
pub const CASCADE: &str = r#"(define (domain cascade)
  (:requirements :typing :strips :non-deterministic)
  (:types cell)
  (:predicates (at ?c - cell) (succ ?a ?b - cell) (last ?c - cell) (first ?c - cell) (in-trap) (in-hole))
  (:action step
    :parameters (?a ?b - cell)
    :precondition (and (at ?a) (succ ?a ?b))
    :effect (and (not (at ?a)) (at ?b)))
  (:action leap
    :parameters (?a ?b - cell)
    :precondition (and (at ?a) (last ?b))
    :effect (oneof (and (not (at ?a)) (at ?b)) (and (not (at ?a)) (in-trap))))
  (:action escape
    :parameters (?c - cell)
    :precondition (and (in-trap) (first ?c))
    :effect (oneof (and (not (in-trap)) (at ?c)) (and (not (in-trap)) (in-hole)))))
"#;

/// A six-coin roll that strands the agent when every coin lands heads, next
/// to a plain walk to the goal.
pub const LOTTERY: &str = r#"(define (domain lottery)
  (:requirements :strips :non-deterministic :negative-preconditions)
  (:predicates (start) (rolled) (done) (h1) (h2) (h3) (h4) (h5) (h6))
  (:action walk
    :parameters ()
    :precondition (start)
    :effect (and (not (start)) (done)))
  (:action roll
    :parameters ()
    :precondition (start)
    :effect (and (not (start)) (rolled)
                 (oneof (and) (h1))
                 (oneof (and) (h2))
                 (oneof (and) (h3))
                 (oneof (and) (h4))
                 (oneof (and) (h5))
                 (oneof (and) (h6))))
  (:action cash-1
    :parameters ()
    :precondition (and (rolled) (not (h1)))
    :effect (and (not (rolled)) (done)))
  (:action cash-2
    :parameters ()
    :precondition (and (rolled) (not (h2)))
    :effect (and (not (rolled)) (done)))
  (:action cash-3
    :parameters ()
    :precondition (and (rolled) (not (h3)))
    :effect (and (not (rolled)) (done)))
  (:action cash-4
    :parameters ()
    :precondition (and (rolled) (not (h4)))
    :effect (and (not (rolled)) (done)))
  (:action cash-5
    :parameters ()
    :precondition (and (rolled) (not (h5)))
    :effect (and (not (rolled)) (done)))
  (:action cash-6
    :parameters ()
    :precondition (and (rolled) (not (h6)))
    :effect (and (not (rolled)) (done))))
"#;
