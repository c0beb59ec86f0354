//! Description-logic features.
//!
//! Concepts denote sets of objects and roles denote binary relations, both
//! built from the predicates of a domain (goal copies `p_G` included).
//! Features turn them into Boolean or numerical state functions.
//!
//! Features are written in prefix notation, for example
//! `num:count(and(clear_0,not(on_0)))` or
//! `num:dist(position_0,next-fwd_0_1,position_G_0)`. A primitive concept
//! `p_i` is the `i`-th argument of `p`; a primitive role `p_i_j` is the pair
//! of arguments `i` and `j`.

mod eval;
mod pool;
mod syntax;

pub use eval::{evaluate_feature, qualitative_change, FeatureTable, Interp, StateEvaluator};
pub use pool::{generate_pool, generate_pool_with_values, PoolConfig, Sample, DEFAULT_POOL_CAP};
pub use syntax::{parse_concept, parse_feature, parse_role};

use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("cannot parse feature at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("sort error: {0}")]
    Sort(String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` has arity {arity}, argument {index} requested")]
    Arity { pred: String, arity: usize, index: usize },
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("feature pool exceeded the cap of {cap} features ({count} generated)")]
    PoolExplosion { cap: usize, count: usize },
    #[error("complexity bound must be at least 1")]
    ZeroComplexity,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Concept {
    Prim(Arc<str>, usize),
    Top,
    Bot,
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Not(Box<Concept>),
    Diff(Box<Concept>, Box<Concept>),
    Some(Box<Role>, Box<Concept>),
    All(Box<Role>, Box<Concept>),
    Const(Arc<str>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Prim(Arc<str>, usize, usize),
    Univ,
    And(Box<Role>, Box<Role>),
    Or(Box<Role>, Box<Role>),
    Not(Box<Role>),
    Inv(Box<Role>),
    Comp(Box<Role>, Box<Role>),
    Plus(Box<Role>),
    Star(Box<Role>),
    Restrict(Box<Role>, Box<Concept>),
    Id(Box<Concept>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Empty(Concept),
    CSub(Concept, Concept),
    RSub(Role, Role),
    Nullary(Arc<str>),
    Count(Concept),
    Dist(Concept, Role, Concept),
    SumDist(Concept, Role, Concept),
    RDist(Role, Role, Role),
    SumRDist(Role, Role, Role),
}

impl Concept {
    /// Size of the syntax tree.
    pub fn complexity(&self) -> usize {
        match self {
            Concept::Prim(..) | Concept::Top | Concept::Bot | Concept::Const(_) => 1,
            Concept::Not(c) => 1 + c.complexity(),
            Concept::And(a, b) | Concept::Or(a, b) | Concept::Diff(a, b) => 1 + a.complexity() + b.complexity(),
            Concept::Some(r, c) | Concept::All(r, c) => 1 + r.complexity() + c.complexity(),
        }
    }
}

impl Role {
    pub fn complexity(&self) -> usize {
        match self {
            Role::Prim(..) | Role::Univ => 1,
            Role::Not(r) | Role::Inv(r) | Role::Plus(r) | Role::Star(r) => 1 + r.complexity(),
            Role::And(a, b) | Role::Or(a, b) | Role::Comp(a, b) => 1 + a.complexity() + b.complexity(),
            Role::Restrict(r, c) => 1 + r.complexity() + c.complexity(),
            Role::Id(c) => 1 + c.complexity(),
        }
    }
}

impl Feature {
    pub fn is_boolean(&self) -> bool {
        matches!(self, Feature::Empty(_) | Feature::CSub(..) | Feature::RSub(..) | Feature::Nullary(_))
    }

    /// Complexity weight used in the learning objective.
    pub fn weight(&self) -> usize {
        match self {
            Feature::Nullary(_) => 1,
            Feature::Empty(c) | Feature::Count(c) => c.complexity(),
            Feature::CSub(c, d) => c.complexity() + d.complexity(),
            Feature::RSub(r, s) => r.complexity() + s.complexity(),
            Feature::Dist(c, r, d) | Feature::SumDist(c, r, d) => c.complexity() + r.complexity() + d.complexity(),
            Feature::RDist(r, s, t) | Feature::SumRDist(r, s, t) => r.complexity() + s.complexity() + t.complexity(),
        }
    }
}

/// Natural number or infinity. Infinity is above every finite value and
/// equal to itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Num {
    Fin(u64),
    Inf,
}

impl Num {
    pub fn is_positive(self) -> bool {
        self != Num::Fin(0)
    }

    fn add(self, other: Num) -> Num {
        match (self, other) {
            (Num::Fin(a), Num::Fin(b)) => Num::Fin(a + b),
            _ => Num::Inf,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Fin(n) => write!(f, "{n}"),
            Num::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Num(Num),
}

impl Value {
    /// Truth of the value: Booleans as is, numbers when positive.
    pub fn boolean_view(self) -> bool {
        match self {
            Value::Bool(b) => b,
            Value::Num(n) => n.is_positive(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(n) => write!(f, "{n}"),
        }
    }
}

/// Qualitative change of a feature value along a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Change {
    Down,
    Same,
    Up,
}

impl Change {
    pub fn between(a: Value, b: Value) -> Change {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Change::Up,
            std::cmp::Ordering::Equal => Change::Same,
            std::cmp::Ordering::Greater => Change::Down,
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Prim(p, i) => write!(f, "{p}_{i}"),
            Concept::Top => f.write_str("top"),
            Concept::Bot => f.write_str("bot"),
            Concept::And(a, b) => write!(f, "and({a},{b})"),
            Concept::Or(a, b) => write!(f, "or({a},{b})"),
            Concept::Not(c) => write!(f, "not({c})"),
            Concept::Diff(a, b) => write!(f, "diff({a},{b})"),
            Concept::Some(r, c) => write!(f, "some({r},{c})"),
            Concept::All(r, c) => write!(f, "all({r},{c})"),
            Concept::Const(o) => write!(f, "const({o})"),
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Prim(p, i, j) => write!(f, "{p}_{i}_{j}"),
            Role::Univ => f.write_str("univ"),
            Role::And(a, b) => write!(f, "rand({a},{b})"),
            Role::Or(a, b) => write!(f, "ror({a},{b})"),
            Role::Not(r) => write!(f, "rnot({r})"),
            Role::Inv(r) => write!(f, "inv({r})"),
            Role::Comp(a, b) => write!(f, "comp({a},{b})"),
            Role::Plus(r) => write!(f, "plus({r})"),
            Role::Star(r) => write!(f, "star({r})"),
            Role::Restrict(r, c) => write!(f, "restrict({r},{c})"),
            Role::Id(c) => write!(f, "id({c})"),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feature::Empty(c) => write!(f, "bool:empty({c})"),
            Feature::CSub(c, d) => write!(f, "bool:csub({c},{d})"),
            Feature::RSub(r, s) => write!(f, "bool:rsub({r},{s})"),
            Feature::Nullary(p) => write!(f, "bool:nullary({p})"),
            Feature::Count(c) => write!(f, "num:count({c})"),
            Feature::Dist(c, r, d) => write!(f, "num:dist({c},{r},{d})"),
            Feature::SumDist(c, r, d) => write!(f, "num:sumdist({c},{r},{d})"),
            Feature::RDist(r, s, t) => write!(f, "num:rdist({r},{s},{t})"),
            Feature::SumRDist(r, s, t) => write!(f, "num:sumrdist({r},{s},{t})"),
        }
    }
}

impl std::str::FromStr for Feature {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_feature(s)
    }
}
