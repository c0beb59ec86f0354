//! PDDL subset with `oneof` effects: parsing, printing and grounding.
//!
//! Supported: typed STRIPS, positive and negative literal preconditions,
//! (in)equality preconditions, and `oneof` effects at the top level of an
//! effect conjunction. Everything else is rejected with
//! [`PddlError::Unsupported`].

mod ground;
mod parser;
mod printer;
pub mod sexpr;

pub use ground::{determinize, ground_task, ActionId, AtomId, GroundAction, GroundAtom, GroundTask, Outcome};
pub use parser::{parse_domain, parse_problem};

use sexpr::Pos;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PddlError {
    #[error("syntax error at {line}:{col} near `{token}`: {message}")]
    Syntax { line: usize, col: usize, token: String, message: String },
    #[error("unsupported PDDL feature `{feature}` at {line}:{col}")]
    Unsupported { feature: String, line: usize, col: usize },
    #[error("type error: {0}")]
    Type(String),
}

impl PddlError {
    pub(crate) fn syntax(pos: Pos, token: &str, message: &str) -> Self {
        PddlError::Syntax { line: pos.line, col: pos.col, token: token.to_string(), message: message.to_string() }
    }

    pub(crate) fn unsupported(pos: Pos, feature: &str) -> Self {
        PddlError::Unsupported { feature: feature.to_string(), line: pos.line, col: pos.col }
    }
}

pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomExpr {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Atom(AtomExpr, bool),
    Equal(Term, Term, bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffectLiteral {
    pub atom: AtomExpr,
    pub positive: bool,
}

/// Deterministic part plus any number of `oneof` groups; each group branch
/// is a conjunction of literals. Outcomes are the cross product of branches.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Effect {
    pub always: Vec<EffectLiteral>,
    pub oneof: Vec<Vec<Vec<EffectLiteral>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Condition>,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub name: String,
    pub requirements: Vec<String>,
    /// `(type, parent)` pairs; `object` is the implicit root.
    pub types: Vec<(String, String)>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactExpr {
    pub pred: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<FactExpr>,
    pub goal: Vec<FactExpr>,
}

impl Domain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == ROOT_TYPE || self.types.iter().any(|(t, _)| t == ty)
    }

    /// Whether `sub` equals `sup` or is a (transitive) subtype of it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut cur = sub;
        for _ in 0..=self.types.len() {
            if cur == sup {
                return true;
            }
            match self.types.iter().find(|(t, _)| t == cur) {
                Some((_, parent)) => cur = parent,
                None => return sup == ROOT_TYPE,
            }
        }
        false
    }

    pub fn to_pddl(&self) -> String {
        printer::domain(self)
    }
}

impl Problem {
    /// Number of objects declared by the problem (domain constants excluded).
    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn to_pddl(&self) -> String {
        printer::problem(self)
    }
}

/// Parses a domain and a problem for it.
pub fn parse_fond_task(domain_text: &str, problem_text: &str) -> Result<(Domain, Problem), PddlError> {
    let domain = parse_domain(domain_text)?;
    let problem = parse_problem(problem_text, &domain)?;
    Ok((domain, problem))
}

/// Parses and grounds in one step.
pub fn load_task(domain_text: &str, problem_text: &str) -> Result<GroundTask, PddlError> {
    let (d, p) = parse_fond_task(domain_text, problem_text)?;
    ground_task(&d, &p)
}
