//! Learning and verifying general policies for FOND planning.
//!
//! The pipeline: parse and ground PDDL ([`pddl`]), expand the explicit
//! non-deterministic state model ([`state_space`]), label dead-ends
//! ([`deadend`]), generate description-logic features ([`features`]), learn a
//! rule-based general policy as a min-cost SAT problem ([`learner`]), and check
//! it exactly, by simulation, or with a descending certificate ([`verifier`]).
//! [`trainer`] drives incremental training over a family of instances.

pub mod deadend;
pub mod features;
pub mod learner;
pub mod pddl;
pub mod policy;
pub mod state_space;
pub mod trainer;
pub mod verifier;
