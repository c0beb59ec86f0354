#![allow(dead_code)]

pub mod min_cost;
pub mod solvability;
