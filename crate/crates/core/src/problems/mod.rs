//! Concrete scenario problems.

pub mod synthetic;
pub mod unit_commitment;
