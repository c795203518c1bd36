pub mod bound;
pub mod fairness;
pub mod frontier;
pub mod learn;
pub mod simulate;
