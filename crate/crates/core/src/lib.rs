pub mod error;
pub mod factorization;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod solver;
pub mod distributed;
pub mod problems;
pub mod cli;
