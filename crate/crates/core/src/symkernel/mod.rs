//! Exact symbolic kernel: polynomials, rational functions, charts, matrices
//! and the classical tensor calculus on a chart.

pub mod chart;
pub mod expr;
pub mod field;
pub mod matrix;
pub mod poly;
pub mod ratfunc;
pub mod tensor;
