//! Elliptic parametrix on a cone: the transpose `P^T`, the reduction
//! operators `R_j` with `(I - R) w = φ`, the truncated Neumann sums
//! `w_N`, `e_N`, and audits of their growth bounds.
//!
//! Conventions: `D = -i∂`; a word `(j_1, ..., j_k)` acts as
//! `R_{j_1} ... R_{j_k}`, rightmost first.

mod audit;
mod neumann;
mod operator;
mod symbol;

pub use audit::*;
pub use neumann::*;
pub use operator::*;
pub use symbol::*;
