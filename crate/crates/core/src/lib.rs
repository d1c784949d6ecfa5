//! Marginal-productivity computations in two formulations.
//!
//! The scalar route works with marginal products `MP_i = df/dx_i` and the
//! condition `p MP_i = w_i`. The vectorial route works with whole products
//! `(y, -x_1, .., -x_n)` and their derivatives along the least-cost
//! expansion path, valued at the price vector `P = (p, w_1, .., w_n)`.
//! Both are computed here and cross-checked; the vectorial route extends
//! to fixed-coefficient (Leontief) economies where `MP_i` does not exist.

#![allow(clippy::needless_range_loop)]

pub mod cobb_douglas;
pub mod cost_min;
pub mod fnparse;
pub mod ledger;
pub mod leontief;
pub mod product_vectors;
pub mod expansion_path;
pub mod production;
pub mod quadrature;

mod linalg;

pub use cobb_douglas::CobbDouglasParams;
pub use cost_min::{minimize_cost, CostSolution, SolveError};
pub use fnparse::{parse, Expr};
pub use product_vectors::{PriceSystem, ProductVector};
pub use production::ProductionFunction;
