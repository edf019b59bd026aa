pub mod error;
pub mod exprcore;
pub mod scalar;

pub use error::{Error, Result};
pub use exprcore::{parse_expr, ExprAst};
pub use scalar::Real;
pub mod quadrature;
pub mod problem;
pub mod odeint;
pub mod green;
pub mod contours;
pub mod spectrum;
pub mod solver_residue;
pub mod solver_contour;
pub mod oracle;
pub mod cli;
pub mod suite;
