//! Search by entanglement detection, simulated.
//!
//! A Boolean formula over `n` variables defines range oracles
//! `O_[lo,hi]`. Applied to the uniform superposition, such an oracle leaves
//! the query and answer registers entangled exactly when the range holds
//! some but not all assignments of the full space as solutions. The crate
//! simulates the oracles, decides separability by several routes, drives a
//! halving search with those verdicts and quantifies how many state copies
//! a physical detector would consume.

pub mod copies;
pub mod entdetect;
pub mod error;
pub mod formula;
pub mod hsearch;
pub mod linalg;
pub mod oracle;
pub mod qsim;

pub use entdetect::{
    analytic_test, ppt_test, purity_test, spa_test_estimated, spa_test_exact, CopyEstimatorConfig, DetectionVerdict,
    Detector, PositiveMapSpec, Route, SpaMap, Verdict,
};
pub use error::{Error, Result};
pub use formula::{parse_dimacs, parse_expr, Assignment, Expr, Formula, ParseError, RangeStats};
pub use hsearch::{
    classical_baseline, cost_model, search, CostReport, SearchConfig, SearchOutcome, SearchStatus, SearchTrace,
};
pub use oracle::{post_oracle_state, RangeOracle};
pub use qsim::{DensityOp, Mode, PureState, RegisterLayout, Subsystem};
