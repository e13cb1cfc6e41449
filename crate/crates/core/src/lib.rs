//! Fixed-point laboratory core.
//!
//! Self-maps on one-dimensional metric spaces are checked against five
//! contraction conditions (Banach, Edelstein, Branciari integral type,
//! T-contraction and the T-transported integral condition), iterated with
//! Picard's scheme and monitored with runtime diagnostics that mirror the
//! milestones of the convergence argument.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`]: points, spaces, the metric and pair sources.
//! * [`expr`]: the arithmetic expression language and index-rule maps.
//! * [`map`]: self-maps built from either representation.
//! * [`quadrature`]: integrands and the primitive `Φ(τ) = ∫₀^τ φ`.
//! * [`certify`]: modulus estimation, certificates and auxiliary-map probes.
//! * [`solver`]: Picard iteration, diagnostics and uniqueness probing.
//! * [`corpus`]: ready-made problem instances with expected outcomes.
//! * [`descriptor`]: serde descriptors shared by configuration files.

// `!(x > 0.0)` is used on purpose so that NaN fails the guard.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod certify;
pub mod corpus;
pub mod descriptor;
mod error;
pub mod expr;
pub mod map;
pub mod quadrature;
pub mod serde_f64;
pub mod solver;
pub mod space;

pub use certify::{
    check_aux_map, estimate_modulus, pair_ratio, pair_ratios, reduction_check, AuxProbeConfig,
    AuxReport, Certificate, CertifyOptions, ConditionKind, KindName, PairSet, ReductionReport,
    SubseqStatus, Verdict, Witness,
};
pub use error::{Error, Result};
pub use expr::{ExprAst, FreeVar, IndexRuleMap};
pub use map::SelfMap;
pub use quadrature::{Integrand, QuadratureConfig};
pub use solver::{
    picard_iterate, run_diagnostics, uniqueness_probe, DiagnosticsConfig, DiagnosticsReport,
    FixedPointResult, SolveStatus, StopRule, UniquenessReport,
};
pub use space::{Point, Space};
