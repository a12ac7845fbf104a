//! Lattice workbench for gauge-group actions, dressing fields, and gauge
//! fixing.
//!
//! The crate builds field spaces over periodic lattices for U(1) and SU(2):
//! the same containers can carry different declared gauge-group actions, and
//! the composers between them (`gt`, `dc`, `udc`, `mu`, `iota`) enforce the
//! admissible-action tables before any numerics run. On top of that sit a
//! gauge-invariant Wilson-plus-scalar action, gauge-fixing solvers whose
//! solutions are dressing fields (spectral for the abelian linear maps,
//! closed-form for the site-local unitary maps, damped Newton otherwise),
//! dense functional-derivative operators with log-determinants, and the
//! variational machinery relating deformations of a gauge-fixing map to
//! responses of the dressed fields.
//!
//! Everything is desk-scale and determinism-first: seeded configuration
//! generators, fixed summation trees, and dense linear algebra with explicit
//! size caps. With the `parallel` feature (default) the site loops run on
//! rayon; results are identical with it disabled.

pub mod action;
pub mod error;
pub mod exec;
pub mod fields;
pub mod fpjac;
pub mod gaugefix;
pub mod group;
pub mod lattice;
pub mod random;
pub mod suites;
pub mod tangent;
pub mod variations;

pub use error::{FieldError, Result};
pub use fields::{
    dc, gt, iota, mu, udc, ActionTag, FieldBundle, GroupField, LinkField, Representation,
    ScalarField,
};
pub use gaugefix::{
    check_gfm_equivariance, gf_eval, gfm_solve, locality_profile, xi_sweep, GaugeFixSpec,
    SolveReport,
};
pub use group::{exp_map, log_map, AlgebraElement, GroupElement, GroupKind};
pub use lattice::Lattice;
pub use tangent::{AlgebraField, BundleTangent};
