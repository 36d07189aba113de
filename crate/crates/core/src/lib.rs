//! Closed linear operators with an arbitrary prescribed closed spectrum.
//!
//! Given a closed set `σ ⊆ ℂ` (a finite union of [`Primitive`]s), the
//! operator `A = M ⊕ D` on `ℓ² ⊕ L_p(0, 1)` has `σ(A) = σ`:
//!
//! * `M` multiplies by a dense sequence `(m_n)` in `σ` ([`multipliers`],
//!   [`diagonal`]), so `σ(M)` is the closure of the multipliers, its point
//!   spectrum is the set of multipliers and its residual spectrum is empty;
//! * `D = d/dt` with `x(0) = 0` ([`volterra`]) is unbounded with empty
//!   spectrum and an explicit Volterra resolvent.
//!
//! [`direct_sum`] assembles `A` and [`pseudospec`] sweeps `1/‖R(λ, A)‖`
//! over windows of the plane and runs the verification battery.

pub mod diagonal;
pub mod direct_sum;
pub mod error;
pub mod exact;
pub mod multipliers;
pub mod pseudospec;
pub mod region;
pub mod sequence;
pub mod serde_ext;
pub mod volterra;

pub use diagonal::{
    QueryPoint, ResolventNorm, SparseVector, SpectrumClass, TruncatedDiagonal, UnboundednessWitness,
};
pub use direct_sum::{
    Block, DirectSumOperator, PairVector, SpectralReportA, SpectrumReport, SumNorm, VolterraConfig,
};
pub use error::{Error, ParseError, Result};
pub use exact::ExactComplex;
pub use multipliers::{CoveringRadiusReport, Multiplier, MultiplierSequence};
pub use num_complex::Complex64;
pub use pseudospec::{sweep, verify_all, Profile, SweepConfig, SweepResult, VerifyReport};
pub use region::{Bounds, Primitive, RegionSpec, Window};
pub use volterra::{GridFunction, NormExponent, ResolventEstimate};
