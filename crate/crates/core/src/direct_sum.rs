//! The block operator `A = M ⊕ D` on `ℓ² ⊕ L_p(0, 1)`.
//!
//! `M` carries the prescribed spectrum and `D` carries unboundedness; since
//! `σ(D) = ∅` the spectrum of `A` is that of `M`, i.e. the closure of the
//! multipliers. An empty region drops the `M` block and leaves `A = D`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagonal::{
    QueryPoint, SparseVector, SpectrumClass, TruncatedDiagonal, UnboundednessWitness,
    DEFAULT_WITNESS_BUDGET,
};
use crate::error::{Error, Result};
use crate::region::{RegionSpec, Window};
use crate::serde_ext::{ext_f64, format_ext};
use crate::volterra::{self, GridFunction, NormExponent, ResolventEstimate};

/// Norm on the direct sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumNorm {
    /// `‖(x, y)‖ = ‖x‖ + ‖y‖`.
    #[default]
    OneSum,
    /// `‖(x, y)‖ = (‖x‖² + ‖y‖²)^{1/2}`, the Hilbert sum; needs `p = 2`.
    TwoSum,
}

impl SumNorm {
    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            SumNorm::OneSum => a + b,
            SumNorm::TwoSum => a.hypot(b),
        }
    }
}

/// Grid and norm of the `L_p(0, 1)` component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VolterraConfig {
    pub n_cells: usize,
    pub p: NormExponent,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        Self {
            n_cells: 256,
            p: NormExponent::Two,
        }
    }
}

/// An element `(x, y)` of `ℓ² ⊕ L_p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVector {
    pub x: SparseVector,
    pub y: GridFunction,
}

impl PairVector {
    pub fn new(x: SparseVector, y: GridFunction) -> Self {
        Self { x, y }
    }

    pub fn in_domain(&self) -> bool {
        self.y.satisfies_boundary_condition()
    }
}

/// Which block supplies an unboundedness witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Multiplier,
    Differentiation,
}

/// A domain vector of `A` with `‖Av‖ / ‖v‖ = ratio`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairWitness {
    pub block: Block,
    pub vector: PairVector,
    /// Basis index of the `ℓ²` part for multiplier witnesses.
    pub index: Option<usize>,
    pub ratio: f64,
}

/// `‖R(λ, A)‖` as the maximum of the block norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockResolventNorm {
    #[serde(serialize_with = "ext_f64")]
    pub truncated: f64,
    #[serde(serialize_with = "ext_f64")]
    pub exact_limit: f64,
    /// Truncated `‖R(λ, M)‖`, absent for an empty region.
    pub diagonal_truncated: Option<f64>,
    pub volterra: f64,
}

/// Certificate attached to a spectral classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// `‖(A − λ)(e_index, 0)‖ = residual` with `‖(e_index, 0)‖ = 1`.
    ApproximateEigenvector { index: usize, residual: f64 },
    /// Finite block norms bounding `‖R(λ, A)‖`.
    Resolvent {
        #[serde(serialize_with = "ext_f64")]
        diagonal_exact: f64,
        volterra: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReportA {
    pub lambda: Complex64,
    pub class: SpectrumClass,
    #[serde(serialize_with = "ext_f64")]
    pub dist_to_sigma: f64,
    #[serde(serialize_with = "ext_f64")]
    pub resolvent_norm_truncated: f64,
    #[serde(serialize_with = "ext_f64")]
    pub resolvent_norm_exact_limit: f64,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub point: usize,
    pub continuous: usize,
    pub resolvent_set: usize,
}

impl ClassCounts {
    pub fn record(&mut self, class: &SpectrumClass) {
        match class {
            SpectrumClass::Point { .. } => self.point += 1,
            SpectrumClass::Continuous { .. } => self.continuous += 1,
            SpectrumClass::ResolventSet { .. } => self.resolvent_set += 1,
        }
    }
}

/// Classification of every node of a window lattice, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub nodes: Vec<SpectralReportA>,
    pub counts: ClassCounts,
}

impl SpectrumReport {
    /// CSV with columns `re, im, class, dist, inv_norm_truncated, inv_norm_exact`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,class,dist,inv_norm_truncated,inv_norm_exact\n");
        for r in &self.nodes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_ext(r.lambda.re),
                format_ext(r.lambda.im),
                r.class.label(),
                format_ext(r.dist_to_sigma),
                format_ext(1.0 / r.resolvent_norm_truncated),
                format_ext(1.0 / r.resolvent_norm_exact_limit)
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct DirectSumOperator {
    m_part: Option<TruncatedDiagonal>,
    volterra: VolterraConfig,
    sum_norm: SumNorm,
}

impl DirectSumOperator {
    /// Builds `A` for `spec` with `n_trunc` multipliers; an empty `spec`
    /// yields `A = D`.
    pub fn new(
        spec: RegionSpec,
        n_trunc: usize,
        volterra: VolterraConfig,
        sum_norm: SumNorm,
    ) -> Result<Self> {
        let m_part = if spec.is_empty() {
            None
        } else {
            Some(TruncatedDiagonal::new(spec, n_trunc)?)
        };
        Self::from_parts(m_part, volterra, sum_norm)
    }

    pub fn from_parts(
        m_part: Option<TruncatedDiagonal>,
        volterra: VolterraConfig,
        sum_norm: SumNorm,
    ) -> Result<Self> {
        if sum_norm == SumNorm::TwoSum && volterra.p != NormExponent::Two {
            return Err(Error::InvalidArgument(
                "the Hilbert two-sum requires p = 2".into(),
            ));
        }
        if volterra.n_cells < 2 {
            return Err(Error::InvalidArgument("need at least 2 cells".into()));
        }
        Ok(Self {
            m_part,
            volterra,
            sum_norm,
        })
    }

    pub fn m_part(&self) -> Option<&TruncatedDiagonal> {
        self.m_part.as_ref()
    }

    pub fn volterra(&self) -> VolterraConfig {
        self.volterra
    }

    pub fn sum_norm(&self) -> SumNorm {
        self.sum_norm
    }

    pub fn spec(&self) -> RegionSpec {
        self.m_part
            .as_ref()
            .map(|m| m.spec().clone())
            .unwrap_or_default()
    }

    /// `dist(λ, σ)`, `+∞` for an empty region.
    pub fn distance(&self, lambda: Complex64) -> f64 {
        self.m_part
            .as_ref()
            .map_or(f64::INFINITY, |m| m.spec().distance(lambda))
    }

    pub fn norm(&self, v: &PairVector) -> f64 {
        self.sum_norm.combine(v.x.norm(), v.y.norm())
    }

    fn check_pair(&self, v: &PairVector) -> Result<()> {
        if v.y.n_cells() != self.volterra.n_cells || v.y.p() != self.volterra.p {
            return Err(Error::InvalidArgument(format!(
                "grid function on {} cells (p = {}) does not match the operator's {} cells (p = {})",
                v.y.n_cells(),
                v.y.p().as_int(),
                self.volterra.n_cells,
                self.volterra.p.as_int()
            )));
        }
        if self.m_part.is_none() && !v.x.entries().is_empty() {
            return Err(Error::DomainViolation(
                "empty spectrum: the sequence component is absent".into(),
            ));
        }
        Ok(())
    }

    pub fn apply(&self, v: &PairVector) -> Result<PairVector> {
        self.check_pair(v)?;
        let x = match &self.m_part {
            Some(m) => m.apply(&v.x)?,
            None => SparseVector::zero(),
        };
        Ok(PairVector::new(x, volterra::differentiate(&v.y)?))
    }

    /// `(A − λ) v`.
    pub fn apply_shifted(&self, lambda: Complex64, v: &PairVector) -> Result<PairVector> {
        let av = self.apply(v)?;
        Ok(PairVector::new(
            av.x.add_scaled(-lambda, &v.x),
            av.y.add_scaled(-lambda, &v.y)?,
        ))
    }

    /// `R(λ, A) w = (R(λ, M) x, R(λ, D) y)`.
    pub fn resolvent_apply(&self, lambda: Complex64, w: &PairVector) -> Result<PairVector> {
        self.check_pair(w)?;
        let x = match &self.m_part {
            Some(m) => m.resolvent_apply(lambda, &w.x)?,
            None => SparseVector::zero(),
        };
        Ok(PairVector::new(x, volterra::resolvent_apply(lambda, &w.y)?))
    }

    pub fn volterra_estimate(&self, lambda: Complex64) -> Result<ResolventEstimate> {
        volterra::resolvent_norm_estimate(lambda, self.volterra.n_cells, self.volterra.p)
    }

    /// Block-diagonal operators have norm `max(‖R(λ,M)‖, ‖R(λ,D)‖)` under
    /// both the one-sum and the two-sum norm.
    pub fn resolvent_norm(&self, lambda: Complex64) -> Result<BlockResolventNorm> {
        let vol = self.volterra_estimate(lambda)?.norm_estimate;
        Ok(match &self.m_part {
            Some(m) => {
                let r = m.resolvent_norm(lambda);
                BlockResolventNorm {
                    truncated: r.truncated.max(vol),
                    exact_limit: r.exact_limit.max(vol),
                    diagonal_truncated: Some(r.truncated),
                    volterra: vol,
                }
            }
            None => BlockResolventNorm {
                truncated: vol,
                exact_limit: vol,
                diagonal_truncated: None,
                volterra: vol,
            },
        })
    }

    /// Classifies `λ` against `σ(A) = σ(M)`; the `D` block contributes no
    /// spectrum.
    pub fn classify(&self, lambda: &QueryPoint, tol: f64) -> Result<SpectralReportA> {
        let z = lambda.value();
        let norms = self.resolvent_norm(z)?;
        let dist = self.distance(z);
        let (class, certificate) = match &self.m_part {
            Some(m) => {
                let class = m.classify(lambda, tol);
                let certificate = if class.in_spectrum() {
                    let (v, residual) = m.approx_eigenvector(z);
                    Certificate::ApproximateEigenvector {
                        index: v.max_index().expect("basis vector"),
                        residual,
                    }
                } else {
                    Certificate::Resolvent {
                        diagonal_exact: 1.0 / dist,
                        volterra: norms.volterra,
                    }
                };
                (class, certificate)
            }
            None => (
                SpectrumClass::ResolventSet {
                    dist,
                    resolvent_norm: norms.exact_limit,
                    resolvent_norm_truncated: norms.truncated,
                },
                Certificate::Resolvent {
                    diagonal_exact: 0.0,
                    volterra: norms.volterra,
                },
            ),
        };
        Ok(SpectralReportA {
            lambda: z,
            class,
            dist_to_sigma: dist,
            resolvent_norm_truncated: norms.truncated,
            resolvent_norm_exact_limit: norms.exact_limit,
            certificate,
        })
    }

    /// Classification over an `nx × ny` lattice of `window`, row-major.
    pub fn spectrum_report(
        &self,
        window: Window,
        nx: usize,
        ny: usize,
        tol: f64,
    ) -> Result<SpectrumReport> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {nx}x{ny}"
            )));
        }
        let nodes = window
            .nodes(nx, ny)
            .into_par_iter()
            .map(|z| self.classify(&QueryPoint::Float(z), tol))
            .collect::<Result<Vec<_>>>()?;
        let mut counts = ClassCounts::default();
        nodes.iter().for_each(|r| counts.record(&r.class));
        Ok(SpectrumReport {
            window,
            nx,
            ny,
            nodes,
            counts,
        })
    }

    /// A domain vector with Rayleigh ratio above `threshold`. The
    /// differentiation block always supplies one; the multiplier block only
    /// when the region is unbounded.
    pub fn unboundedness_witness(&self, threshold: f64, block: Block) -> Result<PairWitness> {
        let cfg = self.volterra;
        match block {
            Block::Differentiation => {
                let w = volterra::unboundedness_witness(threshold, cfg.n_cells, cfg.p)?;
                let v = PairVector::new(SparseVector::zero(), w.function);
                let ratio = self.norm(&self.apply(&v)?) / self.norm(&v);
                Ok(PairWitness {
                    block,
                    vector: v,
                    index: None,
                    ratio,
                })
            }
            Block::Multiplier => {
                let m = self.m_part.as_ref().ok_or(Error::EmptyRegion)?;
                match m.unboundedness_witness(threshold, DEFAULT_WITNESS_BUDGET)? {
                    UnboundednessWitness::Witness {
                        index,
                        vector,
                        ratio,
                    } => Ok(PairWitness {
                        block,
                        vector: PairVector::new(vector, GridFunction::zeros(cfg.n_cells, cfg.p)?),
                        index: Some(index),
                        ratio,
                    }),
                    UnboundednessWitness::Bounded { enclosing_radius } => {
                        Err(Error::InvalidArgument(format!(
                            "multiplier block is bounded by {enclosing_radius}"
                        )))
                    }
                }
            }
        }
    }
}
