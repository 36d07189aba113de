//! The multiplication operator `M(x_n) = (m_n x_n)` on ℓ², truncated to its
//! first `N` multipliers.
//!
//! Vectors are finitely supported, hence always in the maximal domain of
//! `M`. Every numerical quantity is prefix-based; the exact limits that the
//! truncation approaches are reported alongside from the region geometry.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::ExactComplex;
use crate::multipliers::{covering_radius_of, CoveringRadiusReport, MultiplierSequence};
use crate::region::{RegionSpec, Window};
use crate::serde_ext::ext_f64;

/// Default search budget for [`TruncatedDiagonal::unboundedness_witness`].
pub const DEFAULT_WITNESS_BUDGET: usize = 1_000_000;

/// A finitely supported vector of ℓ² with 1-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SparseVector {
    entries: Vec<(usize, Complex64)>,
}

impl SparseVector {
    pub fn new(entries: Vec<(usize, Complex64)>) -> Result<Self> {
        if entries.first().is_some_and(|&(i, _)| i == 0) {
            return Err(Error::InvalidArgument("sparse indices are 1-based".into()));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidArgument(
                "sparse indices must be strictly increasing".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit basis vector `e_n`.
    pub fn basis(n: usize) -> Self {
        assert!(n >= 1, "sparse indices are 1-based");
        Self {
            entries: vec![(n, Complex64::new(1.0, 0.0))],
        }
    }

    pub fn entries(&self) -> &[(usize, Complex64)] {
        &self.entries
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.entries
            .binary_search_by_key(&n, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or_default()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|&(i, c)| (i, c * alpha)).collect(),
        }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: Complex64, other: &Self) -> Self {
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(i, x)), Some(&&(j, y))) => {
                    if i == j {
                        out.push((i, x + alpha * y));
                        a.next();
                        b.next();
                    } else if i < j {
                        out.push((i, x));
                        a.next();
                    } else {
                        out.push((j, alpha * y));
                        b.next();
                    }
                }
                (Some(&&(i, x)), None) => {
                    out.push((i, x));
                    a.next();
                }
                (None, Some(&&(j, y))) => {
                    out.push((j, alpha * y));
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self { entries: out }
    }
}

/// A spectral parameter given either exactly or as a float.
#[derive(Debug, Clone, PartialEq)]
pub enum QueryPoint {
    Exact(ExactComplex),
    Float(Complex64),
}

impl QueryPoint {
    pub fn value(&self) -> Complex64 {
        match self {
            QueryPoint::Exact(z) => z.to_complex64(),
            QueryPoint::Float(z) => *z,
        }
    }
}

impl From<Complex64> for QueryPoint {
    fn from(z: Complex64) -> Self {
        QueryPoint::Float(z)
    }
}

impl From<ExactComplex> for QueryPoint {
    fn from(z: ExactComplex) -> Self {
        QueryPoint::Exact(z)
    }
}

/// Where a spectral parameter lies relative to `σ(M)`.
///
/// There is deliberately no residual variant: a normal diagonal operator has
/// empty residual spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum SpectrumClass {
    /// `λ = m_index`. Float queries matched within one ulp per component are
    /// flagged `truncation_limited`.
    Point {
        index: usize,
        truncation_limited: bool,
    },
    /// `λ ∈ σ` but equal to none of `m_1..m_N`; `nearest_gap` is the
    /// distance to the closest multiplier of the prefix.
    Continuous {
        #[serde(serialize_with = "ext_f64")]
        dist: f64,
        nearest_index: usize,
        #[serde(serialize_with = "ext_f64")]
        nearest_gap: f64,
    },
    ResolventSet {
        #[serde(serialize_with = "ext_f64")]
        dist: f64,
        #[serde(serialize_with = "ext_f64")]
        resolvent_norm: f64,
        #[serde(serialize_with = "ext_f64")]
        resolvent_norm_truncated: f64,
    },
}

impl SpectrumClass {
    pub fn label(&self) -> &'static str {
        match self {
            SpectrumClass::Point { .. } => "point",
            SpectrumClass::Continuous { .. } => "continuous",
            SpectrumClass::ResolventSet { .. } => "resolvent_set",
        }
    }

    pub fn in_spectrum(&self) -> bool {
        !matches!(self, SpectrumClass::ResolventSet { .. })
    }
}

/// `‖R(λ, M)‖` on the truncation and in the limit `N → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventNorm {
    /// `max_{n ≤ N} 1/|m_n − λ|`, `+∞` on an exact hit.
    #[serde(serialize_with = "ext_f64")]
    pub truncated: f64,
    /// `1/dist(λ, σ)`, `+∞` for `λ ∈ σ`.
    #[serde(serialize_with = "ext_f64")]
    pub exact_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UnboundednessWitness {
    /// `‖M e_index‖ / ‖e_index‖ = |m_index| = ratio`.
    Witness {
        index: usize,
        vector: SparseVector,
        ratio: f64,
    },
    /// `σ` is bounded, so `‖M‖ = sup |m_n| ≤ enclosing_radius`.
    Bounded { enclosing_radius: f64 },
}

/// The first `N` multipliers of a dense sequence, acting diagonally.
#[derive(Debug, Clone)]
pub struct TruncatedDiagonal {
    seq: MultiplierSequence,
    values: Vec<Complex64>,
    exact: Vec<ExactComplex>,
    first_index: HashMap<ExactComplex, usize>,
}

impl TruncatedDiagonal {
    pub fn new(spec: RegionSpec, n: usize) -> Result<Self> {
        Self::from_sequence(MultiplierSequence::new(spec)?, n)
    }

    pub fn from_sequence(seq: MultiplierSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "truncation level must be at least 1".into(),
            ));
        }
        let prefix = seq.prefix(n);
        let mut first_index = HashMap::with_capacity(n);
        for m in &prefix {
            first_index.entry(m.exact.clone()).or_insert(m.n);
        }
        let (values, exact) = prefix.into_iter().map(|m| (m.value, m.exact)).unzip();
        Ok(Self {
            seq,
            values,
            exact,
            first_index,
        })
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    pub fn spec(&self) -> &RegionSpec {
        self.seq.spec()
    }

    pub fn sequence(&self) -> &MultiplierSequence {
        &self.seq
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `m_n` for `1 ≤ n ≤ N`.
    pub fn multiplier(&self, n: usize) -> Complex64 {
        self.values[n - 1]
    }

    pub fn exact_multiplier(&self, n: usize) -> &ExactComplex {
        &self.exact[n - 1]
    }

    fn check_support(&self, x: &SparseVector) -> Result<()> {
        match x.max_index() {
            Some(i) if i > self.truncation() => Err(Error::IndexBeyondTruncation {
                index: i,
                truncation: self.truncation(),
            }),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: &SparseVector) -> Result<SparseVector> {
        self.check_support(x)?;
        Ok(SparseVector {
            entries: x
                .entries
                .iter()
                .map(|&(n, c)| (n, self.multiplier(n) * c))
                .collect(),
        })
    }

    /// `(M − λ)⁻¹ x`, entrywise `x_n / (m_n − λ)`.
    pub fn resolvent_apply(&self, lambda: Complex64, x: &SparseVector) -> Result<SparseVector> {
        self.check_support(x)?;
        let entries = x
            .entries
            .iter()
            .map(|&(n, c)| {
                let d = self.multiplier(n) - lambda;
                if d == Complex64::new(0.0, 0.0) {
                    Err(Error::SingularEntry(n))
                } else {
                    Ok((n, c / d))
                }
            })
            .collect::<Result<_>>()?;
        Ok(SparseVector { entries })
    }

    pub fn resolvent_norm(&self, lambda: Complex64) -> ResolventNorm {
        let gap = self.nearest(lambda).1;
        ResolventNorm {
            truncated: 1.0 / gap,
            exact_limit: 1.0 / self.spec().distance(lambda),
        }
    }

    /// `(argmin_n |m_n − λ|, min_n |m_n − λ|)`, ties to the smallest index.
    fn nearest(&self, lambda: Complex64) -> (usize, f64) {
        let mut best = (1, f64::INFINITY);
        for (i, m) in self.values.iter().enumerate() {
            let d = (m - lambda).norm();
            if d < best.1 {
                best = (i + 1, d);
            }
        }
        best
    }

    pub fn classify(&self, lambda: &QueryPoint, tol: f64) -> SpectrumClass {
        let z = lambda.value();
        match lambda {
            QueryPoint::Exact(q) => {
                if let Some(&index) = self.first_index.get(q) {
                    return SpectrumClass::Point {
                        index,
                        truncation_limited: false,
                    };
                }
            }
            QueryPoint::Float(_) => {
                let within_ulp = |a: f64, b: f64| (a - b).abs() <= ulp(b);
                if let Some(i) = self
                    .values
                    .iter()
                    .position(|m| within_ulp(z.re, m.re) && within_ulp(z.im, m.im))
                {
                    return SpectrumClass::Point {
                        index: i + 1,
                        truncation_limited: true,
                    };
                }
            }
        }
        let dist = self.spec().distance(z);
        let (nearest_index, nearest_gap) = self.nearest(z);
        if dist <= tol {
            SpectrumClass::Continuous {
                dist,
                nearest_index,
                nearest_gap,
            }
        } else {
            SpectrumClass::ResolventSet {
                dist,
                resolvent_norm: 1.0 / dist,
                resolvent_norm_truncated: 1.0 / nearest_gap,
            }
        }
    }

    /// Unit basis vector `e_k` minimizing `‖(M − λ) e_k‖ = |m_k − λ|`.
    pub fn approx_eigenvector(&self, lambda: Complex64) -> (SparseVector, f64) {
        let (k, residual) = self.nearest(lambda);
        (SparseVector::basis(k), residual)
    }

    /// A basis vector with Rayleigh ratio above `k` when `σ` is unbounded;
    /// a norm bound otherwise. Searches `m_1, m_2, …` up to `budget`,
    /// continuing past the truncation if needed.
    pub fn unboundedness_witness(&self, k: f64, budget: usize) -> Result<UnboundednessWitness> {
        if k.is_nan() || k <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "threshold must be positive, got {k}"
            )));
        }
        let bounds = self.spec().bounds();
        if bounds.bounded {
            return Ok(UnboundednessWitness::Bounded {
                enclosing_radius: bounds.enclosing_radius,
            });
        }
        let found = (1..=budget).find_map(|n| {
            let m = if n <= self.truncation() {
                self.multiplier(n)
            } else {
                self.seq.value(n)
            };
            (m.norm() > k).then_some((n, m.norm()))
        });
        match found {
            Some((index, ratio)) => Ok(UnboundednessWitness::Witness {
                index,
                vector: SparseVector::basis(index),
                ratio,
            }),
            None => Err(Error::SearchBudgetExhausted { reached: budget }),
        }
    }

    pub fn covering_radius(
        &self,
        window: Window,
        samples: usize,
        seed: u64,
    ) -> Result<CoveringRadiusReport> {
        covering_radius_of(self.spec(), &self.values, window, samples, seed)
    }
}

fn ulp(x: f64) -> f64 {
    let a = x.abs();
    a.next_up() - a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Primitive;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn point_op(z: Complex64, n: usize) -> TruncatedDiagonal {
        TruncatedDiagonal::new(RegionSpec::single(Primitive::Point { z }), n).unwrap()
    }

    fn disk_op(n: usize) -> TruncatedDiagonal {
        TruncatedDiagonal::new(
            RegionSpec::single(Primitive::Disk {
                center: c(0.0, 0.0),
                radius: 1.0,
            }),
            n,
        )
        .unwrap()
    }

    #[test]
    fn sparse_vector_validation() {
        assert!(SparseVector::new(vec![(2, c(1.0, 0.0)), (1, c(1.0, 0.0))]).is_err());
        assert!(SparseVector::new(vec![(0, c(1.0, 0.0))]).is_err());
        let x = SparseVector::new(vec![(1, c(3.0, 0.0)), (4, c(0.0, 4.0))]).unwrap();
        assert_eq!(x.norm(), 5.0);
        assert_eq!(x.get(4), c(0.0, 4.0));
        assert_eq!(x.get(2), c(0.0, 0.0));
        let y = x.add_scaled(c(-1.0, 0.0), &SparseVector::basis(2));
        assert_eq!(y.entries().len(), 3);
    }

    #[test]
    fn apply_examples() {
        let op = point_op(c(3.0, 0.0), 4);
        assert_eq!(
            op.apply(&SparseVector::basis(1)).unwrap(),
            SparseVector::basis(1).scaled(c(3.0, 0.0))
        );
        assert_eq!(
            op.apply(&SparseVector::zero()).unwrap(),
            SparseVector::zero()
        );
        assert_eq!(
            op.apply(&SparseVector::basis(5)),
            Err(Error::IndexBeyondTruncation {
                index: 5,
                truncation: 4
            })
        );
    }

    #[test]
    fn resolvent_apply_examples() {
        let op = point_op(c(0.0, 0.0), 1);
        let r = op
            .resolvent_apply(c(2.0, 0.0), &SparseVector::basis(1))
            .unwrap();
        assert_eq!(r.get(1), c(-0.5, 0.0));
        assert_eq!(
            op.resolvent_apply(c(0.0, 0.0), &SparseVector::basis(1)),
            Err(Error::SingularEntry(1))
        );

        let op = disk_op(16);
        let x = SparseVector::new((1..=3).map(|n| (n, c(1.0, 0.0))).collect()).unwrap();
        let lambda = c(3.0, 0.0);
        let r = op.resolvent_apply(lambda, &x).unwrap();
        for n in 1..=3 {
            assert_eq!(r.get(n), c(1.0, 0.0) / (op.multiplier(n) - lambda));
        }
        let back = op.apply(&r).unwrap().add_scaled(-lambda, &r);
        assert!(back.add_scaled(c(-1.0, 0.0), &x).norm() <= 1e-12 * x.norm());
    }

    #[test]
    fn resolvent_norm_examples() {
        let op = disk_op(64);
        assert_eq!(op.resolvent_norm(c(2.0, 0.0)).exact_limit, 1.0);
        let op = point_op(c(0.0, 0.0), 1);
        let r = op.resolvent_norm(c(0.0, 1.0));
        assert_eq!((r.truncated, r.exact_limit), (1.0, 1.0));
        let hit = op.resolvent_norm(c(0.0, 0.0));
        assert_eq!(hit.truncated, f64::INFINITY);
        assert_eq!(hit.exact_limit, f64::INFINITY);
    }

    #[test]
    fn classify_examples() {
        let op = disk_op(64);
        let q = QueryPoint::Exact(op.exact_multiplier(5).clone());
        match op.classify(&q, 1e-9) {
            SpectrumClass::Point {
                index,
                truncation_limited,
            } => {
                assert!(index <= 5);
                assert_eq!(*op.exact_multiplier(index), *op.exact_multiplier(5));
                assert!(!truncation_limited);
            }
            other => panic!("{other:?}"),
        }
        match op.classify(&QueryPoint::Float(c(2.0, 0.0)), 1e-9) {
            SpectrumClass::ResolventSet { dist, .. } => assert_eq!(dist, 1.0),
            other => panic!("{other:?}"),
        }
        let float_hit = op.classify(&QueryPoint::Float(op.multiplier(7)), 1e-9);
        assert!(matches!(
            float_hit,
            SpectrumClass::Point {
                truncation_limited: true,
                ..
            }
        ));
    }

    #[test]
    fn approx_eigenvector_examples() {
        let op = disk_op(64);
        let (v, r) = op.approx_eigenvector(op.multiplier(3));
        let k = v.max_index().unwrap();
        assert!(k <= 3);
        assert_eq!(r, 0.0);
        let op = point_op(c(1.0, 0.0), 1);
        assert_eq!(
            op.approx_eigenvector(c(0.0, 0.0)),
            (SparseVector::basis(1), 1.0)
        );
    }

    #[test]
    fn witness_examples() {
        let op = disk_op(16);
        assert_eq!(
            op.unboundedness_witness(2.0, 100).unwrap(),
            UnboundednessWitness::Bounded {
                enclosing_radius: 1.0
            }
        );
        let hp = TruncatedDiagonal::new(
            RegionSpec::single(Primitive::HalfPlane {
                normal: c(1.0, 0.0),
                offset: 0.0,
            }),
            16,
        )
        .unwrap();
        match hp
            .unboundedness_witness(1e3, DEFAULT_WITNESS_BUDGET)
            .unwrap()
        {
            UnboundednessWitness::Witness { index, ratio, .. } => {
                assert!(ratio > 1e3);
                assert_eq!(ratio, hp.sequence().value(index).norm());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            hp.unboundedness_witness(1e3, 10),
            Err(Error::SearchBudgetExhausted { reached: 10 })
        );
    }
}
