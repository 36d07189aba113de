//! The differentiation operator `Dx = x'` with `x(0) = 0` on `L_p(0, 1)` and
//! its resolvent `[R(λ, D) y](t) = ∫₀ᵗ e^{λ(t−s)} y(s) ds`.
//!
//! Functions live on a uniform grid `t_i = i/n` and norms use composite
//! trapezoid weights. The resolvent is applied matrix-free by the one-step
//! recurrence
//!
//! ```text
//! u_0 = 0,   u_{i+1} = e^{λh} u_i + (h/2) (e^{λh} y_i + y_{i+1}),
//! ```
//!
//! i.e. the trapezoid rule on each cell of the Volterra integral. The
//! resolvent is defined for every finite `λ`: `D` has empty spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest grid for which the resolvent matrix is materialized.
pub const MAX_MATERIALIZED_CELLS: usize = 4096;
/// Relative residual tolerance of the `p = 2` norm estimate.
pub const NORM_TOLERANCE: f64 = 1e-8;
pub const MAX_POWER_ITERATIONS: usize = 100_000;
/// Tolerance on `|x(0)|` for the domain condition.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Exponent of the `L_p` norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormExponent {
    #[serde(rename = "1")]
    One,
    #[default]
    #[serde(rename = "2")]
    Two,
}

impl NormExponent {
    pub fn from_int(p: u32) -> Result<Self> {
        match p {
            1 => Ok(NormExponent::One),
            2 => Ok(NormExponent::Two),
            _ => Err(Error::InvalidArgument(format!("p must be 1 or 2, got {p}"))),
        }
    }

    pub fn as_int(self) -> u32 {
        match self {
            NormExponent::One => 1,
            NormExponent::Two => 2,
        }
    }
}

/// Samples of a function on the uniform grid `t_i = i / n_cells`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    samples: Vec<Complex64>,
    p: NormExponent,
}

impl GridFunction {
    pub fn new(samples: Vec<Complex64>, p: NormExponent) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells, got {} samples",
                samples.len()
            )));
        }
        Ok(Self { samples, p })
    }

    pub fn from_fn(n_cells: usize, p: NormExponent, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let h = 1.0 / n_cells as f64;
        Self::new((0..=n_cells).map(|i| f(i as f64 * h)).collect(), p)
    }

    pub fn from_real_fn(n_cells: usize, p: NormExponent, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(n_cells, p, |t| Complex64::new(f(t), 0.0))
    }

    pub fn zeros(n_cells: usize, p: NormExponent) -> Result<Self> {
        Self::new(vec![Complex64::default(); n_cells + 1], p)
    }

    pub fn n_cells(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n_cells() as f64
    }

    pub fn p(&self) -> NormExponent {
        self.p
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self { samples, p: self.p }
    }

    /// `(∫₀¹ |x|^p)^{1/p}` by the composite trapezoid rule.
    pub fn norm(&self) -> f64 {
        let h = self.h();
        let n = self.n_cells();
        let pow = |z: &Complex64| match self.p {
            NormExponent::One => z.norm(),
            NormExponent::Two => z.norm_sqr(),
        };
        let interior: f64 = self.samples[1..n].iter().map(pow).sum();
        let total = h * (interior + 0.5 * (pow(&self.samples[0]) + pow(&self.samples[n])));
        match self.p {
            NormExponent::One => total,
            NormExponent::Two => total.sqrt(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn satisfies_boundary_condition(&self) -> bool {
        self.samples[0].norm() <= BOUNDARY_TOLERANCE
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|z| z * alpha).collect())
    }

    /// `self + alpha * other`; grids must match.
    pub fn add_scaled(&self, alpha: Complex64, other: &Self) -> Result<Self> {
        if other.samples.len() != self.samples.len() {
            return Err(Error::InvalidArgument(format!(
                "grid mismatch: {} vs {} cells",
                self.n_cells(),
                other.n_cells()
            )));
        }
        Ok(self.with_samples(
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        ))
    }
}

/// `x'` by second-order differences: central in the interior, one-sided
/// three-point at the endpoints. Exact on quadratics.
pub fn differentiate(x: &GridFunction) -> Result<GridFunction> {
    if !x.satisfies_boundary_condition() {
        return Err(Error::DomainViolation(format!(
            "x(0) = {} is not zero",
            x.samples[0]
        )));
    }
    Ok(derivative_unchecked(x))
}

fn derivative_unchecked(x: &GridFunction) -> GridFunction {
    let s = &x.samples;
    let n = x.n_cells();
    let inv2h = 0.5 / x.h();
    let mut d = Vec::with_capacity(n + 1);
    d.push((-3.0 * s[0] + 4.0 * s[1] - s[2]) * inv2h);
    for i in 1..n {
        d.push((s[i + 1] - s[i - 1]) * inv2h);
    }
    d.push((3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) * inv2h);
    x.with_samples(d)
}

fn step_factor(lambda: Complex64, h: f64) -> Result<Complex64> {
    let e = (lambda * h).exp();
    if e.re.is_finite() && e.im.is_finite() {
        Ok(e)
    } else {
        Err(Error::OverflowGuard {
            re: lambda.re,
            im: lambda.im,
            h,
        })
    }
}

/// `R(λ, D) y`. The result satisfies `u(0) = 0` exactly.
pub fn resolvent_apply(lambda: Complex64, y: &GridFunction) -> Result<GridFunction> {
    let h = y.h();
    let e = step_factor(lambda, h)?;
    let half_h = 0.5 * h;
    let ys = &y.samples;
    let mut u = Vec::with_capacity(ys.len());
    let mut cur = Complex64::default();
    u.push(cur);
    for i in 0..y.n_cells() {
        cur = e * cur + half_h * (e * ys[i] + ys[i + 1]);
        u.push(cur);
    }
    if !cur.re.is_finite() || !cur.im.is_finite() {
        return Err(Error::OverflowGuard {
            re: lambda.re,
            im: lambda.im,
            h,
        });
    }
    Ok(y.with_samples(u))
}

/// Max-norm over interior nodes of `(D − λ) R(λ, D) y − y`.
pub fn verify_resolvent(lambda: Complex64, y: &GridFunction) -> Result<f64> {
    let u = resolvent_apply(lambda, y)?;
    let du = derivative_unchecked(&u);
    let n = y.n_cells();
    Ok((1..n)
        .map(|i| (du.samples[i] - lambda * u.samples[i] - y.samples[i]).norm())
        .fold(0.0, f64::max))
}

/// How a resolvent norm estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    PowerIteration,
    ColumnSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventEstimate {
    pub lambda: Complex64,
    pub n_cells: usize,
    pub p: u32,
    pub norm_estimate: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub residual_tolerance: f64,
}

/// Trapezoid weights `w_i` of the grid norm.
fn weights(n_cells: usize) -> Vec<f64> {
    let h = 1.0 / n_cells as f64;
    let mut w = vec![h; n_cells + 1];
    w[0] = 0.5 * h;
    w[n_cells] = 0.5 * h;
    w
}

/// The discretized resolvent as a dense lower-triangular matrix `K` with
/// `u = K y`:
/// `K_{i0} = (h/2) e^{λ t_i}`, `K_{ij} = h e^{λ(t_i − t_j)}` for `0 < j < i`,
/// `K_{ii} = h/2` for `i ≥ 1`, and row 0 zero.
pub fn resolvent_matrix(lambda: Complex64, n_cells: usize) -> Result<Vec<Vec<Complex64>>> {
    if n_cells > MAX_MATERIALIZED_CELLS {
        return Err(Error::InvalidArgument(format!(
            "{n_cells} cells exceeds the materialization limit {MAX_MATERIALIZED_CELLS}"
        )));
    }
    if n_cells < 2 {
        return Err(Error::InvalidArgument("need at least 2 cells".into()));
    }
    let h = 1.0 / n_cells as f64;
    let e = step_factor(lambda, h)?;
    let mut powers = Vec::with_capacity(n_cells + 1);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..=n_cells {
        powers.push(acc);
        acc *= e;
    }
    let mut k = vec![vec![Complex64::default(); n_cells + 1]; n_cells + 1];
    for (i, row) in k.iter_mut().enumerate().skip(1) {
        row[0] = 0.5 * h * powers[i];
        for j in 1..i {
            row[j] = h * powers[i - j];
        }
        row[i] += 0.5 * h;
    }
    if k.iter()
        .flatten()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::OverflowGuard {
            re: lambda.re,
            im: lambda.im,
            h,
        });
    }
    Ok(k)
}

/// Operator norm of the discretized `R(λ, D)` on the weighted grid space.
///
/// `p = 1`: weighted maximum column sum `max_j Σ_i w_i |K_ij| / w_j`, exact.
/// `p = 2`: largest singular value of `W^{1/2} K W^{-1/2}` by power
/// iteration on its normal matrix, stopped once the eigen-residual
/// `‖Bᴴ B v − θ v‖` falls below `1e-8 · θ`.
pub fn resolvent_norm_estimate(
    lambda: Complex64,
    n_cells: usize,
    p: NormExponent,
) -> Result<ResolventEstimate> {
    if n_cells < 16 {
        return Err(Error::InvalidArgument(format!(
            "norm estimation needs at least 16 cells, got {n_cells}"
        )));
    }
    let (norm_estimate, method, iterations) = match p {
        NormExponent::One => (column_sum_norm(lambda, n_cells)?, NormMethod::ColumnSum, 0),
        NormExponent::Two => {
            let (s, it) = spectral_norm(lambda, n_cells)?;
            (s, NormMethod::PowerIteration, it)
        }
    };
    Ok(ResolventEstimate {
        lambda,
        n_cells,
        p: p.as_int(),
        norm_estimate,
        method,
        iterations,
        residual_tolerance: NORM_TOLERANCE,
    })
}

fn column_sum_norm(lambda: Complex64, n_cells: usize) -> Result<f64> {
    let k = resolvent_matrix(lambda, n_cells)?;
    let w = weights(n_cells);
    Ok((0..=n_cells)
        .map(|j| (j..=n_cells).map(|i| w[i] * k[i][j].norm()).sum::<f64>() / w[j])
        .fold(0.0, f64::max))
}

/// Matrix-free `B = W^{1/2} K W^{-1/2}` and its adjoint.
struct WeightedResolvent {
    e: Complex64,
    h: f64,
    sqrt_w: Vec<f64>,
}

impl WeightedResolvent {
    fn new(lambda: Complex64, n_cells: usize) -> Result<Self> {
        let h = 1.0 / n_cells as f64;
        Ok(Self {
            e: step_factor(lambda, h)?,
            h,
            sqrt_w: weights(n_cells).into_iter().map(f64::sqrt).collect(),
        })
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let half_h = 0.5 * self.h;
        let y = |i: usize| v[i] / self.sqrt_w[i];
        let mut cur = Complex64::default();
        out[0] = cur;
        for i in 0..v.len() - 1 {
            cur = self.e * cur + half_h * (self.e * y(i) + y(i + 1));
            out[i + 1] = cur * self.sqrt_w[i + 1];
        }
    }

    /// `(Kᴴ z)_j = (h/2) (ē S_{j+1} + [j ≥ 1] S_j)` with
    /// `S_j = Σ_{i ≥ j} ē^{i−j} z_i`.
    fn apply_adjoint(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = v.len() - 1;
        let half_h = 0.5 * self.h;
        let ec = self.e.conj();
        let mut s_next = Complex64::default();
        for j in (0..=n).rev() {
            let s_j = v[j] * self.sqrt_w[j] + ec * s_next;
            let kz = if j >= 1 {
                half_h * (ec * s_next + s_j)
            } else {
                half_h * ec * s_next
            };
            out[j] = kz / self.sqrt_w[j];
            s_next = s_j;
        }
    }
}

fn spectral_norm(lambda: Complex64, n_cells: usize) -> Result<(f64, usize)> {
    let op = WeightedResolvent::new(lambda, n_cells)?;
    let len = n_cells + 1;
    // deterministic start with content at every frequency
    let mut v: Vec<Complex64> = (0..len)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.37).sin(), 0.25 * (i as f64 * 1.3).cos()))
        .collect();
    normalize(&mut v);
    let mut bv = vec![Complex64::default(); len];
    let mut w = vec![Complex64::default(); len];
    for it in 1..=MAX_POWER_ITERATIONS {
        op.apply(&v, &mut bv);
        op.apply_adjoint(&bv, &mut w);
        let theta: f64 = bv.iter().map(|z| z.norm_sqr()).sum();
        if !theta.is_finite() {
            return Err(Error::OverflowGuard {
                re: lambda.re,
                im: lambda.im,
                h: op.h,
            });
        }
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - theta * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual <= NORM_TOLERANCE * theta {
            return Ok((theta.sqrt(), it));
        }
        std::mem::swap(&mut v, &mut w);
        normalize(&mut v);
    }
    Err(Error::NonConvergence {
        iterations: MAX_POWER_ITERATIONS,
    })
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

/// `sin(kπt)` with `k = ⌈K/π⌉ + 1` and its Rayleigh ratio `‖x'‖/‖x‖ ≈ kπ > K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolterraWitness {
    pub k: usize,
    pub function: GridFunction,
    pub ratio: f64,
}

pub fn unboundedness_witness(
    threshold: f64,
    n_cells: usize,
    p: NormExponent,
) -> Result<VolterraWitness> {
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive and finite, got {threshold}"
        )));
    }
    let k = (threshold / PI).ceil() as usize + 1;
    let required = 8 * k;
    if n_cells < required {
        return Err(Error::GridTooCoarse {
            n_cells,
            k,
            required,
        });
    }
    let kpi = k as f64 * PI;
    let function = GridFunction::from_real_fn(n_cells, p, |t| (kpi * t).sin())?;
    let ratio = differentiate(&function)?.norm() / function.norm();
    Ok(VolterraWitness { k, function, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(n: usize, v: f64) -> GridFunction {
        GridFunction::from_real_fn(n, NormExponent::Two, |_| v).unwrap()
    }

    #[test]
    fn norms_of_simple_functions() {
        let one = constant(64, 1.0);
        assert!((one.norm() - 1.0).abs() < 1e-15);
        let lin = GridFunction::from_real_fn(64, NormExponent::One, |t| t).unwrap();
        assert!((lin.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn differentiate_reproduces_polynomials() {
        let x = GridFunction::from_real_fn(32, NormExponent::Two, |t| t).unwrap();
        let d = differentiate(&x).unwrap();
        assert!(d.samples().iter().all(|z| (z - 1.0).norm() < 1e-12));
        let x = GridFunction::from_real_fn(32, NormExponent::Two, |t| t * t).unwrap();
        let d = differentiate(&x).unwrap();
        for (i, z) in d.samples().iter().enumerate() {
            assert!((z - 2.0 * x.t(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn differentiate_rejects_nonzero_start() {
        let x = constant(8, 1.0);
        assert!(matches!(differentiate(&x), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn resolvent_at_zero_integrates() {
        let u = resolvent_apply(c(0.0, 0.0), &constant(64, 1.0)).unwrap();
        for (i, z) in u.samples().iter().enumerate() {
            assert!((z - u.t(i)).norm() < 1e-12);
        }
        let zero = GridFunction::zeros(64, NormExponent::Two).unwrap();
        assert_eq!(resolvent_apply(c(3.0, -2.0), &zero).unwrap(), zero);
    }

    #[test]
    fn resolvent_of_constant_at_one() {
        for n in [64, 128, 256] {
            let u = resolvent_apply(c(1.0, 0.0), &constant(n, 1.0)).unwrap();
            let h = u.h();
            let err = (0..=n)
                .map(|i| (u.samples()[i] - (u.t(i).exp() - 1.0)).norm())
                .fold(0.0, f64::max);
            assert!(err <= 5.0 * h * h, "n = {n}: {err}");
        }
    }

    #[test]
    fn overflow_guard() {
        let y = constant(4, 1.0);
        assert!(matches!(
            resolvent_apply(c(1e6, 0.0), &y),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn verify_resolvent_exact_at_zero() {
        assert!(verify_resolvent(c(0.0, 0.0), &constant(64, 1.0)).unwrap() <= 1e-10);
    }

    #[test]
    fn column_sum_at_zero_is_about_one() {
        let est = resolvent_norm_estimate(c(0.0, 0.0), 64, NormExponent::One).unwrap();
        // weighted column sums of the trapezoid integration matrix: max is 1 - h/2
        assert!((est.norm_estimate - (1.0 - 0.5 / 64.0)).abs() < 1e-12);
        assert_eq!(est.method, NormMethod::ColumnSum);
    }

    #[test]
    fn adjoint_is_consistent() {
        let op = WeightedResolvent::new(c(1.5, -2.0), 20).unwrap();
        let a: Vec<Complex64> = (0..21)
            .map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let b: Vec<Complex64> = (0..21)
            .map(|i| c((i as f64 * 0.7).cos(), i as f64 * 0.1))
            .collect();
        let mut ba = vec![Complex64::default(); 21];
        let mut bhb = vec![Complex64::default(); 21];
        op.apply(&a, &mut ba);
        op.apply_adjoint(&b, &mut bhb);
        let lhs: Complex64 = ba.iter().zip(&b).map(|(x, y)| x * y.conj()).sum();
        let rhs: Complex64 = a.iter().zip(&bhb).map(|(x, y)| x * y.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn witness_examples() {
        let w = unboundedness_witness(10.0, 400, NormExponent::Two).unwrap();
        assert_eq!(w.k, 5);
        assert!((w.ratio / (5.0 * PI) - 1.0).abs() < 0.05);
        let w = unboundedness_witness(1.0, 64, NormExponent::Two).unwrap();
        assert_eq!(w.k, 2);
        assert!((w.ratio / (2.0 * PI) - 1.0).abs() < 0.05);
        assert!(matches!(
            unboundedness_witness(1e3, 2559, NormExponent::Two),
            Err(Error::GridTooCoarse {
                k: 320,
                required: 2560,
                ..
            })
        ));
    }
}
