//! Pseudospectra of `A` and the verification battery.
//!
//! A sweep evaluates `s(λ) = 1/‖R(λ, A)‖` on a lattice, both on the
//! truncation (`s_truncated`) and in the limit (`s_exact = min(dist(λ, σ),
//! 1/‖R(λ, D)‖)`). The ε-pseudospectrum is the sublevel set `{s < ε}`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagonal::{QueryPoint, SparseVector, SpectrumClass, TruncatedDiagonal};
use crate::direct_sum::{Block, DirectSumOperator, PairVector, SumNorm, VolterraConfig};
use crate::error::{Error, Result};
use crate::region::{RegionSpec, Window};
use crate::serde_ext::{ext_f64, format_ext};
use crate::volterra::{self, GridFunction, NormExponent};

/// Classification tolerance used throughout the battery.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    /// Strictly decreasing level-set thresholds.
    pub epsilons: Vec<f64>,
    pub seed: u64,
    /// Region samples for the covering-radius estimate.
    pub covering_samples: usize,
    pub tol: f64,
}

impl SweepConfig {
    pub fn new(window: Window, nx: usize, ny: usize) -> Self {
        Self {
            window,
            nx,
            ny,
            epsilons: vec![1e-1, 1e-2, 1e-3],
            seed: 0,
            covering_samples: 1000,
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        if self.epsilons.iter().any(|e| e.is_nan() || *e <= 0.0) {
            return Err(Error::InvalidArgument("epsilons must be positive".into()));
        }
        if self.epsilons.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidArgument(
                "epsilons must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }
}

/// One lattice node of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepNode {
    pub lambda: Complex64,
    /// `"point"`, `"continuous"`, `"resolvent_set"`, or `"error"`.
    pub class: &'static str,
    #[serde(serialize_with = "ext_f64")]
    pub dist: f64,
    #[serde(serialize_with = "ext_f64")]
    pub s_truncated: f64,
    #[serde(serialize_with = "ext_f64")]
    pub s_exact: f64,
    /// `‖R(λ, D)‖`; the `M` block dominates iff `1/dist ≥ volterra_norm`.
    pub volterra_norm: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    /// Covering radius of the multiplier prefix over `σ ∩ window`; absent
    /// when `σ` misses the window or is empty.
    pub covering_radius: Option<f64>,
    /// `max |s_truncated − s_exact|` over nodes with `dist > covering_radius`.
    pub max_deviation: f64,
    pub point: usize,
    pub continuous: usize,
    pub resolvent_set: usize,
    pub errors: usize,
    /// `(ε, #{nodes with s_truncated < ε})` per threshold.
    pub sublevel_counts: Vec<(f64, usize)>,
    /// Whether every sublevel set contains the next smaller one.
    pub nested: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub nodes: Vec<SweepNode>,
    pub summary: SweepSummary,
}

impl SweepResult {
    /// CSV with columns `re, im, class, dist, s_truncated, s_exact`, one
    /// 0/1 column `eps_<ε>` per threshold, and `error`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,class,dist,s_truncated,s_exact");
        for e in &self.config.epsilons {
            write!(out, ",eps_{e:e}").unwrap();
        }
        out.push_str(",error\n");
        for n in &self.nodes {
            write!(
                out,
                "{},{},{},{},{},{}",
                format_ext(n.lambda.re),
                format_ext(n.lambda.im),
                n.class,
                format_ext(n.dist),
                format_ext(n.s_truncated),
                format_ext(n.s_exact)
            )
            .unwrap();
            for e in &self.config.epsilons {
                out.push_str(if n.s_truncated < *e { ",1" } else { ",0" });
            }
            out.push(',');
            if let Some(msg) = &n.error {
                out.push_str(&msg.replace([',', '\n'], ";"));
            }
            out.push('\n');
        }
        out
    }
}

fn sweep_node(a: &DirectSumOperator, lambda: Complex64, tol: f64) -> SweepNode {
    let dist = a.distance(lambda);
    let failed = |e: Error| SweepNode {
        lambda,
        class: "error",
        dist,
        s_truncated: f64::NAN,
        s_exact: f64::NAN,
        volterra_norm: f64::NAN,
        error: Some(e.to_string()),
    };
    let norms = match a.resolvent_norm(lambda) {
        Ok(n) => n,
        Err(e) => return failed(e),
    };
    let class = match a.m_part() {
        Some(m) => m.classify(&QueryPoint::Float(lambda), tol).label(),
        None => "resolvent_set",
    };
    SweepNode {
        lambda,
        class,
        dist,
        s_truncated: 1.0 / norms.truncated,
        s_exact: dist.min(1.0 / norms.volterra),
        volterra_norm: norms.volterra,
        error: None,
    }
}

/// Evaluates `s(λ)` on every node of the lattice, row-major. Node failures
/// are recorded inline and never abort the sweep.
pub fn sweep(a: &DirectSumOperator, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let nodes: Vec<SweepNode> = cfg
        .window
        .nodes(cfg.nx, cfg.ny)
        .into_par_iter()
        .map(|z| sweep_node(a, z, cfg.tol))
        .collect();

    let covering_radius = a.m_part().and_then(|m| {
        m.covering_radius(cfg.window, cfg.covering_samples, cfg.seed)
            .ok()
            .map(|r| r.radius_estimate)
    });
    let cutoff = covering_radius.unwrap_or(0.0);
    let max_deviation = nodes
        .iter()
        .filter(|n| n.error.is_none() && n.dist > cutoff)
        .map(|n| (n.s_truncated - n.s_exact).abs())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max);
    let count = |label: &str| nodes.iter().filter(|n| n.class == label).count();
    let sublevel: Vec<Vec<bool>> = cfg
        .epsilons
        .iter()
        .map(|e| nodes.iter().map(|n| n.s_truncated < *e).collect())
        .collect();
    let nested = sublevel
        .windows(2)
        .all(|w| w[1].iter().zip(&w[0]).all(|(small, big)| !small || *big));
    let summary = SweepSummary {
        covering_radius,
        max_deviation,
        point: count("point"),
        continuous: count("continuous"),
        resolvent_set: count("resolvent_set"),
        errors: count("error"),
        sublevel_counts: cfg
            .epsilons
            .iter()
            .zip(&sublevel)
            .map(|(e, s)| (*e, s.iter().filter(|b| **b).count()))
            .collect(),
        nested,
    };
    Ok(SweepResult {
        config: cfg.clone(),
        nodes,
        summary,
    })
}

/// Budget of the verification battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    fn truncation(self) -> usize {
        match self {
            Profile::Quick => 1024,
            Profile::Full => 4096,
        }
    }

    fn cells(self) -> usize {
        match self {
            Profile::Quick => 128,
            Profile::Full => 256,
        }
    }

    fn lambdas(self) -> usize {
        match self {
            Profile::Quick => 60,
            Profile::Full => 200,
        }
    }

    fn grid(self) -> usize {
        match self {
            Profile::Quick => 11,
            Profile::Full => 21,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "quick" => Ok(Profile::Quick),
            "full" => Ok(Profile::Full),
            _ => Err(format!("unknown profile '{s}' (expected quick or full)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub profile: Profile,
    pub region: RegionSpec,
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl VerifyReport {
    pub fn success(&self) -> bool {
        self.failed == 0
    }
}

/// A window around the region: the enclosing disk plus a margin when
/// bounded, otherwise a box around the point of `σ` nearest the origin.
pub fn default_window(spec: &RegionSpec) -> Window {
    let b = spec.bounds();
    if spec.is_empty() {
        Window::centered(5.0)
    } else if b.bounded {
        Window::centered(b.enclosing_radius + 2.0)
    } else {
        let c = spec
            .nearest_point(Complex64::new(0.0, 0.0))
            .unwrap_or_default();
        Window::new(c.re - 5.0, c.re + 5.0, c.im - 5.0, c.im + 5.0).expect("finite window")
    }
}

/// Spectral parameters for property checks: half drawn from `σ`, half
/// uniform in the window.
pub fn sample_lambdas(
    spec: &RegionSpec,
    window: Window,
    count: usize,
    seed: u64,
) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let on_sigma = if spec.is_empty() {
        Vec::new()
    } else {
        spec.sample_boundary_and_interior(count / 2 + 1, seed ^ 0x5eed)
            .unwrap_or_default()
    };
    let mut out: Vec<Complex64> = on_sigma.into_iter().take(count / 2).collect();
    while out.len() < count {
        out.push(window.uniform(&mut rng));
    }
    out
}

struct Battery {
    checks: Vec<CheckOutcome>,
}

impl Battery {
    fn record(&mut self, name: &str, result: Result<std::result::Result<String, String>>) {
        let (status, detail) = match result {
            Ok(Ok(d)) => (CheckStatus::Pass, d),
            Ok(Err(d)) => (CheckStatus::Fail, d),
            Err(e) => (CheckStatus::Fail, format!("error: {e}")),
        };
        self.checks.push(CheckOutcome {
            name: name.into(),
            status,
            detail,
        });
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.checks.push(CheckOutcome {
            name: name.into(),
            status: CheckStatus::Skipped,
            detail: reason.into(),
        });
    }
}

fn verdict(ok: bool, detail: String) -> std::result::Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Runs every module's invariant checks against `spec`.
pub fn verify_all(spec: &RegionSpec, profile: Profile) -> VerifyReport {
    let mut b = Battery { checks: Vec::new() };
    let window = default_window(spec);
    let n_trunc = profile.truncation();
    let cells = profile.cells();
    let lambdas = sample_lambdas(spec, window, profile.lambdas(), 11);
    let mut rng = ChaCha8Rng::seed_from_u64(23);

    // region
    b.record("region.lipschitz", {
        let mut worst: f64 = 0.0;
        for _ in 0..profile.lambdas() {
            let (z1, z2) = (window.uniform(&mut rng), window.uniform(&mut rng));
            let (d1, d2) = (spec.distance(z1), spec.distance(z2));
            if d1.is_finite() {
                worst = worst.max((d1 - d2).abs() - (z1 - z2).norm());
            }
        }
        Ok(verdict(worst <= 1e-12, format!("max excess {worst:e}")))
    });
    if spec.is_empty() {
        b.skip("region.nearest_point", "empty region has no nearest point");
        b.skip("region.samples_in_set", "empty region has no samples");
    } else {
        b.record("region.nearest_point", {
            let worst = lambdas
                .iter()
                .map(|&z| {
                    let w = spec.nearest_point(z).expect("nonempty");
                    ((w - z).norm() - spec.distance(z)).abs() / z.norm().max(1.0)
                })
                .fold(0.0, f64::max);
            Ok(verdict(
                worst <= 1e-12,
                format!("max relative mismatch {worst:e}"),
            ))
        });
        b.record("region.samples_in_set", {
            spec.sample_boundary_and_interior(profile.lambdas(), 3)
                .map(|pts| {
                    let worst = pts.iter().map(|&z| spec.distance(z)).fold(0.0, f64::max);
                    verdict(worst <= 1e-12, format!("max distance {worst:e}"))
                })
        });
    }

    // multipliers and the diagonal block
    let diag = if spec.is_empty() {
        None
    } else {
        TruncatedDiagonal::new(spec.clone(), n_trunc).ok()
    };
    match &diag {
        None => {
            for name in [
                "multipliers.membership",
                "multipliers.covering_monotone",
                "diagonal.resolvent_identity",
                "diagonal.truncated_norm_bound",
                "diagonal.point_witness",
                "diagonal.approx_eigenvector",
            ] {
                b.skip(name, "empty region: the multiplication block is absent");
            }
        }
        Some(m) => diagonal_checks(&mut b, m, window, &lambdas, &mut rng),
    }

    // differentiation block
    volterra_checks(&mut b, profile, cells);

    // assembled operator
    match DirectSumOperator::new(
        spec.clone(),
        n_trunc,
        VolterraConfig {
            n_cells: cells,
            p: NormExponent::Two,
        },
        SumNorm::OneSum,
    ) {
        Err(e) => b.record("direct_sum.construct", Err(e)),
        Ok(a) => direct_sum_checks(&mut b, &a, spec, window, &lambdas, profile),
    }

    let count = |s: CheckStatus| b.checks.iter().filter(|c| c.status == s).count();
    VerifyReport {
        profile,
        region: spec.clone(),
        passed: count(CheckStatus::Pass),
        failed: count(CheckStatus::Fail),
        skipped: count(CheckStatus::Skipped),
        checks: b.checks,
    }
}

fn diagonal_checks(
    b: &mut Battery,
    m: &TruncatedDiagonal,
    window: Window,
    lambdas: &[Complex64],
    rng: &mut ChaCha8Rng,
) {
    let spec = m.spec();
    let n = m.truncation();
    b.record("multipliers.membership", {
        let worst = m
            .values()
            .iter()
            .map(|v| spec.distance(*v) / v.norm().max(1.0))
            .fold(0.0, f64::max);
        Ok(verdict(
            worst <= 1e-12,
            format!("max scaled distance {worst:e} over {n} multipliers"),
        ))
    });
    b.record("multipliers.covering_monotone", {
        let radii: Result<Vec<f64>> = [n / 4, n / 2, n]
            .iter()
            .map(|&k| {
                crate::multipliers::covering_radius_of(
                    spec,
                    &m.values()[..k.max(1)],
                    window,
                    500,
                    5,
                )
                .map(|r| r.radius_estimate)
            })
            .collect();
        radii.map(|r| verdict(r.windows(2).all(|w| w[1] <= w[0]), format!("radii {r:?}")))
    });
    b.record("diagonal.resolvent_identity", {
        let mut worst: f64 = 0.0;
        let mut tried = 0;
        for &lambda in lambdas.iter().take(100) {
            let entries: Vec<(usize, Complex64)> = {
                let mut idx: Vec<usize> = (0..5).map(|_| rng.random_range(1..=n)).collect();
                idx.sort_unstable();
                idx.dedup();
                idx.into_iter()
                    .map(|i| {
                        (
                            i,
                            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                        )
                    })
                    .collect()
            };
            let x = SparseVector::new(entries).expect("sorted");
            match m.resolvent_apply(lambda, &x) {
                Ok(r) => {
                    let back = m.apply(&r).expect("in range").add_scaled(-lambda, &r);
                    let err = back.add_scaled(Complex64::new(-1.0, 0.0), &x).norm() / x.norm();
                    worst = worst.max(err);
                    tried += 1;
                }
                Err(Error::SingularEntry(_)) => {}
                Err(e) => {
                    worst = f64::INFINITY;
                    eprintln!("{e}");
                }
            }
        }
        Ok(verdict(
            worst <= 1e-12,
            format!("max relative error {worst:e} over {tried} cases"),
        ))
    });
    b.record("diagonal.truncated_norm_bound", {
        let prefixes = [n / 4, n / 2, n].map(|k| k.max(1));
        let mut ok = true;
        for &lambda in lambdas {
            let limit = 1.0 / spec.distance(lambda);
            let mut prev = 0.0;
            for &k in &prefixes {
                let gap = m.values()[..k]
                    .iter()
                    .map(|v| (v - lambda).norm())
                    .fold(f64::INFINITY, f64::min);
                let t = 1.0 / gap;
                ok &= t >= prev && t <= limit * (1.0 + 1e-12);
                prev = t;
            }
        }
        Ok(verdict(
            ok,
            format!("{} lambdas, prefixes {prefixes:?}", lambdas.len()),
        ))
    });
    b.record("diagonal.point_witness", {
        let mut bad = Vec::new();
        for _ in 0..50 {
            let k = rng.random_range(1..=n);
            let q = QueryPoint::Exact(m.exact_multiplier(k).clone());
            match m.classify(&q, DEFAULT_TOL) {
                SpectrumClass::Point { index, .. }
                    if index <= k
                        && m.exact_multiplier(index) == m.exact_multiplier(k)
                        && (1..index).all(|j| m.exact_multiplier(j) != m.exact_multiplier(k)) => {}
                other => bad.push((k, other.label())),
            }
        }
        Ok(verdict(bad.is_empty(), format!("mismatches {bad:?}")))
    });
    b.record("diagonal.approx_eigenvector", {
        let coarse = TruncatedDiagonal::from_sequence(m.sequence().clone(), (n / 16).max(1));
        let cov = m.covering_radius(window, 500, 9);
        match (coarse, cov) {
            (Ok(coarse), Ok(cov)) => {
                let on_sigma: Vec<_> = lambdas
                    .iter()
                    .filter(|z| spec.distance(**z) == 0.0 && window.contains(**z))
                    .collect();
                let mut ok = true;
                let mut worst: f64 = 0.0;
                for &&z in &on_sigma {
                    let fine = m.approx_eigenvector(z).1;
                    ok &= fine <= coarse.approx_eigenvector(z).1;
                    worst = worst.max(fine);
                }
                // sampled covering radius may undershoot; allow 1.2x
                ok &= worst <= 1.2 * cov.radius_estimate + 1e-12;
                Ok(verdict(
                    ok,
                    format!(
                        "max residual {worst:e} vs covering radius {:e} over {} points",
                        cov.radius_estimate,
                        on_sigma.len()
                    ),
                ))
            }
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    });
    b.record("diagonal.no_residual_class", {
        let labels: Vec<&str> = lambdas
            .iter()
            .map(|z| m.classify(&QueryPoint::Float(*z), DEFAULT_TOL).label())
            .collect();
        let ok = labels
            .iter()
            .all(|l| matches!(*l, "point" | "continuous" | "resolvent_set"));
        Ok(verdict(ok, format!("{} classifications", labels.len())))
    });
}

/// `sin(πt) + t² e^{it}`, smooth with `y(0) = 0`.
pub fn smooth_test_function(n_cells: usize, p: NormExponent) -> Result<GridFunction> {
    GridFunction::from_fn(n_cells, p, |t| {
        Complex64::new((std::f64::consts::PI * t).sin(), 0.0) + t * t * Complex64::new(0.0, t).exp()
    })
}

/// `(ratios, max |ratio − 4|)` of resolvent residuals under grid halving.
pub fn convergence_ratios(lambda: Complex64, cells: &[usize]) -> Result<Vec<f64>> {
    let residuals = cells
        .iter()
        .map(|&n| volterra::verify_resolvent(lambda, &smooth_test_function(n, NormExponent::Two)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.windows(2).map(|w| w[0] / w[1]).collect())
}

/// Spectral parameters for the order-of-convergence study.
pub fn convergence_lambdas() -> Vec<Complex64> {
    [
        (0.0, 0.0),
        (1.0, 0.0),
        (-20.0, 0.0),
        (20.0, 0.0),
        (0.0, 20.0),
        (-20.0, -20.0),
        (20.0, 20.0),
        (5.0, -5.0),
        (-7.0, 3.0),
        (10.0, -10.0),
    ]
    .iter()
    .map(|&(re, im)| Complex64::new(re, im))
    .collect()
}

fn volterra_checks(b: &mut Battery, profile: Profile, cells: usize) {
    let g = profile.grid();
    b.record("volterra.finite_resolvent", {
        let window = Window::centered(20.0);
        let nodes = window.nodes(g, g);
        let results: Vec<Result<f64>> = nodes
            .par_iter()
            .map(|&z| {
                volterra::resolvent_norm_estimate(z, cells, NormExponent::Two)
                    .map(|e| e.norm_estimate)
            })
            .collect();
        let bad = results
            .iter()
            .filter(|r| !matches!(r, Ok(v) if v.is_finite() && *v > 0.0))
            .count();
        Ok(verdict(
            bad == 0,
            format!("{bad} of {} nodes failed", nodes.len()),
        ))
    });
    b.record("volterra.order2", {
        let mut all = Vec::new();
        let mut ok = true;
        for lambda in convergence_lambdas() {
            match convergence_ratios(lambda, &[64, 128, 256]) {
                Ok(r) => {
                    ok &= r.iter().all(|x| (2.5..=6.0).contains(x));
                    all.extend(r);
                }
                Err(e) => return b.record("volterra.order2", Err(e)),
            }
        }
        let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = all.iter().cloned().fold(0.0, f64::max);
        Ok(verdict(ok, format!("ratios in [{lo:.3}, {hi:.3}]")))
    });
    b.record("volterra.boundary_and_linearity", {
        (|| {
            let y1 = smooth_test_function(cells, NormExponent::Two)?;
            let y2 = GridFunction::from_real_fn(cells, NormExponent::Two, |t| (3.0 * t).cos())?;
            let (alpha, beta) = (Complex64::new(0.5, -1.0), Complex64::new(-2.0, 0.25));
            let mut worst: f64 = 0.0;
            let mut boundary = true;
            for lambda in convergence_lambdas() {
                let combo = y1.scaled(alpha).add_scaled(beta, &y2)?;
                let lhs = volterra::resolvent_apply(lambda, &combo)?;
                let rhs = volterra::resolvent_apply(lambda, &y1)?
                    .scaled(alpha)
                    .add_scaled(beta, &volterra::resolvent_apply(lambda, &y2)?)?;
                boundary &= lhs.samples()[0] == Complex64::new(0.0, 0.0);
                let scale = lhs.max_abs().max(1.0);
                worst =
                    worst.max(lhs.add_scaled(Complex64::new(-1.0, 0.0), &rhs)?.max_abs() / scale);
            }
            Ok(verdict(
                boundary && worst <= 1e-12,
                format!("u(0) = 0: {boundary}, linearity defect {worst:e}"),
            ))
        })()
    });
    b.record("volterra.unbounded", {
        volterra::unboundedness_witness(1e3, 16384, NormExponent::Two)
            .map(|w| verdict(w.ratio > 1e3, format!("k = {}, ratio {:.3}", w.k, w.ratio)))
    });
}

fn direct_sum_checks(
    b: &mut Battery,
    a: &DirectSumOperator,
    spec: &RegionSpec,
    window: Window,
    lambdas: &[Complex64],
    profile: Profile,
) {
    b.record("direct_sum.spectrum_equality", {
        lambdas
            .par_iter()
            .map(|&z| {
                a.classify(&QueryPoint::Float(z), DEFAULT_TOL)
                    .map(|r| (z, r))
            })
            .collect::<Result<Vec<_>>>()
            .map(|reports| {
                let mismatches = reports
                    .iter()
                    .filter(|(z, r)| r.class.in_spectrum() == (spec.distance(*z) > DEFAULT_TOL))
                    .count();
                let resolvent = reports
                    .iter()
                    .filter(|(_, r)| !r.class.in_spectrum())
                    .count();
                let finite_off_sigma = reports
                    .iter()
                    .filter(|(_, r)| !r.class.in_spectrum())
                    .all(|(_, r)| r.resolvent_norm_exact_limit.is_finite());
                verdict(
                    mismatches == 0 && finite_off_sigma,
                    format!(
                        "{mismatches} mismatches, {resolvent} resolvent-set points of {}",
                        reports.len()
                    ),
                )
            })
    });
    b.record("direct_sum.unbounded_via_d", {
        let wide = DirectSumOperator::from_parts(
            a.m_part().cloned(),
            VolterraConfig {
                n_cells: 16384,
                p: NormExponent::Two,
            },
            SumNorm::OneSum,
        );
        wide.and_then(|w| w.unboundedness_witness(1e3, Block::Differentiation))
            .map(|w| verdict(w.ratio >= 1e3, format!("ratio {:.3}", w.ratio)))
    });
    if a.m_part().is_some() && !spec.is_bounded() {
        b.record("direct_sum.unbounded_via_m", {
            a.unboundedness_witness(1e3, Block::Multiplier).map(|w| {
                verdict(
                    w.ratio > 1e3,
                    format!("index {:?}, ratio {:.3}", w.index, w.ratio),
                )
            })
        });
    }
    b.record("direct_sum.resolvent_round_trip", {
        (|| {
            let cfg = a.volterra();
            let y = smooth_test_function(cfg.n_cells, cfg.p)?;
            let h = 1.0 / cfg.n_cells as f64;
            let mut worst: f64 = 0.0;
            let mut tried = 0;
            for &z in lambdas.iter().filter(|z| z.norm() <= 4.0).take(20) {
                let x = match a.m_part() {
                    Some(m) => SparseVector::new(vec![
                        (1, Complex64::new(1.0, 0.0)),
                        (m.truncation(), Complex64::new(0.0, 2.0)),
                    ])
                    .or_else(|_| Ok::<_, Error>(SparseVector::basis(1)))?,
                    None => SparseVector::zero(),
                };
                let w = PairVector::new(x, y.clone());
                let r = match a.resolvent_apply(z, &w) {
                    Ok(r) => r,
                    Err(Error::SingularEntry(_)) => continue,
                    Err(e) => return Err(e),
                };
                let back = a.apply_shifted(z, &r)?;
                let dx = back.x.add_scaled(Complex64::new(-1.0, 0.0), &w.x).norm();
                let dy = back
                    .y
                    .add_scaled(Complex64::new(-1.0, 0.0), &w.y)?
                    .max_abs();
                // O(h²) with a constant growing like |λ|²
                let allowed = (1e-10f64).max(10.0 * (1.0 + z.norm_sqr()) * h * h);
                worst = worst.max(dx.max(dy) / allowed);
                tried += 1;
            }
            Ok(verdict(
                worst <= 1.0,
                format!("max error/allowance {worst:.3} over {tried} pairs"),
            ))
        })()
    });

    // pseudospectra
    let g = profile.grid();
    let mut cfg = SweepConfig::new(window, g, g);
    cfg.covering_samples = 500;
    match sweep(a, &cfg) {
        Err(e) => b.record("pseudospec.sweep", Err(e)),
        Ok(res) => {
            b.record("pseudospec.nested_sublevels", {
                Ok(verdict(
                    res.summary.nested,
                    format!("{:?}", res.summary.sublevel_counts),
                ))
            });
            b.record("pseudospec.determinism", {
                sweep(a, &cfg).map(|again| {
                    verdict(
                        again.to_csv() == res.to_csv(),
                        "two sweeps compared byte-for-byte".into(),
                    )
                })
            });
            match res.summary.covering_radius {
                Some(cov) => {
                    let agree: Vec<bool> = res
                        .nodes
                        .iter()
                        .filter(|n| {
                            n.error.is_none()
                                && n.dist >= 10.0 * cov
                                && 1.0 / n.dist >= n.volterra_norm
                        })
                        .map(|n| (n.s_truncated - n.dist).abs() <= 1.2 * cov + 1e-12 * n.dist)
                        .collect();
                    let frac = fraction(&agree);
                    b.record(
                        "pseudospec.agreement",
                        Ok(verdict(
                            frac >= 0.95,
                            format!("{:.1}% of {} nodes", 100.0 * frac, agree.len()),
                        )),
                    );
                    let blow: Vec<bool> = res
                        .nodes
                        .iter()
                        .filter(|n| n.dist == 0.0)
                        .map(|n| n.s_truncated <= 1.2 * cov)
                        .collect();
                    let frac = fraction(&blow);
                    b.record(
                        "pseudospec.blowup_on_sigma",
                        Ok(verdict(
                            frac >= 0.95,
                            format!("{:.1}% of {} nodes", 100.0 * frac, blow.len()),
                        )),
                    );
                }
                None if spec.is_empty() => {
                    let ok = res.nodes.iter().all(|n| {
                        n.class == "resolvent_set" && n.s_exact > 0.0 && n.s_exact.is_finite()
                    });
                    b.record(
                        "pseudospec.empty_spectrum",
                        Ok(verdict(
                            ok,
                            format!(
                                "{} nodes, all resolvent set with finite norms",
                                res.nodes.len()
                            ),
                        )),
                    );
                }
                None => b.skip("pseudospec.agreement", "region does not meet the window"),
            }
            if spec
                .primitives
                .iter()
                .any(|p| matches!(p, crate::region::Primitive::FullPlane))
            {
                let none = res.nodes.iter().all(|n| n.class != "resolvent_set");
                b.record(
                    "pseudospec.spectrum_everywhere",
                    Ok(verdict(none, format!("{} nodes", res.nodes.len()))),
                );
            }
        }
    }
}

fn fraction(v: &[bool]) -> f64 {
    if v.is_empty() {
        1.0
    } else {
        v.iter().filter(|b| **b).count() as f64 / v.len() as f64
    }
}
