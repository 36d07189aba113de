//! Dense multiplier sequences `(m_n)` inside a region.
//!
//! Indices are interleaved round-robin across the primitives of the region;
//! primitive `j` (0-based) of `P` owns the indices `n ≡ j + 1 (mod P)`.
//! Within a primitive the local index drives an exact rational
//! parametrization:
//!
//! | primitive  | local index `k` ↦ point                                             |
//! |------------|---------------------------------------------------------------------|
//! | point      | `z`                                                                 |
//! | segment    | `a + u_k (b − a)`, `u_k` from [`sequence::unit_interval`]           |
//! | disk       | `c + r·v(2 − v)·e(θ)` with `(v, θ)` from [`sequence::unit_square`]  |
//! | annulus    | `c + (r₀ + (r₁ − r₀) v)·e(θ)`                                       |
//! | rect       | `corner + w·u + i·h·v`                                              |
//! | half-plane | level `ℓ`, box `[0, 4^ℓ] × [−4^ℓ, 4^ℓ]` in (normal, tangent) coords |
//! | full plane | level `ℓ`, box `[−4^ℓ, 4^ℓ]²`                                       |
//!
//! `e(θ)` is the rational circle point of [`sequence::circle_point`]. For the
//! unbounded primitives `k = 2^ℓ (2i + 1)` selects the level `ℓ` and the
//! point `i + 1` of the unit square, so every bounded window is covered
//! ever more finely while the magnitudes grow without bound.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rational_from_f64, ExactComplex};
use crate::region::{Primitive, RegionSpec, Window};
use crate::sequence::{circle_point, split_level, unit_interval, unit_square};

/// Exact parameters of one primitive, converted from floats once.
#[derive(Debug, Clone)]
enum ExactPrimitive {
    Point(ExactComplex),
    Segment {
        a: ExactComplex,
        delta: ExactComplex,
    },
    Disk {
        center: ExactComplex,
        radius: BigRational,
    },
    Rect {
        corner: ExactComplex,
        width: BigRational,
        height: BigRational,
    },
    Annulus {
        center: ExactComplex,
        r_inner: BigRational,
        width: BigRational,
    },
    HalfPlane {
        normal: ExactComplex,
        /// `offset / |normal|²`, so that `normal · base` lies on the boundary line.
        base: BigRational,
    },
    FullPlane,
}

impl ExactPrimitive {
    fn from_primitive(p: &Primitive) -> Result<Self> {
        let ex = ExactComplex::from_complex64;
        let q = rational_from_f64;
        Ok(match *p {
            Primitive::Point { z } => ExactPrimitive::Point(ex(z)?),
            Primitive::Segment { a, b } => {
                let a = ex(a)?;
                let delta = &ex(b)? - &a;
                ExactPrimitive::Segment { a, delta }
            }
            Primitive::Disk { center, radius } => ExactPrimitive::Disk {
                center: ex(center)?,
                radius: q(radius)?,
            },
            Primitive::Rect {
                corner,
                width,
                height,
            } => ExactPrimitive::Rect {
                corner: ex(corner)?,
                width: q(width)?,
                height: q(height)?,
            },
            Primitive::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r_inner = q(r_inner)?;
                let width = q(r_outer)? - &r_inner;
                ExactPrimitive::Annulus {
                    center: ex(center)?,
                    r_inner,
                    width,
                }
            }
            Primitive::HalfPlane { normal, offset } => {
                let normal = ex(normal)?;
                let base = q(offset)? / normal.norm_sqr();
                ExactPrimitive::HalfPlane { normal, base }
            }
            Primitive::FullPlane => ExactPrimitive::FullPlane,
        })
    }

    fn point(&self, k: u64) -> ExactComplex {
        match self {
            ExactPrimitive::Point(z) => z.clone(),
            ExactPrimitive::Segment { a, delta } => a + &delta.scale(&unit_interval(k)),
            ExactPrimitive::Disk { center, radius } => {
                let (v, theta) = unit_square(k);
                let two = BigRational::from_integer(BigInt::from(2));
                let rho = &v * (&two - &v) * radius;
                center + &on_circle(&theta).scale(&rho)
            }
            ExactPrimitive::Rect {
                corner,
                width,
                height,
            } => {
                let (u, v) = unit_square(k);
                corner + &ExactComplex::new(u * width, v * height)
            }
            ExactPrimitive::Annulus {
                center,
                r_inner,
                width,
            } => {
                let (v, theta) = unit_square(k);
                let r = r_inner + v * width;
                center + &on_circle(&theta).scale(&r)
            }
            ExactPrimitive::HalfPlane { normal, base } => {
                let (scale, u, v) = level_box(k);
                let s = base + &u * &scale;
                let t = (&v + &v - BigRational::one()) * &scale;
                &normal.scale(&s) + &normal.mul_i().scale(&t)
            }
            ExactPrimitive::FullPlane => {
                let (scale, u, v) = level_box(k);
                let one = BigRational::one();
                ExactComplex::new((&u + &u - &one) * &scale, (&v + &v - &one) * &scale)
            }
        }
    }
}

fn on_circle(theta: &BigRational) -> ExactComplex {
    let (c, s) = circle_point(theta);
    ExactComplex::new(c, s)
}

/// `(4^level, u, v)` for an unbounded primitive's local index.
fn level_box(k: u64) -> (BigRational, BigRational, BigRational) {
    let (level, inner) = split_level(k);
    let scale = BigRational::from_integer(BigInt::from(4u8).pow(level));
    let (u, v) = unit_square(inner);
    (scale, u, v)
}

/// A deterministic dense enumeration `n ↦ m_n` (1-based) of a nonempty region.
#[derive(Debug, Clone)]
pub struct MultiplierSequence {
    spec: RegionSpec,
    exact: Vec<ExactPrimitive>,
}

/// One multiplier in both its exact and rounded forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Multiplier {
    pub n: usize,
    pub value: Complex64,
    pub exact: ExactComplex,
}

impl MultiplierSequence {
    pub fn new(spec: RegionSpec) -> Result<Self> {
        if spec.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let exact = spec
            .primitives
            .iter()
            .map(ExactPrimitive::from_primitive)
            .collect::<Result<_>>()?;
        Ok(Self { spec, exact })
    }

    pub fn spec(&self) -> &RegionSpec {
        &self.spec
    }

    /// `m_n` in exact arithmetic.
    pub fn exact(&self, n: usize) -> ExactComplex {
        assert!(n >= 1, "multiplier indices are 1-based");
        let p = self.exact.len();
        let primitive = (n - 1) % p;
        let local = ((n - 1) / p + 1) as u64;
        self.exact[primitive].point(local)
    }

    /// `m_n` rounded once to `Complex64`.
    pub fn value(&self, n: usize) -> Complex64 {
        self.exact(n).to_complex64()
    }

    pub fn multiplier(&self, n: usize) -> Multiplier {
        let exact = self.exact(n);
        Multiplier {
            n,
            value: exact.to_complex64(),
            exact,
        }
    }

    /// `m_1, …, m_count`.
    pub fn prefix(&self, count: usize) -> Vec<Multiplier> {
        (1..=count)
            .into_par_iter()
            .map(|n| self.multiplier(n))
            .collect()
    }

    /// Density certificate for the prefix `m_1..m_N` over `σ ∩ window`.
    pub fn covering_radius(
        &self,
        n_prefix: usize,
        window: Window,
        samples: usize,
        seed: u64,
    ) -> Result<CoveringRadiusReport> {
        let values: Vec<Complex64> = self.prefix(n_prefix).into_iter().map(|m| m.value).collect();
        covering_radius_of(&self.spec, &values, window, samples, seed)
    }
}

/// Free-function form of [`MultiplierSequence::exact`] that rounds.
pub fn enumerate(spec: &RegionSpec, n: usize) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "multiplier indices are 1-based".into(),
        ));
    }
    Ok(MultiplierSequence::new(spec.clone())?.value(n))
}

/// Sampled estimate of `max_{z ∈ σ ∩ window} min_{n ≤ N} |m_n − z|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveringRadiusReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub window: Window,
    pub radius_estimate: f64,
    pub sample_count: usize,
}

/// Points of `σ ∩ window` used for covering-radius estimation.
///
/// Uniform window points are kept when they lie in `σ` and otherwise
/// replaced by their nearest point of `σ` (which concentrates samples on the
/// boundary); region samples falling in the window are added. Deterministic
/// in `seed`.
pub fn region_window_samples(
    spec: &RegionSpec,
    window: Window,
    samples: usize,
    seed: u64,
) -> Result<Vec<Complex64>> {
    if spec.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * samples);
    for _ in 0..samples {
        let z = window.uniform(&mut rng);
        let w = if spec.distance(z) == 0.0 {
            z
        } else {
            spec.nearest_point(z)?
        };
        if window.contains(w) {
            out.push(w);
        }
    }
    if samples > 0 {
        let extra = spec.sample_boundary_and_interior(samples, seed.wrapping_add(0x9e37_79b9))?;
        out.extend(extra.into_iter().filter(|z| window.contains(*z)));
    }
    if out.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    Ok(out)
}

/// Covering radius of an explicit prefix of multipliers.
pub fn covering_radius_of(
    spec: &RegionSpec,
    prefix: &[Complex64],
    window: Window,
    samples: usize,
    seed: u64,
) -> Result<CoveringRadiusReport> {
    let pts = region_window_samples(spec, window, samples, seed)?;
    let radius_estimate = pts
        .par_iter()
        .map(|z| {
            prefix
                .iter()
                .map(|m| (m - z).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(CoveringRadiusReport {
        n: prefix.len(),
        window,
        radius_estimate,
        sample_count: pts.len(),
    })
}
