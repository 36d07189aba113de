//! Closed subsets of the complex plane as finite unions of primitives.
//!
//! All geometry is closed-form: distances and nearest points come from
//! projection formulas, never from iterative minimization.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseError, Result};

/// Half-width of the box used to sample unbounded primitives.
pub const UNBOUNDED_SAMPLE_EXTENT: f64 = 10.0;

/// One closed, nonempty piece of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Point {
        z: Complex64,
    },
    Segment {
        a: Complex64,
        b: Complex64,
    },
    Disk {
        center: Complex64,
        radius: f64,
    },
    /// Axis-aligned rectangle `[corner.re, corner.re + width] × [corner.im, corner.im + height]`.
    Rect {
        corner: Complex64,
        width: f64,
        height: f64,
    },
    Annulus {
        center: Complex64,
        r_inner: f64,
        r_outer: f64,
    },
    /// `{z : Re(conj(normal)·z) ≥ offset}` with `|normal| = 1`.
    HalfPlane {
        normal: Complex64,
        offset: f64,
    },
    FullPlane,
}

impl Primitive {
    /// Checks parameters and normalizes a half-plane normal to unit length.
    pub fn validated(self) -> std::result::Result<Self, String> {
        fn finite(name: &str, v: f64) -> std::result::Result<(), String> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be finite"))
            }
        }
        fn finite_c(name: &str, z: Complex64) -> std::result::Result<(), String> {
            finite(name, z.re)?;
            finite(name, z.im)
        }
        fn nonneg(name: &str, v: f64) -> std::result::Result<(), String> {
            finite(name, v)?;
            if v >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be nonnegative, got {v}"))
            }
        }
        match self {
            Primitive::Point { z } => finite_c("z", z)?,
            Primitive::Segment { a, b } => {
                finite_c("a", a)?;
                finite_c("b", b)?;
            }
            Primitive::Disk { center, radius } => {
                finite_c("center", center)?;
                nonneg("radius", radius)?;
            }
            Primitive::Rect {
                corner,
                width,
                height,
            } => {
                finite_c("corner", corner)?;
                nonneg("width", width)?;
                nonneg("height", height)?;
            }
            Primitive::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                finite_c("center", center)?;
                nonneg("r_inner", r_inner)?;
                nonneg("r_outer", r_outer)?;
                if r_inner > r_outer {
                    return Err(format!("r_inner {r_inner} exceeds r_outer {r_outer}"));
                }
            }
            Primitive::HalfPlane { normal, offset } => {
                finite_c("normal", normal)?;
                finite("offset", offset)?;
                let len = normal.norm();
                if (len - 1.0).abs() > 1e-9 {
                    return Err(format!("normal must be a unit vector, |normal| = {len}"));
                }
                return Ok(Primitive::HalfPlane {
                    normal: normal / len,
                    offset,
                });
            }
            Primitive::FullPlane => {}
        }
        Ok(self)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Primitive::Point { .. } => "point",
            Primitive::Segment { .. } => "segment",
            Primitive::Disk { .. } => "disk",
            Primitive::Rect { .. } => "rect",
            Primitive::Annulus { .. } => "annulus",
            Primitive::HalfPlane { .. } => "half_plane",
            Primitive::FullPlane => "full_plane",
        }
    }

    /// Euclidean distance from `z` to the primitive.
    pub fn distance(&self, z: Complex64) -> f64 {
        match *self {
            Primitive::Disk { center, radius } => ((z - center).norm() - radius).max(0.0),
            Primitive::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let rho = (z - center).norm();
                (r_inner - rho).max(rho - r_outer).max(0.0)
            }
            Primitive::HalfPlane { normal, offset } => (offset - (normal.conj() * z).re).max(0.0),
            Primitive::FullPlane => 0.0,
            _ => (z - self.nearest(z)).norm(),
        }
    }

    /// The closest point of the primitive to `z`.
    ///
    /// Unique for every convex primitive. For an annulus queried at its
    /// exact center every inner-circle point is nearest; the one with
    /// argument 0 (measured in `[0, 2π)`) is returned.
    pub fn nearest(&self, z: Complex64) -> Complex64 {
        match *self {
            Primitive::Point { z: p } => p,
            Primitive::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return a;
                }
                let t = ((d.conj() * (z - a)).re / len2).clamp(0.0, 1.0);
                a + d * t
            }
            Primitive::Disk { center, radius } => {
                let w = z - center;
                let rho = w.norm();
                if rho <= radius {
                    z
                } else {
                    center + w * (radius / rho)
                }
            }
            Primitive::Rect {
                corner,
                width,
                height,
            } => Complex64::new(
                z.re.clamp(corner.re, corner.re + width),
                z.im.clamp(corner.im, corner.im + height),
            ),
            Primitive::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let w = z - center;
                let rho = w.norm();
                if rho == 0.0 {
                    if r_inner == 0.0 {
                        z
                    } else {
                        center + r_inner
                    }
                } else if rho < r_inner {
                    center + w * (r_inner / rho)
                } else if rho > r_outer {
                    center + w * (r_outer / rho)
                } else {
                    z
                }
            }
            Primitive::HalfPlane { normal, offset } => {
                let v = (normal.conj() * z).re - offset;
                if v >= 0.0 {
                    z
                } else {
                    z - normal * v
                }
            }
            Primitive::FullPlane => z,
        }
    }

    /// `sup |z|` over the primitive, or `None` if unbounded.
    pub fn modulus_bound(&self) -> Option<f64> {
        match *self {
            Primitive::Point { z } => Some(z.norm()),
            Primitive::Segment { a, b } => Some(a.norm().max(b.norm())),
            Primitive::Disk { center, radius } => Some(center.norm() + radius),
            Primitive::Rect {
                corner,
                width,
                height,
            } => {
                let far_re = corner.re.abs().max((corner.re + width).abs());
                let far_im = corner.im.abs().max((corner.im + height).abs());
                Some(far_re.hypot(far_im))
            }
            Primitive::Annulus {
                center, r_outer, ..
            } => Some(center.norm() + r_outer),
            Primitive::HalfPlane { .. } | Primitive::FullPlane => None,
        }
    }

    /// A pseudo-random point of the primitive: half of the draws land on the
    /// topological boundary, the rest in the interior.
    fn sample<R: Rng>(&self, rng: &mut R) -> Complex64 {
        let on_boundary = rng.random_bool(0.5);
        let l = UNBOUNDED_SAMPLE_EXTENT;
        match *self {
            Primitive::Point { z } => z,
            Primitive::Segment { a, b } => a + (b - a) * rng.random::<f64>(),
            Primitive::Disk { center, radius } => {
                let r = if on_boundary {
                    radius
                } else {
                    radius * rng.random::<f64>().sqrt()
                };
                center + Complex64::from_polar(r, TAU * rng.random::<f64>())
            }
            Primitive::Rect {
                corner,
                width,
                height,
            } => {
                let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
                if on_boundary {
                    match rng.random_range(0..4) {
                        0 => u = 0.0,
                        1 => u = 1.0,
                        2 => v = 0.0,
                        _ => v = 1.0,
                    }
                }
                let re = if u == 1.0 {
                    corner.re + width
                } else {
                    corner.re + width * u
                };
                let im = if v == 1.0 {
                    corner.im + height
                } else {
                    corner.im + height * v
                };
                Complex64::new(re, im)
            }
            Primitive::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let r = if on_boundary {
                    if rng.random_bool(0.5) {
                        r_inner
                    } else {
                        r_outer
                    }
                } else {
                    r_inner + (r_outer - r_inner) * rng.random::<f64>()
                };
                center + Complex64::from_polar(r, TAU * rng.random::<f64>())
            }
            Primitive::HalfPlane { normal, offset } => {
                let s = if on_boundary {
                    0.0
                } else {
                    l * rng.random::<f64>()
                };
                let t = l * (2.0 * rng.random::<f64>() - 1.0);
                let z = normal * (offset + s) + normal * Complex64::i() * t;
                // snap rounding spill back onto the closed set
                self.nearest(z)
            }
            Primitive::FullPlane => Complex64::new(
                l * (2.0 * rng.random::<f64>() - 1.0),
                l * (2.0 * rng.random::<f64>() - 1.0),
            ),
        }
    }
}

/// Boundedness of a region together with a radius enclosing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub bounded: bool,
    /// `≥ sup |z|` over the region; `+∞` iff unbounded.
    pub enclosing_radius: f64,
}

/// The target closed set: a union of primitives, empty when the list is.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionSpec {
    pub primitives: Vec<Primitive>,
}

impl RegionSpec {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        let primitives = primitives
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.validated().map_err(|m| ParseError::at_primitive(i, m)))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { primitives })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(p: Primitive) -> Self {
        Self::new(vec![p]).expect("invalid primitive")
    }

    /// Parses the JSON form `{"primitives": [{"type": "disk", ...}, ...]}`.
    ///
    /// Errors carry the index of the offending primitive and a JSON pointer
    /// to it.
    pub fn from_json(text: &str) -> std::result::Result<Self, ParseError> {
        let doc: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ParseError::new(format!("malformed JSON: {e}")))?;
        let list = doc
            .get("primitives")
            .ok_or_else(|| ParseError {
                index: None,
                pointer: Some(String::new()),
                message: "missing \"primitives\" array".into(),
            })?
            .as_array()
            .ok_or_else(|| ParseError {
                index: None,
                pointer: Some("/primitives".into()),
                message: "\"primitives\" must be an array".into(),
            })?;
        let mut primitives = Vec::with_capacity(list.len());
        for (i, item) in list.iter().enumerate() {
            let p: Primitive = serde_json::from_value(item.clone())
                .map_err(|e| ParseError::at_primitive(i, e.to_string()))?;
            primitives.push(p.validated().map_err(|m| ParseError::at_primitive(i, m))?);
        }
        Ok(Self { primitives })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("region serialization cannot fail")
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance(z) <= tol
    }

    /// `dist(z, σ)`; `+∞` for the empty region.
    pub fn distance(&self, z: Complex64) -> f64 {
        self.primitives
            .iter()
            .map(|p| p.distance(z))
            .fold(f64::INFINITY, f64::min)
    }

    /// A nearest point of the region to `z`. Ties across primitives go to
    /// the lowest primitive index.
    pub fn nearest_point(&self, z: Complex64) -> Result<Complex64> {
        let mut best: Option<(f64, Complex64)> = None;
        for p in &self.primitives {
            let w = p.nearest(z);
            let d = (w - z).norm();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, w));
            }
        }
        best.map(|(_, w)| w).ok_or(Error::EmptyRegion)
    }

    pub fn bounds(&self) -> Bounds {
        let mut radius = 0.0_f64;
        for p in &self.primitives {
            match p.modulus_bound() {
                Some(r) => radius = radius.max(r),
                None => {
                    return Bounds {
                        bounded: false,
                        enclosing_radius: f64::INFINITY,
                    }
                }
            }
        }
        Bounds {
            bounded: true,
            enclosing_radius: radius,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds().bounded
    }

    /// Deterministic pseudo-random points of the region, mixing boundary and
    /// interior points. Unbounded primitives are sampled within
    /// [`UNBOUNDED_SAMPLE_EXTENT`] of their anchor.
    pub fn sample_boundary_and_interior(&self, count: usize, seed: u64) -> Result<Vec<Complex64>> {
        if self.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.primitives.len();
        Ok((0..count)
            .map(|_| {
                let p = &self.primitives[rng.random_range(0..k)];
                p.sample(&mut rng)
            })
            .collect())
    }
}

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max]
            .iter()
            .all(|v| v.is_finite())
            && re_min <= re_max
            && im_min <= im_max;
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "window [{re_min}, {re_max}] x [{im_min}, {im_max}] is not a finite rectangle"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// The square `[-h, h]²`.
    pub fn centered(h: f64) -> Self {
        Self::new(-h, h, -h, h).expect("finite half-width")
    }

    /// Parses `"x0,x1,y0,y1"`.
    pub fn parse(s: &str) -> std::result::Result<Self, ParseError> {
        let vals: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| ParseError::new(format!("invalid window '{s}'")))?;
        if vals.len() != 4 {
            return Err(ParseError::new(format!("window needs 4 values, got '{s}'")));
        }
        Self::new(vals[0], vals[1], vals[2], vals[3]).map_err(|e| ParseError::new(e.to_string()))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.re_min..=self.re_max).contains(&z.re) && (self.im_min..=self.im_max).contains(&z.im)
    }

    /// Grid node `(ix, iy)` of an `nx × ny` lattice spanning the window,
    /// endpoints included.
    pub fn node(&self, ix: usize, iy: usize, nx: usize, ny: usize) -> Complex64 {
        let lerp = |lo: f64, hi: f64, i: usize, n: usize| {
            if n <= 1 {
                0.5 * (lo + hi)
            } else if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * (i as f64 / (n - 1) as f64)
            }
        };
        Complex64::new(
            lerp(self.re_min, self.re_max, ix, nx),
            lerp(self.im_min, self.im_max, iy, ny),
        )
    }

    /// All nodes of an `nx × ny` lattice, row-major (imaginary part outer).
    pub fn nodes(&self, nx: usize, ny: usize) -> Vec<Complex64> {
        (0..ny)
            .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
            .map(|(ix, iy)| self.node(ix, iy, nx, ny))
            .collect()
    }

    pub fn uniform<R: Rng>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(
            self.re_min + (self.re_max - self.re_min) * rng.random::<f64>(),
            self.im_min + (self.im_max - self.im_min) * rng.random::<f64>(),
        )
    }
}
