//! Exact dense sequences of rationals on the unit interval and unit square.
//!
//! Every value here is a pure function of its index, so any prefix can be
//! regenerated independently (and concurrently) without carried state.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Radical inverse of `k` in `base`: the digits of `k` mirrored about the
/// radix point. Base 2 gives the van der Corput sequence.
pub fn radical_inverse(base: u64, mut k: u64) -> BigRational {
    debug_assert!(base >= 2);
    let mut num: u128 = 0;
    let mut den: u128 = 1;
    while k > 0 {
        num = num * base as u128 + (k % base) as u128;
        den *= base as u128;
        k /= base;
    }
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Dense enumeration of `[0, 1] ∩ ℚ`, 1-based: `0, 1, 1/2, 1/4, 3/4, 1/8, …`.
///
/// After `2 + (2^j − 1)` terms the prefix contains every multiple of `2^-j`,
/// so the covering radius of `[0, 1]` is at most `2^-(j+1)`.
pub fn unit_interval(k: u64) -> BigRational {
    assert!(k >= 1, "sequence is 1-based");
    match k {
        1 => BigRational::zero(),
        2 => BigRational::one(),
        _ => radical_inverse(2, k - 2),
    }
}

/// Dense enumeration of `[0, 1]² ∩ ℚ²`, 1-based: the four corners followed
/// by the (2, 3) Halton sequence.
pub fn unit_square(k: u64) -> (BigRational, BigRational) {
    assert!(k >= 1, "sequence is 1-based");
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    match k {
        1 => (int(0), int(0)),
        2 => (int(1), int(0)),
        3 => (int(0), int(1)),
        4 => (int(1), int(1)),
        _ => (radical_inverse(2, k - 4), radical_inverse(3, k - 4)),
    }
}

/// Splits a 1-based index `k = 2^level · (2i + 1)` into `(level, i + 1)`.
///
/// Level `ℓ` receives a `2^-(ℓ+1)` share of all indices, and every level
/// receives infinitely many.
pub fn split_level(k: u64) -> (u32, u64) {
    assert!(k >= 1, "sequence is 1-based");
    let level = k.trailing_zeros();
    (level, (k >> (level + 1)) + 1)
}

/// A rational point on the unit circle for a turn fraction `theta ∈ [0, 1]`.
///
/// Each quarter turn is parametrized by the half-angle substitution
/// `u ↦ ((1 − u²) + 2u·i) / (1 + u²)` with `u ∈ [0, 1]`, which is rational
/// for rational `u`. The map is monotone in angle and the image of a dense
/// set of turn fractions is dense on the circle.
pub fn circle_point(theta: &BigRational) -> (BigRational, BigRational) {
    let four = BigRational::from_integer(BigInt::from(4));
    let scaled = theta * &four;
    let quarter = scaled.floor();
    let u = &scaled - &quarter;
    let one = BigRational::one();
    let u2 = &u * &u;
    let den = &one + &u2;
    let c = (&one - &u2) / &den;
    let s = (&u + &u) / &den;
    let q = quarter.to_integer().to_i64().unwrap_or(0).rem_euclid(4);
    match q {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational_to_f64;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn van_der_corput_prefix() {
        let got: Vec<_> = (1..=7).map(unit_interval).collect();
        assert_eq!(
            got,
            vec![
                r(0, 1),
                r(1, 1),
                r(1, 2),
                r(1, 4),
                r(3, 4),
                r(1, 8),
                r(5, 8)
            ]
        );
        assert_eq!(radical_inverse(3, 5), r(7, 9));
    }

    #[test]
    fn unit_interval_prefix_is_a_dyadic_grid() {
        // terms 1..=2+(2^j-1) are exactly the multiples of 2^-j
        let j = 6;
        let mut vals: Vec<_> = (1..=(2 + (1u64 << j) - 1)).map(unit_interval).collect();
        vals.sort();
        vals.dedup();
        assert_eq!(vals.len(), (1 << j) + 1);
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(*v, r(i as i64, 1 << j));
        }
    }

    #[test]
    fn levels_partition_indices() {
        assert_eq!(split_level(1), (0, 1));
        assert_eq!(split_level(2), (1, 1));
        assert_eq!(split_level(3), (0, 2));
        assert_eq!(split_level(12), (2, 2));
        let level0 = (1..=1000).filter(|&k| split_level(k).0 == 0).count();
        assert_eq!(level0, 500);
    }

    #[test]
    fn circle_points_are_exactly_unit() {
        for k in 1..200 {
            let (c, s) = circle_point(&unit_interval(k));
            assert_eq!(&c * &c + &s * &s, BigRational::one());
        }
        let (c, s) = circle_point(&r(1, 4));
        assert_eq!((c, s), (r(0, 1), r(1, 1)));
        let (c, s) = circle_point(&r(1, 2));
        assert_eq!((rational_to_f64(&c), rational_to_f64(&s)), (-1.0, 0.0));
    }

    #[test]
    fn circle_map_is_monotone_in_angle() {
        let mut prev = -1.0;
        for i in 0..=64 {
            let (c, s) = circle_point(&r(i, 64));
            let mut a = rational_to_f64(&s).atan2(rational_to_f64(&c));
            if a < 0.0 || (i == 64 && a == 0.0) {
                a += std::f64::consts::TAU;
            }
            assert!(a >= prev, "i = {i}");
            prev = a;
        }
    }
}
