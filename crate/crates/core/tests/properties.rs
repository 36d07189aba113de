use prespec::multipliers::covering_radius_of;
use prespec::{Complex64, MultiplierSequence, Primitive, RegionSpec, Window};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| c(re, im))
}

fn primitive() -> impl Strategy<Value = Primitive> {
    prop_oneof![
        complex(3.0).prop_map(|z| Primitive::Point { z }),
        (complex(3.0), complex(3.0)).prop_map(|(a, b)| Primitive::Segment { a, b }),
        (complex(3.0), 0.0..2.0).prop_map(|(center, radius)| Primitive::Disk { center, radius }),
        (complex(3.0), 0.0..2.0, 0.0..2.0).prop_map(|(corner, width, height)| Primitive::Rect {
            corner,
            width,
            height
        }),
        (complex(3.0), 0.0..1.5, 0.0..1.5).prop_map(|(center, r, w)| Primitive::Annulus {
            center,
            r_inner: r,
            r_outer: r + w
        }),
        (0.0..std::f64::consts::TAU, -2.0..2.0).prop_map(|(theta, offset)| Primitive::HalfPlane {
            normal: Complex64::from_polar(1.0, theta),
            offset
        }),
        Just(Primitive::FullPlane),
    ]
}

fn region() -> impl Strategy<Value = RegionSpec> {
    prop::collection::vec(primitive(), 1..4).prop_map(|ps| RegionSpec::new(ps).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distance_is_one_lipschitz(spec in region(), z1 in complex(8.0), z2 in complex(8.0)) {
        let gap = (spec.distance(z1) - spec.distance(z2)).abs();
        prop_assert!(gap <= (z1 - z2).norm() + 1e-12);
    }

    #[test]
    fn distance_is_attained_by_nearest_point(spec in region(), z in complex(8.0)) {
        let w = spec.nearest_point(z).unwrap();
        prop_assert!(((w - z).norm() - spec.distance(z)).abs() <= 1e-12 * z.norm().max(1.0));
        prop_assert!(spec.distance(w) <= 1e-12 * w.norm().max(1.0));
    }

    #[test]
    fn union_never_increases_distance(a in region(), b in region(), z in complex(8.0)) {
        let mut both = a.primitives.clone();
        both.extend(b.primitives.iter().cloned());
        let union = RegionSpec::new(both).unwrap();
        prop_assert!(union.distance(z) <= a.distance(z));
        prop_assert!(union.distance(z) <= b.distance(z));
    }

    #[test]
    fn multipliers_lie_in_region(spec in region(), n in 1usize..=10_000) {
        let m = MultiplierSequence::new(spec.clone()).unwrap().value(n);
        // one rounding of a point of modulus |m| moves it by up to ~|m|·ε
        prop_assert!(spec.distance(m) <= 1e-12 * m.norm().max(1.0), "m_{} = {}", n, m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn covering_radius_nonincreasing_in_prefix(spec in region(), seed in 0u64..1000) {
        let window = Window::centered(4.0);
        let seq = MultiplierSequence::new(spec.clone()).unwrap();
        let values: Vec<Complex64> = seq.prefix(1024).into_iter().map(|m| m.value).collect();
        let radii: Vec<Option<f64>> = [64, 256, 1024]
            .iter()
            .map(|&k| covering_radius_of(&spec, &values[..k], window, 300, seed).ok().map(|r| r.radius_estimate))
            .collect();
        if let [Some(a), Some(b), Some(c)] = radii[..] {
            prop_assert!(a >= b && b >= c, "{:?}", radii);
        }
    }
}

/// Every multiplier up to 10⁴ lies in the region, for each primitive type
/// and a mixed union.
#[test]
fn membership_up_to_ten_thousand() {
    let specs = vec![
        RegionSpec::single(Primitive::Point { z: c(1.0, -2.0) }),
        RegionSpec::single(Primitive::Segment {
            a: c(0.0, 0.0),
            b: c(1.0, 1.0),
        }),
        RegionSpec::single(Primitive::Disk {
            center: c(0.5, 0.5),
            radius: 2.0,
        }),
        RegionSpec::single(Primitive::Rect {
            corner: c(-1.0, 0.0),
            width: 3.0,
            height: 0.5,
        }),
        RegionSpec::single(Primitive::Annulus {
            center: c(0.0, 0.0),
            r_inner: 1.0,
            r_outer: 2.0,
        }),
        RegionSpec::single(Primitive::HalfPlane {
            normal: c(1.0, 0.0),
            offset: 0.0,
        }),
        RegionSpec::single(Primitive::HalfPlane {
            normal: c(0.0, -1.0),
            offset: 0.5,
        }),
        RegionSpec::single(Primitive::FullPlane),
        RegionSpec::new(vec![
            Primitive::Disk {
                center: c(3.0, 0.0),
                radius: 0.5,
            },
            Primitive::Segment {
                a: c(-2.0, -1.0),
                b: c(-2.0, 1.0),
            },
            Primitive::Point { z: c(0.0, 2.0) },
            Primitive::Annulus {
                center: c(0.0, 0.0),
                r_inner: 4.0,
                r_outer: 4.0,
            },
        ])
        .unwrap(),
    ];
    for spec in specs {
        let seq = MultiplierSequence::new(spec.clone()).unwrap();
        for m in seq.prefix(10_000) {
            assert!(
                spec.distance(m.value) <= 1e-12,
                "{spec:?}: m_{} = {}",
                m.n,
                m.value
            );
        }
    }
    // a rotated half-plane boundary is only representable up to rounding
    let tilted = RegionSpec::single(Primitive::HalfPlane {
        normal: c(0.6, 0.8),
        offset: 0.5,
    });
    let seq = MultiplierSequence::new(tilted.clone()).unwrap();
    for m in seq.prefix(10_000) {
        assert!(tilted.distance(m.value) <= 1e-12 * m.value.norm().max(1.0));
    }
}
