//! Region fixtures shared by the benchmarks.

use prespec::{Complex64, Primitive, RegionSpec};

pub fn unit_disk() -> RegionSpec {
    RegionSpec::single(Primitive::Disk {
        center: Complex64::new(0.0, 0.0),
        radius: 1.0,
    })
}

pub fn half_plane() -> RegionSpec {
    RegionSpec::single(Primitive::HalfPlane {
        normal: Complex64::new(0.6, 0.8),
        offset: 0.5,
    })
}

pub fn mixed() -> RegionSpec {
    RegionSpec::new(vec![
        Primitive::Annulus {
            center: Complex64::new(0.0, 0.0),
            r_inner: 1.0,
            r_outer: 2.0,
        },
        Primitive::Segment {
            a: Complex64::new(-3.0, -1.0),
            b: Complex64::new(-3.0, 1.0),
        },
        Primitive::Point {
            z: Complex64::new(0.0, 3.0),
        },
    ])
    .expect("valid primitives")
}
