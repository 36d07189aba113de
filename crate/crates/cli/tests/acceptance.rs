//! Acceptance suite: one pass/fail line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use prespec::direct_sum::Block;
use prespec::pseudospec::{
    convergence_lambdas, convergence_ratios, default_window, sample_lambdas, sweep,
};
use prespec::volterra::{self, resolvent_norm_estimate};
use prespec::{
    Complex64, DirectSumOperator, Error, GridFunction, NormExponent, Primitive, QueryPoint,
    RegionSpec, SpectrumClass, SumNorm, SweepConfig, TruncatedDiagonal, VolterraConfig, Window,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: usize = 4096;
const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn six_specs() -> Vec<(&'static str, RegionSpec)> {
    vec![
        (
            "point",
            RegionSpec::single(Primitive::Point { z: c(0.5, -0.5) }),
        ),
        (
            "segment",
            RegionSpec::single(Primitive::Segment {
                a: c(-1.0, 0.0),
                b: c(1.0, 1.0),
            }),
        ),
        (
            "disk",
            RegionSpec::single(Primitive::Disk {
                center: c(0.0, 0.0),
                radius: 1.0,
            }),
        ),
        (
            "annulus",
            RegionSpec::single(Primitive::Annulus {
                center: c(0.0, 0.0),
                r_inner: 1.0,
                r_outer: 2.0,
            }),
        ),
        (
            "half_plane",
            RegionSpec::single(Primitive::HalfPlane {
                normal: c(0.6, 0.8),
                offset: 0.5,
            }),
        ),
        ("full_plane", RegionSpec::single(Primitive::FullPlane)),
    ]
}

fn operator(spec: RegionSpec, n_cells: usize) -> DirectSumOperator {
    DirectSumOperator::new(
        spec,
        N,
        VolterraConfig {
            n_cells,
            p: NormExponent::Two,
        },
        SumNorm::OneSum,
    )
    .expect("valid operator")
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Classification labels seen anywhere in the suite.
#[derive(Default)]
struct Seen {
    labels: Vec<&'static str>,
}

fn spectrum_prescription(seen: &mut Seen) -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    for (name, spec) in six_specs() {
        let a = operator(spec.clone(), 256);
        let lambdas = sample_lambdas(&spec, default_window(&spec), 200, 101);
        for z in lambdas {
            let r = a
                .classify(&QueryPoint::Float(z), TOL)
                .map_err(|e| e.to_string())?;
            seen.labels.push(r.class.label());
            let resolvent = matches!(r.class, SpectrumClass::ResolventSet { .. });
            if resolvent != (spec.distance(z) > TOL) {
                mismatches.push(format!("{name} at {z}"));
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        mismatches.is_empty() && elapsed <= Duration::from_secs(60),
        format!(
            "6 specs x 200 λ, {} mismatches {:?}, {:.2} s",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>(),
            elapsed.as_secs_f64()
        ),
    )
}

fn norm_distance_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut details = Vec::new();
    let mut all_ok = true;
    for (name, spec) in six_specs().into_iter().filter(|(n, _)| *n != "full_plane") {
        let m = TruncatedDiagonal::new(spec.clone(), N).map_err(|e| e.to_string())?;
        // σ ∩ window must be bounded for the covering radius to be finite;
        // λ is drawn from a larger box but must project into the window
        let (window, outer) = if spec.is_bounded() {
            (default_window(&spec), default_window(&spec))
        } else {
            (Window::centered(3.0), Window::centered(6.0))
        };
        let cov = m
            .covering_radius(window, 4000, 7)
            .map_err(|e| e.to_string())?
            .radius_estimate;
        let (mut passed, mut sampled, mut attempts) = (0, 0, 0);
        while sampled < 500 && attempts < 100_000 {
            attempts += 1;
            let z = outer.uniform(&mut rng);
            let dist = spec.distance(z);
            let anchored = spec.nearest_point(z).is_ok_and(|w| window.contains(w));
            if dist <= TOL || dist < 10.0 * cov || !anchored {
                continue;
            }
            sampled += 1;
            let inv = 1.0 / m.resolvent_norm(z).truncated;
            if (inv - dist).abs() <= 1.2 * cov + 1e-12 * dist {
                passed += 1;
            }
        }
        let frac = passed as f64 / sampled.max(1) as f64;
        all_ok &= sampled == 500 && frac >= 0.95;
        details.push(format!("{name}: {passed}/{sampled} (cov {cov:.4})"));
    }
    check(all_ok, details.join(", "))
}

fn empty_spectrum_of_d() -> Outcome {
    let nodes = Window::centered(20.0).nodes(21, 21);
    let failures: Vec<Complex64> = nodes
        .iter()
        .copied()
        .filter(|&z| {
            !matches!(resolvent_norm_estimate(z, 256, NormExponent::Two),
                Ok(e) if e.norm_estimate.is_finite())
        })
        .collect();
    let mut ratios = Vec::new();
    for lambda in convergence_lambdas() {
        ratios.extend(convergence_ratios(lambda, &[64, 128, 256]).map_err(|e| e.to_string())?);
    }
    let in_band = ratios.iter().all(|r| (2.5..=6.0).contains(r));
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    check(
        failures.is_empty() && in_band,
        format!(
            "{} of {} norms finite; order ratios at 10 λ in [{lo:.3}, {hi:.3}]",
            nodes.len() - failures.len(),
            nodes.len()
        ),
    )
}

fn resolvent_formula() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for cells in [64usize, 128, 256] {
        let y = GridFunction::from_real_fn(cells, NormExponent::Two, |_| 1.0)
            .map_err(|e| e.to_string())?;
        let u = volterra::resolvent_apply(c(1.0, 0.0), &y).map_err(|e| e.to_string())?;
        let err = u
            .samples()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - c(u.t(i).exp() - 1.0, 0.0)).norm())
            .fold(0.0, f64::max);
        let h = 1.0 / cells as f64;
        ok &= err <= 5.0 * h * h;
        details.push(format!("n={cells}: {:.3} h²", err / (h * h)));
    }
    let y =
        GridFunction::from_real_fn(256, NormExponent::Two, |_| 1.0).map_err(|e| e.to_string())?;
    let u = volterra::resolvent_apply(c(0.0, 0.0), &y).map_err(|e| e.to_string())?;
    let err0 = u
        .samples()
        .iter()
        .enumerate()
        .map(|(i, v)| (v - c(u.t(i), 0.0)).norm())
        .fold(0.0, f64::max);
    ok &= err0 <= 1e-10;
    details.push(format!("λ=0: {err0:.1e}"));
    check(ok, details.join(", "))
}

fn unboundedness() -> Outcome {
    let disk = RegionSpec::single(Primitive::Disk {
        center: c(0.0, 0.0),
        radius: 1.0,
    });
    let fine = DirectSumOperator::new(
        disk,
        N,
        VolterraConfig {
            n_cells: 16384,
            p: NormExponent::Two,
        },
        SumNorm::OneSum,
    )
    .map_err(|e| e.to_string())?;
    let d = fine
        .unboundedness_witness(1e3, Block::Differentiation)
        .map_err(|e| e.to_string())?;
    let bounded_refused = matches!(
        fine.unboundedness_witness(1e3, Block::Multiplier),
        Err(Error::InvalidArgument(_))
    );
    let mut details = vec![format!("D block ratio {:.1}", d.ratio)];
    let mut ok = d.ratio >= 1e3 && bounded_refused;
    for (name, spec) in six_specs().into_iter().filter(|(_, s)| !s.is_bounded()) {
        let a = operator(spec, 64);
        match a.unboundedness_witness(1e3, Block::Multiplier) {
            Ok(w) => {
                ok &= w.ratio > 1e3 && w.index.is_some_and(|i| i <= 1_000_000);
                details.push(format!(
                    "M block {name}: index {:?}, ratio {:.1}",
                    w.index.unwrap_or(0),
                    w.ratio
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("M block {name}: {e}"));
            }
        }
    }
    check(ok, details.join(", "))
}

fn classification_completeness(seen: &mut Seen) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut bad = Vec::new();
    for (name, spec) in six_specs() {
        let m = TruncatedDiagonal::new(spec, N).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let n = rng.random_range(1..=N);
            let target = m.exact_multiplier(n);
            let first = (1..=n)
                .find(|&j| m.exact_multiplier(j) == target)
                .expect("n itself matches");
            let class = m.classify(&QueryPoint::Exact(target.clone()), TOL);
            seen.labels.push(class.label());
            match class {
                SpectrumClass::Point { index, .. } if index == first => {}
                other => bad.push(format!("{name} n={n}: {other:?}")),
            }
        }
    }
    let unexpected: Vec<&&str> = seen
        .labels
        .iter()
        .filter(|l| !matches!(**l, "point" | "continuous" | "resolvent_set"))
        .collect();
    check(
        bad.is_empty() && unexpected.is_empty(),
        format!(
            "{} classifications, no residual class; {} exact witness mismatches",
            seen.labels.len(),
            bad.len()
        ),
    )
}

fn edge_cases(seen: &mut Seen) -> Outcome {
    let cfg = SweepConfig::new(Window::centered(5.0), 21, 21);
    let empty = sweep(&operator(RegionSpec::empty(), 128), &cfg).map_err(|e| e.to_string())?;
    let full = sweep(
        &operator(RegionSpec::single(Primitive::FullPlane), 128),
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    seen.labels
        .extend(empty.nodes.iter().chain(&full.nodes).map(|n| n.class));
    let empty_ok = empty.nodes.iter().all(|n| {
        n.class == "resolvent_set"
            && n.s_truncated.is_finite()
            && n.s_truncated > 0.0
            && n.s_exact > 0.0
    });
    let full_ok = full.nodes.iter().all(|n| n.class != "resolvent_set");
    check(
        empty_ok && full_ok,
        format!(
            "σ = ∅: {} of {} resolvent set; σ = ℂ: {} resolvent-set nodes",
            empty.summary.resolvent_set,
            empty.nodes.len(),
            full.summary.resolvent_set
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec_path = dir.path().join("region.json");
    let spec = RegionSpec::new(vec![
        Primitive::Annulus {
            center: c(0.0, 0.0),
            r_inner: 1.0,
            r_outer: 2.0,
        },
        Primitive::HalfPlane {
            normal: c(-1.0, 0.0),
            offset: 3.0,
        },
    ])
    .map_err(|e| e.to_string())?;
    std::fs::write(&spec_path, spec.to_json()).map_err(|e| e.to_string())?;
    let run = |args: &[&str], out: &str| -> Result<Vec<u8>, String> {
        let out_path = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_prespec"))
            .args(args)
            .arg("--spec")
            .arg(&spec_path)
            .arg("--out")
            .arg(&out_path)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(&out_path).map_err(|e| e.to_string())
    };
    let gen = ["generate-multipliers", "--count", "4096"];
    let pseudo = [
        "pseudospectrum",
        "--window",
        "-3,3,-3,3",
        "--grid",
        "41x41",
        "--N",
        "1024",
        "--cells",
        "64",
        "--eps",
        "1e-1,1e-2",
        "--seed",
        "17",
    ];
    let (g1, g2) = (run(&gen, "g1.csv")?, run(&gen, "g2.csv")?);
    let (p1, p2) = (run(&pseudo, "p1.csv")?, run(&pseudo, "p2.csv")?);
    check(
        g1 == g2 && p1 == p2 && !g1.is_empty() && !p1.is_empty(),
        format!(
            "generate-multipliers {} bytes identical: {}; pseudospectrum {} bytes identical: {}",
            g1.len(),
            g1 == g2,
            p1.len(),
            p1 == p2
        ),
    )
}

fn main() {
    let mut seen = Seen::default();
    let start = Instant::now();
    let results: Vec<(&str, Outcome)> = vec![
        (
            "AC1 spectrum prescription",
            spectrum_prescription(&mut seen),
        ),
        (
            "AC2 resolvent norm equals inverse distance",
            norm_distance_duality(),
        ),
        (
            "AC3 empty spectrum of the differentiation block",
            empty_spectrum_of_d(),
        ),
        ("AC4 resolvent formula", resolvent_formula()),
        ("AC5 unboundedness witnesses", unboundedness()),
        ("AC7 empty and full-plane regions", edge_cases(&mut seen)),
        (
            "AC6 classification completeness",
            classification_completeness(&mut seen),
        ),
        ("AC8 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
