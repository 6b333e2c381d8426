use std::path::Path;
use std::process::Command;
use std::time::Instant;

use involution_core::expr::PlaneMap;
use involution_core::foliation::{
    default_parameters, diagonalize_involution, leaf_invariance_check, trace_leaves, FoliationKind,
    LeafSeeds, TraceOptions,
};
use involution_core::gallery::{self, GalleryEntry};
use involution_core::involution::{verify_involution, Region};
use involution_core::linalg2::{eigenvalues, Complex, Mat2, Point, Spectrum};
use involution_core::linearize::{
    conjugacy_residual, injectivity_scan, spectrum_shift_check, InjectivityStatus, ScanOptions,
    StandardMap,
};
use involution_core::spectral::{theorem_verdict, Condition, Hypothesis, SpectralOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(r: &mut ChaCha8Rng, w: &Region) -> Point {
    Point::new(
        r.gen_range(w.x_min..=w.x_max),
        r.gen_range(w.y_min..=w.y_max),
    )
}

fn entry(name: &str, n: Option<u32>) -> GalleryEntry {
    gallery::get(name, n).unwrap()
}

fn label(e: &GalleryEntry) -> String {
    match e.n {
        Some(n) => format!("{}:{n}", e.name),
        None => e.name.clone(),
    }
}

/// A1–A4 for n ∈ {0, 1, 2} plus every non-family entry.
fn full_gallery() -> Vec<GalleryEntry> {
    let mut out = Vec::new();
    for name in gallery::NAMES {
        if name.starts_with('A') {
            out.extend((0..=2).map(|n| entry(name, Some(n))));
        } else {
            out.push(entry(name, None));
        }
    }
    out
}

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn involution_identity() -> Outcome {
    let mut worst = 0.0f64;
    for e in full_gallery() {
        let region = e.default_window.with_grid(41).unwrap();
        let v = verify_involution(&e.map, &region, 1e-9)
            .map_err(|err| format!("{}: {err}", label(&e)))?;
        check(
            v.max_residual <= 1e-9,
            format!(
                "{}: residual {:e} at {}",
                label(&e),
                v.max_residual,
                v.worst_point
            ),
        )?;
        worst = worst.max(v.max_residual);
    }
    Ok(format!(
        "{} entries, worst residual {worst:e}",
        full_gallery().len()
    ))
}

fn standard_map_regression() -> Outcome {
    type Closed = fn(Point) -> Point;
    let cases: [(&str, Closed); 2] = [
        ("A1", |p| Point::new(p.x - p.y.powi(3) / 2.0, p.y)),
        ("A2", |p| Point::new(p.x - p.y.powi(2) / 2.0, p.y)),
    ];
    let mut worst = 0.0f64;
    for (name, closed) in cases {
        let e = entry(name, Some(1));
        let h = StandardMap::new(e.map.clone()).map_err(|err| err.to_string())?;
        let mut r = rng(2);
        for _ in 0..1000 {
            let p = random_point(&mut r, &e.default_window);
            let d = h
                .evaluate(p)
                .map_err(|err| err.to_string())?
                .dist(closed(p));
            check(
                d <= 1e-12,
                format!("{name}: |h - closed form| = {d:e} at {p}"),
            )?;
            worst = worst.max(d);
        }
    }
    Ok(format!("A1, A2 at 1000 points each, worst {worst:e}"))
}

fn conjugacy_identity() -> Outcome {
    let mut worst = 0.0f64;
    for e in full_gallery() {
        let h = StandardMap::new(e.map.clone()).map_err(|err| format!("{}: {err}", label(&e)))?;
        let mut r = rng(3);
        for _ in 0..10_000 {
            let p = random_point(&mut r, &e.default_window);
            let res = conjugacy_residual(&h, p).map_err(|err| err.to_string())?;
            check(
                res <= 1e-9,
                format!("{}: residual {res:e} at {p}", label(&e)),
            )?;
            worst = worst.max(res);
        }
    }
    Ok(format!("10^4 points per entry, worst {worst:e}"))
}

// λ² − tλ + d = 0 solved with complex square roots, no branch tricks.
fn brute_force_eigen(m: &Mat2) -> Spectrum {
    let t = m.a11 + m.a22;
    let d = m.a11 * m.a22 - m.a12 * m.a21;
    let disc = t * t - 4.0 * d;
    let (re, im) = if disc >= 0.0 {
        (disc.sqrt(), 0.0)
    } else {
        (0.0, (-disc).sqrt())
    };
    Spectrum {
        lambda1: Complex {
            re: (t - re) / 2.0,
            im: -im / 2.0,
        },
        lambda2: Complex {
            re: (t + re) / 2.0,
            im: im / 2.0,
        },
    }
}

fn spectrum_shift() -> Outcome {
    let mut worst = 0.0f64;
    for name in ["A2", "A4"] {
        for n in 0..=2 {
            let e = entry(name, Some(n));
            let dev = spectrum_shift_check(&e.map, &e.default_window.with_grid(41).unwrap())
                .map_err(|err| format!("{}: {err}", label(&e)))?;
            check(dev <= 1e-9, format!("{}: deviation {dev:e}", label(&e)))?;
            worst = worst.max(dev);
        }
    }
    let mut r = rng(4);
    let mut oracle_worst = 0.0f64;
    for _ in 0..10_000 {
        let m = Mat2::new(
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
            r.gen_range(-5.0..5.0),
        );
        let shifted = eigenvalues(&(m - Mat2::IDENTITY));
        let oracle = brute_force_eigen(&m).shifted(-1.0);
        let d = shifted.set_distance(&oracle);
        check(d <= 1e-9, format!("oracle mismatch {d:e} for {m}"))?;
        oracle_worst = oracle_worst.max(d);
    }
    Ok(format!(
        "A2/A4 n=0..2 worst {worst:e}; 10^4 random matrices worst {oracle_worst:e}"
    ))
}

fn verdict_matrix() -> Outcome {
    let opts = SpectralOptions::default();
    let verdict = |e: &GalleryEntry, o: &SpectralOptions| {
        theorem_verdict(&e.map, &e.default_window, o).map_err(|err| format!("{}: {err}", label(e)))
    };
    let mut notes = Vec::new();
    for (name, min_margin, strict) in [("A1", 2.9, false), ("A3", 2.9, false), ("B", 1.0, true)] {
        let e = entry(name, None);
        let v = verdict(&e, &opts)?;
        let b = v
            .condition(Condition::TraceBound)
            .ok_or("no trace condition")?;
        let ok = v.hypothesis == Some(Hypothesis::TheoremB)
            && if strict {
                b.margin > min_margin
            } else {
                b.margin >= min_margin
            };
        check(ok, format!("{name}: {} (margin {})", v.text, b.margin))?;
        notes.push(format!("{name} margin {:.3}", b.margin));
    }
    let wide = SpectralOptions {
        epsilon: 0.5,
        ..opts
    };
    for name in ["A2", "A4"] {
        let e = entry(name, None);
        let v = verdict(&e, &wide)?;
        let c = v
            .condition(Condition::RealSpectrum)
            .ok_or("no condition c")?;
        let b = v
            .condition(Condition::GapAboveOne)
            .ok_or("no condition b")?;
        check(
            v.hypothesis == Some(Hypothesis::TheoremAc) && c.holds_on_window && b.holds_on_window,
            format!("{name}: {}", v.text),
        )?;
    }
    let id = verdict(&entry("identity", None), &opts)?;
    check(
        id.hypothesis == Some(Hypothesis::TheoremAa) && id.text.starts_with("Theorem A(a): φ = I"),
        format!("identity: {}", id.text),
    )?;
    let c = entry("C", None);
    let region = Region::square(6.0, 41);
    let v = theorem_verdict(&c.map, &region, &opts).map_err(|err| err.to_string())?;
    let failed = [
        Condition::UnitSpectrum,
        Condition::GapAboveOne,
        Condition::RealSpectrum,
    ]
    .iter()
    .all(|&k| v.condition(k).is_some_and(|cv| !cv.holds_on_window));
    check(failed && v.hypothesis.is_none(), format!("C: {}", v.text))?;
    let one = Complex { re: 1.0, im: 0.0 };
    let witness = v
        .conditions
        .iter()
        .filter_map(|cv| cv.witness)
        .find(|w| w.spectrum.values() == [one, one])
        .ok_or("C: no witness with spectrum {1, 1}")?;
    Ok(format!(
        "{}; A2/A4 A(c)+A(b, ε=0.5); identity A(a); C fails a,b,c with Spc {{1,1}} witness at {}",
        notes.join(", "),
        witness.point
    ))
}

fn injectivity() -> Outcome {
    let scan = ScanOptions::default();
    for name in ["A1", "A2", "A3", "A4", "B"] {
        let e = entry(name, None);
        let h = StandardMap::new(e.map.clone()).map_err(|err| err.to_string())?;
        let cert = injectivity_scan(&h, &e.default_window, &scan).map_err(|err| err.to_string())?;
        check(
            cert.status == InjectivityStatus::NoCollisionFound,
            format!("{name}: {:?}", cert.witness),
        )?;
    }
    let c = entry("C", None);
    let h = StandardMap::new(c.map.clone()).map_err(|err| err.to_string())?;
    let window = Region::new(0.0, 6.0, 0.0, 6.0, 41).unwrap();
    let cert = injectivity_scan(&h, &window, &scan).map_err(|err| err.to_string())?;
    let w = cert.witness.ok_or("C: no collision on [0,6]^2")?;
    let center = Point::new(3.0, 3.0);
    let dev = w.image_p.dist(center);
    check(
        cert.status == InjectivityStatus::Collision
            && w.p.dist(center) < 1.0
            && w.q.dist(center) < 1.0
            && dev <= 1e-9,
        format!("C: witness {w:?}"),
    )?;
    Ok(format!(
        "A1-A4, B injective at 201x201; C collides at {} and {} with |h - (3,3)| = {dev:e}",
        w.p, w.q
    ))
}

fn foliation_regression() -> Outcome {
    let a1 = entry("A1", Some(1));
    let h = StandardMap::new(a1.map.clone()).map_err(|err| err.to_string())?;
    let fol = diagonalize_involution(&h.linear_part()).map_err(|err| err.to_string())?;
    check(fol.kind == FoliationKind::Vertical, "A1 should be vertical")?;
    let region = a1.default_window;
    let seeds = LeafSeeds::new(&h, &fol, &region).map_err(|err| err.to_string())?;
    let params = default_parameters(&fol, &seeds, Some(21));
    let leaves = trace_leaves(&h, &fol, &params, &region, &TraceOptions::default())
        .map_err(|err| err.to_string())?;
    let mut worst = 0.0f64;
    let mut invariance = 0.0f64;
    let mut points = 0;
    for leaf in &leaves {
        // h(x, y) = (x − y³/2, y), so the leaf through parameter c is 2x − y³ = 2c
        let c = 2.0 * leaf.parameter;
        for p in &leaf.points {
            let r = (2.0 * p.x - p.y.powi(3) - c).abs();
            check(r <= 1e-6, format!("A1 leaf {c}: residual {r:e} at {p}"))?;
            worst = worst.max(r);
        }
        points += leaf.points.len();
        invariance = invariance
            .max(leaf_invariance_check(&a1.map, &h, &fol, leaf).map_err(|err| err.to_string())?);
    }
    check(
        leaves.len() == 21 && points > 0,
        "A1: expected 21 non-empty leaves",
    )?;
    check(invariance <= 1e-8, format!("A1 invariance {invariance:e}"))?;

    let a2 = entry("A2", Some(1));
    let h2 = StandardMap::new(a2.map.clone()).map_err(|err| err.to_string())?;
    let fol2 = diagonalize_involution(&h2.linear_part()).map_err(|err| err.to_string())?;
    check(fol2.kind == FoliationKind::Radial, "A2 should be radial")?;
    let seeds2 = LeafSeeds::new(&h2, &fol2, &a2.default_window).map_err(|err| err.to_string())?;
    let rays = default_parameters(&fol2, &seeds2, None);
    let leaves2 = trace_leaves(
        &h2,
        &fol2,
        &rays,
        &a2.default_window,
        &TraceOptions::default(),
    )
    .map_err(|err| err.to_string())?;
    let mut antipodal = 0.0f64;
    for leaf in &leaves2 {
        antipodal = antipodal
            .max(leaf_invariance_check(&a2.map, &h2, &fol2, leaf).map_err(|err| err.to_string())?);
    }
    check(
        leaves2.len() == 24 && antipodal <= 1e-8,
        format!(
            "A2: {} rays, antipodal residual {antipodal:e}",
            leaves2.len()
        ),
    )?;
    Ok(format!(
        "A1: 21 leaves, {points} points, worst |2x - y^3 - c| {worst:e}, invariance {invariance:e}; A2: 24 rays, antipodal {antipodal:e}"
    ))
}

fn derivative_oracle() -> Outcome {
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut entries = full_gallery();
    entries.push(GalleryEntry {
        map: gallery::bump_rotation_map(),
        ..entry("C", None)
    });
    for e in &entries {
        let mut r = rng(8);
        for _ in 0..1000 {
            let p = random_point(&mut r, &e.default_window);
            let eval = |q: Point| e.map.evaluate(q).map_err(|err| err.to_string());
            let jac = e.map.jacobian(p).map_err(|err| err.to_string())?;
            let dx =
                (eval(Point::new(p.x + h, p.y))? - eval(Point::new(p.x - h, p.y))?).scale(0.5 / h);
            let dy =
                (eval(Point::new(p.x, p.y + h))? - eval(Point::new(p.x, p.y - h))?).scale(0.5 / h);
            let fd = Mat2::from_columns(dx, dy);
            let rel = (jac - fd).max_abs() / jac.max_abs().max(1.0);
            check(
                rel <= 1e-5,
                format!("{}: relative error {rel:e} at {p}: {jac} vs {fd}", label(e)),
            )?;
            worst = worst.max(rel);
        }
    }
    Ok(format!(
        "{} entries x 1000 points, worst relative error {worst:e}",
        entries.len()
    ))
}

fn eigenvalue_oracle() -> Outcome {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for k in 0..100_000 {
        let mut m = Mat2::new(
            r.gen_range(-10.0..10.0),
            r.gen_range(-10.0..10.0),
            r.gen_range(-10.0..10.0),
            r.gen_range(-10.0..10.0),
        );
        // every fourth matrix has a repeated or nearly repeated eigenvalue
        if k % 4 == 0 {
            m.a22 = m.a11;
            m.a21 = if k % 8 == 0 { 0.0 } else { m.a21 * 1e-12 };
        }
        let s = eigenvalues(&m);
        let (t, d) = (m.trace(), m.det());
        for l in s.values() {
            // λ² − tλ + d in complex arithmetic
            let re = l.re * l.re - l.im * l.im - t * l.re + d;
            let im = 2.0 * l.re * l.im - t * l.im;
            let res = re.hypot(im);
            check(res <= 1e-9, format!("residual {res:e} for {m}"))?;
            worst = worst.max(res);
        }
        let disc = (m.a11 - m.a22).powi(2) + 4.0 * m.a12 * m.a21;
        if disc >= 0.0 {
            check(
                s.lambda1.im == 0.0 && s.lambda2.im == 0.0,
                format!("complex output for disc {disc:e}: {m}"),
            )?;
        }
    }
    Ok(format!("10^5 matrices, worst residual {worst:e}"))
}

fn run_analyze(bin: &str, args: &[&str], out: &Path) -> Result<serde_json::Value, String> {
    let status = Command::new(bin)
        .arg("analyze")
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    check(
        status.success(),
        format!("analyze {args:?} exited with {status}"),
    )?;
    let text = std::fs::read_to_string(out).map_err(|e| e.to_string())?;
    let report: involution_core::AnalysisReport =
        serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(report.deterministic_json())
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_involution");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [&[&str]; 3] = [
        &["--gallery", "C"],
        &["--gallery", "A2:1"],
        &["--map", "(x - y^3, -y)"],
    ];
    for args in runs {
        let a = run_analyze(bin, args, &dir.path().join("a.json"))?;
        let b = run_analyze(bin, args, &dir.path().join("b.json"))?;
        let (a, b) = (a.to_string(), b.to_string());
        check(a == b, format!("reports differ for {args:?}"))?;
    }
    Ok("C, A2:1 and an inline map: identical reports apart from timings and witness fields".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("involution identity", involution_identity),
        ("standard-map regression", standard_map_regression),
        ("conjugacy identity", conjugacy_identity),
        ("spectrum shift", spectrum_shift),
        ("verdict matrix", verdict_matrix),
        ("injectivity", injectivity),
        ("foliation regression", foliation_regression),
        ("derivative oracle", derivative_oracle),
        ("eigenvalue oracle", eigenvalue_oracle),
        ("determinism", determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({ms} ms): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({ms} ms): {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
