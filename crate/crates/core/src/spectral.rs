//! Sampling of the Jacobian spectrum over a window and the spectral
//! hypotheses of the linearization theorems.
//!
//! Everything here is window-qualified: a condition that "holds" was
//! observed on every lattice node of the window, nothing more.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, PlaneMap};
use crate::involution::{self, FixedPointSet, InvolutionError, Orientation, Region};
use crate::linalg2::{eigenvalues, Complex, Mat2, Point, Spectrum};
use crate::sampling::par_map;

/// Tolerance for "every eigenvalue equals 1".
pub const UNIT_SPECTRUM_TOL: f64 = 1e-9;
/// Residual below which `φ(0) = 0` is accepted.
pub const ORIGIN_FIXED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Involution(#[from] InvolutionError),
    #[error(
        "no base point: φ(0) is not fixed (residual {origin_residual:e}) and no Fix⁻ point was found"
    )]
    NoBasePoint { origin_residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub point: Point,
    pub spectrum: Spectrum,
    /// `Trace(Dφ(0)·Dφ(p))`.
    pub trace_product: f64,
    pub det: f64,
}

/// The fixed point whose Jacobian plays the role of `Dφ(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub point: Point,
    pub jacobian: Mat2,
}

/// The origin when `φ(0) = 0`, otherwise the first `Fix⁻` point found.
pub fn base_point<M: PlaneMap>(
    map: &M,
    fixed: Option<&FixedPointSet>,
) -> Result<BasePoint, SpectralError> {
    let (value, jacobian) = map.evaluate_with_jacobian(Point::ORIGIN)?;
    let origin_residual = value.norm();
    if origin_residual <= ORIGIN_FIXED_TOL {
        return Ok(BasePoint {
            point: Point::ORIGIN,
            jacobian,
        });
    }
    fixed
        .and_then(|set| set.first(involution::Classification::FixMinus))
        .map(|fp| BasePoint {
            point: fp.location,
            jacobian: fp.jacobian,
        })
        .ok_or(SpectralError::NoBasePoint { origin_residual })
}

/// One spectrum sample per lattice node.
pub fn sample_spectrum<M: PlaneMap>(
    map: &M,
    region: &Region,
    base: &Mat2,
) -> Result<Vec<SpectrumSample>, EvalError> {
    let nodes = region.nodes();
    par_map(&nodes, |&p| {
        let jac = map.jacobian(p)?;
        Ok(SpectrumSample {
            point: p,
            spectrum: eigenvalues(&jac),
            trace_product: base.multiply(&jac).trace(),
            det: jac.det(),
        })
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// Every eigenvalue equals 1.
    #[serde(rename = "A-a")]
    UnitSpectrum,
    /// No real eigenvalue in `[1, 1 + ε)`.
    #[serde(rename = "A-b")]
    GapAboveOne,
    /// Every eigenvalue real.
    #[serde(rename = "A-c")]
    RealSpectrum,
    /// `Trace(Dφ(0)·Dφ(p)) > −1`.
    #[serde(rename = "B-trace")]
    TraceBound,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::UnitSpectrum => "A-a",
            Condition::GapAboveOne => "A-b",
            Condition::RealSpectrum => "A-c",
            Condition::TraceBound => "B-trace",
        }
    }
}

/// Outcome of one condition on the sampled window.
///
/// `margin` is non-negative when the condition holds and measures how far
/// the samples are from violating it:
/// * `A-a`: `1e-9 − max |λ − 1|`
/// * `A-b`: smallest signed distance of an eigenvalue to `[1, 1 + ε)`, where a
///   real eigenvalue inside the interval scores `−(1 + ε − λ)`
/// * `A-c`: `im_tol − max |Im λ|`
/// * `B-trace`: `min Trace(Dφ(0)·Dφ(p)) + 1`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub condition: Condition,
    pub holds_on_window: bool,
    pub witness: Option<SpectrumSample>,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionA {
    pub a: ConditionVerdict,
    pub b: ConditionVerdict,
    pub c: ConditionVerdict,
}

// Sample minimizing `score` (first on ties) and the minimum.
fn argmin(
    samples: &[SpectrumSample],
    score: impl Fn(&SpectrumSample) -> f64,
) -> (f64, Option<SpectrumSample>) {
    let mut best: (f64, Option<SpectrumSample>) = (f64::INFINITY, None);
    for s in samples {
        let v = score(s);
        if v < best.0 {
            best = (v, Some(*s));
        }
    }
    best
}

fn verdict(
    condition: Condition,
    margin: f64,
    holds: bool,
    witness: Option<SpectrumSample>,
) -> ConditionVerdict {
    ConditionVerdict {
        condition,
        holds_on_window: holds,
        witness: if holds { None } else { witness },
        margin,
    }
}

/// Signed distance of `l` to `[1, 1 + ε)`; real eigenvalues inside score
/// `−(1 + ε − λ)`, so `λ = 1` is the deepest violation.
fn gap_score(l: Complex, epsilon: f64, im_tol: f64) -> f64 {
    let lo = 1.0;
    let hi = 1.0 + epsilon;
    if l.im.abs() <= im_tol && l.re >= lo && l.re < hi {
        return -(hi - l.re);
    }
    let dx = if l.re < lo {
        lo - l.re
    } else if l.re > hi {
        l.re - hi
    } else {
        0.0
    };
    dx.hypot(l.im)
}

pub fn check_condition_a(samples: &[SpectrumSample], epsilon: f64, im_tol: f64) -> ConditionA {
    let unit_dev = |s: &SpectrumSample| {
        s.spectrum
            .values()
            .iter()
            .map(|l| l.dist(Complex::real(1.0)))
            .fold(0.0, f64::max)
    };
    let (neg_dev, wa) = argmin(samples, |s| -unit_dev(s));
    let max_dev = -neg_dev;
    let a = verdict(
        Condition::UnitSpectrum,
        UNIT_SPECTRUM_TOL - max_dev,
        max_dev <= UNIT_SPECTRUM_TOL,
        wa,
    );

    let (gap, wb) = argmin(samples, |s| {
        s.spectrum
            .values()
            .iter()
            .map(|&l| gap_score(l, epsilon, im_tol))
            .fold(f64::INFINITY, f64::min)
    });
    let inside = samples.iter().any(|s| {
        s.spectrum
            .values()
            .iter()
            .any(|l| l.im.abs() <= im_tol && l.re >= 1.0 && l.re < 1.0 + epsilon)
    });
    let b = verdict(Condition::GapAboveOne, gap, !inside, wb);

    let (neg_im, wc) = argmin(samples, |s| {
        -s.spectrum
            .values()
            .iter()
            .map(|l| l.im.abs())
            .fold(0.0, f64::max)
    });
    let max_im = -neg_im;
    let c = verdict(
        Condition::RealSpectrum,
        im_tol - max_im,
        max_im <= im_tol,
        wc,
    );

    ConditionA { a, b, c }
}

pub fn check_condition_b(samples: &[SpectrumSample]) -> ConditionVerdict {
    let (min_trace, w) = argmin(samples, |s| s.trace_product);
    verdict(Condition::TraceBound, min_trace + 1.0, min_trace > -1.0, w)
}

/// Which hypothesis certified the linearization on the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    #[serde(rename = "A(a)")]
    TheoremAa,
    #[serde(rename = "A(b)")]
    TheoremAb,
    #[serde(rename = "A(c)")]
    TheoremAc,
    #[serde(rename = "B")]
    TheoremB,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::TheoremAa => "Theorem A(a)",
            Hypothesis::TheoremAb => "Theorem A(b)",
            Hypothesis::TheoremAc => "Theorem A(c)",
            Hypothesis::TheoremB => "Theorem B",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremVerdict {
    pub orientation: Orientation,
    pub hypothesis: Option<Hypothesis>,
    pub conditions: Vec<ConditionVerdict>,
    pub epsilon: f64,
    pub window: Region,
    pub text: String,
}

impl TheoremVerdict {
    pub fn linearizable_on_window(&self) -> bool {
        self.hypothesis.is_some()
    }

    pub fn condition(&self, c: Condition) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|v| v.condition == c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralOptions {
    pub epsilon: f64,
    pub im_tol: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            epsilon: 0.1,
            im_tol: 1e-9,
        }
    }
}

/// Compact decimal rendering: at most six decimals, trailing zeros removed.
pub fn fmt_num(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Combine condition checks into a verdict for the given orientation.
///
/// Preserving maps are tested against A(a), A(c), A(b) in that order;
/// reversing maps against the trace condition.
pub fn verdict_from_samples(
    orientation: Orientation,
    samples: &[SpectrumSample],
    region: &Region,
    opts: &SpectralOptions,
) -> TheoremVerdict {
    let window = format!("on window {region}");
    let (hypothesis, conditions, text) = match orientation {
        Orientation::Preserving => {
            let ca = check_condition_a(samples, opts.epsilon, opts.im_tol);
            let (hyp, text) = if ca.a.holds_on_window {
                (
                    Some(Hypothesis::TheoremAa),
                    format!("Theorem A(a): φ = I (Spc = {{1}}) {window}"),
                )
            } else if ca.c.holds_on_window {
                (
                    Some(Hypothesis::TheoremAc),
                    format!("Theorem A(c) applies (Spc ⊂ ℝ) {window}"),
                )
            } else if ca.b.holds_on_window {
                (
                    Some(Hypothesis::TheoremAb),
                    format!(
                        "Theorem A(b) applies (Spc ∩ [1, {}) = ∅, margin {}) {window}",
                        fmt_num(1.0 + opts.epsilon),
                        fmt_num(ca.b.margin)
                    ),
                )
            } else {
                let at = ca.b.witness.map(|w| w.point).unwrap_or_default();
                (
                    None,
                    format!(
                        "no hypothesis verified; Theorem A(b) violated at witness ({}, {}) {window}",
                        fmt_num(at.x),
                        fmt_num(at.y)
                    ),
                )
            };
            (hyp, vec![ca.a, ca.b, ca.c], text)
        }
        Orientation::Reversing => {
            let cb = check_condition_b(samples);
            let text = if cb.holds_on_window {
                format!(
                    "Theorem B applies (trace condition, margin {}) {window}",
                    fmt_num(cb.margin)
                )
            } else {
                let at = cb.witness.map(|w| w.point).unwrap_or_default();
                format!(
                    "no hypothesis verified; trace condition violated at witness ({}, {}) {window}",
                    fmt_num(at.x),
                    fmt_num(at.y)
                )
            };
            (
                cb.holds_on_window.then_some(Hypothesis::TheoremB),
                vec![cb],
                text,
            )
        }
    };
    TheoremVerdict {
        orientation,
        hypothesis,
        conditions,
        epsilon: opts.epsilon,
        window: *region,
        text,
    }
}

/// Orientation, base point, sampling and verdict in one call.
pub fn theorem_verdict<M: PlaneMap>(
    map: &M,
    region: &Region,
    opts: &SpectralOptions,
) -> Result<TheoremVerdict, SpectralError> {
    let orient = involution::orientation(map, region)?;
    let base = base_point(map, None)?;
    let samples = sample_spectrum(map, region, &base.jacobian)?;
    Ok(verdict_from_samples(orient.kind, &samples, region, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::PlanarMap;
    use crate::gallery;

    fn map(src: &str) -> PlanarMap {
        PlanarMap::parse(src).unwrap()
    }

    fn samples_of(m: &PlanarMap, r: &Region) -> Vec<SpectrumSample> {
        let base = base_point(m, None).unwrap();
        sample_spectrum(m, r, &base.jacobian).unwrap()
    }

    #[test]
    fn a2_spectrum_is_minus_one() {
        let s = samples_of(&map("(-x + y^2, -y)"), &Region::square(5.0, 21));
        for sample in &s {
            assert_eq!(sample.spectrum.values(), [Complex::real(-1.0); 2]);
        }
        let ca = check_condition_a(&s, 0.5, 1e-9);
        assert!(!ca.a.holds_on_window);
        assert!(ca.a.witness.is_some());
        assert!(ca.b.holds_on_window);
        assert_eq!(ca.b.margin, 2.0);
        assert!(ca.c.holds_on_window);
    }

    #[test]
    fn a1_trace_product_is_two() {
        let s = samples_of(&map("(x - y^3, -y)"), &Region::square(5.0, 21));
        assert!(s.iter().all(|x| x.trace_product == 2.0));
        let v = check_condition_b(&s);
        assert!(v.holds_on_window);
        assert_eq!(v.margin, 3.0);
    }

    #[test]
    fn identity_satisfies_a_a() {
        let s = samples_of(&map("(x, y)"), &Region::square(5.0, 11));
        assert!(s
            .iter()
            .all(|x| x.spectrum.values() == [Complex::real(1.0); 2]));
        assert!(check_condition_a(&s, 0.1, 1e-9).a.holds_on_window);
    }

    #[test]
    fn flip_and_b_satisfy_trace_condition() {
        let s = samples_of(&map("(x, -y)"), &Region::square(5.0, 11));
        assert!(s.iter().all(|x| x.trace_product == 2.0));
        let b = gallery::get("B", None).unwrap();
        let s = samples_of(&b.map, &Region::square(5.0, 41));
        assert!(s.iter().all(|x| x.trace_product > 0.0));
        assert!(check_condition_b(&s).holds_on_window);
    }

    #[test]
    fn negative_real_spectra_never_violate_gap() {
        let s = samples_of(&map("(-x + y^2, -y)"), &Region::square(5.0, 11));
        for eps in [1e-6, 0.1, 1.0, 10.0, 1e6] {
            assert!(check_condition_a(&s, eps, 1e-9).b.holds_on_window);
        }
    }

    #[test]
    fn bump_rotation_violates_everything() {
        let c = gallery::bump_rotation_map();
        let r = Region::square(6.0, 41);
        let s = samples_of(&c, &r);
        let ca = check_condition_a(&s, 0.1, 1e-9);
        assert!(!ca.a.holds_on_window);
        assert!(!ca.b.holds_on_window);
        assert!(!ca.c.holds_on_window);
        let w = ca.b.witness.unwrap();
        assert_eq!(w.spectrum.values(), [Complex::real(1.0); 2]);
        assert!(
            w.point
                .dist(Point::new(3.0, 3.0))
                .min(w.point.dist(Point::new(-3.0, -3.0)))
                < 1.0,
            "{:?}",
            w.point
        );
        let v = verdict_from_samples(Orientation::Preserving, &s, &r, &SpectralOptions::default());
        assert!(v.hypothesis.is_none());
        assert!(v
            .text
            .starts_with("no hypothesis verified; Theorem A(b) violated at witness"));
    }

    #[test]
    fn verdict_texts() {
        let a3 = gallery::get("A3", Some(1)).unwrap();
        let v = theorem_verdict(
            &a3.map,
            &Region::square(5.0, 41),
            &SpectralOptions::default(),
        )
        .unwrap();
        assert_eq!(v.hypothesis, Some(Hypothesis::TheoremB));
        assert!(
            v.text
                .starts_with("Theorem B applies (trace condition, margin 3)"),
            "{}",
            v.text
        );

        let a4 = gallery::get("A4", Some(1)).unwrap();
        let v = theorem_verdict(
            &a4.map,
            &Region::square(5.0, 41),
            &SpectralOptions::default(),
        )
        .unwrap();
        assert_eq!(v.hypothesis, Some(Hypothesis::TheoremAc));
        assert!(v.text.starts_with("Theorem A(c) applies (Spc ⊂ ℝ)"));
        assert!(v.text.contains("window [-5, 5]x[-5, 5]"));

        let id = theorem_verdict(
            &map("(x, y)"),
            &Region::square(5.0, 11),
            &SpectralOptions::default(),
        )
        .unwrap();
        assert_eq!(id.hypothesis, Some(Hypothesis::TheoremAa));
    }

    #[test]
    fn missing_base_point_is_an_error() {
        let m = map("(-x + 1, -y)");
        assert!(matches!(
            base_point(&m, None),
            Err(SpectralError::NoBasePoint { .. })
        ));
        let fixed = involution::find_fixed_points(
            &m,
            &Region::square(2.0, 11),
            &involution::FixedPointOptions::default(),
        )
        .unwrap();
        let base = base_point(&m, Some(&fixed)).unwrap();
        assert!(base.point.dist(Point::new(0.5, 0.0)) < 1e-9);
        assert_eq!(base.jacobian, -Mat2::IDENTITY);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(-0.0000001), "0");
        assert_eq!(fmt_num(1.1), "1.1");
    }
}
