//! Ready-made involutions with their known closed-form answers.
//!
//! The polynomial families `A1`–`A4` take a parameter `n ≥ 0`; `B` is a
//! hyperbolic-sine conjugate of a linear involution; `C` is the smooth
//! rotation construction around `(±3, ±3)` that defeats the standard map.
//! The orientation-reversing counterexample with a prescribed fixed curve is
//! only known to exist and has no entry here.

use std::f64::consts::PI;

use thiserror::Error;

use crate::expr::{NativeMap, PlanarMap, Scalar};
use crate::involution::{Orientation, Region};
use crate::linalg2::Point;

/// Largest accepted family parameter.
pub const MAX_N: u32 = 10;

pub const NAMES: [&str; 9] = [
    "A1",
    "A2",
    "A3",
    "A4",
    "B",
    "C",
    "identity",
    "minus-identity",
    "flip-y",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GalleryError {
    #[error("unknown gallery entry `{0}` (available: {list})", list = NAMES.join(", "))]
    UnknownName(String),
    #[error(
        "`D` is not available: the orientation-reversing counterexample is only known to \
         exist and has no closed form"
    )]
    NonConstructive,
    #[error("entry `{name}` does not accept parameter n = {n}")]
    InvalidParameter { name: String, n: u32 },
    #[error("malformed gallery spec `{0}` (expected NAME or NAME:n)")]
    MalformedSpec(String),
}

/// Closed-form facts known for an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Expected {
    pub orientation: Orientation,
    pub known_h: Option<String>,
    pub known_foliation: Option<String>,
    pub known_verdict: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryEntry {
    pub name: String,
    pub n: Option<u32>,
    /// Human-readable formula of the map before any recentering.
    pub formula: String,
    pub tag: &'static str,
    pub map: PlanarMap,
    /// Translation applied so that the origin is fixed, if any.
    pub recentered_at: Option<Point>,
    pub default_window: Region,
    pub expected: Expected,
}

pub fn list_entries() -> Vec<&'static str> {
    NAMES.to_vec()
}

/// Split `NAME[:n]`.
pub fn parse_spec(spec: &str) -> Result<(String, Option<u32>), GalleryError> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default().trim();
    let n = match parts.next() {
        None => None,
        Some(t) => Some(
            t.trim()
                .parse::<u32>()
                .map_err(|_| GalleryError::MalformedSpec(spec.to_string()))?,
        ),
    };
    if name.is_empty() || parts.next().is_some() {
        return Err(GalleryError::MalformedSpec(spec.to_string()));
    }
    Ok((name.to_string(), n))
}

fn pow_text(base: &str, k: u32) -> String {
    format!("{base}^{k}")
}

fn expr_map(src: &str) -> PlanarMap {
    PlanarMap::parse(src).unwrap_or_else(|e| panic!("gallery formula `{src}` must parse: {e}"))
}

/// Fetch an entry. The `A` families default to `n = 1`.
pub fn get(name: &str, n: Option<u32>) -> Result<GalleryEntry, GalleryError> {
    let family = matches!(name, "A1" | "A2" | "A3" | "A4");
    if let Some(n) = n {
        if !family || n > MAX_N {
            return Err(GalleryError::InvalidParameter {
                name: name.to_string(),
                n,
            });
        }
    }
    let n_val = n.unwrap_or(1);
    let odd = 2 * n_val + 1;
    let even = 2 * n_val;
    let window = Region::square(5.0, 41);

    let entry = |formula: String,
                 tag: &'static str,
                 map: PlanarMap,
                 orientation: Orientation,
                 known_h: Option<String>,
                 known_foliation: Option<String>,
                 verdict: &str| GalleryEntry {
        name: name.to_string(),
        n: family.then_some(n_val),
        formula,
        tag,
        map,
        recentered_at: None,
        default_window: window,
        expected: Expected {
            orientation,
            known_h,
            known_foliation,
            known_verdict: verdict.to_string(),
        },
    };

    let e = match name {
        "A1" => {
            let formula = format!("(x - {}, -y)", pow_text("y", odd));
            entry(
                formula.clone(),
                "odd shear, reversing",
                expr_map(&formula),
                Orientation::Reversing,
                Some(format!("(x - {}/2, y)", pow_text("y", odd))),
                Some(format!("2x - {} = const", pow_text("y", odd))),
                "Theorem B",
            )
        }
        "A2" => {
            let formula = format!("(-x + {}, -y)", pow_text("y", even));
            let mut e = entry(
                formula.clone(),
                "even shear, preserving",
                expr_map(&formula),
                Orientation::Preserving,
                Some(format!("(x - {}/2, y)", pow_text("y", even))),
                Some("h-preimages of the rays from the origin".into()),
                "Theorem A(c)",
            );
            if n_val == 0 {
                // (-x + 1, -y) fixes (1/2, 0)
                let c = Point::new(0.5, 0.0);
                e.map = e.map.recentered(c).expect("expression map");
                e.recentered_at = Some(c);
                e.expected.known_h = Some("(x, y) after recentering at (1/2, 0)".into());
            }
            e
        }
        "A3" => {
            let s = pow_text("((x + y)/2)", odd);
            let formula = format!("(-y - {s}, -x + {s})");
            let known_h = (n_val >= 1).then(|| format!("(x - {s}/2, y + {s}/2)"));
            let fol = (n_val >= 1).then(|| format!("x - y - {s} = const"));
            entry(
                formula.clone(),
                "odd diagonal shear, reversing",
                expr_map(&formula),
                Orientation::Reversing,
                known_h,
                fol,
                "Theorem B",
            )
        }
        "A4" => {
            let s = pow_text("((x + y)/2)", even);
            let formula = format!("(-x + {s}, -y - {s})");
            let mut e = entry(
                formula.clone(),
                "even diagonal shear, preserving",
                expr_map(&formula),
                Orientation::Preserving,
                Some(format!("(x - {s}/2, y + {s}/2)")),
                Some("h-preimages of the rays from the origin".into()),
                "Theorem A(c)",
            );
            if n_val == 0 {
                // (-x + 1, -y - 1) fixes (1/2, -1/2)
                let c = Point::new(0.5, -0.5);
                e.map = e.map.recentered(c).expect("expression map");
                e.recentered_at = Some(c);
                e.expected.known_h = Some("(x, y) after recentering at (1/2, -1/2)".into());
            }
            e
        }
        "B" => {
            let formula =
                "(asinh((sinh(x) + sinh(y))/2), asinh((3*sinh(x) - sinh(y))/2))".to_string();
            entry(
                formula.clone(),
                "sinh-conjugated reflection",
                expr_map(&formula),
                Orientation::Reversing,
                None,
                Some("3x + y + 3*phi1(x, y) + phi2(x, y) = const".into()),
                "Theorem B",
            )
        }
        "C" => {
            let mut e = entry(
                "psi(p) = rho(-p), rho rotating about (3,3) and (-3,-3) by \
                 eta(|p-(3,3)|^2) - eta(|p+(3,3)|^2)"
                    .to_string(),
                "bump rotation, non-injective h",
                bump_rotation_map(),
                Orientation::Preserving,
                None,
                None,
                "no hypothesis verified",
            );
            e.default_window = Region::square(6.0, 41);
            e
        }
        "identity" => entry(
            "(x, y)".into(),
            "linear baseline",
            expr_map("(x, y)"),
            Orientation::Preserving,
            Some("(x, y)".into()),
            None,
            "Theorem A(a)",
        ),
        "minus-identity" => entry(
            "(-x, -y)".into(),
            "linear baseline",
            expr_map("(-x, -y)"),
            Orientation::Preserving,
            Some("(x, y)".into()),
            Some("rays from the origin".into()),
            "Theorem A(c)",
        ),
        "flip-y" => entry(
            "(x, -y)".into(),
            "linear baseline",
            expr_map("(x, -y)"),
            Orientation::Reversing,
            Some("(x, y)".into()),
            Some("x = const".into()),
            "Theorem B",
        ),
        "D" => return Err(GalleryError::NonConstructive),
        other => return Err(GalleryError::UnknownName(other.to_string())),
    };
    Ok(e)
}

/// Every entry, with the `A` families at the given `n`.
pub fn all_entries(n: u32) -> Vec<GalleryEntry> {
    NAMES
        .iter()
        .map(|name| {
            let n = matches!(*name, "A1" | "A2" | "A3" | "A4").then_some(n);
            get(name, n).expect("listed entries exist")
        })
        .collect()
}

pub fn bump_rotation_map() -> PlanarMap {
    PlanarMap::native(NativeMap::BumpRotation(BumpRotation::default()))
}

/// `C¹` bump with `η = π` on `[-1, 1]` and `η = 0` outside `(-2, 2)`:
/// `η(t) = π·s(clamp(2 − |t|, 0, 1))` with smoothstep `s(u) = 3u² − 2u³`.
pub fn bump<S: Scalar>(t: S) -> S {
    let a = t.abs();
    let v = a.value();
    if v >= 2.0 {
        S::constant(0.0)
    } else if v <= 1.0 {
        S::constant(PI)
    } else {
        let u = S::constant(2.0) - a;
        let u2 = u * u;
        S::constant(PI) * (S::constant(3.0) * u2 - S::constant(2.0) * u2 * u)
    }
}

/// Orientation-preserving involution `ψ = ρ ∘ (−I)`.
///
/// `ρ` rotates each circle about `(c, c)` (respectively `(−c, −c)`) by the
/// angle `θ(q) = η(‖q − (c,c)‖²) − η(‖q + (c,c)‖²)`, using the rotation
/// `R_θ(x, y) = (x cos θ + y sin θ, −x sin θ + y cos θ)`. Outside both bumps
/// `θ = 0` and `ψ = −I`. On the unit ball around `(c, c)` the map is the
/// translation `p ↦ p − (2c, 2c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpRotation {
    pub center: f64,
}

impl Default for BumpRotation {
    fn default() -> Self {
        BumpRotation { center: 3.0 }
    }
}

impl BumpRotation {
    /// The rotation angle field θ.
    pub fn angle<S: Scalar>(&self, [x, y]: [S; 2]) -> S {
        let c = S::constant(self.center);
        let (px, py) = (x - c, y - c);
        let (mx, my) = (x + c, y + c);
        bump(px * px + py * py) - bump(mx * mx + my * my)
    }

    pub fn apply<S: Scalar>(&self, [x, y]: [S; 2]) -> [S; 2] {
        let q = [-x, -y];
        let theta = self.angle(q);
        if theta.value() == 0.0 {
            return q;
        }
        // θ ≠ 0 only within √2 of one center; rotate about the nearer one
        let c = if q[0].value() + q[1].value() >= 0.0 {
            self.center
        } else {
            -self.center
        };
        let c = S::constant(c);
        let (vx, vy) = (q[0] - c, q[1] - c);
        let (cos, sin) = (theta.cos(), theta.sin());
        [c + cos * vx + sin * vy, c - sin * vx + cos * vy]
    }
}
