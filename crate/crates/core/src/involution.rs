//! Involution identity, orientation class and fixed points on a bounded window.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, PlaneMap};
use crate::linalg2::{Mat2, Point};
use crate::sampling::par_map;

/// Sign threshold below which a Jacobian determinant counts as vanishing.
pub const DEGENERATE_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegionError {
    #[error("window must satisfy x-min < x-max and y-min < y-max (got {0})")]
    Empty(String),
    #[error("grid needs at least 2 samples per axis (got {0})")]
    GridTooSmall(usize),
}

/// A rectangular window sampled on a `grid_n × grid_n` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid_n: usize,
}

impl Region {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        grid_n: usize,
    ) -> Result<Self, RegionError> {
        let ordered = x_min < x_max && y_min < y_max;
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !(ordered && finite) {
            return Err(RegionError::Empty(format!(
                "[{x_min}, {x_max}]x[{y_min}, {y_max}]"
            )));
        }
        if grid_n < 2 {
            return Err(RegionError::GridTooSmall(grid_n));
        }
        Ok(Region {
            x_min,
            x_max,
            y_min,
            y_max,
            grid_n,
        })
    }

    /// `[-half, half]²`.
    pub fn square(half: f64, grid_n: usize) -> Self {
        Region::new(-half, half, -half, half, grid_n).expect("valid square window")
    }

    pub fn with_grid(self, grid_n: usize) -> Result<Self, RegionError> {
        Region::new(self.x_min, self.x_max, self.y_min, self.y_max, grid_n)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Lattice node `(i, j)`, `i` along x.
    pub fn node(&self, i: usize, j: usize) -> Point {
        let d = (self.grid_n - 1) as f64;
        Point::new(
            self.x_min + self.width() * i as f64 / d,
            self.y_min + self.height() * j as f64 / d,
        )
    }

    /// All lattice nodes, rows of constant y from bottom to top.
    pub fn nodes(&self) -> Vec<Point> {
        let n = self.grid_n;
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| self.node(i, j))
            .collect()
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]x[{}, {}]",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolutionVerdict {
    pub max_residual: f64,
    pub pass: bool,
    pub worst_point: Point,
}

/// Largest `‖φ(φ(p)) − p‖ / (1 + ‖p‖)` over the window lattice.
pub fn verify_involution<M: PlaneMap>(
    map: &M,
    region: &Region,
    tol: f64,
) -> Result<InvolutionVerdict, EvalError> {
    let nodes = region.nodes();
    let residuals = par_map(&nodes, |&p| {
        let once = map.evaluate(p)?;
        let twice = map.evaluate(once)?;
        Ok::<_, EvalError>(twice.dist(p) / (1.0 + p.norm()))
    });
    let mut worst = (0.0, nodes[0]);
    for (r, p) in residuals.into_iter().zip(nodes) {
        let r = r?;
        if r > worst.0 || r.is_nan() {
            worst = (r, p);
        }
    }
    Ok(InvolutionVerdict {
        max_residual: worst.0,
        pass: worst.0 <= tol,
        worst_point: worst.1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Preserving => "orientation-preserving",
            Orientation::Reversing => "orientation-reversing",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationClass {
    pub kind: Orientation,
    pub min_abs_det: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvolutionError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("Jacobian determinant {det:e} at {witness} is (nearly) zero; not an involution")]
    VanishingDeterminant { witness: Point, det: f64 },
    #[error(
        "Jacobian determinant changes sign between {positive} and {negative}; not an involution"
    )]
    MixedOrientation { positive: Point, negative: Point },
}

/// Sign of `det Dφ` on every lattice node.
pub fn orientation<M: PlaneMap>(
    map: &M,
    region: &Region,
) -> Result<OrientationClass, InvolutionError> {
    let nodes = region.nodes();
    let dets = par_map(&nodes, |&p| map.jacobian(p).map(|j| j.det()));
    let mut positive = None;
    let mut negative = None;
    let mut min_abs = f64::INFINITY;
    for (det, p) in dets.into_iter().zip(nodes) {
        let det = det?;
        if det.is_nan() || det.abs() <= DEGENERATE_DET {
            return Err(InvolutionError::VanishingDeterminant { witness: p, det });
        }
        min_abs = min_abs.min(det.abs());
        if det > 0.0 {
            positive.get_or_insert(p);
        } else {
            negative.get_or_insert(p);
        }
        if let (Some(positive), Some(negative)) = (positive, negative) {
            return Err(InvolutionError::MixedOrientation { positive, negative });
        }
    }
    let kind = if positive.is_some() {
        Orientation::Preserving
    } else {
        Orientation::Reversing
    };
    Ok(OrientationClass {
        kind,
        min_abs_det: min_abs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// Jacobian equals `I`.
    FixPlus,
    /// Jacobian equals `−I`.
    FixMinus,
    /// Point on a one-dimensional fixed set.
    Curve,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: Point,
    pub classification: Classification,
    pub jacobian: Mat2,
    pub residual: f64,
}

/// `FixPlus`/`FixMinus` by the `±I` test for orientation-preserving maps;
/// `Unclassified` when `det Dφ(p) < 0` or neither test passes.
pub fn classify_fixed_point<M: PlaneMap>(
    map: &M,
    p: Point,
    class_tol: f64,
) -> Result<Classification, EvalError> {
    let jac = map.jacobian(p)?;
    Ok(classify_jacobian(&jac, class_tol))
}

fn classify_jacobian(jac: &Mat2, class_tol: f64) -> Classification {
    if jac.det() <= 0.0 {
        Classification::Unclassified
    } else if (*jac - Mat2::IDENTITY).max_abs() <= class_tol {
        Classification::FixPlus
    } else if (*jac + Mat2::IDENTITY).max_abs() <= class_tol {
        Classification::FixMinus
    } else {
        Classification::Unclassified
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub newton_tol: f64,
    pub max_iter: usize,
    pub class_tol: f64,
    /// A result with more than `curve_fraction · grid_n` distinct roots is
    /// flagged as a fixed curve.
    pub curve_fraction: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            newton_tol: 1e-10,
            max_iter: 60,
            class_tol: 1e-6,
            curve_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSet {
    pub points: Vec<FixedPoint>,
    /// The fixed set looks one-dimensional (or larger) on the window.
    pub curve: bool,
    pub seeds: usize,
    pub converged: usize,
    pub singular_seeds: usize,
    pub diverged_seeds: usize,
    pub outside_window: usize,
    pub eval_failures: usize,
}

impl FixedPointSet {
    /// First point with the given classification.
    pub fn first(&self, class: Classification) -> Option<&FixedPoint> {
        self.points.iter().find(|p| p.classification == class)
    }
}

enum SeedOutcome {
    Root(Point),
    Singular,
    Diverged,
    EvalFailed,
}

/// Damped Newton on `F(p) = φ(p) − p`.
///
/// When `DF = Dφ − I` is (numerically) rank deficient, which is the norm on
/// the fixed curve of an orientation-reversing involution, the step falls
/// back to the minimum-norm Levenberg–Marquardt solution. A seed whose `DF`
/// vanishes identically while `F ≠ 0` is reported singular.
fn newton_root<M: PlaneMap>(map: &M, seed: Point, opts: &FixedPointOptions) -> SeedOutcome {
    let residual = |p: Point| map.evaluate(p).map(|v| v - p);
    let mut p = seed;
    let Ok(mut f) = residual(p) else {
        return SeedOutcome::EvalFailed;
    };
    for _ in 0..opts.max_iter {
        if f.norm() <= opts.newton_tol {
            return SeedOutcome::Root(p);
        }
        let Ok(jac) = map.jacobian(p) else {
            return SeedOutcome::EvalFailed;
        };
        let df = jac - Mat2::IDENTITY;
        let scale = df.max_abs();
        if scale <= 1e-14 {
            return SeedOutcome::Singular;
        }
        let rhs = -f;
        let step = if df.det().abs() > 1e-10 * scale * scale {
            df.inverse().map(|inv| inv.apply(rhs)).ok()
        } else {
            None
        };
        let step = step.unwrap_or_else(|| {
            let normal = df.transpose() * df + Mat2::IDENTITY.scale(1e-14 * scale * scale);
            match normal.inverse() {
                Ok(inv) => inv.apply(df.transpose().apply(rhs)),
                Err(_) => Point::ORIGIN,
            }
        });
        if step.norm() == 0.0 {
            return SeedOutcome::Singular;
        }
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..12 {
            let cand = p + step.scale(t);
            if let Ok(fc) = residual(cand) {
                if fc.norm() < f.norm() {
                    next = Some((cand, fc));
                    break;
                }
            }
            t *= 0.5;
        }
        match next {
            Some((cand, fc)) => {
                p = cand;
                f = fc;
            }
            None => break,
        }
    }
    if f.norm() <= opts.newton_tol {
        SeedOutcome::Root(p)
    } else {
        SeedOutcome::Diverged
    }
}

/// Newton seeded from every lattice node; roots are merged within
/// `1e-6 · diameter` and classified.
pub fn find_fixed_points<M: PlaneMap>(
    map: &M,
    region: &Region,
    opts: &FixedPointOptions,
) -> Result<FixedPointSet, EvalError> {
    let nodes = region.nodes();
    let outcomes = par_map(&nodes, |&seed| newton_root(map, seed, opts));
    let merge = 1e-6 * region.diameter();
    let mut set = FixedPointSet {
        points: Vec::new(),
        curve: false,
        seeds: nodes.len(),
        converged: 0,
        singular_seeds: 0,
        diverged_seeds: 0,
        outside_window: 0,
        eval_failures: 0,
    };
    let mut roots: Vec<Point> = Vec::new();
    for outcome in outcomes {
        match outcome {
            SeedOutcome::Root(p) => {
                set.converged += 1;
                if !region.contains(p) {
                    set.outside_window += 1;
                } else if roots.iter().all(|r| r.dist(p) > merge) {
                    roots.push(p);
                }
            }
            SeedOutcome::Singular => set.singular_seeds += 1,
            SeedOutcome::Diverged => set.diverged_seeds += 1,
            SeedOutcome::EvalFailed => set.eval_failures += 1,
        }
    }
    set.curve = roots.len() > 1 && roots.len() as f64 > opts.curve_fraction * region.grid_n as f64;
    for location in roots {
        let (value, jacobian) = map.evaluate_with_jacobian(location)?;
        let mut classification = classify_jacobian(&jacobian, opts.class_tol);
        if set.curve && classification == Classification::Unclassified {
            classification = Classification::Curve;
        }
        set.points.push(FixedPoint {
            location,
            classification,
            jacobian,
            residual: value.dist(location),
        });
    }
    Ok(set)
}
