//! Canonical foliations of a linear involution and their pull-backs by the
//! standard map.
//!
//! A linear involution other than `I` is conjugate either to `−I` (leaves
//! are rays from the origin) or to `(x, y) ↦ (x, −y)` (leaves are vertical
//! lines). Leaves of the nonlinear foliation are traced as `h`-preimages of
//! canonical leaves by predictor–corrector continuation in the target plane.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, PlaneMap};
use crate::involution::Region;
use crate::linalg2::{is_linear_involution, Mat2, Point};
use crate::linearize::StandardMap;
use crate::sampling::par_map;

const LINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FoliationError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("identity involution has no canonical foliation of this kind")]
    IdentityInvolution,
    #[error("{0} is not a linear involution")]
    NotInvolution(Mat2),
    #[error("singular Jacobian of h at {last}")]
    Singular { last: Point },
    #[error("inversion of h did not converge (last iterate {last}, residual {residual:e})")]
    Diverged { last: Point, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoliationKind {
    /// Rays from the origin, invariant under `−I`.
    Radial,
    /// Vertical lines, invariant under `(x, y) ↦ (x, −y)`.
    Vertical,
}

impl FoliationKind {
    pub fn label(self) -> &'static str {
        match self {
            FoliationKind::Radial => "radial",
            FoliationKind::Vertical => "vertical",
        }
    }
}

/// `S` with `S·L·S⁻¹` equal to `−I` (radial) or `diag(1, −1)` (vertical).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalFoliation {
    pub kind: FoliationKind,
    pub change_of_basis: Mat2,
    pub inverse: Mat2,
}

impl CanonicalFoliation {
    pub fn to_canonical(&self, v: Point) -> Point {
        self.change_of_basis.apply(v)
    }

    pub fn from_canonical(&self, u: Point) -> Point {
        self.inverse.apply(u)
    }

    /// Leaf parameter of a target-plane point: first canonical coordinate
    /// (vertical) or polar angle in `[0, 2π)` (radial).
    pub fn leaf_coordinate(&self, v: Point) -> f64 {
        let u = self.to_canonical(v);
        match self.kind {
            FoliationKind::Vertical => u.x,
            FoliationKind::Radial => u.y.atan2(u.x).rem_euclid(TAU),
        }
    }

    /// Target-plane point on leaf `param` at position `s` along it.
    fn leaf_point(&self, param: f64, s: f64) -> Point {
        match self.kind {
            FoliationKind::Vertical => self.from_canonical(Point::new(param, s)),
            FoliationKind::Radial => {
                self.from_canonical(Point::new(s * param.cos(), s * param.sin()))
            }
        }
    }

    /// Distance of a target-plane point from leaf `param`.
    fn leaf_residual(&self, param: f64, v: Point) -> f64 {
        match self.kind {
            FoliationKind::Vertical => (self.to_canonical(v).x - param).abs(),
            FoliationKind::Radial => angle_between(self.leaf_coordinate(v), param),
        }
    }
}

/// Absolute angular difference wrapped to `[0, π]`.
pub fn angle_between(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

// Unit vector spanning the kernel of a rank-one matrix, sign-normalised so
// that its first non-negligible component is positive.
fn kernel_vector(m: &Mat2) -> Point {
    let r1 = Point::new(m.a11, m.a12);
    let r2 = Point::new(m.a21, m.a22);
    let r = if r1.norm() >= r2.norm() { r1 } else { r2 };
    let v = Point::new(-r.y, r.x).scale(1.0 / r.norm());
    let lead = if v.x.abs() > 1e-12 { v.x } else { v.y };
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

pub fn diagonalize_involution(l: &Mat2) -> Result<CanonicalFoliation, FoliationError> {
    if (*l - Mat2::IDENTITY).max_abs() <= LINEAR_TOL {
        return Err(FoliationError::IdentityInvolution);
    }
    if (*l + Mat2::IDENTITY).max_abs() <= LINEAR_TOL {
        return Ok(CanonicalFoliation {
            kind: FoliationKind::Radial,
            change_of_basis: Mat2::IDENTITY,
            inverse: Mat2::IDENTITY,
        });
    }
    if !is_linear_involution(l, LINEAR_TOL) {
        return Err(FoliationError::NotInvolution(*l));
    }
    let plus = kernel_vector(&(*l - Mat2::IDENTITY));
    let minus = kernel_vector(&(*l + Mat2::IDENTITY));
    let inverse = Mat2::from_columns(plus, minus);
    let change_of_basis = inverse
        .inverse()
        .map_err(|_| FoliationError::NotInvolution(*l))?;
    Ok(CanonicalFoliation {
        kind: FoliationKind::Vertical,
        change_of_basis,
        inverse,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub point: Point,
    pub iterations: usize,
}

/// Damped Newton solve of `h(p) = target` starting from `guess`.
pub fn invert_standard_map<M: PlaneMap>(
    h: &M,
    target: Point,
    guess: Point,
    tol: f64,
    max_iter: usize,
) -> Result<Inversion, FoliationError> {
    let mut p = guess;
    let mut r = h.evaluate(p)? - target;
    if r.norm() <= tol {
        return Ok(Inversion {
            point: p,
            iterations: 0,
        });
    }
    for it in 1..=max_iter {
        let jac = h.jacobian(p)?;
        let inv = jac
            .inverse()
            .map_err(|_| FoliationError::Singular { last: p })?;
        let step = -inv.apply(r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = p + step.scale(t);
            if let Ok(v) = h.evaluate(cand) {
                let rc = v - target;
                if rc.norm() < r.norm() {
                    accepted = Some((cand, rc));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, rc)) = accepted else {
            return Err(FoliationError::Diverged {
                last: p,
                residual: r.norm(),
            });
        };
        p = cand;
        r = rc;
        if r.norm() <= tol {
            return Ok(Inversion {
                point: p,
                iterations: it,
            });
        }
    }
    Err(FoliationError::Diverged {
        last: p,
        residual: r.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Nominal continuation step in the target plane.
    pub step: f64,
    /// Step halvings allowed before a leaf is truncated.
    pub max_halvings: u32,
    /// Inner radius of radial leaves.
    pub r0: f64,
    /// Inversion tolerance relative to `1 + ‖target‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Cap on points per marching direction.
    pub max_points: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: 1e-2,
            max_halvings: 10,
            r0: 1e-3,
            tol: 1e-12,
            max_iter: 50,
            max_points: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub parameter: f64,
    pub kind: FoliationKind,
    pub points: Vec<Point>,
    /// Leaf-equation residual at each point.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub truncated: bool,
    pub diagnostic: Option<String>,
}

/// Images of the window lattice in canonical coordinates, used to seed
/// leaves inside the window.
#[derive(Debug, Clone)]
pub struct LeafSeeds {
    nodes: Vec<Point>,
    canonical: Vec<Point>,
}

impl LeafSeeds {
    pub fn new<M: PlaneMap>(
        h: &M,
        fol: &CanonicalFoliation,
        region: &Region,
    ) -> Result<Self, EvalError> {
        let nodes = region.nodes();
        let canonical = par_map(&nodes, |&p| h.evaluate(p).map(|v| fol.to_canonical(v)))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LeafSeeds { nodes, canonical })
    }

    /// Range of the first canonical coordinate over the window.
    pub fn vertical_range(&self) -> (f64, f64) {
        self.canonical
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), u| {
                (lo.min(u.x), hi.max(u.x))
            })
    }

    // (guess, position along the leaf) for the lattice node closest to the leaf
    fn seed(&self, fol: &CanonicalFoliation, param: f64, r0: f64) -> Option<(Point, f64)> {
        let mut best: Option<(f64, usize)> = None;
        for (k, u) in self.canonical.iter().enumerate() {
            let score = match fol.kind {
                FoliationKind::Vertical => (u.x - param).abs(),
                FoliationKind::Radial => {
                    if u.norm() < r0 {
                        continue;
                    }
                    angle_between(u.y.atan2(u.x), param)
                }
            };
            if best.is_none_or(|(b, _)| score < b) {
                best = Some((score, k));
            }
        }
        best.map(|(_, k)| {
            let u = self.canonical[k];
            let s = match fol.kind {
                FoliationKind::Vertical => u.y,
                FoliationKind::Radial => u.norm(),
            };
            (self.nodes[k], s)
        })
    }
}

/// Trace the `h`-preimage of one canonical leaf inside `region`.
pub fn trace_leaf(
    h: &StandardMap,
    fol: &CanonicalFoliation,
    parameter: f64,
    region: &Region,
    opts: &TraceOptions,
) -> Result<Leaf, FoliationError> {
    let seeds = LeafSeeds::new(h, fol, region)?;
    Ok(trace_leaf_seeded(h, fol, parameter, region, opts, &seeds))
}

/// Trace several leaves sharing one lattice seeding pass.
pub fn trace_leaves(
    h: &StandardMap,
    fol: &CanonicalFoliation,
    parameters: &[f64],
    region: &Region,
    opts: &TraceOptions,
) -> Result<Vec<Leaf>, FoliationError> {
    let seeds = LeafSeeds::new(h, fol, region)?;
    Ok(par_map(parameters, |&c| {
        trace_leaf_seeded(h, fol, c, region, opts, &seeds)
    }))
}

/// Default leaf parameters: 24 equally spaced rays, or 21 vertical leaves at
/// the midpoints of 21 equal slices of the window's image.
pub fn default_parameters(
    fol: &CanonicalFoliation,
    seeds: &LeafSeeds,
    count: Option<usize>,
) -> Vec<f64> {
    match fol.kind {
        FoliationKind::Radial => {
            let k = count.unwrap_or(24).max(1);
            (0..k).map(|i| TAU * i as f64 / k as f64).collect()
        }
        FoliationKind::Vertical => {
            let k = count.unwrap_or(21).max(1);
            let (lo, hi) = seeds.vertical_range();
            (0..k)
                .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / k as f64)
                .collect()
        }
    }
}

struct Marcher<'a> {
    h: &'a StandardMap,
    fol: &'a CanonicalFoliation,
    parameter: f64,
    region: &'a Region,
    opts: &'a TraceOptions,
}

enum MarchEnd {
    LeftWindow,
    ReachedInnerRadius,
    PointLimit,
    Failed(FoliationError),
}

impl Marcher<'_> {
    fn invert(&self, s: f64, guess: Point) -> Result<Point, FoliationError> {
        let target = self.fol.leaf_point(self.parameter, s);
        let tol = self.opts.tol * (1.0 + target.norm());
        invert_standard_map(self.h, target, guess, tol, self.opts.max_iter).map(|inv| inv.point)
    }

    // March from (s0, p0) in direction `dir`, returning the new points.
    fn march(&self, s0: f64, p0: Point, dir: f64) -> (Vec<Point>, MarchEnd) {
        let radial = self.fol.kind == FoliationKind::Radial;
        let mut out = Vec::new();
        let (mut s, mut p) = (s0, p0);
        let mut prev: Option<(f64, Point)> = None;
        loop {
            if radial && dir < 0.0 && s <= self.opts.r0 {
                return (out, MarchEnd::ReachedInnerRadius);
            }
            if out.len() >= self.opts.max_points {
                return (out, MarchEnd::PointLimit);
            }
            let mut step = self.opts.step;
            let mut halvings = 0;
            let next = loop {
                let mut s_new = s + dir * step;
                if radial && dir < 0.0 {
                    s_new = s_new.max(self.opts.r0);
                }
                // secant predictor
                let guess = match prev {
                    Some((ps, pp)) if ps != s => p + (p - pp).scale((s_new - s) / (s - ps)),
                    _ => p,
                };
                let attempt = self.invert(s_new, guess).or_else(|_| self.invert(s_new, p));
                match attempt {
                    Ok(q) => break Ok((s_new, q)),
                    Err(e) if halvings >= self.opts.max_halvings => break Err(e),
                    Err(_) => {
                        step *= 0.5;
                        halvings += 1;
                    }
                }
            };
            match next {
                Ok((s_new, q)) => {
                    if !self.region.contains(q) {
                        return (out, MarchEnd::LeftWindow);
                    }
                    prev = Some((s, p));
                    s = s_new;
                    p = q;
                    out.push(q);
                }
                Err(e) => return (out, MarchEnd::Failed(e)),
            }
        }
    }
}

fn trace_leaf_seeded(
    h: &StandardMap,
    fol: &CanonicalFoliation,
    parameter: f64,
    region: &Region,
    opts: &TraceOptions,
    seeds: &LeafSeeds,
) -> Leaf {
    let mut leaf = Leaf {
        parameter,
        kind: fol.kind,
        points: Vec::new(),
        residuals: Vec::new(),
        max_residual: 0.0,
        truncated: false,
        diagnostic: None,
    };
    let marcher = Marcher {
        h,
        fol,
        parameter,
        region,
        opts,
    };

    // radial leaves start at r0 when the window contains the origin
    let start = if fol.kind == FoliationKind::Radial && region.contains(Point::ORIGIN) {
        Some((fol.leaf_point(parameter, opts.r0), opts.r0))
    } else {
        seeds.seed(fol, parameter, opts.r0)
    };
    let Some((guess, s0)) = start else {
        leaf.truncated = true;
        leaf.diagnostic = Some("no lattice node near this leaf".into());
        return leaf;
    };
    let p0 = match marcher.invert(s0, guess) {
        Ok(p) if region.contains(p) => p,
        Ok(p) => {
            leaf.truncated = true;
            leaf.diagnostic = Some(format!("leaf start {p} lies outside the window"));
            return leaf;
        }
        Err(e) => {
            leaf.truncated = true;
            leaf.diagnostic = Some(format!("could not start leaf: {e}"));
            return leaf;
        }
    };

    let (forward, end_fwd) = marcher.march(s0, p0, 1.0);
    let (backward, end_bwd) = if fol.kind == FoliationKind::Radial && s0 <= opts.r0 {
        (Vec::new(), MarchEnd::ReachedInnerRadius)
    } else {
        marcher.march(s0, p0, -1.0)
    };
    leaf.points = backward.into_iter().rev().collect();
    leaf.points.push(p0);
    leaf.points.extend(forward);

    let mut notes = Vec::new();
    for end in [end_bwd, end_fwd] {
        match end {
            MarchEnd::Failed(e) => {
                leaf.truncated = true;
                notes.push(format!("truncated: {e}"));
            }
            MarchEnd::PointLimit => {
                leaf.truncated = true;
                notes.push("truncated: point limit reached".to_string());
            }
            MarchEnd::LeftWindow | MarchEnd::ReachedInnerRadius => {}
        }
    }
    if !notes.is_empty() {
        leaf.diagnostic = Some(notes.join("; "));
    }

    for &p in &leaf.points {
        let r = match h.evaluate(p) {
            Ok(v) => fol.leaf_residual(parameter, v),
            Err(_) => f64::INFINITY,
        };
        leaf.residuals.push(r);
        leaf.max_residual = leaf.max_residual.max(r);
    }
    leaf
}

/// How far `φ` moves traced points off their leaf.
///
/// Vertical: `max |π₁(S·h(φ(q))) − π₁(S·h(q))|`. Radial: largest angle
/// between `h(φ(q))` and `−h(q)` over points with `‖h(q)‖ ≥ 1e-6`.
pub fn leaf_invariance_check<M: PlaneMap>(
    map: &M,
    h: &StandardMap,
    fol: &CanonicalFoliation,
    leaf: &Leaf,
) -> Result<f64, EvalError> {
    let mut worst = 0.0f64;
    for &q in &leaf.points {
        let hq = h.evaluate(q)?;
        let hphi = h.evaluate(map.evaluate(q)?)?;
        let r = match fol.kind {
            FoliationKind::Vertical => (fol.to_canonical(hphi).x - fol.to_canonical(hq).x).abs(),
            FoliationKind::Radial => {
                if hq.norm() < 1e-6 {
                    continue;
                }
                angle_between(
                    fol.leaf_coordinate(hphi),
                    (fol.leaf_coordinate(hq) + PI).rem_euclid(TAU),
                )
            }
        };
        worst = worst.max(r);
    }
    Ok(worst)
}
