//! The standard map `h = ½(I + Dφ(0)·φ)`, the auxiliary map
//! `g = Dφ(0) + φ` and their checks.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, PlanarMap, PlaneMap, Scalar};
use crate::involution::Region;
use crate::linalg2::{eigenvalues, Mat2, Point};
use crate::sampling::par_map;
use crate::spectral::ORIGIN_FIXED_TOL;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizeError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(
        "the origin is not fixed (|φ(0)| = {residual:e}); recenter the map at a fixed point first"
    )]
    OriginNotFixed { residual: f64 },
    #[error("spectrum-shift check needs Dφ(0) = -I, got {linear_part}")]
    NotApplicable { linear_part: Mat2 },
}

/// `h(p) = ½(p + A·φ(p))` with `A = Dφ(0)` frozen at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardMap {
    involution: PlanarMap,
    linear_part: Mat2,
}

/// Build the standard map of an involution fixing the origin.
pub fn standard_map(map: PlanarMap) -> Result<StandardMap, LinearizeError> {
    StandardMap::new(map)
}

impl StandardMap {
    pub fn new(map: PlanarMap) -> Result<Self, LinearizeError> {
        let (value, linear_part) = map.evaluate_with_jacobian(Point::ORIGIN)?;
        let residual = value.norm();
        if residual > ORIGIN_FIXED_TOL {
            return Err(LinearizeError::OriginNotFixed { residual });
        }
        Ok(StandardMap {
            involution: map,
            linear_part,
        })
    }

    /// Use an explicit linear part instead of `Dφ(0)`.
    pub fn with_linear_part(map: PlanarMap, linear_part: Mat2) -> Self {
        StandardMap {
            involution: map,
            linear_part,
        }
    }

    pub fn involution(&self) -> &PlanarMap {
        &self.involution
    }

    pub fn linear_part(&self) -> Mat2 {
        self.linear_part
    }

    pub fn auxiliary(&self) -> AuxiliaryMap<'_> {
        AuxiliaryMap { standard: self }
    }

    /// `Dh(p) = ½(I + A·Dφ(p))` assembled from the involution's Jacobian.
    pub fn jacobian_formula(&self, p: Point) -> Result<Mat2, EvalError> {
        let jac = self.involution.jacobian(p)?;
        Ok((Mat2::IDENTITY + self.linear_part * jac).scale(0.5))
    }
}

fn apply_const<S: Scalar>(a: &Mat2, [x, y]: [S; 2]) -> [S; 2] {
    let c = S::constant;
    [c(a.a11) * x + c(a.a12) * y, c(a.a21) * x + c(a.a22) * y]
}

impl PlaneMap for StandardMap {
    fn map_scalar<S: Scalar>(&self, p: [S; 2]) -> Result<[S; 2], crate::expr::EvalErrorKind> {
        let phi = self.involution.map_scalar(p)?;
        let [u, v] = apply_const(&self.linear_part, phi);
        let half = S::constant(0.5);
        Ok([half * (p[0] + u), half * (p[1] + v)])
    }
}

/// `g(p) = A·p + φ(p)`, so that `h = ½·A·g`.
#[derive(Debug, Clone, Copy)]
pub struct AuxiliaryMap<'a> {
    standard: &'a StandardMap,
}

impl PlaneMap for AuxiliaryMap<'_> {
    fn map_scalar<S: Scalar>(&self, p: [S; 2]) -> Result<[S; 2], crate::expr::EvalErrorKind> {
        let phi = self.standard.involution.map_scalar(p)?;
        let [u, v] = apply_const(&self.standard.linear_part, p);
        Ok([u + phi[0], v + phi[1]])
    }
}

/// `‖h(φ(p)) − A·h(p)‖ / (1 + ‖p‖)`.
pub fn conjugacy_residual(h: &StandardMap, p: Point) -> Result<f64, EvalError> {
    let phi = h.involution.evaluate(p)?;
    let lhs = h.evaluate(phi)?;
    let rhs = h.linear_part.apply(h.evaluate(p)?);
    Ok(lhs.dist(rhs) / (1.0 + p.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectivityStatus {
    NoCollisionFound,
    Collision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionWitness {
    pub p: Point,
    pub q: Point,
    pub image_p: Point,
    pub image_q: Point,
}

impl CollisionWitness {
    pub fn image_distance(&self) -> f64 {
        self.image_p.dist(self.image_q)
    }

    pub fn preimage_distance(&self) -> f64 {
        self.p.dist(self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectivityCertificate {
    pub status: InjectivityStatus,
    pub witness: Option<CollisionWitness>,
    /// Lattice points whose 3×3 cell neighbourhood was searched.
    pub cells_checked: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub scan_n: usize,
    pub collision_tol: f64,
    /// `None` means `1e-3 · diameter` of the scanned window.
    pub separation_min: Option<f64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            scan_n: 201,
            collision_tol: 1e-6,
            separation_min: None,
        }
    }
}

/// Look for two far-apart preimages with (nearly) equal images.
///
/// Images are hashed into square cells of side `collision_tol`; every pair
/// within `collision_tol` of each other lies in the same or adjacent cells.
/// Points are processed in order and the first qualifying pair is reported.
pub fn find_collision(
    points: &[Point],
    images: &[Point],
    collision_tol: f64,
    separation_min: f64,
) -> InjectivityCertificate {
    let cell = |v: Point| {
        (
            (v.x / collision_tol).floor() as i64,
            (v.y / collision_tol).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut checked = 0;
    for (k, (&p, &hp)) in points.iter().zip(images).enumerate() {
        let (cx, cy) = cell(hp);
        checked += 1;
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &other in bucket {
                    let (q, hq) = (points[other], images[other]);
                    if hp.dist(hq) <= collision_tol && p.dist(q) >= separation_min {
                        return InjectivityCertificate {
                            status: InjectivityStatus::Collision,
                            witness: Some(CollisionWitness {
                                p: q,
                                q: p,
                                image_p: hq,
                                image_q: hp,
                            }),
                            cells_checked: checked,
                        };
                    }
                }
            }
        }
        grid.entry((cx, cy)).or_default().push(k);
    }
    InjectivityCertificate {
        status: InjectivityStatus::NoCollisionFound,
        witness: None,
        cells_checked: checked,
    }
}

/// Evaluate `h` on a `scan_n × scan_n` lattice and search for collisions.
pub fn injectivity_scan<M: PlaneMap>(
    h: &M,
    region: &Region,
    opts: &ScanOptions,
) -> Result<InjectivityCertificate, LinearizeError> {
    let scan = region
        .with_grid(opts.scan_n.max(2))
        .expect("window already validated");
    let points = scan.nodes();
    let images = par_map(&points, |&p| h.evaluate(p))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let separation = opts.separation_min.unwrap_or(1e-3 * region.diameter());
    Ok(find_collision(
        &points,
        &images,
        opts.collision_tol,
        separation,
    ))
}

/// Largest set distance between `Spc(Dg(p))` and `Spc(Dφ(p)) − 1` on the
/// lattice, where `Dg(p) = Dφ(0) + Dφ(p)`. Requires `Dφ(0) = −I`.
pub fn spectrum_shift_check<M: PlaneMap>(map: &M, region: &Region) -> Result<f64, LinearizeError> {
    let a = map.jacobian(Point::ORIGIN)?;
    if (a + Mat2::IDENTITY).max_abs() > 1e-9 {
        return Err(LinearizeError::NotApplicable { linear_part: a });
    }
    let nodes = region.nodes();
    let devs = par_map(&nodes, |&p| {
        let jac = map.jacobian(p)?;
        let dg = a + jac;
        Ok::<_, EvalError>(eigenvalues(&dg).set_distance(&eigenvalues(&jac).shifted(-1.0)))
    });
    let mut worst = 0.0f64;
    for d in devs {
        worst = worst.max(d?);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianBounds {
    pub min_trace: f64,
    pub min_det: f64,
}

/// Minimum trace and determinant of `Dh` over the lattice.
pub fn theorem_b_jacobian_check(
    h: &StandardMap,
    region: &Region,
) -> Result<JacobianBounds, EvalError> {
    let nodes = region.nodes();
    let jacs = par_map(&nodes, |&p| h.jacobian(p));
    let mut bounds = JacobianBounds {
        min_trace: f64::INFINITY,
        min_det: f64::INFINITY,
    };
    for j in jacs {
        let j = j?;
        bounds.min_trace = bounds.min_trace.min(j.trace());
        bounds.min_det = bounds.min_det.min(j.det());
    }
    Ok(bounds)
}
