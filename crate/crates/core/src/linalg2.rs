//! Real 2×2 matrices, points of the plane and closed-form eigenvalues.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest |det| accepted by [`Mat2::inverse`].
pub const SINGULAR_DET: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, c: f64) -> Point {
        Point::new(c * self.x, c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("matrix is singular (det = {det:e})")]
pub struct SingularMatrix {
    pub det: f64,
}

/// A real 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    /// Matrix whose columns are `c1` and `c2`.
    pub fn from_columns(c1: Point, c2: Point) -> Self {
        Mat2::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn multiply(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * rhs.a11 + self.a12 * rhs.a21,
            self.a11 * rhs.a12 + self.a12 * rhs.a22,
            self.a21 * rhs.a11 + self.a22 * rhs.a21,
            self.a21 * rhs.a12 + self.a22 * rhs.a22,
        )
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + rhs.a11,
            self.a12 + rhs.a12,
            self.a21 + rhs.a21,
            self.a22 + rhs.a22,
        )
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 - rhs.a11,
            self.a12 - rhs.a12,
            self.a21 - rhs.a21,
            self.a22 - rhs.a22,
        )
    }

    pub fn scale(&self, c: f64) -> Mat2 {
        Mat2::new(c * self.a11, c * self.a12, c * self.a21, c * self.a22)
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.a11 * p.x + self.a12 * p.y,
            self.a21 * p.x + self.a22 * p.y,
        )
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn inverse(&self) -> Result<Mat2, SingularMatrix> {
        let det = self.det();
        if det.is_nan() || det.abs() <= SINGULAR_DET {
            return Err(SingularMatrix { det });
        }
        let inv = 1.0 / det;
        Ok(Mat2::new(
            self.a22 * inv,
            -self.a12 * inv,
            -self.a21 * inv,
            self.a11 * inv,
        ))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.is_finite())
    }

    /// Both roots of the characteristic polynomial, "−" branch first.
    pub fn eigenvalues(&self) -> Spectrum {
        eigenvalues(self)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        self.multiply(&rhs)
    }
}

impl Mul<Point> for Mat2 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        self.apply(rhs)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::add(&self, &rhs)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::sub(&self, &rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

/// `true` iff every entry of `A·A − I` is at most `tol` in magnitude.
pub fn is_linear_involution(a: &Mat2, tol: f64) -> bool {
    (a.multiply(a) - Mat2::IDENTITY).max_abs() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn dist(self, other: Complex) -> f64 {
        (self.re - other.re).hypot(self.im - other.im)
    }

    pub fn is_real(self) -> bool {
        self.im == 0.0
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0.0 {
            write!(f, "{}", self.re)
        } else if self.im < 0.0 {
            write!(f, "{} - {}i", self.re, -self.im)
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

/// The two eigenvalues of a 2×2 matrix.
///
/// `lambda1` comes from the `−` branch of the quadratic formula and `lambda2`
/// from the `+` branch. When the discriminant is non-negative both values
/// carry an imaginary part of exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda1: Complex,
    pub lambda2: Complex,
}

impl Spectrum {
    pub fn is_real(&self) -> bool {
        self.lambda1.is_real() && self.lambda2.is_real()
    }

    pub fn values(&self) -> [Complex; 2] {
        [self.lambda1, self.lambda2]
    }

    /// Shift both eigenvalues by a real constant.
    pub fn shifted(&self, by: f64) -> Spectrum {
        Spectrum {
            lambda1: Complex::new(self.lambda1.re + by, self.lambda1.im),
            lambda2: Complex::new(self.lambda2.re + by, self.lambda2.im),
        }
    }

    /// Distance between two spectra viewed as unordered pairs: the better of
    /// the two pairings, each scored by its worst eigenvalue distance.
    pub fn set_distance(&self, other: &Spectrum) -> f64 {
        let straight = self
            .lambda1
            .dist(other.lambda1)
            .max(self.lambda2.dist(other.lambda2));
        let crossed = self
            .lambda1
            .dist(other.lambda2)
            .max(self.lambda2.dist(other.lambda1));
        straight.min(crossed)
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lambda1, self.lambda2)
    }
}

/// Closed-form eigenvalues `(trace ± sqrt(trace² − 4 det)) / 2`.
///
/// The discriminant is evaluated as `(a11 − a22)² + 4·a12·a21`, which equals
/// `trace² − 4 det` but does not cancel catastrophically for clustered
/// eigenvalues. A discriminant whose magnitude is below the rounding noise of
/// the entries is treated as zero (a repeated real root). The real branch
/// computes the larger-magnitude root directly and recovers the other from
/// `det`, so neither root suffers cancellation.
pub fn eigenvalues(m: &Mat2) -> Spectrum {
    let trace = m.trace();
    let det = m.det();
    let gap = m.a11 - m.a22;
    let cross = 4.0 * m.a12 * m.a21;
    let mut disc = gap * gap + cross;

    let mag = m.a11.abs() + m.a22.abs();
    let noise = 16.0 * f64::EPSILON * (mag * mag + cross.abs());
    if disc.abs() <= noise {
        disc = 0.0;
    }

    if disc >= 0.0 {
        let root = disc.sqrt();
        let (lambda1, lambda2) = if disc == 0.0 {
            (0.5 * trace, 0.5 * trace)
        } else if trace >= 0.0 {
            let big = 0.5 * (trace + root);
            (det / big, big)
        } else {
            let big = 0.5 * (trace - root);
            (big, det / big)
        };
        Spectrum {
            lambda1: Complex::real(lambda1),
            lambda2: Complex::real(lambda2),
        }
    } else {
        let half_im = 0.5 * (-disc).sqrt();
        let re = 0.5 * trace;
        Spectrum {
            lambda1: Complex::new(re, -half_im),
            lambda2: Complex::new(re, half_im),
        }
    }
}
