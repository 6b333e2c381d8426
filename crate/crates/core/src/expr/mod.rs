//! Planar maps given as expression pairs or built-in native maps, evaluated
//! either on plain floats or with exact first-order derivative propagation.

mod ast;
mod dual;
mod parser;

use std::fmt;

use thiserror::Error;

pub use ast::{Expr, Func};
pub use dual::{Dual, Scalar};
pub use parser::{parse_expr, parse_pair, ParseError};

use crate::gallery::BumpRotation;
use crate::linalg2::{Mat2, Point};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalErrorKind {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} argument {arg} outside its domain")]
    Domain { func: &'static str, arg: f64 },
    #[error("non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{kind} while evaluating at {point}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub point: Point,
}

/// A map of the plane that can be evaluated on any [`Scalar`].
///
/// Implementors only provide [`PlaneMap::map_scalar`]; plain evaluation and
/// Jacobians follow from it.
pub trait PlaneMap: Sync {
    fn map_scalar<S: Scalar>(&self, p: [S; 2]) -> Result<[S; 2], EvalErrorKind>;

    fn evaluate(&self, p: Point) -> Result<Point, EvalError> {
        let [x, y] = self
            .map_scalar([p.x, p.y])
            .map_err(|kind| EvalError { kind, point: p })?;
        let out = Point::new(x, y);
        if !out.is_finite() {
            return Err(EvalError {
                kind: EvalErrorKind::NonFinite,
                point: p,
            });
        }
        Ok(out)
    }

    /// Value and Jacobian `[[∂f1/∂x, ∂f1/∂y], [∂f2/∂x, ∂f2/∂y]]`.
    fn evaluate_with_jacobian(&self, p: Point) -> Result<(Point, Mat2), EvalError> {
        let [f1, f2] = self
            .map_scalar([Dual::var_x(p.x), Dual::var_y(p.y)])
            .map_err(|kind| EvalError { kind, point: p })?;
        let value = Point::new(f1.value, f2.value);
        let jac = Mat2::new(f1.dx, f1.dy, f2.dx, f2.dy);
        if !value.is_finite() || !jac.is_finite() {
            return Err(EvalError {
                kind: EvalErrorKind::NonFinite,
                point: p,
            });
        }
        Ok((value, jac))
    }

    fn jacobian(&self, p: Point) -> Result<Mat2, EvalError> {
        self.evaluate_with_jacobian(p).map(|(_, j)| j)
    }
}

impl<M: PlaneMap> PlaneMap for &M {
    fn map_scalar<S: Scalar>(&self, p: [S; 2]) -> Result<[S; 2], EvalErrorKind> {
        (**self).map_scalar(p)
    }
}

/// Built-in maps that are not expressible in the expression grammar.
#[derive(Debug, Clone, PartialEq)]
pub enum NativeMap {
    BumpRotation(BumpRotation),
}

impl NativeMap {
    pub fn name(&self) -> &'static str {
        match self {
            NativeMap::BumpRotation(_) => "bump-rotation",
        }
    }

    fn map_scalar<S: Scalar>(&self, p: [S; 2]) -> Result<[S; 2], EvalErrorKind> {
        match self {
            NativeMap::BumpRotation(c) => Ok(c.apply(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Expression { first: Expr, second: Expr },
    Native(NativeMap),
}

/// A differentiable map ℝ² → ℝ².
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMap {
    source: MapSource,
}

impl PlanarMap {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let (first, second) = parse_pair(src)?;
        Ok(PlanarMap::from_exprs(first, second))
    }

    pub fn from_exprs(first: Expr, second: Expr) -> Self {
        PlanarMap {
            source: MapSource::Expression { first, second },
        }
    }

    pub fn native(map: NativeMap) -> Self {
        PlanarMap {
            source: MapSource::Native(map),
        }
    }

    pub fn source(&self) -> &MapSource {
        &self.source
    }

    pub fn is_expression(&self) -> bool {
        matches!(self.source, MapSource::Expression { .. })
    }

    /// Conjugate by the translation to `center`: `p ↦ φ(p + c) − c`.
    ///
    /// Only expression-backed maps can be recentered; the result is again an
    /// expression with `x`, `y` substituted by `x + cx`, `y + cy`.
    pub fn recentered(&self, center: Point) -> Option<PlanarMap> {
        let MapSource::Expression { first, second } = &self.source else {
            return None;
        };
        // constants stay non-negative so the printed form re-parses to the same tree
        let offset = |v: Expr, c: f64| {
            if c > 0.0 {
                Expr::Add(Box::new(v), Box::new(Expr::Const(c)))
            } else if c < 0.0 {
                Expr::Sub(Box::new(v), Box::new(Expr::Const(-c)))
            } else {
                v
            }
        };
        let sx = offset(Expr::X, center.x);
        let sy = offset(Expr::Y, center.y);
        Some(PlanarMap::from_exprs(
            offset(first.substitute(&sx, &sy), -center.x),
            offset(second.substitute(&sx, &sy), -center.y),
        ))
    }
}

impl PlaneMap for PlanarMap {
    fn map_scalar<S: Scalar>(&self, [x, y]: [S; 2]) -> Result<[S; 2], EvalErrorKind> {
        match &self.source {
            MapSource::Expression { first, second } => Ok([first.eval(x, y)?, second.eval(x, y)?]),
            MapSource::Native(native) => native.map_scalar([x, y]),
        }
    }
}

impl fmt::Display for PlanarMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            MapSource::Expression { first, second } => write!(f, "({first}, {second})"),
            MapSource::Native(n) => write!(f, "native:{}", n.name()),
        }
    }
}

/// Parse a map; shorthand for [`PlanarMap::parse`].
pub fn parse(src: &str) -> Result<PlanarMap, ParseError> {
    PlanarMap::parse(src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_entry_a1() {
        let m = parse("(x - y^3, -y)").unwrap();
        assert_eq!(
            m.evaluate(Point::new(1.0, 2.0)).unwrap(),
            Point::new(-7.0, -2.0)
        );
        let (v, j) = m.evaluate_with_jacobian(Point::ORIGIN).unwrap();
        assert_eq!(v, Point::ORIGIN);
        assert_eq!(j, Mat2::diag(1.0, -1.0));
    }

    #[test]
    fn identity_map() {
        let m = parse("(x, y)").unwrap();
        let p = Point::new(3.5, -1.0);
        assert_eq!(m.evaluate(p).unwrap(), p);
        assert_eq!(m.jacobian(Point::new(-8.0, 2.0)).unwrap(), Mat2::IDENTITY);
    }

    #[test]
    fn entry_b_at_origin() {
        let m = parse("(asinh((sinh(x) + sinh(y))/2), asinh((3*sinh(x) - sinh(y))/2))").unwrap();
        assert_eq!(m.evaluate(Point::ORIGIN).unwrap(), Point::ORIGIN);
    }

    #[test]
    fn jacobian_of_entry_a2_matches_finite_differences() {
        let m = parse("(-x + y^2, -y)").unwrap();
        let p = Point::new(0.0, 2.0);
        let j = m.jacobian(p).unwrap();
        assert_eq!(j, Mat2::new(-1.0, 4.0, 0.0, -1.0));
        let h = 1e-6;
        let fx = (m.evaluate(Point::new(h, 2.0)).unwrap()
            - m.evaluate(Point::new(-h, 2.0)).unwrap())
        .scale(0.5 / h);
        let fy = (m.evaluate(Point::new(0.0, 2.0 + h)).unwrap()
            - m.evaluate(Point::new(0.0, 2.0 - h)).unwrap())
        .scale(0.5 / h);
        let fd = Mat2::from_columns(fx, fy);
        for (a, b) in j.entries().iter().zip(fd.entries()) {
            assert!((a - b).abs() <= (1e-5 * b.abs()).max(1e-8), "{j} vs {fd}");
        }
    }

    #[test]
    fn division_by_zero_reports_point() {
        let m = parse("(1 / x, y)").unwrap();
        let err = m.evaluate(Point::new(0.0, 4.0)).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::DivisionByZero);
        assert_eq!(err.point, Point::new(0.0, 4.0));
        assert!(m.evaluate_with_jacobian(Point::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn sqrt_of_negative_is_a_domain_error() {
        let m = parse("(sqrt(x), y)").unwrap();
        assert!(matches!(
            m.evaluate(Point::new(-1.0, 0.0)).unwrap_err().kind,
            EvalErrorKind::Domain { func: "sqrt", .. }
        ));
    }

    #[test]
    fn recentering_moves_fixed_point_to_origin() {
        let m = parse("(-x + 1, -y - 1)").unwrap();
        let c = Point::new(0.5, -0.5);
        assert_eq!(m.evaluate(c).unwrap(), c);
        let r = m.recentered(c).unwrap();
        assert_eq!(r.evaluate(Point::ORIGIN).unwrap(), Point::ORIGIN);
        assert_eq!(r.jacobian(Point::ORIGIN).unwrap(), -Mat2::IDENTITY);
        // recentered maps print and re-parse
        let again = parse(&r.to_string()).unwrap();
        assert_eq!(again, r);
    }
}
