use involution_core::expr::{parse_expr, Expr, Func, PlanarMap, PlaneMap};
use involution_core::linalg2::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::X),
        Just(Expr::Y),
        (0.0f64..3.0).prop_map(|c| Expr::Const((c * 8.0).round() / 8.0)),
    ]
}

// Grammar trees without sqrt and abs, which are not differentiable everywhere.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Add(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Sub(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Mul(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Div(b(l), b(r))),
            (inner.clone(), 0u32..5).prop_map(move |(e, n)| Expr::Pow(b(e), n)),
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            (
                inner,
                prop_oneof![Just(Func::Sinh), Just(Func::Cosh), Just(Func::Asinh)]
            )
                .prop_map(move |(e, f)| Expr::Call(f, b(e))),
        ]
    })
}

fn any_expr() -> impl Strategy<Value = Expr> {
    let consts = prop_oneof![
        (-5.0f64..5.0).prop_map(Expr::Const),
        Just(Expr::Const(1e-300)),
        Just(Expr::Const(0.1))
    ];
    prop_oneof![leaf(), consts].prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Sub(b(l), b(r))),
            (inner.clone(), inner.clone()).prop_map(move |(l, r)| Expr::Div(b(l), b(r))),
            (inner.clone(), 0u32..7).prop_map(move |(e, n)| Expr::Pow(b(e), n)),
            inner.clone().prop_map(move |e| Expr::Neg(b(e))),
            (
                inner,
                prop_oneof![Just(Func::Sqrt), Just(Func::Abs), Just(Func::Sinh)]
            )
                .prop_map(move |(e, f)| Expr::Call(f, b(e))),
        ]
    })
}

fn points(seed: u64, count: usize, half: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = rng.gen_range(-half..half);
            let y = rng.gen_range(-half..half);
            Point::new(x, y)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn jacobian_matches_central_differences(f1 in smooth_expr(), f2 in smooth_expr(), seed in any::<u8>()) {
        let map = PlanarMap::from_exprs(f1, f2);
        let h = 1e-6;
        for p in points(seed as u64, 20, 10.0) {
            let stencil = [
                p,
                Point::new(p.x + h, p.y),
                Point::new(p.x - h, p.y),
                Point::new(p.x, p.y + h),
                Point::new(p.x, p.y - h),
            ];
            let values: Vec<_> = stencil.iter().map(|&q| map.evaluate(q)).collect();
            if values.iter().any(|v| v.as_ref().map_or(true, |v| v.x.abs() > 10.0 || v.y.abs() > 10.0)) {
                continue;
            }
            let v: Vec<Point> = values.into_iter().map(Result::unwrap).collect();
            let Ok(jac) = map.jacobian(p) else { continue };
            let fd = [
                (v[1].x - v[2].x) / (2.0 * h),
                (v[3].x - v[4].x) / (2.0 * h),
                (v[1].y - v[2].y) / (2.0 * h),
                (v[3].y - v[4].y) / (2.0 * h),
            ];
            let scale = jac.max_abs().max(1.0);
            for (a, b) in jac.entries().iter().zip(fd) {
                prop_assert!((a - b).abs() <= 1e-5 * scale, "{map} at {p}: {jac} vs {fd:?}");
            }
        }
    }

    #[test]
    fn printing_round_trips_bitwise(e in any_expr()) {
        let text = e.to_string();
        let back = parse_expr(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        for p in points(7, 1000, 10.0) {
            let a = e.eval(p.x, p.y);
            let b = back.eval(p.x, p.y);
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits(), "{} at {}", text, p),
                (Err(a), Err(b)) => prop_assert_eq!(a, b),
                (a, b) => prop_assert!(false, "{text} at {p}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn parser_never_panics(src in "[-+*/^(), xy0-9.a-z]{0,40}") {
        let _ = PlanarMap::parse(&src);
    }
}

#[test]
fn precedence_and_associativity() {
    let e = parse_expr("2^3^2").unwrap_err();
    assert!(e.offset() > 0);
    let e = parse_expr("1 - 2 - 3").unwrap();
    assert_eq!(e.eval(0.0, 0.0).unwrap(), -4.0);
    let e = parse_expr("8 / 4 / 2").unwrap();
    assert_eq!(e.eval(0.0, 0.0).unwrap(), 1.0);
    let e = parse_expr("x + y * 2^2").unwrap();
    assert_eq!(e.eval(1.0, 1.0).unwrap(), 5.0);
}
