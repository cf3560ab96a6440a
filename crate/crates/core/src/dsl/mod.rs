//! Coordinate-expression language for user-defined surfaces.
//!
//! Expressions are ordinary infix formulas in `s1`, `s2` and named parameters,
//! e.g. `(R + r*cos(s2))*cos(s1)`. They are evaluated over [`Jet2`] so every
//! embedding comes with exact first and second partials.
//!
//! [`Jet2`]: crate::jet::Jet2

mod ast;
mod eval;
mod parser;

pub use ast::{BinOp, Expr, Func};
pub use eval::{eval_jet2, validate_symbols, EvalError, UndeclaredSymbols};
pub use parser::{parse, ParseError};

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            Just(Expr::Var("s1".into())),
            Just(Expr::Var("s2".into())),
            (0.1f64..2.0).prop_map(Expr::Num),
        ]
    }

    /// Expression trees that stay smooth and in-domain near (±1, ±1).
    fn safe_tree() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Add, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Sub, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(BinOp::Mul, a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::bin(
                    BinOp::Div,
                    a,
                    Expr::bin(BinOp::Add, Expr::Num(2.0), Expr::Call(Func::Sin, vec![b]))
                )),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, vec![a])),
                inner.clone().prop_map(|a| Expr::Call(Func::Cos, vec![a])),
                inner.clone().prop_map(|a| Expr::Call(Func::Tanh, vec![a])),
                inner.clone().prop_map(|a| Expr::Call(Func::Exp, vec![Expr::Call(Func::Sin, vec![a])])),
                inner.clone().prop_map(|a| Expr::Call(
                    Func::Sqrt,
                    vec![Expr::bin(BinOp::Add, Expr::Num(1.0), Expr::bin(BinOp::Mul, a.clone(), a))]
                )),
                inner.clone().prop_map(|a| Expr::Call(
                    Func::Log,
                    vec![Expr::bin(BinOp::Add, Expr::Num(2.0), Expr::Call(Func::Cos, vec![a]))]
                )),
                inner.clone().prop_map(|a| Expr::bin(BinOp::Pow, a, Expr::Num(2.0))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(
                    Func::Atan2,
                    vec![a, Expr::bin(BinOp::Add, Expr::Num(3.0), Expr::Call(Func::Cos, vec![b]))]
                )),
            ]
        })
    }

    fn any_tree() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            "[a-z][a-z0-9_]{0,4}".prop_filter("not a reserved word", |s| s != "pi" && Func::from_name(s).is_none())
                .prop_map(Expr::Var),
            Just(Expr::Pi),
            (0.0f64..1e6).prop_map(Expr::Num),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (
                    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::bin(op, a, b)),
                (0usize..10, inner.clone()).prop_map(|(i, a)| Expr::Call(Func::ALL[i], vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Atan2, vec![a, b])),
            ]
        })
    }

    fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * scale
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn jets_match_central_differences(
            tree in safe_tree(),
            s1 in -1.0f64..1.0,
            s2 in -1.0f64..1.0,
        ) {
            let none = BTreeMap::new();
            let f = |a: f64, b: f64| eval_jet2(&tree, a, b, &none).unwrap().v;
            let j = eval_jet2(&tree, s1, s2, &none).unwrap();
            let h = 1e-5 * s1.abs().max(s2.abs()).max(1.0);
            let f0 = f(s1, s2);
            let d1 = (f(s1 + h, s2) - f(s1 - h, s2)) / (2.0 * h);
            let d2 = (f(s1, s2 + h) - f(s1, s2 - h)) / (2.0 * h);
            let d11 = (f(s1 + h, s2) - 2.0 * f0 + f(s1 - h, s2)) / (h * h);
            let d22 = (f(s1, s2 + h) - 2.0 * f0 + f(s1, s2 - h)) / (h * h);
            let d12 = (f(s1 + h, s2 + h) - f(s1 + h, s2 - h) - f(s1 - h, s2 + h) + f(s1 - h, s2 - h))
                / (4.0 * h * h);
            let scale = 1.0 + f0.abs() + j.d1.abs() + j.d2.abs() + j.d11.abs() + j.d12.abs() + j.d22.abs();
            prop_assert_eq!(j.v, f0);
            prop_assert!(close(j.d1, d1, scale, 1e-5), "d1 {} vs {} in {}", j.d1, d1, tree);
            prop_assert!(close(j.d2, d2, scale, 1e-5), "d2 {} vs {} in {}", j.d2, d2, tree);
            prop_assert!(close(j.d11, d11, scale, 1e-5), "d11 {} vs {} in {}", j.d11, d11, tree);
            prop_assert!(close(j.d12, d12, scale, 1e-5), "d12 {} vs {} in {}", j.d12, d12, tree);
            prop_assert!(close(j.d22, d22, scale, 1e-5), "d22 {} vs {} in {}", j.d22, d22, tree);
        }

        #[test]
        fn serialize_then_parse_is_identity(tree in any_tree()) {
            let text = tree.to_string();
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &tree);
            prop_assert_eq!(parse(&back.to_string()).unwrap(), back);
        }
    }
}
