use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};
use crate::jet::Jet2;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("unbound parameter `{0}`")]
    Unbound(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("undeclared symbol(s): {}", .0.join(", "))]
pub struct UndeclaredSymbols(pub Vec<String>);

/// Tolerance for treating a constant exponent as an integer.
const INTEGER_EXPONENT_TOL: f64 = 1e-12;

/// Check that every variable is `s1`, `s2` or a declared parameter.
/// All offending names are reported at once, sorted.
pub fn validate_symbols<S: AsRef<str>>(ast: &Expr, declared: &[S]) -> Result<(), UndeclaredSymbols> {
    let declared: BTreeSet<&str> = declared.iter().map(AsRef::as_ref).collect();
    let missing: Vec<String> = ast
        .symbols()
        .into_iter()
        .filter(|s| s != "s1" && s != "s2" && !declared.contains(s.as_str()))
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(UndeclaredSymbols(missing))
    }
}

/// Evaluate `ast` at `(s1, s2)` as a second-order jet.
pub fn eval_jet2<T: Real>(ast: &Expr, s1: T, s2: T, params: &BTreeMap<String, T>) -> Result<Jet2<T>, EvalError> {
    Evaluator { s1: Jet2::var1(s1), s2: Jet2::var2(s2), params }.eval(ast)
}

struct Evaluator<'a, T> {
    s1: Jet2<T>,
    s2: Jet2<T>,
    params: &'a BTreeMap<String, T>,
}

fn domain<T>(expr: &Expr, reason: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError::Domain { expr: expr.to_string(), reason: reason.into() })
}

fn is_constant<T: Real>(j: &Jet2<T>) -> bool {
    let z = T::zero();
    j.d1 == z && j.d2 == z && j.d11 == z && j.d12 == z && j.d22 == z
}

impl<T: Real> Evaluator<'_, T> {
    fn eval(&self, e: &Expr) -> Result<Jet2<T>, EvalError> {
        match e {
            Expr::Num(x) => Ok(Jet2::constant(T::lit(*x))),
            Expr::Pi => Ok(Jet2::constant(T::PI())),
            Expr::Var(name) => match name.as_str() {
                "s1" => Ok(self.s1),
                "s2" => Ok(self.s2),
                _ => self
                    .params
                    .get(name)
                    .map(|&p| Jet2::constant(p))
                    .ok_or_else(|| EvalError::Unbound(name.clone())),
            },
            Expr::Neg(a) => Ok(-self.eval(a)?),
            Expr::Bin(op, a, b) => {
                let x = self.eval(a)?;
                let y = self.eval(b)?;
                match op {
                    BinOp::Add => Ok(x + y),
                    BinOp::Sub => Ok(x - y),
                    BinOp::Mul => Ok(x * y),
                    BinOp::Div => {
                        if y.v == T::zero() {
                            return domain(e, "division by zero");
                        }
                        Ok(x / y)
                    }
                    BinOp::Pow => self.pow(e, x, y),
                }
            }
            Expr::Call(f, args) => {
                let x = self.eval(&args[0])?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Tan => {
                        if x.v.cos().abs() <= T::epsilon() {
                            return domain(e, "tan at an odd multiple of pi/2");
                        }
                        Ok(x.tan())
                    }
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                    Func::Tanh => Ok(x.tanh()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x.v <= T::zero() {
                            return domain(e, format!("log of non-positive value {}", x.v));
                        }
                        Ok(x.ln())
                    }
                    Func::Sqrt => {
                        if x.v < T::zero() {
                            return domain(e, format!("sqrt of negative value {}", x.v));
                        }
                        if x.v == T::zero() {
                            return domain(e, "sqrt is not differentiable at 0");
                        }
                        Ok(x.sqrt())
                    }
                    Func::Abs => {
                        if x.v == T::zero() {
                            return domain(e, "abs is not differentiable at 0");
                        }
                        Ok(x.abs())
                    }
                    Func::Atan2 => {
                        let xx = self.eval(&args[1])?;
                        if x.v == T::zero() && xx.v == T::zero() {
                            return domain(e, "atan2(0, 0)");
                        }
                        Ok(x.atan2(xx))
                    }
                }
            }
        }
    }

    fn pow(&self, e: &Expr, base: Jet2<T>, exp: Jet2<T>) -> Result<Jet2<T>, EvalError> {
        if is_constant(&exp) {
            let rounded = exp.v.round();
            if (exp.v - rounded).abs() < T::lit(INTEGER_EXPONENT_TOL) {
                let n = rounded.to_i32().ok_or_else(|| EvalError::Domain {
                    expr: e.to_string(),
                    reason: "integer exponent out of range".into(),
                })?;
                if n < 0 && base.v == T::zero() {
                    return domain(e, "zero raised to a negative power");
                }
                return Ok(base.powi(n));
            }
            if base.v <= T::zero() {
                return domain(e, format!("non-integer power of non-positive base {}", base.v));
            }
            return Ok(base.powf(exp.v));
        }
        if base.v <= T::zero() {
            return domain(e, format!("variable power of non-positive base {}", base.v));
        }
        Ok(base.pow(exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn ev(src: &str, s1: f64, s2: f64) -> Jet2<f64> {
        eval_jet2(&parse(src).unwrap(), s1, s2, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn spec_examples() {
        let j = ev("s1*s1", 3.0, 0.0);
        assert_eq!((j.v, j.d1, j.d2, j.d11, j.d12, j.d22), (9.0, 6.0, 0.0, 2.0, 0.0, 0.0));
        assert_eq!(ev("(2+1)*s2", 0.0, 5.0).v, 15.0);
        assert!((ev("sin(s1)^2 + cos(s1)^2", 0.7, 0.0).v - 1.0).abs() <= 1e-15);
        let j = ev("sin(s1)", 0.0, 0.0);
        assert_eq!((j.v, j.d1, j.d11), (0.0, 1.0, 0.0));
    }

    #[test]
    fn mixed_partial_of_exp_product_matches_finite_differences() {
        let f = |a: f64, b: f64| (a * b).exp();
        let (x, y, h) = (1.0, 2.0, 1e-5);
        let fd = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        let j = ev("exp(s1*s2)", x, y);
        assert!((j.d12 - fd).abs() / fd.abs() < 1e-6);
        assert!((j.d12 - 3.0 * 2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn parameters_bind_and_unbound_errors() {
        let ast = parse("R*cos(s1)").unwrap();
        let mut p = BTreeMap::new();
        assert_eq!(eval_jet2(&ast, 0.0, 0.0, &p), Err(EvalError::Unbound("R".into())));
        p.insert("R".to_string(), 2.0);
        assert_eq!(eval_jet2(&ast, 0.0, 0.0, &p).unwrap().v, 2.0);
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = eval_jet2(&parse("1 + log(s1 - 2)").unwrap(), 1.0, 0.0, &BTreeMap::new()).unwrap_err();
        match err {
            EvalError::Domain { expr, .. } => assert_eq!(expr, "log((s1 - 2.0))"),
            other => panic!("{other:?}"),
        }
        for src in ["sqrt(s1 - 3)", "1/(s1 - 1)", "(-s1)^0.5", "abs(s1 - 1)", "atan2(s1 - 1, s2)"] {
            assert!(matches!(
                eval_jet2(&parse(src).unwrap(), 1.0, 0.0, &BTreeMap::new()),
                Err(EvalError::Domain { .. })
            ), "{src}");
        }
    }

    #[test]
    fn integer_exponents_allow_negative_bases() {
        let j = ev("s1^3", -2.0, 0.0);
        assert_eq!((j.v, j.d1, j.d11), (-8.0, 12.0, -12.0));
        let j = ev("s1^(-2)", -2.0, 0.0);
        assert!((j.v - 0.25).abs() < 1e-15 && (j.d1 - 0.25).abs() < 1e-15);
        // exponent that is an integer only up to rounding
        let j = ev("s1^(0.1*30)", -2.0, 0.0);
        assert!((j.v + 8.0).abs() < 1e-14);
    }

    #[test]
    fn validate_symbols_lists_everything() {
        let ast = parse("s1+R").unwrap();
        assert!(validate_symbols(&ast, &["R"]).is_ok());
        assert_eq!(validate_symbols::<&str>(&ast, &[]), Err(UndeclaredSymbols(vec!["R".into()])));
        assert_eq!(
            validate_symbols::<&str>(&parse("s3").unwrap(), &[]),
            Err(UndeclaredSymbols(vec!["s3".into()]))
        );
        let err = validate_symbols::<&str>(&parse("a*s1 + b + a").unwrap(), &[]).unwrap_err();
        assert_eq!(err.0, vec!["a".to_string(), "b".to_string()]);
        assert!(err.to_string().contains("a, b"));
    }
}
