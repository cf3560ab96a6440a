//! Second-order forward-mode jets in two variables.
//!
//! A [`Jet2`] carries the value of a scalar field together with its first and
//! second partial derivatives with respect to `(s1, s2)`. Arithmetic is the
//! truncated second-order Taylor algebra, so composing jets yields exact
//! derivatives (up to rounding) without finite differences.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d11: T,
    /// Mixed partial; symmetry of mixed partials is structural.
    pub d12: T,
    pub d22: T,
}

impl<T: Real> Jet2<T> {
    pub fn new(v: T, d1: T, d2: T, d11: T, d12: T, d22: T) -> Self {
        Self { v, d1, d2, d11, d12, d22 }
    }

    pub fn constant(v: T) -> Self {
        Self { v, ..Self::zero() }
    }

    pub fn zero() -> Self {
        let z = T::zero();
        Self { v: z, d1: z, d2: z, d11: z, d12: z, d22: z }
    }

    /// Seed for the first coordinate: `(v, 1, 0, 0, 0, 0)`.
    pub fn var1(v: T) -> Self {
        Self { v, d1: T::one(), ..Self::zero() }
    }

    /// Seed for the second coordinate: `(v, 0, 1, 0, 0, 0)`.
    pub fn var2(v: T) -> Self {
        Self { v, d2: T::one(), ..Self::zero() }
    }

    /// Gradient `(d1, d2)`.
    pub fn grad(&self) -> [T; 2] {
        [self.d1, self.d2]
    }

    /// Hessian as a symmetric 2×2 array.
    pub fn hessian(&self) -> [[T; 2]; 2] {
        [[self.d11, self.d12], [self.d12, self.d22]]
    }

    pub fn scale(self, c: T) -> Self {
        Self {
            v: self.v * c,
            d1: self.d1 * c,
            d2: self.d2 * c,
            d11: self.d11 * c,
            d12: self.d12 * c,
            d22: self.d22 * c,
        }
    }

    /// Composition `g ∘ self` for a scalar function with value `g0`,
    /// derivative `g1` and second derivative `g2` at `self.v`.
    pub fn chain(self, g0: T, g1: T, g2: T) -> Self {
        Self {
            v: g0,
            d1: g1 * self.d1,
            d2: g1 * self.d2,
            d11: g2 * self.d1 * self.d1 + g1 * self.d11,
            d12: g2 * self.d1 * self.d2 + g1 * self.d12,
            d22: g2 * self.d2 * self.d2 + g1 * self.d22,
        }
    }

    pub fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -r * r, T::two() * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let sec2 = T::one() + t * t;
        self.chain(t, sec2, T::two() * t * sec2)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let t = self.v.tanh();
        let sech2 = T::one() - t * t;
        self.chain(t, sech2, -T::two() * t * sech2)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Natural log; caller guarantees `v > 0`.
    pub fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -r * r)
    }

    /// Square root; caller guarantees `v > 0`.
    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let g1 = T::half() / s;
        self.chain(s, g1, -g1 / (T::two() * self.v))
    }

    /// Absolute value; caller guarantees `v != 0`.
    pub fn abs(self) -> Self {
        if self.v < T::zero() {
            -self
        } else {
            self
        }
    }

    /// Integer power by repeated squaring of jets.
    pub fn powi(self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Self::constant(T::one());
        let mut base = self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Real power `self^e` for constant `e`; caller guarantees `v > 0`.
    pub fn powf(self, e: T) -> Self {
        let p = self.v.powf(e);
        let g1 = e * p / self.v;
        let g2 = e * (e - T::one()) * p / (self.v * self.v);
        self.chain(p, g1, g2)
    }

    /// General power with a jet exponent, `exp(e · ln self)`; caller guarantees `v > 0`.
    pub fn pow(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }

    /// Two-argument arctangent `atan2(self, x)`; caller guarantees `(self.v, x.v) != 0`.
    pub fn atan2(self, x: Self) -> Self {
        let y = self;
        let r2 = y.v * y.v + x.v * x.v;
        let r4 = r2 * r2;
        // partials of θ(y, x)
        let ty = x.v / r2;
        let tx = -y.v / r2;
        let tyy = -T::two() * x.v * y.v / r4;
        let txx = T::two() * x.v * y.v / r4;
        let txy = (y.v * y.v - x.v * x.v) / r4;
        let second = |yi: T, yj: T, xi: T, xj: T| {
            tyy * yi * yj + txy * (yi * xj + xi * yj) + txx * xi * xj
        };
        Self {
            v: y.v.atan2(x.v),
            d1: ty * y.d1 + tx * x.d1,
            d2: ty * y.d2 + tx * x.d2,
            d11: second(y.d1, y.d1, x.d1, x.d1) + ty * y.d11 + tx * x.d11,
            d12: second(y.d1, y.d2, x.d1, x.d2) + ty * y.d12 + tx * x.d12,
            d22: second(y.d2, y.d2, x.d2, x.d2) + ty * y.d22 + tx * x.d22,
        }
    }
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d11: self.d11 + o.d11,
            d12: self.d12 + o.d12,
            d22: self.d22 + o.d22,
        }
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
            d11: -self.d11,
            d12: -self.d12,
            d22: -self.d22,
        }
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, g: Self) -> Self {
        let f = self;
        Self {
            v: f.v * g.v,
            d1: f.d1 * g.v + f.v * g.d1,
            d2: f.d2 * g.v + f.v * g.d2,
            d11: f.d11 * g.v + T::two() * f.d1 * g.d1 + f.v * g.d11,
            d12: f.d12 * g.v + f.d1 * g.d2 + f.d2 * g.d1 + f.v * g.d12,
            d22: f.d22 * g.v + T::two() * f.d2 * g.d2 + f.v * g.d22,
        }
    }
}

impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    fn div(self, g: Self) -> Self {
        self * g.recip()
    }
}

impl<T: Real> Add<T> for Jet2<T> {
    type Output = Self;
    fn add(mut self, c: T) -> Self {
        self.v = self.v + c;
        self
    }
}

impl<T: Real> Mul<T> for Jet2<T> {
    type Output = Self;
    fn mul(self, c: T) -> Self {
        self.scale(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type J = Jet2<f64>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    fn jets_close(a: J, b: J, tol: f64) -> bool {
        close(a.v, b.v, tol)
            && close(a.d1, b.d1, tol)
            && close(a.d2, b.d2, tol)
            && close(a.d11, b.d11, tol)
            && close(a.d12, b.d12, tol)
            && close(a.d22, b.d22, tol)
    }

    fn arb_jet() -> impl Strategy<Value = J> {
        prop::array::uniform6(-3.0f64..3.0).prop_map(|a| J::new(a[0], a[1], a[2], a[3], a[4], a[5]))
    }

    #[test]
    fn polynomial_square() {
        let x = J::var1(3.0);
        let y = x * x;
        assert_eq!((y.v, y.d1, y.d2, y.d11, y.d12, y.d22), (9.0, 6.0, 0.0, 2.0, 0.0, 0.0));
    }

    #[test]
    fn sin_at_origin() {
        let y = J::var1(0.0).sin();
        assert_eq!((y.v, y.d1, y.d11), (0.0, 1.0, 0.0));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = J::new(1.3, 0.4, -0.2, 0.1, 0.7, -0.5);
        assert!(jets_close(x.powi(3), x * x * x, 1e-15));
        assert!(jets_close(x.powi(-2), (x * x).recip(), 1e-14));
        assert_eq!(x.powi(0), J::constant(1.0));
    }

    proptest! {
        // (fg).d12 = f.d12 g + f.d1 g.d2 + f.d2 g.d1 + f g.d12, and the rest of the Leibniz rule
        #[test]
        fn product_rule_slots(f in arb_jet(), g in arb_jet()) {
            let p = f * g;
            prop_assert!(close(p.d12, f.d12 * g.v + f.d1 * g.d2 + f.d2 * g.d1 + f.v * g.d12, 1e-14));
            prop_assert!(close(p.d11, f.d11 * g.v + 2.0 * f.d1 * g.d1 + f.v * g.d11, 1e-14));
            prop_assert!(close(p.d2, f.d2 * g.v + f.v * g.d2, 1e-14));
        }

        #[test]
        fn chain_rule_composes(f in arb_jet()) {
            // exp(sin f) by the chain rule applied once with the composed derivatives
            let s = f.v.sin();
            let c = f.v.cos();
            let e = s.exp();
            let g1 = e * c;
            let g2 = e * (c * c - s);
            prop_assert!(jets_close(f.sin().exp(), f.chain(e, g1, g2), 1e-13));
        }

        #[test]
        fn quotient_inverts_product(f in arb_jet(), g in arb_jet()) {
            prop_assume!(g.v.abs() > 0.5);
            prop_assert!(jets_close((f * g) / g, f, 1e-10));
        }

        #[test]
        fn sqrt_squares_back(f in arb_jet()) {
            prop_assume!(f.v > 0.2);
            let x = J::new(f.v, f.d1, f.d2, f.d11, f.d12, f.d22);
            let r = x.sqrt();
            prop_assert!(jets_close(r * r, x, 1e-11));
        }

        #[test]
        fn atan2_recovers_angle_derivatives(t in arb_jet(), r in 0.5f64..2.0) {
            // atan2(r sin t, r cos t) = t for |t.v| < π
            prop_assume!(t.v.abs() < 3.0);
            let y = t.sin() * r;
            let x = t.cos() * r;
            prop_assert!(jets_close(y.atan2(x), t, 1e-12));
        }
    }
}
