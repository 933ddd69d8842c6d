use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{Coordinate, Monomial, Poly, Rational};
use crate::error::{Error, Result};

/// A rational function over ℚ in jet, independent and fiber coordinates,
/// stored in canonical form.
///
/// The numerator and denominator are coprime and the denominator is monic
/// (leading coefficient 1 in graded-lex order). Differential polynomials
/// have denominator 1. Because the form is canonical, structural equality is
/// equality of functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetExpr {
    num: Poly,
    den: Poly,
}

impl Default for JetExpr {
    fn default() -> Self {
        Self::zero()
    }
}

impl JetExpr {
    pub fn zero() -> Self {
        JetExpr {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        Poly::constant(q).into()
    }

    pub fn integer(n: i64) -> Self {
        Poly::integer(n).into()
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Self::constant(Rational::new(p.into(), q.into()))
    }

    pub fn var(c: Coordinate) -> Self {
        Poly::var(c).into()
    }

    /// `num / den`, reduced to canonical form.
    pub fn from_parts(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::canonical(num, den))
    }

    fn canonical(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(q) = den.as_constant() {
            let q = q.recip();
            return JetExpr {
                num: num.scale(&q),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coefficient().recip();
        let den = den.scale(&lc);
        let num = num.scale(&lc);
        if den.is_one() {
            JetExpr { num, den: Poly::one() }
        } else {
            JetExpr { num, den }
        }
    }

    /// `num / den` for coprime parts: only the leading coefficient of the
    /// denominator is normalized.
    fn coprime(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if let Some(q) = den.as_constant() {
            return JetExpr {
                num: num.scale(&q.recip()),
                den: Poly::one(),
            };
        }
        let lc = den.leading_coefficient().recip();
        JetExpr {
            num: num.scale(&lc),
            den: den.scale(&lc),
        }
    }

    /// Canonical representative; idempotent.
    pub fn normalize(&self) -> Self {
        Self::canonical(self.num.clone(), self.den.clone())
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_polynomial(&self) -> Option<&Poly> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_polynomial() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn coordinates(&self) -> BTreeSet<Coordinate> {
        let mut s = self.num.coordinates();
        s.extend(self.den.coordinates());
        s
    }

    pub fn contains_nonlocal(&self) -> bool {
        self.coordinates().iter().any(Coordinate::is_nonlocal)
    }

    /// Highest jet order among the coordinates (0 if none).
    pub fn jet_order(&self) -> u32 {
        self.coordinates().iter().map(Coordinate::jet_order).max().unwrap_or(0)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        JetExpr {
            num: self.num.scale(q),
            den: self.den.clone(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        JetExpr {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::coprime(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &JetExpr) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    /// Apply the derivation that sends each coordinate `c` to `image(c)`
    /// (coordinates mapped to `None` are constants for it).
    pub fn derive<F>(&self, mut image: F) -> Self
    where
        F: FnMut(&Coordinate) -> Option<JetExpr>,
    {
        let mut images: BTreeMap<Coordinate, JetExpr> = BTreeMap::new();
        for c in self.coordinates() {
            if let Some(v) = image(&c) {
                if !v.is_zero() {
                    images.insert(c, v);
                }
            }
        }
        let d_poly = |p: &Poly| -> JetExpr {
            let mut acc = JetExpr::zero();
            for (c, v) in &images {
                let dp = p.partial(c);
                if !dp.is_zero() {
                    acc = &acc + &(&JetExpr::from(dp) * v);
                }
            }
            acc
        };
        if images.values().all(JetExpr::is_polynomial) {
            let d_poly = |p: &Poly| -> Poly {
                let mut acc = Poly::zero();
                for (c, v) in &images {
                    let dp = p.partial(c);
                    if !dp.is_zero() {
                        acc = &acc + &(&dp * &v.num);
                    }
                }
                acc
            };
            let dn = d_poly(&self.num);
            if self.is_polynomial() {
                return dn.into();
            }
            return Self::quotient_rule(&self.num, &self.den, &dn, &d_poly(&self.den));
        }
        let dn = d_poly(&self.num);
        if self.is_polynomial() {
            return dn;
        }
        let dd = d_poly(&self.den);
        // (n/d)' = n'/d - n d' / d^2
        let den = JetExpr::from(self.den.clone());
        let first = dn.checked_div(&den).expect("nonzero denominator");
        let second = (&JetExpr::from(self.num.clone()) * &dd)
            .checked_div(&den.pow(2))
            .expect("nonzero denominator");
        &first - &second
    }

    /// `(n/d)' = (n' d - n d') / d^2` for coprime `n`, `d`. With `g = gcd(d, d')`,
    /// `d = g h` and `d' = g k`, the numerator `n' h - n k` is coprime to `h`,
    /// so only a gcd with `g` remains.
    fn quotient_rule(n: &Poly, d: &Poly, dn: &Poly, dd: &Poly) -> Self {
        let g = d.gcd(dd);
        let h = d.div_exact(&g).expect("gcd divides denominator");
        let k = dd.div_exact(&g).expect("gcd divides derivative");
        let num = &(dn * &h) - &(n * &k);
        let den = d * &h;
        if g.is_one() {
            return Self::coprime(num, den);
        }
        let q = num.gcd(&g);
        Self::coprime(
            num.div_exact(&q).expect("gcd divides numerator"),
            den.div_exact(&q).expect("gcd divides denominator"),
        )
    }

    /// Formal partial derivative with respect to a single coordinate.
    pub fn partial(&self, c: &Coordinate) -> Self {
        if self.is_polynomial() {
            return self.num.partial(c).into();
        }
        self.derive(|k| (k == c).then(JetExpr::one))
    }

    /// Simultaneous substitution of coordinates.
    pub fn substitute(&self, bindings: &BTreeMap<Coordinate, JetExpr>) -> Result<Self> {
        self.substitute_with(|c| bindings.get(c).cloned())
    }

    /// Simultaneous substitution where `value(c)` gives the replacement of `c`.
    pub fn substitute_with<F>(&self, mut value: F) -> Result<Self>
    where
        F: FnMut(&Coordinate) -> Option<JetExpr>,
    {
        let mut values: BTreeMap<Coordinate, JetExpr> = BTreeMap::new();
        for c in self.coordinates() {
            if let Some(v) = value(&c) {
                values.insert(c, v);
            }
        }
        if values.is_empty() {
            return Ok(self.clone());
        }
        if values.values().all(JetExpr::is_polynomial) {
            let sub = |p: &Poly| p.substitute_poly(|c| values.get(c).map(|v| v.num.clone()));
            let num = sub(&self.num);
            if self.is_polynomial() {
                return Ok(num.into());
            }
            return Self::from_parts(num, sub(&self.den));
        }
        let sub = |p: &Poly| -> JetExpr {
            let mut out = JetExpr::zero();
            for (m, q) in p.terms() {
                let mut acc = JetExpr::constant(q.clone());
                for (c, e) in m.factors() {
                    let f = match values.get(c) {
                        Some(v) => v.pow(*e),
                        None => JetExpr::from(Poly::term(Rational::one(), Monomial::power(c.clone(), *e))),
                    };
                    acc = &acc * &f;
                }
                out = &out + &acc;
            }
            out
        };
        let num = sub(&self.num);
        if self.is_polynomial() {
            return Ok(num);
        }
        num.checked_div(&sub(&self.den))
    }
}

impl From<Poly> for JetExpr {
    fn from(num: Poly) -> Self {
        JetExpr { num, den: Poly::one() }
    }
}

impl From<Coordinate> for JetExpr {
    fn from(c: Coordinate) -> Self {
        JetExpr::var(c)
    }
}

impl From<Rational> for JetExpr {
    fn from(q: Rational) -> Self {
        JetExpr::constant(q)
    }
}

impl<'a> Add<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn add(self, rhs: &'a JetExpr) -> JetExpr {
        if self.den == rhs.den {
            if self.is_polynomial() {
                return (&self.num + &rhs.num).into();
            }
            return JetExpr::canonical(&self.num + &rhs.num, self.den.clone());
        }
        // a + c/d = (a d + c)/d is already reduced.
        if self.is_polynomial() || rhs.is_polynomial() {
            let (p, r) = if self.is_polynomial() { (self, rhs) } else { (rhs, self) };
            return JetExpr::coprime(&(&p.num * &r.den) + &r.num, r.den.clone());
        }
        // a/b + c/d with g = gcd(b, d): only a gcd with g can cancel.
        let g = self.den.gcd(&rhs.den);
        let b = self.den.div_exact(&g).expect("gcd divides denominator");
        let d = rhs.den.div_exact(&g).expect("gcd divides denominator");
        let t = &(&self.num * &d) + &(&rhs.num * &b);
        if g.is_one() {
            return JetExpr::coprime(t, &self.den * &rhs.den);
        }
        let q = t.gcd(&g);
        let g = g.div_exact(&q).expect("gcd divides factor");
        let t = t.div_exact(&q).expect("gcd divides numerator");
        JetExpr::coprime(t, &(&b * &d) * &g)
    }
}

impl<'a> Sub<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn sub(self, rhs: &'a JetExpr) -> JetExpr {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a JetExpr> for &'a JetExpr {
    type Output = JetExpr;
    fn mul(self, rhs: &'a JetExpr) -> JetExpr {
        if self.is_polynomial() && rhs.is_polynomial() {
            return (&self.num * &rhs.num).into();
        }
        // (a/b)(c/d): cancel gcd(a, d) and gcd(c, b) separately.
        let cancel = |p: &Poly, q: &Poly| -> (Poly, Poly) {
            let g = p.gcd(q);
            if g.is_one() {
                return (p.clone(), q.clone());
            }
            (
                p.div_exact(&g).expect("gcd divides numerator"),
                q.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let (a, d) = cancel(&self.num, &rhs.den);
        let (c, b) = cancel(&rhs.num, &self.den);
        JetExpr::coprime(&a * &c, &b * &d)
    }
}

impl Neg for &JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        JetExpr {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        -&self
    }
}

macro_rules! forward_owned {
    ($($tr:ident :: $m:ident),*) => {$(
        impl $tr<JetExpr> for JetExpr {
            type Output = JetExpr;
            fn $m(self, rhs: JetExpr) -> JetExpr { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a JetExpr> for JetExpr {
            type Output = JetExpr;
            fn $m(self, rhs: &'a JetExpr) -> JetExpr { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add::add, Sub::sub, Mul::mul);

impl std::iter::Sum for JetExpr {
    fn sum<I: Iterator<Item = JetExpr>>(iter: I) -> Self {
        iter.fold(JetExpr::zero(), |acc, e| acc + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MultiIndex;

    fn u(k: u32) -> JetExpr {
        JetExpr::var(Coordinate::Jet(0, MultiIndex::from_slice(&[k, 0])))
    }

    #[test]
    fn commutativity_cancels() {
        assert!((&u(1) * &u(0) - &u(0) * &u(1)).is_zero());
    }

    #[test]
    fn cancellation_to_zero_over_one() {
        let num = &u(0).pow(2) - &(&u(0) * &u(0));
        let e = num.checked_div(&u(0)).unwrap();
        assert!(e.is_zero());
        assert!(e.denominator().is_one());
    }

    #[test]
    fn polynomial_division_in_rational_layer() {
        let num = &u(0).pow(2) - &JetExpr::one();
        let den = &u(0) - &JetExpr::one();
        let e = num.checked_div(&den).unwrap();
        assert_eq!(e, &u(0) + &JetExpr::one());
        assert!(e.is_polynomial());
    }

    #[test]
    fn denominator_is_monic() {
        let e = u(1)
            .checked_div(&u(0).scale(&Rational::from_integer((-2).into())))
            .unwrap();
        assert!(e.denominator().leading_coefficient().is_one());
        assert_eq!(
            e.numerator(),
            &Poly::var(Coordinate::Jet(0, MultiIndex::from_slice(&[1, 0])))
                .scale(&Rational::new((-1).into(), 2.into()))
        );
        assert_eq!(e.normalize(), e);
    }

    #[test]
    fn quotient_rule() {
        let c = Coordinate::Jet(0, MultiIndex::from_slice(&[0, 0]));
        // d/du (1/u) = -1/u^2
        let e = JetExpr::one().checked_div(&u(0)).unwrap();
        let expected = JetExpr::integer(-1).checked_div(&u(0).pow(2)).unwrap();
        assert_eq!(e.partial(&c), expected);
    }

    #[test]
    fn substitution_zero_denominator() {
        let c = Coordinate::Jet(0, MultiIndex::from_slice(&[0, 0]));
        let e = JetExpr::one().checked_div(&u(0)).unwrap();
        let bindings = BTreeMap::from([(c, JetExpr::zero())]);
        assert!(matches!(e.substitute(&bindings), Err(Error::ZeroDenominator)));
    }
}
