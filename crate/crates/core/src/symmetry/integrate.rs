//! `D_i^{-1}` on differential polynomials by top-term descent.

use crate::error::{Error, Result};
use crate::expr::{Coordinate, JetExpr, MultiIndex, Poly, Rational};
use crate::jet::total_derivative_free;

fn antiderivative(p: &Poly, c: &Coordinate) -> Poly {
    Poly::from_terms(p.terms().map(|(m, q)| {
        let e = m.exponent(c);
        (m.with_exponent(c, e + 1), q / Rational::from_integer((e + 1).into()))
    }))
}

/// Returns `p` with `D_i(p) = e`.
///
/// `e` must be a polynomial in one dependent variable and its pure
/// `x_i`-derivatives; other independent variables act as constants. Fails with
/// [`Error::NotExact`] when no differential-polynomial antiderivative exists.
pub fn formal_integrate(e: &JetExpr, i: usize) -> Result<JetExpr> {
    let not_exact = || Error::NotExact { integrand: e.clone() };
    let mut dep = None;
    let mut n = 0;
    for c in e.coordinates() {
        match &c {
            Coordinate::Jet(j, s) => {
                let pure = i < s.len() && s.order() == s.get(i);
                if !pure || dep.is_some_and(|d| d != *j) {
                    return Err(Error::Unsupported(
                        "integration needs one dependent variable and pure derivatives in the integration variable"
                            .into(),
                    ));
                }
                dep = Some(*j);
                n = s.len();
            }
            Coordinate::Independent(k) if *k == i => {
                return Err(Error::Unsupported(
                    "integrand depends explicitly on the integration variable".into(),
                ))
            }
            Coordinate::Independent(_) => {}
            Coordinate::Nonlocal(_) => return Err(Error::NonlocalCoordinate),
        }
    }
    if !e.is_polynomial() {
        return Err(Error::Unsupported("integrand must be a differential polynomial".into()));
    }
    let Some(dep) = dep else {
        return if e.is_zero() {
            Ok(JetExpr::zero())
        } else {
            Err(not_exact())
        };
    };
    let coord = |k: u32| {
        let mut s = MultiIndex::zero(n);
        for _ in 0..k {
            s = s.incremented(i);
        }
        Coordinate::Jet(dep, s)
    };
    let mut rem = e.clone();
    let mut acc = JetExpr::zero();
    while !rem.is_zero() {
        let top = rem.jet_order();
        let has_jet = rem.coordinates().iter().any(Coordinate::is_jet);
        if top == 0 || !has_jet {
            return Err(not_exact());
        }
        let p = rem.as_polynomial().expect("descent stays polynomial");
        let lead = coord(top);
        if p.degree_in(&lead) != 1 {
            return Err(not_exact());
        }
        let piece = JetExpr::from(antiderivative(&p.partial(&lead), &coord(top - 1)));
        rem = &rem - &total_derivative_free(&piece, i);
        acc = &acc + &piece;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::JetContext;
    use crate::expr::parse;

    fn p(s: &str) -> JetExpr {
        parse(s, &JetContext::new(&["x", "t"], &["u"]).unwrap()).unwrap()
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(formal_integrate(&p("u_x"), 0).unwrap(), p("u"));
        assert_eq!(formal_integrate(&p("u*u_x + u_xxx"), 0).unwrap(), p("1/2*u^2 + u_xx"));
        assert!(matches!(formal_integrate(&p("u"), 0), Err(Error::NotExact { .. })));
        assert!(matches!(formal_integrate(&p("u_xx^2"), 0), Err(Error::NotExact { .. })));
        assert!(formal_integrate(&p("0"), 0).unwrap().is_zero());
        assert!(matches!(formal_integrate(&p("x*u_x"), 0), Err(Error::Unsupported(_))));
        assert_eq!(formal_integrate(&p("t*u_x"), 0).unwrap(), p("t*u"));
    }

    #[test]
    fn mixed_terms() {
        let e = p("2*u_x*u_xx + u^2*u_xxx + 2*u*u_x*u_xx");
        let q = formal_integrate(&e, 0).unwrap();
        assert_eq!(total_derivative_free(&q, 0), e);
    }
}
