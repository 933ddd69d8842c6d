use std::fmt;

use num_traits::{One, Signed};

use super::poly::is_negative;
use super::{Coordinate, JetExpr, Monomial, Poly, Rational};
use crate::context::JetContext;

/// Display adapter binding an expression to its variable names.
pub struct Display<'a, T: ?Sized> {
    value: &'a T,
    ctx: &'a JetContext,
}

impl JetExpr {
    /// Canonical text form; `parse(display(e)) == e`.
    pub fn display<'a>(&'a self, ctx: &'a JetContext) -> Display<'a, JetExpr> {
        Display { value: self, ctx }
    }

    pub fn to_text(&self, ctx: &JetContext) -> String {
        self.display(ctx).to_string()
    }
}

impl Poly {
    pub fn display<'a>(&'a self, ctx: &'a JetContext) -> Display<'a, Poly> {
        Display { value: self, ctx }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial, ctx: &JetContext) -> fmt::Result {
    for (k, (c, e)) in m.factors().iter().enumerate() {
        if k > 0 {
            write!(f, "*")?;
        }
        write!(f, "{}", ctx.coordinate_name(c))?;
        if *e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Poly, ctx: &JetContext) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    for (k, (m, q)) in p.terms().rev().enumerate() {
        let neg = is_negative(q);
        match (k, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let a = q.abs();
        if m.is_one() {
            write_rational(f, &a)?;
        } else {
            if !a.is_one() {
                write_rational(f, &a)?;
                write!(f, "*")?;
            }
            write_monomial(f, m, ctx)?;
        }
    }
    Ok(())
}

fn is_atomic_denominator(p: &Poly) -> bool {
    p.len() == 1
        && p.terms()
            .next()
            .is_some_and(|(m, q)| q.is_one() && m.factors().len() == 1)
}

impl fmt::Display for Display<'_, Poly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(f, self.value, self.ctx)
    }
}

impl fmt::Display for Display<'_, JetExpr> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.value;
        if e.is_polynomial() {
            return write_poly(f, e.numerator(), self.ctx);
        }
        if e.numerator().len() > 1 {
            write!(f, "(")?;
            write_poly(f, e.numerator(), self.ctx)?;
            write!(f, ")")?;
        } else {
            write_poly(f, e.numerator(), self.ctx)?;
        }
        write!(f, "/")?;
        if is_atomic_denominator(e.denominator()) {
            write_poly(f, e.denominator(), self.ctx)
        } else {
            write!(f, "(")?;
            write_poly(f, e.denominator(), self.ctx)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Display<'_, Coordinate> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.coordinate_name(self.value))
    }
}

impl Coordinate {
    pub fn display<'a>(&'a self, ctx: &'a JetContext) -> Display<'a, Coordinate> {
        Display { value: self, ctx }
    }
}

#[cfg(test)]
mod tests {
    use crate::context::JetContext;
    use crate::expr::parse;

    fn round(s: &str) -> String {
        let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
        parse(s, &ctx).unwrap().to_text(&ctx)
    }

    #[test]
    fn canonical_text() {
        assert_eq!(round("u_xxx + u_x*u"), "u*u_x + u_xxx");
        assert_eq!(round("-u*u_x"), "-u*u_x");
        assert_eq!(round("u^2/2 + u_xx"), "1/2*u^2 + u_xx");
        assert_eq!(round("0"), "0");
        assert_eq!(round("t*u_x + 1"), "t*u_x + 1");
        assert_eq!(round("2*u_x/u"), "2*u_x/u");
        assert_eq!(round("1/(u*u_x - 1)"), "1/(u*u_x - 1)");
        assert_eq!(round("(u+1)/(2*u)"), "(1/2*u + 1/2)/u");
    }
}
