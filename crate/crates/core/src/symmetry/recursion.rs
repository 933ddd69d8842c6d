//! Recursion operators with at most one `D^{-1}` per term.

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{parse, JetExpr};
use crate::jet::GeneratingFunction;
use crate::system::PdeSystem;

use super::formal_integrate;

#[derive(Clone, Debug, PartialEq)]
pub enum RecursionTerm {
    /// `coeff · D^order`.
    Local { coeff: JetExpr, order: u32 },
    /// `left · D^{-1} ∘ right`.
    Integral { left: JetExpr, right: JetExpr },
}

/// A scalar operator in the total derivative along one independent variable.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionOperator {
    pub var: usize,
    pub terms: Vec<RecursionTerm>,
}

/// Split on `*` outside parentheses.
fn split_factors(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in line.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(line[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(line[start..].trim());
    out
}

fn derivative_marker(factor: &str) -> Option<u32> {
    match factor {
        "D" => Some(1),
        _ => factor.strip_prefix("D^").and_then(|k| k.trim().parse().ok()),
    }
}

impl RecursionOperator {
    /// `D_x^2 + 2/3 u + 1/3 u_x D_x^{-1}` for KdV.
    pub fn kdv(ctx: &JetContext) -> Result<Self> {
        Self::parse("D^2\n2/3*u\n1/3*u_x*Dinv\n", ctx)
    }

    /// One term per line; factors joined by `*`, with markers `D`, `D^k` and
    /// `Dinv`. Factors left of `Dinv` form the outer coefficient, factors right
    /// of it the inner one.
    pub fn parse(text: &str, ctx: &JetContext) -> Result<Self> {
        let mut terms = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let file_err = |msg: String| Error::File { line: k + 1, msg };
            let mut left = JetExpr::one();
            let mut right = JetExpr::one();
            let mut order = 0;
            let mut integral = false;
            for factor in split_factors(line) {
                if factor == "Dinv" {
                    if integral || order > 0 {
                        return Err(file_err("at most one `Dinv` and no `D` in an integral term".into()));
                    }
                    integral = true;
                } else if let Some(d) = derivative_marker(factor) {
                    if integral {
                        return Err(file_err("`D` after `Dinv` is not supported".into()));
                    }
                    order += d;
                } else if factor.is_empty() {
                    return Err(file_err("empty factor".into()));
                } else {
                    if order > 0 && !integral {
                        return Err(file_err("coefficients must precede `D`".into()));
                    }
                    let e = parse(factor, ctx)?;
                    if integral {
                        right = &right * &e;
                    } else {
                        left = &left * &e;
                    }
                }
            }
            terms.push(if integral {
                RecursionTerm::Integral { left, right }
            } else {
                RecursionTerm::Local { coeff: left, order }
            });
        }
        Ok(RecursionOperator { var: 0, terms })
    }

    /// Inverse of [`RecursionOperator::parse`].
    pub fn to_text(&self, ctx: &JetContext) -> String {
        let mut s = String::new();
        for t in &self.terms {
            let line = match t {
                RecursionTerm::Local { coeff, order } => {
                    let d = match order {
                        0 => None,
                        1 => Some("D".to_string()),
                        k => Some(format!("D^{k}")),
                    };
                    match (coeff.is_one(), d) {
                        (true, Some(d)) => d,
                        (_, None) => format!("({})", coeff.to_text(ctx)),
                        (false, Some(d)) => format!("({})*{d}", coeff.to_text(ctx)),
                    }
                }
                RecursionTerm::Integral { left, right } => {
                    format!("({})*Dinv*({})", left.to_text(ctx), right.to_text(ctx))
                }
            };
            s.push_str(&line);
            s.push('\n');
        }
        s
    }
}

/// `R(φ)` on `E∞`, integrating each `D^{-1}` argument exactly.
pub fn apply_recursion(r: &RecursionOperator, phi: &GeneratingFunction, sys: &PdeSystem) -> Result<GeneratingFunction> {
    if phi.len() != 1 || sys.ctx().n_dependent() != 1 {
        return Err(Error::Unsupported(
            "recursion operators act on scalar generating functions".into(),
        ));
    }
    let f = sys.reduce(&phi.components()[0])?;
    let mut out = JetExpr::zero();
    for t in &r.terms {
        let v = match t {
            RecursionTerm::Local { coeff, order } => {
                let mut d = f.clone();
                for _ in 0..*order {
                    d = sys.restricted_total_derivative(&d, r.var)?;
                }
                coeff * &d
            }
            RecursionTerm::Integral { left, right } => {
                let integrand = sys.reduce(&(right * &f))?;
                left * &formal_integrate(&integrand, r.var)?
            }
        };
        out = &out + &v;
    }
    Ok(GeneratingFunction::scalar(sys.reduce(&out)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdv_hierarchy() {
        let kdv = PdeSystem::kdv();
        let ctx = kdv.ctx();
        let r = RecursionOperator::kdv(ctx).unwrap();
        let ux = GeneratingFunction::parse("u_x", ctx).unwrap();
        let r1 = apply_recursion(&r, &ux, &kdv).unwrap();
        assert_eq!(r1, GeneratingFunction::parse("u*u_x + u_xxx", ctx).unwrap());
        let r2 = apply_recursion(&r, &r1, &kdv).unwrap();
        let expected = "u_xxxxx + 5/3*u*u_xxx + 10/3*u_x*u_xx + 5/6*u^2*u_x";
        assert_eq!(r2, GeneratingFunction::parse(expected, ctx).unwrap());
        assert!(apply_recursion(&r, &GeneratingFunction::parse("0", ctx).unwrap(), &kdv)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn not_exact_propagates() {
        let kdv = PdeSystem::kdv();
        let r = RecursionOperator::kdv(kdv.ctx()).unwrap();
        let phi = GeneratingFunction::parse("u", kdv.ctx()).unwrap();
        assert!(matches!(apply_recursion(&r, &phi, &kdv), Err(Error::NotExact { .. })));
    }

    #[test]
    fn file_round_trip() {
        let ctx = PdeSystem::kdv().ctx().clone();
        let r = RecursionOperator::kdv(&ctx).unwrap();
        assert_eq!(r.terms.len(), 3);
        assert_eq!(RecursionOperator::parse(&r.to_text(&ctx), &ctx).unwrap(), r);
        assert!(RecursionOperator::parse("Dinv*Dinv", &ctx).is_err());
        assert!(RecursionOperator::parse("D*u", &ctx).is_err());
    }
}
