//! Higher symmetries: residuals, determining equations, Jacobi brackets,
//! classification, invariant-solution systems and recursion operators.

mod ansatz;
mod integrate;
mod recursion;

use std::fmt;

pub(crate) use ansatz::solve_kernel;
pub use ansatz::{span_contains, AnsatzSpec, DEFAULT_ANSATZ_LIMIT};
pub use integrate::formal_integrate;
pub use recursion::{apply_recursion, RecursionOperator, RecursionTerm};

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{Coordinate, JetExpr, MultiIndex};
use crate::jet::{evolutionary_derivation, GeneratingFunction};
use crate::linear::CDiffOp;
use crate::parallel::Parallelism;
use crate::system::PdeSystem;

/// `ℓ̄_F`, the linearization restricted to `E∞`.
pub fn restricted_linearization(sys: &PdeSystem) -> Result<CDiffOp> {
    CDiffOp::linearize(&sys.forms(), sys.ctx())?.restrict(sys)
}

fn check_shape(sys: &PdeSystem, phi: &GeneratingFunction) -> Result<()> {
    let m = sys.ctx().n_dependent();
    if phi.len() != m {
        return Err(Error::ShapeMismatch {
            expected: m,
            got: phi.len(),
        });
    }
    Ok(())
}

/// `ℓ̄_F(φ)`; `φ` is a symmetry iff every component is zero.
pub fn symmetry_residual(sys: &PdeSystem, phi: &GeneratingFunction) -> Result<Vec<JetExpr>> {
    check_shape(sys, phi)?;
    restricted_linearization(sys)?.apply(phi)
}

/// Basis of the symmetries within the ansatz, in canonical reduced form.
pub fn solve_determining(sys: &PdeSystem, spec: &AnsatzSpec, par: Parallelism) -> Result<Vec<GeneratingFunction>> {
    solve_kernel(sys, &restricted_linearization(sys)?, spec, par)
}

/// `{φ, ψ} = Э_φ(ψ) - Э_ψ(φ)`, componentwise.
pub fn jacobi_bracket(phi: &GeneratingFunction, psi: &GeneratingFunction) -> Result<GeneratingFunction> {
    if phi.len() != psi.len() {
        return Err(Error::ShapeMismatch {
            expected: phi.len(),
            got: psi.len(),
        });
    }
    let comps = phi
        .components()
        .iter()
        .zip(psi.components())
        .map(|(p, q)| {
            let a = evolutionary_derivation(phi, q)?;
            let b = evolutionary_derivation(psi, p)?;
            Ok(&a - &b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratingFunction(comps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    Point,
    Contact,
    Higher,
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymmetryClass::Point => "point",
            SymmetryClass::Contact => "contact",
            SymmetryClass::Higher => "higher",
        })
    }
}

/// Point iff `φ^j = b^j(x,u) - Σ a_i(x,u) u^j_{1_i}` with `a_i` shared by all
/// components; contact iff `m = 1` and `φ` has order at most one.
pub fn classify(phi: &GeneratingFunction, ctx: &JetContext) -> SymmetryClass {
    let n = ctx.n_independent();
    let m = ctx.n_dependent();
    let order_ok = phi
        .components()
        .iter()
        .all(|c| !c.contains_nonlocal() && c.jet_order() <= 1);
    if !order_ok {
        return SymmetryClass::Higher;
    }
    let first = |j: usize, i: usize| Coordinate::Jet(j, MultiIndex::unit(n, i));
    let is_zeroth = |e: &JetExpr| e.coordinates().iter().all(|c| c.jet_order() == 0);
    let mut shared: Option<Vec<JetExpr>> = None;
    let mut point = phi.len() == m;
    for (j, c) in phi.components().iter().enumerate() {
        if !point {
            break;
        }
        let mut coeffs = Vec::with_capacity(n);
        let mut rest = c.clone();
        for i in 0..n {
            let a = c.partial(&first(j, i));
            rest = &rest - &(&a * &JetExpr::var(first(j, i)));
            coeffs.push(a);
        }
        let foreign = (0..m)
            .filter(|&k| k != j)
            .any(|k| (0..n).any(|i| c.coordinates().contains(&first(k, i))));
        point = !foreign && is_zeroth(&rest) && coeffs.iter().all(is_zeroth);
        match &shared {
            Some(prev) => point &= *prev == coeffs,
            None => shared = Some(coeffs),
        }
    }
    if point {
        SymmetryClass::Point
    } else if m == 1 {
        SymmetryClass::Contact
    } else {
        SymmetryClass::Higher
    }
}

/// The joint system `{F = 0, φ = 0, …}` with the symmetry residual of each `φ`.
#[derive(Clone, Debug)]
pub struct InvariantSystem {
    pub base: PdeSystem,
    pub constraints: Vec<GeneratingFunction>,
    pub residuals: Vec<Vec<JetExpr>>,
}

impl InvariantSystem {
    pub fn is_symmetry(&self, k: usize) -> bool {
        self.residuals[k].iter().all(JetExpr::is_zero)
    }

    /// System file text with `constraint` lines and residual comments.
    pub fn to_text(&self) -> String {
        let ctx = self.base.ctx();
        let mut s = self.base.to_file_text();
        for (k, phi) in self.constraints.iter().enumerate() {
            for c in phi.components() {
                s.push_str(&format!("constraint = {} = 0\n", c.to_text(ctx)));
            }
            let r: Vec<String> = self.residuals[k].iter().map(|e| e.to_text(ctx)).collect();
            s.push_str(&format!("# symmetry residual {}: {}\n", k + 1, r.join("; ")));
        }
        s
    }
}

pub fn invariant_system(sys: &PdeSystem, phis: &[GeneratingFunction]) -> Result<InvariantSystem> {
    let residuals = phis
        .iter()
        .map(|phi| symmetry_residual(sys, phi))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantSystem {
        base: sys.clone(),
        constraints: phis.to_vec(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn gf(sys: &PdeSystem, s: &str) -> GeneratingFunction {
        GeneratingFunction::parse(s, sys.ctx()).unwrap()
    }

    #[test]
    fn residual_examples() {
        let kdv = PdeSystem::kdv();
        assert!(symmetry_residual(&kdv, &gf(&kdv, "u*u_x + u_xxx")).unwrap()[0].is_zero());
        let r = symmetry_residual(&kdv, &gf(&kdv, "u")).unwrap();
        assert_eq!(r[0], parse("-u*u_x", kdv.ctx()).unwrap());
        let burgers = PdeSystem::burgers();
        assert!(symmetry_residual(&burgers, &gf(&burgers, "t*u_x + 1")).unwrap()[0].is_zero());
    }

    #[test]
    fn trivial_system_kernel() {
        let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
        let sys = PdeSystem::parse(ctx, &["u_t = 0"]).unwrap();
        let basis = solve_determining(&sys, &AnsatzSpec::new(0, 1, 0), Parallelism::Sequential).unwrap();
        assert_eq!(basis.len(), 2);
        assert!(span_contains(&basis, &gf(&sys, "u")).unwrap());
        assert!(span_contains(&basis, &gf(&sys, "1")).unwrap());
    }

    #[test]
    fn burgers_low_order_contains_translation() {
        let burgers = PdeSystem::burgers();
        let basis = solve_determining(&burgers, &AnsatzSpec::new(1, 2, 1), Parallelism::Sequential).unwrap();
        assert!(span_contains(&basis, &gf(&burgers, "u_x")).unwrap());
        assert!(span_contains(&basis, &gf(&burgers, "t*u_x + 1")).unwrap());
        for b in &basis {
            assert!(symmetry_residual(&burgers, b).unwrap()[0].is_zero());
        }
    }

    #[test]
    fn bracket_examples() {
        let kdv = PdeSystem::kdv();
        let phi = gf(&kdv, "u*u_x + x*u_xx");
        assert!(jacobi_bracket(&phi, &phi).unwrap().is_zero());
        let psi = gf(&kdv, "x^2*u + t*u_x^2");
        let b = jacobi_bracket(&gf(&kdv, "u_x"), &psi).unwrap();
        assert_eq!(b.components()[0], parse("-2*x*u", kdv.ctx()).unwrap());
    }

    #[test]
    fn classification() {
        let ctx = JetContext::new(&["x", "t"], &["u"]).unwrap();
        let g = |s: &str| GeneratingFunction::parse(s, &ctx).unwrap();
        assert_eq!(classify(&g("t*u_x + 1"), &ctx), SymmetryClass::Point);
        assert_eq!(classify(&g("u_x^2"), &ctx), SymmetryClass::Contact);
        assert_eq!(classify(&g("u*u_x + u_xxx"), &ctx), SymmetryClass::Higher);
        assert_eq!(classify(&g("x*u_x + 2*t*u_t + u"), &ctx), SymmetryClass::Point);
        let two = JetContext::new(&["x"], &["u", "v"]).unwrap();
        let g2 = |s: &str| GeneratingFunction::parse(s, &two).unwrap();
        assert_eq!(classify(&g2("x*u_x; x*v_x + u"), &two), SymmetryClass::Point);
        assert_eq!(classify(&g2("x*u_x; v_x"), &two), SymmetryClass::Higher);
        assert_eq!(classify(&g2("v_x; 0"), &two), SymmetryClass::Higher);
    }

    #[test]
    fn invariant_systems() {
        let kdv = PdeSystem::kdv();
        let inv = invariant_system(&kdv, &[gf(&kdv, "u_x")]).unwrap();
        assert!(inv.is_symmetry(0));
        assert_eq!(
            inv.to_text(),
            "independent = x, t\ndependent = u\nequation = u_t = u*u_x + u_xxx\nconstraint = u_x = 0\n# symmetry residual 1: 0\n"
        );
        let burgers = PdeSystem::burgers();
        let inv = invariant_system(&burgers, &[gf(&burgers, "t*u_x + 1")]).unwrap();
        assert!(inv.to_text().contains("constraint = t*u_x + 1 = 0"));
        assert!(inv.is_symmetry(0));
    }
}
