//! Conservation-law generating functions, the Euler operator, conserved
//! currents and self-adjointness.

use std::collections::BTreeMap;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{Coordinate, JetExpr};
use crate::jet::{total_derivative, GeneratingFunction};
use crate::linear::CDiffOp;
use crate::parallel::Parallelism;
use crate::symmetry::{solve_kernel, AnsatzSpec};
use crate::system::PdeSystem;

/// `ℓ̄*_F`, the adjoint linearization restricted to `E∞`.
pub fn restricted_adjoint_linearization(sys: &PdeSystem) -> Result<CDiffOp> {
    CDiffOp::linearize(&sys.forms(), sys.ctx())?.adjoint()?.restrict(sys)
}

/// `ℓ̄*_F(Υ)`; `Υ` generates a conservation law iff every component is zero.
pub fn adjoint_residual(sys: &PdeSystem, upsilon: &GeneratingFunction) -> Result<Vec<JetExpr>> {
    let op = restricted_adjoint_linearization(sys)?;
    if upsilon.len() != op.cols() {
        return Err(Error::ShapeMismatch {
            expected: op.cols(),
            got: upsilon.len(),
        });
    }
    op.apply(upsilon)
}

/// Basis of conservation-law generating functions within the ansatz.
pub fn solve_adjoint_determining(
    sys: &PdeSystem,
    spec: &AnsatzSpec,
    par: Parallelism,
) -> Result<Vec<GeneratingFunction>> {
    solve_kernel(sys, &restricted_adjoint_linearization(sys)?, spec, par)
}

/// `E_j(ω) = Σ_σ (-1)^{|σ|} D_σ(∂ω/∂u^j_σ)`, which equals `ℓ*_ω(1)`.
///
/// The sum is folded one independent variable at a time in Horner form,
/// `Σ_k (-D_i)^k a_k = a_0 - D_i(a_1 - D_i(a_2 - …))`, so each partial
/// derivative of `ω` is differentiated once per fold instead of `|σ|` times.
pub fn euler_operator(omega: &JetExpr, ctx: &JetContext) -> Result<GeneratingFunction> {
    if omega.contains_nonlocal() {
        return Err(Error::NonlocalCoordinate);
    }
    let mut coeffs: Vec<BTreeMap<Vec<u32>, JetExpr>> = vec![BTreeMap::new(); ctx.n_dependent()];
    for c in omega.coordinates() {
        if let Coordinate::Jet(j, sigma) = &c {
            if !ctx.admits(&c) {
                return Err(Error::ShapeMismatch {
                    expected: ctx.n_independent(),
                    got: sigma.len(),
                });
            }
            coeffs[*j].insert(sigma.exponents().to_vec(), omega.partial(&c));
        }
    }
    let mut out = Vec::with_capacity(coeffs.len());
    for mut by_sigma in coeffs {
        for i in (0..ctx.n_independent()).rev() {
            let mut groups: BTreeMap<Vec<u32>, BTreeMap<u32, JetExpr>> = BTreeMap::new();
            for (mut sigma, a) in by_sigma {
                let k = std::mem::take(&mut sigma[i]);
                groups.entry(sigma).or_default().insert(k, a);
            }
            by_sigma = BTreeMap::new();
            for (sigma, by_k) in groups {
                let top = *by_k.keys().next_back().expect("nonempty group");
                let mut acc = JetExpr::zero();
                for k in (0..=top).rev() {
                    if !acc.is_zero() {
                        acc = -total_derivative(&acc, i)?;
                    }
                    if let Some(a) = by_k.get(&k) {
                        acc = &acc + a;
                    }
                }
                by_sigma.insert(sigma, acc);
            }
        }
        out.push(by_sigma.into_values().next().unwrap_or_else(JetExpr::zero));
    }
    Ok(GeneratingFunction(out))
}

/// Outcome of comparing `ℓ*_F` with `λ ℓ_F`.
#[derive(Clone, Debug)]
pub struct SelfAdjointness {
    /// `ℓ*_F - λ ℓ_F` on the free jet space.
    pub difference: CDiffOp,
    pub free: bool,
    /// Whether the difference vanishes after restriction to `E∞`.
    pub restricted: bool,
}

/// Free-jet check for arbitrary forms.
pub fn self_adjointness_of_forms(forms: &[JetExpr], ctx: &JetContext, lambda: Option<&JetExpr>) -> Result<CDiffOp> {
    if forms.len() != ctx.n_dependent() {
        return Err(Error::ShapeMismatch {
            expected: ctx.n_dependent(),
            got: forms.len(),
        });
    }
    let l = CDiffOp::linearize(forms, ctx)?;
    let one = JetExpr::one();
    l.adjoint()?.sub_scaled(lambda.unwrap_or(&one), &l)
}

pub fn self_adjointness(sys: &PdeSystem, lambda: Option<&JetExpr>) -> Result<SelfAdjointness> {
    let difference = self_adjointness_of_forms(&sys.forms(), sys.ctx(), lambda)?;
    let restricted = difference.restrict(sys)?.is_zero();
    Ok(SelfAdjointness {
        free: difference.is_zero(),
        restricted,
        difference,
    })
}

/// `Σ_i D̄_i(J^i)`; zero iff `J` is a conserved current on `E∞`.
pub fn verify_conserved_current(sys: &PdeSystem, current: &[JetExpr]) -> Result<JetExpr> {
    let n = sys.ctx().n_independent();
    if current.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: current.len(),
        });
    }
    let mut div = JetExpr::zero();
    for (i, j) in current.iter().enumerate() {
        div = &div + &sys.restricted_total_derivative(j, i)?;
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::symmetry::span_contains;

    fn kdv() -> PdeSystem {
        PdeSystem::kdv()
    }

    fn p(s: &str) -> JetExpr {
        parse(s, kdv().ctx()).unwrap()
    }

    fn gf(s: &str) -> GeneratingFunction {
        GeneratingFunction::parse(s, kdv().ctx()).unwrap()
    }

    #[test]
    fn kdv_generating_functions() {
        for u in ["1", "u", "1/2*u^2 + u_xx"] {
            assert!(adjoint_residual(&kdv(), &gf(u)).unwrap()[0].is_zero(), "{u}");
        }
        assert_eq!(adjoint_residual(&kdv(), &gf("u_x")).unwrap()[0], p("-u_x^2"));
    }

    #[test]
    fn adjoint_solver() {
        let basis = solve_adjoint_determining(&kdv(), &AnsatzSpec::new(2, 2, 0), Parallelism::Sequential).unwrap();
        assert_eq!(basis.len(), 3);
        for u in ["1", "u", "1/2*u^2 + u_xx"] {
            assert!(span_contains(&basis, &gf(u)).unwrap());
        }
        let burgers = PdeSystem::burgers();
        let b = solve_adjoint_determining(&burgers, &AnsatzSpec::new(0, 1, 0), Parallelism::Sequential).unwrap();
        assert!(span_contains(&b, &GeneratingFunction::parse("1", burgers.ctx()).unwrap()).unwrap());
    }

    #[test]
    fn euler_examples() {
        let ctx = kdv().ctx().clone();
        assert_eq!(euler_operator(&p("1/2*u_x^2"), &ctx).unwrap(), gf("-u_xx"));
        assert_eq!(
            euler_operator(&p("1/6*u^3 - 1/2*u_x^2"), &ctx).unwrap(),
            gf("1/2*u^2 + u_xx")
        );
        assert!(euler_operator(&p("u*u_x + u_t*u_xx + u_x*u_xt"), &ctx)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn self_adjointness_examples() {
        let ctx = JetContext::new(&["x", "y"], &["u"]).unwrap();
        let laplace = PdeSystem::parse(ctx, &["u_yy = -u_xx"]).unwrap();
        let r = self_adjointness(&laplace, None).unwrap();
        assert!(r.free && r.restricted);
        let r = self_adjointness(&kdv(), None).unwrap();
        assert!(!r.free && !r.restricted);
        let ctx = kdv().ctx().clone();
        let d = self_adjointness_of_forms(&[p("-u_xx")], &ctx, None).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn currents() {
        assert!(verify_conserved_current(&kdv(), &[p("-1/2*u^2 - u_xx"), p("u")])
            .unwrap()
            .is_zero());
        assert!(verify_conserved_current(&kdv(), &[p("0"), p("0")]).unwrap().is_zero());
        assert!(!verify_conserved_current(&kdv(), &[p("0"), p("u_x")]).unwrap().is_zero());
    }
}
