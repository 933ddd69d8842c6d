//! Finite polynomial ansatz and the exact kernel solver shared by the
//! symmetry and conservation-law determining equations.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::expr::{Coordinate, JetExpr, Monomial, Poly, Rational};
use crate::jet::GeneratingFunction;
use crate::linalg::{self, SparseRow};
use crate::linear::CDiffOp;
use crate::parallel::Parallelism;
use crate::system::PdeSystem;

/// Default cap on the number of unknown coefficients.
pub const DEFAULT_ANSATZ_LIMIT: usize = 20_000;

/// Bounds of the monomial ansatz `Σ c_α M_α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnsatzSpec {
    /// Highest jet order of the internal coordinates used.
    pub order: u32,
    /// Highest total degree in the jet coordinates; the constant 1 is included.
    pub degree: u32,
    /// Highest total degree of the separate factor in the independent variables;
    /// zero means no explicit dependence.
    pub independent_degree: u32,
    /// Refuse ansätze with more unknowns than this.
    pub limit: usize,
}

impl AnsatzSpec {
    pub fn new(order: u32, degree: u32, independent_degree: u32) -> Self {
        AnsatzSpec {
            order,
            degree,
            independent_degree,
            limit: DEFAULT_ANSATZ_LIMIT,
        }
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// All monomials of total degree `≤ d` in `vars`, including 1.
fn monomials_up_to(vars: &[Coordinate], d: u32) -> Vec<Monomial> {
    fn rec(vars: &[Coordinate], left: u32, acc: &mut Vec<(Coordinate, u32)>, out: &mut Vec<Monomial>) {
        let Some((first, rest)) = vars.split_first() else {
            out.push(Monomial::from_factors(acc.iter().cloned()));
            return;
        };
        for e in 0..=left {
            if e > 0 {
                acc.push((first.clone(), e));
            }
            rec(rest, left - e, acc, out);
            if e > 0 {
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, d, &mut Vec::new(), &mut out);
    out
}

fn jet_order(m: &Monomial) -> u32 {
    m.coordinates().map(Coordinate::jet_order).max().unwrap_or(0)
}

/// Unknowns `(component, monomial)`, most significant first: higher jet order,
/// then higher monomial.
pub(crate) fn ansatz_unknowns(sys: &PdeSystem, components: usize, spec: &AnsatzSpec) -> Result<Vec<(usize, Monomial)>> {
    if spec.degree == 0 {
        return Err(Error::Unsupported("ansatz degree must be at least 1".into()));
    }
    let ctx = sys.ctx();
    let jets = sys.internal_coordinates(spec.order);
    let indeps: Vec<Coordinate> = (0..ctx.n_independent()).map(Coordinate::Independent).collect();
    let size = binomial((jets.len() as u128) + spec.degree as u128, spec.degree as u128)
        .saturating_mul(binomial(
            indeps.len() as u128 + spec.independent_degree as u128,
            spec.independent_degree as u128,
        ))
        .saturating_mul(components as u128);
    if size > spec.limit as u128 {
        return Err(Error::AnsatzTooLarge {
            size: size.min(usize::MAX as u128) as usize,
            limit: spec.limit,
        });
    }
    let jet_monomials = monomials_up_to(&jets, spec.degree);
    let x_monomials = monomials_up_to(&indeps, spec.independent_degree);
    let mut unknowns = Vec::with_capacity(size as usize);
    for j in 0..components {
        for xm in &x_monomials {
            for jm in &jet_monomials {
                unknowns.push((j, xm.mul(jm)));
            }
        }
    }
    unknowns.sort_by(|(ja, a), (jb, b)| {
        (Reverse(jet_order(a)), Reverse(a), ja).cmp(&(Reverse(jet_order(b)), Reverse(b), jb))
    });
    Ok(unknowns)
}

fn lcm(a: &Poly, b: &Poly) -> Poly {
    let g = a.gcd(b);
    (a * b).div_exact(&g).expect("gcd divides the product").monic()
}

/// Basis of `{Σ c_α M_α : op(Σ c_α M_α) = 0}`, where `op` acts on internal
/// coordinates and its output is expanded with internal coordinates treated as
/// algebraically independent.
pub(crate) fn solve_kernel(
    sys: &PdeSystem,
    op: &CDiffOp,
    spec: &AnsatzSpec,
    par: Parallelism,
) -> Result<Vec<GeneratingFunction>> {
    let components = op.cols();
    let unknowns = ansatz_unknowns(sys, components, spec)?;
    let images = par.try_map(&unknowns, |(j, m)| {
        let mut phi = vec![JetExpr::zero(); components];
        phi[*j] = JetExpr::from(Poly::term(Rational::from_integer(1.into()), m.clone()));
        op.apply(&GeneratingFunction(phi))
    })?;
    let mut equations: BTreeMap<(usize, Monomial), SparseRow> = BTreeMap::new();
    for s in 0..op.rows() {
        let mut common = Poly::one();
        for image in &images {
            common = lcm(&common, image[s].denominator());
        }
        for (alpha, image) in images.iter().enumerate() {
            let e = &image[s];
            if e.is_zero() {
                continue;
            }
            let scale = common.div_exact(e.denominator()).expect("lcm is a multiple");
            let num = e.numerator() * &scale;
            for (m, q) in num.terms() {
                let row = equations.entry((s, m.clone())).or_default();
                let entry = row.entry(alpha).or_insert_with(Rational::zero);
                *entry += q;
            }
        }
    }
    let basis = linalg::nullspace(equations.into_values(), unknowns.len());
    Ok(basis
        .into_iter()
        .map(|v| {
            let mut comps = vec![Poly::zero(); components];
            for (alpha, c) in v {
                let (j, m) = &unknowns[alpha];
                comps[*j].add_term(m.clone(), c);
            }
            GeneratingFunction(comps.into_iter().map(JetExpr::from).collect())
        })
        .collect())
}

fn polynomial_keys(phi: &GeneratingFunction) -> Result<Vec<((usize, Monomial), Rational)>> {
    let mut out = Vec::new();
    for (j, c) in phi.components().iter().enumerate() {
        let p = c
            .as_polynomial()
            .ok_or_else(|| Error::Unsupported("span test needs polynomial generating functions".into()))?;
        for (m, q) in p.terms() {
            out.push(((j, m.clone()), q.clone()));
        }
    }
    Ok(out)
}

/// Whether `phi` lies in the ℚ-span of `basis` (polynomial components only).
pub fn span_contains(basis: &[GeneratingFunction], phi: &GeneratingFunction) -> Result<bool> {
    let mut index: BTreeMap<(usize, Monomial), usize> = BTreeMap::new();
    let mut to_row = |g: &GeneratingFunction| -> Result<SparseRow> {
        let mut row = SparseRow::new();
        for (key, q) in polynomial_keys(g)? {
            let next = index.len();
            let col = *index.entry(key).or_insert(next);
            row.insert(col, q);
        }
        Ok(row)
    };
    let rows = basis.iter().map(&mut to_row).collect::<Result<Vec<_>>>()?;
    let target = to_row(phi)?;
    Ok(linalg::in_span(&rows, &target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ansatz_size_and_order() {
        let kdv = PdeSystem::kdv();
        let u = ansatz_unknowns(&kdv, 1, &AnsatzSpec::new(1, 2, 0)).unwrap();
        // monomials of degree ≤ 2 in u, u_x
        assert_eq!(u.len(), 6);
        assert_eq!(jet_order(&u[0].1), 1);
        assert!(u.last().unwrap().1.is_one());
        let burgers = PdeSystem::burgers();
        assert_eq!(
            ansatz_unknowns(&burgers, 1, &AnsatzSpec::new(2, 2, 1)).unwrap().len(),
            30
        );
        let tight = AnsatzSpec::new(5, 3, 0).with_limit(10);
        assert!(matches!(
            ansatz_unknowns(&kdv, 1, &tight),
            Err(Error::AnsatzTooLarge { size: 84, limit: 10 })
        ));
    }
}
