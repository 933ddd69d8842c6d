//! Total derivatives and evolutionary derivations on the free jet space.

use std::collections::HashMap;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{parse, Coordinate, JetExpr, MultiIndex};

/// The `m`-tuple `(φ¹, …, φᵐ)` characterizing an evolutionary field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GeneratingFunction(pub Vec<JetExpr>);

impl GeneratingFunction {
    pub fn new(components: Vec<JetExpr>) -> Self {
        GeneratingFunction(components.into_iter().map(|c| c.normalize()).collect())
    }

    pub fn scalar(phi: JetExpr) -> Self {
        GeneratingFunction(vec![phi])
    }

    /// Parse `;`-separated components.
    pub fn parse(text: &str, ctx: &JetContext) -> Result<Self> {
        let parts: Vec<&str> = text.split(';').collect();
        if parts.len() != ctx.n_dependent() {
            return Err(Error::ShapeMismatch {
                expected: ctx.n_dependent(),
                got: parts.len(),
            });
        }
        parts
            .into_iter()
            .map(|p| parse(p, ctx))
            .collect::<Result<Vec<_>>>()
            .map(GeneratingFunction)
    }

    pub fn components(&self) -> &[JetExpr] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(JetExpr::is_zero)
    }

    pub fn to_text(&self, ctx: &JetContext) -> String {
        self.0.iter().map(|c| c.to_text(ctx)).collect::<Vec<_>>().join("; ")
    }

    pub fn contains_nonlocal(&self) -> bool {
        self.0.iter().any(JetExpr::contains_nonlocal)
    }
}

fn ensure_local(e: &JetExpr) -> Result<()> {
    if e.contains_nonlocal() {
        Err(Error::NonlocalCoordinate)
    } else {
        Ok(())
    }
}

/// Image of a single coordinate under `D_i` (fiber coordinates are constants).
pub(crate) fn total_derivative_of_coordinate(c: &Coordinate, i: usize) -> Option<JetExpr> {
    match c {
        Coordinate::Independent(k) if *k == i => Some(JetExpr::one()),
        Coordinate::Independent(_) => None,
        Coordinate::Jet(j, s) => Some(JetExpr::var(Coordinate::Jet(*j, s.incremented(i)))),
        Coordinate::Nonlocal(_) => None,
    }
}

/// `D_i` without the fiber check; fiber coordinates behave as constants.
pub(crate) fn total_derivative_free(e: &JetExpr, i: usize) -> JetExpr {
    e.derive(|c| total_derivative_of_coordinate(c, i))
}

/// `D_i(e) = ∂e/∂x_i + Σ u^j_{σ+1_i} ∂e/∂u^j_σ`.
pub fn total_derivative(e: &JetExpr, i: usize) -> Result<JetExpr> {
    ensure_local(e)?;
    Ok(total_derivative_free(e, i))
}

/// `D_σ = D_1^{σ_1} ⋯ D_n^{σ_n}`.
pub fn total_derivative_multi(e: &JetExpr, sigma: &MultiIndex) -> Result<JetExpr> {
    ensure_local(e)?;
    let mut out = e.clone();
    for i in 0..sigma.len() {
        for _ in 0..sigma.get(i) {
            out = total_derivative_free(&out, i);
        }
    }
    Ok(out)
}

/// Memoized `D_σ(f)` for a fixed `f`, built by single steps from smaller indices.
pub(crate) struct DerivativeTable<'a, F>
where
    F: Fn(&JetExpr, usize) -> Result<JetExpr>,
{
    step: &'a F,
    base: JetExpr,
    table: HashMap<MultiIndex, JetExpr>,
}

impl<'a, F> DerivativeTable<'a, F>
where
    F: Fn(&JetExpr, usize) -> Result<JetExpr>,
{
    pub(crate) fn new(base: JetExpr, step: &'a F) -> Self {
        DerivativeTable {
            step,
            base,
            table: HashMap::new(),
        }
    }

    pub(crate) fn get(&mut self, sigma: &MultiIndex) -> Result<JetExpr> {
        if sigma.is_zero() {
            return Ok(self.base.clone());
        }
        if let Some(v) = self.table.get(sigma) {
            return Ok(v.clone());
        }
        // Last direction is applied last: D_σ = D_n ∘ D_{σ - 1_n}.
        let i = (0..sigma.len())
            .rev()
            .find(|&i| sigma.get(i) > 0)
            .expect("nonzero index");
        let prev = sigma.decremented(i).expect("positive exponent");
        let lower = self.get(&prev)?;
        let v = (self.step)(&lower, i)?;
        self.table.insert(sigma.clone(), v.clone());
        Ok(v)
    }
}

/// `Э_φ(e) = Σ D_σ(φ^j) ∂e/∂u^j_σ` over the jet coordinates occurring in `e`.
pub fn evolutionary_derivation(phi: &GeneratingFunction, e: &JetExpr) -> Result<JetExpr> {
    ensure_local(e)?;
    for c in phi.components() {
        ensure_local(c)?;
    }
    let step = |f: &JetExpr, i: usize| Ok(total_derivative_free(f, i));
    let mut tables: Vec<_> = phi
        .components()
        .iter()
        .map(|c| DerivativeTable::new(c.clone(), &step))
        .collect();
    let mut failure = None;
    let out = e.derive(|c| match c {
        Coordinate::Jet(j, s) => match tables.get_mut(*j) {
            Some(t) => match t.get(s) {
                Ok(v) => Some(v),
                Err(err) => {
                    failure = Some(err);
                    None
                }
            },
            None => {
                failure = Some(Error::ShapeMismatch {
                    expected: j + 1,
                    got: phi.len(),
                });
                None
            }
        },
        _ => None,
    });
    match failure {
        Some(err) => Err(err),
        None => Ok(out),
    }
}
