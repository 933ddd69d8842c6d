//! Finite-dimensional coverings: `D̂_i = D̄_i + V_i` with vertical `V_i`.

use std::collections::BTreeMap;

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{parse, Coordinate, JetExpr, MultiIndex, Rational};
use crate::jet::{DerivativeTable, GeneratingFunction};
use crate::linear::CDiffOp;
use crate::system::PdeSystem;
use crate::textfile::{bracket_key, parse_entries, split_names, Entry};

/// `Σ_a f_a ∂/∂w_a`, zero coefficients omitted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerticalField(BTreeMap<usize, JetExpr>);

impl VerticalField {
    pub fn new(coeffs: BTreeMap<usize, JetExpr>) -> Self {
        VerticalField(
            coeffs
                .into_iter()
                .map(|(a, f)| (a, f.normalize()))
                .filter(|(_, f)| !f.is_zero())
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `∂/∂w_a`.
    pub fn basis(a: usize) -> Self {
        VerticalField(BTreeMap::from([(a, JetExpr::one())]))
    }

    pub fn coeff(&self, a: usize) -> JetExpr {
        self.0.get(&a).cloned().unwrap_or_else(JetExpr::zero)
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, JetExpr> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `V(e) = Σ_a f_a ∂e/∂w_a`.
    pub fn apply(&self, e: &JetExpr) -> JetExpr {
        self.0
            .iter()
            .map(|(a, f)| f * &e.partial(&Coordinate::Nonlocal(*a)))
            .sum()
    }

    pub fn add(&self, other: &VerticalField) -> Self {
        let mut out = self.0.clone();
        for (a, g) in &other.0 {
            let sum = &self.coeff(*a) + g;
            out.insert(*a, sum);
        }
        Self::new(out)
    }

    pub fn scale(&self, s: &JetExpr) -> Self {
        Self::new(self.0.iter().map(|(a, f)| (*a, s * f)).collect())
    }

    /// `[X, Y] = Σ_a (X(g_a) - Y(f_a)) ∂/∂w_a`.
    pub fn bracket(&self, other: &VerticalField) -> Self {
        let keys: std::collections::BTreeSet<usize> = self
            .0
            .keys()
            .chain(other.0.keys())
            .copied()
            .chain(self.0.values().chain(other.0.values()).flat_map(|f| {
                f.coordinates().into_iter().filter_map(|c| match c {
                    Coordinate::Nonlocal(a) => Some(a),
                    _ => None,
                })
            }))
            .collect();
        Self::new(
            keys.into_iter()
                .map(|a| (a, &self.apply(&other.coeff(a)) - &other.apply(&self.coeff(a))))
                .collect(),
        )
    }

    fn max_fiber(&self) -> Option<usize> {
        self.0
            .iter()
            .flat_map(|(a, f)| {
                std::iter::once(*a).chain(f.coordinates().into_iter().filter_map(|c| match c {
                    Coordinate::Nonlocal(b) => Some(b),
                    _ => None,
                }))
            })
            .max()
    }

    /// `f_1*∂w_1 + …` style rendering.
    pub fn to_text(&self, ctx: &JetContext) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.0
            .iter()
            .map(|(a, f)| format!("({})*d/d{}", f.to_text(ctx), ctx.fibers()[*a]))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// One flatness residual for the pair `i < j` and fiber coordinate `fiber`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatnessResidual {
    pub i: usize,
    pub j: usize,
    pub fiber: usize,
    pub residual: JetExpr,
}

#[derive(Clone, Debug)]
pub struct Covering {
    base: PdeSystem,
    ctx: JetContext,
    fields: Vec<VerticalField>,
}

impl Covering {
    /// `fields[i]` is `V_i`; coefficients may use internal coordinates of
    /// `base` and the fiber coordinates.
    pub fn new<S: AsRef<str>>(base: PdeSystem, fibers: &[S], fields: Vec<VerticalField>) -> Result<Self> {
        let ctx = base.ctx().extended(fibers)?;
        let n = ctx.n_independent();
        if fields.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        for v in &fields {
            if v.max_fiber().is_some_and(|a| a >= ctx.n_fibers()) {
                return Err(Error::MismatchedFibers(format!(
                    "field refers to fiber {} of {}",
                    v.max_fiber().unwrap_or(0) + 1,
                    ctx.n_fibers()
                )));
            }
            for f in v.0.values() {
                if let Some(c) = f.coordinates().into_iter().find(|c| !base.is_internal(c)) {
                    return Err(Error::InvalidSystem(format!(
                        "covering coefficient uses `{}`, which is not an internal coordinate",
                        ctx.coordinate_name(&c)
                    )));
                }
            }
        }
        Ok(Covering { base, ctx, fields })
    }

    /// Base system keys plus `fiber = w` and `V_x[w] = …` lines.
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let base = PdeSystem::from_entries(&entries, true)?;
        let fibers = fiber_names(&entries);
        let ctx = base.ctx().extended(&fibers)?;
        let mut fields = vec![BTreeMap::new(); ctx.n_independent()];
        for e in &entries {
            match e.key.as_str() {
                "independent" | "dependent" | "equation" | "fiber" => {}
                key => {
                    let (i, a) = bracket_key(key)
                        .and_then(|(name, fiber)| {
                            let i = ctx.independent_index(name.strip_prefix("V_")?)?;
                            Some((i, ctx.fiber_index(fiber)?))
                        })
                        .ok_or_else(|| Error::File {
                            line: e.line,
                            msg: format!("unknown key `{key}`"),
                        })?;
                    fields[i].insert(a, parse(&e.value, &ctx)?);
                }
            }
        }
        Self::new(base, &fibers, fields.into_iter().map(VerticalField::new).collect())
    }

    pub fn to_text(&self) -> String {
        let mut s = self.base.to_file_text();
        if self.ctx.n_fibers() > 0 {
            s.push_str(&format!("fiber = {}\n", self.ctx.fibers().join(", ")));
        }
        for (i, v) in self.fields.iter().enumerate() {
            for (a, f) in &v.0 {
                s.push_str(&format!(
                    "V_{}[{}] = {}\n",
                    self.ctx.independent()[i],
                    self.ctx.fibers()[*a],
                    f.to_text(&self.ctx)
                ));
            }
        }
        s
    }

    pub fn base(&self) -> &PdeSystem {
        &self.base
    }

    /// Base declarations extended by the fiber coordinates.
    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn field(&self, i: usize) -> &VerticalField {
        &self.fields[i]
    }

    /// `D̂_i(e) = D̄_i(e) + V_i(e)`.
    pub fn extended_total_derivative(&self, e: &JetExpr, i: usize) -> Result<JetExpr> {
        Ok(&self.base.restricted_total_derivative(e, i)? + &self.fields[i].apply(e))
    }

    /// `D̂_i(V_j^a) - D̂_j(V_i^a)` for every `i < j` and fiber `a`.
    pub fn check_flatness(&self) -> Result<Vec<FlatnessResidual>> {
        let n = self.ctx.n_independent();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for a in 0..self.ctx.n_fibers() {
                    let lhs = self.extended_total_derivative(&self.fields[j].coeff(a), i)?;
                    let rhs = self.extended_total_derivative(&self.fields[i].coeff(a), j)?;
                    out.push(FlatnessResidual {
                        i,
                        j,
                        fiber: a,
                        residual: &lhs - &rhs,
                    });
                }
            }
        }
        Ok(out)
    }

    pub fn is_flat(&self) -> Result<bool> {
        Ok(self.check_flatness()?.iter().all(|r| r.residual.is_zero()))
    }

    /// Determining and fiber-compatibility residuals of the pair `(φ, ψ)`.
    pub fn nonlocal_symmetry_residual(&self, phi: &GeneratingFunction, psi: &[JetExpr]) -> Result<NonlocalResidual> {
        let m = self.ctx.n_dependent();
        let r = self.ctx.n_fibers();
        if phi.len() != m {
            return Err(Error::ShapeMismatch {
                expected: m,
                got: phi.len(),
            });
        }
        if psi.len() != r {
            return Err(Error::ShapeMismatch {
                expected: r,
                got: psi.len(),
            });
        }
        let step = |e: &JetExpr, i: usize| self.extended_total_derivative(e, i);
        let mut tables = phi
            .components()
            .iter()
            .map(|c| Ok(DerivativeTable::new(self.base.reduce(c)?, &step)))
            .collect::<Result<Vec<_>>>()?;
        let lin = CDiffOp::linearize(&self.base.forms(), self.base.ctx())?;
        let mut determining = Vec::with_capacity(lin.rows());
        for s in 0..lin.rows() {
            let mut acc = JetExpr::zero();
            for (j, table) in tables.iter_mut().enumerate() {
                for (sigma, a) in lin.entry(s, j) {
                    acc = &acc + &(&self.base.reduce(a)? * &table.get(sigma)?);
                }
            }
            determining.push(acc);
        }
        let mut fibers = Vec::new();
        for i in 0..self.ctx.n_independent() {
            for (a, psi_a) in psi.iter().enumerate() {
                let lifted = self.lifted_derivation(&mut tables, psi, &self.fields[i].coeff(a))?;
                let residual = &self.extended_total_derivative(psi_a, i)? - &lifted;
                fibers.push(FiberResidual { i, fiber: a, residual });
            }
        }
        Ok(NonlocalResidual { determining, fibers })
    }

    /// `Э̂_{(φ,ψ)}(f)`: jets weighted by `D̂_σ φ`, fibers by `ψ`.
    fn lifted_derivation<F>(
        &self,
        tables: &mut [DerivativeTable<'_, F>],
        psi: &[JetExpr],
        f: &JetExpr,
    ) -> Result<JetExpr>
    where
        F: Fn(&JetExpr, usize) -> Result<JetExpr>,
    {
        let mut failure = None;
        let out = f.derive(|c| match c {
            Coordinate::Jet(j, s) => match tables[*j].get(s) {
                Ok(v) => Some(v),
                Err(e) => {
                    failure = Some(e);
                    None
                }
            },
            Coordinate::Nonlocal(b) => Some(psi[*b].clone()),
            Coordinate::Independent(_) => None,
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

fn fiber_names(entries: &[Entry]) -> Vec<String> {
    entries
        .iter()
        .filter(|e| e.key == "fiber")
        .flat_map(|e| split_names(&e.value))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FiberResidual {
    pub i: usize,
    pub fiber: usize,
    pub residual: JetExpr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalResidual {
    /// `ℓ̂_F(φ)`, with `D̂_σ` in place of `D̄_σ`.
    pub determining: Vec<JetExpr>,
    /// `D̂_i(ψ_a) - Э̂_{(φ,ψ)}(V_i^a)`.
    pub fibers: Vec<FiberResidual>,
}

impl NonlocalResidual {
    pub fn is_symmetry(&self) -> bool {
        self.determining.iter().all(JetExpr::is_zero) && self.fibers.iter().all(|r| r.residual.is_zero())
    }
}

/// How the `u`-free quadratic term of `V_t` is read in the KdV
/// Wahlquist–Estabrook ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeReading {
    /// `(1/2)(u² B + [B,[C,B]])`.
    Corrected,
    /// `(1/2)(B + [B,[C,B]])`, as printed in the source formula.
    Literal,
}

impl WeReading {
    pub fn name(self) -> &'static str {
        match self {
            WeReading::Corrected => "corrected",
            WeReading::Literal => "literal",
        }
    }
}

/// A concrete representation of the four generators `A, B, C, D` over fiber
/// coordinates of a KdV covering.
#[derive(Clone, Debug)]
pub struct WeRepresentation {
    pub fibers: Vec<String>,
    pub a: VerticalField,
    pub b: VerticalField,
    pub c: VerticalField,
    pub d: VerticalField,
}

impl WeRepresentation {
    /// `fiber = w` plus `A[w] = …` style lines; missing entries are zero.
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let fibers = fiber_names(&entries);
        let ctx = PdeSystem::kdv().ctx().extended(&fibers)?;
        let mut maps = vec![BTreeMap::new(); 4];
        for e in &entries {
            if e.key == "fiber" {
                continue;
            }
            let (k, a) = bracket_key(&e.key)
                .and_then(|(name, fiber)| {
                    let k = ["A", "B", "C", "D"].iter().position(|g| *g == name)?;
                    let a = ctx.fiber_index(fiber)?;
                    Some((k, a))
                })
                .ok_or_else(|| Error::File {
                    line: e.line,
                    msg: format!("unknown key `{}`", e.key),
                })?;
            maps[k].insert(a, parse(&e.value, &ctx)?);
        }
        let mut it = maps.into_iter().map(VerticalField::new);
        let mut next = || it.next().expect("four generators");
        Ok(WeRepresentation {
            fibers,
            a: next(),
            b: next(),
            c: next(),
            d: next(),
        })
    }

    pub fn ctx(&self) -> Result<JetContext> {
        PdeSystem::kdv().ctx().extended(&self.fibers)
    }

    /// The defining relations, each as `(label, value)`; all hold iff every value is zero.
    pub fn relations(&self) -> Vec<(&'static str, VerticalField)> {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let cb = c.bracket(b);
        let ccb = c.bracket(&cb);
        let three_halves = JetExpr::constant(Rational::new(3.into(), 2.into()));
        vec![
            ("[A,B]", a.bracket(b)),
            ("[A,C]", a.bracket(c)),
            ("[C,D]", c.bracket(d)),
            ("[B,D] + [C,[C,[C,B]]]", b.bracket(d).add(&c.bracket(&ccb))),
            ("[B,[B,[B,C]]]", b.bracket(&b.bracket(&b.bracket(c)))),
            (
                "[A,D] + 3/2*[B,[C,[C,B]]]",
                a.bracket(d).add(&b.bracket(&ccb).scale(&three_halves)),
            ),
        ]
    }
}

/// The assembled covering together with the relation report.
#[derive(Clone, Debug)]
pub struct WeAssembly {
    pub covering: Covering,
    pub relations: Vec<(&'static str, VerticalField)>,
}

impl WeAssembly {
    pub fn relations_hold(&self) -> bool {
        self.relations.iter().all(|(_, v)| v.is_zero())
    }
}

/// `V_x = u²A + uB + C` and the matching `V_t` over `u_t = u u_x + u_xxx`.
pub fn we_ansatz(rep: &WeRepresentation, reading: WeReading) -> Result<WeAssembly> {
    let base = PdeSystem::kdv();
    let r = rep.fibers.len();
    for (name, v) in [("A", &rep.a), ("B", &rep.b), ("C", &rep.c), ("D", &rep.d)] {
        if v.max_fiber().is_some_and(|a| a >= r) {
            return Err(Error::MismatchedFibers(format!(
                "{name} uses a fiber outside the {r} declared"
            )));
        }
    }
    let jet = |k: u32| JetExpr::var(Coordinate::Jet(0, MultiIndex::from_slice(&[k, 0])));
    let q = |p: i64, d: i64| JetExpr::constant(Rational::new(p.into(), d.into()));
    let (u, u1, u2) = (jet(0), jet(1), jet(2));
    let (a, b, c, d) = (&rep.a, &rep.b, &rep.c, &rep.d);
    let cb = c.bracket(b);
    let bcb = b.bracket(&cb);
    let ccb = c.bracket(&cb);
    let vx = a.scale(&u.pow(2)).add(&b.scale(&u)).add(c);
    let quadratic = match reading {
        WeReading::Corrected => b.scale(&u.pow(2)),
        WeReading::Literal => b.clone(),
    };
    let vt = a
        .scale(&(&q(2, 1) * &(&u * &u2)))
        .add(&b.scale(&u2))
        .add(&a.scale(&-u1.pow(2)))
        .add(&b.bracket(c).scale(&u1))
        .add(&a.scale(&(&q(2, 3) * &u.pow(3))))
        .add(&quadratic.add(&bcb).scale(&q(1, 2)))
        .add(&ccb.scale(&u))
        .add(d);
    let covering = Covering::new(base, &rep.fibers, vec![vx, vt])?;
    Ok(WeAssembly {
        covering,
        relations: rep.relations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const POTENTIAL: &str = "independent = x, t\ndependent = u\nequation = u_t = u*u_x + u_xxx\nfiber = w\nV_x[w] = u\nV_t[w] = u_xx + 1/2*u^2\n";

    #[test]
    fn potential_covering() {
        let cov = Covering::from_text(POTENTIAL).unwrap();
        let w = parse("w", cov.ctx()).unwrap();
        assert_eq!(
            cov.extended_total_derivative(&w, 0).unwrap(),
            parse("u", cov.ctx()).unwrap()
        );
        assert_eq!(
            cov.extended_total_derivative(&w, 1).unwrap(),
            parse("u_xx + 1/2*u^2", cov.ctx()).unwrap()
        );
        let e = parse("u_x*u", cov.ctx()).unwrap();
        assert_eq!(
            cov.extended_total_derivative(&e, 1).unwrap(),
            cov.base().restricted_total_derivative(&e, 1).unwrap()
        );
        let res = cov.check_flatness().unwrap();
        assert_eq!(res.len(), 1);
        assert!(res[0].residual.is_zero());
        assert_eq!(Covering::from_text(&cov.to_text()).unwrap().to_text(), cov.to_text());
    }

    #[test]
    fn perturbed_and_trivial() {
        let cov = Covering::from_text(&POTENTIAL.replace("1/2*u^2", "u^2")).unwrap();
        assert!(!cov.is_flat().unwrap());
        let trivial = Covering::new(PdeSystem::burgers(), &[] as &[&str], vec![VerticalField::zero(); 2]).unwrap();
        assert!(trivial.check_flatness().unwrap().is_empty());
    }

    #[test]
    fn cole_hopf() {
        let text = "independent = x, t\ndependent = v\nequation = v_t = v_xx + v*v_x\nfiber = h\nV_x[h] = h*v/2\nV_t[h] = h*v^2/4 + h*v_x/2\n";
        assert!(Covering::from_text(text).unwrap().is_flat().unwrap());
    }

    #[test]
    fn rejects_bad_coverings() {
        assert!(Covering::from_text(&POTENTIAL.replace("V_x[w] = u", "V_x[w] = u_t")).is_err());
        assert!(Covering::from_text(&POTENTIAL.replace("V_x[w]", "V_y[w]")).is_err());
        assert!(Covering::from_text(&POTENTIAL.replace("fiber = w", "fiber = u")).is_err());
    }

    #[test]
    fn nonlocal_symmetries() {
        let cov = Covering::from_text(POTENTIAL).unwrap();
        let ctx = cov.ctx();
        let phi = GeneratingFunction::parse("u_x", ctx).unwrap();
        let psi = [parse("u", ctx).unwrap()];
        assert!(cov.nonlocal_symmetry_residual(&phi, &psi).unwrap().is_symmetry());
        let zero = GeneratingFunction::parse("0", ctx).unwrap();
        assert!(cov
            .nonlocal_symmetry_residual(&zero, &[JetExpr::zero()])
            .unwrap()
            .is_symmetry());
        let bad = GeneratingFunction::parse("w*u_x", ctx).unwrap();
        assert!(!cov
            .nonlocal_symmetry_residual(&bad, &[JetExpr::zero()])
            .unwrap()
            .is_symmetry());
    }

    #[test]
    fn we_abelian() {
        let rep = WeRepresentation::from_text("fiber = w\nB[w] = 1\n").unwrap();
        let corrected = we_ansatz(&rep, WeReading::Corrected).unwrap();
        assert!(corrected.relations_hold());
        assert!(corrected.covering.is_flat().unwrap());
        let literal = we_ansatz(&rep, WeReading::Literal).unwrap();
        let res = literal.covering.check_flatness().unwrap();
        assert_eq!(res[0].residual, parse("-u*u_x", literal.covering.ctx()).unwrap());
        let empty = we_ansatz(&WeRepresentation::from_text("fiber = w\n").unwrap(), WeReading::Literal).unwrap();
        assert!(empty.relations_hold() && empty.covering.is_flat().unwrap());
        assert!(empty.covering.field(0).is_zero() && empty.covering.field(1).is_zero());
    }
}
