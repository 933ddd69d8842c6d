//! Solved-form PDE systems and reduction to the infinite prolongation.
//!
//! A system is a list of equations `u^{j_s}_{τ_s} = g_s`. Jet coordinates are
//! ranked lexicographically with the last declared independent variable most
//! significant (`u_t` outranks every pure `x`-derivative), then by dependent
//! index. Every right-hand side must be ranking-lower than its leader and
//! free of leader consequences, so replacing `u^{j_s}_{τ_s+σ}` by
//! `D_σ(g_s)` strictly lowers the ranking and reduction terminates.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{parse, Coordinate, JetExpr, MultiIndex};
use crate::textfile::{parse_entries, split_names, Entry};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub leader: Coordinate,
    pub rhs: JetExpr,
}

impl Equation {
    fn leader_parts(&self) -> (usize, &MultiIndex) {
        match &self.leader {
            Coordinate::Jet(j, s) => (*j, s),
            _ => unreachable!("leaders are jet coordinates"),
        }
    }
}

struct Inner {
    ctx: JetContext,
    equations: Vec<Equation>,
    memo: RwLock<HashMap<Coordinate, JetExpr>>,
}

/// An immutable, validated solved-form system. Cloning shares the reduction cache.
#[derive(Clone)]
pub struct PdeSystem {
    inner: Arc<Inner>,
}

impl std::fmt::Debug for PdeSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdeSystem")
            .field("ctx", &self.inner.ctx)
            .field("equations", &self.inner.equations)
            .finish()
    }
}

impl PartialEq for PdeSystem {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.ctx == other.inner.ctx && self.inner.equations == other.inner.equations)
    }
}

/// Ranking of jet coordinates `(j, σ)`.
pub fn ranking_cmp(a: (usize, &MultiIndex), b: (usize, &MultiIndex)) -> Ordering {
    let (ja, sa) = a;
    let (jb, sb) = b;
    sa.exponents()
        .iter()
        .rev()
        .cmp(sb.exponents().iter().rev())
        .then(ja.cmp(&jb))
}

impl PdeSystem {
    /// Validate and build a system from `(leader, rhs)` pairs.
    pub fn new(ctx: JetContext, equations: Vec<(Coordinate, JetExpr)>) -> Result<Self> {
        if ctx.n_fibers() > 0 {
            return Err(Error::InvalidSystem(
                "a base system cannot declare fiber coordinates".into(),
            ));
        }
        let equations: Vec<Equation> = equations
            .into_iter()
            .map(|(leader, rhs)| Equation {
                leader,
                rhs: rhs.normalize(),
            })
            .collect();
        for eq in &equations {
            match &eq.leader {
                Coordinate::Jet(..) if ctx.admits(&eq.leader) => {}
                _ => {
                    return Err(Error::InvalidSystem(format!(
                        "leader `{}` is not a jet coordinate",
                        ctx.coordinate_name(&eq.leader)
                    )))
                }
            }
        }
        for (a, ea) in equations.iter().enumerate() {
            for eb in &equations[a + 1..] {
                let (ja, ta) = ea.leader_parts();
                let (jb, tb) = eb.leader_parts();
                if ja == jb && (ta.divides(tb) || tb.divides(ta)) {
                    return Err(Error::InvalidSystem(format!(
                        "leaders `{}` and `{}` overlap",
                        ctx.coordinate_name(&ea.leader),
                        ctx.coordinate_name(&eb.leader)
                    )));
                }
            }
        }
        let sys = PdeSystem {
            inner: Arc::new(Inner {
                ctx,
                equations,
                memo: RwLock::new(HashMap::new()),
            }),
        };
        sys.validate_right_hand_sides()?;
        sys.check_compatibility()?;
        Ok(sys)
    }

    fn validate_right_hand_sides(&self) -> Result<()> {
        let ctx = &self.inner.ctx;
        for eq in &self.inner.equations {
            let (jl, tl) = eq.leader_parts();
            for c in eq.rhs.coordinates() {
                if !ctx.admits(&c) || c.is_nonlocal() {
                    return Err(Error::InvalidSystem(
                        "right-hand side uses an undeclared coordinate".into(),
                    ));
                }
                if let Coordinate::Jet(j, s) = &c {
                    if self.leader_for(*j, s).is_some() {
                        return Err(Error::InvalidSystem(format!(
                            "right-hand side of `{}` mentions `{}`, which is determined by a leader",
                            ctx.coordinate_name(&eq.leader),
                            ctx.coordinate_name(&c)
                        )));
                    }
                    if ranking_cmp((*j, s), (jl, tl)) != Ordering::Less {
                        return Err(Error::InvalidSystem(format!(
                            "`{}` in the right-hand side of `{}` is not ranking-lower than the leader",
                            ctx.coordinate_name(&c),
                            ctx.coordinate_name(&eq.leader)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Cross-derivatives of two leaders of one dependent variable must agree.
    fn check_compatibility(&self) -> Result<()> {
        let eqs = &self.inner.equations;
        for (a, ea) in eqs.iter().enumerate() {
            for eb in &eqs[a + 1..] {
                let (ja, ta) = ea.leader_parts();
                let (jb, tb) = eb.leader_parts();
                if ja != jb {
                    continue;
                }
                let lcm = ta.lcm(tb);
                let via_a = self.derive_along(&ea.rhs, &lcm.checked_sub(ta).expect("lcm"))?;
                let via_b = self.derive_along(&eb.rhs, &lcm.checked_sub(tb).expect("lcm"))?;
                if via_a != via_b {
                    return Err(Error::InvalidSystem(format!(
                        "leaders `{}` and `{}` produce an integrability condition at `{}`",
                        self.inner.ctx.coordinate_name(&ea.leader),
                        self.inner.ctx.coordinate_name(&eb.leader),
                        self.inner.ctx.coordinate_name(&Coordinate::Jet(ja, lcm))
                    )));
                }
            }
        }
        Ok(())
    }

    fn derive_along(&self, e: &JetExpr, sigma: &MultiIndex) -> Result<JetExpr> {
        let mut out = e.clone();
        for i in 0..sigma.len() {
            for _ in 0..sigma.get(i) {
                out = self.restricted_total_derivative(&out, i)?;
            }
        }
        Ok(out)
    }

    /// Parse `lhs = rhs` equation strings.
    pub fn parse(ctx: JetContext, equations: &[&str]) -> Result<Self> {
        let mut eqs = Vec::new();
        for text in equations {
            let (lhs, rhs) = text
                .split_once('=')
                .ok_or_else(|| Error::InvalidSystem(format!("equation `{text}` has no `=`")))?;
            eqs.push(parse_equation(&ctx, lhs, rhs)?);
        }
        Self::new(ctx, eqs)
    }

    /// Read the system file format.
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        Self::from_entries(&entries, false)
    }

    /// Build from parsed entries; `allow_other` skips keys not about the base system.
    pub fn from_entries(entries: &[Entry], allow_other: bool) -> Result<Self> {
        let mut independent = None;
        let mut dependent = None;
        let mut equations = Vec::new();
        for e in entries {
            match e.key.as_str() {
                "independent" => independent = Some(split_names(&e.value)),
                "dependent" => dependent = Some(split_names(&e.value)),
                "equation" => equations.push(e),
                _ if allow_other => {}
                other => {
                    return Err(Error::File {
                        line: e.line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        let independent = independent.ok_or(Error::File {
            line: 0,
            msg: "missing `independent`".into(),
        })?;
        let dependent = dependent.ok_or(Error::File {
            line: 0,
            msg: "missing `dependent`".into(),
        })?;
        let ctx = JetContext::new(&independent, &dependent)?;
        let mut eqs = Vec::new();
        for e in equations {
            let (lhs, rhs) = e.value.split_once('=').ok_or_else(|| Error::File {
                line: e.line,
                msg: "equation needs `lhs = rhs`".into(),
            })?;
            eqs.push(parse_equation(&ctx, lhs, rhs)?);
        }
        Self::new(ctx, eqs)
    }

    /// Built-in example systems: `kdv`, `burgers`, `heat`.
    pub fn builtin(name: &str) -> Option<Self> {
        let rhs = match name {
            "kdv" => "u_t = u*u_x + u_xxx",
            "burgers" => "u_t = u_xx + u*u_x",
            "heat" => "u_t = u_xx",
            _ => return None,
        };
        let ctx = JetContext::new(&["x", "t"], &["u"]).expect("valid builtin context");
        Some(Self::parse(ctx, &[rhs]).expect("valid builtin system"))
    }

    pub fn kdv() -> Self {
        Self::builtin("kdv").expect("builtin")
    }

    pub fn burgers() -> Self {
        Self::builtin("burgers").expect("builtin")
    }

    pub fn heat() -> Self {
        Self::builtin("heat").expect("builtin")
    }

    pub fn ctx(&self) -> &JetContext {
        &self.inner.ctx
    }

    pub fn equations(&self) -> &[Equation] {
        &self.inner.equations
    }

    /// The forms `F_s = u^{j_s}_{τ_s} - g_s`.
    pub fn forms(&self) -> Vec<JetExpr> {
        self.inner
            .equations
            .iter()
            .map(|eq| &JetExpr::var(eq.leader.clone()) - &eq.rhs)
            .collect()
    }

    /// Index of the first equation whose leader divides `u^j_σ`.
    pub fn leader_for(&self, j: usize, sigma: &MultiIndex) -> Option<usize> {
        self.inner.equations.iter().position(|eq| {
            let (jl, tl) = eq.leader_parts();
            jl == j && tl.divides(sigma)
        })
    }

    /// Whether `c` is a coordinate on `E∞` (independent, fiber, or parametric jet).
    pub fn is_internal(&self, c: &Coordinate) -> bool {
        match c {
            Coordinate::Jet(j, s) => self.leader_for(*j, s).is_none(),
            _ => true,
        }
    }

    /// Internal jet coordinates of order at most `max_order`, ascending.
    pub fn internal_coordinates(&self, max_order: u32) -> Vec<Coordinate> {
        let n = self.inner.ctx.n_independent();
        let mut out = Vec::new();
        for j in 0..self.inner.ctx.n_dependent() {
            for s in MultiIndex::all_up_to(n, max_order) {
                let c = Coordinate::Jet(j, s);
                if self.is_internal(&c) {
                    out.push(c);
                }
            }
        }
        out
    }

    /// `D_σ(F_s)` on the free jet space.
    pub fn prolong_equation(&self, s: usize, sigma: &MultiIndex) -> Result<JetExpr> {
        let f = self.forms().into_iter().nth(s).ok_or(Error::ShapeMismatch {
            expected: self.inner.equations.len(),
            got: s + 1,
        })?;
        crate::jet::total_derivative_multi(&f, sigma)
    }

    /// Normal form of a jet coordinate on `E∞`.
    pub fn reduce_coordinate(&self, c: &Coordinate) -> Result<JetExpr> {
        let (j, sigma) = match c {
            Coordinate::Jet(j, s) => (*j, s),
            _ => return Ok(JetExpr::var(c.clone())),
        };
        let Some(s) = self.leader_for(j, sigma) else {
            return Ok(JetExpr::var(c.clone()));
        };
        if let Some(v) = self.inner.memo.read().expect("memo lock").get(c) {
            return Ok(v.clone());
        }
        let eq = &self.inner.equations[s];
        let (_, tau) = eq.leader_parts();
        let value = if sigma == tau {
            eq.rhs.clone()
        } else {
            let i = (0..sigma.len())
                .rev()
                .find(|&i| sigma.get(i) > tau.get(i))
                .expect("strict multiple of the leader");
            let lower = Coordinate::Jet(j, sigma.decremented(i).expect("positive"));
            let base = self.reduce_coordinate(&lower)?;
            self.restricted_total_derivative(&base, i)?
        };
        self.inner
            .memo
            .write()
            .expect("memo lock")
            .insert(c.clone(), value.clone());
        Ok(value)
    }

    /// Normal form modulo all prolonged equations.
    pub fn reduce(&self, e: &JetExpr) -> Result<JetExpr> {
        let mut failure = None;
        let out = e.substitute_with(|c| {
            if self.is_internal(c) {
                return None;
            }
            match self.reduce_coordinate(c) {
                Ok(v) => Some(v),
                Err(err) => {
                    failure = Some(err);
                    None
                }
            }
        });
        match failure {
            Some(err) => Err(err),
            None => out,
        }
    }

    /// `D̄_i(e) = reduce(D_i e)`. Fiber coordinates are treated as constants.
    pub fn restricted_total_derivative(&self, e: &JetExpr, i: usize) -> Result<JetExpr> {
        let e = if e.coordinates().iter().all(|c| self.is_internal(c)) {
            e.clone()
        } else {
            self.reduce(e)?
        };
        let mut failure = None;
        let out = e.derive(|c| match c {
            Coordinate::Independent(k) => (*k == i).then(JetExpr::one),
            Coordinate::Jet(j, s) => match self.reduce_coordinate(&Coordinate::Jet(*j, s.incremented(i))) {
                Ok(v) => Some(v),
                Err(err) => {
                    failure = Some(err);
                    None
                }
            },
            Coordinate::Nonlocal(_) => None,
        });
        match failure {
            Some(err) => Err(err),
            None => Ok(out),
        }
    }

    /// `D̄_σ` applied by repeated single steps.
    pub fn restricted_total_derivative_multi(&self, e: &JetExpr, sigma: &MultiIndex) -> Result<JetExpr> {
        self.derive_along(e, sigma)
    }

    /// Render in the system file format.
    pub fn to_file_text(&self) -> String {
        let ctx = &self.inner.ctx;
        let mut s = format!(
            "independent = {}\ndependent = {}\n",
            ctx.independent().join(", "),
            ctx.dependent().join(", ")
        );
        for eq in &self.inner.equations {
            s.push_str(&format!(
                "equation = {} = {}\n",
                ctx.coordinate_name(&eq.leader),
                eq.rhs.to_text(ctx)
            ));
        }
        s
    }

    /// Equations as `leader = rhs` strings.
    pub fn equation_texts(&self) -> Vec<String> {
        let ctx = &self.inner.ctx;
        self.inner
            .equations
            .iter()
            .map(|eq| format!("{} = {}", ctx.coordinate_name(&eq.leader), eq.rhs.to_text(ctx)))
            .collect()
    }
}

fn parse_equation(ctx: &JetContext, lhs: &str, rhs: &str) -> Result<(Coordinate, JetExpr)> {
    let l = parse(lhs, ctx)?;
    let leader = l
        .as_polynomial()
        .filter(|p| p.len() == 1)
        .and_then(|p| p.terms().next())
        .filter(|(m, q)| num_traits::One::is_one(*q) && m.factors().len() == 1 && m.factors()[0].1 == 1)
        .map(|(m, _)| m.factors()[0].0.clone())
        .filter(Coordinate::is_jet)
        .ok_or_else(|| {
            Error::InvalidSystem(format!(
                "left-hand side `{}` is not a single jet coordinate",
                lhs.trim()
            ))
        })?;
    Ok((leader, parse(rhs, ctx)?))
}
