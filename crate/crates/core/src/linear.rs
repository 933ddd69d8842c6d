//! C-differential operators: matrices whose entries are `Σ_σ a_σ D_σ`.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde_json::{json, Value};

use crate::context::JetContext;
use crate::error::{Error, Result};
use crate::expr::{Coordinate, JetExpr, MultiIndex, Rational};
use crate::jet::{total_derivative_free, DerivativeTable, GeneratingFunction};
use crate::system::PdeSystem;

/// One matrix entry: `σ ↦ a_σ`, all coefficients nonzero.
pub type OpEntry = BTreeMap<MultiIndex, JetExpr>;

/// Whether `D_σ` means the free total derivative or its restriction to `E∞`.
#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Free,
    Restricted(PdeSystem),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CDiffOp {
    rows: usize,
    cols: usize,
    n: usize,
    entries: Vec<Vec<OpEntry>>,
    domain: Domain,
}

fn add_into(entry: &mut OpEntry, sigma: MultiIndex, coeff: JetExpr) {
    if coeff.is_zero() {
        return;
    }
    match entry.entry(sigma) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get() + &coeff;
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

impl CDiffOp {
    /// Build from explicit entries (`rows × cols`) over `n` independent variables.
    pub fn from_entries(n: usize, entries: Vec<Vec<OpEntry>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Unsupported("ragged operator matrix".into()));
        }
        let entries = entries
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| {
                        let mut clean = OpEntry::new();
                        for (s, a) in e {
                            add_into(&mut clean, s, a.normalize());
                        }
                        clean
                    })
                    .collect()
            })
            .collect();
        Ok(CDiffOp {
            rows,
            cols,
            n,
            entries,
            domain: Domain::Free,
        })
    }

    /// Scalar operator `a · D_σ`.
    pub fn monomial(coeff: JetExpr, sigma: MultiIndex) -> Self {
        let n = sigma.len();
        let mut e = OpEntry::new();
        add_into(&mut e, sigma, coeff);
        CDiffOp {
            rows: 1,
            cols: 1,
            n,
            entries: vec![vec![e]],
            domain: Domain::Free,
        }
    }

    pub fn identity(m: usize, n: usize) -> Self {
        let entries = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| {
                        let mut e = OpEntry::new();
                        if r == c {
                            e.insert(MultiIndex::zero(n), JetExpr::one());
                        }
                        e
                    })
                    .collect()
            })
            .collect();
        CDiffOp {
            rows: m,
            cols: m,
            n,
            entries,
            domain: Domain::Free,
        }
    }

    pub fn zero(rows: usize, cols: usize, n: usize) -> Self {
        CDiffOp {
            rows,
            cols,
            n,
            entries: vec![vec![OpEntry::new(); cols]; rows],
            domain: Domain::Free,
        }
    }

    /// Universal linearization: entry `(s, j)` is `Σ_σ ∂F_s/∂u^j_σ D_σ`.
    pub fn linearize(forms: &[JetExpr], ctx: &JetContext) -> Result<Self> {
        let n = ctx.n_independent();
        let m = ctx.n_dependent();
        let mut op = Self::zero(forms.len(), m, n);
        for (s, f) in forms.iter().enumerate() {
            if f.contains_nonlocal() {
                return Err(Error::NonlocalCoordinate);
            }
            for c in f.coordinates() {
                if let Coordinate::Jet(j, sigma) = &c {
                    add_into(&mut op.entries[s][*j], sigma.clone(), f.partial(&c));
                }
            }
        }
        Ok(op)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn entry(&self, row: usize, col: usize) -> &OpEntry {
        &self.entries[row][col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(OpEntry::is_empty)
    }

    fn derivative(&self, e: &JetExpr, i: usize) -> Result<JetExpr> {
        match &self.domain {
            Domain::Free => Ok(total_derivative_free(e, i)),
            Domain::Restricted(sys) => sys.restricted_total_derivative(e, i),
        }
    }

    fn derivative_multi(&self, e: &JetExpr, sigma: &MultiIndex) -> Result<JetExpr> {
        let mut out = e.clone();
        for i in 0..sigma.len() {
            for _ in 0..sigma.get(i) {
                out = self.derivative(&out, i)?;
            }
        }
        Ok(out)
    }

    /// Component `s` is `Σ_{j,σ} a^{sj}_σ D_σ(φ^j)`.
    pub fn apply(&self, phi: &GeneratingFunction) -> Result<Vec<JetExpr>> {
        if phi.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: self.cols,
                got: phi.len(),
            });
        }
        let step = |e: &JetExpr, i: usize| self.derivative(e, i);
        let mut tables = phi
            .components()
            .iter()
            .map(|c| -> Result<_> {
                let base = match &self.domain {
                    Domain::Free => c.clone(),
                    Domain::Restricted(sys) => sys.reduce(c)?,
                };
                Ok(DerivativeTable::new(base, &step))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::with_capacity(self.rows);
        for row in &self.entries {
            let mut acc = JetExpr::zero();
            for (j, entry) in row.iter().enumerate() {
                for (sigma, a) in entry {
                    let d = tables[j].get(sigma)?;
                    acc = &acc + &(a * &d);
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Formal adjoint: transpose, with `(a D_σ)* = (-1)^{|σ|} D_σ ∘ a`.
    pub fn adjoint(&self) -> Result<Self> {
        let mut out = Self::zero(self.cols, self.rows, self.n);
        out.domain = self.domain.clone();
        for (s, row) in self.entries.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let target = &mut out.entries[j][s];
                for (sigma, a) in entry {
                    let sign = if sigma.order() % 2 == 0 { 1 } else { -1 };
                    for tau in sigma.sub_indices() {
                        let rest = sigma.checked_sub(&tau).expect("sub-index");
                        let binom = sigma.binomial(&tau) as i64;
                        let coeff = self
                            .derivative_multi(a, &rest)?
                            .scale(&Rational::from_integer((sign * binom).into()));
                        add_into(target, tau, coeff);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Expanded composition `self ∘ other`.
    pub fn compose(&self, other: &CDiffOp) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zero(self.rows, other.cols, self.n);
        out.domain = self.domain.clone();
        for s in 0..self.rows {
            for k in 0..other.cols {
                let target = &mut out.entries[s][k];
                for j in 0..self.cols {
                    for (sigma, a) in &self.entries[s][j] {
                        for (tau, b) in &other.entries[j][k] {
                            // a D_σ ∘ b D_τ = Σ_ρ C(σ,ρ) a D_{σ-ρ}(b) D_{ρ+τ}
                            for rho in sigma.sub_indices() {
                                let rest = sigma.checked_sub(&rho).expect("sub-index");
                                let binom = Rational::from_integer((sigma.binomial(&rho) as i64).into());
                                let coeff = (a * &self.derivative_multi(b, &rest)?).scale(&binom);
                                add_into(target, rho.add(tau), coeff);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self - λ · other`, entrywise.
    pub fn sub_scaled(&self, lambda: &JetExpr, other: &CDiffOp) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        let mut out = self.clone();
        for (s, row) in other.entries.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                for (sigma, b) in entry {
                    add_into(&mut out.entries[s][j], sigma.clone(), -(lambda * b));
                }
            }
        }
        Ok(out)
    }

    /// Coefficients reduced to `E∞`; `D_σ` becomes `D̄_σ`.
    pub fn restrict(&self, sys: &PdeSystem) -> Result<Self> {
        let mut out = Self::zero(self.rows, self.cols, self.n);
        out.domain = Domain::Restricted(sys.clone());
        for (s, row) in self.entries.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                for (sigma, a) in entry {
                    add_into(&mut out.entries[s][j], sigma.clone(), sys.reduce(a)?);
                }
            }
        }
        Ok(out)
    }

    fn entry_text(entry: &OpEntry, ctx: &JetContext) -> String {
        if entry.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (sigma, a)) in entry.iter().enumerate() {
            let d = format!(
                "D[{}]",
                sigma
                    .exponents()
                    .iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            );
            let single = a.is_polynomial() && a.numerator().len() == 1;
            let (neg, body) = if single {
                let (_, q) = a.numerator().terms().next().expect("one term");
                let abs = if q.is_negative() { -a } else { a.clone() };
                let body = if abs.is_one() {
                    d
                } else {
                    format!("{}*{d}", abs.to_text(ctx))
                };
                (q.is_negative(), body)
            } else {
                (false, format!("({})*{d}", a.to_text(ctx)))
            };
            match (k, neg) {
                (0, true) => s.push('-'),
                (0, false) => {}
                (_, true) => s.push_str(" - "),
                (_, false) => s.push_str(" + "),
            }
            s.push_str(&body);
        }
        s
    }

    /// One line `[row,col]: Σ coeff*D[σ]` per entry.
    pub fn to_text(&self, ctx: &JetContext) -> String {
        let mut lines = Vec::new();
        for (s, row) in self.entries.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                lines.push(format!("[{s},{j}]: {}", Self::entry_text(entry, ctx)));
            }
        }
        lines.join("\n")
    }

    pub fn to_json(&self, ctx: &JetContext) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .enumerate()
            .flat_map(|(s, row)| {
                row.iter().enumerate().map(move |(j, entry)| {
                    let terms: Vec<Value> = entry
                        .iter()
                        .map(|(sigma, a)| json!({ "sigma": sigma.exponents(), "coeff": a.to_text(ctx) }))
                        .collect();
                    json!({ "row": s, "col": j, "terms": terms })
                })
            })
            .collect();
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "domain": match self.domain { Domain::Free => "free", Domain::Restricted(_) => "restricted" },
            "entries": entries,
        })
    }

    /// Rebuild an operator from [`CDiffOp::to_json`] output (free domain).
    pub fn from_json(value: &Value, ctx: &JetContext) -> Result<Self> {
        let bad = |msg: &str| Error::Unsupported(format!("operator JSON: {msg}"));
        let rows = value["rows"].as_u64().ok_or_else(|| bad("rows"))? as usize;
        let cols = value["cols"].as_u64().ok_or_else(|| bad("cols"))? as usize;
        let mut op = Self::zero(rows, cols, ctx.n_independent());
        for e in value["entries"].as_array().ok_or_else(|| bad("entries"))? {
            let s = e["row"].as_u64().ok_or_else(|| bad("row"))? as usize;
            let j = e["col"].as_u64().ok_or_else(|| bad("col"))? as usize;
            if s >= rows || j >= cols {
                return Err(bad("index out of range"));
            }
            for t in e["terms"].as_array().ok_or_else(|| bad("terms"))? {
                let sigma: Vec<u32> = t["sigma"]
                    .as_array()
                    .ok_or_else(|| bad("sigma"))?
                    .iter()
                    .map(|v| v.as_u64().map(|x| x as u32))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad("sigma"))?;
                let coeff = crate::expr::parse(t["coeff"].as_str().ok_or_else(|| bad("coeff"))?, ctx)?;
                add_into(&mut op.entries[s][j], MultiIndex::from_slice(&sigma), coeff);
            }
        }
        Ok(op)
    }
}
