//! Exact sparse linear algebra over ℚ.
//!
//! Column indices double as priorities: the smallest column of a row is its pivot.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::expr::Rational;

pub type SparseRow = BTreeMap<usize, Rational>;

/// Fully reduced row echelon form maintained incrementally.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

fn axpy(target: &mut SparseRow, factor: &Rational, source: &SparseRow) {
    for (c, v) in source {
        let entry = target.entry(*c).or_insert_with(Rational::zero);
        *entry -= factor * v;
        if entry.is_zero() {
            target.remove(c);
        }
    }
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reduce `row` against the current pivots.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        row.retain(|_, v| !v.is_zero());
        let hits: Vec<usize> = row.keys().copied().filter(|c| self.pivots.contains_key(c)).collect();
        for c in hits {
            if let Some(f) = row.get(&c).cloned() {
                axpy(&mut row, &f, &self.pivots[&c]);
            }
        }
        row
    }

    /// Add a row; returns whether the rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let mut row = self.reduce(row);
        let Some((&p, lead)) = row.iter().next() else {
            return false;
        };
        let inv = Rational::one() / lead;
        for v in row.values_mut() {
            *v *= &inv;
        }
        for other in self.pivots.values_mut() {
            if let Some(f) = other.get(&p).cloned() {
                axpy(other, &f, &row);
            }
        }
        self.pivots.insert(p, row);
        true
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivots.contains_key(&col)
    }

    /// Rows in ascending pivot order.
    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.pivots.values()
    }

    pub fn into_rows(self) -> Vec<SparseRow> {
        self.pivots.into_values().collect()
    }

    pub fn contains(&self, row: &SparseRow) -> bool {
        self.reduce(row.clone()).is_empty()
    }
}

/// Canonical reduced basis of the row space.
pub fn rref(rows: impl IntoIterator<Item = SparseRow>) -> Vec<SparseRow> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    e.into_rows()
}

/// Canonical basis of `{c : row·c = 0 for all rows}` in `ncols` unknowns.
///
/// Each vector has coefficient 1 at its smallest column and zeros at the
/// smallest columns of the others.
pub fn nullspace(rows: impl IntoIterator<Item = SparseRow>, ncols: usize) -> Vec<SparseRow> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    let mut basis = Vec::new();
    for f in (0..ncols).filter(|c| !e.is_pivot(*c)) {
        let mut v = SparseRow::new();
        v.insert(f, Rational::one());
        for (p, row) in &e.pivots {
            if let Some(x) = row.get(&f) {
                v.insert(*p, -x.clone());
            }
        }
        basis.push(v);
    }
    rref(basis)
}

/// Whether `v` lies in the span of `basis`.
pub fn in_span(basis: &[SparseRow], v: &SparseRow) -> bool {
    let mut e = Echelon::new();
    for b in basis {
        e.insert(b.clone());
    }
    e.contains(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: &[(usize, i64)]) -> SparseRow {
        entries
            .iter()
            .map(|&(c, v)| (c, Rational::from_integer(v.into())))
            .collect()
    }

    fn dot(a: &SparseRow, b: &SparseRow) -> Rational {
        a.iter().filter_map(|(c, x)| b.get(c).map(|y| x * y)).sum()
    }

    #[test]
    fn nullspace_of_small_system() {
        // x0 + x1 = 0, x1 - x2 = 0 in three unknowns
        let rows = vec![row(&[(0, 1), (1, 1)]), row(&[(1, 1), (2, -1)])];
        let ns = nullspace(rows.clone(), 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], row(&[(0, 1), (1, -1), (2, -1)]));
        for r in &rows {
            assert!(dot(r, &ns[0]).is_zero());
        }
    }

    #[test]
    fn rank_and_span() {
        let rows = vec![row(&[(0, 2), (1, 4)]), row(&[(0, 1), (1, 2)]), row(&[(2, 3)])];
        assert_eq!(rref(rows.clone()).len(), 2);
        assert!(in_span(&rows, &row(&[(0, 1), (1, 2), (2, 1)])));
        assert!(!in_span(&rows, &row(&[(1, 1)])));
        assert_eq!(nullspace(Vec::new(), 2).len(), 2);
    }
}
