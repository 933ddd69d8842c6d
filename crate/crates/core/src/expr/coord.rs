use std::cmp::Ordering;

use super::MultiIndex;

/// A coordinate function on (a covering of) the infinite jet space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Coordinate {
    /// Independent variable `x_i`.
    Independent(usize),
    /// Jet coordinate `u^j_σ`.
    Jet(usize, MultiIndex),
    /// Fiber coordinate `w_a` of a covering.
    Nonlocal(usize),
}

impl Coordinate {
    pub fn jet(dep: usize, sigma: MultiIndex) -> Self {
        Coordinate::Jet(dep, sigma)
    }

    /// The undifferentiated dependent variable `u^j` in `n` independent variables.
    pub fn dependent(dep: usize, n: usize) -> Self {
        Coordinate::Jet(dep, MultiIndex::zero(n))
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Coordinate::Jet(..))
    }

    pub fn is_nonlocal(&self) -> bool {
        matches!(self, Coordinate::Nonlocal(_))
    }

    /// Jet order `|σ|`; zero for independent and fiber coordinates.
    pub fn jet_order(&self) -> u32 {
        match self {
            Coordinate::Jet(_, s) => s.order(),
            _ => 0,
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Coordinate::Independent(_) => 0,
            Coordinate::Jet(..) => 1,
            Coordinate::Nonlocal(_) => 2,
        }
    }
}

impl Ord for Coordinate {
    fn cmp(&self, other: &Self) -> Ordering {
        use Coordinate::*;
        match (self, other) {
            (Independent(a), Independent(b)) => a.cmp(b),
            (Jet(j1, s1), Jet(j2, s2)) => j1.cmp(j2).then_with(|| s1.cmp(s2)),
            (Nonlocal(a), Nonlocal(b)) => a.cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl PartialOrd for Coordinate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
