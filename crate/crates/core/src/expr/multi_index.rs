use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponent vector `σ = (σ_1, …, σ_n)` over the independent variables.
///
/// `u^j_σ` denotes the mixed partial derivative of `u^j` taken `σ_i` times
/// with respect to `x_i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(exponents: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(exponents))
    }

    /// The unit index `1_i` in `n` variables.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[i] = 1;
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `|σ| = Σ σ_i`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `σ + 1_i`.
    pub fn incremented(&self, i: usize) -> Self {
        let mut m = self.clone();
        m.0[i] += 1;
        m
    }

    /// `σ - 1_i`, if `σ_i > 0`.
    pub fn decremented(&self, i: usize) -> Option<Self> {
        let mut m = self.clone();
        m.0[i] = m.0[i].checked_sub(1)?;
        Some(m)
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        debug_assert_eq!(self.len(), other.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other ≤ self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<Self> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<SmallVec<_>>>()
            .map(MultiIndex)
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Componentwise maximum.
    pub fn lcm(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    /// Product of binomial coefficients `Π C(σ_i, τ_i)`.
    pub fn binomial(&self, sub: &MultiIndex) -> u64 {
        self.0
            .iter()
            .zip(&sub.0)
            .map(|(&n, &k)| binomial(n as u64, k as u64))
            .product()
    }

    /// All `τ` with `τ ≤ self` componentwise, in ascending graded-lex order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex(SmallVec::new())];
        for &e in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=e).map(move |k| {
                        let mut p = prefix.clone();
                        p.0.push(k);
                        p
                    })
                })
                .collect();
        }
        out.sort();
        out
    }

    /// All multi-indices in `n` variables with `|σ| ≤ max_order`, ascending.
    pub fn all_up_to(n: usize, max_order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        fn rec(i: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if i == current.len() {
                out.push(MultiIndex::from_slice(current));
                return;
            }
            for k in 0..=left {
                current[i] = k;
                rec(i + 1, left - k, current, out);
            }
            current[i] = 0;
        }
        rec(0, max_order, &mut current, &mut out);
        out.sort();
        out
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Graded lexicographic: total order first, then the exponent of the first
/// variable, and so on.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order().cmp(&other.order()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
