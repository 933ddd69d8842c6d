//! Sparse multivariate polynomials over ℚ in jet coordinates.
//!
//! Terms are kept in a `BTreeMap` keyed by [`Monomial`], so the representation
//! is canonical: two polynomials are equal as functions iff they are equal as
//! maps. The gcd is computed recursively by primitive polynomial remainder
//! sequences, which is all the rational layer needs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::{Coordinate, Rational};

/// Power product `Π c_k^{e_k}` with coordinates strictly ascending and all
/// exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[(Coordinate, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(c: Coordinate) -> Self {
        Self::power(c, 1)
    }

    pub fn power(c: Coordinate, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial(smallvec::smallvec![(c, e)])
        }
    }

    /// Build from arbitrary factors; merges duplicates and drops zero powers.
    pub fn from_factors<I: IntoIterator<Item = (Coordinate, u32)>>(factors: I) -> Self {
        let mut map: BTreeMap<Coordinate, u32> = BTreeMap::new();
        for (c, e) in factors {
            *map.entry(c).or_default() += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(Coordinate, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, c: &Coordinate) -> u32 {
        self.0
            .binary_search_by(|(k, _)| k.cmp(c))
            .map(|idx| self.0[idx].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.0[i..].iter().cloned());
        out.extend(other.0[j..].iter().cloned());
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::new();
        let mut j = 0;
        for (c, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *c {
                let d = other.0[j].1;
                match e.cmp(&d) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((c.clone(), e - d)),
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *c {
                return None;
            } else {
                out.push((c.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Replace the exponent of `c` (removing the factor for zero).
    pub fn with_exponent(&self, c: &Coordinate, e: u32) -> Monomial {
        let mut out: SmallVec<[(Coordinate, u32); 4]> = self.0.iter().filter(|(k, _)| k != c).cloned().collect();
        if e > 0 {
            let pos = out.partition_point(|(k, _)| k < c);
            out.insert(pos, (c.clone(), e));
        }
        Monomial(out)
    }

    pub fn coordinates(&self) -> impl Iterator<Item = &Coordinate> {
        self.0.iter().map(|(c, _)| c)
    }
}

/// Graded lexicographic, with smaller coordinates acting as greater variables.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0) {
                match a.0.cmp(&b.0) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match a.1.cmp(&b.1) {
                        Ordering::Equal => {}
                        ord => return ord,
                    },
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        let mut p = Poly::zero();
        if !q.is_zero() {
            p.terms.insert(Monomial::one(), q);
        }
        p
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(Rational::from_integer(n.into()))
    }

    pub fn var(c: Coordinate) -> Self {
        Self::term(Rational::one(), Monomial::var(c))
    }

    pub fn term(q: Rational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        if !q.is_zero() {
            p.terms.insert(m, q);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Poly::zero();
        for (m, q) in terms {
            p.add_term(m, q);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, q: Rational) {
        if q.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(q);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += q;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().is_some_and(|(m, q)| m.is_one() && q.is_one())
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self
                .terms
                .iter()
                .next()
                .filter(|(m, _)| m.is_one())
                .map(|(_, q)| q.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.leading_term()
            .map(|(_, q)| q.clone())
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coordinates(&self) -> BTreeSet<Coordinate> {
        self.terms.keys().flat_map(|m| m.coordinates().cloned()).collect()
    }

    pub fn contains(&self, c: &Coordinate) -> bool {
        self.terms.keys().any(|m| m.exponent(c) > 0)
    }

    pub fn degree_in(&self, c: &Coordinate) -> u32 {
        self.terms.keys().map(|m| m.exponent(c)).max().unwrap_or(0)
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(k, c)| (k.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative `∂/∂c`.
    pub fn partial(&self, c: &Coordinate) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.terms {
            let e = m.exponent(c);
            if e > 0 {
                out.add_term(m.with_exponent(c, e - 1), q * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Make the leading coefficient 1.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => Poly::zero(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip()),
        }
    }

    /// View as a univariate polynomial in `c` with coefficients free of `c`.
    pub fn to_univariate(&self, c: &Coordinate) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, q) in &self.terms {
            let e = m.exponent(c);
            out.entry(e).or_default().add_term(m.with_exponent(c, 0), q.clone());
        }
        out
    }

    pub fn from_univariate(c: &Coordinate, coeffs: &BTreeMap<u32, Poly>) -> Poly {
        let mut out = Poly::zero();
        for (&e, p) in coeffs {
            let m = Monomial::power(c.clone(), e);
            for (k, q) in &p.terms {
                out.add_term(k.mul(&m), q.clone());
            }
        }
        out
    }

    /// Exact quotient `self / divisor`, or `None` if the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if let Some(q) = divisor.as_constant() {
            return Some(self.scale(&q.recip()));
        }
        let (lm, lc) = divisor.leading_term().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((m, c)) = rem.leading_term() {
            let qm = m.div(&lm)?;
            let qc = c / &lc;
            rem = &rem - &divisor.mul_monomial(&qm).scale(&qc);
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Monic greatest common divisor (zero iff both inputs are zero).
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Poly::one();
        }
        if self.len() == 1 || other.len() == 1 {
            let (single, rest) = if self.len() == 1 { (self, other) } else { (other, self) };
            return Poly::var_power_gcd(single, rest);
        }
        let a_vars = self.coordinates();
        let b_vars = other.coordinates();
        // The gcd lives in the shared variables, and an evaluation image bounds
        // its degree in each of them. Every variable that is one-sided or has
        // a zero bound is split off at once: the gcd then divides each
        // coefficient with respect to those variables.
        let mut split: BTreeSet<Coordinate> = a_vars.symmetric_difference(&b_vars).cloned().collect();
        let shared: BTreeSet<Coordinate> = a_vars.intersection(&b_vars).cloned().collect();
        let all: BTreeSet<Coordinate> = a_vars.union(&b_vars).cloned().collect();
        let mut main: Option<(u32, &Coordinate)> = None;
        for v in &shared {
            match image_gcd_degree(self, other, v, &all) {
                Some(0) => {
                    split.insert(v.clone());
                }
                Some(d) if main.is_none_or(|(best, _)| d < best) => main = Some((d, v)),
                _ => {}
            }
        }
        if !split.is_empty() {
            let mut parts = self.coefficients_in(&split);
            parts.extend(other.coefficients_in(&split));
            return gcd_all(parts);
        }
        let v = main
            .map(|(_, v)| v)
            .or_else(|| a_vars.iter().next())
            .cloned()
            .expect("non-constant polynomial has a variable");
        let ua = self.to_univariate(&v);
        let ub = other.to_univariate(&v);
        let ca = content(&ua);
        let cb = content(&ub);
        let c = ca.gcd(&cb);
        let mut pa = primitive_part(&ua, &ca);
        let mut pb = primitive_part(&ub, &cb);
        if univariate_degree(&pa) < univariate_degree(&pb) {
            std::mem::swap(&mut pa, &mut pb);
        }
        while !pb.is_empty() {
            let r = pseudo_remainder(&pa, &pb);
            pa = pb;
            if r.is_empty() {
                break;
            }
            let cr = content(&r);
            pb = primitive_part(&r, &cr);
        }
        let g = if univariate_degree(&pa) == 0 {
            Poly::one()
        } else {
            Poly::from_univariate(&v, &pa)
        };
        (&c * &g).monic()
    }

    /// Gcd of a single term with `other`: the shared variables to their
    /// smallest exponents.
    fn var_power_gcd(single: &Poly, other: &Poly) -> Poly {
        let (m, _) = single.leading_term().expect("single term");
        let factors = m.factors().iter().filter_map(|(c, e)| {
            let low = other.terms.keys().map(|k| k.exponent(c)).min().unwrap_or(0).min(*e);
            (low > 0).then(|| (c.clone(), low))
        });
        Poly::term(Rational::one(), Monomial::from_factors(factors))
    }

    /// Coefficients of `self` viewed as a polynomial in `vars`.
    fn coefficients_in(&self, vars: &BTreeSet<Coordinate>) -> Vec<Poly> {
        let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, q) in &self.terms {
            let (inner, outer): (Vec<_>, Vec<_>) = m.factors().iter().cloned().partition(|(c, _)| vars.contains(c));
            groups
                .entry(Monomial::from_factors(inner))
                .or_default()
                .add_term(Monomial::from_factors(outer), q.clone());
        }
        groups.into_values().collect()
    }

    /// Evaluate `Σ q · Π value(c)^e` where `value` supplies replacements;
    /// coordinates without a replacement stay symbolic.
    pub fn substitute_poly<F>(&self, mut value: F) -> Poly
    where
        F: FnMut(&Coordinate) -> Option<Poly>,
    {
        let mut cache: BTreeMap<Coordinate, Option<Poly>> = BTreeMap::new();
        let mut out = Poly::zero();
        for (m, q) in &self.terms {
            let mut acc = Poly::constant(q.clone());
            let mut kept = Monomial::one();
            for (c, e) in m.factors() {
                let v = cache.entry(c.clone()).or_insert_with(|| value(c));
                match v {
                    Some(p) => acc = &acc * &p.pow(*e),
                    None => kept = kept.mul(&Monomial::power(c.clone(), *e)),
                }
            }
            out = &out + &acc.mul_monomial(&kept);
        }
        out
    }
}

type Univariate = BTreeMap<u32, Poly>;

fn univariate_degree(p: &Univariate) -> u32 {
    p.keys().next_back().copied().unwrap_or(0)
}

/// Degree in `v` of the gcd of `a` and `b` after substituting integers for
/// every other variable, or `None` when no tried point keeps both degrees.
fn image_gcd_degree(a: &Poly, b: &Poly, v: &Coordinate, vars: &BTreeSet<Coordinate>) -> Option<u32> {
    for attempt in 0..3i64 {
        let point: BTreeMap<&Coordinate, Rational> = vars
            .iter()
            .enumerate()
            .filter(|(_, c)| *c != v)
            .map(|(j, c)| (c, Rational::from_integer((3 + 7 * j as i64 + 11 * attempt).into())))
            .collect();
        let ea = evaluate_except(a, v, &point);
        let eb = evaluate_except(b, v, &point);
        if ea.len() as u32 != a.degree_in(v) + 1 || eb.len() as u32 != b.degree_in(v) + 1 {
            continue;
        }
        return Some(dense_gcd_degree(ea, eb));
    }
    None
}

/// Dense coefficients (lowest first, trailing zeros trimmed) of `p` with
/// every coordinate other than `v` replaced by its value in `point`.
fn evaluate_except(p: &Poly, v: &Coordinate, point: &BTreeMap<&Coordinate, Rational>) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.degree_in(v) as usize + 1];
    for (m, q) in &p.terms {
        let mut acc = q.clone();
        for (c, e) in m.factors() {
            if c != v {
                acc *= num_traits::pow(point[c].clone(), *e as usize);
            }
        }
        out[m.exponent(v) as usize] += acc;
    }
    trim(&mut out);
    out
}

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn dense_gcd_degree(mut a: Vec<Rational>, mut b: Vec<Rational>) -> u32 {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() && !a.is_empty() {
            let f = a.last().expect("nonempty") / &lb;
            let shift = a.len() - b.len();
            for (k, c) in b.iter().enumerate() {
                a[k + shift] -= &f * c;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    (a.len() as u32).saturating_sub(1)
}

/// Monic gcd of a family, smallest members first so that a trivial result
/// shows up early.
fn gcd_all(mut parts: Vec<Poly>) -> Poly {
    parts.sort_by_key(Poly::len);
    let mut g = Poly::zero();
    for p in &parts {
        g = g.gcd(p);
        if g.is_one() {
            break;
        }
    }
    g
}

fn content(p: &Univariate) -> Poly {
    gcd_all(p.values().cloned().collect())
}

fn primitive_part(p: &Univariate, content: &Poly) -> Univariate {
    p.iter()
        .map(|(&e, c)| (e, c.div_exact(content).expect("content divides every coefficient")))
        .collect()
}

fn pseudo_remainder(a: &Univariate, b: &Univariate) -> Univariate {
    let db = univariate_degree(b);
    let lb = b[&db].clone();
    let mut r = a.clone();
    loop {
        let dr = univariate_degree(&r);
        if r.is_empty() || dr < db {
            return r;
        }
        let lr = r[&dr].clone();
        let shift = dr - db;
        let mut next: Univariate = r.iter().map(|(&e, c)| (e, c * &lb)).collect();
        for (&e, c) in b {
            let entry = next.entry(e + shift).or_default();
            *entry = &*entry - &(c * &lr);
        }
        next.retain(|_, c| !c.is_zero());
        r = next;
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let (big, small) = if self.len() >= rhs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = big.clone();
        for (m, q) in &small.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &rhs.terms {
            out.add_term(m.clone(), -q);
        }
        out
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = Poly::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &rhs.terms {
                out.add_term(m1.mul(m2), q1 * q2);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, q)| (m.clone(), -q)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Whether `q` is negative; used when printing signs.
pub(crate) fn is_negative(q: &Rational) -> bool {
    q.is_negative()
}
