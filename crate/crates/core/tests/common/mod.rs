#![allow(dead_code)]

use jetsym::expr::{Monomial, Poly};
use jetsym::{Coordinate, JetContext, JetExpr, MultiIndex, Rational};
use proptest::prelude::*;

pub fn xt() -> JetContext {
    JetContext::new(&["x", "t"], &["u"]).unwrap()
}

/// `x`, `t` and every `u_σ` with `|σ| ≤ max_order`.
pub fn pool(max_order: u32, with_independent: bool) -> Vec<Coordinate> {
    let mut out = Vec::new();
    if with_independent {
        out.push(Coordinate::Independent(0));
        out.push(Coordinate::Independent(1));
    }
    out.extend(
        MultiIndex::all_up_to(2, max_order)
            .into_iter()
            .map(|s| Coordinate::Jet(0, s)),
    );
    out
}

/// Pure `x`-derivatives `u, u_x, …` up to `max_order`.
pub fn x_pool(max_order: u32) -> Vec<Coordinate> {
    (0..=max_order)
        .map(|k| Coordinate::Jet(0, MultiIndex::from_slice(&[k, 0])))
        .collect()
}

type Term = (i64, i64, Vec<(usize, u32)>);

fn build(pool: &[Coordinate], terms: Vec<Term>) -> JetExpr {
    let mut p = Poly::zero();
    for (num, den, factors) in terms {
        let m = Monomial::from_factors(factors.into_iter().map(|(k, e)| (pool[k % pool.len()].clone(), e)));
        p.add_term(m, Rational::new(num.into(), den.into()));
    }
    JetExpr::from(p)
}

pub fn poly_in(pool: Vec<Coordinate>, max_terms: usize) -> impl Strategy<Value = JetExpr> {
    let n = pool.len();
    prop::collection::vec(
        (-6i64..=6, 1i64..=3, prop::collection::vec((0..n, 1u32..=2), 0..=3)),
        0..=max_terms,
    )
    .prop_map(move |terms| build(&pool, terms))
}

/// Differential polynomials over `(x, t; u)`.
pub fn poly(max_order: u32) -> impl Strategy<Value = JetExpr> {
    poly_in(pool(max_order, true), 4)
}

/// Mostly polynomials, sometimes genuine quotients.
pub fn expr(max_order: u32) -> impl Strategy<Value = JetExpr> {
    prop_oneof![
        3 => poly(max_order),
        1 => (poly(max_order), poly_in(pool(max_order, true), 2)).prop_map(|(p, q)| {
            let q = &q + &JetExpr::integer(1);
            p.checked_div(&q).unwrap_or(p)
        }),
    ]
}
