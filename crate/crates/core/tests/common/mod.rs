//! Shared generators for the integration tests.
#![allow(dead_code)]

use proptest::prelude::*;
use rcircular::scalar::rat;
use rcircular::{CovarianceSpec, Letter, Rational};

pub fn rational() -> impl Strategy<Value = Rational> {
    prop_oneof![
        1 => Just(rat(0, 1)),
        4 => (1i64..7, 1i64..5).prop_map(|(n, d)| rat(n, d)),
    ]
}

/// Random spec with r ≤ max_r and at most max_labels labels.
pub fn spec(max_r: usize, max_labels: usize) -> impl Strategy<Value = CovarianceSpec> {
    (1..=max_r, 1..=max_labels).prop_flat_map(|(r, labels)| {
        proptest::collection::vec(rational(), r * r * labels).prop_map(move |flat| {
            let b = flat
                .chunks(r * r)
                .map(|m| m.chunks(r).map(|row| row.to_vec()).collect())
                .collect();
            CovarianceSpec::new(r, b).unwrap()
        })
    })
}

/// A word whose matrix units chain and close at the returned state, built
/// from a seed vector so that proptest can shrink it.
pub fn chained_word(
    r: usize,
    labels: usize,
    choices: &[(usize, usize, bool)],
    q0: usize,
) -> Vec<Letter> {
    let m = choices.len();
    let mut prev = q0;
    let mut out = Vec::with_capacity(m);
    for (k, &(next, u, star)) in choices.iter().enumerate() {
        let next = if k + 1 == m { q0 } else { next % r };
        let u = u % labels;
        out.push(if star {
            Letter::new(next, prev, u, true)
        } else {
            Letter::new(prev, next, u, false)
        });
        prev = next;
    }
    out
}

/// A spec together with a chained word over it and its closing state.
pub fn spec_and_chained_word(
    max_r: usize,
    max_labels: usize,
    max_len: usize,
) -> impl Strategy<Value = (CovarianceSpec, Vec<Letter>, usize)> {
    (
        spec(max_r, max_labels),
        0usize..3,
        proptest::collection::vec((0usize..3, 0usize..2, any::<bool>()), 0..=max_len),
    )
        .prop_map(|(spec, q0, choices)| {
            let q0 = q0 % spec.r();
            let w = chained_word(spec.r(), spec.labels(), &choices, q0);
            (spec, w, q0)
        })
}

/// A spec with an arbitrary (usually non-chained) word and state.
pub fn spec_and_word(
    max_r: usize,
    max_labels: usize,
    max_len: usize,
) -> impl Strategy<Value = (CovarianceSpec, Vec<Letter>, usize)> {
    (
        spec(max_r, max_labels),
        0usize..3,
        proptest::collection::vec(
            (0usize..3, 0usize..3, 0usize..2, any::<bool>()),
            0..=max_len,
        ),
    )
        .prop_map(|(spec, q0, raw)| {
            let r = spec.r();
            let labels = spec.labels();
            let w = raw
                .into_iter()
                .map(|(p, q, u, s)| Letter::new(p % r, q % r, u % labels, s))
                .collect();
            (spec, w, q0 % r)
        })
}
