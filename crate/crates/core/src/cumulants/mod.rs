//! Cyclic cumulants under conditions q, cyclic R-transforms, and one-state
//! free cumulants for the summed array.
//!
//! A cyclic cumulant κ_m(a_1, …, a_m; q) is nonzero only when the matrix
//! units of the letters chain cyclically and close at q. Otherwise it is
//! extracted from the moment Φ_q(a_1 ⋯ a_m) by subtracting, over every other
//! adapted noncrossing partition, the product of block cumulants, each block
//! taken under the second index of its last letter.

mod series;

pub use series::{
    catalan_coefficients, check_catalan_against_moments, check_fixed_point, check_moment_relation,
    check_scalar_circular_identity, cyclic_r_transform, eta_r_transform, moment_series,
    moment_series_capped, quadratic_r_transform, scalar_moment_series, NCSeries, SeriesMismatch,
    DEFAULT_SERIES_CAP,
};

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::zeta_expectation;
use crate::moments::{closes_at, expand_eta, moment_value};
use crate::partitions::{
    visit_noncrossing, AnyBlock, BlockRule, CyclicBlocks, DEFAULT_MAX_GROUND_SET,
};
use crate::scalar::Rational;
use crate::spec::CovarianceSpec;
use crate::word::{EpsWord, Letter};

/// Which engine supplies moments to the cumulant recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MomentSource {
    #[default]
    Combinatorial,
    Fock,
}

impl MomentSource {
    pub fn name(self) -> &'static str {
        match self {
            MomentSource::Combinatorial => "combinatorial",
            MomentSource::Fock => "fock",
        }
    }

    pub fn moment(self, letters: &[Letter], q: usize, spec: &CovarianceSpec) -> Result<Rational> {
        match self {
            MomentSource::Combinatorial => moment_value(letters, q, spec),
            MomentSource::Fock => zeta_expectation(letters, q, spec),
        }
    }
}

/// m minus Σ over the partitions allowed by `rule`, other than the single
/// block, of the product of `block_value` over blocks.
fn subtract_lower<R: BlockRule>(
    m: usize,
    rule: &R,
    moment: Rational,
    mut block_value: impl FnMut(&[usize]) -> Result<Rational>,
) -> Result<Rational> {
    let mut partitions: Vec<Vec<u8>> = Vec::new();
    visit_noncrossing(m, rule, &mut |labels| {
        if labels.iter().any(|&l| l != 0) {
            partitions.push(labels.to_vec());
        }
    });
    let mut total = moment;
    let mut block = Vec::with_capacity(m);
    for labels in partitions {
        let k = *labels.iter().max().unwrap() as usize + 1;
        let mut prod = Rational::from_integer(1.into());
        for b in 0..k {
            block.clear();
            block.extend((0..m).filter(|&i| labels[i] as usize == b));
            let v = block_value(&block)?;
            if v.is_zero() {
                prod = v;
                break;
            }
            prod *= v;
        }
        total -= prod;
    }
    Ok(total)
}

/// Memoizing cyclic-cumulant evaluator over one spec. Not shared across
/// threads; create one per thread.
pub struct CumulantEngine<'a> {
    spec: &'a CovarianceSpec,
    source: MomentSource,
    memo: HashMap<Vec<Letter>, Rational>,
}

impl<'a> CumulantEngine<'a> {
    pub fn new(spec: &'a CovarianceSpec, source: MomentSource) -> Self {
        CumulantEngine {
            spec,
            source,
            memo: HashMap::new(),
        }
    }

    pub fn spec(&self) -> &CovarianceSpec {
        self.spec
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    /// κ_m(letters; q).
    pub fn cumulant(&mut self, letters: &[Letter], q: usize) -> Result<Rational> {
        if letters.is_empty() {
            return Err(Error::Precondition(
                "cumulants need at least one letter".into(),
            ));
        }
        if letters.len() > DEFAULT_MAX_GROUND_SET {
            return Err(Error::SizeLimit {
                what: "cumulant order",
                limit: DEFAULT_MAX_GROUND_SET,
                got: letters.len(),
            });
        }
        self.spec.check_state(q)?;
        letters.iter().try_for_each(|l| self.spec.check_letter(l))?;
        if !closes_at(letters, q) {
            return Ok(Rational::zero());
        }
        self.closed_cumulant(letters)
    }

    /// Cumulant of a word already known to close at its last second index.
    fn closed_cumulant(&mut self, letters: &[Letter]) -> Result<Rational> {
        if let Some(v) = self.memo.get(letters) {
            return Ok(v.clone());
        }
        let q = letters.last().unwrap().unit().1;
        let moment = self.source.moment(letters, q, self.spec)?;
        let units: Vec<(usize, usize)> = letters.iter().map(|l| l.unit()).collect();
        let rule = CyclicBlocks {
            units: &units,
            pairs_only: false,
        };
        let mut sub = Vec::with_capacity(letters.len());
        let value = subtract_lower(letters.len(), &rule, moment, |block| {
            sub.clear();
            sub.extend(block.iter().map(|&i| letters[i]));
            let sub = sub.clone();
            self.closed_cumulant(&sub)
        })?;
        self.memo.insert(letters.to_vec(), value.clone());
        Ok(value)
    }

    /// Cumulant of η-letters, by multilinearity over their ζ-expansions.
    pub fn eta_cumulant(&mut self, letters: &[Letter], q: usize) -> Result<Rational> {
        let mut total = Rational::zero();
        for w in expand_eta(letters) {
            total += self.cumulant(&w, q)?;
        }
        Ok(total)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }
}

/// κ_m(letters; q) with a fresh combinatorial engine.
pub fn cyclic_cumulant(letters: &[Letter], q: usize, spec: &CovarianceSpec) -> Result<Rational> {
    CumulantEngine::new(spec, MomentSource::Combinatorial).cumulant(letters, q)
}

/// Calls `visit` with every word of `len` ζ-letters whose units chain and
/// close at `q0`.
pub fn visit_chained_words(
    r: usize,
    labels: usize,
    len: usize,
    q0: usize,
    visit: &mut dyn FnMut(&[Letter]),
) {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        prev: usize,
        r: usize,
        labels: usize,
        len: usize,
        q0: usize,
        word: &mut Vec<Letter>,
        visit: &mut dyn FnMut(&[Letter]),
    ) {
        if k == len {
            visit(word);
            return;
        }
        let (lo, hi) = if k + 1 == len { (q0, q0 + 1) } else { (0, r) };
        for next in lo..hi {
            for u in 0..labels {
                for star in [false, true] {
                    word.push(if star {
                        Letter::new(next, prev, u, true)
                    } else {
                        Letter::new(prev, next, u, false)
                    });
                    rec(k + 1, next, r, labels, len, q0, word, visit);
                    word.pop();
                }
            }
        }
    }
    let mut word = Vec::with_capacity(len);
    rec(0, q0, r, labels, len, q0, &mut word, visit);
}

/// One-state free cumulants of (c, c*) from a moment functional on eps-words,
/// for every eps-word of length 1..=max_order.
pub fn free_cumulants(
    max_order: usize,
    mut moment: impl FnMut(&EpsWord) -> Result<Rational>,
) -> Result<BTreeMap<EpsWord, Rational>> {
    if max_order > DEFAULT_MAX_GROUND_SET {
        return Err(Error::SizeLimit {
            what: "cumulant order",
            limit: DEFAULT_MAX_GROUND_SET,
            got: max_order,
        });
    }
    let mut out: BTreeMap<EpsWord, Rational> = BTreeMap::new();
    for m in 1..=max_order {
        for eps in EpsWord::all(m) {
            let mom = moment(&eps)?;
            let value = subtract_lower(m, &AnyBlock, mom, |block| {
                let sub = EpsWord(block.iter().map(|&i| eps.0[i]).collect());
                Ok(out[&sub].clone())
            })?;
            out.insert(eps, value);
        }
    }
    Ok(out)
}
