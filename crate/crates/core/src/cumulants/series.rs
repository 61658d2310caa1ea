//! Truncated noncommutative power series, moment series, cyclic R-transforms
//! and the series identities they satisfy.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;

use super::{visit_chained_words, CumulantEngine};
use crate::error::{Error, Result};
use crate::moments::{moment_value, summed_array_moment, ArrayState};
use crate::scalar::{rational_to_json, Rational};
use crate::spec::CovarianceSpec;
use crate::word::{EpsWord, Letter};

/// Default degree cap for series built from moments.
pub const DEFAULT_SERIES_CAP: usize = 8;

/// Σ_w c_w · w over words w of indeterminates z^ε_{p,q}(u), truncated at `cap`.
/// A [`Letter`] names the indeterminate; scalar series use p = q = u = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct NCSeries {
    cap: usize,
    terms: BTreeMap<Vec<Letter>, Rational>,
}

/// The indeterminate z (or z*) of a one-variable series.
pub fn scalar_symbol(star: bool) -> Letter {
    Letter::new(0, 0, 0, star)
}

impl NCSeries {
    pub fn zero(cap: usize) -> Self {
        NCSeries {
            cap,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(cap: usize) -> Self {
        let mut s = Self::zero(cap);
        s.add_term(Vec::new(), Rational::one());
        s
    }

    pub fn monomial(word: Vec<Letter>, coeff: Rational, cap: usize) -> Self {
        let mut s = Self::zero(cap);
        s.add_term(word, coeff);
        s
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Letter>, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &[Letter]) -> Rational {
        self.terms.get(word).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|w| w.len()).max()
    }

    /// Adds c·word; words past the cap and zero results are dropped.
    pub fn add_term(&mut self, word: Vec<Letter>, c: Rational) {
        if word.len() > self.cap || c.is_zero() {
            return;
        }
        let e = self.terms.entry(word).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &NCSeries) -> NCSeries {
        let mut out = NCSeries {
            cap: self.cap.min(other.cap),
            terms: BTreeMap::new(),
        };
        for (w, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> NCSeries {
        let mut out = NCSeries::zero(self.cap);
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    /// Truncated product.
    pub fn mul(&self, other: &NCSeries) -> NCSeries {
        let cap = self.cap.min(other.cap);
        let mut by_degree: Vec<(&Vec<Letter>, &Rational)> = other.terms.iter().collect();
        by_degree.sort_by_key(|(w, _)| w.len());
        let mut acc: BTreeMap<Vec<Letter>, Rational> = BTreeMap::new();
        for (a, x) in &self.terms {
            if a.len() > cap {
                continue;
            }
            for (b, y) in &by_degree {
                if a.len() + b.len() > cap {
                    break;
                }
                let mut w = Vec::with_capacity(a.len() + b.len());
                w.extend_from_slice(a);
                w.extend_from_slice(b);
                *acc.entry(w).or_insert_with(Rational::zero) += x * *y;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        NCSeries { cap, terms: acc }
    }

    /// Keeps the terms whose every symbol satisfies `keep`.
    pub fn restrict(&self, keep: impl Fn(&Letter) -> bool) -> NCSeries {
        NCSeries {
            cap: self.cap,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.iter().all(&keep))
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Renames every symbol, adding up colliding terms.
    pub fn map_symbols(&self, f: impl Fn(Letter) -> Letter) -> NCSeries {
        let mut out = NCSeries::zero(self.cap);
        for (w, c) in &self.terms {
            out.add_term(w.iter().map(|l| f(*l)).collect(), c.clone());
        }
        out
    }

    /// The first word (in word order) where the two series differ.
    pub fn first_difference(&self, other: &NCSeries) -> Option<(Vec<Letter>, Rational, Rational)> {
        let mut keys: Vec<&Vec<Letter>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().find_map(|w| {
            let (a, b) = (self.coefficient(w), other.coefficient(w));
            (a != b).then(|| (w.clone(), a, b))
        })
    }

    /// `{cap, terms: [{word: [[p,q,eps(,u)],...], coeff}]}`, 1-based indices.
    pub fn to_json(&self, with_labels: bool) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                let word: Vec<serde_json::Value> = w
                    .iter()
                    .map(|l| {
                        let eps = if l.star { "*" } else { "1" };
                        if with_labels {
                            json!([l.p + 1, l.q + 1, eps, l.u + 1])
                        } else {
                            json!([l.p + 1, l.q + 1, eps])
                        }
                    })
                    .collect();
                json!({ "word": word, "coeff": rational_to_json(c) })
            })
            .collect();
        json!({ "cap": self.cap, "terms": terms })
    }
}

/// Where two sides of a series identity first disagree.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMismatch {
    pub identity: &'static str,
    pub state: Option<usize>,
    pub word: String,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl std::fmt::Display for SeriesMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} fails", self.identity)?;
        if let Some(q) = self.state {
            write!(f, " at state {}", q + 1)?;
        }
        write!(f, " on {}: {} vs {}", self.word, self.lhs, self.rhs)
    }
}

fn word_string(w: &[Letter]) -> String {
    if w.is_empty() {
        return "1".to_string();
    }
    w.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn mismatch(
    identity: &'static str,
    state: Option<usize>,
    lhs: &NCSeries,
    rhs: &NCSeries,
) -> Option<SeriesMismatch> {
    lhs.first_difference(rhs).map(|(w, a, b)| SeriesMismatch {
        identity,
        state,
        word: word_string(&w),
        lhs: a,
        rhs: b,
    })
}

fn check_cap(cap: usize, limit: usize) -> Result<()> {
    if cap > limit {
        return Err(Error::SizeLimit {
            what: "series degree",
            limit,
            got: cap,
        });
    }
    Ok(())
}

/// M_q: every joint *-moment of the array at Φ_q up to degree `cap`.
pub fn moment_series(spec: &CovarianceSpec, q: usize, cap: usize) -> Result<NCSeries> {
    moment_series_capped(spec, q, cap, DEFAULT_SERIES_CAP)
}

pub fn moment_series_capped(
    spec: &CovarianceSpec,
    q: usize,
    cap: usize,
    limit: usize,
) -> Result<NCSeries> {
    check_cap(cap, limit)?;
    spec.check_state(q)?;
    let mut s = NCSeries::one(cap);
    for len in (2..=cap).step_by(2) {
        visit_chained_words(spec.r(), spec.labels(), len, q, &mut |w| {
            let m = moment_value(w, q, spec).expect("chained words are in range");
            s.add_term(w.to_vec(), m);
        });
    }
    Ok(s)
}

/// R_q assembled from cyclic cumulants of every chained word up to `cap`.
pub fn cyclic_r_transform(engine: &mut CumulantEngine, q: usize, cap: usize) -> Result<NCSeries> {
    if cap < 2 {
        return Err(Error::Precondition(
            "R-transform cap must be at least 2".into(),
        ));
    }
    check_cap(cap, crate::partitions::DEFAULT_MAX_GROUND_SET)?;
    let spec = engine.spec().clone();
    spec.check_state(q)?;
    let mut s = NCSeries::zero(cap);
    let mut err = None;
    for len in 1..=cap {
        visit_chained_words(spec.r(), spec.labels(), len, q, &mut |w| {
            if err.is_some() {
                return;
            }
            match engine.cumulant(w, q) {
                Ok(k) => s.add_term(w.to_vec(), k),
                Err(e) => err = Some(e),
            }
        });
    }
    match err {
        Some(e) => Err(e),
        None => Ok(s),
    }
}

/// Σ_p Σ_u b_{p,q}(u) (z*_{p,q}(u) z_{p,q}(u) + z_{q,p}(u) z*_{q,p}(u)).
pub fn quadratic_r_transform(spec: &CovarianceSpec, q: usize, cap: usize) -> NCSeries {
    let mut s = NCSeries::zero(cap);
    for p in 0..spec.r() {
        for u in 0..spec.labels() {
            let b = spec.b(p, q, u).clone();
            s.add_term(
                vec![Letter::new(p, q, u, true), Letter::new(p, q, u, false)],
                b.clone(),
            );
            s.add_term(
                vec![Letter::new(q, p, u, false), Letter::new(q, p, u, true)],
                b,
            );
        }
    }
    s
}

/// R-transform of the upper-triangular η array under condition q: symbols
/// are η^ε_{p,q}(u) with p ≤ q, stored as letters.
pub fn eta_r_transform(engine: &mut CumulantEngine, q: usize, cap: usize) -> Result<NCSeries> {
    let spec = engine.spec().clone();
    spec.check_state(q)?;
    check_cap(cap, crate::partitions::DEFAULT_MAX_GROUND_SET)?;
    let mut symbols = Vec::new();
    for p in 0..spec.r() {
        for t in p..spec.r() {
            for u in 0..spec.labels() {
                for star in [false, true] {
                    symbols.push(Letter::new(p, t, u, star));
                }
            }
        }
    }
    let mut s = NCSeries::zero(cap);
    let mut word = Vec::new();
    fn rec(
        len: usize,
        symbols: &[Letter],
        word: &mut Vec<Letter>,
        engine: &mut CumulantEngine,
        q: usize,
        s: &mut NCSeries,
    ) -> Result<()> {
        if word.len() == len {
            let k = engine.eta_cumulant(word, q)?;
            s.add_term(word.clone(), k);
            return Ok(());
        }
        for &l in symbols {
            word.push(l);
            rec(len, symbols, word, engine, q, s)?;
            word.pop();
        }
        Ok(())
    }
    for len in 1..=cap {
        rec(len, &symbols, &mut word, engine, q, &mut s)?;
    }
    Ok(s)
}

/// Checks M_q = 1 + Σ_p Σ_u b_{p,q}(u)(z*_{p,q} M_p z_{p,q} M_q + z_{q,p} M_p z*_{q,p} M_q)
/// coefficient-wise through `cap`, for every q.
pub fn check_moment_relation(
    ms: &[NCSeries],
    spec: &CovarianceSpec,
    cap: usize,
) -> Option<SeriesMismatch> {
    for q in 0..spec.r() {
        let mut rhs = NCSeries::one(cap);
        for p in 0..spec.r() {
            for u in 0..spec.labels() {
                let b = spec.b(p, q, u);
                if b.is_zero() {
                    continue;
                }
                let a = NCSeries::monomial(vec![Letter::new(p, q, u, true)], b.clone(), cap)
                    .mul(&ms[p])
                    .mul(&NCSeries::monomial(
                        vec![Letter::new(p, q, u, false)],
                        Rational::one(),
                        cap,
                    ))
                    .mul(&ms[q]);
                let c = NCSeries::monomial(vec![Letter::new(q, p, u, false)], b.clone(), cap)
                    .mul(&ms[p])
                    .mul(&NCSeries::monomial(
                        vec![Letter::new(q, p, u, true)],
                        Rational::one(),
                        cap,
                    ))
                    .mul(&ms[q]);
                rhs = rhs.add(&a).add(&c);
            }
        }
        let lhs = truncate(&ms[q], cap);
        if let Some(m) = mismatch("moment relation", Some(q), &lhs, &rhs) {
            return Some(m);
        }
    }
    None
}

fn truncate(s: &NCSeries, cap: usize) -> NCSeries {
    let mut out = NCSeries::zero(cap);
    for (w, c) in s.terms() {
        out.add_term(w.clone(), c.clone());
    }
    out
}

/// Checks M = I + R(zM, wM): every symbol of R_q is followed by M at the
/// second index of its matrix unit, and the result must equal M_q.
pub fn check_fixed_point(ms: &[NCSeries], rs: &[NCSeries], cap: usize) -> Option<SeriesMismatch> {
    for (q, r) in rs.iter().enumerate() {
        let mut rhs = NCSeries::one(cap);
        for (w, c) in r.terms() {
            let mut term = NCSeries::monomial(Vec::new(), c.clone(), cap);
            for l in w {
                term = term
                    .mul(&NCSeries::monomial(vec![*l], Rational::one(), cap))
                    .mul(&ms[l.unit().1]);
            }
            rhs = rhs.add(&term);
        }
        let lhs = truncate(&ms[q], cap);
        if let Some(m) = mismatch("fixed point", Some(q), &lhs, &rhs) {
            return Some(m);
        }
    }
    None
}

/// Diagonal coefficients C(ε) of the summed-array moment series, by the
/// first-pair recurrence, for every eps-word of even length ≤ cap.
pub fn catalan_coefficients(spec: &CovarianceSpec, cap: usize) -> BTreeMap<EpsWord, Vec<Rational>> {
    let r = spec.r();
    // Σ_u B(u)
    let total: Vec<Vec<Rational>> = (0..r)
        .map(|p| {
            (0..r)
                .map(|q| (0..spec.labels()).map(|u| spec.b(p, q, u).clone()).sum())
                .collect()
        })
        .collect();
    let mut out: BTreeMap<EpsWord, Vec<Rational>> = BTreeMap::new();
    out.insert(EpsWord(Vec::new()), vec![Rational::one(); r]);
    for m in (2..=cap).step_by(2) {
        for eps in EpsWord::all(m) {
            let e = &eps.0;
            let mut c = vec![Rational::zero(); r];
            for k in (1..m).step_by(2) {
                if e[0] == e[k] {
                    continue;
                }
                let inner = &out[&EpsWord(e[1..k].to_vec())];
                let rest = &out[&EpsWord(e[k + 1..].to_vec())];
                for (q, cq) in c.iter_mut().enumerate() {
                    if rest[q].is_zero() {
                        continue;
                    }
                    let s: Rational = (0..r).map(|p| &inner[p] * &total[p][q]).sum();
                    *cq += s * &rest[q];
                }
            }
            out.insert(eps, c);
        }
    }
    out
}

/// Compares the recurrence with summed-array moments at every Φ_q, including
/// odd words (which must vanish on both sides).
pub fn check_catalan_against_moments(
    spec: &CovarianceSpec,
    cap: usize,
) -> Result<Option<SeriesMismatch>> {
    let coeffs = catalan_coefficients(spec, cap);
    for m in 0..=cap {
        for eps in EpsWord::all(m) {
            for q in 0..spec.r() {
                let rec = coeffs
                    .get(&eps)
                    .map(|c| c[q].clone())
                    .unwrap_or_else(Rational::zero);
                let mom = summed_array_moment(&eps, &ArrayState::Vacuum(q), spec)?;
                if rec != mom {
                    return Ok(Some(SeriesMismatch {
                        identity: "catalan recurrence",
                        state: Some(q),
                        word: eps.to_string(),
                        lhs: rec,
                        rhs: mom,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// M_0 of ζ = Σ ζ_{p,q}(u) in the given summed-array state, as a series in z, z*.
pub fn scalar_moment_series(
    spec: &CovarianceSpec,
    state: &ArrayState,
    cap: usize,
) -> Result<NCSeries> {
    let mut s = NCSeries::zero(cap);
    for m in 0..=cap {
        for eps in EpsWord::all(m) {
            let v = summed_array_moment(&eps, state, spec)?;
            s.add_term(eps.0.iter().map(|&st| scalar_symbol(st)).collect(), v);
        }
    }
    Ok(s)
}

/// Checks M_0 = 1 + z* M_0 z M_0 + z M_0 z* M_0 through `cap`.
pub fn check_scalar_circular_identity(m0: &NCSeries, cap: usize) -> Option<SeriesMismatch> {
    let z = NCSeries::monomial(vec![scalar_symbol(false)], Rational::one(), cap);
    let zs = NCSeries::monomial(vec![scalar_symbol(true)], Rational::one(), cap);
    let rhs = NCSeries::one(cap)
        .add(&zs.mul(m0).mul(&z).mul(m0))
        .add(&z.mul(m0).mul(&zs).mul(m0));
    mismatch("scalar circular identity", None, &truncate(m0, cap), &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::MomentSource;
    use crate::scalar::{int, rat};

    fn example_spec() -> CovarianceSpec {
        CovarianceSpec::new(2, vec![vec![vec![int(0), int(2)], vec![int(3), int(0)]]]).unwrap()
    }

    #[test]
    fn series_arithmetic() {
        let a = NCSeries::monomial(vec![scalar_symbol(false)], int(2), 3);
        let one = NCSeries::one(3);
        let s = one.add(&a);
        let sq = s.mul(&s);
        assert_eq!(sq.coefficient(&[]), int(1));
        assert_eq!(sq.coefficient(&[scalar_symbol(false)]), int(4));
        assert_eq!(sq.coefficient(&[scalar_symbol(false); 2]), int(4));
        let cube = sq.mul(&s).mul(&s);
        assert_eq!(cube.max_degree(), Some(3));
        assert_eq!(a.add(&a.scale(&int(-1))).len(), 0);
    }

    #[test]
    fn moment_series_low_degrees() {
        let spec = example_spec();
        let (p, q) = (0, 1);
        let m = moment_series(&spec, q, 4).unwrap();
        assert_eq!(m.coefficient(&[]), int(1));
        assert_eq!(
            m.coefficient(&[Letter::zeta_star(p, q), Letter::zeta(p, q)]),
            int(2)
        );
        assert_eq!(
            m.coefficient(&[
                Letter::zeta_star(p, q),
                Letter::zeta(p, q),
                Letter::zeta_star(p, q),
                Letter::zeta(p, q)
            ]),
            int(10)
        );
        assert!(matches!(
            moment_series(&spec, q, 9),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn relations_hold_for_example_spec() {
        let spec = example_spec();
        let cap = 6;
        let ms: Vec<NCSeries> = (0..2)
            .map(|q| moment_series(&spec, q, cap).unwrap())
            .collect();
        assert_eq!(check_moment_relation(&ms, &spec, cap), None);
        let rs: Vec<NCSeries> = (0..2)
            .map(|q| quadratic_r_transform(&spec, q, cap))
            .collect();
        assert_eq!(check_fixed_point(&ms, &rs, cap), None);
    }

    #[test]
    fn zero_covariances_give_identity() {
        let spec = CovarianceSpec::uniform(2, 1, int(0));
        let ms: Vec<NCSeries> = (0..2)
            .map(|q| moment_series(&spec, q, 6).unwrap())
            .collect();
        for m in &ms {
            assert_eq!(m, &NCSeries::one(6));
        }
        let rs: Vec<NCSeries> = (0..2).map(|q| quadratic_r_transform(&spec, q, 6)).collect();
        assert_eq!(check_fixed_point(&ms, &rs, 6), None);
    }

    #[test]
    fn one_by_one_standard_reduces_to_scalar_identity() {
        let spec = CovarianceSpec::uniform(1, 1, int(1));
        let m0 = moment_series(&spec, 0, 8).unwrap();
        assert_eq!(check_scalar_circular_identity(&m0, 8), None);
    }

    #[test]
    fn wrong_series_is_caught() {
        let spec = example_spec();
        let mut ms: Vec<NCSeries> = (0..2)
            .map(|q| moment_series(&spec, q, 4).unwrap())
            .collect();
        ms[1].add_term(vec![Letter::zeta_star(0, 1), Letter::zeta(0, 1)], int(1));
        let bad = check_moment_relation(&ms, &spec, 4).unwrap();
        assert_eq!(bad.identity, "moment relation");
    }

    #[test]
    fn catalan_examples() {
        let spec = CovarianceSpec::new(
            2,
            vec![vec![vec![rat(1, 3), int(2)], vec![int(5), rat(1, 2)]]],
        )
        .unwrap();
        let c = catalan_coefficients(&spec, 4);
        assert_eq!(c[&EpsWord::default()], vec![int(1), int(1)]);
        assert_eq!(c[&"11".parse::<EpsWord>().unwrap()], vec![int(0), int(0)]);
        let star_one = &c[&"*1".parse::<EpsWord>().unwrap()];
        assert_eq!(star_one[0], rat(1, 3) + int(5));
        assert_eq!(star_one[1], int(2) + rat(1, 2));
        assert_eq!(check_catalan_against_moments(&spec, 6).unwrap(), None);
    }

    #[test]
    fn r_transform_is_quadratic() {
        let spec = CovarianceSpec::new(
            2,
            vec![vec![vec![rat(1, 3), int(2)], vec![int(5), rat(1, 2)]]],
        )
        .unwrap();
        let mut e = CumulantEngine::new(&spec, MomentSource::Combinatorial);
        for q in 0..2 {
            let r = cyclic_r_transform(&mut e, q, 6).unwrap();
            assert_eq!(r, quadratic_r_transform(&spec, q, 6), "q = {q}");
        }
    }

    #[test]
    fn json_shape() {
        let spec = example_spec();
        let r = quadratic_r_transform(&spec, 1, 2);
        let j = r.to_json(false);
        assert_eq!(j["cap"], json!(2));
        assert!(j["terms"]
            .as_array()
            .unwrap()
            .iter()
            .all(|t| t["word"].as_array().unwrap().len() == 2));
    }
}
