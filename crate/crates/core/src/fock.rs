//! Matricially free Fock space of tracial type, truncated to the paths a word
//! can reach, with creation, annihilation, R-circular, symmetrized and
//! diagonal shift operators.
//!
//! Amplitudes are stored in reduced form: the true amplitude of a path
//! `e_{p1,p2}(u1) ⊗ … ⊗ e_{pm,q}(um)` is the stored coefficient times
//! `Π_k √b_{pk,pk+1}(uk)`. Creation leaves the coefficient unchanged and
//! annihilation multiplies it by `b`, so vacuum coefficients are plain
//! elements of the scalar field and no surds ever appear.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::json;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{rational_to_json, Amplitude, ComplexRational, Rational};
use crate::spec::CovarianceSpec;
use crate::word::Letter;

/// Default cap on the length of a word evaluated in Fock space.
pub const DEFAULT_WORD_CAP: usize = 12;

/// Which of the two copies u′, u″ of a label a factor carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LabelCopy {
    Prime,
    DoublePrime,
}

impl LabelCopy {
    fn suffix(self) -> &'static str {
        match self {
            LabelCopy::Prime => "'",
            LabelCopy::DoublePrime => "''",
        }
    }
}

/// One tensor factor e_{p,q}(u) of a basis path.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    pub p: u8,
    pub q: u8,
    pub u: u16,
    pub copy: LabelCopy,
}

impl Factor {
    pub fn new(p: usize, q: usize, u: usize, copy: LabelCopy) -> Self {
        Factor {
            p: p as u8,
            q: q as u8,
            u: u as u16,
            copy,
        }
    }
}

/// A basis path, or a vacuum Ω_q when it has no factors.
///
/// Factors are stored last-to-first so that creation is a push.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockPath {
    rev: SmallVec<[Factor; 12]>,
    terminal: u8,
}

impl FockPath {
    pub fn vacuum(q: usize) -> Self {
        FockPath {
            rev: SmallVec::new(),
            terminal: q as u8,
        }
    }

    /// Path from factors in reading order; they must chain.
    pub fn from_factors(factors: &[Factor]) -> Result<Self> {
        let Some(last) = factors.last() else {
            return Err(Error::Precondition(
                "a non-vacuum path needs at least one factor".into(),
            ));
        };
        if factors.windows(2).any(|w| w[0].q != w[1].p) {
            return Err(Error::Precondition("path factors do not chain".into()));
        }
        Ok(FockPath {
            rev: factors.iter().rev().copied().collect(),
            terminal: last.q,
        })
    }

    pub fn len(&self) -> usize {
        self.rev.len()
    }

    pub fn is_vacuum(&self) -> bool {
        self.rev.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_vacuum()
    }

    pub fn terminal(&self) -> usize {
        self.terminal as usize
    }

    /// Factors in reading order.
    pub fn factors(&self) -> impl Iterator<Item = &Factor> {
        self.rev.iter().rev()
    }

    /// First index of the leading factor, or q for Ω_q.
    pub fn first_index(&self) -> usize {
        match self.rev.last() {
            Some(f) => f.p as usize,
            None => self.terminal as usize,
        }
    }

    fn leading(&self) -> Option<&Factor> {
        self.rev.last()
    }

    fn prepend(&self, f: Factor) -> Self {
        let mut out = self.clone();
        out.rev.push(f);
        out
    }

    fn tail(&self) -> Self {
        let mut out = self.clone();
        out.rev.pop();
        out
    }

    /// Π b over the factors: the squared norm scale of the basis vector.
    pub fn weight(&self, spec: &CovarianceSpec) -> Rational {
        self.rev
            .iter()
            .map(|f| spec.b(f.p as usize, f.q as usize, f.u as usize).clone())
            .product()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let path: Vec<serde_json::Value> = self
            .factors()
            .map(|f| json!([f.p + 1, f.q + 1, format!("{}{}", f.u + 1, f.copy.suffix())]))
            .collect();
        json!({ "path": path, "terminal": self.terminal + 1 })
    }
}

impl fmt::Debug for FockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "Omega_{}", self.terminal + 1);
        }
        for (i, x) in self.factors().enumerate() {
            if i > 0 {
                f.write_str("(x)")?;
            }
            write!(
                f,
                "e[{},{}]({}{})",
                x.p + 1,
                x.q + 1,
                x.u + 1,
                x.copy.suffix()
            )?;
        }
        Ok(())
    }
}

/// Sparse vector of reduced amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<S> {
    terms: BTreeMap<FockPath, S>,
}

impl<S: Amplitude> Default for FockVector<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Amplitude> FockVector<S> {
    pub fn zero() -> Self {
        FockVector {
            terms: BTreeMap::new(),
        }
    }

    pub fn vacuum(q: usize) -> Self {
        Self::basis(FockPath::vacuum(q))
    }

    /// The basis vector of `path` with reduced coefficient 1.
    pub fn basis(path: FockPath) -> Self {
        let mut v = Self::zero();
        v.terms.insert(path, S::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Reduced coefficient of `path` (zero when absent).
    pub fn coefficient(&self, path: &FockPath) -> S {
        self.terms.get(path).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockPath, &S)> {
        self.terms.iter()
    }

    /// True amplitude of `path`, in floating point.
    pub fn amplitude_f64(&self, path: &FockPath, spec: &CovarianceSpec) -> num_complex::Complex64 {
        let scale = crate::scalar::to_f64(&path.weight(spec)).sqrt();
        self.coefficient(path).to_complex64() * scale
    }

    pub fn add_term(&mut self, path: FockPath, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(path) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&mut self, other: FockVector<S>) {
        for (p, c) in other.terms {
            self.add_term(p, c);
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero();
        for (p, x) in &self.terms {
            out.add_term(p.clone(), c.clone() * x.clone());
        }
        out
    }

    /// ⟨self, other⟩, linear in `other` and conjugate-linear in `self`.
    pub fn inner(&self, other: &Self, spec: &CovarianceSpec) -> S {
        let mut acc = S::zero();
        for (p, x) in &self.terms {
            if let Some(y) = other.terms.get(p) {
                acc = acc + x.conj() * y.clone() * S::from_rational(&p.weight(spec));
            }
        }
        acc
    }
}

impl FockVector<Rational> {
    /// Debug dump: one entry per stored path, amplitude as a rational times
    /// the half-powers of the listed covariances.
    pub fn to_json(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(path, c)| {
                let mut halfpowers: BTreeMap<String, u32> = BTreeMap::new();
                for f in path.factors() {
                    *halfpowers
                        .entry(format!("b[{},{}]({})", f.p + 1, f.q + 1, f.u + 1))
                        .or_default() += 1;
                }
                let mut obj = path.to_json();
                let rat = rational_to_json(c);
                obj["amplitude"] = json!({
                    "num": rat["num"],
                    "den": rat["den"],
                    "halfpowers": halfpowers,
                });
                obj
            })
            .collect();
        serde_json::Value::from(items)
    }
}

/// Creation ℘_{p,q}(u): Ω_q and paths starting at q gain a leading e_{p,q}(u).
pub fn apply_creation<S: Amplitude>(
    p: usize,
    q: usize,
    u: usize,
    copy: LabelCopy,
    v: &FockVector<S>,
    spec: &CovarianceSpec,
) -> FockVector<S> {
    let mut out = FockVector::zero();
    if spec.b(p, q, u).is_zero() {
        return out;
    }
    let f = Factor::new(p, q, u, copy);
    for (path, c) in &v.terms {
        if path.first_index() == q {
            out.add_term(path.prepend(f), c.clone());
        }
    }
    out
}

/// Annihilation ℘*_{p,q}(u): strips a leading e_{p,q}(u).
pub fn apply_annihilation<S: Amplitude>(
    p: usize,
    q: usize,
    u: usize,
    copy: LabelCopy,
    v: &FockVector<S>,
    spec: &CovarianceSpec,
) -> FockVector<S> {
    let mut out = FockVector::zero();
    let f = Factor::new(p, q, u, copy);
    let b = S::from_rational(spec.b(p, q, u));
    for (path, c) in &v.terms {
        if path.leading() == Some(&f) {
            out.add_term(path.tail(), c.clone() * b.clone());
        }
    }
    out
}

/// Operators acting on the Fock space.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum FockLetter {
    Creation {
        p: usize,
        q: usize,
        u: usize,
        copy: LabelCopy,
    },
    Annihilation {
        p: usize,
        q: usize,
        u: usize,
        copy: LabelCopy,
    },
    /// ζ_{p,q}(u) = ℘_{p,q}(u′) + ℘*_{q,p}(u″), or its adjoint.
    Zeta(Letter),
    /// η_{p,q}(u) = ζ_{p,q}(u) + ζ_{q,p}(u) for p ≠ q and ζ_{q,q}(u) on the diagonal.
    Eta(Letter),
    /// α₁ on vacua and α₂ on all other paths (conjugated when starred).
    Gamma {
        alpha1: ComplexRational,
        alpha2: ComplexRational,
        star: bool,
    },
    /// Σ_p α_p times the projection onto paths whose first index is p.
    Shift {
        alpha: Vec<ComplexRational>,
        star: bool,
    },
    Sum(Vec<FockLetter>),
}

impl FockLetter {
    pub fn adjoint(&self) -> FockLetter {
        match self {
            FockLetter::Creation { p, q, u, copy } => FockLetter::Annihilation {
                p: *p,
                q: *q,
                u: *u,
                copy: *copy,
            },
            FockLetter::Annihilation { p, q, u, copy } => FockLetter::Creation {
                p: *p,
                q: *q,
                u: *u,
                copy: *copy,
            },
            FockLetter::Zeta(l) => FockLetter::Zeta(l.adjoint()),
            FockLetter::Eta(l) => FockLetter::Eta(l.adjoint()),
            FockLetter::Gamma {
                alpha1,
                alpha2,
                star,
            } => FockLetter::Gamma {
                alpha1: alpha1.clone(),
                alpha2: alpha2.clone(),
                star: !star,
            },
            FockLetter::Shift { alpha, star } => FockLetter::Shift {
                alpha: alpha.clone(),
                star: !star,
            },
            FockLetter::Sum(xs) => FockLetter::Sum(xs.iter().map(|x| x.adjoint()).collect()),
        }
    }

    fn check(&self, spec: &CovarianceSpec) -> Result<()> {
        match self {
            FockLetter::Creation { p, q, u, .. } | FockLetter::Annihilation { p, q, u, .. } => {
                spec.check_index(*p, *q, *u)
            }
            FockLetter::Zeta(l) | FockLetter::Eta(l) => spec.check_letter(l),
            FockLetter::Gamma { .. } => Ok(()),
            FockLetter::Shift { alpha, .. } => {
                if alpha.len() == spec.r() {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "shift needs {} coefficients, got {}",
                        spec.r(),
                        alpha.len()
                    )))
                }
            }
            FockLetter::Sum(xs) => xs.iter().try_for_each(|x| x.check(spec)),
        }
    }
}

fn conj_if(x: &ComplexRational, star: bool) -> ComplexRational {
    if star {
        ComplexRational::new(x.re.clone(), -x.im.clone())
    } else {
        x.clone()
    }
}

fn apply_zeta<S: Amplitude>(l: &Letter, v: &FockVector<S>, spec: &CovarianceSpec) -> FockVector<S> {
    let (p, q, u) = (l.p, l.q, l.u);
    let (mut out, other) = if l.star {
        (
            apply_annihilation(p, q, u, LabelCopy::Prime, v, spec),
            apply_creation(q, p, u, LabelCopy::DoublePrime, v, spec),
        )
    } else {
        (
            apply_creation(p, q, u, LabelCopy::Prime, v, spec),
            apply_annihilation(q, p, u, LabelCopy::DoublePrime, v, spec),
        )
    };
    out.add(other);
    out
}

/// Applies one operator to a vector.
pub fn apply_letter<S: Amplitude>(
    l: &FockLetter,
    v: &FockVector<S>,
    spec: &CovarianceSpec,
) -> Result<FockVector<S>> {
    Ok(match l {
        FockLetter::Creation { p, q, u, copy } => apply_creation(*p, *q, *u, *copy, v, spec),
        FockLetter::Annihilation { p, q, u, copy } => {
            apply_annihilation(*p, *q, *u, *copy, v, spec)
        }
        FockLetter::Zeta(x) => apply_zeta(x, v, spec),
        FockLetter::Eta(x) => {
            let mut out = apply_zeta(x, v, spec);
            if x.p != x.q {
                out.add(apply_zeta(&Letter::new(x.q, x.p, x.u, x.star), v, spec));
            }
            out
        }
        FockLetter::Gamma {
            alpha1,
            alpha2,
            star,
        } => {
            let a1 = S::from_complex(&conj_if(alpha1, *star))?;
            let a2 = S::from_complex(&conj_if(alpha2, *star))?;
            let mut out = FockVector::zero();
            for (path, c) in &v.terms {
                let a = if path.is_vacuum() { &a1 } else { &a2 };
                out.add_term(path.clone(), a.clone() * c.clone());
            }
            out
        }
        FockLetter::Shift { alpha, star } => {
            let alpha = alpha
                .iter()
                .map(|a| S::from_complex(&conj_if(a, *star)))
                .collect::<Result<Vec<S>>>()?;
            let mut out = FockVector::zero();
            for (path, c) in &v.terms {
                out.add_term(path.clone(), alpha[path.first_index()].clone() * c.clone());
            }
            out
        }
        FockLetter::Sum(xs) => {
            let mut out = FockVector::zero();
            for x in xs {
                out.add(apply_letter(x, v, spec)?);
            }
            out
        }
    })
}

/// ⟨a_1 ⋯ a_m Ω_{q0}, Ω_{q0}⟩, applying the letters right to left.
pub fn vacuum_expectation<S: Amplitude>(
    word: &[FockLetter],
    q0: usize,
    spec: &CovarianceSpec,
) -> Result<S> {
    vacuum_expectation_capped(word, q0, spec, DEFAULT_WORD_CAP)
}

pub fn vacuum_expectation_capped<S: Amplitude>(
    word: &[FockLetter],
    q0: usize,
    spec: &CovarianceSpec,
    cap: usize,
) -> Result<S> {
    if word.len() > cap {
        return Err(Error::SizeLimit {
            what: "Fock word length",
            limit: cap,
            got: word.len(),
        });
    }
    spec.check_state(q0)?;
    for l in word {
        l.check(spec)?;
    }
    let mut v = FockVector::<S>::vacuum(q0);
    for l in word.iter().rev() {
        v = apply_letter(l, &v, spec)?;
        if v.is_zero() {
            return Ok(S::zero());
        }
    }
    Ok(v.coefficient(&FockPath::vacuum(q0)))
}

/// Exact Φ_{q0} of a ζ-word.
pub fn zeta_expectation(letters: &[Letter], q0: usize, spec: &CovarianceSpec) -> Result<Rational> {
    let word: Vec<FockLetter> = letters.iter().map(|l| FockLetter::Zeta(*l)).collect();
    vacuum_expectation(&word, q0, spec)
}

/// Exact Ψ_{q0} of an η-word.
pub fn eta_expectation(letters: &[Letter], q0: usize, spec: &CovarianceSpec) -> Result<Rational> {
    let word: Vec<FockLetter> = letters.iter().map(|l| FockLetter::Eta(*l)).collect();
    vacuum_expectation(&word, q0, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact_sqrt, int, rat};

    fn two_by_two(b11: i64, b12: i64, b21: i64, b22: i64) -> CovarianceSpec {
        CovarianceSpec::new(
            2,
            vec![vec![vec![int(b11), int(b12)], vec![int(b21), int(b22)]]],
        )
        .unwrap()
    }

    /// All chained paths of length ≤ max over r indices and one label copy.
    fn all_paths(r: usize, max: usize, copies: &[LabelCopy]) -> Vec<FockPath> {
        let mut out: Vec<FockPath> = (0..r).map(FockPath::vacuum).collect();
        let mut frontier = out.clone();
        for _ in 0..max {
            let mut next = Vec::new();
            for path in &frontier {
                for p in 0..r {
                    for &copy in copies {
                        next.push(path.prepend(Factor::new(p, path.first_index(), 0, copy)));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Independent oracle: the true amplitude of ℘_{p,q}(u) between two basis
    /// vectors, from the definition with explicit square roots.
    fn creation_matrix_element(
        x: &FockPath,
        y: &FockPath,
        p: usize,
        q: usize,
        spec: &CovarianceSpec,
    ) -> Rational {
        // ⟨℘ x, y⟩ for unit basis vectors (true amplitudes 1).
        let prepended = FockPath {
            rev: {
                let mut r = x.rev.clone();
                r.push(Factor::new(p, q, 0, LabelCopy::Prime));
                r
            },
            terminal: x.terminal,
        };
        if x.first_index() == q && &prepended == y {
            exact_sqrt(spec.b(p, q, 0)).unwrap()
        } else {
            Rational::zero()
        }
    }

    #[test]
    fn creation_examples() {
        let spec = two_by_two(4, 9, 1, 16);
        let v =
            apply_creation::<Rational>(0, 1, 0, LabelCopy::Prime, &FockVector::vacuum(1), &spec);
        let expected = FockPath::from_factors(&[Factor::new(0, 1, 0, LabelCopy::Prime)]).unwrap();
        assert_eq!(v.coefficient(&expected), int(1));
        assert_eq!(v.amplitude_f64(&expected, &spec).re, 3.0);
        assert!(apply_creation::<Rational>(
            0,
            1,
            0,
            LabelCopy::Prime,
            &FockVector::vacuum(0),
            &spec
        )
        .is_zero());

        let start = FockVector::<Rational>::basis(
            FockPath::from_factors(&[Factor::new(1, 0, 0, LabelCopy::Prime)]).unwrap(),
        );
        let v = apply_creation(1, 1, 0, LabelCopy::Prime, &start, &spec);
        let path = FockPath::from_factors(&[
            Factor::new(1, 1, 0, LabelCopy::Prime),
            Factor::new(1, 0, 0, LabelCopy::Prime),
        ])
        .unwrap();
        // √16·√1 = 4 for the new path against √1 before.
        assert_eq!(v.amplitude_f64(&path, &spec).re, 4.0);
    }

    #[test]
    fn annihilation_examples() {
        let spec = two_by_two(4, 9, 1, 16);
        let one = FockPath::from_factors(&[Factor::new(0, 1, 0, LabelCopy::Prime)]).unwrap();
        let v = apply_annihilation::<Rational>(
            0,
            1,
            0,
            LabelCopy::Prime,
            &FockVector::basis(one),
            &spec,
        );
        assert_eq!(v.coefficient(&FockPath::vacuum(1)), int(9));
        assert!(apply_annihilation::<Rational>(
            0,
            1,
            0,
            LabelCopy::Prime,
            &FockVector::vacuum(1),
            &spec
        )
        .is_zero());
        let word = [
            FockLetter::Annihilation {
                p: 0,
                q: 1,
                u: 0,
                copy: LabelCopy::Prime,
            },
            FockLetter::Creation {
                p: 0,
                q: 1,
                u: 0,
                copy: LabelCopy::Prime,
            },
        ];
        assert_eq!(
            vacuum_expectation::<Rational>(&word, 1, &spec).unwrap(),
            int(9)
        );
    }

    #[test]
    fn adjoint_symmetry_exhaustive() {
        // Perfect squares keep true amplitudes rational, so the oracle can use
        // explicit square roots.
        let spec = two_by_two(4, 9, 1, 16);
        let paths = all_paths(2, 5, &[LabelCopy::Prime]);
        for p in 0..2 {
            for q in 0..2 {
                for x in &paths {
                    let cx = apply_creation::<Rational>(
                        p,
                        q,
                        0,
                        LabelCopy::Prime,
                        &FockVector::basis(x.clone()),
                        &spec,
                    );
                    for y in &paths {
                        if y.len() > 6 {
                            continue;
                        }
                        let ay = apply_annihilation::<Rational>(
                            p,
                            q,
                            0,
                            LabelCopy::Prime,
                            &FockVector::basis(y.clone()),
                            &spec,
                        );
                        let ex = FockVector::<Rational>::basis(x.clone());
                        let ey = FockVector::<Rational>::basis(y.clone());
                        // Reduced basis vectors have norm² = weight; normalize.
                        let nx = exact_sqrt(&x.weight(&spec)).unwrap();
                        let ny = exact_sqrt(&y.weight(&spec)).unwrap();
                        let lhs = cx.inner(&ey, &spec);
                        let rhs = ex.inner(&ay, &spec);
                        assert_eq!(lhs, rhs, "p={p} q={q} x={x} y={y}");
                        let oracle = creation_matrix_element(x, y, p, q, &spec);
                        assert_eq!(lhs / (nx * ny), oracle, "p={p} q={q} x={x} y={y}");
                    }
                }
            }
        }
    }

    #[test]
    fn zeta_on_vacuum() {
        let spec = two_by_two(4, 9, 1, 16);
        let v = apply_letter::<Rational>(
            &FockLetter::Zeta(Letter::zeta(0, 1)),
            &FockVector::vacuum(1),
            &spec,
        )
        .unwrap();
        assert_eq!(v.len(), 1);
        let (path, _) = v.iter().next().unwrap();
        assert_eq!(path.to_string(), "e[1,2](1')");
        let eta = apply_letter::<Rational>(
            &FockLetter::Eta(Letter::zeta(0, 1)),
            &FockVector::vacuum(1),
            &spec,
        )
        .unwrap();
        assert_eq!(eta, v);
    }

    #[test]
    fn gamma_action() {
        let spec = two_by_two(0, 0, 1, 1);
        let g = FockLetter::Gamma {
            alpha1: ComplexRational::new(int(2), int(0)),
            alpha2: ComplexRational::new(int(5), int(0)),
            star: false,
        };
        let v = apply_letter::<Rational>(&g, &FockVector::vacuum(0), &spec).unwrap();
        assert_eq!(v.coefficient(&FockPath::vacuum(0)), int(2));
        let path = FockPath::from_factors(&[Factor::new(1, 0, 0, LabelCopy::Prime)]).unwrap();
        let v = apply_letter::<Rational>(&g, &FockVector::basis(path.clone()), &spec).unwrap();
        assert_eq!(v.coefficient(&path), int(5));
    }

    #[test]
    fn example_moment_and_catalan() {
        let (p, q) = (0, 1);
        let spec = two_by_two(0, 2, 3, 0);
        let w = [
            Letter::zeta_star(p, q),
            Letter::zeta(p, q),
            Letter::zeta_star(p, q),
            Letter::zeta(p, q),
        ];
        assert_eq!(zeta_expectation(&w, q, &spec).unwrap(), int(10));

        let spec = two_by_two(0, 3, 3, 0);
        let w: Vec<Letter> = (0..3)
            .flat_map(|_| [Letter::zeta_star(p, q), Letter::zeta(p, q)])
            .collect();
        assert_eq!(zeta_expectation(&w, q, &spec).unwrap(), int(5 * 27));
        assert_eq!(
            vacuum_expectation::<Rational>(&[], q, &spec).unwrap(),
            int(1)
        );
    }

    #[test]
    fn word_cap() {
        let spec = two_by_two(1, 1, 1, 1);
        let w = vec![FockLetter::Zeta(Letter::zeta(0, 0)); 13];
        assert!(matches!(
            vacuum_expectation::<Rational>(&w, 0, &spec),
            Err(Error::SizeLimit {
                limit: 12,
                got: 13,
                ..
            })
        ));
        assert!(vacuum_expectation_capped::<Rational>(&w, 0, &spec, 13).is_ok());
    }

    #[test]
    fn float_mode_matches_exact() {
        let spec = CovarianceSpec::new(
            2,
            vec![vec![vec![rat(1, 3), rat(2, 5)], vec![rat(7, 4), rat(1, 2)]]],
        )
        .unwrap();
        let w: Vec<FockLetter> = [
            Letter::zeta_star(0, 1),
            Letter::zeta(0, 1),
            Letter::zeta(1, 1),
            Letter::zeta_star(1, 1),
        ]
        .iter()
        .map(|l| FockLetter::Zeta(*l))
        .collect();
        let exact: Rational = vacuum_expectation(&w, 1, &spec).unwrap();
        let fast: f64 = vacuum_expectation(&w, 1, &spec).unwrap();
        assert!((crate::scalar::to_f64(&exact) - fast).abs() < 1e-12);
        assert!(exact != Rational::zero());
    }

    #[test]
    fn json_dump() {
        let spec = two_by_two(4, 9, 1, 16);
        let v = apply_letter::<Rational>(
            &FockLetter::Zeta(Letter::zeta(0, 1)),
            &FockVector::vacuum(1),
            &spec,
        )
        .unwrap();
        let j = v.to_json();
        assert_eq!(j[0]["path"], json!([[1, 2, "1'"]]));
        assert_eq!(j[0]["terminal"], json!(2));
        assert_eq!(j[0]["amplitude"]["halfpowers"]["b[1,2](1)"], json!(1));
    }
}
