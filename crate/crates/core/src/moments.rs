//! Combinatorial moment engine: sums over adapted colored noncrossing
//! pairings, summed-array moments, and the Kesten / Meixner closed forms.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fock::FockLetter;
use crate::partitions::{
    adapted_coloring, visit_noncrossing, Coloring, OuterStructure, PairsWhere, Partition,
    SingletonsOrPairsWhere,
};
use crate::scalar::{ComplexRational, Rational};
use crate::spec::CovarianceSpec;
use crate::word::{is_cyclic, EpsWord, Letter, Word};

/// One term of a moment sum, kept in explain mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub partition: Partition,
    pub coloring: Coloring,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentResult {
    pub value: Rational,
    pub contributions: Option<Vec<Contribution>>,
}

/// Π over blocks of b_{f(block), f(outer block)}(u); zero when a pair mixes labels.
pub fn weight_of(
    pi: &Partition,
    f: &Coloring,
    letters: &[Letter],
    spec: &CovarianceSpec,
) -> Rational {
    let outer: OuterStructure = pi.outer_structure();
    let mut w = Rational::one();
    for (k, block) in pi.blocks().iter().enumerate() {
        let u = letters[block[0]].u;
        if block.iter().any(|&i| letters[i].u != u) {
            return Rational::zero();
        }
        w *= spec.b(f.block_color[k], f.outer_color(&outer, k), u);
        if w.is_zero() {
            return w;
        }
    }
    w
}

fn validate(letters: &[Letter], q0: usize, spec: &CovarianceSpec) -> Result<()> {
    spec.check_state(q0)?;
    letters.iter().try_for_each(|l| spec.check_letter(l))
}

/// Whether the effective tuple closes at q0: a necessary condition for any
/// nonzero moment Φ_{q0}.
pub fn closes_at(letters: &[Letter], q0: usize) -> bool {
    match letters.last() {
        None => true,
        Some(last) => {
            let units: Vec<(usize, usize)> = letters.iter().map(|l| l.unit()).collect();
            last.unit().1 == q0 && is_cyclic(&units)
        }
    }
}

fn matched(a: &Letter, b: &Letter) -> bool {
    a.p == b.p && a.q == b.q && a.u == b.u && a.star != b.star
}

/// Visits the adapted pairings of a word (pairs of equal (p,q,u) with
/// opposite stars) and hands each one's weight to `visit`.
fn visit_weighted_pairings(
    letters: &[Letter],
    q0: usize,
    spec: &CovarianceSpec,
    visit: &mut dyn FnMut(&[u8], Rational),
) {
    let m = letters.len();
    if m % 2 == 1 || !closes_at(letters, q0) {
        return;
    }
    let rule = PairsWhere(|i: usize, j: usize| matched(&letters[i], &letters[j]));
    let mut stack: Vec<usize> = Vec::with_capacity(m / 2);
    visit_noncrossing(m, &rule, &mut |labels| {
        stack.clear();
        let mut seen = [false; 256];
        let mut w = Rational::one();
        for (i, &l) in labels.iter().enumerate() {
            if seen[l as usize] {
                stack.pop();
                continue;
            }
            seen[l as usize] = true;
            let x = &letters[i];
            // (*,1) pairs take the color p, (1,*) pairs the color q.
            let color = if x.star { x.p } else { x.q };
            let outer = stack.last().copied().unwrap_or(q0);
            w *= spec.b(color, outer, x.u);
            if w.is_zero() {
                return;
            }
            stack.push(color);
        }
        visit(labels, w);
    });
}

/// Φ_{q0} of a ζ-word as a sum over adapted pairings.
pub fn moment_value(letters: &[Letter], q0: usize, spec: &CovarianceSpec) -> Result<Rational> {
    validate(letters, q0, spec)?;
    let mut total = Rational::zero();
    visit_weighted_pairings(letters, q0, spec, &mut |_, w| total += w);
    Ok(total)
}

pub fn moment(word: &Word, spec: &CovarianceSpec) -> Result<MomentResult> {
    Ok(MomentResult {
        value: moment_value(&word.letters, word.condition, spec)?,
        contributions: None,
    })
}

/// Like [`moment`] but keeps every nonzero contribution, in enumeration order.
pub fn moment_explained(word: &Word, spec: &CovarianceSpec) -> Result<MomentResult> {
    validate(&word.letters, word.condition, spec)?;
    let mut contributions = Vec::new();
    let mut err = None;
    visit_weighted_pairings(&word.letters, word.condition, spec, &mut |labels, w| {
        let pi =
            Partition::from_blocks(labels.len(), &blocks_of(labels)).expect("generated partition");
        match adapted_coloring(&pi, &word.letters, word.condition) {
            Ok(coloring) => contributions.push(Contribution {
                partition: pi,
                coloring,
                weight: w,
            }),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let value = contributions.iter().map(|c| c.weight.clone()).sum();
    Ok(MomentResult {
        value,
        contributions: Some(contributions),
    })
}

fn blocks_of(labels: &[u8]) -> Vec<Vec<usize>> {
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[l as usize].push(i);
    }
    out
}

/// Expands a word in η-letters into its ζ-words.
pub fn expand_eta(letters: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::with_capacity(letters.len())];
    for l in letters {
        if l.p == l.q {
            out.iter_mut().for_each(|w| w.push(*l));
            continue;
        }
        let swapped = Letter::new(l.q, l.p, l.u, l.star);
        out = out
            .into_iter()
            .flat_map(|w| {
                let mut a = w.clone();
                a.push(*l);
                let mut b = w;
                b.push(swapped);
                [a, b]
            })
            .collect();
    }
    out
}

/// Ψ_{q0} of a word in the symmetrized operators η_{p,q}(u).
pub fn eta_moment(letters: &[Letter], q0: usize, spec: &CovarianceSpec) -> Result<Rational> {
    validate(letters, q0, spec)?;
    let mut total = Rational::zero();
    for w in expand_eta(letters) {
        total += moment_value(&w, q0, spec)?;
    }
    Ok(total)
}

/// State for summed-array moments: one Φ_q or a mixture Σ_q d_q Φ_q.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayState {
    Vacuum(usize),
    Mixture(Vec<Rational>),
}

/// Moment of ζ = Σ_{p,q,u} ζ_{p,q}(u), expanded over every index and label
/// assignment that chains.
pub fn summed_array_moment(
    eps: &EpsWord,
    state: &ArrayState,
    spec: &CovarianceSpec,
) -> Result<Rational> {
    match state {
        ArrayState::Vacuum(q) => {
            spec.check_state(*q)?;
            Ok(summed_at(eps.stars(), *q, spec))
        }
        ArrayState::Mixture(d) => {
            if d.len() != spec.r() {
                return Err(Error::Precondition(format!(
                    "mixture needs {} weights, got {}",
                    spec.r(),
                    d.len()
                )));
            }
            let mut total = Rational::zero();
            for (q, dq) in d.iter().enumerate() {
                if !dq.is_zero() {
                    total += dq * summed_at(eps.stars(), q, spec);
                }
            }
            Ok(total)
        }
    }
}

fn summed_at(stars: &[bool], q0: usize, spec: &CovarianceSpec) -> Rational {
    let m = stars.len();
    if m == 0 {
        return Rational::one();
    }
    if m % 2 == 1 {
        return Rational::zero();
    }
    // a_0 = q0, letter k carries the unit (a_{k-1}, a_k), a_m = q0.
    fn rec(
        k: usize,
        prev: usize,
        stars: &[bool],
        q0: usize,
        spec: &CovarianceSpec,
        word: &mut Vec<Letter>,
        total: &mut Rational,
    ) {
        let m = stars.len();
        if k == m {
            *total += moment_value(word, q0, spec).expect("indices in range");
            return;
        }
        let nexts: Vec<usize> = if k + 1 == m {
            vec![q0]
        } else {
            (0..spec.r()).collect()
        };
        for next in nexts {
            for u in 0..spec.labels() {
                let l = if stars[k] {
                    Letter::new(next, prev, u, true)
                } else {
                    Letter::new(prev, next, u, false)
                };
                word.push(l);
                rec(k + 1, next, stars, q0, spec, word, total);
                word.pop();
            }
        }
    }
    let mut total = Rational::zero();
    rec(
        0,
        q0,
        stars,
        q0,
        spec,
        &mut Vec::with_capacity(m),
        &mut total,
    );
    total
}

/// Σ over ε-adapted noncrossing pairings of Π β_depth (β_d = β₂ for d ≥ 2).
pub fn kesten_moment(eps: &EpsWord, beta1: &Rational, beta2: &Rational) -> Rational {
    let stars = eps.stars();
    if stars.len() % 2 == 1 {
        return Rational::zero();
    }
    let rule = PairsWhere(|i: usize, j: usize| stars[i] != stars[j]);
    let mut total = Rational::zero();
    let mut depth = 0usize;
    visit_noncrossing(stars.len(), &rule, &mut |labels| {
        let mut seen = [false; 256];
        let mut w = Rational::one();
        depth = 0;
        for &l in labels {
            if seen[l as usize] {
                depth -= 1;
                continue;
            }
            seen[l as usize] = true;
            depth += 1;
            w *= if depth == 1 { beta1 } else { beta2 };
        }
        total += w;
    });
    total
}

/// Parameters of the circular free Meixner law.
#[derive(Clone, Debug, PartialEq)]
pub struct MeixnerParams {
    pub beta1: Rational,
    pub beta2: Rational,
    pub alpha1: ComplexRational,
    pub alpha2: ComplexRational,
}

impl MeixnerParams {
    pub fn kesten(beta1: Rational, beta2: Rational) -> Self {
        MeixnerParams {
            beta1,
            beta2,
            alpha1: ComplexRational::zero(),
            alpha2: ComplexRational::zero(),
        }
    }

    /// Every violated parameter rule.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.beta1.is_negative() {
            out.push(format!("beta1 = {} must be non-negative", self.beta1));
        }
        if self.beta2.is_negative() {
            out.push(format!("beta2 = {} must be non-negative", self.beta2));
        }
        if self.beta1.is_zero() && !(self.alpha2.is_zero() && self.beta2.is_zero()) {
            out.push("beta1 = 0 requires alpha2 = 0 and beta2 = 0".to_string());
        }
        if self.beta2.is_zero() && !self.alpha2.is_zero() {
            out.push("beta2 = 0 requires alpha2 = 0".to_string());
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameters(d.join("; ")))
        }
    }

    /// The covariance array behind the model: b₂₁ = β₁, b₂₂ = β₂, b₁₁ = b₁₂ = 0.
    pub fn spec(&self) -> CovarianceSpec {
        CovarianceSpec::kesten(&self.beta1, &self.beta2)
    }

    /// ζ₂₁ + ζ₁₂ + ζ₂₂ + γ (or its adjoint) as one Fock operator.
    pub fn fock_letter(&self, star: bool) -> FockLetter {
        let z = |p, q| FockLetter::Zeta(Letter::new(p, q, 0, star));
        FockLetter::Sum(vec![
            z(1, 0),
            z(0, 1),
            z(1, 1),
            FockLetter::Gamma {
                alpha1: self.alpha1.clone(),
                alpha2: self.alpha2.clone(),
                star,
            },
        ])
    }
}

fn conj(x: &ComplexRational) -> ComplexRational {
    ComplexRational::new(x.re.clone(), -x.im.clone())
}

/// Σ over singleton-pair adapted partitions of α(π)β(π); a singleton at a
/// starred position contributes the conjugate of α_depth.
pub fn meixner_moment(eps: &EpsWord, params: &MeixnerParams) -> Result<ComplexRational> {
    params.validate()?;
    let stars = eps.stars();
    let m = stars.len();
    let rule = SingletonsOrPairsWhere(|i: usize, j: usize| stars[i] != stars[j]);
    let beta = |d: usize| {
        ComplexRational::from(if d == 1 { &params.beta1 } else { &params.beta2 }.clone())
    };
    let (b1, b2) = (beta(1), beta(2));
    let mut total = ComplexRational::zero();
    visit_noncrossing(m, &rule, &mut |labels| {
        let mut last = [0usize; 256];
        for (i, &l) in labels.iter().enumerate() {
            last[l as usize] = i;
        }
        let mut seen = [false; 256];
        let mut depth = 0usize;
        let mut w = ComplexRational::one();
        for (i, &l) in labels.iter().enumerate() {
            if seen[l as usize] {
                depth -= 1;
                continue;
            }
            seen[l as usize] = true;
            let d = depth + 1;
            if last[l as usize] == i {
                let a = if d == 1 {
                    &params.alpha1
                } else {
                    &params.alpha2
                };
                w *= if stars[i] { conj(a) } else { a.clone() };
            } else {
                w *= if d == 1 { b1.clone() } else { b2.clone() };
                depth += 1;
            }
            if w.is_zero() {
                return;
            }
        }
        total = total.clone() + w;
    });
    Ok(total)
}

/// The Meixner operator word in Fock space, X^{ε_1} ⋯ X^{ε_m}.
pub fn meixner_fock_word(eps: &EpsWord, params: &MeixnerParams) -> Vec<FockLetter> {
    eps.stars().iter().map(|&s| params.fock_letter(s)).collect()
}

/// Kesten moment through the general combinatorial engine: expands
/// X = ζ₂₁ + ζ₁₂ + ζ₂₂ letter by letter and evaluates each ζ-word at Ψ₁.
pub fn kesten_moment_general(
    eps: &EpsWord,
    beta1: &Rational,
    beta2: &Rational,
) -> Result<Rational> {
    let spec = CovarianceSpec::kesten(beta1, beta2);
    let choices = [(1usize, 0usize), (0, 1), (1, 1)];
    let mut total = Rational::zero();
    let mut word = Vec::with_capacity(eps.len());
    fn rec(
        k: usize,
        stars: &[bool],
        choices: &[(usize, usize)],
        spec: &CovarianceSpec,
        word: &mut Vec<Letter>,
        total: &mut Rational,
    ) -> Result<()> {
        if k == stars.len() {
            *total += moment_value(word, 0, spec)?;
            return Ok(());
        }
        for &(p, q) in choices {
            word.push(Letter::new(p, q, 0, stars[k]));
            rec(k + 1, stars, choices, spec, word, total)?;
            word.pop();
        }
        Ok(())
    }
    rec(0, eps.stars(), &choices, &spec, &mut word, &mut total)?;
    Ok(total)
}
