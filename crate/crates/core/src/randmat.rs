//! Monte Carlo engine: Gaussian matrices with block-dependent variances,
//! their blocks and symmetric blocks, and partial-trace moment estimates
//! compared against exact operator-model predictions.
//!
//! Entry (i, j) of Y(u) with i ∈ N_p, j ∈ N_q is complex Gaussian with
//! E|Y_ij|² = v_{p,q}(u)/n; real and imaginary parts are independent with
//! variance v_{p,q}(u)/(2n) each. Trial t draws from a ChaCha8 stream
//! (seed, t), so results do not depend on scheduling.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use ndarray::{s, Array2, ArrayView2};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{vacuum_expectation, FockLetter};
use crate::moments::MeixnerParams;
use crate::scalar::{to_c64, to_f64, ComplexRational, Rational};
use crate::spec::CovarianceSpec;
use crate::word::Letter;

/// Default number of Monte Carlo trials.
pub const DEFAULT_TRIALS: usize = 2000;
/// Longest word the estimator accepts.
pub const MAX_WORD_LEN: usize = 8;

/// Block sizes n_q, variances V(u), seed and trial count.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockModel {
    sizes: Vec<usize>,
    /// `variances[u][p][q]`
    variances: Vec<Vec<Vec<Rational>>>,
    variances_f64: Vec<Vec<Vec<f64>>>,
    pub seed: u64,
    pub trials: usize,
}

impl BlockModel {
    pub fn new(
        sizes: Vec<usize>,
        variances: Vec<Vec<Vec<Rational>>>,
        seed: u64,
        trials: usize,
    ) -> Result<Self> {
        let d = Self::diagnostics(&sizes, &variances, trials);
        if !d.is_empty() {
            return Err(Error::InvalidParameters(d.join("; ")));
        }
        let variances_f64 = variances
            .iter()
            .map(|m| {
                m.iter()
                    .map(|row| row.iter().map(to_f64).collect())
                    .collect()
            })
            .collect();
        Ok(BlockModel {
            sizes,
            variances,
            variances_f64,
            seed,
            trials,
        })
    }

    pub fn diagnostics(
        sizes: &[usize],
        variances: &[Vec<Vec<Rational>>],
        trials: usize,
    ) -> Vec<String> {
        let r = sizes.len();
        let mut out = Vec::new();
        if r == 0 {
            out.push("at least one block is required".to_string());
        }
        if let Some(q) = sizes.iter().position(|&s| s == 0) {
            out.push(format!("block {} is empty", q + 1));
        }
        if variances.is_empty() {
            out.push("at least one label is required".to_string());
        }
        for (u, m) in variances.iter().enumerate() {
            if m.len() != r || m.iter().any(|row| row.len() != r) {
                out.push(format!("V({}) must be {r}x{r}", u + 1));
            } else if m.iter().flatten().any(|x| x.is_negative()) {
                out.push(format!("V({}) has a negative variance", u + 1));
            }
        }
        if trials < 2 {
            out.push("at least two trials are needed for a standard error".to_string());
        }
        out
    }

    pub fn r(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self) -> usize {
        self.variances.len()
    }

    pub fn variances(&self) -> &[Vec<Vec<Rational>>] {
        &self.variances
    }

    /// First index of each interval N_q.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.sizes
            .iter()
            .map(|s| {
                let o = acc;
                acc += s;
                o
            })
            .collect()
    }

    /// Finite-n dimensions n_q / n.
    pub fn dims(&self) -> Vec<Rational> {
        let n = self.n() as i64;
        self.sizes
            .iter()
            .map(|&s| crate::scalar::rat(s as i64, n))
            .collect()
    }

    /// First label whose V(u) is not symmetric.
    pub fn asymmetric_label(&self) -> Option<usize> {
        let r = self.r();
        self.variances
            .iter()
            .position(|v| (0..r).any(|p| (0..p).any(|q| v[p][q] != v[q][p])))
    }

    /// B(u) = diag(n_q/n)·V(u): the covariances the blocks converge to.
    pub fn prediction_spec(&self) -> CovarianceSpec {
        CovarianceSpec::from_dimensions(self.dims(), self.variances.clone())
            .expect("validated model")
    }

    fn range(&self, q: usize) -> std::ops::Range<usize> {
        let o = self.offsets()[q];
        o..o + self.sizes[q]
    }
}

/// Dense complex matrix with split real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub re: Array2<f64>,
    pub im: Array2<f64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            re: Array2::zeros((rows, cols)),
            im: Array2::zeros((rows, cols)),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[[i, j]], self.im[[i, j]])
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix {
            re: self.re.t().to_owned(),
            im: self.im.t().mapv(|x| -x),
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        let re = self.re.dot(&other.re) - self.im.dot(&other.im);
        let im = self.re.dot(&other.im) + self.im.dot(&other.re);
        CMatrix { re, im }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn trace(&self) -> Complex64 {
        Complex64::new(self.re.diag().sum(), self.im.diag().sum())
    }

    pub fn is_zero(&self) -> bool {
        self.re.iter().chain(self.im.iter()).all(|x| *x == 0.0)
    }

    /// S_{p,q} = D_p Y D_q: zero outside N_p × N_q.
    pub fn block(&self, model: &BlockModel, p: usize, q: usize) -> CMatrix {
        let n = model.n();
        let mut out = CMatrix::zeros(n, n);
        let (rp, rq) = (model.range(p), model.range(q));
        out.re
            .slice_mut(s![rp.clone(), rq.clone()])
            .assign(&self.re.slice(s![rp.clone(), rq.clone()]));
        out.im
            .slice_mut(s![rp.clone(), rq.clone()])
            .assign(&self.im.slice(s![rp, rq]));
        out
    }

    /// T_{p,q} = S_{p,q} + S_{q,p} for p ≠ q and S_{q,q} on the diagonal.
    pub fn symblock(&self, model: &BlockModel, p: usize, q: usize) -> CMatrix {
        if p == q {
            self.block(model, p, q)
        } else {
            self.block(model, p, q).add(&self.block(model, q, p))
        }
    }
}

/// Draws Y(u) for one trial.
pub fn sample_matrix(model: &BlockModel, u: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let n = model.n();
    let mut block_of = vec![0usize; n];
    for q in 0..model.r() {
        for i in model.range(q) {
            block_of[i] = q;
        }
    }
    let scale: Vec<Vec<f64>> = model.variances_f64[u]
        .iter()
        .map(|row| row.iter().map(|v| (v / (2.0 * n as f64)).sqrt()).collect())
        .collect();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let sd = scale[block_of[i]][block_of[j]];
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            m.re[[i, j]] = sd * x;
            m.im[[i, j]] = sd * y;
        }
    }
    m
}

/// The RNG stream of one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// A letter of a matrix word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MatrixWordLetter {
    /// Y(u) or Y(u)*.
    Full { u: usize, star: bool },
    /// S_{p,q}(u) or its adjoint.
    Block {
        p: usize,
        q: usize,
        u: usize,
        star: bool,
    },
    /// T_{p,q}(u) or its adjoint.
    SymBlock {
        p: usize,
        q: usize,
        u: usize,
        star: bool,
    },
    /// Y(u) + Σ_q α_q I_q, or its adjoint.
    Shifted {
        u: usize,
        star: bool,
        alpha: Vec<ComplexRational>,
    },
}

impl MatrixWordLetter {
    pub fn adjoint(&self) -> Self {
        match self.clone() {
            MatrixWordLetter::Full { u, star } => MatrixWordLetter::Full { u, star: !star },
            MatrixWordLetter::Block { p, q, u, star } => MatrixWordLetter::Block {
                p,
                q,
                u,
                star: !star,
            },
            MatrixWordLetter::SymBlock { p, q, u, star } => MatrixWordLetter::SymBlock {
                p,
                q,
                u,
                star: !star,
            },
            MatrixWordLetter::Shifted { u, star, alpha } => MatrixWordLetter::Shifted {
                u,
                star: !star,
                alpha,
            },
        }
    }

    fn check(&self, model: &BlockModel) -> Result<()> {
        let r = model.r();
        let (idx, u) = match self {
            MatrixWordLetter::Full { u, .. } => (None, *u),
            MatrixWordLetter::Block { p, q, u, .. }
            | MatrixWordLetter::SymBlock { p, q, u, .. } => (Some((*p, *q)), *u),
            MatrixWordLetter::Shifted { u, alpha, .. } => {
                if alpha.len() != r {
                    return Err(Error::Precondition(format!(
                        "shift needs {r} coefficients, got {}",
                        alpha.len()
                    )));
                }
                (None, *u)
            }
        };
        if u >= model.labels() || idx.is_some_and(|(p, q)| p >= r || q >= r) {
            return Err(Error::IndexOutOfRange(format!(
                "matrix letter {self} for r={r} with {} label(s)",
                model.labels()
            )));
        }
        Ok(())
    }

    /// The operator this letter converges to.
    pub fn fock_letter(&self, r: usize) -> FockLetter {
        let all = |u: usize, star: bool| -> Vec<FockLetter> {
            (0..r)
                .flat_map(|p| (0..r).map(move |q| FockLetter::Zeta(Letter::new(p, q, u, star))))
                .collect()
        };
        match self {
            MatrixWordLetter::Full { u, star } => FockLetter::Sum(all(*u, *star)),
            MatrixWordLetter::Block { p, q, u, star } => {
                FockLetter::Zeta(Letter::new(*p, *q, *u, *star))
            }
            MatrixWordLetter::SymBlock { p, q, u, star } => {
                FockLetter::Eta(Letter::new(*p, *q, *u, *star))
            }
            MatrixWordLetter::Shifted { u, star, alpha } => {
                let mut xs = all(*u, *star);
                xs.push(FockLetter::Shift {
                    alpha: alpha.clone(),
                    star: *star,
                });
                FockLetter::Sum(xs)
            }
        }
    }

    /// (row block, column block, label, adjoint) for every Gaussian block
    /// the letter contains.
    fn terms(&self, r: usize) -> Vec<(usize, usize, usize, bool)> {
        let one = |p: usize, q: usize, u: usize, star: bool| {
            if star {
                (q, p, u, true)
            } else {
                (p, q, u, false)
            }
        };
        match self {
            MatrixWordLetter::Full { u, star } | MatrixWordLetter::Shifted { u, star, .. } => (0
                ..r)
                .flat_map(|p| (0..r).map(move |q| (p, q)))
                .map(|(p, q)| one(p, q, *u, *star))
                .collect(),
            MatrixWordLetter::Block { p, q, u, star } => vec![one(*p, *q, *u, *star)],
            MatrixWordLetter::SymBlock { p, q, u, star } => {
                if p == q {
                    vec![one(*p, *q, *u, *star)]
                } else {
                    vec![one(*p, *q, *u, *star), one(*q, *p, *u, *star)]
                }
            }
        }
    }

    fn diagonal(&self) -> Option<Vec<Complex64>> {
        match self {
            MatrixWordLetter::Shifted { alpha, star, .. } => {
                let a: Vec<Complex64> = alpha
                    .iter()
                    .map(|x| if *star { to_c64(x).conj() } else { to_c64(x) })
                    .collect();
                a.iter().any(|x| !x.is_zero()).then_some(a)
            }
            _ => None,
        }
    }
}

impl fmt::Display for MatrixWordLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = |s: &bool| if *s { "*" } else { "" };
        match self {
            MatrixWordLetter::Full { u, star } => write!(f, "Y{}({})", st(star), u + 1),
            MatrixWordLetter::Block { p, q, u, star } => {
                write!(f, "S{}[{},{}]({})", st(star), p + 1, q + 1, u + 1)
            }
            MatrixWordLetter::SymBlock { p, q, u, star } => {
                write!(f, "T{}[{},{}]({})", st(star), p + 1, q + 1, u + 1)
            }
            MatrixWordLetter::Shifted { u, star, .. } => write!(f, "M{}({})", st(star), u + 1),
        }
    }
}

pub fn word_to_string(word: &[MatrixWordLetter]) -> String {
    if word.is_empty() {
        return "1".into();
    }
    word.iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One word evaluated under τ_q.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentEstimate {
    pub word: Vec<MatrixWordLetter>,
    pub state: usize,
    pub mean: Complex64,
    pub stderr: f64,
    pub trials: usize,
}

/// Per-trial Gaussian data with the sums and differences of real and
/// imaginary parts used by three-multiplication complex products.
struct TrialMatrices {
    re: Vec<Array2<f64>>,
    im: Vec<Array2<f64>>,
    re_plus_im: Vec<Array2<f64>>,
    re_minus_im: Vec<Array2<f64>>,
}

/// Rows N_q of a left product, split by column block; `None` is a zero block.
struct RowProduct {
    blocks: Vec<Option<(Array2<f64>, Array2<f64>)>>,
}

impl RowProduct {
    fn is_zero(&self) -> bool {
        self.blocks.iter().all(|b| b.is_none())
    }
}

fn add_into(slot: &mut Option<(Array2<f64>, Array2<f64>)>, re: Array2<f64>, im: Array2<f64>) {
    match slot {
        Some((a, b)) => {
            *a += &re;
            *b += &im;
        }
        None => *slot = Some((re, im)),
    }
}

struct Evaluator<'a> {
    model: &'a BlockModel,
    ranges: Vec<std::ops::Range<usize>>,
    letters: &'a [MatrixWordLetter],
    data: TrialMatrices,
}

impl Evaluator<'_> {
    /// (C, D, C + D) views of the block, with D negated when `neg_im`.
    fn block_views(
        &self,
        a: usize,
        b: usize,
        u: usize,
        adj: bool,
    ) -> (
        ArrayView2<'_, f64>,
        ArrayView2<'_, f64>,
        ArrayView2<'_, f64>,
        bool,
    ) {
        if adj {
            // (Y[N_b, N_a])^H: re^T, −im^T, and (re − im)^T.
            let (rb, ra) = (self.ranges[b].clone(), self.ranges[a].clone());
            (
                self.data.re[u]
                    .slice(s![rb.clone(), ra.clone()])
                    .reversed_axes(),
                self.data.im[u]
                    .slice(s![rb.clone(), ra.clone()])
                    .reversed_axes(),
                self.data.re_minus_im[u].slice(s![rb, ra]).reversed_axes(),
                true,
            )
        } else {
            let (ra, rb) = (self.ranges[a].clone(), self.ranges[b].clone());
            (
                self.data.re[u].slice(s![ra.clone(), rb.clone()]),
                self.data.im[u].slice(s![ra.clone(), rb.clone()]),
                self.data.re_plus_im[u].slice(s![ra, rb]),
                false,
            )
        }
    }

    fn variance(&self, a: usize, b: usize, u: usize, adj: bool) -> f64 {
        if adj {
            self.model.variances_f64[u][b][a]
        } else {
            self.model.variances_f64[u][a][b]
        }
    }

    /// Rows N_q of the first letter.
    fn start(&self, letter: usize, q: usize) -> RowProduct {
        let l = &self.letters[letter];
        let r = self.model.r();
        let mut blocks: Vec<Option<(Array2<f64>, Array2<f64>)>> = vec![None; r];
        for (a, b, u, adj) in l.terms(r) {
            if a != q || self.variance(a, b, u, adj) == 0.0 {
                continue;
            }
            let (c, d, _, neg) = self.block_views(a, b, u, adj);
            let im = if neg { d.mapv(|x| -x) } else { d.to_owned() };
            add_into(&mut blocks[b], c.to_owned(), im);
        }
        if let Some(alpha) = l.diagonal() {
            let nq = self.model.sizes[q];
            let a = alpha[q];
            let re = Array2::from_diag_elem(nq, a.re);
            let im = Array2::from_diag_elem(nq, a.im);
            add_into(&mut blocks[q], re, im);
        }
        RowProduct { blocks }
    }

    /// prod · letter.
    fn apply(&self, prod: &RowProduct, letter: usize) -> RowProduct {
        let l = &self.letters[letter];
        let r = self.model.r();
        let mut blocks: Vec<Option<(Array2<f64>, Array2<f64>)>> = vec![None; r];
        let mut sums: Vec<Option<Array2<f64>>> = vec![None; r];
        for (a, b, u, adj) in l.terms(r) {
            let Some((pa, pb)) = &prod.blocks[a] else {
                continue;
            };
            if self.variance(a, b, u, adj) == 0.0 {
                continue;
            }
            let (c, d, cpd, neg) = self.block_views(a, b, u, adj);
            let s = sums[a].get_or_insert_with(|| pa + pb);
            // (A + iB)(C + iD) with three real products.
            let t1 = pa.dot(&c);
            let t2 = pb.dot(&d);
            let t3 = s.dot(&cpd);
            let (re, im) = if neg {
                (&t1 + &t2, t3 - &t1 + &t2)
            } else {
                (&t1 - &t2, t3 - &t1 - &t2)
            };
            add_into(&mut blocks[b], re, im);
        }
        if let Some(alpha) = l.diagonal() {
            for (a, x) in alpha.iter().enumerate() {
                let Some((pa, pb)) = &prod.blocks[a] else {
                    continue;
                };
                if x.is_zero() {
                    continue;
                }
                let re = pa.mapv(|v| v * x.re) - pb.mapv(|v| v * x.im);
                let im = pa.mapv(|v| v * x.im) + pb.mapv(|v| v * x.re);
                add_into(&mut blocks[a], re, im);
            }
        }
        RowProduct { blocks }
    }
}

/// Left products keyed by interned letter ids, for one trial and state.
struct ProductCache<'e, 'a> {
    eval: &'e Evaluator<'a>,
    q: usize,
    map: HashMap<Vec<u16>, Rc<RowProduct>>,
}

impl ProductCache<'_, '_> {
    fn get(&mut self, ids: &[u16]) -> Rc<RowProduct> {
        if let Some(p) = self.map.get(ids) {
            return p.clone();
        }
        let p = if ids.len() == 1 {
            self.eval.start(ids[0] as usize, self.q)
        } else {
            let prefix = self.get(&ids[..ids.len() - 1]);
            if prefix.is_zero() {
                RowProduct {
                    blocks: vec![None; self.eval.model.r()],
                }
            } else {
                self.eval.apply(&prefix, ids[ids.len() - 1] as usize)
            }
        };
        let p = Rc::new(p);
        self.map.insert(ids.to_vec(), p.clone());
        p
    }
}

/// tr over N_q of (left product) · (right product), with the right product
/// given through the left product of its adjoint.
fn paired_trace(left: &RowProduct, right_adj: &RowProduct) -> Complex64 {
    let mut acc = Complex64::zero();
    for (l, r) in left.blocks.iter().zip(&right_adj.blocks) {
        if let (Some((a, b)), Some((c, d))) = (l, r) {
            // Σ (a + ib)(c − id)
            let (ac, bd, bc, ad) = (dot(a, c), dot(b, d), dot(b, c), dot(a, d));
            acc += Complex64::new(ac + bd, bc - ad);
        }
    }
    acc
}

fn dot(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    match (x.as_slice(), y.as_slice()) {
        (Some(x), Some(y)) => {
            // Eight independent partial sums so the loop vectorizes.
            let mut acc = [0.0f64; 8];
            let (xc, yc) = (x.chunks_exact(8), y.chunks_exact(8));
            let tail: f64 = xc
                .remainder()
                .iter()
                .zip(yc.remainder())
                .map(|(a, b)| a * b)
                .sum();
            for (a, b) in xc.zip(yc) {
                for (s, (u, v)) in acc.iter_mut().zip(a.iter().zip(b)) {
                    *s += u * v;
                }
            }
            acc.iter().sum::<f64>() + tail
        }
        _ => x.iter().zip(y.iter()).map(|(a, b)| a * b).sum(),
    }
}

struct PreparedWord {
    /// Canonical representative of {w, w*}.
    ids: Vec<u16>,
    conjugate: bool,
    state: usize,
}

fn intern(table: &mut Vec<MatrixWordLetter>, l: &MatrixWordLetter) -> u16 {
    match table.iter().position(|x| x == l) {
        Some(i) => i as u16,
        None => {
            table.push(l.clone());
            (table.len() - 1) as u16
        }
    }
}

/// Estimates τ_q of many words at once, sharing every product within a trial.
pub fn partial_trace_moments(
    model: &BlockModel,
    words: &[(Vec<MatrixWordLetter>, usize)],
) -> Result<Vec<MomentEstimate>> {
    let mut table: Vec<MatrixWordLetter> = Vec::new();
    let mut prepared = Vec::with_capacity(words.len());
    for (w, q) in words {
        if w.len() > MAX_WORD_LEN {
            return Err(Error::SizeLimit {
                what: "matrix word length",
                limit: MAX_WORD_LEN,
                got: w.len(),
            });
        }
        if *q >= model.r() {
            return Err(Error::IndexOutOfRange(format!(
                "state {} with r={}",
                q + 1,
                model.r()
            )));
        }
        w.iter().try_for_each(|l| l.check(model))?;
        let ids: Vec<u16> = w.iter().map(|l| intern(&mut table, l)).collect();
        let adj: Vec<u16> = w
            .iter()
            .rev()
            .map(|l| intern(&mut table, &l.adjoint()))
            .collect();
        let (ids, conjugate) = if adj < ids { (adj, true) } else { (ids, false) };
        prepared.push(PreparedWord {
            ids,
            conjugate,
            state: *q,
        });
    }
    let labels = model.labels();
    let ranges: Vec<_> = (0..model.r()).map(|q| model.range(q)).collect();
    let sizes = &model.sizes;

    let one_trial = |t: usize| -> Vec<Complex64> {
        let mut rng = trial_rng(model.seed, t);
        let mut data = TrialMatrices {
            re: Vec::with_capacity(labels),
            im: Vec::with_capacity(labels),
            re_plus_im: Vec::with_capacity(labels),
            re_minus_im: Vec::with_capacity(labels),
        };
        for u in 0..labels {
            let y = sample_matrix(model, u, &mut rng);
            data.re_plus_im.push(&y.re + &y.im);
            data.re_minus_im.push(&y.re - &y.im);
            data.re.push(y.re);
            data.im.push(y.im);
        }
        let eval = Evaluator {
            model,
            ranges: ranges.clone(),
            letters: &table,
            data,
        };
        let mut caches: Vec<ProductCache> = (0..model.r())
            .map(|q| ProductCache {
                eval: &eval,
                q,
                map: HashMap::new(),
            })
            .collect();
        prepared
            .iter()
            .map(|pw| {
                let m = pw.ids.len();
                let q = pw.state;
                let value = if m == 0 {
                    Complex64::new(sizes[q] as f64, 0.0)
                } else {
                    let h = m.div_ceil(2);
                    let left = caches[q].get(&pw.ids[..h]);
                    if h == m {
                        match &left.blocks[q] {
                            Some((a, b)) => Complex64::new(a.diag().sum(), b.diag().sum()),
                            None => Complex64::zero(),
                        }
                    } else {
                        let right_adj: Vec<u16> = pw.ids[h..]
                            .iter()
                            .rev()
                            .map(|&i| intern_lookup(&table, &table[i as usize].adjoint()))
                            .collect();
                        let right = caches[q].get(&right_adj);
                        paired_trace(&left, &right)
                    }
                };
                let v = value / sizes[q] as f64;
                if pw.conjugate {
                    v.conj()
                } else {
                    v
                }
            })
            .collect()
    };

    // Trials run in parallel chunks; accumulation is sequential in trial order.
    let w = words.len();
    let mut acc = vec![Welford::default(); w];
    let chunk = 64;
    let mut start = 0;
    while start < model.trials {
        let end = (start + chunk).min(model.trials);
        let results: Vec<Vec<Complex64>> = (start..end).into_par_iter().map(one_trial).collect();
        for row in results {
            for (a, v) in acc.iter_mut().zip(row) {
                a.push(v);
            }
        }
        start = end;
    }
    Ok(words
        .iter()
        .zip(acc)
        .map(|((word, q), a)| MomentEstimate {
            word: word.clone(),
            state: *q,
            mean: a.mean,
            stderr: a.stderr(),
            trials: a.n,
        })
        .collect())
}

fn intern_lookup(table: &[MatrixWordLetter], l: &MatrixWordLetter) -> u16 {
    table
        .iter()
        .position(|x| x == l)
        .expect("adjoints are interned") as u16
}

/// Running mean and squared deviation of complex samples.
#[derive(Clone, Debug, Default)]
struct Welford {
    n: usize,
    mean: Complex64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: Complex64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    /// Sample standard deviation over √n.
    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

/// Monte Carlo estimate of τ_q(word).
pub fn partial_trace_moment(
    model: &BlockModel,
    word: &[MatrixWordLetter],
    q: usize,
) -> Result<MomentEstimate> {
    Ok(partial_trace_moments(model, &[(word.to_vec(), q)])?.remove(0))
}

/// Exact limit prediction with the finite-n dimensions n_q / n. The block
/// limits are R-circular only for symmetric V(u); other models are rejected.
pub fn predict(model: &BlockModel, word: &[MatrixWordLetter], q: usize) -> Result<ComplexRational> {
    if let Some(u) = model.asymmetric_label() {
        return Err(Error::Precondition(format!(
            "predictions need a symmetric block-variance matrix, label {} is not",
            u + 1
        )));
    }
    let spec = model.prediction_spec();
    let fock: Vec<FockLetter> = word.iter().map(|l| l.fock_letter(model.r())).collect();
    vacuum_expectation(&fock, q, &spec)
}

/// r = 2 model with an evanescent first block: n₁ = ⌈√n⌉, v₁₂ = v₂₁ = v₁₁ = β₁, v₂₂ = β₂.
pub fn kesten_model(
    n: usize,
    beta1: &Rational,
    beta2: &Rational,
    seed: u64,
    trials: usize,
) -> Result<BlockModel> {
    if n < 16 {
        return Err(Error::Precondition(format!(
            "Kesten model needs n >= 16, got {n}"
        )));
    }
    let n1 = (n as f64).sqrt().ceil() as usize;
    let n1 = if (n1 - 1) * (n1 - 1) >= n { n1 - 1 } else { n1 };
    let v = vec![vec![
        vec![beta1.clone(), beta1.clone()],
        vec![beta1.clone(), beta2.clone()],
    ]];
    BlockModel::new(vec![n1, n - n1], v, seed, trials)
}

/// Kesten model plus the shift letter M = Y + α₁I₁ + α₂I₂.
pub fn meixner_model(
    n: usize,
    params: &MeixnerParams,
    seed: u64,
    trials: usize,
) -> Result<(BlockModel, [MatrixWordLetter; 2])> {
    params.validate()?;
    let model = kesten_model(n, &params.beta1, &params.beta2, seed, trials)?;
    let alpha = vec![params.alpha1.clone(), params.alpha2.clone()];
    let m = MatrixWordLetter::Shifted {
        u: 0,
        star: false,
        alpha,
    };
    let ms = m.adjoint();
    Ok((model, [m, ms]))
}

/// Pass thresholds: |z| ≤ z or relative error ≤ rel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub z: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 0.05, z: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub word: String,
    pub state: usize,
    pub estimate: Complex64,
    pub stderr: f64,
    pub prediction: Complex64,
    pub rel_error: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub tolerance: Tolerance,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }

    /// Root mean square of |estimate − prediction| over the rows.
    pub fn rms_error(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        let s: f64 = self
            .rows
            .iter()
            .map(|r| (r.estimate - r.prediction).norm_sqr())
            .sum();
        (s / self.rows.len() as f64).sqrt()
    }
}

/// Compares estimates with predictions row by row.
pub fn convergence_report(
    estimates: &[MomentEstimate],
    predictions: &[ComplexRational],
    tolerance: Tolerance,
) -> ConvergenceReport {
    let rows = estimates
        .iter()
        .zip(predictions)
        .map(|(e, p)| {
            let pred = to_c64(p);
            let diff = (e.mean - pred).norm();
            let rel_error = diff / pred.norm().max(1.0);
            let z = if e.stderr > 0.0 {
                diff / e.stderr
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            ReportRow {
                word: word_to_string(&e.word),
                state: e.state,
                estimate: e.mean,
                stderr: e.stderr,
                prediction: pred,
                rel_error,
                z,
                pass: z <= tolerance.z || rel_error <= tolerance.rel,
            }
        })
        .collect();
    ConvergenceReport { rows, tolerance }
}

/// Every block word of length 1..=max_len over S_{p,q}(u)^ε whose units chain
/// from and back to q, for every q.
pub fn chained_block_words(
    r: usize,
    labels: usize,
    max_len: usize,
) -> Vec<(Vec<MatrixWordLetter>, usize)> {
    let mut out = Vec::new();
    for q in 0..r {
        for len in 1..=max_len {
            crate::cumulants::visit_chained_words(r, labels, len, q, &mut |w| {
                out.push((
                    w.iter()
                        .map(|l| MatrixWordLetter::Block {
                            p: l.p,
                            q: l.q,
                            u: l.u,
                            star: l.star,
                        })
                        .collect(),
                    q,
                ));
            });
        }
    }
    out
}
