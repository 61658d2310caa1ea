//! Toeplitz-Cuntz-Krieger relations for the standard creation operators
//! S_μ, μ = (p, q, u) ∈ J × U, on a depth-truncated Fock space.
//!
//! Operators are integer matrices over paths of length ≤ depth. An identity is
//! asserted only on paths of length ≤ depth − 2, where no product in it can
//! leave the truncated space.

use std::collections::HashMap;
use std::fmt;

use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spec::CovarianceSpec;

/// A triple μ = (p, q, u), 0-based.
pub type Triple = (usize, usize, usize);

fn fmt_triple(t: &Triple) -> String {
    format!("({},{},{})", t.0 + 1, t.1 + 1, t.2 + 1)
}

/// A(ν, μ) = 1 iff ν = (i, j, u), μ = (k, l, s) with j = k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationMatrix {
    /// Basis order: pairs in the order given, labels innermost.
    pub index: Vec<Triple>,
    pub a: Vec<Vec<u8>>,
}

pub fn relation_matrix(pairs: &[(usize, usize)], labels: usize) -> RelationMatrix {
    let index: Vec<Triple> = pairs
        .iter()
        .flat_map(|&(p, q)| (0..labels).map(move |u| (p, q, u)))
        .collect();
    let a = index
        .iter()
        .map(|nu| index.iter().map(|mu| u8::from(nu.1 == mu.0)).collect())
        .collect();
    RelationMatrix { index, a }
}

impl RelationMatrix {
    pub fn to_json(&self) -> Value {
        json!({
            "index": self.index.iter().map(|t| vec![t.0 + 1, t.1 + 1, t.2 + 1]).collect::<Vec<_>>(),
            "matrix": self.a,
        })
    }
}

/// All pairs of [r] × [r] in lexicographic order.
pub fn all_pairs(r: usize) -> Vec<(usize, usize)> {
    (0..r).flat_map(|p| (0..r).map(move |q| (p, q))).collect()
}

/// Basis element: a chain μ₁ ⊗ … ⊗ μ_k ⊗ Ω_t, or the vacuum Ω_t when k = 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisPath {
    pub factors: Vec<Triple>,
    pub terminal: usize,
}

impl BasisPath {
    /// The index a creation operator must match: p of the first factor, or t.
    pub fn first_index(&self) -> usize {
        self.factors.first().map_or(self.terminal, |f| f.0)
    }
}

impl fmt::Display for BasisPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.factors {
            write!(f, "e{} ⊗ ", fmt_triple(t))?;
        }
        write!(f, "Ω{}", self.terminal + 1)
    }
}

/// Sparse integer matrix over the truncated basis, stored by column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedOperator {
    cols: Vec<Vec<(usize, i64)>>,
}

impl TruncatedOperator {
    pub fn zero(dim: usize) -> Self {
        TruncatedOperator {
            cols: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        TruncatedOperator {
            cols: (0..dim).map(|j| vec![(j, 1)]).collect(),
        }
    }

    pub fn diagonal(dim: usize, keep: impl Fn(usize) -> bool) -> Self {
        TruncatedOperator {
            cols: (0..dim)
                .map(|j| if keep(j) { vec![(j, 1)] } else { Vec::new() })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Image of basis vector j, sorted by row.
    pub fn column(&self, j: usize) -> &[(usize, i64)] {
        &self.cols[j]
    }

    fn from_columns(cols: Vec<HashMap<usize, i64>>) -> Self {
        TruncatedOperator {
            cols: cols
                .into_iter()
                .map(|c| {
                    let mut v: Vec<_> = c.into_iter().filter(|(_, x)| *x != 0).collect();
                    v.sort_unstable();
                    v
                })
                .collect(),
        }
    }

    /// self · other
    pub fn compose(&self, other: &Self) -> Self {
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut acc = HashMap::new();
                for &(k, x) in col {
                    for &(i, y) in &self.cols[k] {
                        *acc.entry(i).or_insert(0) += x * y;
                    }
                }
                acc
            })
            .collect();
        Self::from_columns(cols)
    }

    pub fn adjoint(&self) -> Self {
        let mut cols = vec![HashMap::new(); self.dim()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, x) in col {
                cols[i].insert(j, x);
            }
        }
        Self::from_columns(cols)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut acc: HashMap<usize, i64> = a.iter().copied().collect();
                for &(i, x) in b {
                    *acc.entry(i).or_insert(0) += sign * x;
                }
                acc
            })
            .collect();
        Self::from_columns(cols)
    }
}

/// Creation operators S_μ for μ ∈ J × U on paths of length ≤ depth.
#[derive(Clone, Debug)]
pub struct CkSystem {
    pub r: usize,
    pub labels: usize,
    pub pairs: Vec<(usize, usize)>,
    pub depth: usize,
    basis: Vec<BasisPath>,
    creation: Vec<(Triple, TruncatedOperator)>,
}

impl CkSystem {
    /// Requires b_{p,q}(u) = 1 on J and depth ≥ 3. `pairs = None` means all of [r] × [r].
    pub fn new(
        spec: &CovarianceSpec,
        pairs: Option<&[(usize, usize)]>,
        depth: usize,
    ) -> Result<Self> {
        let r = spec.r();
        let labels = spec.labels();
        let pairs = pairs.map_or_else(|| all_pairs(r), |p| p.to_vec());
        if depth < 3 {
            return Err(Error::Precondition(format!(
                "depth must be at least 3, got {depth}"
            )));
        }
        if pairs.is_empty() {
            return Err(Error::Precondition("J is empty".into()));
        }
        for &(p, q) in &pairs {
            if p >= r || q >= r {
                return Err(Error::IndexOutOfRange(format!(
                    "pair ({},{}) with r={r}",
                    p + 1,
                    q + 1
                )));
            }
            for u in 0..labels {
                if !spec.b(p, q, u).is_one() {
                    return Err(Error::Precondition(format!(
                        "b_{{{},{}}}({}) = {} but the relations need b = 1 on J",
                        p + 1,
                        q + 1,
                        u + 1,
                        spec.b(p, q, u)
                    )));
                }
            }
        }
        let triples = relation_matrix(&pairs, labels).index;
        let mut basis: Vec<BasisPath> = (0..r)
            .map(|t| BasisPath {
                factors: vec![],
                terminal: t,
            })
            .collect();
        let mut layer = basis.clone();
        for _ in 0..depth {
            let mut next = Vec::new();
            for path in &layer {
                for t in &triples {
                    if t.1 == path.first_index() {
                        let mut factors = vec![*t];
                        factors.extend_from_slice(&path.factors);
                        next.push(BasisPath {
                            factors,
                            terminal: path.terminal,
                        });
                    }
                }
            }
            next.sort();
            basis.extend(next.iter().cloned());
            layer = next;
        }
        let index: HashMap<BasisPath, usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let creation = triples
            .iter()
            .map(|&mu| {
                let cols = basis
                    .iter()
                    .map(|b| {
                        let mut c = HashMap::new();
                        if b.first_index() == mu.1 && b.factors.len() < depth {
                            let mut factors = vec![mu];
                            factors.extend_from_slice(&b.factors);
                            let img = BasisPath {
                                factors,
                                terminal: b.terminal,
                            };
                            c.insert(index[&img], 1);
                        }
                        c
                    })
                    .collect();
                (mu, TruncatedOperator::from_columns(cols))
            })
            .collect();
        Ok(CkSystem {
            r,
            labels,
            pairs,
            depth,
            basis,
            creation,
        })
    }

    pub fn basis(&self) -> &[BasisPath] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Longest path on which identities are asserted.
    pub fn safe_length(&self) -> usize {
        self.depth - 2
    }

    pub fn creation(&self, mu: Triple) -> Option<&TruncatedOperator> {
        self.creation.iter().find(|(t, _)| *t == mu).map(|(_, s)| s)
    }

    pub fn triples(&self) -> Vec<Triple> {
        self.creation.iter().map(|(t, _)| *t).collect()
    }

    /// s_μ = S_μ S_μ*
    pub fn range_projection(&self, mu: Triple) -> TruncatedOperator {
        let s = self.creation(mu).expect("triple in J × U");
        s.compose(&s.adjoint())
    }

    /// r_μ = S_μ* S_μ
    pub fn source_projection(&self, mu: Triple) -> TruncatedOperator {
        let s = self.creation(mu).expect("triple in J × U");
        s.adjoint().compose(s)
    }

    /// p_Ω: projection onto the vacua.
    pub fn vacuum_projection(&self) -> TruncatedOperator {
        TruncatedOperator::diagonal(self.dim(), |j| self.basis[j].factors.is_empty())
    }

    /// p_{Ω_q}
    pub fn vacuum_projection_at(&self, q: usize) -> TruncatedOperator {
        TruncatedOperator::diagonal(self.dim(), |j| {
            self.basis[j].factors.is_empty() && self.basis[j].terminal == q
        })
    }

    /// First basis vector of length ≤ max_len on which x and y differ.
    fn first_difference(
        &self,
        x: &TruncatedOperator,
        y: &TruncatedOperator,
        max_len: usize,
    ) -> Option<usize> {
        (0..self.dim())
            .find(|&j| self.basis[j].factors.len() <= max_len && x.column(j) != y.column(j))
    }
}

/// Outcome of one identity over the checked region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub identity: String,
    pub vectors_checked: usize,
    pub witness: Option<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "identity": self.identity,
            "vectors_checked": self.vectors_checked,
            "pass": self.passed(),
            "witness": self.witness,
        })
    }
}

fn check(
    sys: &CkSystem,
    identity: String,
    lhs: &TruncatedOperator,
    rhs: &TruncatedOperator,
    max_len: usize,
) -> IdentityCheck {
    let vectors_checked = sys
        .basis
        .iter()
        .filter(|b| b.factors.len() <= max_len)
        .count();
    let witness = sys
        .first_difference(lhs, rhs, max_len)
        .map(|j| sys.basis[j].to_string());
    IdentityCheck {
        identity,
        vectors_checked,
        witness,
    }
}

/// S_μ S_μ* S_μ = S_μ for every μ.
pub fn check_partial_isometries(sys: &CkSystem) -> Vec<IdentityCheck> {
    check_partial_isometries_up_to(sys, sys.safe_length())
}

pub fn check_partial_isometries_up_to(sys: &CkSystem, max_len: usize) -> Vec<IdentityCheck> {
    sys.creation
        .iter()
        .map(|(mu, s)| {
            let sss = s.compose(&s.adjoint()).compose(s);
            check(
                sys,
                format!("S S* S = S for μ={}", fmt_triple(mu)),
                &sss,
                s,
                max_len,
            )
        })
        .collect()
}

/// Σ_μ s_μ = 1 − p_Ω, and for each ν = (p, q, u): Σ_{μ: ν∼μ} s_μ = r_ν − p_{Ω_q}.
pub fn check_ck_sums(sys: &CkSystem) -> Vec<IdentityCheck> {
    check_ck_sums_up_to(sys, sys.safe_length())
}

pub fn check_ck_sums_up_to(sys: &CkSystem, max_len: usize) -> Vec<IdentityCheck> {
    let dim = sys.dim();
    let triples = sys.triples();
    let ranges: Vec<TruncatedOperator> = triples.iter().map(|&m| sys.range_projection(m)).collect();
    let mut out = Vec::new();
    let total = ranges
        .iter()
        .fold(TruncatedOperator::zero(dim), |acc, s| acc.add(s));
    let rhs = TruncatedOperator::identity(dim).sub(&sys.vacuum_projection());
    out.push(check(
        sys,
        "Σ_μ s_μ = 1 − p_Ω".into(),
        &total,
        &rhs,
        max_len,
    ));
    for &nu in &triples {
        let lhs = triples
            .iter()
            .zip(&ranges)
            .filter(|(mu, _)| nu.1 == mu.0)
            .fold(TruncatedOperator::zero(dim), |acc, (_, s)| acc.add(s));
        let rhs = sys
            .source_projection(nu)
            .sub(&sys.vacuum_projection_at(nu.1));
        out.push(check(
            sys,
            format!(
                "Σ_(μ: ν∼μ) s_μ = r_ν − p_Ω{} for ν={}",
                nu.1 + 1,
                fmt_triple(&nu)
            ),
            &lhs,
            &rhs,
            max_len,
        ));
    }
    out
}

/// Idempotence and self-adjointness of s_μ, r_μ; orthogonal ranges; r_μ = r_ν
/// when μ and ν share their second index.
pub fn check_projection_properties(sys: &CkSystem) -> Vec<IdentityCheck> {
    let max_len = sys.safe_length();
    let triples = sys.triples();
    let mut out = Vec::new();
    for &mu in &triples {
        for (name, p) in [
            ("s", sys.range_projection(mu)),
            ("r", sys.source_projection(mu)),
        ] {
            out.push(check(
                sys,
                format!("{name}_μ² = {name}_μ for μ={}", fmt_triple(&mu)),
                &p.compose(&p),
                &p,
                max_len,
            ));
            out.push(check(
                sys,
                format!("{name}_μ* = {name}_μ for μ={}", fmt_triple(&mu)),
                &p.adjoint(),
                &p,
                max_len,
            ));
        }
    }
    let zero = TruncatedOperator::zero(sys.dim());
    for (i, &mu) in triples.iter().enumerate() {
        for &nu in &triples[i + 1..] {
            let prod = sys.range_projection(mu).compose(&sys.range_projection(nu));
            out.push(check(
                sys,
                format!(
                    "s_μ s_ν = 0 for μ={}, ν={}",
                    fmt_triple(&mu),
                    fmt_triple(&nu)
                ),
                &prod,
                &zero,
                max_len,
            ));
            if mu.1 == nu.1 {
                out.push(check(
                    sys,
                    format!("r_μ = r_ν for μ={}, ν={}", fmt_triple(&mu), fmt_triple(&nu)),
                    &sys.source_projection(mu),
                    &sys.source_projection(nu),
                    max_len,
                ));
            }
        }
    }
    out
}

/// Every check for one configuration.
#[derive(Clone, Debug)]
pub struct CkReport {
    pub relation: RelationMatrix,
    pub depth: usize,
    pub dim: usize,
    pub safe_length: usize,
    pub checks: Vec<IdentityCheck>,
}

impl CkReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "relation_matrix": self.relation.to_json(),
            "depth": self.depth,
            "dimension": self.dim,
            "safe_length": self.safe_length,
            "pass": self.all_pass(),
            "checks": self.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }
}

pub fn run_ck_check(
    spec: &CovarianceSpec,
    pairs: Option<&[(usize, usize)]>,
    depth: usize,
) -> Result<CkReport> {
    let sys = CkSystem::new(spec, pairs, depth)?;
    let mut checks = check_partial_isometries(&sys);
    checks.extend(check_ck_sums(&sys));
    checks.extend(check_projection_properties(&sys));
    Ok(CkReport {
        relation: relation_matrix(&sys.pairs, sys.labels),
        depth,
        dim: sys.dim(),
        safe_length: sys.safe_length(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn two_by_two_relation_matrix() {
        let m = relation_matrix(&all_pairs(2), 1);
        assert_eq!(
            m.a,
            vec![
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1],
                vec![1, 1, 0, 0],
                vec![0, 0, 1, 1]
            ]
        );
        assert_eq!(relation_matrix(&[(1, 1)], 1).a, vec![vec![1]]);
    }

    #[test]
    fn two_labels_double_rows_and_columns() {
        let one = relation_matrix(&all_pairs(2), 1);
        let two = relation_matrix(&all_pairs(2), 2);
        assert_eq!(two.a.len(), 8);
        for (i, row) in two.a.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, one.a[i / 2][j / 2]);
            }
        }
    }

    #[test]
    fn full_check_r2_depth6() {
        let spec = CovarianceSpec::uniform(2, 1, int(1));
        let rep = run_ck_check(&spec, None, 6).unwrap();
        assert!(
            rep.all_pass(),
            "{:?}",
            rep.checks.iter().find(|c| !c.passed())
        );
        assert_eq!(rep.safe_length, 4);
        // 2 vacua and 2·2^k paths of each length k ≥ 1.
        assert_eq!(rep.dim, 2 + (1..=6).map(|k| 2usize << k).sum::<usize>());
    }

    #[test]
    fn vacuum_is_annihilated_by_ranges() {
        let spec = CovarianceSpec::uniform(2, 1, int(1));
        let sys = CkSystem::new(&spec, None, 4).unwrap();
        for mu in sys.triples() {
            assert!(sys.range_projection(mu).column(0).is_empty());
        }
    }

    #[test]
    fn proper_subset_and_two_labels() {
        let spec = CovarianceSpec::uniform(3, 2, int(1));
        let pairs = [(0, 1), (1, 1), (2, 0)];
        let rep = run_ck_check(&spec, Some(&pairs), 5).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.relation.index.len(), 6);
    }

    #[test]
    fn sums_fail_at_the_boundary() {
        let spec = CovarianceSpec::uniform(2, 1, int(1));
        let sys = CkSystem::new(&spec, None, 5).unwrap();
        let checks = check_ck_sums_up_to(&sys, 5);
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
        assert!(!failed.is_empty());
        assert!(failed.iter().all(|c| c.identity.contains("r_ν")));
        assert!(check_ck_sums_up_to(&sys, 3).iter().all(|c| c.passed()));
    }

    #[test]
    fn preconditions() {
        let mut spec = CovarianceSpec::uniform(2, 1, int(1));
        assert!(matches!(
            CkSystem::new(&spec, None, 2),
            Err(Error::Precondition(_))
        ));
        spec.set_b(0, 1, 0, rat(1, 2)).unwrap();
        assert!(matches!(
            CkSystem::new(&spec, None, 4),
            Err(Error::Precondition(_))
        ));
        // b off J is irrelevant.
        assert!(CkSystem::new(&spec, Some(&[(0, 0), (1, 0)]), 4).is_ok());
    }
}
