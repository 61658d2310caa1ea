//! Noncrossing partitions and pairings, adaptedness to matrix-unit tuples,
//! nearest-outer links, depths and adapted colorings.
//!
//! Positions are 0-based internally and printed 1-based. Enumeration order is
//! lexicographic on the block sequence (blocks sorted by least element, a
//! proper prefix sorting first), so every downstream sum is reproducible.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::word::{is_cyclic, is_cyclic_at, Letter, MatrixIndexTuple};

/// Default cap on the ground-set size for full noncrossing enumeration.
pub const DEFAULT_MAX_GROUND_SET: usize = 14;

const UNASSIGNED: u8 = u8::MAX;

/// A partition of {0, .., m-1}; `labels[i]` is the block holding position `i`,
/// blocks numbered in order of their least element.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: SmallVec<[u8; 16]>,
}

impl Partition {
    /// Builds a partition from explicit blocks, checking that they cover
    /// {0, .., m-1} disjointly and do not cross.
    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        if m >= UNASSIGNED as usize {
            return Err(Error::SizeLimit {
                what: "ground set",
                limit: UNASSIGNED as usize - 1,
                got: m,
            });
        }
        let mut sorted: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.sort_unstable();
                b
            })
            .collect();
        if sorted.iter().any(|b| b.is_empty()) {
            return Err(Error::InvalidParameters("empty block".into()));
        }
        sorted.sort();
        let mut labels: SmallVec<[u8; 16]> = SmallVec::from_elem(UNASSIGNED, m);
        for (k, b) in sorted.iter().enumerate() {
            for &i in b {
                if i >= m || labels[i] != UNASSIGNED {
                    return Err(Error::InvalidParameters(format!(
                        "blocks must partition [{m}]; position {} is out of range or repeated",
                        i + 1
                    )));
                }
                labels[i] = k as u8;
            }
        }
        if labels.contains(&UNASSIGNED) {
            return Err(Error::InvalidParameters(format!(
                "blocks do not cover [{m}]"
            )));
        }
        let p = Partition { labels };
        if !p.is_noncrossing() {
            return Err(Error::InvalidParameters("blocks cross".into()));
        }
        Ok(p)
    }

    /// 1-based convenience constructor, mostly for tests and docs.
    pub fn from_blocks_1based(m: usize, blocks: &[&[usize]]) -> Result<Self> {
        let zero: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| b.iter().map(|&i| i.wrapping_sub(1)).collect())
            .collect();
        Self::from_blocks(m, &zero)
    }

    fn from_labels(labels: &[u8]) -> Self {
        Partition {
            labels: SmallVec::from_slice(labels),
        }
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels
            .iter()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn block_of(&self, pos: usize) -> usize {
        self.labels[pos] as usize
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks().iter().all(|b| b.len() == 2)
    }

    pub fn is_noncrossing(&self) -> bool {
        let m = self.m();
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    if self.labels[a] != self.labels[c] || self.labels[a] == self.labels[b] {
                        continue;
                    }
                    for d in c + 1..m {
                        if self.labels[b] == self.labels[d] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Nearest outer blocks and depths.
    pub fn outer_structure(&self) -> OuterStructure {
        let blocks = self.blocks();
        let spans: Vec<(usize, usize)> =
            blocks.iter().map(|b| (b[0], *b.last().unwrap())).collect();
        let k = blocks.len();
        let mut nearest_outer = vec![None; k];
        for i in 0..k {
            let (li, ri) = spans[i];
            let mut best: Option<usize> = None;
            for (j, &(lj, rj)) in spans.iter().enumerate() {
                if lj < li && ri < rj && best.is_none_or(|b| spans[b].0 < lj) {
                    best = Some(j);
                }
            }
            nearest_outer[i] = best;
        }
        // Outer blocks have smaller least elements, hence smaller indices.
        let mut depth = vec![0usize; k];
        for i in 0..k {
            depth[i] = match nearest_outer[i] {
                None => 1,
                Some(j) => depth[j] + 1,
            };
        }
        OuterStructure {
            nearest_outer,
            depth,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::from(
            self.blocks()
                .iter()
                .map(|b| b.iter().map(|&i| i + 1).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        )
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, b) in self.blocks().iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str("{")?;
            for (j, i) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}", i + 1)?;
            }
            f.write_str("}")?;
        }
        f.write_str("}")
    }
}

/// Nearest-outer links (`None` is the imaginary block {0, m+1}) and depths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterStructure {
    pub nearest_outer: Vec<Option<usize>>,
    pub depth: Vec<usize>,
}

/// Colors in [r] for every block and for the imaginary block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    pub block_color: Vec<usize>,
    pub imaginary_color: usize,
}

impl Coloring {
    /// Color of the nearest outer block of `block`.
    pub fn outer_color(&self, outer: &OuterStructure, block: usize) -> usize {
        match outer.nearest_outer[block] {
            Some(j) => self.block_color[j],
            None => self.imaginary_color,
        }
    }
}

/// Pruning rule for the noncrossing generator.
pub trait BlockRule {
    /// May `next` be appended to the open block `block`?
    fn extend(&self, block: &[usize], next: usize) -> bool;
    /// May `block` be closed as it stands?
    fn close(&self, block: &[usize]) -> bool;
}

/// Every block allowed.
pub struct AnyBlock;

impl BlockRule for AnyBlock {
    fn extend(&self, _: &[usize], _: usize) -> bool {
        true
    }
    fn close(&self, _: &[usize]) -> bool {
        true
    }
}

/// Pairs {i, j} accepted by the predicate.
pub struct PairsWhere<F>(pub F);

impl<F: Fn(usize, usize) -> bool> BlockRule for PairsWhere<F> {
    fn extend(&self, block: &[usize], next: usize) -> bool {
        block.len() == 1 && (self.0)(block[0], next)
    }
    fn close(&self, block: &[usize]) -> bool {
        block.len() == 2
    }
}

/// Singletons, plus pairs accepted by the predicate.
pub struct SingletonsOrPairsWhere<F>(pub F);

impl<F: Fn(usize, usize) -> bool> BlockRule for SingletonsOrPairsWhere<F> {
    fn extend(&self, block: &[usize], next: usize) -> bool {
        block.len() == 1 && (self.0)(block[0], next)
    }
    fn close(&self, block: &[usize]) -> bool {
        block.len() <= 2
    }
}

/// Blocks whose sub-tuple of matrix units is cyclic, optionally pairs only.
pub struct CyclicBlocks<'a> {
    pub units: &'a [(usize, usize)],
    pub pairs_only: bool,
}

impl BlockRule for CyclicBlocks<'_> {
    fn extend(&self, block: &[usize], next: usize) -> bool {
        if self.pairs_only && block.len() >= 2 {
            return false;
        }
        let last = *block.last().unwrap();
        self.units[last].1 == self.units[next].0
    }
    fn close(&self, block: &[usize]) -> bool {
        (!self.pairs_only || block.len() == 2) && is_cyclic_at(self.units, block)
    }
}

struct Generator<'a, R: BlockRule> {
    rule: &'a R,
    labels: Vec<u8>,
    block: Vec<usize>,
    next_label: u8,
}

impl<R: BlockRule> Generator<'_, R> {
    fn start_block(&mut self, visit: &mut dyn FnMut(&[u8])) {
        let Some(s) = self.labels.iter().position(|&l| l == UNASSIGNED) else {
            visit(&self.labels);
            return;
        };
        let saved = std::mem::take(&mut self.block);
        self.labels[s] = self.next_label;
        self.block.push(s);
        self.grow(visit);
        self.labels[s] = UNASSIGNED;
        self.block = saved;
    }

    fn grow(&mut self, visit: &mut dyn FnMut(&[u8])) {
        if self.rule.close(&self.block) {
            self.next_label += 1;
            self.start_block(visit);
            self.next_label -= 1;
        }
        let last = *self.block.last().unwrap();
        // Jumping over an assigned position would cross that position's block.
        for b in last + 1..self.labels.len() {
            if self.labels[b] != UNASSIGNED {
                break;
            }
            if !self.rule.extend(&self.block, b) {
                continue;
            }
            self.labels[b] = self.next_label;
            self.block.push(b);
            self.grow(visit);
            self.block.pop();
            self.labels[b] = UNASSIGNED;
        }
    }
}

/// Calls `visit` with the block labels of every noncrossing partition of
/// {0, .., m-1} allowed by `rule`, in lexicographic block order.
pub fn visit_noncrossing<R: BlockRule>(m: usize, rule: &R, visit: &mut dyn FnMut(&[u8])) {
    assert!(m < UNASSIGNED as usize, "ground set too large");
    let mut g = Generator {
        rule,
        labels: vec![UNASSIGNED; m],
        block: Vec::new(),
        next_label: 0,
    };
    g.start_block(visit);
}

pub fn collect_noncrossing<R: BlockRule>(m: usize, rule: &R) -> Vec<Partition> {
    let mut out = Vec::new();
    visit_noncrossing(m, rule, &mut |labels| {
        out.push(Partition::from_labels(labels))
    });
    out
}

/// All noncrossing partitions of [m], capped at [`DEFAULT_MAX_GROUND_SET`].
pub fn enumerate_noncrossing(m: usize) -> Result<Vec<Partition>> {
    enumerate_noncrossing_capped(m, DEFAULT_MAX_GROUND_SET)
}

pub fn enumerate_noncrossing_capped(m: usize, cap: usize) -> Result<Vec<Partition>> {
    if m > cap {
        return Err(Error::SizeLimit {
            what: "ground set",
            limit: cap,
            got: m,
        });
    }
    Ok(collect_noncrossing(m, &AnyBlock))
}

/// All noncrossing pair partitions of [m]; empty for odd m.
pub fn enumerate_pairings(m: usize) -> Vec<Partition> {
    if m % 2 == 1 {
        return Vec::new();
    }
    collect_noncrossing(m, &PairsWhere(|_, _| true))
}

/// Noncrossing partitions adapted to the tuple: the whole tuple and every
/// block sub-tuple are cyclic. Empty when the whole tuple is not cyclic.
pub fn adapted_partitions(tuple: &MatrixIndexTuple, pairs_only: bool) -> Vec<Partition> {
    if !tuple.is_cyclic() {
        return Vec::new();
    }
    collect_noncrossing(
        tuple.len(),
        &CyclicBlocks {
            units: &tuple.0,
            pairs_only,
        },
    )
}

/// Whether `pi` is adapted to `tuple` (checked block by block).
pub fn is_adapted(pi: &Partition, tuple: &MatrixIndexTuple) -> bool {
    pi.m() == tuple.len()
        && is_cyclic(&tuple.0)
        && pi.blocks().iter().all(|b| is_cyclic_at(&tuple.0, b))
}

/// The coloring f with f({i,j}) = p for (ε_i, ε_j) = (*, 1) and q for (1, *),
/// where (p, q) is the common index pair of the block.
pub fn adapted_coloring(
    pi: &Partition,
    letters: &[Letter],
    imaginary_color: usize,
) -> Result<Coloring> {
    if pi.m() != letters.len() {
        return Err(Error::Precondition(format!(
            "partition of [{}] applied to a word of length {}",
            pi.m(),
            letters.len()
        )));
    }
    let block_color = pi
        .blocks()
        .into_iter()
        .map(|b| {
            let not_adapted = |reason: &str| Error::NotAdapted {
                block: b.iter().map(|i| i + 1).collect(),
                reason: reason.to_string(),
            };
            if b.len() != 2 {
                return Err(not_adapted("adapted colorings are defined for pairs only"));
            }
            let (x, y) = (letters[b[0]], letters[b[1]]);
            if (x.p, x.q) != (y.p, y.q) {
                return Err(not_adapted("the two letters carry different index pairs"));
            }
            match (x.star, y.star) {
                (true, false) => Ok(x.p),
                (false, true) => Ok(x.q),
                _ => Err(not_adapted("both letters have the same star flag")),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Coloring {
        block_color,
        imaginary_color,
    })
}

/// Noncrossing partitions into singletons and pairs {i, j} with ε_i ≠ ε_j.
pub fn enumerate_singleton_pair_adapted(stars: &[bool]) -> Vec<Partition> {
    collect_noncrossing(
        stars.len(),
        &SingletonsOrPairsWhere(|i, j| stars[i] != stars[j]),
    )
}

/// Noncrossing pairings {i, j} with ε_i ≠ ε_j.
pub fn enumerate_eps_pairings(stars: &[bool]) -> Vec<Partition> {
    if stars.len() % 2 == 1 {
        return Vec::new();
    }
    collect_noncrossing(stars.len(), &PairsWhere(|i, j| stars[i] != stars[j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: every set partition via restricted growth strings, then a
    /// direct crossing test on all quadruples.
    fn brute_force_noncrossing(m: usize) -> Vec<Vec<Vec<usize>>> {
        fn rec(i: usize, m: usize, rgs: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
            if i == m {
                out.push(rgs.clone());
                return;
            }
            for l in 0..=max + 1 {
                if i == 0 && l > 0 {
                    break;
                }
                rgs.push(l);
                rec(i + 1, m, rgs, if i == 0 { 0 } else { max.max(l) }, out);
                rgs.pop();
            }
        }
        let mut all = Vec::new();
        rec(0, m, &mut Vec::new(), 0, &mut all);
        let mut out = Vec::new();
        for rgs in all {
            let crossing = (0..m).any(|a| {
                (a + 1..m).any(|b| {
                    (b + 1..m).any(|c| {
                        (c + 1..m).any(|d| rgs[a] == rgs[c] && rgs[b] == rgs[d] && rgs[a] != rgs[b])
                    })
                })
            });
            if crossing {
                continue;
            }
            let k = rgs.iter().max().unwrap() + 1;
            let mut blocks = vec![Vec::new(); k];
            for (i, &l) in rgs.iter().enumerate() {
                blocks[l].push(i);
            }
            out.push(blocks);
        }
        out.sort();
        out
    }

    fn as_blocks(ps: &[Partition]) -> Vec<Vec<Vec<usize>>> {
        ps.iter().map(|p| p.blocks()).collect()
    }

    #[test]
    fn small_counts_match_brute_force() {
        assert_eq!(enumerate_noncrossing(1).unwrap().len(), 1);
        for m in 1..=7 {
            let ours = as_blocks(&enumerate_noncrossing(m).unwrap());
            let brute = brute_force_noncrossing(m);
            // Block-sequence comparison with prefix-first is exactly Vec ordering.
            assert_eq!(ours, brute, "m = {m}");
        }
        assert_eq!(enumerate_noncrossing(3).unwrap().len(), 5);
        assert_eq!(enumerate_noncrossing(4).unwrap().len(), 14);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            enumerate_noncrossing(15),
            Err(Error::SizeLimit {
                limit: 14,
                got: 15,
                ..
            })
        ));
        assert!(enumerate_noncrossing_capped(5, 4).is_err());
        assert_eq!(enumerate_noncrossing_capped(5, 5).unwrap().len(), 42);
    }

    #[test]
    fn pairing_examples() {
        assert!(enumerate_pairings(3).is_empty());
        let four = enumerate_pairings(4);
        assert_eq!(
            four.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            ["{{1,2},{3,4}}", "{{1,4},{2,3}}"]
        );
        assert_eq!(enumerate_pairings(6).len(), 5);
    }

    #[test]
    fn pairing_counts_are_catalan_against_brute_force() {
        // Independent count: brute-force all pair partitions, filter crossings.
        fn all_pairings(points: Vec<usize>) -> Vec<Vec<(usize, usize)>> {
            if points.is_empty() {
                return vec![vec![]];
            }
            let first = points[0];
            let mut out = Vec::new();
            for k in 1..points.len() {
                let rest: Vec<usize> = points
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != 0 && i != k)
                    .map(|(_, &x)| x)
                    .collect();
                for mut tail in all_pairings(rest) {
                    tail.push((first, points[k]));
                    out.push(tail);
                }
            }
            out
        }
        for k in 1..=6 {
            let brute = all_pairings((0..2 * k).collect())
                .into_iter()
                .filter(|pairs| {
                    !pairs
                        .iter()
                        .any(|&(a, c)| pairs.iter().any(|&(b, d)| a < b && b < c && c < d))
                })
                .count();
            assert_eq!(enumerate_pairings(2 * k).len(), brute, "k = {k}");
        }
    }

    #[test]
    fn example_tuple_pairings() {
        let (p, q) = (0, 1);
        let t = MatrixIndexTuple(vec![(q, p), (p, q), (q, p), (p, q)]);
        let got: Vec<String> = adapted_partitions(&t, true)
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(got, ["{{1,2},{3,4}}", "{{1,4},{2,3}}"]);
    }

    #[test]
    fn example_five_tuple() {
        let (p, q, t) = (0, 1, 2);
        let tuple = MatrixIndexTuple(vec![(p, q), (q, t), (t, p), (p, t), (t, p)]);
        let got: Vec<String> = adapted_partitions(&tuple, false)
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(got, ["{{1,2,3},{4,5}}", "{{1,2,3,4,5}}", "{{1,2,5},{3,4}}"]);
    }

    #[test]
    fn literal_reading_of_four_tuple() {
        // (e(p,q),e(q,p),e(p,q),e(q,p)): the literal rule also admits {{1,4},{2,3}}.
        let (p, q) = (0, 1);
        let tuple = MatrixIndexTuple(vec![(p, q), (q, p), (p, q), (q, p)]);
        let got: Vec<String> = adapted_partitions(&tuple, false)
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(got, ["{{1,2},{3,4}}", "{{1,2,3,4}}", "{{1,4},{2,3}}"]);
    }

    #[test]
    fn non_closing_tuple_admits_nothing() {
        let tuple = MatrixIndexTuple(vec![(0, 1), (1, 0), (0, 1)]);
        assert!(adapted_partitions(&tuple, false).is_empty());
    }

    #[test]
    fn coloring_rules() {
        let (p, q) = (0, 1);
        let pair = Partition::from_blocks_1based(2, &[&[1, 2]]).unwrap();
        let c = adapted_coloring(&pair, &[Letter::zeta_star(p, q), Letter::zeta(p, q)], q).unwrap();
        assert_eq!(c.block_color, vec![p]);
        let c = adapted_coloring(&pair, &[Letter::zeta(p, q), Letter::zeta_star(p, q)], q).unwrap();
        assert_eq!(c.block_color, vec![q]);

        let word = [
            Letter::zeta_star(p, q),
            Letter::zeta(p, q),
            Letter::zeta_star(p, q),
            Letter::zeta(p, q),
        ];
        let nested = Partition::from_blocks_1based(4, &[&[1, 4], &[2, 3]]).unwrap();
        let c = adapted_coloring(&nested, &word, q).unwrap();
        assert_eq!(c.block_color, vec![p, q]);
        assert_eq!(c.imaginary_color, q);

        let bad = adapted_coloring(&pair, &[Letter::zeta(p, q), Letter::zeta(p, q)], q);
        assert!(matches!(bad, Err(Error::NotAdapted { .. })));
        let bad = adapted_coloring(&pair, &[Letter::zeta_star(p, q), Letter::zeta(q, p)], q);
        assert!(matches!(bad, Err(Error::NotAdapted { .. })));
    }

    #[test]
    fn singleton_pair_examples() {
        let show = |s: &str| -> Vec<String> {
            let stars: Vec<bool> = s.chars().map(|c| c == '*').collect();
            enumerate_singleton_pair_adapted(&stars)
                .iter()
                .map(|p| p.to_string())
                .collect()
        };
        assert_eq!(show("1"), ["{{1}}"]);
        assert_eq!(show("1*"), ["{{1},{2}}", "{{1,2}}"]);
        assert_eq!(show("11"), ["{{1},{2}}"]);
    }

    #[test]
    fn outer_structure_of_nested_pairs() {
        let p = Partition::from_blocks_1based(6, &[&[1, 6], &[2, 3], &[4, 5]]).unwrap();
        let o = p.outer_structure();
        assert_eq!(o.nearest_outer, vec![None, Some(0), Some(0)]);
        assert_eq!(o.depth, vec![1, 2, 2]);
        let p = Partition::from_blocks_1based(6, &[&[1, 6], &[2, 5], &[3, 4]]).unwrap();
        assert_eq!(p.outer_structure().depth, vec![1, 2, 3]);
    }

    #[test]
    fn from_blocks_validates() {
        assert!(Partition::from_blocks_1based(4, &[&[1, 3], &[2, 4]]).is_err());
        assert!(Partition::from_blocks_1based(4, &[&[1, 2], &[3]]).is_err());
        assert!(Partition::from_blocks_1based(2, &[&[1, 2], &[2]]).is_err());
    }
}
