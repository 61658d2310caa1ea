//! Letters, words and eps-words: the query objects shared by every engine.
//!
//! Matrix indices `p, q` and labels `u` are 0-based here; the JSON/CLI layer
//! presents them 1-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One symbol ζ^ε_{p,q}(u): the matricial R-circular operator or its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub p: usize,
    pub q: usize,
    pub u: usize,
    pub star: bool,
}

impl Letter {
    pub fn new(p: usize, q: usize, u: usize, star: bool) -> Self {
        Letter { p, q, u, star }
    }

    pub fn zeta(p: usize, q: usize) -> Self {
        Letter::new(p, q, 0, false)
    }

    pub fn zeta_star(p: usize, q: usize) -> Self {
        Letter::new(p, q, 0, true)
    }

    pub fn adjoint(self) -> Self {
        Letter {
            star: !self.star,
            ..self
        }
    }

    /// Matrix unit carried by the letter: e(p,q) for ζ_{p,q}, e(q,p) for ζ*_{p,q}.
    pub fn unit(self) -> (usize, usize) {
        if self.star {
            (self.q, self.p)
        } else {
            (self.p, self.q)
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z{}[{},{};{}]",
            if self.star { "*" } else { "" },
            self.p + 1,
            self.q + 1,
            self.u + 1
        )
    }
}

/// A product of letters evaluated in the state indexed by `condition`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub condition: usize,
}

impl Word {
    pub fn new(letters: Vec<Letter>, condition: usize) -> Self {
        Word { letters, condition }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn tuple(&self) -> MatrixIndexTuple {
        MatrixIndexTuple::of_letters(&self.letters)
    }

    /// The reversed, starred word: the adjoint of the product.
    pub fn adjoint(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.adjoint()).collect(),
            condition: self.condition,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Phi_{}(", self.condition + 1)?;
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Tuple of matrix units (e(p_1,q_1), ..., e(p_m,q_m)).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixIndexTuple(pub Vec<(usize, usize)>);

impl MatrixIndexTuple {
    pub fn of_letters(letters: &[Letter]) -> Self {
        MatrixIndexTuple(letters.iter().map(|l| l.unit()).collect())
    }

    /// q_1 = p_2, ..., q_{m-1} = p_m and q_m = p_1.
    pub fn is_cyclic(&self) -> bool {
        is_cyclic(&self.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn is_cyclic(pairs: &[(usize, usize)]) -> bool {
    match (pairs.first(), pairs.last()) {
        (Some(first), Some(last)) => {
            last.1 == first.0 && pairs.windows(2).all(|w| w[0].1 == w[1].0)
        }
        _ => false,
    }
}

/// Cyclicity of the sub-tuple picked out by `positions` (in increasing order).
pub fn is_cyclic_at(pairs: &[(usize, usize)], positions: &[usize]) -> bool {
    match (positions.first(), positions.last()) {
        (Some(&a), Some(&z)) => {
            pairs[z].1 == pairs[a].0 && positions.windows(2).all(|w| pairs[w[0]].1 == pairs[w[1]].0)
        }
        _ => false,
    }
}

/// A word in a single variable and its adjoint, written like `"*1*1"`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpsWord(pub Vec<bool>);

impl EpsWord {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn stars(&self) -> &[bool] {
        &self.0
    }

    /// All eps-words of the given length in lexicographic order ('1' < '*').
    pub fn all(len: usize) -> impl Iterator<Item = EpsWord> {
        (0..(1usize << len))
            .map(move |bits| EpsWord((0..len).map(|i| bits >> (len - 1 - i) & 1 == 1).collect()))
    }

    pub fn adjoint(&self) -> EpsWord {
        EpsWord(self.0.iter().rev().map(|s| !s).collect())
    }
}

impl FromStr for EpsWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '*' => Ok(true),
                '1' => Ok(false),
                other => Err(Error::Parse(format!(
                    "eps-word may only contain '1' and '*', found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(EpsWord)
    }
}

impl fmt::Display for EpsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s { "*" } else { "1" })?;
        }
        Ok(())
    }
}

impl Serialize for EpsWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EpsWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_examples() {
        let (p, q, t) = (0, 1, 2);
        assert!(MatrixIndexTuple(vec![(p, q), (q, p)]).is_cyclic());
        assert!(MatrixIndexTuple(vec![(p, q), (q, t), (t, p)]).is_cyclic());
        assert!(!MatrixIndexTuple(vec![(p, q), (p, q)]).is_cyclic());
        assert!(MatrixIndexTuple(vec![(q, q)]).is_cyclic());
        assert!(!MatrixIndexTuple(vec![(p, q)]).is_cyclic());
    }

    #[test]
    fn star_swaps_the_matrix_unit() {
        assert_eq!(Letter::zeta(0, 1).unit(), (0, 1));
        assert_eq!(Letter::zeta_star(0, 1).unit(), (1, 0));
    }

    #[test]
    fn eps_word_parsing() {
        let w: EpsWord = "*1*1".parse().unwrap();
        assert_eq!(w.0, vec![true, false, true, false]);
        assert_eq!(w.to_string(), "*1*1");
        assert_eq!(w.adjoint().to_string(), "*1*1");
        assert!("*x".parse::<EpsWord>().is_err());
        assert_eq!(
            EpsWord::all(2).map(|w| w.to_string()).collect::<Vec<_>>(),
            ["11", "1*", "*1", "**"]
        );
    }
}
