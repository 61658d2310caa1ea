//! Covariance data B(u) of an array of matricially free circular operators.

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::scalar::{rational_to_json, Rational};
use crate::word::Letter;

/// Dimension vector D and block variances V(u) from which B(u) = D·V(u).
#[derive(Clone, Debug, PartialEq)]
pub struct Derivation {
    pub dims: Vec<Rational>,
    /// `variances[u][p][q]`
    pub variances: Vec<Vec<Vec<Rational>>>,
}

/// Per-label r×r matrices of non-negative covariances b_{p,q}(u).
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSpec {
    r: usize,
    b: Vec<Vec<Rational>>,
    derivation: Option<Derivation>,
}

impl CovarianceSpec {
    /// Builds a spec from `b[u][p][q]`.
    pub fn new(r: usize, b: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let problems = Self::diagnostics(r, &b);
        if let Some(first) = problems.into_iter().next() {
            return Err(Error::InvalidParameters(first));
        }
        let b = b
            .into_iter()
            .map(|m| m.into_iter().flatten().collect())
            .collect();
        Ok(CovarianceSpec {
            r,
            b,
            derivation: None,
        })
    }

    /// Every problem with raw covariance data, not just the first.
    pub fn diagnostics(r: usize, b: &[Vec<Vec<Rational>>]) -> Vec<String> {
        let mut out = Vec::new();
        if r == 0 {
            out.push("r must be at least 1".to_string());
        }
        if b.is_empty() {
            out.push("at least one label is required".to_string());
        }
        for (u, m) in b.iter().enumerate() {
            if m.len() != r || m.iter().any(|row| row.len() != r) {
                out.push(format!("B({}) must be {r}x{r}", u + 1));
                continue;
            }
            for (p, row) in m.iter().enumerate() {
                for (q, x) in row.iter().enumerate() {
                    if x.is_negative() {
                        out.push(format!(
                            "negative covariance b[{},{}]({}) = {x}",
                            p + 1,
                            q + 1,
                            u + 1
                        ));
                    }
                }
            }
        }
        out
    }

    /// B(u) = D·V(u), i.e. b_{p,q}(u) = d_p v_{p,q}(u).
    pub fn from_dimensions(
        dims: Vec<Rational>,
        variances: Vec<Vec<Vec<Rational>>>,
    ) -> Result<Self> {
        let r = dims.len();
        if dims.iter().any(|d| d.is_negative()) {
            return Err(Error::InvalidParameters("negative dimension".into()));
        }
        let total: Rational = dims.iter().sum();
        if total > Rational::one() {
            return Err(Error::InvalidParameters(format!(
                "dimensions sum to {total} > 1"
            )));
        }
        let shape_ok = variances
            .iter()
            .all(|v| v.len() == r && v.iter().all(|row| row.len() == r));
        if !shape_ok {
            return Err(Error::InvalidParameters(format!(
                "every V(u) must be {r}x{r} to match the dimension vector"
            )));
        }
        let b = variances
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&dims)
                    .map(|(row, d)| row.iter().map(|x| d * x).collect())
                    .collect()
            })
            .collect();
        let mut spec = Self::new(r, b)?;
        spec.derivation = Some(Derivation { dims, variances });
        Ok(spec)
    }

    /// Every entry of every B(u) equal to `value`.
    pub fn uniform(r: usize, labels: usize, value: Rational) -> Self {
        CovarianceSpec {
            r,
            b: vec![vec![value; r * r]; labels],
            derivation: None,
        }
    }

    /// The two-by-two array behind the circular Kesten operator:
    /// b₂₁ = β₁, b₂₂ = β₂, b₁₁ = b₁₂ = 0.
    pub fn kesten(beta1: &Rational, beta2: &Rational) -> Self {
        let z = Rational::zero();
        CovarianceSpec {
            r: 2,
            b: vec![vec![z.clone(), z, beta1.clone(), beta2.clone()]],
            derivation: None,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn labels(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self, p: usize, q: usize, u: usize) -> &Rational {
        &self.b[u][p * self.r + q]
    }

    pub fn set_b(&mut self, p: usize, q: usize, u: usize, value: Rational) -> Result<()> {
        if value.is_negative() {
            return Err(Error::InvalidParameters(format!(
                "negative covariance {value}"
            )));
        }
        let r = self.r;
        self.b[u][p * r + q] = value;
        self.derivation = None;
        Ok(())
    }

    pub fn matrix(&self, u: usize) -> Vec<Vec<Rational>> {
        self.b[u].chunks(self.r).map(|row| row.to_vec()).collect()
    }

    pub fn derivation(&self) -> Option<&Derivation> {
        self.derivation.as_ref()
    }

    /// True when every covariance equals one.
    pub fn is_standard(&self) -> bool {
        self.b.iter().flatten().all(|x| x.is_one())
    }

    pub fn check_index(&self, p: usize, q: usize, u: usize) -> Result<()> {
        if p >= self.r || q >= self.r || u >= self.labels() {
            return Err(Error::IndexOutOfRange(format!(
                "(p,q,u)=({},{},{}) with r={} and {} label(s)",
                p + 1,
                q + 1,
                u + 1,
                self.r,
                self.labels()
            )));
        }
        Ok(())
    }

    pub fn check_letter(&self, l: &Letter) -> Result<()> {
        self.check_index(l.p, l.q, l.u)
    }

    pub fn check_state(&self, q: usize) -> Result<()> {
        if q >= self.r {
            return Err(Error::IndexOutOfRange(format!(
                "state index {} with r={}",
                q + 1,
                self.r
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let b: Vec<Vec<Vec<serde_json::Value>>> = (0..self.labels())
            .map(|u| {
                self.matrix(u)
                    .iter()
                    .map(|row| row.iter().map(rational_to_json).collect())
                    .collect()
            })
            .collect();
        json!({ "r": self.r, "b": b })
    }
}
