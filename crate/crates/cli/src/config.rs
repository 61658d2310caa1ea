//! Config parsing. Every problem is collected as a diagnostic instead of
//! stopping at the first one.

use serde_json::{Map, Value};

use rcircular::cumulants::DEFAULT_SERIES_CAP;
use rcircular::moments::{ArrayState, MeixnerParams};
use rcircular::partitions::DEFAULT_MAX_GROUND_SET;
use rcircular::randmat::{BlockModel, MatrixWordLetter, Tolerance, DEFAULT_TRIALS, MAX_WORD_LEN};
use rcircular::scalar::{complex_from_json, rational_from_json};
use rcircular::{ComplexRational, CovarianceSpec, EpsWord, Letter, Rational, Word};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CAP: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Schema,
    Range,
    Meixner,
    Cap,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct ConfigWord {
    pub word: Word,
    /// Letters stand for η_{p,q}(u) instead of ζ_{p,q}(u).
    pub eta: bool,
}

#[derive(Clone, Debug)]
pub struct CkConfig {
    pub r: usize,
    pub labels: usize,
    pub depth: usize,
    pub pairs: Option<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug)]
pub struct Config {
    pub spec: Option<CovarianceSpec>,
    pub words: Vec<ConfigWord>,
    pub eps_words: Vec<EpsWord>,
    pub array_state: Option<ArrayState>,
    pub kesten: Option<(Rational, Rational)>,
    pub meixner: Option<MeixnerParams>,
    pub model: Option<BlockModel>,
    pub n: Option<usize>,
    pub matrix_words: Vec<(Vec<MatrixWordLetter>, usize)>,
    pub seed: u64,
    pub trials: usize,
    pub cap: usize,
    pub tolerance: Tolerance,
    pub ck: Option<CkConfig>,
}

struct Parser {
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn push(&mut self, kind: DiagnosticKind, path: &str, message: impl Into<String>) {
        self.diags.push(Diagnostic {
            kind,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn rational(&mut self, v: &Value, path: &str) -> Option<Rational> {
        match rational_from_json(v) {
            Ok(x) => Some(x),
            Err(e) => {
                self.push(DiagnosticKind::Schema, path, e.to_string());
                None
            }
        }
    }

    fn complex(&mut self, v: Option<&Value>, path: &str) -> Option<ComplexRational> {
        match v {
            None => Some(ComplexRational::new(
                Rational::from_integer(0.into()),
                Rational::from_integer(0.into()),
            )),
            Some(v) => match complex_from_json(v) {
                Ok(x) => Some(x),
                Err(e) => {
                    self.push(DiagnosticKind::Schema, path, e.to_string());
                    None
                }
            },
        }
    }

    fn uint(&mut self, v: Option<&Value>, path: &str) -> Option<usize> {
        match v {
            Some(Value::Number(n)) if n.as_u64().is_some() => Some(n.as_u64().unwrap() as usize),
            Some(other) => {
                self.push(
                    DiagnosticKind::Schema,
                    path,
                    format!("expected a non-negative integer, got {other}"),
                );
                None
            }
            None => {
                self.push(DiagnosticKind::Schema, path, "missing");
                None
            }
        }
    }

    /// A 1-based index in 1..=bound, returned 0-based.
    fn index(&mut self, v: Option<&Value>, path: &str, bound: Option<usize>) -> Option<usize> {
        let i = self.uint(v, path)?;
        if i == 0 {
            self.push(DiagnosticKind::Range, path, "indices are 1-based");
            return None;
        }
        if let Some(b) = bound {
            if i > b {
                self.push(
                    DiagnosticKind::Range,
                    path,
                    format!("{i} is out of range 1..={b}"),
                );
                return None;
            }
        }
        Some(i - 1)
    }

    fn bool(&mut self, v: Option<&Value>, path: &str) -> bool {
        match v {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(other) => {
                self.push(
                    DiagnosticKind::Schema,
                    path,
                    format!("expected a boolean, got {other}"),
                );
                false
            }
        }
    }

    fn array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Vec<Value>> {
        match v {
            Value::Array(a) => Some(a),
            other => {
                self.push(
                    DiagnosticKind::Schema,
                    path,
                    format!("expected an array, got {}", kind_name(other)),
                );
                None
            }
        }
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v {
            Value::Object(m) => Some(m),
            other => {
                self.push(
                    DiagnosticKind::Schema,
                    path,
                    format!("expected an object, got {}", kind_name(other)),
                );
                None
            }
        }
    }

    /// `[label][row][col]` array of rationals, each matrix r × r.
    fn cube(&mut self, v: &Value, path: &str) -> Option<Vec<Vec<Vec<Rational>>>> {
        let labels = self.array(v, path)?;
        let mut ok = true;
        let mut out = Vec::new();
        for (u, m) in labels.iter().enumerate() {
            let mpath = format!("{path}[{u}]");
            let Some(rows) = self.array(m, &mpath) else {
                ok = false;
                continue;
            };
            let mut mat = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                let rpath = format!("{mpath}[{i}]");
                let Some(cells) = self.array(row, &rpath) else {
                    ok = false;
                    continue;
                };
                let mut r = Vec::new();
                for (j, c) in cells.iter().enumerate() {
                    match self.rational(c, &format!("{rpath}[{j}]")) {
                        Some(x) => r.push(x),
                        None => ok = false,
                    }
                }
                mat.push(r);
            }
            out.push(mat);
        }
        ok.then_some(out)
    }

    fn spec(&mut self, v: &Value) -> Option<CovarianceSpec> {
        let m = self.object(v, "spec")?;
        if let Some(b) = m.get("b") {
            let b = self.cube(b, "spec.b")?;
            let r = b.first().map_or(0, |m| m.len());
            let d = CovarianceSpec::diagnostics(r, &b);
            if !d.is_empty() {
                for x in d {
                    self.push(DiagnosticKind::Range, "spec.b", x);
                }
                return None;
            }
            return CovarianceSpec::new(r, b).ok();
        }
        match (m.get("dims"), m.get("variances")) {
            (Some(dims), Some(vars)) => {
                let dims_arr = self.array(dims, "spec.dims")?;
                let dims: Option<Vec<Rational>> = dims_arr
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.rational(x, &format!("spec.dims[{i}]")))
                    .collect();
                let vars = self.cube(vars, "spec.variances");
                let (dims, vars) = (dims?, vars?);
                match CovarianceSpec::from_dimensions(dims, vars) {
                    Ok(s) => Some(s),
                    Err(e) => {
                        self.push(DiagnosticKind::Range, "spec", e.to_string());
                        None
                    }
                }
            }
            _ => {
                self.push(
                    DiagnosticKind::Schema,
                    "spec",
                    "expected either \"b\" or both \"dims\" and \"variances\"",
                );
                None
            }
        }
    }

    fn letter(&mut self, v: &Value, path: &str, spec: Option<&CovarianceSpec>) -> Option<Letter> {
        let m = self.object(v, path)?;
        let r = spec.map(|s| s.r());
        let labels = spec.map(|s| s.labels());
        let p = self.index(m.get("p"), &format!("{path}.p"), r);
        let q = self.index(m.get("q"), &format!("{path}.q"), r);
        let u = match m.get("u") {
            None => Some(0),
            some => self.index(some, &format!("{path}.u"), labels),
        };
        let star = self.bool(m.get("star"), &format!("{path}.star"));
        Some(Letter::new(p?, q?, u?, star))
    }

    fn words(&mut self, v: &Value, spec: Option<&CovarianceSpec>) -> Vec<ConfigWord> {
        let Some(items) = self.array(v, "words") else {
            return vec![];
        };
        let mut out = Vec::new();
        for (k, item) in items.iter().enumerate() {
            let path = format!("words[{k}]");
            let Some(m) = self.object(item, &path) else {
                continue;
            };
            let letters_v = m.get("letters").cloned().unwrap_or(Value::Array(vec![]));
            let Some(ls) = self.array(&letters_v, &format!("{path}.letters")).cloned() else {
                continue;
            };
            if ls.len() > DEFAULT_MAX_GROUND_SET {
                self.push(
                    DiagnosticKind::Cap,
                    &format!("{path}.letters"),
                    format!(
                        "word length {} exceeds the limit {DEFAULT_MAX_GROUND_SET}",
                        ls.len()
                    ),
                );
                continue;
            }
            let letters: Vec<Option<Letter>> = ls
                .iter()
                .enumerate()
                .map(|(i, l)| self.letter(l, &format!("{path}.letters[{i}]"), spec))
                .collect();
            let state = self.index(
                m.get("state"),
                &format!("{path}.state"),
                spec.map(|s| s.r()),
            );
            let eta = self.bool(m.get("eta"), &format!("{path}.eta"));
            if let (Some(letters), Some(state)) =
                (letters.into_iter().collect::<Option<Vec<_>>>(), state)
            {
                out.push(ConfigWord {
                    word: Word::new(letters, state),
                    eta,
                });
            }
        }
        out
    }

    fn eps_words(&mut self, v: &Value) -> Vec<EpsWord> {
        let Some(items) = self.array(v, "eps_words") else {
            return vec![];
        };
        let mut out = Vec::new();
        for (k, item) in items.iter().enumerate() {
            let path = format!("eps_words[{k}]");
            match item {
                Value::String(s) => match s.parse::<EpsWord>() {
                    Ok(e) if e.len() > DEFAULT_MAX_GROUND_SET => self.push(
                        DiagnosticKind::Cap,
                        &path,
                        format!(
                            "word length {} exceeds the limit {DEFAULT_MAX_GROUND_SET}",
                            e.len()
                        ),
                    ),
                    Ok(e) => out.push(e),
                    Err(e) => self.push(DiagnosticKind::Schema, &path, e.to_string()),
                },
                other => self.push(
                    DiagnosticKind::Schema,
                    &path,
                    format!("expected a string like \"*1*1\", got {other}"),
                ),
            }
        }
        out
    }

    fn array_state(&mut self, v: &Value, r: Option<usize>) -> Option<ArrayState> {
        let m = self.object(v, "array_state")?;
        if let Some(q) = m.get("vacuum") {
            return self
                .index(Some(q), "array_state.vacuum", r)
                .map(ArrayState::Vacuum);
        }
        if let Some(d) = m.get("mixture") {
            let arr = self.array(d, "array_state.mixture")?;
            let d: Option<Vec<Rational>> = arr
                .iter()
                .enumerate()
                .map(|(i, x)| self.rational(x, &format!("array_state.mixture[{i}]")))
                .collect();
            let d = d?;
            if let Some(r) = r {
                if d.len() != r {
                    self.push(
                        DiagnosticKind::Range,
                        "array_state.mixture",
                        format!("needs {r} weights, got {}", d.len()),
                    );
                    return None;
                }
            }
            return Some(ArrayState::Mixture(d));
        }
        self.push(
            DiagnosticKind::Schema,
            "array_state",
            "expected \"vacuum\" or \"mixture\"",
        );
        None
    }

    fn betas(&mut self, m: &Map<String, Value>, path: &str) -> Option<(Rational, Rational)> {
        let get = |k: &str| m.get(k).cloned().unwrap_or(Value::Null);
        let b1 = self.rational(&get("beta1"), &format!("{path}.beta1"));
        let b2 = self.rational(&get("beta2"), &format!("{path}.beta2"));
        Some((b1?, b2?))
    }

    fn meixner(&mut self, v: &Value) -> Option<MeixnerParams> {
        let m = self.object(v, "meixner")?;
        let betas = self.betas(m, "meixner");
        let a1 = self.complex(m.get("alpha1"), "meixner.alpha1");
        let a2 = self.complex(m.get("alpha2"), "meixner.alpha2");
        let (beta1, beta2) = betas?;
        let params = MeixnerParams {
            beta1,
            beta2,
            alpha1: a1?,
            alpha2: a2?,
        };
        let d = params.diagnostics();
        if !d.is_empty() {
            for x in d {
                self.push(DiagnosticKind::Meixner, "meixner", x);
            }
            return None;
        }
        Some(params)
    }

    fn kesten(&mut self, v: &Value) -> Option<(Rational, Rational)> {
        let m = self.object(v, "kesten")?;
        let (b1, b2) = self.betas(m, "kesten")?;
        let params = MeixnerParams::kesten(b1.clone(), b2.clone());
        let d = params.diagnostics();
        if !d.is_empty() {
            for x in d {
                self.push(DiagnosticKind::Meixner, "kesten", x);
            }
            return None;
        }
        Some((b1, b2))
    }

    fn model(
        &mut self,
        v: &Value,
        n: Option<usize>,
        seed: u64,
        trials: usize,
    ) -> Option<BlockModel> {
        let m = self.object(v, "model")?;
        let sizes_v = m.get("sizes").cloned().unwrap_or(Value::Null);
        let sizes = self.array(&sizes_v, "model.sizes").cloned();
        let sizes: Option<Vec<usize>> = sizes.and_then(|s| {
            s.iter()
                .enumerate()
                .map(|(i, x)| self.uint(Some(x), &format!("model.sizes[{i}]")))
                .collect()
        });
        let vars = match m.get("variances") {
            Some(v) => self.cube(v, "model.variances"),
            None => {
                self.push(DiagnosticKind::Schema, "model.variances", "missing");
                None
            }
        };
        let (sizes, vars) = (sizes?, vars?);
        if let Some(n) = n {
            let total: usize = sizes.iter().sum();
            if total != n {
                self.push(
                    DiagnosticKind::Range,
                    "model.sizes",
                    format!("block sizes sum to {total}, but n = {n}"),
                );
            }
        }
        let d = BlockModel::diagnostics(&sizes, &vars, trials);
        if !d.is_empty() {
            for x in d {
                self.push(DiagnosticKind::Range, "model", x);
            }
            return None;
        }
        BlockModel::new(sizes, vars, seed, trials).ok()
    }

    fn matrix_letter(
        &mut self,
        v: &Value,
        path: &str,
        r: Option<usize>,
        labels: Option<usize>,
    ) -> Option<MatrixWordLetter> {
        let m = self.object(v, path)?;
        let kind = m.get("kind").and_then(|k| k.as_str()).unwrap_or("");
        let u = match m.get("u") {
            None => Some(0),
            some => self.index(some, &format!("{path}.u"), labels),
        };
        let star = self.bool(m.get("star"), &format!("{path}.star"));
        match kind {
            "full" => Some(MatrixWordLetter::Full { u: u?, star }),
            "block" | "symblock" => {
                let p = self.index(m.get("p"), &format!("{path}.p"), r);
                let q = self.index(m.get("q"), &format!("{path}.q"), r);
                let (p, q, u) = (p?, q?, u?);
                Some(if kind == "block" {
                    MatrixWordLetter::Block { p, q, u, star }
                } else {
                    MatrixWordLetter::SymBlock { p, q, u, star }
                })
            }
            "shifted" => {
                let alpha_v = m.get("alpha").cloned().unwrap_or(Value::Null);
                let arr = self.array(&alpha_v, &format!("{path}.alpha"))?.clone();
                if let Some(r) = r {
                    if arr.len() != r {
                        self.push(
                            DiagnosticKind::Range,
                            &format!("{path}.alpha"),
                            format!("needs {r} shifts, got {}", arr.len()),
                        );
                        return None;
                    }
                }
                let alpha: Option<Vec<ComplexRational>> = arr
                    .iter()
                    .enumerate()
                    .map(|(i, a)| self.complex(Some(a), &format!("{path}.alpha[{i}]")))
                    .collect();
                Some(MatrixWordLetter::Shifted {
                    u: u?,
                    star,
                    alpha: alpha?,
                })
            }
            other => {
                self.push(
                    DiagnosticKind::Schema,
                    &format!("{path}.kind"),
                    format!(
                        "unknown matrix letter kind {other:?} (full, block, symblock, shifted)"
                    ),
                );
                None
            }
        }
    }

    fn matrix_words(
        &mut self,
        v: &Value,
        model: Option<&BlockModel>,
    ) -> Vec<(Vec<MatrixWordLetter>, usize)> {
        let Some(items) = self.array(v, "matrix_words") else {
            return vec![];
        };
        let r = model.map(|m| m.r());
        let labels = model.map(|m| m.labels());
        let mut out = Vec::new();
        for (k, item) in items.iter().enumerate() {
            let path = format!("matrix_words[{k}]");
            let Some(m) = self.object(item, &path) else {
                continue;
            };
            let lv = m.get("letters").cloned().unwrap_or(Value::Array(vec![]));
            let Some(ls) = self.array(&lv, &format!("{path}.letters")).cloned() else {
                continue;
            };
            if ls.len() > MAX_WORD_LEN {
                self.push(
                    DiagnosticKind::Cap,
                    &format!("{path}.letters"),
                    format!(
                        "matrix word length {} exceeds the limit {MAX_WORD_LEN}",
                        ls.len()
                    ),
                );
                continue;
            }
            let letters: Option<Vec<_>> = ls
                .iter()
                .enumerate()
                .map(|(i, l)| self.matrix_letter(l, &format!("{path}.letters[{i}]"), r, labels))
                .collect();
            let state = self.index(m.get("state"), &format!("{path}.state"), r);
            if let (Some(l), Some(s)) = (letters, state) {
                out.push((l, s));
            }
        }
        out
    }

    fn ck(&mut self, v: &Value) -> Option<CkConfig> {
        let m = self.object(v, "ck")?;
        let r = self.uint(m.get("r"), "ck.r");
        let labels = match m.get("labels") {
            None => Some(1),
            some => self.uint(some, "ck.labels"),
        };
        let depth = self.uint(m.get("depth"), "ck.depth");
        let pairs = match m.get("pairs") {
            None => Some(None),
            Some(p) => {
                let arr = self.array(p, "ck.pairs")?.clone();
                let parsed: Option<Vec<(usize, usize)>> = arr
                    .iter()
                    .enumerate()
                    .map(|(i, pair)| {
                        let path = format!("ck.pairs[{i}]");
                        let items = self.array(pair, &path)?.clone();
                        if items.len() != 2 {
                            self.push(DiagnosticKind::Schema, &path, "expected [p, q]");
                            return None;
                        }
                        let p = self.index(items.first(), &path, r);
                        let q = self.index(items.get(1), &path, r);
                        Some((p?, q?))
                    })
                    .collect();
                parsed.map(Some)
            }
        };
        Some(CkConfig {
            r: r?,
            labels: labels?,
            depth: depth?,
            pairs: pairs?,
        })
    }
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

const KNOWN_KEYS: &[&str] = &[
    "spec",
    "words",
    "eps_words",
    "array_state",
    "kesten",
    "meixner",
    "model",
    "n",
    "matrix_words",
    "seed",
    "trials",
    "cap",
    "tolerance",
    "ck",
];

/// Parses a config, or returns every diagnostic found.
pub fn parse_config(v: &Value) -> Result<Config, Vec<Diagnostic>> {
    let mut p = Parser { diags: Vec::new() };
    let Some(root) = p.object(v, "config").cloned() else {
        return Err(p.diags);
    };
    for k in root.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            p.push(DiagnosticKind::Schema, k, "unknown key");
        }
    }
    let seed = match root.get("seed") {
        None => DEFAULT_SEED,
        Some(v) => match v.as_u64() {
            Some(s) => s,
            None => {
                p.push(
                    DiagnosticKind::Schema,
                    "seed",
                    format!("expected a non-negative integer, got {v}"),
                );
                DEFAULT_SEED
            }
        },
    };
    let trials = match root.get("trials") {
        None => DEFAULT_TRIALS,
        some => p.uint(some, "trials").unwrap_or(DEFAULT_TRIALS),
    };
    let cap = match root.get("cap") {
        None => DEFAULT_CAP,
        some => p.uint(some, "cap").unwrap_or(DEFAULT_CAP),
    };
    if cap > DEFAULT_SERIES_CAP {
        p.push(
            DiagnosticKind::Cap,
            "cap",
            format!("series degree {cap} exceeds the limit {DEFAULT_SERIES_CAP}"),
        );
    }
    let mut tolerance = Tolerance::default();
    if let Some(t) = root.get("tolerance") {
        if let Some(m) = p.object(t, "tolerance") {
            for (key, slot) in [("rel", &mut tolerance.rel), ("z", &mut tolerance.z)] {
                if let Some(x) = m.get(key) {
                    match x.as_f64() {
                        Some(f) if f >= 0.0 => *slot = f,
                        _ => p.push(
                            DiagnosticKind::Schema,
                            &format!("tolerance.{key}"),
                            "expected a non-negative number",
                        ),
                    }
                }
            }
        }
    }
    let n = root.get("n").and_then(|x| p.uint(Some(x), "n"));
    if let Some(n) = n {
        if n < 16 && root.get("model").is_none() {
            p.push(
                DiagnosticKind::Range,
                "n",
                format!("the Kesten matrix model needs n >= 16, got {n}"),
            );
        }
    }
    let model = root.get("model").and_then(|v| p.model(v, n, seed, trials));
    let spec = match root.get("spec") {
        Some(v) => p.spec(v),
        None => model.as_ref().map(|m| m.prediction_spec()),
    };
    let spec_ok = spec.is_some() || root.get("spec").is_none();
    let words = match root.get("words") {
        Some(v) if spec_ok => p.words(v, spec.as_ref()),
        _ => vec![],
    };
    let eps_words = root
        .get("eps_words")
        .map(|v| p.eps_words(v))
        .unwrap_or_default();
    let array_state = root
        .get("array_state")
        .and_then(|v| p.array_state(v, spec.as_ref().map(|s| s.r())));
    let kesten = root.get("kesten").and_then(|v| p.kesten(v));
    let meixner = root.get("meixner").and_then(|v| p.meixner(v));
    let matrix_words = root
        .get("matrix_words")
        .map(|v| p.matrix_words(v, model.as_ref()))
        .unwrap_or_default();
    let ck = root.get("ck").and_then(|v| p.ck(v));
    if p.diags.is_empty() {
        Ok(Config {
            spec,
            words,
            eps_words,
            array_state,
            kesten,
            meixner,
            model,
            n,
            matrix_words,
            seed,
            trials,
            cap,
            tolerance,
            ck,
        })
    } else {
        Err(p.diags)
    }
}

/// Every violation in the config; empty when it is well formed.
pub fn validate_config(v: &Value) -> Vec<Diagnostic> {
    parse_config(v).err().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn well_formed_config_has_no_diagnostics() {
        let v = json!({
            "spec": {"b": [[[0, 2], [3, 0]]]},
            "words": [{"letters": [{"p": 1, "q": 2, "star": true}, {"p": 1, "q": 2}], "state": 2}],
            "eps_words": ["*1*1"],
            "meixner": {"beta1": 1, "beta2": {"num": 3, "den": 2}, "alpha1": {"re": 1, "im": -1}},
            "cap": 4
        });
        assert!(validate_config(&v).is_empty(), "{:?}", validate_config(&v));
        let c = parse_config(&v).unwrap();
        assert_eq!(c.words[0].word.letters[0], Letter::new(0, 1, 0, true));
        assert_eq!(c.words[0].word.condition, 1);
    }

    #[test]
    fn reports_every_violation() {
        let v = json!({
            "spec": {"b": [[[0, 2], [-3, 0]]]},
            "meixner": {"beta1": 0, "beta2": 0, "alpha2": 1},
            "eps_words": ["*x"],
            "cap": 20,
            "bogus": 1
        });
        let d = validate_config(&v);
        let kinds: Vec<_> = d.iter().map(|x| x.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::Range));
        assert!(kinds.contains(&DiagnosticKind::Meixner));
        assert!(kinds.contains(&DiagnosticKind::Cap));
        assert!(kinds.contains(&DiagnosticKind::Schema));
        assert!(d
            .iter()
            .any(|x| x.message.contains("beta1 = 0 requires alpha2 = 0")));
    }

    #[test]
    fn floats_are_rejected_in_exact_fields() {
        let v = json!({"spec": {"b": [[[0.5]]]}});
        let d = validate_config(&v);
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("floating-point"));
    }

    #[test]
    fn letters_are_range_checked() {
        let v = json!({
            "spec": {"b": [[[1, 1], [1, 1]]]},
            "words": [{"letters": [{"p": 3, "q": 1}, {"p": 1, "q": 1, "u": 2}], "state": 0}]
        });
        let d = validate_config(&v);
        assert_eq!(d.len(), 3, "{d:?}");
        assert!(d.iter().all(|x| x.kind == DiagnosticKind::Range));
    }

    #[test]
    fn model_sizes_must_sum_to_n() {
        let v = json!({"model": {"sizes": [3, 4], "variances": [[[1, 1], [1, 1]]]}, "n": 8});
        let d = validate_config(&v);
        assert!(d.iter().any(|x| x.message.contains("sum to 7")));
    }
}
