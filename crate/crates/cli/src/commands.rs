use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use rcircular::cumulants::{
    check_catalan_against_moments, check_moment_relation, check_scalar_circular_identity,
    cyclic_r_transform, moment_series, quadratic_r_transform, scalar_moment_series, CumulantEngine,
    MomentSource, NCSeries,
};
use rcircular::cuntz::run_ck_check;
use rcircular::fock::{eta_expectation, vacuum_expectation, zeta_expectation};
use rcircular::moments::{
    eta_moment, kesten_moment, kesten_moment_general, meixner_fock_word, meixner_moment,
    moment_explained, ArrayState, MeixnerParams,
};
use rcircular::randmat::{
    convergence_report, kesten_model, meixner_model, partial_trace_moments, predict,
    word_to_string, BlockModel, ConvergenceReport, MatrixWordLetter, MomentEstimate,
};
use rcircular::scalar::{complex_to_json, int, rational_to_json, to_f64};
use rcircular::{ComplexRational, CovarianceSpec, EpsWord, Error, Letter, Rational};

use crate::config::{Config, ConfigWord};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Moment,
    FockMoment,
    Cumulant,
    RTransform,
    Series,
    Kesten,
    Meixner,
    Simulate,
    Crossval,
    CkCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moment => "moment",
            Command::FockMoment => "fock-moment",
            Command::Cumulant => "cumulant",
            Command::RTransform => "rtransform",
            Command::Series => "series",
            Command::Kesten => "kesten",
            Command::Meixner => "meixner",
            Command::Simulate => "simulate",
            Command::Crossval => "crossval",
            Command::CkCheck => "ck-check",
        }
    }
}

#[derive(Debug)]
pub enum CommandError {
    /// Missing section or an engine precondition.
    Config(String),
    /// A size cap was exceeded.
    Size(String),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::SizeLimit { .. } => CommandError::Size(e.to_string()),
            other => CommandError::Config(other.to_string()),
        }
    }
}

type Rows = Vec<Map<String, Value>>;

pub struct Outcome {
    pub engines: Vec<&'static str>,
    pub pass: bool,
    pub summary: Value,
    pub rows: Rows,
}

fn row(pairs: Vec<(&str, Value)>) -> Map<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn c64_json(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn word_text(w: &ConfigWord) -> String {
    let body: Vec<String> = w
        .word
        .letters
        .iter()
        .map(|l| {
            if w.eta {
                l.to_string().replacen('z', "eta", 1)
            } else {
                l.to_string()
            }
        })
        .collect();
    body.join(" ")
}

fn need<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T, CommandError> {
    x.as_ref()
        .ok_or_else(|| CommandError::Config(format!("this command needs a \"{what}\" section")))
}

fn need_words(cfg: &Config) -> Result<(), CommandError> {
    if cfg.words.is_empty() {
        return Err(CommandError::Config(
            "this command needs a non-empty \"words\" list".into(),
        ));
    }
    Ok(())
}

pub fn run(cmd: Command, cfg: &Config) -> Result<Outcome, CommandError> {
    match cmd {
        Command::Moment => moment(cfg),
        Command::FockMoment => fock_moment(cfg),
        Command::Cumulant => cumulant(cfg),
        Command::RTransform => rtransform(cfg),
        Command::Series => series(cfg),
        Command::Kesten => kesten(cfg),
        Command::Meixner => meixner(cfg),
        Command::Simulate => simulate(cfg),
        Command::Crossval => crossval(cfg),
        Command::CkCheck => ck_check(cfg),
    }
}

fn moment(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    need_words(cfg)?;
    let mut rows = Rows::new();
    for w in &cfg.words {
        let (value, contributions) = if w.eta {
            (
                eta_moment(&w.word.letters, w.word.condition, spec)?,
                Vec::new(),
            )
        } else {
            let res = moment_explained(&w.word, spec)?;
            let contributions = res
                .contributions
                .unwrap_or_default()
                .iter()
                .map(|c| {
                    json!({
                        "partition": c.partition.to_string(),
                        "colors": c.coloring.block_color.iter().map(|x| x + 1).collect::<Vec<_>>(),
                        "imaginary_color": c.coloring.imaginary_color + 1,
                        "weight": rational_to_json(&c.weight),
                    })
                })
                .collect();
            (res.value, contributions)
        };
        rows.push(row(vec![
            ("word", json!(word_text(w))),
            ("state", json!(w.word.condition + 1)),
            ("value", rational_to_json(&value)),
            ("contributions", Value::Array(contributions)),
        ]));
    }
    Ok(Outcome {
        engines: vec!["combinatorial"],
        pass: true,
        summary: json!({"words": rows.len()}),
        rows,
    })
}

fn fock_moment(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    need_words(cfg)?;
    let mut rows = Rows::new();
    for w in &cfg.words {
        let value = fock_value(w, spec)?;
        rows.push(row(vec![
            ("word", json!(word_text(w))),
            ("state", json!(w.word.condition + 1)),
            ("value", rational_to_json(&value)),
        ]));
    }
    Ok(Outcome {
        engines: vec!["fock"],
        pass: true,
        summary: json!({"words": rows.len()}),
        rows,
    })
}

fn fock_value(w: &ConfigWord, spec: &CovarianceSpec) -> Result<Rational, Error> {
    if w.eta {
        eta_expectation(&w.word.letters, w.word.condition, spec)
    } else {
        zeta_expectation(&w.word.letters, w.word.condition, spec)
    }
}

fn combinatorial_value(w: &ConfigWord, spec: &CovarianceSpec) -> Result<Rational, Error> {
    if w.eta {
        eta_moment(&w.word.letters, w.word.condition, spec)
    } else {
        Ok(moment_explained(&w.word, spec)?.value)
    }
}

fn cumulant(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    need_words(cfg)?;
    let mut engine = CumulantEngine::new(spec, MomentSource::Combinatorial);
    let mut rows = Rows::new();
    for w in &cfg.words {
        let value = if w.eta {
            engine.eta_cumulant(&w.word.letters, w.word.condition)?
        } else {
            engine.cumulant(&w.word.letters, w.word.condition)?
        };
        rows.push(row(vec![
            ("word", json!(word_text(w))),
            ("state", json!(w.word.condition + 1)),
            ("order", json!(w.word.letters.len())),
            ("value", rational_to_json(&value)),
        ]));
    }
    Ok(Outcome {
        engines: vec!["combinatorial"],
        pass: true,
        summary: json!({"words": rows.len()}),
        rows,
    })
}

fn series_rows(rows: &mut Rows, state: usize, s: &NCSeries) {
    for (w, c) in s.terms() {
        if c.is_zero() {
            continue;
        }
        let word: Vec<String> = w.iter().map(Letter::to_string).collect();
        rows.push(row(vec![
            ("state", json!(state + 1)),
            ("degree", json!(w.len())),
            ("word", json!(word.join(" "))),
            ("coefficient", rational_to_json(c)),
        ]));
    }
}

fn rtransform(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    let mut engine = CumulantEngine::new(spec, MomentSource::Combinatorial);
    let mut rows = Rows::new();
    let mut pass = true;
    let mut degrees = Vec::new();
    for q in 0..spec.r() {
        let r = cyclic_r_transform(&mut engine, q, cfg.cap)?;
        let expected = quadratic_r_transform(spec, q, cfg.cap);
        let diff = r.first_difference(&expected);
        pass &= diff.is_none();
        degrees.extend(
            r.terms()
                .filter(|(_, c)| !c.is_zero())
                .map(|(w, _)| w.len()),
        );
        series_rows(&mut rows, q, &r);
    }
    degrees.sort_unstable();
    degrees.dedup();
    Ok(Outcome {
        engines: vec!["combinatorial"],
        pass,
        summary: json!({
            "cap": cfg.cap,
            "nonzero_degrees": degrees,
            "matches_quadratic_form": pass,
        }),
        rows,
    })
}

fn series(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    let cap = cfg.cap;
    let ms: Vec<NCSeries> = (0..spec.r())
        .map(|q| moment_series(spec, q, cap))
        .collect::<Result<_, _>>()?;
    let mut checks = Vec::new();
    let relation = check_moment_relation(&ms, spec, cap);
    checks.push(json!({"identity": "moment relation", "pass": relation.is_none(), "mismatch": relation.map(|m| m.to_string())}));
    let catalan = check_catalan_against_moments(spec, cap)?;
    checks.push(json!({"identity": "Catalan recurrence", "pass": catalan.is_none(), "mismatch": catalan.map(|m| m.to_string())}));
    if let Some(state @ ArrayState::Mixture(_)) = &cfg.array_state {
        let m0 = scalar_moment_series(spec, state, cap)?;
        let scalar = check_scalar_circular_identity(&m0, cap);
        checks.push(json!({"identity": "scalar circular identity", "pass": scalar.is_none(), "mismatch": scalar.map(|m| m.to_string())}));
    }
    let pass = checks.iter().all(|c| c["pass"] == json!(true));
    let mut rows = Rows::new();
    for (q, m) in ms.iter().enumerate() {
        series_rows(&mut rows, q, m);
    }
    Ok(Outcome {
        engines: vec!["combinatorial"],
        pass,
        summary: json!({"cap": cap, "checks": checks}),
        rows,
    })
}

fn mc_rows(rows: &mut Rows, report: &ConvergenceReport) {
    for (r, out) in report.rows.iter().zip(rows.iter_mut()) {
        out.insert("estimate".into(), c64_json(r.estimate));
        out.insert("stderr".into(), json!(r.stderr));
        out.insert("finite_n_prediction".into(), c64_json(r.prediction));
        out.insert("z".into(), json!(r.z));
        out.insert("rel_error".into(), json!(r.rel_error));
        out.insert("mc_pass".into(), json!(r.pass));
    }
}

fn eps_words_or_all(cfg: &Config) -> Vec<EpsWord> {
    if cfg.eps_words.is_empty() {
        (1..=cfg.cap).flat_map(EpsWord::all).collect()
    } else {
        cfg.eps_words.clone()
    }
}

fn full_word(eps: &EpsWord) -> Vec<MatrixWordLetter> {
    eps.stars()
        .iter()
        .map(|&star| MatrixWordLetter::Full { u: 0, star })
        .collect()
}

fn kesten(cfg: &Config) -> Result<Outcome, CommandError> {
    let (b1, b2) = need(&cfg.kesten, "kesten")?;
    let words = eps_words_or_all(cfg);
    let mut rows = Rows::new();
    let mut pass = true;
    for eps in &words {
        let closed = kesten_moment(eps, b1, b2);
        let general = kesten_moment_general(eps, b1, b2)?;
        pass &= closed == general;
        rows.push(row(vec![
            ("word", json!(eps.to_string())),
            ("closed_form", rational_to_json(&closed)),
            ("general_engine", rational_to_json(&general)),
            ("agree", json!(closed == general)),
        ]));
    }
    let mut engines = vec!["closed-form", "combinatorial"];
    let mut summary =
        json!({"beta1": rational_to_json(b1), "beta2": rational_to_json(b2), "words": words.len()});
    if let Some(n) = cfg.n {
        let model = kesten_model(n, b1, b2, cfg.seed, cfg.trials)?;
        let mw: Vec<_> = words.iter().map(|e| (full_word(e), 0)).collect();
        let rep = simulate_words(&model, &mw, cfg)?;
        mc_rows(&mut rows, &rep);
        pass &= rep.all_pass();
        engines.push("monte-carlo");
        summary["monte_carlo"] = mc_summary(&model, &rep);
    }
    Ok(Outcome {
        engines,
        pass,
        summary,
        rows,
    })
}

fn meixner(cfg: &Config) -> Result<Outcome, CommandError> {
    let params: &MeixnerParams = need(&cfg.meixner, "meixner")?;
    let words = eps_words_or_all(cfg);
    let spec = params.spec();
    let mut rows = Rows::new();
    let mut pass = true;
    for eps in &words {
        let closed = meixner_moment(eps, params)?;
        let fock: ComplexRational = vacuum_expectation(&meixner_fock_word(eps, params), 0, &spec)?;
        pass &= closed == fock;
        rows.push(row(vec![
            ("word", json!(eps.to_string())),
            ("closed_form", complex_to_json(&closed)),
            ("fock", complex_to_json(&fock)),
            ("agree", json!(closed == fock)),
        ]));
    }
    let mut engines = vec!["closed-form", "fock"];
    let mut summary = json!({"words": words.len()});
    if let Some(n) = cfg.n {
        let (model, [m, ms]) = meixner_model(n, params, cfg.seed, cfg.trials)?;
        let mw: Vec<_> = words
            .iter()
            .map(|e| {
                (
                    e.stars()
                        .iter()
                        .map(|&s| if s { ms.clone() } else { m.clone() })
                        .collect(),
                    0,
                )
            })
            .collect();
        let rep = simulate_words(&model, &mw, cfg)?;
        mc_rows(&mut rows, &rep);
        pass &= rep.all_pass();
        engines.push("monte-carlo");
        summary["monte_carlo"] = mc_summary(&model, &rep);
    }
    Ok(Outcome {
        engines,
        pass,
        summary,
        rows,
    })
}

fn simulate_words(
    model: &BlockModel,
    words: &[(Vec<MatrixWordLetter>, usize)],
    cfg: &Config,
) -> Result<ConvergenceReport, CommandError> {
    let est: Vec<MomentEstimate> = partial_trace_moments(model, words)?;
    let preds: Vec<ComplexRational> = words
        .iter()
        .map(|(w, q)| predict(model, w, *q))
        .collect::<Result<_, _>>()?;
    Ok(convergence_report(&est, &preds, cfg.tolerance))
}

fn mc_summary(model: &BlockModel, rep: &ConvergenceReport) -> Value {
    json!({
        "sizes": model.sizes(),
        "seed": model.seed,
        "trials": model.trials,
        "tolerance": {"rel": rep.tolerance.rel, "z": rep.tolerance.z},
        "max_rel_error": rep.max_rel_error(),
        "all_pass": rep.all_pass(),
    })
}

fn simulate(cfg: &Config) -> Result<Outcome, CommandError> {
    let model = need(&cfg.model, "model")?;
    if cfg.matrix_words.is_empty() {
        return Err(CommandError::Config(
            "simulate needs a non-empty \"matrix_words\" list".into(),
        ));
    }
    let rep = simulate_words(model, &cfg.matrix_words, cfg)?;
    let mut rows: Rows = cfg
        .matrix_words
        .iter()
        .map(|(w, q)| {
            row(vec![
                ("word", json!(word_to_string(w))),
                ("state", json!(q + 1)),
            ])
        })
        .collect();
    mc_rows(&mut rows, &rep);
    Ok(Outcome {
        engines: vec!["monte-carlo", "fock"],
        pass: rep.all_pass(),
        summary: mc_summary(model, &rep),
        rows,
    })
}

fn crossval(cfg: &Config) -> Result<Outcome, CommandError> {
    let spec = need(&cfg.spec, "spec")?;
    need_words(cfg)?;
    let mut rows = Rows::new();
    let mut pass = true;
    let mut values = Vec::new();
    for w in &cfg.words {
        let a = combinatorial_value(w, spec)?;
        let b = fock_value(w, spec)?;
        let diff = &a - &b;
        pass &= diff.is_zero();
        rows.push(row(vec![
            ("word", json!(word_text(w))),
            ("state", json!(w.word.condition + 1)),
            ("combinatorial", rational_to_json(&a)),
            ("fock", rational_to_json(&b)),
            ("diff", rational_to_json(&diff)),
        ]));
        values.push(a);
    }
    let mut engines = vec!["combinatorial", "fock"];
    let mut summary = json!({"words": rows.len(), "exact_engines_agree": pass});
    if let Some(model) = &cfg.model {
        let mw: Vec<_> = cfg
            .words
            .iter()
            .map(|w| {
                let letters = w
                    .word
                    .letters
                    .iter()
                    .map(|l| {
                        let (p, q, u, star) = (l.p, l.q, l.u, l.star);
                        if w.eta {
                            MatrixWordLetter::SymBlock { p, q, u, star }
                        } else {
                            MatrixWordLetter::Block { p, q, u, star }
                        }
                    })
                    .collect();
                (letters, w.word.condition)
            })
            .collect();
        let est = partial_trace_moments(model, &mw)?;
        let exact: Vec<ComplexRational> = values
            .iter()
            .map(|v| ComplexRational::new(v.clone(), int(0)))
            .collect();
        let rep = convergence_report(&est, &exact, cfg.tolerance);
        for (r, out) in rep.rows.iter().zip(rows.iter_mut()) {
            out.insert("estimate".into(), c64_json(r.estimate));
            out.insert("stderr".into(), json!(r.stderr));
            out.insert("z".into(), json!(r.z));
            out.insert("rel_error".into(), json!(r.rel_error));
            out.insert("mc_pass".into(), json!(r.pass));
        }
        pass &= rep.all_pass();
        engines.push("monte-carlo");
        summary["monte_carlo"] = mc_summary(model, &rep);
        summary["max_abs_diff_vs_exact"] = json!(rep
            .rows
            .iter()
            .zip(&values)
            .map(|(r, v)| (r.estimate - Complex64::new(to_f64(v), 0.0)).norm())
            .fold(0.0, f64::max));
    }
    Ok(Outcome {
        engines,
        pass,
        summary,
        rows,
    })
}

fn ck_check(cfg: &Config) -> Result<Outcome, CommandError> {
    let ck = need(&cfg.ck, "ck")?;
    let spec = match &cfg.spec {
        Some(s) => s.clone(),
        None => CovarianceSpec::uniform(ck.r, ck.labels, int(1)),
    };
    let rep = run_ck_check(&spec, ck.pairs.as_deref(), ck.depth)?;
    let rows = rep
        .checks
        .iter()
        .map(|c| {
            row(vec![
                ("identity", json!(c.identity)),
                ("vectors_checked", json!(c.vectors_checked)),
                ("pass", json!(c.passed())),
                ("witness", json!(c.witness)),
            ])
        })
        .collect();
    Ok(Outcome {
        engines: vec!["truncated-fock"],
        pass: rep.all_pass(),
        summary: json!({
            "relation_matrix": rep.relation.to_json(),
            "depth": rep.depth,
            "dimension": rep.dim,
            "safe_length": rep.safe_length,
            "identities": rep.checks.len(),
        }),
        rows,
    })
}
