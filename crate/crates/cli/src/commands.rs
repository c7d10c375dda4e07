//! The five modes. Each returns `Ok(Outcome)` once it has produced its
//! report; bad parameters and I/O problems are errors.

use std::fs;

use anyhow::{bail, Context, Result};
use madc_core::combinatorics::binomial;
use madc_core::construct::{construction1_params, construction2_params};
use madc_core::privacy::{audit_independence, empirical_query_check, exact_query_distribution};
use madc_core::protocol::{load_formula, random_setups, run_round, LoadReport};
use madc_core::{
    analyze, construction1, construction2, cyclic_pda, man_pda, parse_pda_text, serialize_pda_text,
    transpose, Exact, InstanceConfig, Model, PdaArray,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{required, single, ExperimentConfig, Mode, SweepTask};
use crate::report::{
    decimal, destination, emit, fraction, render, AuditRow, ConstructRow, RoundRow, SweepRow,
};
use crate::{derive_seed, Outcome};

/// Largest `Q` audited by exact enumeration; larger `Q` is sampled.
pub const EXACT_AUDIT_MAX_Q: usize = 6;
pub const DEFAULT_AUDIT_TRIALS: u64 = 100_000;
pub const DEFAULT_SWEEP_TRIALS: u64 = 100;

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.mode {
        Mode::Construct => construct(cfg),
        Mode::Verify => verify(cfg),
        Mode::Simulate => simulate(cfg),
        Mode::Audit => audit(cfg),
        Mode::Sweep => sweep(cfg),
    }
}

fn report_name(cfg: &ExperimentConfig) -> String {
    format!("{}.{}", cfg.mode.name(), cfg.format.extension())
}

fn model_id(model: Model) -> u64 {
    match model {
        Model::Connect => 1,
        Model::Cyclic => 2,
    }
}

/// The PDA for one point; `k = None` gives the inner (per-block) array.
pub fn build_pda(model: Model, inner: usize, alpha: usize, k: Option<usize>) -> Result<PdaArray> {
    let pda = match (model, k) {
        (Model::Connect, None) => transpose(&man_pda(inner, alpha)?),
        (Model::Connect, Some(k)) => construction1(inner, alpha, k)?,
        (Model::Cyclic, None) => cyclic_pda(inner, alpha)?,
        (Model::Cyclic, Some(k)) => construction2(inner, alpha, k)?,
    };
    Ok(pda)
}

fn construct(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let inner = required(Some(cfg.inner_range(model)?), "f/q")?;
    let alpha = required(cfg.alpha.as_deref(), "alpha")?;
    let k = single(cfg.k.as_deref(), "k")?;
    let pda = build_pda(model, inner, alpha, k)?;
    let params = match analyze(&pda) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("constructed array fails verification: {e}");
            return Ok(Outcome::Failure);
        }
    };
    let mut name = format!(
        "{model}_{}{inner}_a{alpha}",
        if model == Model::Connect { "f" } else { "q" }
    );
    if let Some(k) = k {
        name.push_str(&format!("_k{k}"));
    }
    name.push_str(".pda");
    let dest = destination(cfg.output.as_ref(), &name);
    emit(&serialize_pda_text(&pda), dest.as_ref())?;
    match dest {
        Some(path) => println!("{params}\t{}", path.display()),
        None => eprintln!("{params}"),
    }
    Ok(Outcome::Success)
}

fn verify(cfg: &ExperimentConfig) -> Result<Outcome> {
    let Some(path) = &cfg.input else {
        bail!("verify needs a PDA file");
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let line = match parse_pda_text(&text) {
        Err(e) => Err(format!("parse error: {e}")),
        Ok(array) => analyze(&array)
            .map(|p| p.to_string())
            .map_err(|e| format!("violation: {e}")),
    };
    match &line {
        Ok(params) => println!("{params}"),
        Err(msg) => println!("{msg}"),
    }
    if let Some(out) = &cfg.output {
        let text = format!("{}\n", line.as_ref().unwrap_or_else(|e| e));
        emit(&text, Some(out))?;
    }
    Ok(Outcome::from_pass(line.is_ok()))
}

/// One parameter point of the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Point {
    k: usize,
    inner: usize,
    alpha: usize,
}

fn instance_config(
    model: Model,
    p: Point,
    eta: usize,
    beta: Option<usize>,
) -> Result<InstanceConfig> {
    let mut c = match model {
        Model::Connect => InstanceConfig::connect(p.k, p.inner, p.alpha),
        Model::Cyclic => InstanceConfig::cyclic(p.k, p.inner, p.alpha),
    }
    .eta(eta);
    if let Some(b) = beta {
        c = c.beta(b);
    }
    c.validate()?;
    Ok(c)
}

fn label_count(model: Model, p: Point) -> u32 {
    match model {
        Model::Connect => construction1_params(p.inner, p.alpha, p.k).3,
        Model::Cyclic => construction2_params(p.inner, p.alpha, p.k).3,
    }
}

struct Trial {
    total_bits: Option<u64>,
    report: Option<LoadReport>,
    error: Option<String>,
}

/// One round with random demands and connectivity; all randomness is
/// derived from `seed`.
fn run_trial(icfg: &InstanceConfig, seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let setups = random_setups(icfg, &mut rng);
    let icfg = icfg.clone().seed(derive_seed(seed, &[1]));
    match run_round(&icfg, &setups, derive_seed(seed, &[2])) {
        Ok(out) => Trial {
            total_bits: Some(out.transcript.total_bits),
            report: Some(out.report),
            error: None,
        },
        Err(e) => Trial {
            total_bits: None,
            report: None,
            error: Some(e.to_string()),
        },
    }
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let p = Point {
        k: required(cfg.k.as_deref(), "k")?,
        inner: required(Some(cfg.inner_range(model)?), "f/q")?,
        alpha: required(cfg.alpha.as_deref(), "alpha")?,
    };
    let icfg = instance_config(model, p, cfg.eta, cfg.beta)?;
    let formula = load_formula(model, p.k, p.inner, p.alpha);
    let trials = cfg.trials.unwrap_or(1);
    let rows: Vec<RoundRow> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(cfg.seed, &[t]);
            let trial = run_trial(&icfg, seed);
            RoundRow {
                model: model.to_string(),
                k: p.k,
                inner: p.inner,
                alpha: p.alpha,
                q: icfg.num_functions(),
                eta: icfg.eta,
                beta: icfg.beta,
                trial: t,
                seed,
                s: label_count(model, p),
                total_bits: trial.total_bits,
                l_measured: trial.report.map(|r| fraction(r.l_measured)),
                l_measured_decimal: trial.report.map(|r| decimal(r.l_measured)),
                l_formula: fraction(formula),
                l_formula_decimal: decimal(formula),
                r: trial.report.map(|r| fraction(r.r_measured)),
                status: trial.error.unwrap_or_else(|| "ok".into()),
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.status == "ok");
    emit(
        &render(&rows, cfg.format)?,
        destination(cfg.output.as_ref(), &report_name(cfg)).as_ref(),
    )?;
    Ok(Outcome::from_pass(pass))
}

fn audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let q = required(cfg.q.as_deref(), "q")?;
    let k = single(cfg.k.as_deref(), "k")?.unwrap_or(2);
    if q == 0 {
        bail!("Q >= 1 violated");
    }
    let rows = if q <= EXACT_AUDIT_MAX_Q {
        exact_audit_rows(q, k)?
    } else {
        let trials = cfg.trials.unwrap_or(DEFAULT_AUDIT_TRIALS);
        (1..=q)
            .into_par_iter()
            .map(|d| {
                let seed = derive_seed(cfg.seed, &[d as u64]);
                let check = empirical_query_check(q, d, trials, seed);
                AuditRow {
                    q,
                    k,
                    d: Some(d),
                    mode: "chi-square".into(),
                    statistic: format!("{:.4}", check.statistic),
                    threshold: format!("{:.4}", check.threshold),
                    dof: Some(check.dof),
                    trials: Some(trials),
                    seed: Some(seed),
                    pass: check.passes(),
                }
            })
            .collect()
    };
    let pass = rows.iter().all(|r| r.pass);
    emit(
        &render(&rows, cfg.format)?,
        destination(cfg.output.as_ref(), &report_name(cfg)).as_ref(),
    )?;
    Ok(Outcome::from_pass(pass))
}

/// Per-demand rows (uniform at `1/Q!`, largest TV distance to any other
/// demand's law) plus a summary row from the independence audit.
fn exact_audit_rows(q: usize, k: usize) -> Result<Vec<AuditRow>> {
    let laws = (1..=q)
        .map(|d| exact_query_distribution(q, d))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<AuditRow> = laws
        .iter()
        .enumerate()
        .map(|(i, law)| {
            let tv = laws
                .iter()
                .map(|other| law.tv_distance(other))
                .max()
                .unwrap_or(Exact::from_integer(0));
            AuditRow {
                q,
                k,
                d: Some(i + 1),
                mode: "exact".into(),
                statistic: fraction(tv),
                threshold: "0".into(),
                dof: None,
                trials: None,
                seed: None,
                pass: law.is_uniform() && tv == Exact::from_integer(0),
            }
        })
        .collect();
    let (statistic, pass) = match audit_independence(q, k) {
        Ok(report) => (fraction(report.max_tv), true),
        Err(e) => (e.to_string(), false),
    };
    rows.push(AuditRow {
        q,
        k,
        d: None,
        mode: "independence".into(),
        statistic,
        threshold: "0".into(),
        dof: None,
        trials: None,
        seed: None,
        pass,
    });
    Ok(rows)
}

fn valid_alpha(model: Model, inner: usize, alpha: usize) -> bool {
    match model {
        Model::Connect => alpha >= 1 && alpha < inner,
        Model::Cyclic => alpha >= 1 && 2 * alpha < inner && (inner + alpha).is_multiple_of(2),
    }
}

/// Sorted grid of valid points; `alpha` defaults to every valid value.
fn sweep_points(cfg: &ExperimentConfig, model: Model, ks: &[usize]) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    for &k in ks {
        for &inner in cfg.inner_range(model)? {
            let alphas: Vec<usize> = match &cfg.alpha {
                Some(a) => a.clone(),
                None => (1..inner).collect(),
            };
            points.extend(
                alphas
                    .into_iter()
                    .filter(|&alpha| valid_alpha(model, inner, alpha))
                    .map(|alpha| Point { k, inner, alpha }),
            );
        }
    }
    points.sort();
    if points.is_empty() {
        bail!("the ranges contain no valid parameter point");
    }
    Ok(points)
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let model = cfg.model()?;
    let (text, pass) = match cfg.task {
        SweepTask::Simulate => {
            let ks = cfg
                .k
                .as_deref()
                .context("--k is required for a simulate sweep")?;
            let points = sweep_points(cfg, model, ks)?;
            let configs = points
                .iter()
                .map(|&p| instance_config(model, p, cfg.eta, cfg.beta))
                .collect::<Result<Vec<_>>>()?;
            let trials = cfg.trials.unwrap_or(DEFAULT_SWEEP_TRIALS);
            let rows: Vec<SweepRow> = points
                .par_iter()
                .zip(configs.par_iter())
                .map(|(&p, icfg)| sweep_point(cfg.seed, model, p, icfg, trials))
                .collect();
            let pass = rows.iter().all(|r| r.status == "ok");
            (render(&rows, cfg.format)?, pass)
        }
        SweepTask::Construct => {
            // Without --k the inner arrays are swept; 0 marks "no extension".
            let ks: Vec<usize> = cfg.k.clone().unwrap_or_else(|| vec![0]);
            let points = sweep_points(cfg, model, &ks)?;
            let rows: Vec<ConstructRow> = points
                .par_iter()
                .map(|&p| construct_point(model, p))
                .collect::<Result<_>>()?;
            let pass = rows.iter().all(|r| r.status == "ok");
            (render(&rows, cfg.format)?, pass)
        }
    };
    emit(
        &text,
        destination(cfg.output.as_ref(), &report_name(cfg)).as_ref(),
    )?;
    Ok(Outcome::from_pass(pass))
}

fn sweep_point(base: u64, model: Model, p: Point, icfg: &InstanceConfig, trials: u64) -> SweepRow {
    let seed = derive_seed(
        base,
        &[model_id(model), p.k as u64, p.inner as u64, p.alpha as u64],
    );
    let formula = load_formula(model, p.k, p.inner, p.alpha);
    let mut failures = 0;
    let mut first_error = None;
    let mut first: Option<(u64, LoadReport)> = None;
    for t in 0..trials {
        let trial = run_trial(icfg, derive_seed(seed, &[t]));
        match (trial.total_bits, trial.report) {
            (Some(bits), Some(report)) => match first {
                None => first = Some((bits, report)),
                Some(f) if f != (bits, report) => {
                    failures += 1;
                    first_error.get_or_insert_with(|| format!("trial {t}: loads differ"));
                }
                Some(_) => {}
            },
            _ => {
                failures += 1;
                first_error.get_or_insert_with(|| {
                    format!("trial {t}: {}", trial.error.unwrap_or_default())
                });
            }
        }
    }
    SweepRow {
        model: model.to_string(),
        k: p.k,
        inner: p.inner,
        alpha: p.alpha,
        q: icfg.num_functions(),
        eta: icfg.eta,
        beta: icfg.beta,
        seed,
        trials,
        s: label_count(model, p),
        total_bits: first.map(|f| f.0),
        l_measured: first.map(|f| fraction(f.1.l_measured)),
        l_measured_decimal: first.map(|f| decimal(f.1.l_measured)),
        l_formula: fraction(formula),
        l_formula_decimal: decimal(formula),
        r: first.map(|f| fraction(f.1.r_measured)),
        decode_failures: failures,
        status: first_error.unwrap_or_else(|| "ok".into()),
    }
}

fn tuple_string(t: (usize, usize, usize, u32)) -> String {
    format!("({},{},{},{})", t.0, t.1, t.2, t.3)
}

fn construct_point(model: Model, p: Point) -> Result<ConstructRow> {
    let k = (p.k > 0).then_some(p.k);
    let pda = build_pda(model, p.inner, p.alpha, k)?;
    // Expected tuple, regularity and cyclic shift (None = not checked).
    let (tuple, g, l) = match (model, k) {
        (Model::Connect, None) => (
            (
                binomial(p.inner, p.alpha),
                p.inner,
                p.alpha,
                binomial(p.inner, p.alpha + 1) as u32,
            ),
            Some(p.alpha + 1),
            None,
        ),
        (Model::Cyclic, None) => (
            (
                p.inner,
                p.inner,
                p.alpha,
                (p.inner * (p.inner - p.alpha) / 2) as u32,
            ),
            Some(2),
            Some(1),
        ),
        (Model::Connect, Some(k)) => (construction1_params(p.inner, p.alpha, k), None, None),
        (Model::Cyclic, Some(k)) => (construction2_params(p.inner, p.alpha, k), None, None),
    };
    let mut expected = tuple_string(tuple);
    if let Some(g) = g {
        expected.push_str(&format!(", g={g}"));
    }
    if let Some(l) = l {
        expected.push_str(&format!(", l={l}"));
    }
    let (params, status) = match analyze(&pda) {
        Ok(params) => {
            let ok = params.tuple() == tuple
                && g.is_none_or(|g| params.g == Some(g))
                && l.is_none_or(|l| params.l == Some(l));
            let status = if ok { "ok" } else { "mismatch" };
            (params.to_string(), status.to_string())
        }
        Err(e) => (String::new(), format!("violation: {e}")),
    };
    Ok(ConstructRow {
        model: model.to_string(),
        k,
        inner: p.inner,
        alpha: p.alpha,
        params,
        expected,
        status,
    })
}
