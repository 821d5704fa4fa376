//! Experiment runner: dispatches a config to the library, aggregates trials in
//! trial order and writes CSV and JSON results.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::coupling::{
    build_optimal_coupling, dout_gnp_embed, matchings_via_2out, rejection_embed, sandwich_run_with,
    strassen_deficiency, Relation, RejectionSampler, SandwichOptions, AcceptScale,
};
use crate::enumeration::{exact_model_distribution, ExactModel};
use crate::error::{Error, Result};
use crate::graph::{write_multigraph, write_pairing};
use crate::models::{sample_pairing, ModelSpec, PairingCondition, DEFAULT_REJECTION_CAP};
use crate::rng::{run_trials, RngStream};
use crate::stats::{evaluate, predicted_moments, tv_exact, Statistic};

pub use config::{ExperimentConfig, ExperimentKind, SEED_ENV};

/// Version tag written into every result file.
pub const FORMAT_TAG: &str = "sandwich-results/1";

/// Above this order per-trial reports omit the graphs.
pub const INLINE_GRAPH_CAP: usize = 64;

/// One aggregate line of output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub name: String,
    pub n: usize,
    pub d: Option<usize>,
    pub p: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    pub se: f64,
    pub predicted: Option<f64>,
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultSet {
    pub format: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub gates: Vec<GateOutcome>,
    pub reports: Vec<Value>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

impl ResultSet {
    pub fn gates_passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn row(&self, name: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,n,d,p,trials,seed,mean,se,predicted,z\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.name,
                r.n,
                r.d.map(|d| d.to_string()).unwrap_or_default(),
                opt(r.p),
                r.trials,
                r.seed,
                r.mean,
                r.se,
                opt(r.predicted),
                opt(r.z)
            );
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    n: usize,
    trials: u64,
    seed: u64,
    rows: Vec<ResultRow>,
    gates: Vec<GateOutcome>,
    reports: Vec<Value>,
    /// Object files to write: relative name and contents.
    objects: Vec<(String, String)>,
}

impl Ctx<'_> {
    fn row(&mut self, name: &str, values: &[f64], predicted: Option<f64>) {
        let (mean, se) = mean_se(values);
        let z = predicted.and_then(|p| if se > 0.0 { Some((mean - p) / se) } else { None });
        self.rows.push(ResultRow {
            name: name.to_string(),
            n: self.n,
            d: self.cfg.d,
            p: self.cfg.p,
            trials: values.len() as u64,
            seed: self.seed,
            mean,
            se,
            predicted,
            z,
        });
    }

    fn value(&mut self, name: &str, v: f64, predicted: Option<f64>) {
        self.row(name, &[v], predicted);
        self.rows.last_mut().expect("row just pushed").trials = self.trials;
    }

    fn gate(&mut self, name: &str, passed: bool, detail: String) {
        self.gates.push(GateOutcome { name: name.to_string(), passed, detail });
    }

    /// `|z| <= gate-se` for every row with a prediction, when a gate is set.
    fn z_gates(&mut self) {
        if let Some(k) = self.cfg.gate_se {
            let checks: Vec<(String, f64, f64, f64)> = self
                .rows
                .iter()
                .filter_map(|r| r.predicted.map(|p| (r.name.clone(), r.mean, r.se, p)))
                .collect();
            for (name, mean, se, p) in checks {
                let ok = (mean - p).abs() <= k * se;
                self.gate(&name, ok, format!("mean {mean} vs predicted {p}, se {se}, allowed {k} se"));
            }
        }
    }
}

pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let t = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / t;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// Runs a validated (or validatable) config and writes its outputs when `out`
/// is set.
pub fn run_experiment(cfg: ExperimentConfig) -> Result<ResultSet> {
    let cfg = cfg.validate()?;
    let mut ctx = Ctx {
        cfg: &cfg,
        n: cfg.n.expect("validated"),
        trials: cfg.trials(),
        seed: cfg.seed(),
        rows: Vec::new(),
        gates: Vec::new(),
        reports: Vec::new(),
        objects: Vec::new(),
    };
    match cfg.kind() {
        ExperimentKind::Sample => run_sample(&mut ctx)?,
        ExperimentKind::Enumerate => run_enumerate(&mut ctx)?,
        ExperimentKind::Couple => run_couple(&mut ctx)?,
        ExperimentKind::Moments => run_moments(&mut ctx)?,
        ExperimentKind::Sandwich => run_sandwich(&mut ctx)?,
        ExperimentKind::MicroStudy => run_micro(&mut ctx)?,
    }
    ctx.z_gates();
    let Ctx { rows, gates, reports, objects, .. } = ctx;
    let mut echo = cfg.clone();
    echo.out = None;
    let mut rs = ResultSet { format: FORMAT_TAG.to_string(), config: echo, rows, gates, reports, files: Vec::new() };
    if let Some(dir) = &cfg.out {
        rs.files = write_outputs(dir, &rs, &objects)?;
    }
    Ok(rs)
}

fn write_outputs(dir: &Path, rs: &ResultSet, objects: &[(String, String)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text)?;
        files.push(path);
        Ok(())
    };
    put("results.csv", &rs.to_csv())?;
    put("results.json", &rs.to_json()?)?;
    for (name, text) in objects {
        put(name, text)?;
    }
    Ok(files)
}

fn model_spec(cfg: &ExperimentConfig, default: &str) -> Result<ModelSpec> {
    let name = cfg.model.as_deref().unwrap_or(default);
    ModelSpec::from_name(name, cfg.n.expect("validated"), cfg.d, cfg.p, cfg.i)
}

fn run_sample(ctx: &mut Ctx) -> Result<()> {
    let spec = model_spec(ctx.cfg, "pairing")?;
    let cond = match spec {
        ModelSpec::Pairing { .. } => Some(PairingCondition::None),
        ModelSpec::LooplessPairing { .. } => Some(PairingCondition::Loopless),
        ModelSpec::DisjointDoubles { i, .. } => Some(PairingCondition::DisjointDoubles(i)),
        _ => None,
    };
    let stats = [Statistic::Loops, Statistic::DoubleEdges, Statistic::Triangles, Statistic::Edges, Statistic::Simple];
    let out = run_trials(ctx.seed, ctx.trials, |_, rng| {
        let (text, g) = match cond {
            Some(c) => {
                let p = sample_pairing(spec.n(), spec.d().expect("pairing models carry d"), c, DEFAULT_REJECTION_CAP, rng)?;
                (write_pairing(&p), p.project())
            }
            None => {
                let g = spec.sample(DEFAULT_REJECTION_CAP, rng)?;
                (write_multigraph(&g), g)
            }
        };
        Ok((text, evaluate(&g, &stats)?))
    })?;
    let ext = if cond.is_some() { "pairing" } else { "graph" };
    for (t, (text, _)) in out.iter().enumerate() {
        ctx.objects.push((format!("sample-{t:04}.{ext}"), text.clone()));
    }
    for (j, s) in stats.iter().enumerate() {
        let vals: Vec<f64> = out.iter().map(|o| o.1[j]).collect();
        ctx.row(s.name(), &vals, None);
    }
    Ok(())
}

fn exact_model(name: &str, i: Option<usize>) -> Result<ExactModel> {
    Ok(match name {
        "pairing" => ExactModel::Pairing,
        "loopless-pairing" => ExactModel::LooplessPairing,
        "matching-superpose" => ExactModel::MatchingSuperpose,
        "matching-union" => ExactModel::MatchingUnion,
        "grd" => ExactModel::Grd,
        "pairing-plus-matchings" => ExactModel::PairingPlusMatchings {
            j: i.ok_or_else(|| Error::Config("pairing-plus-matchings needs i (number of matchings)".into()))?,
        },
        other => return Err(Error::Unknown(format!("exact model {other}"))),
    })
}

fn run_enumerate(ctx: &mut Ctx) -> Result<()> {
    let name = ctx.cfg.model.clone().unwrap_or_else(|| "pairing".into());
    let dist = exact_model_distribution(exact_model(&name, ctx.cfg.i)?, ctx.n, ctx.cfg.d.expect("validated"))?;
    let mut text = Vec::new();
    dist.write(&mut text)?;
    ctx.objects.push(("distribution.txt".into(), String::from_utf8(text).map_err(|e| Error::Io(e.to_string()))?));
    ctx.value("support-size", dist.len() as f64, None);
    let stats = [Statistic::DoubleEdges, Statistic::Triangles, Statistic::Simple];
    let mut means = [0.0; 3];
    for (k, w) in dist.iter() {
        let g = crate::graph::Multigraph::from_canonical_key(k)?;
        let v = evaluate(&g, &stats)?;
        let p = w.to_f64().unwrap_or(0.0);
        for j in 0..3 {
            means[j] += p * v[j];
        }
    }
    for (j, s) in stats.iter().enumerate() {
        ctx.value(&format!("exact-mean-{}", s.name()), means[j], None);
    }
    Ok(())
}

fn density(ctx: &Ctx) -> Result<f64> {
    match (ctx.cfg.p, ctx.cfg.x) {
        (Some(p), _) => Ok(p),
        (None, Some(x)) => Ok(x * (ctx.n as f64).ln() / ctx.n as f64),
        _ => Err(Error::Config("need p or x".into())),
    }
}

fn trial_report(rep: &crate::coupling::EmbeddingReport, n: usize) -> Result<Value> {
    if n <= INLINE_GRAPH_CAP {
        return rep.to_json();
    }
    Ok(json!({
        "procedure": rep.procedure,
        "contained": rep.contained,
        "decoupled": rep.decoupled,
        "flags": rep.flags,
        "diagnostics": rep.diagnostics,
    }))
}

fn run_couple(ctx: &mut Ctx) -> Result<()> {
    let proc_name = ctx.cfg.model.clone().unwrap_or_else(|| "rejection".into());
    let n = ctx.n;
    match proc_name.as_str() {
        "rejection" => {
            let d = ctx.cfg.d.expect("validated");
            let tau = ctx.cfg.tau.unwrap_or(10 * d);
            let fb = ctx.cfg.fn_bound.unwrap_or(5.0);
            let reps = run_trials(ctx.seed, ctx.trials, |_, rng| rejection_embed(n, d, tau, fb, rng))?;
            let sampler = RejectionSampler::loopless_pairing(n, d, fb, AcceptScale::Bound)?;
            let empty: Vec<f64> = reps.iter().map(|r| r.inner.is_none() as u8 as f64).collect();
            let predicted = (1.0 - sampler.step_acceptance()).powi((tau / d) as i32);
            ctx.row("empty", &empty, Some(predicted));
            let non_empty: Vec<f64> = reps.iter().filter(|r| r.inner.is_some()).map(|r| r.contained as u8 as f64).collect();
            let all = non_empty.iter().all(|&c| c == 1.0);
            if !non_empty.is_empty() {
                ctx.row("contained-given-nonempty", &non_empty, Some(1.0));
            }
            ctx.gate("containment", all, format!("{} non-empty runs", non_empty.len()));
            let (m, se) = mean_se(&empty);
            let bound = 1.0 / fb + 3.0 * se;
            ctx.gate("empty-frequency", m <= bound, format!("{m} <= 1/fn + 3 se = {bound}"));
            for r in &reps {
                ctx.reports.push(trial_report(r, n)?);
            }
        }
        "dout-gnp" => {
            let d = ctx.cfg.d.expect("validated");
            let p = density(ctx)?;
            let reps = run_trials(ctx.seed, ctx.trials, |_, rng| dout_gnp_embed(n, p, d, rng))?;
            let c: Vec<f64> = reps.iter().map(|r| r.contained as u8 as f64).collect();
            ctx.row("containment", &c, None);
            let e: Vec<f64> = reps.iter().map(|r| r.outer.has_edge(1, 2) as u8 as f64).collect();
            ctx.row("edge-1-2", &e, Some(p));
            let fb: Vec<f64> =
                reps.iter().map(|r| r.diagnostics.get("fallback_vertices").and_then(|v| v.as_f64()).unwrap_or(0.0)).collect();
            ctx.row("fallback-vertices", &fb, None);
            let exact_degrees =
                reps.iter().all(|r| r.inner_digraph.as_ref().is_some_and(|g| (1..=n as u32).all(|v| g.out_degree(v) == d)));
            ctx.gate("inner-out-degrees", exact_degrees, format!("every vertex has out-degree {d}"));
            for r in &reps {
                ctx.reports.push(trial_report(r, n)?);
            }
        }
        "matchings" => {
            let ms = matchings_via_2out(n, ctx.trials as usize, &mut RngStream::new(ctx.seed, 0))?;
            let found: Vec<f64> = ms.iter().map(|m| m.is_some() as u8 as f64).collect();
            ctx.row("has-perfect-matching", &found, None);
        }
        other => return Err(Error::Unknown(format!("coupling procedure {other}"))),
    }
    Ok(())
}

fn run_moments(ctx: &mut Ctx) -> Result<()> {
    let spec = model_spec(ctx.cfg, "loopless-pairing")?;
    let names = ctx.cfg.statistics.clone().unwrap_or_else(|| "double-edges,triangles".into());
    let stats: Vec<Statistic> = names.split(',').map(|s| s.trim().parse()).collect::<Result<_>>()?;
    let values = run_trials(ctx.seed, ctx.trials, |_, rng| evaluate(&spec.sample(DEFAULT_REJECTION_CAP, rng)?, &stats))?;
    let pred = match (spec, spec.d()) {
        (ModelSpec::LooplessPairing { .. } | ModelSpec::Pairing { .. }, Some(d)) if d >= 3 => Some(predicted_moments(spec.n(), d)?),
        _ => None,
    };
    for (j, s) in stats.iter().enumerate() {
        let vals: Vec<f64> = values.iter().map(|v| v[j]).collect();
        let predicted = match (s, &pred) {
            (Statistic::DoubleEdges, Some(p)) => Some(p.ex),
            (Statistic::Triangles, Some(p)) => Some(p.ew),
            (Statistic::Edges, _) => match spec {
                ModelSpec::Gnp { n, p } => Some(p * (n * (n - 1) / 2) as f64),
                _ => spec.d().map(|d| (spec.n() * d / 2) as f64),
            },
            _ => None,
        };
        ctx.row(s.name(), &vals, predicted);
    }
    if let Some(p) = pred {
        ctx.reports.push(serde_json::to_value(p).map_err(|e| Error::Io(e.to_string()))?);
    }
    Ok(())
}

fn run_sandwich(ctx: &mut Ctx) -> Result<()> {
    let n = ctx.n;
    let d = ctx.cfg.d.expect("validated");
    let x = match (ctx.cfg.x, ctx.cfg.p) {
        (Some(x), _) => x,
        (None, Some(p)) => p * n as f64 / (n as f64).ln(),
        _ => return Err(Error::Config("sandwich needs x or p".into())),
    };
    let mut opts = SandwichOptions { tau: ctx.cfg.tau, ..SandwichOptions::default() };
    if let Some(f) = ctx.cfg.fn_bound {
        opts.fn_bound = f;
    }
    let reps = run_trials(ctx.seed, ctx.trials, |_, rng| sandwich_run_with(n, d, x, &opts, rng))?;
    let c: Vec<f64> = reps.iter().map(|r| r.contained as u8 as f64).collect();
    ctx.row("containment", &c, None);
    let mut names: Vec<String> = Vec::new();
    for r in &reps {
        for s in &r.stages {
            if !names.contains(&s.name) {
                names.push(s.name.clone());
            }
        }
    }
    for name in names {
        let v: Vec<f64> = reps.iter().filter_map(|r| r.stage(&name)).map(|s| s.contained as u8 as f64).collect();
        ctx.row(&format!("stage:{name}"), &v, None);
    }
    for r in &reps {
        let mut v = json!({
            "contained": r.contained,
            "p": r.p,
            "stages": r.stages,
            "diagnostics": r.diagnostics,
        });
        if n <= INLINE_GRAPH_CAP {
            v["inner"] = Value::String(write_multigraph(&r.inner));
            v["outer"] = Value::String(write_multigraph(&r.outer));
        }
        ctx.reports.push(v);
    }
    Ok(())
}

fn run_micro(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let a = exact_model_distribution(
        exact_model(cfg.model.as_deref().unwrap_or("pairing-plus-matchings"), cfg.i)?,
        ctx.n,
        cfg.d.expect("validated"),
    )?;
    let b = exact_model_distribution(
        exact_model(cfg.model_b.as_deref().expect("validated"), cfg.i_b)?,
        ctx.n,
        cfg.d_b.or(cfg.d).expect("validated"),
    )?;
    let bad = Relation::inequality(&a, &b)?;
    let def = strassen_deficiency(&a, &b, &bad)?;
    let tv = tv_exact(&a, &b)?;
    let coupling = build_optimal_coupling(&a, &b, &bad)?;
    let (dv, tvv) = (def.value.to_f64().unwrap_or(f64::NAN), tv.to_f64().unwrap_or(f64::NAN));
    ctx.value("deficiency", dv, Some(tvv));
    ctx.value("tv", tvv, None);
    ctx.value("coupling-failure", coupling.failure_mass.to_f64().unwrap_or(f64::NAN), Some(dv));
    ctx.gate("deficiency-equals-tv", (dv - tvv).abs() <= 1e-9 && def.value == tv, format!("{dv} vs {tvv}"));
    ctx.gate("failure-equals-deficiency", coupling.failure_mass == def.value, String::new());
    let mut text = Vec::new();
    coupling.write(&mut text)?;
    ctx.objects.push(("coupling.txt".into(), String::from_utf8(text).map_err(|e| Error::Io(e.to_string()))?));
    ctx.reports.push(json!({
        "deficiency": def.value.to_string(),
        "tv": tv.to_string(),
        "witness": def.witness.iter().map(|&i| a.outcomes()[i].clone()).collect::<Vec<_>>(),
    }));
    Ok(())
}
