use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use log::info;
use sardelay::discriminator::{discriminate_cached, Decision, FitOptions};
use sardelay::experiments::{published_point, reproduce, BAND};
use sardelay::kernel::{kernel_w, DimensionlessPoint};
use sardelay::moments::{
    operators, pair_basis, OperatorCache, PairKind, ReflectivityProfile, ScattererKind,
    TargetModel,
};
use sardelay::montecarlo::{dataset_seed, run_ensemble_with, sweep, EnsembleOptions, SweepParameter};
use sardelay::sampler::{Dataset, Synthesizer};
use sardelay::specfun::phi;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, RunConfig};
use crate::{Axis, Command, DiscriminateArgs, GridArgs, KernelSliceArgs, PhiTableArgs, SimulateArgs, SweepArgs};

pub fn dispatch(cfg: &RunConfig, command: Command) -> Result<()> {
    match command {
        Command::PhiTable(args) => phi_table(cfg, &args),
        Command::KernelSlice(args) => kernel_slice(cfg, &args),
        Command::Moments(args) => moments_table(cfg, &args),
        Command::Profile(args) => profile(cfg, &args),
        Command::Simulate(args) => simulate(cfg, &args),
        Command::Discriminate(args) => discriminate(cfg, &args),
        Command::Montecarlo(args) => montecarlo(cfg, args.out.as_deref()),
        Command::Sweep(args) => run_sweep(cfg, &args),
        Command::ReproducePaper => reproduce_paper(cfg),
        Command::ShowConfig => {
            print!("{}", cfg.to_toml()?);
            Ok(())
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    info!("wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(ConfigError(format!("bad grid [{a}, {b}] with {n} steps")).into());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn ensemble_options(cfg: &RunConfig) -> EnsembleOptions {
    EnsembleOptions { quadrature: cfg.quadrature, ..EnsembleOptions::default() }
}

#[derive(Serialize)]
struct PhiRow {
    v1: f64,
    v2: f64,
    abs_phi: f64,
    re_phi: f64,
    im_phi: f64,
}

fn phi_table(cfg: &RunConfig, args: &PhiTableArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &v1 in &linspace(args.v1_min, args.v1_max, args.v1_steps)? {
        for &v2 in &linspace(args.v2_min, args.v2_max, args.v2_steps)? {
            let p = phi(v1, v2)?;
            rows.push(PhiRow { v1, v2, abs_phi: p.norm(), re_phi: p.re, im_phi: p.im });
        }
    }
    write_csv(&cfg.out_path(args.out.out.as_deref(), "phi_table.csv"), &rows)
}

#[derive(Serialize)]
struct KernelRow {
    eta: f64,
    zeta: f64,
    psi: f64,
    abs_w: f64,
    re_w: f64,
    im_w: f64,
}

fn kernel_slice(cfg: &RunConfig, args: &KernelSliceArgs) -> Result<()> {
    let radar = cfg.radar()?;
    let mut rows = Vec::new();
    for &x in &linspace(args.from, args.to, args.steps)? {
        let (eta, zeta, psi) = match args.axis {
            Axis::Eta => (x, args.zeta, args.psi),
            Axis::Zeta => (args.eta, x, args.psi),
            Axis::Psi => (args.eta, args.zeta, x),
        };
        let w = kernel_w(DimensionlessPoint::new(eta, zeta, psi), &radar)?;
        rows.push(KernelRow { eta, zeta, psi, abs_w: w.norm(), re_w: w.re, im_w: w.im });
    }
    write_csv(&cfg.out_path(args.out.out.as_deref(), "kernel_slice.csv"), &rows)
}

#[derive(Serialize)]
struct MomentsRow {
    zeta: f64,
    kind: &'static str,
    g_s: f64,
    g_t: f64,
    h_re: f64,
    h_im: f64,
}

fn zeta_grid(cfg: &RunConfig, args: &GridArgs) -> Result<Vec<f64>> {
    linspace(0.0, args.zeta_max.unwrap_or(cfg.scene.zeta_max), args.steps)
}

fn moments_table(cfg: &RunConfig, args: &GridArgs) -> Result<()> {
    let profile = ReflectivityProfile::UnitStep;
    let mut rows = Vec::new();
    for &zeta in &zeta_grid(cfg, args)? {
        for kind in ScattererKind::ALL {
            let o = operators(kind, zeta, cfg.scene.kappa, &profile, &cfg.quadrature)?;
            rows.push(MomentsRow { zeta, kind: kind.tag(), g_s: o.g_s, g_t: o.g_t, h_re: o.h.re, h_im: o.h.im });
        }
    }
    write_csv(&cfg.out_path(args.out.out.as_deref(), "moments.csv"), &rows)
}

/// Expected |S|² and |T|² on a streak pair: totals with the scene's
/// intensities, and the target term alone per unit target intensity.
#[derive(Serialize)]
struct ProfileRow {
    zeta: f64,
    s_model_s: f64,
    s_model_t: f64,
    t_model_s: f64,
    t_model_t: f64,
    s_target_s: f64,
    s_target_t: f64,
    t_target_s: f64,
    t_target_t: f64,
}

fn profile(cfg: &RunConfig, args: &GridArgs) -> Result<()> {
    let p = cfg.scene.intensities()?;
    let refl = ReflectivityProfile::UnitStep;
    let mut rows = Vec::new();
    for &zeta in &zeta_grid(cfg, args)? {
        let basis = |model| pair_basis(model, PairKind::Streak, zeta, cfg.scene.kappa, &refl, &cfg.quadrature);
        let (bs, bt) = (basis(TargetModel::Instantaneous)?, basis(TargetModel::Delayed)?);
        let (ms, mt) = (bs.triple(&p), bt.triple(&p));
        let (xs, xt) = (bs.channels[2], bt.channels[2]);
        rows.push(ProfileRow {
            zeta,
            s_model_s: ms.a,
            s_model_t: ms.b,
            t_model_s: mt.a,
            t_model_t: mt.b,
            s_target_s: xs.g_s,
            s_target_t: xs.g_t,
            t_target_s: xt.g_s,
            t_target_t: xt.g_t,
        });
    }
    write_csv(&cfg.out_path(args.out.out.as_deref(), "profile.csv"), &rows)
}

/// One line of a `simulate` output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub seed: u64,
    pub model: TargetModel,
    #[serde(flatten)]
    pub dataset: Dataset,
}

/// One line of a `discriminate` output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub seed: u64,
    pub true_model: TargetModel,
    #[serde(flatten)]
    pub decision: Decision,
}

fn simulate(cfg: &RunConfig, args: &SimulateArgs) -> Result<()> {
    let model: TargetModel = args.model.map(Into::into).unwrap_or(cfg.harness.true_model);
    let count = args.count.unwrap_or(cfg.harness.n_datasets);
    let cache = OperatorCache::build(&cfg.scene.zetas(), cfg.scene.kappa, &ReflectivityProfile::UnitStep, &cfg.quadrature)?;
    let synth = Synthesizer::new(&cfg.scene, model, &cache)?;
    let path = cfg.out_path(args.out.out.as_deref(), "datasets.jsonl");
    ensure_parent(&path)?;
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot write {}", path.display()))?);
    for i in 0..count {
        let seed = dataset_seed(cfg.harness.master_seed, i, model);
        let record = DatasetRecord { seed, model, dataset: synth.generate(seed) };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    println!("{count} {model} datasets written to {}", path.display());
    Ok(())
}

fn discriminate(cfg: &RunConfig, args: &DiscriminateArgs) -> Result<()> {
    let input = File::open(&args.input).with_context(|| format!("cannot read {}", args.input.display()))?;
    let path = cfg.out_path(args.out.out.as_deref(), "decisions.jsonl");
    ensure_parent(&path)?;
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot write {}", path.display()))?);
    let mut cache: Option<(Vec<f64>, f64, OperatorCache)> = None;
    let (mut total, mut delayed) = (0, 0);
    for (n, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(&line)
            .map_err(|e| ConfigError(format!("{} line {}: {e}", args.input.display(), n + 1)))?;
        let kappa = record.dataset.meta.kappa;
        if cache.as_ref().is_none_or(|(z, k, _)| *z != record.dataset.zetas || *k != kappa) {
            let zetas = record.dataset.zetas.clone();
            let built = OperatorCache::build(&zetas, kappa, &ReflectivityProfile::UnitStep, &cfg.quadrature)?;
            cache = Some((zetas, kappa, built));
        }
        let (_, _, ops) = cache.as_ref().expect("cache was just filled");
        let decision = discriminate_cached(&record.dataset, ops, &FitOptions::default())?;
        total += 1;
        delayed += usize::from(decision.margin > 0.0);
        let out = DecisionRecord { seed: record.seed, true_model: record.model, decision };
        serde_json::to_writer(&mut w, &out)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    println!("{total} datasets classified: {delayed} delayed, {} instantaneous", total - delayed);
    Ok(())
}

fn montecarlo(cfg: &RunConfig, out: Option<&Path>) -> Result<()> {
    let report = run_ensemble_with(&cfg.scene, cfg.harness.n_img, cfg.harness.master_seed, &ensemble_options(cfg))?;
    write_json(&cfg.out_path(out, "montecarlo.json"), &report)?;
    print!("{}", report.table.render());
    println!(
        "metric {} ± {:.2} (n_img = {}, seed = {}, {:.1}s)",
        report.metric, report.metric_std, report.table.n_img, report.master_seed, report.wall_time
    );
    let d = report.diagnostics;
    if d.non_converged_fits + d.failed_trials > 0 {
        println!("non-converged fits: {}, failed trials: {}", d.non_converged_fits, d.failed_trials);
    }
    if let Some((experiment, published)) = published_point(&cfg.scene) {
        let ok = (report.metric - published).abs() <= BAND;
        println!(
            "published run {experiment:?} value {published}: {} (band ±{BAND})",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}

/// A sweep value: a number, optionally followed by `pi` or `π`.
pub fn parse_sweep_value(raw: &str) -> Result<f64, ConfigError> {
    let s = raw.trim();
    let (num, factor) = match s.strip_suffix("pi").or_else(|| s.strip_suffix('π')) {
        Some(head) => (head.trim(), PI),
        None => (s, 1.0),
    };
    let base = if num.is_empty() && factor == PI {
        1.0
    } else {
        num.parse::<f64>().map_err(|_| ConfigError(format!("cannot parse sweep value `{raw}`")))?
    };
    Ok(base * factor)
}

#[derive(Serialize)]
struct TrendRow {
    param_value: f64,
    r_s: f64,
    r_t: f64,
    metric: i64,
    std: f64,
}

fn run_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<()> {
    let values = args.values.iter().map(|v| parse_sweep_value(v)).collect::<Result<Vec<_>, _>>()?;
    let parameter: SweepParameter = args.parameter.into();
    let points = sweep(parameter, &values, &cfg.scene, cfg.harness.n_img, cfg.harness.master_seed, &ensemble_options(cfg))?;
    write_json(&cfg.out_path(args.out.out.as_deref(), "sweep.json"), &points)?;
    let rows: Vec<TrendRow> = points
        .iter()
        .map(|p| TrendRow {
            param_value: p.value,
            r_s: p.report.table.r_s,
            r_t: p.report.table.r_t,
            metric: p.report.metric,
            std: p.report.metric_std,
        })
        .collect();
    write_csv(&cfg.out_path(args.csv.as_deref(), "sweep.csv"), &rows)?;
    println!("{:>14} {:>8} {:>8} {:>7} {:>6}", format!("{parameter:?}"), "r_s", "r_t", "metric", "std");
    for r in &rows {
        println!("{:>14.6} {:>8.4} {:>8.4} {:>7} {:>6.2}", r.param_value, r.r_s, r.r_t, r.metric, r.std);
    }
    Ok(())
}

fn reproduce_paper(cfg: &RunConfig) -> Result<()> {
    let result = reproduce(cfg.harness.n_img, cfg.harness.master_seed, &ensemble_options(cfg))?;
    let dir = cfg.output.dir.join("reproduce-paper");
    for e in &result.experiments {
        write_json(&dir.join(format!("run_{:?}_kappa_{}.json", e.experiment, e.kappa)), e)?;
    }
    write_json(&dir.join("summary.json"), &result)?;
    let text = result.summary_text();
    let summary = dir.join("summary.txt");
    fs::write(&summary, &text).with_context(|| format!("cannot write {}", summary.display()))?;
    print!("{text}");
    Ok(())
}
