//! Monte-Carlo ensembles: `n_img` datasets per true model, each discriminated,
//! tallied into a 2×2 contingency table.
//!
//! Trials are independent given their derived seeds, so they can run on any
//! schedule; tallies are reduced in trial order and reports are bit-identical
//! between [`Execution::Sequential`] and [`Execution::Parallel`].

use std::time::Instant;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::discriminator::{discriminate_cached, FitOptions, Label};
use crate::error::{invalid, Result};
use crate::moments::{OperatorCache, QuadratureOptions, ReflectivityProfile, TargetModel};
use crate::sampler::{mix_seed, Scene, Synthesizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Trials on the current rayon pool; sequential when the `parallel`
    /// feature is off.
    #[default]
    Parallel,
}

/// Error frequencies with binomial standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContingencyTable {
    /// Fraction of s-model datasets labelled delayed (false alarms).
    pub r_s: f64,
    /// Fraction of t-model datasets labelled instantaneous (misses).
    pub r_t: f64,
    pub n_img: usize,
    pub std_r_s: f64,
    pub std_r_t: f64,
}

impl ContingencyTable {
    pub fn from_counts(false_alarms: usize, misses: usize, n_img: usize) -> Self {
        let n = n_img as f64;
        let r_s = false_alarms as f64 / n;
        let r_t = misses as f64 / n;
        Self {
            r_s,
            r_t,
            n_img,
            std_r_s: binomial_std(r_s, n_img),
            std_r_t: binomial_std(r_t, n_img),
        }
    }

    /// Percentage of misclassified images, `round(100·(r_s + r_t)/2)`.
    pub fn metric(&self) -> i64 {
        (100.0 * (self.r_s + self.r_t) / 2.0).round() as i64
    }

    /// Standard deviation of the unrounded metric, in percentage points.
    pub fn metric_std(&self) -> f64 {
        100.0 * (self.std_r_s.powi(2) + self.std_r_t.powi(2)).sqrt() / 2.0
    }

    /// Two-by-two table in the layout true model × assigned label.
    pub fn render(&self) -> String {
        let pct = |r: f64| format!("{:6.2}%", 100.0 * r);
        format!(
            "                 labelled s   labelled t\n\
             true s-model     {}      {}\n\
             true t-model     {}      {}\n",
            pct(1.0 - self.r_s),
            pct(self.r_s),
            pct(self.r_t),
            pct(1.0 - self.r_t),
        )
    }
}

/// `sqrt(r·(1 − r)/n)`.
pub fn binomial_std(r: f64, n: usize) -> f64 {
    (r * (1.0 - r) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Fits whose two best starts disagreed; still classified.
    pub non_converged_fits: usize,
    /// Trials whose fit raised a numerical error; labelled instantaneous.
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scene: Scene,
    pub table: ContingencyTable,
    pub metric: i64,
    pub metric_std: f64,
    pub master_seed: u64,
    pub diagnostics: Diagnostics,
    /// Excluded from serialized reports so that they are reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub profile: ReflectivityProfile,
    pub quadrature: QuadratureOptions,
    pub fit: FitOptions,
    pub execution: Execution,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            profile: ReflectivityProfile::UnitStep,
            quadrature: QuadratureOptions::default(),
            fit: FitOptions::default(),
            execution: Execution::default(),
        }
    }
}

/// Seed of the dataset drawn for `trial` under `model`.
pub fn dataset_seed(master_seed: u64, trial: usize, model: TargetModel) -> u64 {
    let lane = match model {
        TargetModel::Instantaneous => 0,
        TargetModel::Delayed => 1,
    };
    mix_seed(mix_seed(master_seed, trial as u64), lane)
}

#[derive(Default)]
struct Tally {
    false_alarms: usize,
    misses: usize,
    diagnostics: Diagnostics,
}

pub fn run_ensemble(scene: &Scene, n_img: usize, master_seed: u64) -> Result<RunReport> {
    run_ensemble_with(scene, n_img, master_seed, &EnsembleOptions::default())
}

pub fn run_ensemble_with(
    scene: &Scene,
    n_img: usize,
    master_seed: u64,
    opts: &EnsembleOptions,
) -> Result<RunReport> {
    if n_img == 0 {
        return Err(invalid("n_img must be at least 1"));
    }
    scene.validate()?;
    let started = Instant::now();
    let cache = OperatorCache::build(&scene.zetas(), scene.kappa, &opts.profile, &opts.quadrature)?;
    let synth_s = Synthesizer::new(scene, TargetModel::Instantaneous, &cache)?;
    let synth_t = Synthesizer::new(scene, TargetModel::Delayed, &cache)?;

    let trial = |i: usize| -> Tally {
        let mut tally = Tally::default();
        for (model, synth) in [(TargetModel::Instantaneous, &synth_s), (TargetModel::Delayed, &synth_t)] {
            let data = synth.generate(dataset_seed(master_seed, i, model));
            let label = match discriminate_cached(&data, &cache, &opts.fit) {
                Ok(d) => {
                    tally.diagnostics.non_converged_fits +=
                        usize::from(!d.fit_s.converged) + usize::from(!d.fit_t.converged);
                    d.label
                }
                Err(e) => {
                    warn!("trial {i} ({model}) failed: {e}");
                    tally.diagnostics.failed_trials += 1;
                    Label::Instantaneous
                }
            };
            match (model, label) {
                (TargetModel::Instantaneous, Label::Delayed) => tally.false_alarms += 1,
                (TargetModel::Delayed, Label::Instantaneous) => tally.misses += 1,
                _ => {}
            }
        }
        tally
    };

    let per_trial: Vec<Tally> = match opts.execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n_img).into_par_iter().map(trial).collect()
        }
        _ => (0..n_img).map(trial).collect(),
    };
    let total = per_trial.into_iter().fold(Tally::default(), |mut acc, t| {
        acc.false_alarms += t.false_alarms;
        acc.misses += t.misses;
        acc.diagnostics.non_converged_fits += t.diagnostics.non_converged_fits;
        acc.diagnostics.failed_trials += t.diagnostics.failed_trials;
        acc
    });
    let table = ContingencyTable::from_counts(total.false_alarms, total.misses, n_img);
    let wall_time = started.elapsed().as_secs_f64();
    debug!("ensemble κ = {} ζ_max = {} done in {wall_time:.2}s", scene.kappa, scene.zeta_max);
    Ok(RunReport {
        scene: *scene,
        table,
        metric: table.metric(),
        metric_std: table.metric_std(),
        master_seed,
        diagnostics: total.diagnostics,
        wall_time,
    })
}

/// Scene parameter varied by a [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    ZetaMax,
    ZetaMin,
    QSt,
    /// `q_st` with the noise fraction held at 0.1, i.e. `p_n = 0.1/(0.9 − q_st)`.
    QStFixedNoise,
    NHom,
}

impl SweepParameter {
    pub fn apply(self, base: &Scene, value: f64) -> Result<Scene> {
        let mut s = *base;
        match self {
            SweepParameter::ZetaMax => s.zeta_max = value,
            SweepParameter::ZetaMin => s.zeta_min = value,
            SweepParameter::QSt => s.q_st = value,
            SweepParameter::QStFixedNoise => {
                if value >= 0.9 {
                    return Err(invalid(format!("q_st = {value} leaves no room for 10% noise")));
                }
                s.q_st = value;
                s.p_n = 0.1 / (0.9 - value);
            }
            SweepParameter::NHom => {
                if value < 0.0 || value.fract() != 0.0 {
                    return Err(invalid(format!("n_hom must be a nonnegative integer, got {value}")));
                }
                s.n_hom = value as usize;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: RunReport,
}

/// Seed of the `index`-th run of a sweep.
pub fn sweep_seed(master_seed: u64, index: usize) -> u64 {
    mix_seed(master_seed ^ 0x5EED_5EED_5EED_5EED, index as u64)
}

pub fn sweep(
    parameter: SweepParameter,
    values: &[f64],
    base: &Scene,
    n_img: usize,
    master_seed: u64,
    opts: &EnsembleOptions,
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(invalid("sweep needs at least one value"));
    }
    let scenes = values
        .iter()
        .map(|&v| parameter.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    scenes
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (scene, &value))| {
            let report = run_ensemble_with(scene, n_img, sweep_seed(master_seed, i), opts)?;
            Ok(SweepPoint { value, report })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_arithmetic() {
        let t = ContingencyTable::from_counts(40, 100, 400);
        assert_eq!(t.r_s, 0.1);
        assert_eq!(t.r_t, 0.25);
        assert_eq!(t.std_r_s, (0.1f64 * 0.9 / 400.0).sqrt());
        assert_eq!(t.metric(), 18);
        let worst = ContingencyTable::from_counts(200, 200, 400);
        assert!((worst.metric_std() - 100.0 / (2.0 * 20.0) / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn render_has_two_rows() {
        let t = ContingencyTable::from_counts(1, 2, 10);
        assert_eq!(t.render().lines().count(), 3);
    }

    #[test]
    fn seeds_differ_by_model_and_trial() {
        let a = dataset_seed(7, 0, TargetModel::Instantaneous);
        let b = dataset_seed(7, 0, TargetModel::Delayed);
        let c = dataset_seed(7, 1, TargetModel::Instantaneous);
        assert!(a != b && a != c && b != c);
    }

    #[test]
    fn sweep_parameter_rules() {
        let base = Scene::default();
        let c = SweepParameter::QStFixedNoise.apply(&base, 0.3).unwrap();
        assert!((c.p_n - 0.1 / 0.6).abs() < 1e-15);
        assert!(SweepParameter::NHom.apply(&base, 1.5).is_err());
        assert_eq!(SweepParameter::NHom.apply(&base, 0.0).unwrap().n_hom, 0);
        assert!(run_ensemble(&base, 0, 1).is_err());
    }
}
