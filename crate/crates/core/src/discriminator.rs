//! Maximum-likelihood choice between the instantaneous (s) and delayed (t)
//! explanations of a streak.
//!
//! Each pair `q_j` is a zero-mean Gaussian 4-vector with covariance
//! `cov4(A_j, B_j, C_j, D_j)`, the moments being linear in the intensities
//! `(P_b, P_n, P_x)`. Both models are fitted by maximizing the likelihood over
//! the nonnegative intensities, and the larger maximum wins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::moments::{
    Intensities, OperatorCache, PairBasis, QuadratureOptions, ReflectivityProfile, TargetModel,
};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::sampler::Dataset;

/// Pairs whose 2×2 complex covariance is worse conditioned than this are
/// rejected as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Intensity floor relative to the mean `|q_j|²` of the dataset.
pub const FLOOR_FRACTION: f64 = 1e-12;

/// Log-likelihood agreement of the two best starts required for `converged`.
pub const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Instantaneous,
    Delayed,
}

impl Label {
    pub fn model(self) -> TargetModel {
        match self {
            Label::Instantaneous => TargetModel::Instantaneous,
            Label::Delayed => TargetModel::Delayed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: TargetModel,
    pub intensities: Intensities,
    pub log_likelihood: f64,
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: Label,
    /// `log p̆_t − log p̆_s`; positive means delayed.
    pub margin: f64,
    pub fit_s: FitResult,
    pub fit_t: FitResult,
}

/// Optimizer settings for [`fit_model`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub nelder_mead: NelderMeadOptions,
}

struct PairTerm {
    basis: PairBasis,
    s2: f64,
    t2: f64,
    /// `conj(S)·T`
    st: Complex64,
}

/// Log-likelihood of a dataset under one model, with the pair operators
/// resolved once.
pub struct Likelihood {
    model: TargetModel,
    terms: Vec<PairTerm>,
}

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

impl Likelihood {
    pub fn new(model: TargetModel, dataset: &Dataset, cache: &OperatorCache) -> Result<Self> {
        dataset.validate()?;
        let terms = dataset
            .pairs
            .iter()
            .zip(&dataset.zetas)
            .enumerate()
            .map(|(j, (q, &zeta))| {
                let basis = cache.basis(model, dataset.pair_kind(j), zeta)?;
                let s = Complex64::new(q[0], q[1]);
                let t = Complex64::new(q[2], q[3]);
                Ok(PairTerm { basis, s2: s.norm_sqr(), t2: t.norm_sqr(), st: s.conj() * t })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { model, terms })
    }

    pub fn model(&self) -> TargetModel {
        self.model
    }

    /// `Σ_j [−2·ln 2π − ½·ln det M_j − ½·q_jᵀ M_j⁻¹ q_j]`, evaluated through the
    /// equivalent 2×2 complex form.
    pub fn eval(&self, p: &Intensities) -> Result<f64> {
        let mut total = 0.0;
        for (j, term) in self.terms.iter().enumerate() {
            let m = term.basis.triple(p);
            let h2 = m.c * m.c + m.d * m.d;
            let delta = m.a * m.b - h2;
            let half_trace = 0.5 * (m.a + m.b);
            let disc = (0.25 * (m.a - m.b).powi(2) + h2).sqrt();
            let (hi, lo) = (half_trace + disc, half_trace - disc);
            if !(delta > 0.0 && lo > 0.0 && hi / lo <= MAX_CONDITION) {
                return Err(Error::Numeric(format!(
                    "pair {j} covariance is singular (eigenvalues {lo:.3e}, {hi:.3e}); \
                     raise the intensity floor"
                )));
            }
            // Re(H·conj(S)·T) with H = C + iD
            let cross = m.c * term.st.re - m.d * term.st.im;
            let quad = (m.b * term.s2 + m.a * term.t2 - 2.0 * cross) / delta;
            total += -2.0 * LOG_2PI - (0.25 * delta).ln() - quad;
        }
        Ok(total)
    }
}

/// Log-likelihood of `dataset` under `model` at the given intensities, with the
/// unit-step profile.
pub fn log_likelihood(
    model: TargetModel,
    dataset: &Dataset,
    intensities: &Intensities,
    kappa: f64,
) -> Result<f64> {
    intensities.validate()?;
    let cache = OperatorCache::build(
        &dataset.zetas,
        kappa,
        &ReflectivityProfile::UnitStep,
        &QuadratureOptions::default(),
    )?;
    Likelihood::new(model, dataset, &cache)?.eval(intensities)
}

struct Power {
    mean: f64,
    streak: f64,
    homogeneous: Option<f64>,
}

// Mean per-sample intensity (|S|² + |T|²)/2, overall and by pair kind.
fn power_summary(dataset: &Dataset) -> Power {
    let n_streak = dataset.n_streak();
    let per_pair: Vec<f64> = dataset.pairs.iter().map(|q| 0.5 * q.iter().map(|v| v * v).sum::<f64>()).collect();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (streak, hom) = per_pair.split_at(n_streak.min(per_pair.len()));
    Power {
        mean: mean(&per_pair),
        streak: if streak.is_empty() { 0.0 } else { mean(streak) },
        homogeneous: if hom.is_empty() { None } else { Some(mean(hom)) },
    }
}

fn starts(model: TargetModel, dataset: &Dataset, cache: &OperatorCache, power: &Power) -> Result<[[f64; 3]; 4]> {
    let mu = power.mean;
    // Mean target response over the streak, for the moment-matching start.
    let n_streak = dataset.n_streak();
    let mut gain = 0.0;
    for &zeta in &dataset.zetas[..n_streak] {
        let ops = cache.operators(model.target_kind(), zeta)?;
        gain += 0.5 * (ops.g_s + ops.g_t);
    }
    gain = (gain / n_streak as f64).max(1e-3);
    let base = power.homogeneous.unwrap_or(0.5 * mu).max(1e-6 * mu);
    let target = ((power.streak - base) / gain).max(0.05 * mu);
    Ok([
        [0.8 * base, 0.2 * base, target],
        [mu / 3.0, mu / 3.0, mu / 3.0],
        [mu, 1e-3 * mu, 1e-3 * mu],
        [0.2 * mu, 0.1 * mu, 2.0 * mu],
    ])
}

/// Maximizes the likelihood of `model` over nonnegative intensities using the
/// operators in `cache`.
pub fn fit_model_cached(
    model: TargetModel,
    dataset: &Dataset,
    cache: &OperatorCache,
    opts: &FitOptions,
) -> Result<FitResult> {
    let like = Likelihood::new(model, dataset, cache)?;
    let power = power_summary(dataset);
    if power.mean.is_nan() || power.mean <= 0.0 {
        return Err(invalid("dataset is identically zero"));
    }
    let floor = FLOOR_FRACTION * 2.0 * power.mean;
    let to_p = |theta: &[f64; 3]| Intensities::from_array(theta.map(|t| floor + t.exp()));
    let objective = |theta: &[f64; 3]| -> f64 {
        if theta.iter().any(|t| !t.is_finite() || t.abs() > 700.0) {
            return f64::INFINITY;
        }
        match like.eval(&to_p(theta)) {
            Ok(v) if v.is_finite() => -v,
            _ => f64::INFINITY,
        }
    };

    let mut results = Vec::with_capacity(4);
    let mut evaluations = 0;
    for start in starts(model, dataset, cache, &power)? {
        let theta0 = start.map(|p| p.max(floor).ln());
        let m = nelder_mead(objective, theta0, &opts.nelder_mead);
        evaluations += m.evaluations;
        results.push(m);
    }
    results.sort_by(|a, b| a.value.total_cmp(&b.value));
    let best = &results[0];
    let log_likelihood = -best.value;
    let agree = (results[1].value - best.value).abs() <= AGREEMENT_TOL;
    Ok(FitResult {
        model,
        intensities: to_p(&best.x),
        log_likelihood,
        converged: agree && log_likelihood.is_finite(),
        evaluations,
    })
}

/// [`fit_model_cached`] with operators computed for `κ` and the unit-step
/// profile.
pub fn fit_model(model: TargetModel, dataset: &Dataset, kappa: f64) -> Result<FitResult> {
    let cache = OperatorCache::build(
        &dataset.zetas,
        kappa,
        &ReflectivityProfile::UnitStep,
        &QuadratureOptions::default(),
    )?;
    fit_model_cached(model, dataset, &cache, &FitOptions::default())
}

/// Fits both models and labels the dataset delayed iff the t-model maximum is
/// strictly larger.
pub fn discriminate_cached(dataset: &Dataset, cache: &OperatorCache, opts: &FitOptions) -> Result<Decision> {
    let fit_s = fit_model_cached(TargetModel::Instantaneous, dataset, cache, opts)?;
    let fit_t = fit_model_cached(TargetModel::Delayed, dataset, cache, opts)?;
    let margin = fit_t.log_likelihood - fit_s.log_likelihood;
    let label = if margin > 0.0 { Label::Delayed } else { Label::Instantaneous };
    Ok(Decision { label, margin, fit_s, fit_t })
}

pub fn discriminate(dataset: &Dataset, kappa: f64) -> Result<Decision> {
    let cache = OperatorCache::build(
        &dataset.zetas,
        kappa,
        &ReflectivityProfile::UnitStep,
        &QuadratureOptions::default(),
    )?;
    discriminate_cached(dataset, &cache, &FitOptions::default())
}
