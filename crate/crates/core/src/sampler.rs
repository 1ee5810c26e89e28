//! Synthetic datasets of ambiguity-pair samples.
//!
//! A dataset holds one real 4-vector `(Re S, Im S, Re T, Im T)` per pair:
//! first the streak pairs at `ζ = π·m` for every integer `m` with
//! `ζ_min ≤ π·m ≤ ζ_max`, then `n_hom` homogeneous pairs at `ζ_max`. Each
//! scatterer component of each pair is an independent circular-Gaussian draw,
//! taken from its own ChaCha stream so that datasets do not depend on how work
//! is scheduled.

use std::f64::consts::PI;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::moments::{
    cov4, Cov4, Intensities, OperatorCache, PairKind, QuadratureOptions, ReflectivityProfile,
    TargetModel,
};

/// Eigenvalues down to this (negative) value are treated as rounding and
/// clipped to zero.
pub const EIGEN_CLIP: f64 = -1e-10;

// Slack on the ζ/π rounding so that e.g. ζ_min = 3π counts m = 3.
const INDEX_SLACK: f64 = 1e-9;

/// Scatterer mix and sampling window, without the generating model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub n_hom: usize,
    /// Noise contrast.
    pub p_n: f64,
    /// Target contrast.
    pub q_st: f64,
    pub kappa: f64,
}

impl Default for Scene {
    fn default() -> Self {
        Self {
            zeta_min: 3.0 * PI,
            zeta_max: 12.0 * PI,
            n_hom: 15,
            p_n: 0.25,
            q_st: 0.4,
            kappa: 1.0,
        }
    }
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zeta_min", self.zeta_min),
            ("zeta_max", self.zeta_max),
            ("p_n", self.p_n),
            ("q_st", self.q_st),
            ("kappa", self.kappa),
        ] {
            ensure_finite(name, v)?;
        }
        if self.zeta_min < 0.0 || self.zeta_min > self.zeta_max {
            return Err(invalid(format!(
                "need 0 ≤ zeta_min ≤ zeta_max, got {} and {}",
                self.zeta_min, self.zeta_max
            )));
        }
        if self.kappa < 0.0 {
            return Err(invalid(format!("kappa must be nonnegative, got {}", self.kappa)));
        }
        intensities_from_contrasts(self.p_n, self.q_st)?;
        if self.n_streak() == 0 {
            return Err(invalid(format!(
                "no multiple of π lies in [{}, {}]",
                self.zeta_min, self.zeta_max
            )));
        }
        Ok(())
    }

    fn index_range(&self) -> (i64, i64) {
        let lo = ((self.zeta_min / PI) - INDEX_SLACK).ceil().max(1.0) as i64;
        let hi = ((self.zeta_max / PI) + INDEX_SLACK).floor() as i64;
        (lo, hi)
    }

    /// Number of streak pairs, `#{m ≥ 1 : ζ_min ≤ π·m ≤ ζ_max}`.
    pub fn n_streak(&self) -> usize {
        let (lo, hi) = self.index_range();
        (hi - lo + 1).max(0) as usize
    }

    pub fn streak_zetas(&self) -> Vec<f64> {
        let (lo, hi) = self.index_range();
        (lo..=hi).map(|m| PI * m as f64).collect()
    }

    /// `ζ_j` for every pair, streak pairs first.
    pub fn zetas(&self) -> Vec<f64> {
        let mut z = self.streak_zetas();
        z.extend(std::iter::repeat_n(self.zeta_max, self.n_hom));
        z
    }

    pub fn intensities(&self) -> Result<Intensities> {
        intensities_from_contrasts(self.p_n, self.q_st)
    }
}

/// A scene together with the model that generates its streak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    #[serde(flatten)]
    pub scene: Scene,
    pub true_model: TargetModel,
}

/// Normalized intensities from the noise contrast `p_n = P_n/P_b` and the
/// target contrast `q_st = P_x/(P_x + P_b + P_n)`, with `P_b = 1`.
pub fn intensities_from_contrasts(p_n: f64, q_st: f64) -> Result<Intensities> {
    ensure_finite("p_n", p_n)?;
    ensure_finite("q_st", q_st)?;
    if p_n < 0.0 {
        return Err(invalid(format!("p_n must be nonnegative, got {p_n}")));
    }
    if !(0.0..1.0).contains(&q_st) {
        return Err(invalid(format!("q_st must lie in [0, 1), got {q_st}")));
    }
    Intensities::new(1.0, p_n, q_st * (1.0 + p_n) / (1.0 - q_st))
}

/// Ordered ambiguity-pair samples, streak pairs first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub pairs: Vec<[f64; 4]>,
    pub zetas: Vec<f64>,
    pub meta: Scene,
}

impl Dataset {
    pub fn n_streak(&self) -> usize {
        self.meta.n_streak()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair_kind(&self, j: usize) -> PairKind {
        if j < self.n_streak() {
            PairKind::Streak
        } else {
            PairKind::Homogeneous
        }
    }

    /// Checks shape consistency against the scene snapshot.
    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        let expected = self.meta.zetas();
        if self.pairs.len() != expected.len() || self.zetas.len() != expected.len() {
            return Err(invalid(format!(
                "dataset has {} pairs and {} zetas, scene implies {}",
                self.pairs.len(),
                self.zetas.len(),
                expected.len()
            )));
        }
        if self.pairs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("dataset contains non-finite samples"));
        }
        Ok(())
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for q in &mut out.pairs {
            for v in q.iter_mut() {
                *v *= c;
            }
        }
        out
    }
}

/// `L` with `L·Lᵀ = cov`, from the symmetric eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovFactor(Matrix4<f64>);

impl CovFactor {
    pub fn new(cov: &Cov4) -> Result<Self> {
        let eig = SymmetricEigen::new(*cov.matrix());
        let mut scale = Vector4::zeros();
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < EIGEN_CLIP {
                return Err(invalid(format!(
                    "covariance has eigenvalue {lambda:.3e} below {EIGEN_CLIP:.0e}"
                )));
            }
            scale[i] = lambda.max(0.0).sqrt();
        }
        Ok(Self(eig.eigenvectors * Matrix4::from_diagonal(&scale)))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 4] {
        let z = Vector4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let q = self.0 * z;
        [q[0], q[1], q[2], q[3]]
    }
}

/// One zero-mean Gaussian 4-vector with covariance `cov`.
pub fn sample_pair<R: Rng + ?Sized>(cov: &Cov4, rng: &mut R) -> Result<[f64; 4]> {
    Ok(CovFactor::new(cov)?.draw(rng))
}

/// SplitMix64 finalizer applied to `a ⊕ golden·(b + 1)`; used to derive
/// independent seeds from a master seed and counters.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Covariance factors of every (pair, component) for one scene and model,
/// ready to draw any number of datasets.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    scene: Scene,
    zetas: Vec<f64>,
    factors: Vec<[Option<CovFactor>; 3]>,
}

impl Synthesizer {
    pub fn new(scene: &Scene, model: TargetModel, cache: &OperatorCache) -> Result<Self> {
        scene.validate()?;
        let p = scene.intensities()?.as_array();
        let zetas = scene.zetas();
        let n_streak = scene.n_streak();
        let mut factors = Vec::with_capacity(zetas.len());
        for (j, &zeta) in zetas.iter().enumerate() {
            let kind = if j < n_streak { PairKind::Streak } else { PairKind::Homogeneous };
            let basis = cache.basis(model, kind, zeta)?;
            let mut row = [None; 3];
            for (alpha, slot) in row.iter_mut().enumerate() {
                if p[alpha] == 0.0 {
                    continue;
                }
                let mut weights = [0.0; 3];
                weights[alpha] = p[alpha];
                let triple = basis.triple(&Intensities::from_array(weights));
                *slot = Some(CovFactor::new(&cov4(&triple)?)?);
            }
            factors.push(row);
        }
        Ok(Self { scene: *scene, zetas, factors })
    }

    pub fn generate(&self, seed: u64) -> Dataset {
        let pairs = self
            .factors
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let mut q = [0.0; 4];
                for (alpha, factor) in row.iter().enumerate() {
                    let Some(factor) = factor else { continue };
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((4 * j + alpha) as u64);
                    for (acc, v) in q.iter_mut().zip(factor.draw(&mut rng)) {
                        *acc += v;
                    }
                }
                q
            })
            .collect();
        Dataset { pairs, zetas: self.zetas.clone(), meta: self.scene }
    }
}

/// Draws one dataset for `spec` with the unit-step profile.
pub fn synthesize_dataset(spec: &SceneSpec, seed: u64) -> Result<Dataset> {
    synthesize_dataset_with(
        spec,
        seed,
        &ReflectivityProfile::UnitStep,
        &QuadratureOptions::default(),
    )
}

pub fn synthesize_dataset_with(
    spec: &SceneSpec,
    seed: u64,
    profile: &ReflectivityProfile,
    opts: &QuadratureOptions,
) -> Result<Dataset> {
    spec.scene.validate()?;
    let cache = OperatorCache::build(&spec.scene.zetas(), spec.scene.kappa, profile, opts)?;
    Ok(Synthesizer::new(&spec.scene, spec.true_model, &cache)?.generate(seed))
}
