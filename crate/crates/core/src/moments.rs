//! Second moments of ambiguity-pair image samples.
//!
//! For each scatterer kind `α` the normalized operators `G^S_α`, `G^T_α` and
//! `H_α` give `⟨|I^S|²⟩`, `⟨|I^T|²⟩` and `⟨conj(I^T)·I^S⟩` per unit of the
//! normalized intensity `P_α = σ²_α·K_α`. A pair's [`MomentTriple`] is the
//! intensity-weighted sum over the kinds present in the model, and
//! [`cov4`] turns it into the covariance of `(Re S, Im S, Re T, Im T)`.
//!
//! Only the on-axis target (`η_d = 0`) is modelled. Richer delay profiles can be
//! plugged in through [`ReflectivityProfile::Custom`]; a multi-basis expansion
//! of the profile would hang off the same hook.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::kernel::RadarConfig;
use crate::quad::{integrate, integrate_scalar};
use crate::specfun::{f_breve_t, phi_marginal_unchecked, sinc2_cumulative};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScattererKind {
    Background,
    /// Point target with delayed reflectivity (t-scatterer).
    Delayed,
    /// Range-aligned instantaneous line (s-scatterer).
    StreakInstantaneous,
    Noise,
}

impl ScattererKind {
    pub const ALL: [ScattererKind; 4] = [
        ScattererKind::Background,
        ScattererKind::Delayed,
        ScattererKind::StreakInstantaneous,
        ScattererKind::Noise,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ScattererKind::Background => "b",
            ScattererKind::Delayed => "t",
            ScattererKind::StreakInstantaneous => "s",
            ScattererKind::Noise => "n",
        }
    }
}

/// Which inhomogeneity explains the streak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TargetModel {
    /// s-model: background, noise and an instantaneous line scatterer.
    #[serde(rename = "s-model")]
    Instantaneous,
    /// t-model: background, noise and a delayed point scatterer.
    #[serde(rename = "t-model")]
    Delayed,
}

impl TargetModel {
    pub const BOTH: [TargetModel; 2] = [TargetModel::Instantaneous, TargetModel::Delayed];

    pub fn target_kind(self) -> ScattererKind {
        match self {
            TargetModel::Instantaneous => ScattererKind::StreakInstantaneous,
            TargetModel::Delayed => ScattererKind::Delayed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetModel::Instantaneous => "s-model",
            TargetModel::Delayed => "t-model",
        }
    }

    pub fn other(self) -> Self {
        match self {
            TargetModel::Instantaneous => TargetModel::Delayed,
            TargetModel::Delayed => TargetModel::Instantaneous,
        }
    }
}

impl fmt::Display for TargetModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Reflectivity of the target along delay (t-model) or range (s-model),
/// zero for negative arguments.
#[derive(Clone, Default)]
pub enum ReflectivityProfile {
    /// `F(ζ) = (1 + sign ζ)/2`.
    #[default]
    UnitStep,
    /// `F = 1` on `[0, upper]`, zero elsewhere.
    Indicator { upper: f64 },
    /// Arbitrary nonnegative profile supported on `[0, support]`.
    Custom {
        func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        support: f64,
    },
}

impl fmt::Debug for ReflectivityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnitStep => write!(f, "UnitStep"),
            Self::Indicator { upper } => write!(f, "Indicator {{ upper: {upper} }}"),
            Self::Custom { support, .. } => write!(f, "Custom {{ support: {support} }}"),
        }
    }
}

impl ReflectivityProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::UnitStep => Ok(()),
            Self::Indicator { upper } | Self::Custom { support: upper, .. } => {
                ensure_finite("profile support", *upper)?;
                if *upper <= 0.0 {
                    return Err(invalid(format!("profile support must be positive, got {upper}")));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, zeta: f64) -> f64 {
        if zeta < 0.0 {
            return 0.0;
        }
        match self {
            Self::UnitStep => 1.0,
            Self::Indicator { upper } => f64::from(zeta <= *upper),
            Self::Custom { func, support } => {
                if zeta <= *support {
                    func(zeta).max(0.0)
                } else {
                    0.0
                }
            }
        }
    }

    fn support(&self) -> f64 {
        match self {
            Self::UnitStep => f64::INFINITY,
            Self::Indicator { upper } => *upper,
            Self::Custom { support, .. } => *support,
        }
    }

    /// `F̆(ζ) = ∫ F(ξ)·sinc²(ζ − ξ) dξ`.
    pub fn convolved(&self, zeta: f64, abs_tol: f64) -> Result<f64> {
        match self {
            Self::UnitStep => Ok(f_breve_t(zeta)),
            Self::Indicator { upper } => {
                Ok(sinc2_cumulative(zeta) - sinc2_cumulative(zeta - upper))
            }
            Self::Custom { .. } => {
                let breaks = lobe_breaks(zeta, self.support());
                let mut total = 0.0;
                for w in breaks.windows(2) {
                    total += integrate_scalar(
                        |xi| self.eval(xi) * crate::specfun::sinc(zeta - xi).powi(2),
                        w[0],
                        w[1],
                        abs_tol / breaks.len() as f64,
                    )?;
                }
                Ok(total)
            }
        }
    }
}

/// Accuracy knobs of the streak-operator quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOptions {
    /// Absolute tolerance on each operator value.
    pub tolerance: f64,
    /// Distance from `ζ` beyond which `sin²` in the `sinc²` weight is replaced
    /// by its mean `1/2`.
    pub tail_start: f64,
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, tail_start: 1e3, max_panels: 200_000 }
    }
}

impl QuadratureOptions {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("quadrature tolerance", self.tolerance)?;
        ensure_finite("quadrature tail_start", self.tail_start)?;
        if self.tolerance <= 0.0 || self.tail_start < 10.0 || self.max_panels < 16 {
            return Err(invalid(
                "quadrature needs tolerance > 0, tail_start ≥ 10 and max_panels ≥ 16",
            ));
        }
        Ok(())
    }
}

/// `(G^S, G^T, H)` for one kind at one `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorValues {
    pub g_s: f64,
    pub g_t: f64,
    pub h: Complex64,
}

impl OperatorValues {
    pub const ZERO: Self = Self { g_s: 0.0, g_t: 0.0, h: Complex64::new(0.0, 0.0) };
}

fn check_args(zeta: f64, kappa: f64) -> Result<()> {
    ensure_finite("zeta", zeta)?;
    ensure_finite("kappa", kappa)?;
    if kappa < 0.0 {
        return Err(invalid(format!("kappa must be nonnegative, got {kappa}")));
    }
    Ok(())
}

/// All three operators of `kind` at `(ζ, κ)`.
pub fn operators(
    kind: ScattererKind,
    zeta: f64,
    kappa: f64,
    profile: &ReflectivityProfile,
    opts: &QuadratureOptions,
) -> Result<OperatorValues> {
    check_args(zeta, kappa)?;
    match kind {
        ScattererKind::Background => Ok(OperatorValues {
            g_s: 1.0,
            g_t: 1.0,
            h: phi_marginal_unchecked(kappa * zeta),
        }),
        ScattererKind::Noise => Ok(OperatorValues { g_s: 1.0, g_t: 1.0, h: Complex64::new(0.0, 0.0) }),
        ScattererKind::Delayed => {
            let conv = profile.convolved(zeta, opts.tolerance)? / PI;
            let p = phi_marginal_unchecked(kappa * zeta);
            Ok(OperatorValues { g_s: p.norm_sqr() * conv, g_t: conv, h: p * conv })
        }
        ScattererKind::StreakInstantaneous => {
            if kappa == 0.0 {
                let conv = profile.convolved(zeta, opts.tolerance)? / PI;
                return Ok(OperatorValues { g_s: conv, g_t: conv, h: Complex64::new(conv, 0.0) });
            }
            streak_operators(zeta, kappa, profile, opts)
        }
    }
}

pub fn g_s(kind: ScattererKind, zeta: f64, kappa: f64, profile: &ReflectivityProfile) -> Result<f64> {
    operators(kind, zeta, kappa, profile, &QuadratureOptions::default()).map(|o| o.g_s)
}

pub fn g_t(kind: ScattererKind, zeta: f64, kappa: f64, profile: &ReflectivityProfile) -> Result<f64> {
    operators(kind, zeta, kappa, profile, &QuadratureOptions::default()).map(|o| o.g_t)
}

pub fn h(kind: ScattererKind, zeta: f64, kappa: f64, profile: &ReflectivityProfile) -> Result<Complex64> {
    operators(kind, zeta, kappa, profile, &QuadratureOptions::default()).map(|o| o.h)
}

// 0, the zeros ζ + kπ (k ≠ 0) of sinc²(ζ − ξ) inside (0, upper), and upper.
fn lobe_breaks(zeta: f64, upper: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let k_lo = ((0.0 - zeta) / PI).ceil() as i64;
    let k_hi = ((upper - zeta) / PI).floor() as i64;
    for k in k_lo..=k_hi {
        let b = zeta + k as f64 * PI;
        if k != 0 && b > 0.0 && b < upper {
            breaks.push(b);
        }
    }
    breaks.push(upper);
    breaks
}

fn streak_operators(
    zeta: f64,
    kappa: f64,
    profile: &ReflectivityProfile,
    opts: &QuadratureOptions,
) -> Result<OperatorValues> {
    let support = profile.support();
    let upper = support.min((zeta + opts.tail_start).max(0.0));
    if upper <= 0.0 {
        return Ok(OperatorValues::ZERO);
    }
    let terms = |xi: f64, weight: f64| -> [f64; 4] {
        let w = weight * profile.eval(xi);
        if w == 0.0 {
            return [0.0; 4];
        }
        let a = phi_marginal_unchecked(kappa * (zeta - xi));
        let b = phi_marginal_unchecked(-kappa * xi);
        let cross = a * b.conj();
        [w * a.norm_sqr(), w * b.norm_sqr(), w * cross.re, w * cross.im]
    };
    let breaks = lobe_breaks(zeta, upper);
    let body = integrate(
        |xi| {
            let s = crate::specfun::sinc(zeta - xi);
            terms(xi, s * s)
        },
        &breaks,
        0.5 * opts.tolerance * PI,
        opts.max_panels,
    )?;
    let mut total = body.value;
    if support > upper {
        // Far tail ξ = ζ + u, u > tail_start: sin²u/u² averaged to 1/(2u²),
        // then w = 1/u maps it onto a finite interval.
        let w_lo = if support.is_finite() { 1.0 / (support - zeta) } else { 0.0 };
        let w_hi = 1.0 / opts.tail_start;
        let tail = integrate(
            |w| if w <= 0.0 { [0.0; 4] } else { terms(zeta + 1.0 / w, 0.5) },
            &[w_lo, w_hi],
            0.5 * opts.tolerance * PI,
            opts.max_panels,
        )?;
        for (t, v) in total.iter_mut().zip(tail.value) {
            *t += v;
        }
    }
    let [gs, gt, re, im] = total.map(|v| v / PI);
    if !(gs.is_finite() && gt.is_finite() && re.is_finite() && im.is_finite()) {
        return Err(Error::Numeric(format!(
            "streak operators at ζ = {zeta}, κ = {kappa} are not finite"
        )));
    }
    Ok(OperatorValues { g_s: gs, g_t: gt, h: Complex64::new(re, im) })
}

/// Physical scale `K_α` linking `σ²_α` to the normalized intensity `P_α`.
pub fn k_const(kind: ScattererKind, cfg: &RadarConfig) -> f64 {
    let nt2 = (cfg.n_pulses * cfg.tau).powi(2);
    let k = cfg.k0_theta();
    let range_scale = cfg.omega0 / (cfg.bandwidth * k);
    match kind {
        ScattererKind::Background => nt2 * range_scale / (k * cfg.phi_t) * PI * PI,
        ScattererKind::Delayed => nt2 * 2.0 / cfg.bandwidth * PI,
        ScattererKind::StreakInstantaneous => nt2 * range_scale * PI,
        ScattererKind::Noise => 1.0,
    }
}

/// Normalized intensities `P_b`, `P_n` and `P_x`, the last being the target
/// (`s` or `t` depending on the model).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensities {
    pub background: f64,
    pub noise: f64,
    pub target: f64,
}

impl Intensities {
    pub fn new(background: f64, noise: f64, target: f64) -> Result<Self> {
        let p = Self { background, noise, target };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("background intensity", self.background),
            ("noise intensity", self.noise),
            ("target intensity", self.target),
        ] {
            ensure_finite(name, v)?;
            if v < 0.0 {
                return Err(invalid(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.background, self.noise, self.target]
    }

    pub fn from_array(p: [f64; 3]) -> Self {
        Self { background: p[0], noise: p[1], target: p[2] }
    }
}

/// `A = ⟨|S|²⟩`, `B = ⟨|T|²⟩`, `C + iD = ⟨conj(T)·S⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MomentTriple {
    /// `AB − C² − D²`, nonnegative for a valid triple.
    pub fn schwarz_gap(&self) -> f64 {
        self.a * self.b - self.c * self.c - self.d * self.d
    }
}

/// Whether a pair sits on the streak or in the homogeneous surroundings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Streak,
    Homogeneous,
}

/// Operator values of the three intensity channels (background, noise,
/// target) for one pair under one model. The target channel is zero on
/// homogeneous pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairBasis {
    pub channels: [OperatorValues; 3],
}

impl PairBasis {
    pub fn triple(&self, p: &Intensities) -> MomentTriple {
        let mut m = MomentTriple { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };
        for (ch, w) in self.channels.iter().zip(p.as_array()) {
            m.a += w * ch.g_s;
            m.b += w * ch.g_t;
            m.c += w * ch.h.re;
            m.d += w * ch.h.im;
        }
        m
    }
}

const NOISE_OPS: OperatorValues =
    OperatorValues { g_s: 1.0, g_t: 1.0, h: Complex64::new(0.0, 0.0) };

fn assemble(background: OperatorValues, target: OperatorValues, pair: PairKind) -> PairBasis {
    let target = match pair {
        PairKind::Streak => target,
        PairKind::Homogeneous => OperatorValues::ZERO,
    };
    PairBasis { channels: [background, NOISE_OPS, target] }
}

/// Operator basis of one pair at `ζ`, evaluated directly.
pub fn pair_basis(
    model: TargetModel,
    pair: PairKind,
    zeta: f64,
    kappa: f64,
    profile: &ReflectivityProfile,
    opts: &QuadratureOptions,
) -> Result<PairBasis> {
    let bg = operators(ScattererKind::Background, zeta, kappa, profile, opts)?;
    let target = match pair {
        PairKind::Streak => operators(model.target_kind(), zeta, kappa, profile, opts)?,
        PairKind::Homogeneous => OperatorValues::ZERO,
    };
    Ok(assemble(bg, target, pair))
}

/// Moment triple of one pair: background and noise always, plus the model's
/// target term on streak pairs.
pub fn pair_moments(
    model: TargetModel,
    pair: PairKind,
    zeta: f64,
    kappa: f64,
    intensities: &Intensities,
    profile: &ReflectivityProfile,
) -> Result<MomentTriple> {
    intensities.validate()?;
    let basis = pair_basis(model, pair, zeta, kappa, profile, &QuadratureOptions::default())?;
    Ok(basis.triple(intensities))
}

/// Covariance of `(Re S, Im S, Re T, Im T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cov4(pub Matrix4<f64>);

impl Cov4 {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = SymmetricEigen::new(self.0).eigenvalues;
        [e[0], e[1], e[2], e[3]]
    }
}

const SCHWARZ_TOL: f64 = 1e-9;

pub fn cov4(m: &MomentTriple) -> Result<Cov4> {
    for (name, v) in [("A", m.a), ("B", m.b), ("C", m.c), ("D", m.d)] {
        ensure_finite(name, v)?;
    }
    let scale = 1f64.max(m.a * m.b);
    if m.a < -SCHWARZ_TOL || m.b < -SCHWARZ_TOL || m.schwarz_gap() < -SCHWARZ_TOL * scale {
        return Err(invalid(format!(
            "moment triple violates A, B ≥ 0, AB ≥ C² + D²: {m:?}"
        )));
    }
    let (a, b, c, d) = (0.5 * m.a, 0.5 * m.b, 0.5 * m.c, 0.5 * m.d);
    #[rustfmt::skip]
    let mat = Matrix4::new(
        a,   0.0, c,   -d,
        0.0, a,   d,   c,
        c,   d,   b,   0.0,
        -d,  c,   0.0, b,
    );
    Ok(Cov4(mat))
}

/// Operator values on a fixed set of `ζ` for one `(κ, profile)`, computed once
/// and then shared read-only.
#[derive(Debug, Clone)]
pub struct OperatorCache {
    kappa: f64,
    entries: HashMap<u64, [OperatorValues; 3]>,
}

impl OperatorCache {
    /// Evaluates background, delayed and instantaneous-streak operators at
    /// every `ζ` in `zetas`.
    pub fn build(
        zetas: &[f64],
        kappa: f64,
        profile: &ReflectivityProfile,
        opts: &QuadratureOptions,
    ) -> Result<Self> {
        profile.validate()?;
        opts.validate()?;
        let mut unique: Vec<f64> = zetas.to_vec();
        unique.sort_by(f64::total_cmp);
        unique.dedup();
        let eval = |zeta: f64| -> Result<(u64, [OperatorValues; 3])> {
            let mut row = [OperatorValues::ZERO; 3];
            for (slot, kind) in row.iter_mut().zip([
                ScattererKind::Background,
                ScattererKind::Delayed,
                ScattererKind::StreakInstantaneous,
            ]) {
                *slot = operators(kind, zeta, kappa, profile, opts)?;
            }
            Ok((zeta.to_bits(), row))
        };
        #[cfg(feature = "parallel")]
        let rows: Result<Vec<_>> = {
            use rayon::prelude::*;
            unique.par_iter().map(|&z| eval(z)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Result<Vec<_>> = unique.iter().map(|&z| eval(z)).collect();
        Ok(Self { kappa, entries: rows?.into_iter().collect() })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn operators(&self, kind: ScattererKind, zeta: f64) -> Result<OperatorValues> {
        let row = self.entries.get(&zeta.to_bits()).ok_or_else(|| {
            Error::Internal(format!("ζ = {zeta} is not on the cached operator grid"))
        })?;
        Ok(match kind {
            ScattererKind::Background => row[0],
            ScattererKind::Delayed => row[1],
            ScattererKind::StreakInstantaneous => row[2],
            ScattererKind::Noise => NOISE_OPS,
        })
    }

    pub fn basis(&self, model: TargetModel, pair: PairKind, zeta: f64) -> Result<PairBasis> {
        let bg = self.operators(ScattererKind::Background, zeta)?;
        let target = self.operators(model.target_kind(), zeta)?;
        Ok(assemble(bg, target, pair))
    }
}
