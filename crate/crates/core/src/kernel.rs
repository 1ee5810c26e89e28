//! Radar geometry and the factorized coordinate-delay imaging kernel.
//!
//! All statistics downstream run in the dimensionless coordinates
//! `(η, ζ, ψ)`; physical units only appear in [`RadarConfig`], the
//! resolutions and the two pair-coordinate constructors.

use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::specfun::{b_phi, phi_unchecked, sinc};

/// Carrier, bandwidth and aperture geometry of a narrowband spotlight system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    /// Angular carrier frequency, rad/s.
    pub omega0: f64,
    /// Angular bandwidth, rad/s.
    pub bandwidth: f64,
    /// Pulse duration, s.
    pub tau: f64,
    /// Angular width of the synthetic aperture, rad.
    pub phi_t: f64,
    /// Incidence angle, rad.
    pub theta: f64,
    /// Number of pulses.
    pub n_pulses: f64,
    /// Propagation speed, m/s.
    pub c: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self::demo(1.0).expect("demo configuration at κ = 1 is valid")
    }
}

impl RadarConfig {
    /// X-band style demo system with `ω0/B = 100`; the aperture is solved so
    /// that `κ` equals the requested value exactly.
    pub fn demo(kappa: f64) -> Result<Self> {
        ensure_finite("kappa", kappa)?;
        if kappa <= 0.0 {
            return Err(invalid(format!("demo radar needs kappa > 0, got {kappa}")));
        }
        let omega0 = 2.0 * PI * 1e10;
        let bandwidth = omega0 / 100.0;
        let cfg = Self {
            omega0,
            bandwidth,
            tau: 1e-5,
            phi_t: (kappa * bandwidth / omega0).sqrt(),
            theta: PI / 4.0,
            n_pulses: 1000.0,
            c: 299_792_458.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega0", self.omega0),
            ("bandwidth", self.bandwidth),
            ("tau", self.tau),
            ("phi_t", self.phi_t),
            ("theta", self.theta),
            ("n_pulses", self.n_pulses),
            ("c", self.c),
        ] {
            ensure_finite(name, v)?;
        }
        if self.omega0 <= 0.0 || self.bandwidth <= 0.0 {
            return Err(invalid("omega0 and bandwidth must be positive"));
        }
        let frac = self.bandwidth / self.omega0;
        if frac > 0.2 {
            return Err(invalid(format!(
                "bandwidth/omega0 = {frac} exceeds the narrowband limit 0.2"
            )));
        }
        if frac > 0.05 {
            warn!("bandwidth/omega0 = {frac} is large for the narrowband kernel");
        }
        if self.bandwidth * self.tau < 10.0 {
            return Err(invalid(format!(
                "time-bandwidth product {} is below 10",
                self.bandwidth * self.tau
            )));
        }
        if !(self.theta > 0.0 && self.theta < FRAC_PI_2) {
            return Err(invalid(format!("theta = {} outside (0, π/2)", self.theta)));
        }
        if !(self.phi_t > 0.0 && self.phi_t <= 0.5) {
            return Err(invalid(format!("phi_t = {} outside (0, 0.5]", self.phi_t)));
        }
        if self.tau <= 0.0 || self.n_pulses <= 0.0 || self.c <= 0.0 {
            return Err(invalid("tau, n_pulses and c must be positive"));
        }
        Ok(())
    }

    /// `k_{0θ} = (ω0/c)·sin θ`.
    pub fn k0_theta(&self) -> f64 {
        self.omega0 / self.c * self.theta.sin()
    }

    /// Ratio `ω0/B` of carrier to bandwidth.
    pub fn carrier_ratio(&self) -> f64 {
        self.omega0 / self.bandwidth
    }
}

/// `κ = φT²·ω0/B`, the ratio between the delay-coupling and range scales.
pub fn kappa(cfg: &RadarConfig) -> f64 {
    cfg.phi_t * cfg.phi_t * cfg.omega0 / cfg.bandwidth
}

/// Main-lobe half-widths of the kernel, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolutions {
    pub delta_az: f64,
    pub delta_rng: f64,
    /// Range extent over which a delay cannot be told from distance.
    pub delta_u: f64,
}

pub fn resolutions(cfg: &RadarConfig) -> Resolutions {
    let k = cfg.k0_theta();
    Resolutions {
        delta_az: PI / (k * cfg.phi_t),
        delta_rng: PI * cfg.c / (cfg.bandwidth * cfg.theta.sin()),
        delta_u: b_phi() / (k * cfg.phi_t * cfg.phi_t),
    }
}

/// A point in the dimensionless image space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPoint {
    pub eta: f64,
    pub zeta: f64,
    pub psi: f64,
}

impl DimensionlessPoint {
    pub fn new(eta: f64, zeta: f64, psi: f64) -> Self {
        Self { eta, zeta, psi }
    }
}

/// Dimensionless imaging kernel
/// `W = N·τ·exp(−2i(ω0/B)ζ)·Φ(η, κ(ζ+ψ)/2)·sinc ζ`.
pub fn kernel_w(p: DimensionlessPoint, cfg: &RadarConfig) -> Result<Complex64> {
    ensure_finite("eta", p.eta)?;
    ensure_finite("zeta", p.zeta)?;
    ensure_finite("psi", p.psi)?;
    let k = kappa(cfg);
    let carrier = Complex64::from_polar(1.0, -2.0 * cfg.carrier_ratio() * p.zeta);
    let phi = phi_unchecked(p.eta, 0.5 * k * (p.zeta + p.psi));
    Ok(carrier * phi * (cfg.n_pulses * cfg.tau * sinc(p.zeta)))
}

/// Fast time and ground position of one image sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImagePoint {
    /// Delay coordinate, s.
    pub t_y: f64,
    pub y1: f64,
    pub y2: f64,
}

/// The two intersections of one ambiguity line: `s` on the zero-delay plane,
/// `t` on the target's range plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmbiguityPairCoords {
    pub index: i64,
    pub s: ImagePoint,
    pub t: ImagePoint,
    pub zeta_y: f64,
}

impl AmbiguityPairCoords {
    /// Relative mismatch of `t_y + 2·y2·sin θ/c` and of `y1` between the two
    /// points; zero up to rounding for every constructed pair.
    pub fn same_line_residual(&self, cfg: &RadarConfig) -> f64 {
        let line = |p: &ImagePoint| p.t_y + 2.0 * p.y2 * cfg.theta.sin() / cfg.c;
        let (ls, lt) = (line(&self.s), line(&self.t));
        let scale = ls.abs().max(lt.abs()).max(f64::MIN_POSITIVE);
        let y1_scale = self.s.y1.abs().max(self.t.y1.abs()).max(1.0);
        ((ls - lt).abs() / scale).max((self.s.y1 - self.t.y1).abs() / y1_scale)
    }
}

/// Ambiguity pair `m` along the streak of a target at ground position `z_d`,
/// with `ζ_y = π·m`.
pub fn streak_pair_coords(m: i64, z_d: [f64; 2], cfg: &RadarConfig) -> Result<AmbiguityPairCoords> {
    if m < 1 {
        return Err(invalid(format!("streak pair index must be ≥ 1, got {m}")));
    }
    let zeta_y = PI * m as f64;
    let offset = cfg.omega0 * zeta_y / (cfg.bandwidth * cfg.k0_theta());
    Ok(AmbiguityPairCoords {
        index: m,
        s: ImagePoint { t_y: 0.0, y1: z_d[0], y2: z_d[1] + offset },
        t: ImagePoint { t_y: 2.0 * zeta_y / cfg.bandwidth, y1: z_d[0], y2: z_d[1] },
        zeta_y,
    })
}

/// Homogeneous pair `k` anchored at the zero-delay sample `y_k`; its partner
/// sits at delay `2ζ_max/B` on the same ambiguity line.
pub fn hom_pair_coords(
    k: i64,
    y_k: [f64; 2],
    zeta_max: f64,
    cfg: &RadarConfig,
) -> Result<AmbiguityPairCoords> {
    ensure_finite("zeta_max", zeta_max)?;
    if zeta_max <= 0.0 {
        return Err(invalid(format!("zeta_max must be positive, got {zeta_max}")));
    }
    let offset = cfg.omega0 * zeta_max / (cfg.bandwidth * cfg.k0_theta());
    Ok(AmbiguityPairCoords {
        index: k,
        s: ImagePoint { t_y: 0.0, y1: y_k[0], y2: y_k[1] },
        t: ImagePoint { t_y: 2.0 * zeta_max / cfg.bandwidth, y1: y_k[0], y2: y_k[1] - offset },
        zeta_y: zeta_max,
    })
}
