use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use sardelay::kernel::RadarConfig;
use sardelay::moments::{
    cov4, g_s, g_t, h, k_const, operators, pair_moments, Intensities, MomentTriple, PairKind,
    QuadratureOptions, ReflectivityProfile, ScattererKind, TargetModel,
};
use sardelay::specfun::{b_phi, phi, sinc};

const UNIT: ReflectivityProfile = ReflectivityProfile::UnitStep;

/// Composite Simpson evaluation of the streak operators over ξ ∈ [0, ζ + 1e3]
/// with the unit-step profile, using `phi` directly.
fn streak_oracle(zeta: f64, kappa: f64, points: usize) -> (f64, f64, Complex64) {
    let upper = zeta + 1e3;
    let n = points + points % 2;
    let step = upper / n as f64;
    let (mut gs, mut gt, mut hh) = (0.0, 0.0, Complex64::new(0.0, 0.0));
    for i in 0..=n {
        let xi = i as f64 * step;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let s2 = sinc(zeta - xi).powi(2) * w;
        let a = phi(0.0, kappa * (zeta - xi)).unwrap();
        let b = phi(0.0, -kappa * xi).unwrap();
        gs += s2 * a.norm_sqr();
        gt += s2 * b.norm_sqr();
        hh += a * b.conj() * s2;
    }
    let scale = step / 3.0 / PI;
    (gs * scale, gt * scale, hh * scale)
}

#[test]
fn streak_operators_match_million_point_oracle() {
    let zeta = 12.0 * PI;
    let (gs, gt, hh) = streak_oracle(zeta, 1.0, 1_000_000);
    let k = ScattererKind::StreakInstantaneous;
    assert!((g_s(k, zeta, 1.0, &UNIT).unwrap() - gs).abs() <= 1e-5);
    assert!((g_t(k, zeta, 1.0, &UNIT).unwrap() - gt).abs() <= 1e-5);
    assert!((h(k, zeta, 1.0, &UNIT).unwrap() - hh).norm() <= 1e-5);
}

#[test]
fn streak_operators_match_oracle_on_grid() {
    let k = ScattererKind::StreakInstantaneous;
    let opts = QuadratureOptions::default();
    for m in [1.0, 3.0, 5.0, 8.0, 12.0] {
        for kappa in [0.4, 1.0, 1.5, 2.0] {
            let zeta = m * PI;
            let (gs, gt, hh) = streak_oracle(zeta, kappa, 200_000);
            let got = operators(k, zeta, kappa, &UNIT, &opts).unwrap();
            assert!((got.g_s - gs).abs() <= 1e-5, "g_s at ζ = {m}π, κ = {kappa}: {} vs {gs}", got.g_s);
            assert!((got.g_t - gt).abs() <= 1e-5, "g_t at ζ = {m}π, κ = {kappa}: {} vs {gt}", got.g_t);
            assert!((got.h - hh).norm() <= 1e-5, "h at ζ = {m}π, κ = {kappa}: {} vs {hh}", got.h);
        }
    }
}

#[test]
fn full_triple_is_sum_of_oracles() {
    let zeta = 5.0 * PI;
    let p = Intensities::new(1.0, 0.25, 0.8).unwrap();
    let (gs, gt, hh) = streak_oracle(zeta, 1.0, 200_000);
    let bg = phi(0.0, zeta).unwrap();
    let got = pair_moments(TargetModel::Instantaneous, PairKind::Streak, zeta, 1.0, &p, &UNIT).unwrap();
    assert!((got.a - (1.25 + 0.8 * gs)).abs() <= 1e-5);
    assert!((got.b - (1.25 + 0.8 * gt)).abs() <= 1e-5);
    assert!((got.c - (bg.re + 0.8 * hh.re)).abs() <= 1e-5);
    assert!((got.d - (bg.im + 0.8 * hh.im)).abs() <= 1e-5);
}

#[test]
fn schwarz_on_grid_for_all_kinds_and_models() {
    let opts = QuadratureOptions::default();
    let p = Intensities::new(1.0, 0.25, 0.8).unwrap();
    for i in 0..50 {
        let zeta = 0.5 + 40.0 * i as f64 / 49.0;
        for j in 0..10 {
            let kappa = 2.0 * j as f64 / 9.0;
            for kind in ScattererKind::ALL {
                let o = operators(kind, zeta, kappa, &UNIT, &opts).unwrap();
                assert!(o.g_s * o.g_t >= o.h.norm_sqr() - 1e-9, "{kind:?} ζ = {zeta}, κ = {kappa}");
            }
            for model in TargetModel::BOTH {
                let m = pair_moments(model, PairKind::Streak, zeta, kappa, &p, &UNIT).unwrap();
                assert!(m.schwarz_gap() >= -1e-9);
                let c = cov4(&m).unwrap();
                assert!(c.eigenvalues().iter().all(|&e| e >= -1e-12));
            }
        }
    }
}

#[test]
fn peaks_separate_once_kappa_zeta_exceeds_main_lobe() {
    let b = b_phi();
    for kappa in [0.4, 1.0, 2.0] {
        for m in 3..=20 {
            let zeta = m as f64 * PI;
            if kappa * zeta < b {
                continue;
            }
            let s = ScattererKind::StreakInstantaneous;
            let t = ScattererKind::Delayed;
            assert!(g_s(s, zeta, kappa, &UNIT).unwrap() > g_t(s, zeta, kappa, &UNIT).unwrap());
            assert!(g_t(t, zeta, kappa, &UNIT).unwrap() > g_s(t, zeta, kappa, &UNIT).unwrap());
        }
    }
}

#[test]
fn zero_kappa_collapse() {
    let opts = QuadratureOptions::default();
    let p = Intensities::new(1.0, 0.25, 0.8).unwrap();
    for i in 0..=100 {
        let zeta = PI + 19.0 * PI * i as f64 / 100.0;
        let t = operators(ScattererKind::Delayed, zeta, 0.0, &UNIT, &opts).unwrap();
        assert_eq!(t.g_s, t.g_t);
        let s = operators(ScattererKind::StreakInstantaneous, zeta, 0.0, &UNIT, &opts).unwrap();
        assert!((s.g_s - s.g_t).abs() <= 1e-9);
        let ms = pair_moments(TargetModel::Instantaneous, PairKind::Streak, zeta, 0.0, &p, &UNIT).unwrap();
        let mt = pair_moments(TargetModel::Delayed, PairKind::Streak, zeta, 0.0, &p, &UNIT).unwrap();
        assert_eq!(ms, mt);
    }
}

#[test]
fn streak_at_zero_kappa_tends_to_quadrature() {
    // Small positive κ goes through the quadrature path and must approach the
    // κ = 0 closed form.
    let zeta = 6.0 * PI;
    let k = ScattererKind::StreakInstantaneous;
    let exact = g_t(k, zeta, 0.0, &UNIT).unwrap();
    let near = g_t(k, zeta, 1e-6, &UNIT).unwrap();
    assert!((exact - near).abs() <= 1e-5, "{exact} vs {near}");
}

#[test]
fn models_agree_without_target() {
    let p = Intensities::new(1.0, 0.3, 0.0).unwrap();
    for zeta in [PI, 4.0 * PI, 12.0 * PI] {
        let s = pair_moments(TargetModel::Instantaneous, PairKind::Streak, zeta, 1.0, &p, &UNIT).unwrap();
        let t = pair_moments(TargetModel::Delayed, PairKind::Streak, zeta, 1.0, &p, &UNIT).unwrap();
        assert_eq!(s, t);
    }
}

#[test]
fn homogeneous_pairs_ignore_target() {
    let p = Intensities::new(1.0, 0.3, 5.0).unwrap();
    let q = Intensities::new(1.0, 0.3, 0.0).unwrap();
    let z = 12.0 * PI;
    let a = pair_moments(TargetModel::Delayed, PairKind::Homogeneous, z, 1.0, &p, &UNIT).unwrap();
    let b = pair_moments(TargetModel::Instantaneous, PairKind::Streak, z, 1.0, &q, &UNIT).unwrap();
    assert_eq!(a, b);
}

#[test]
fn negative_intensity_rejected() {
    let p = Intensities { background: 1.0, noise: -0.1, target: 0.0 };
    assert!(pair_moments(TargetModel::Delayed, PairKind::Streak, 1.0, 1.0, &p, &UNIT).is_err());
}

#[test]
fn scale_constants() {
    let cfg = RadarConfig::demo(0.4).unwrap();
    assert_eq!(k_const(ScattererKind::Noise, &cfg), 1.0);
    let k = cfg.k0_theta();
    let ratio = k_const(ScattererKind::Background, &cfg) / k_const(ScattererKind::StreakInstantaneous, &cfg);
    assert!((ratio - PI / (k * cfg.phi_t)).abs() <= 1e-12 * ratio);
    // Hand substitution: K_t = N²τ²·(2/B)·π.
    let nt = cfg.n_pulses * cfg.tau;
    let want = nt * nt * 2.0 / cfg.bandwidth * PI;
    let got = k_const(ScattererKind::Delayed, &cfg);
    assert!((got - want).abs() <= 1e-15 * want);
    assert!((got - 1e-4 * 2.0 / (2.0 * PI * 1e8) * PI).abs() <= 1e-15 * want);
}

#[test]
fn indicator_profile_truncates_streak() {
    let opts = QuadratureOptions::default();
    let long = operators(ScattererKind::StreakInstantaneous, 3.0 * PI, 1.0, &UNIT, &opts).unwrap();
    let short = operators(
        ScattererKind::StreakInstantaneous,
        3.0 * PI,
        1.0,
        &ReflectivityProfile::Indicator { upper: 2.0 * PI },
        &opts,
    )
    .unwrap();
    assert!(short.g_s < long.g_s);
    assert!(short.g_t < long.g_t);
}

proptest! {
    #[test]
    fn cov4_is_psd_for_valid_triples(
        a in 0.0f64..10.0,
        b in 0.0f64..10.0,
        r in 0.0f64..1.0,
        angle in 0.0f64..(2.0 * PI),
    ) {
        let mag = r * (a * b).sqrt();
        let m = MomentTriple { a, b, c: mag * angle.cos(), d: mag * angle.sin() };
        let c = cov4(&m).unwrap();
        prop_assert!(c.eigenvalues().iter().all(|&e| e >= -1e-12));
    }
}
