use std::f64::consts::PI;

use proptest::prelude::*;
use sardelay::kernel::{
    hom_pair_coords, kappa, kernel_w, resolutions, streak_pair_coords, DimensionlessPoint,
    RadarConfig,
};
use sardelay::specfun::{b_phi, sinc};

#[test]
fn kappa_scales_quadratically_with_aperture() {
    let cfg = RadarConfig::demo(0.4).unwrap();
    assert!((kappa(&cfg) - 0.4).abs() < 1e-14);
    let wider = RadarConfig { phi_t: 2.0 * cfg.phi_t, ..cfg };
    assert!((kappa(&wider) - 4.0 * kappa(&cfg)).abs() < 1e-13);
}

#[test]
fn resolutions_by_substitution() {
    let cfg = RadarConfig::demo(1.0).unwrap();
    let r = resolutions(&cfg);
    let k0 = cfg.omega0 / cfg.c * cfg.theta.sin();
    assert!((r.delta_az - PI / (k0 * cfg.phi_t)).abs() <= 1e-12 * r.delta_az);
    assert!((r.delta_rng - PI * cfg.c / (cfg.bandwidth * cfg.theta.sin())).abs() <= 1e-12 * r.delta_rng);
    assert!((r.delta_u - b_phi() / (k0 * cfg.phi_t * cfg.phi_t)).abs() <= 1e-12 * r.delta_u);
    // Demo numbers: ω0 = 2π·1e10, B = ω0/100, θ = π/4, φT = 0.1.
    let want_rng = PI * 299_792_458.0 / (2.0 * PI * 1e8 * (PI / 4.0).sin());
    assert!((r.delta_rng - want_rng).abs() <= 1e-9 * want_rng);
}

#[test]
fn unambiguous_to_range_resolution_ratio() {
    // Substituting the definitions gives Δ_U/Δrng = b_Φ/(π·κ).
    for k in [0.4, 1.0, 3.0] {
        let cfg = RadarConfig::demo(k).unwrap();
        let r = resolutions(&cfg);
        let want = b_phi() / (PI * kappa(&cfg));
        assert!((r.delta_u / r.delta_rng - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn bandwidth_only_affects_range() {
    let cfg = RadarConfig::demo(1.0).unwrap();
    let half = RadarConfig { bandwidth: 0.5 * cfg.bandwidth, ..cfg };
    let (a, b) = (resolutions(&cfg), resolutions(&half));
    assert!((b.delta_rng - 2.0 * a.delta_rng).abs() <= 1e-12 * b.delta_rng);
    assert_eq!(a.delta_az, b.delta_az);
}

#[test]
fn kernel_zero_at_first_azimuth_null() {
    let cfg = RadarConfig::demo(1.0).unwrap();
    let w = kernel_w(DimensionlessPoint::new(PI, 0.0, 0.0), &cfg).unwrap();
    assert!(w.norm() <= 1e-15);
}

#[test]
fn kernel_decays_as_inverse_square_root_along_ambiguity() {
    let cfg = RadarConfig::demo(1.0).unwrap();
    let k = kappa(&cfg);
    let psi = 2e3 / k;
    let near = kernel_w(DimensionlessPoint::new(0.0, 0.0, psi), &cfg).unwrap().norm();
    let far = kernel_w(DimensionlessPoint::new(0.0, 0.0, 4.0 * psi), &cfg).unwrap().norm();
    let ratio = near / far;
    assert!((ratio - 2.0).abs() <= 0.2, "ratio {ratio}");
}

#[test]
fn narrow_aperture_factorizes() {
    let cfg = RadarConfig::demo(1e-4).unwrap();
    let nt = cfg.n_pulses * cfg.tau;
    for i in 0..=20 {
        for j in 0..=20 {
            for psi in [-10.0 * PI, 0.0, 10.0 * PI] {
                let eta = -PI + 2.0 * PI * i as f64 / 20.0;
                let zeta = -PI + 2.0 * PI * j as f64 / 20.0;
                let w = kernel_w(DimensionlessPoint::new(eta, zeta, psi), &cfg).unwrap();
                let want = nt * (sinc(eta) * sinc(zeta)).abs();
                assert!((w.norm() - want).abs() <= 1e-3 * nt);
            }
        }
    }
}

#[test]
fn kernel_ignores_psi_at_zero_kappa() {
    // κ = 0 is outside the validated radar range, but the kernel formula is
    // still defined there.
    let cfg = RadarConfig { phi_t: 0.0, ..RadarConfig::default() };
    for psi in [-50.0, 0.0, 3.3, 1e3] {
        let a = kernel_w(DimensionlessPoint::new(1.3, 0.7, psi), &cfg).unwrap();
        let b = kernel_w(DimensionlessPoint::new(1.3, 0.7, 0.0), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn streak_pair_first_index() {
    let cfg = RadarConfig::demo(1.0).unwrap();
    let z_d = [12.0, -40.0];
    let p = streak_pair_coords(1, z_d, &cfg).unwrap();
    assert_eq!(p.zeta_y, PI);
    let k0 = cfg.omega0 / cfg.c * cfg.theta.sin();
    let offset = cfg.omega0 * PI / (cfg.bandwidth * k0);
    assert!((p.s.y2 - z_d[1] - offset).abs() <= 1e-9);
    assert_eq!(p.s.t_y, 0.0);
    // T point: t_y = 2π/B at the target's own position.
    assert_eq!(p.t.y1, z_d[0]);
    assert_eq!(p.t.y2, z_d[1]);
    assert!((p.t.t_y - 2.0 * PI / cfg.bandwidth).abs() <= 1e-24);
}

#[test]
fn hom_pair_at_pi() {
    let cfg = RadarConfig::demo(0.4).unwrap();
    let y = [3.0, 500.0];
    let p = hom_pair_coords(7, y, PI, &cfg).unwrap();
    let k0 = cfg.omega0 / cfg.c * cfg.theta.sin();
    assert_eq!((p.s.t_y, p.s.y1, p.s.y2), (0.0, 3.0, 500.0));
    assert!((p.t.t_y - 2.0 * PI / cfg.bandwidth).abs() <= 1e-24);
    assert!((p.t.y2 - (500.0 - cfg.omega0 * PI / (cfg.bandwidth * k0))).abs() <= 1e-9);
    assert!(p.same_line_residual(&cfg) <= 1e-12);
    assert!(hom_pair_coords(0, y, 0.0, &cfg).is_err());
}

proptest! {
    #[test]
    fn pairs_lie_on_one_ambiguity_line(
        m in 1i64..200,
        y1 in -1e4f64..1e4,
        y2 in -1e4f64..1e4,
        zeta_max in 0.1f64..200.0,
        k in 0.05f64..4.0,
    ) {
        let cfg = RadarConfig::demo(k).unwrap();
        let s = streak_pair_coords(m, [y1, y2], &cfg).unwrap();
        prop_assert!(s.same_line_residual(&cfg) <= 1e-12);
        let h = hom_pair_coords(m, [y1, y2], zeta_max, &cfg).unwrap();
        prop_assert!(h.same_line_residual(&cfg) <= 1e-12);
    }
}
