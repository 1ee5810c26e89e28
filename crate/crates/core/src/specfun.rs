//! Special functions behind the imaging kernel and the moment operators.
//!
//! The central object is the two-variable oscillatory integral
//!
//! ```text
//! Φ(v1, v2) = ∫_{-1/2}^{1/2} exp(2i·v1·s) · exp(i·v2·s²) ds
//! ```
//!
//! with marginals `Φ(v1, 0) = sinc v1` and `Φ(0, v2) = (C(t) + i·sign(v2)·S(t)) / t`,
//! `t = sqrt(|v2| / 2π)`, where `C` and `S` are the Fresnel integrals in the
//! `π/2` convention.
//!
//! Every function here is pure and thread-safe. [`b_phi`] is computed once on
//! first use and cached.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{ensure_finite, Error, Result};

/// Value of `Φ(v1, v2)`.
pub type PhiValue = Complex64;

/// Below this `|v2|` the quadratic phase is expanded in a Taylor series around
/// the sinc marginal instead of completing the square.
pub const V2_SWITCH: f64 = 1e-3;

/// Fresnel arguments up to this value use the power series; above it the
/// continued fraction for the auxiliary function takes over.
pub const FRESNEL_SERIES_MAX: f64 = 1.5;

/// Sine-integral arguments up to this value use the power series.
pub const SI_SERIES_MAX: f64 = 2.0;

const CF_EPS: f64 = 1e-16;
const CF_MAX_ITER: usize = 10_000;
const TINY: f64 = 1e-300;

/// `sin x / x` with `sinc 0 = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Complex Fresnel integral `E(x) = C(x) + i·S(x) = ∫_0^x exp(iπu²/2) du`.
pub fn fresnel(x: f64) -> Complex64 {
    let ax = x.abs();
    let e = if ax <= FRESNEL_SERIES_MAX {
        fresnel_series(ax)
    } else {
        let theta = FRAC_PI_2 * ax * ax;
        Complex64::new(0.5, 0.5) - fresnel_aux_cf(ax) * Complex64::from_polar(1.0, theta)
    };
    if x < 0.0 {
        -e
    } else {
        e
    }
}

/// Auxiliary Fresnel function `P(x) = g(x) + i·f(x)` for `x ≥ 0`, defined by
/// `E(x) = (1+i)/2 − P(x)·exp(iπx²/2)`.
///
/// Working with `P` instead of `E` keeps the large quadratic phase out of the
/// arithmetic; it is what lets [`phi`] stay accurate when `|v1/v2|` is huge.
pub fn fresnel_aux(x: f64) -> Complex64 {
    debug_assert!(x >= 0.0);
    if x <= FRESNEL_SERIES_MAX {
        let theta = FRAC_PI_2 * x * x;
        (Complex64::new(0.5, 0.5) - fresnel_series(x)) * Complex64::from_polar(1.0, -theta)
    } else {
        fresnel_aux_cf(x)
    }
}

// Σ (iπ/2)^n x^{2n+1} / (n! (2n+1))
fn fresnel_series(x: f64) -> Complex64 {
    let z = Complex64::new(0.0, FRAC_PI_2 * x * x);
    let mut term = Complex64::new(x, 0.0);
    let mut sum = term;
    for n in 1..200 {
        term *= z / n as f64;
        let contrib = term / (2 * n + 1) as f64;
        sum += contrib;
        if contrib.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

// Modified Lentz evaluation of the continued fraction for erfc, specialised to
// the Fresnel argument; returns P(x) directly.
fn fresnel_aux_cf(x: f64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -PI * x * x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..CF_MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = one / (d * a + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
            break;
        }
    }
    h * x
}

/// Sine integral `Si(x) = ∫_0^x sinc(u) du`.
pub fn sine_integral(x: f64) -> f64 {
    let t = x.abs();
    let si = if t == 0.0 {
        0.0
    } else if t <= SI_SERIES_MAX {
        // Σ (-1)^n t^{2n+1} / ((2n+1)(2n+1)!)
        let t2 = t * t;
        let mut term = t;
        let mut sum = t;
        for n in 1..100 {
            let k = (2 * n) as f64;
            term *= -t2 / (k * (k + 1.0));
            let contrib = term / (k + 1.0);
            sum += contrib;
            if contrib.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // Lentz evaluation of the continued fraction for E1(it).
        let one = Complex64::new(1.0, 0.0);
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / TINY, 0.0);
        let mut d = one / b;
        let mut h = d;
        for i in 2..CF_MAX_ITER {
            let a = -((i - 1) as f64).powi(2);
            b += 2.0;
            d = one / (d * a + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    };
    si.copysign(x)
}

/// `∫_{-∞}^{x} sinc²(u) du = π/2 + Si(2x) − sin x · sinc x`.
pub fn sinc2_cumulative(x: f64) -> f64 {
    FRAC_PI_2 + sine_integral(2.0 * x) - x.sin() * sinc(x)
}

/// Convolution of the unit step with `sinc²`:
/// `F̆_t(ζ) = ∫_0^∞ sinc²(ζ − ζ') dζ' = π/2 + Si(2ζ) − sin ζ · sinc ζ`.
///
/// Rises from 0 at `ζ → −∞` through `π/2` at 0 to the plateau `π`.
pub fn f_breve_t(zeta: f64) -> f64 {
    sinc2_cumulative(zeta)
}

// ∫_{-1/2}^{1/2} cos(2vs) s^{2k} ds for k = 0..=3.
fn cosine_moments(v: f64) -> [f64; 4] {
    let v = v.abs();
    let h: f64 = 0.5;
    let mut out = [0.0; 4];
    if v < 6.0 {
        // 2 Σ_n (-1)^n (2v)^{2n} h^{2n+2k+1} / ((2n)! (2n+2k+1))
        for (k, slot) in out.iter_mut().enumerate() {
            let mut coef = 2.0 * h.powi(2 * k as i32 + 1);
            let mut sum = coef / (2 * k + 1) as f64;
            let x2 = v * v; // (2v·h)² with h = 1/2
            for n in 1..80 {
                let m = (2 * n) as f64;
                coef *= -x2 / (m * (m - 1.0));
                let contrib = coef / (m + (2 * k + 1) as f64);
                sum += contrib;
                if contrib.abs() < 1e-18 {
                    break;
                }
            }
            *slot = sum;
        }
    } else {
        // Upward recursion for J_k = ∫_0^h s^k cos(as) ds, K_k = ∫_0^h s^k sin(as) ds.
        let a = 2.0 * v;
        let (sn, cs) = (a * h).sin_cos();
        let mut j = sn / a;
        let mut kk = (1.0 - cs) / a;
        out[0] = 2.0 * j;
        let mut hk = 1.0;
        for k in 1..=6usize {
            hk *= h;
            let kf = k as f64;
            let j_next = hk * sn / a - kf / a * kk;
            let k_next = -hk * cs / a + kf / a * j;
            j = j_next;
            kk = k_next;
            if k % 2 == 0 {
                out[k / 2] = 2.0 * j;
            }
        }
    }
    out
}

fn phi_taylor(v1: f64, v2: f64) -> Complex64 {
    let m = cosine_moments(v1);
    // exp(i v2 s²) ≈ 1 + i v2 s² − v2² s⁴/2 − i v2³ s⁶/6
    let re = m[0] - 0.5 * v2 * v2 * m[2];
    let im = v2 * m[1] - v2 * v2 * v2 / 6.0 * m[3];
    Complex64::new(re, im)
}

fn phi_positive_v2(v1: f64, v2: f64) -> Complex64 {
    debug_assert!(v1 >= 0.0 && v2 > 0.0);
    let scale = (2.0 * v2 / PI).sqrt();
    let ratio = v1 / v2;
    let xb = (0.5 + ratio) * scale;
    let xa = (ratio - 0.5) * scale;
    let mut acc = -fresnel_aux(xb) * Complex64::from_polar(1.0, 0.25 * v2 + v1);
    let pa = fresnel_aux(xa.abs()) * Complex64::from_polar(1.0, 0.25 * v2 - v1);
    if xa > 0.0 {
        acc += pa;
    } else {
        // Stationary point inside the interval: the constant parts of the two
        // Fresnel terms add instead of cancelling. At xa = 0 this still holds
        // since P(0) = (1+i)/2.
        acc += Complex64::new(1.0, 1.0) * Complex64::from_polar(1.0, -v1 * ratio) - pa;
    }
    acc * (PI / (2.0 * v2)).sqrt()
}

/// `Φ(v1, v2)`; accurate to about 1e-12 absolute for `|v1|, |v2| ≤ 1e4`.
pub fn phi(v1: f64, v2: f64) -> Result<PhiValue> {
    ensure_finite("v1", v1)?;
    ensure_finite("v2", v2)?;
    Ok(phi_unchecked(v1, v2))
}

pub(crate) fn phi_unchecked(v1: f64, v2: f64) -> PhiValue {
    // Φ is even in v1, and Φ(v1, −v2) = conj Φ(v1, v2).
    let v1 = v1.abs();
    if v2.abs() < V2_SWITCH {
        phi_taylor(v1, v2)
    } else if v2 > 0.0 {
        phi_positive_v2(v1, v2)
    } else {
        phi_positive_v2(v1, -v2).conj()
    }
}

/// `Φ(0, v2)` via the Fresnel closed form.
pub fn phi_marginal_v2(v2: f64) -> Result<PhiValue> {
    ensure_finite("v2", v2)?;
    Ok(phi_marginal_unchecked(v2))
}

pub(crate) fn phi_marginal_unchecked(v2: f64) -> PhiValue {
    let t = (v2.abs() / (2.0 * PI)).sqrt();
    if t < 1e-3 {
        // (C + iS)/t = 1 + i v2/12 − v2²/160 + O(v2³)
        return Complex64::new(1.0 - v2 * v2 / 160.0, v2 / 12.0 - v2.powi(3) / 2016.0);
    }
    let e = fresnel(t);
    let value = e / t;
    if v2 < 0.0 {
        value.conj()
    } else {
        value
    }
}

/// Locates the first local minimum of `|Φ(0, v2)|` for `v2 > 0` (the main-lobe
/// half-width of the second marginal) to within 1e-6.
pub fn find_b_phi() -> Result<f64> {
    let f = |v: f64| phi_marginal_unchecked(v).norm();
    let step = 0.25;
    let mut v = 1.0;
    let (mut f_prev, mut f_cur) = (f(v - step), f(v));
    let bracket = loop {
        let f_next = f(v + step);
        if f_cur < f_prev && f_cur <= f_next {
            break (v - step, v + step);
        }
        f_prev = f_cur;
        f_cur = f_next;
        v += step;
        if v > 200.0 {
            return Err(Error::Internal(
                "no local minimum of |Φ(0, v2)| found on (0, 200]".into(),
            ));
        }
    };
    let b = golden_section_min(f, bracket.0, bracket.1, 1e-9);
    if !(22.0..=24.0).contains(&b) {
        return Err(Error::Internal(format!(
            "main-lobe minimum of |Φ(0, v2)| found at {b}, outside [22, 24]"
        )));
    }
    Ok(b)
}

/// Cached [`find_b_phi`].
pub fn b_phi() -> f64 {
    static B_PHI: OnceLock<f64> = OnceLock::new();
    *B_PHI.get_or_init(|| find_b_phi().expect("b_phi bracketing is deterministic"))
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
