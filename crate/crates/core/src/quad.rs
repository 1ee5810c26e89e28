//! Quadrature rules: globally adaptive Gauss–Kronrod (7/15) over a set of
//! breakpoints, and Gauss–Legendre nodes of arbitrary order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration of an `N`-component integrand.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error, max-norm over components.
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &sx in nodes {
            let fx = f(center + half * sx);
            for k in 0..N {
                kronrod[k] += wk * fx[k];
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * fx[k];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    let mut value = [0.0; N];
    for k in 0..N {
        value[k] = kronrod[k] * half;
        error = error.max(((kronrod[k] - gauss[k]) * half).abs());
    }
    Panel { a, b, value, error }
}

/// Integrates `f` over `[breaks[0], breaks.last()]`, starting from the panels
/// delimited by `breaks` and bisecting the worst panel until the summed error
/// estimate drops below `abs_tol`.
pub fn integrate<const N: usize, F>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    max_panels: usize,
) -> Result<Quadrature<N>>
where
    F: Fn(f64) -> [f64; N],
{
    if breaks.len() < 2 {
        return Err(Error::InvalidArgument(
            "integration needs at least two breakpoints".into(),
        ));
    }
    let mut heap = BinaryHeap::with_capacity(2 * breaks.len());
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let p = gk15(&f, w[0], w[1]);
            total_err += p.error;
            heap.push(p);
        }
    }
    let mut evaluations = 15 * heap.len();
    while total_err > abs_tol {
        if heap.len() >= max_panels {
            return Err(Error::Numeric(format!(
                "adaptive quadrature did not converge: error estimate {total_err:.3e} \
                 above tolerance {abs_tol:.3e} after {evaluations} evaluations \
                 on [{}, {}]",
                breaks[0],
                breaks[breaks.len() - 1]
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point; accept it.
            heap.push(Panel { error: 0.0, ..worst });
            total_err -= worst.error;
            continue;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        evaluations += 30;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let mut value = [0.0; N];
    let mut error: f64 = 0.0;
    for p in heap.iter() {
        for (v, pv) in value.iter_mut().zip(p.value) {
            *v += pv;
        }
        error += p.error;
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|x| [f(x)], &[a, b], abs_tol, 100_000).map(|q| q.value[0])
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kronrod_is_exact_on_polynomials() {
        let q = integrate(|x| [x.powi(20), x.powi(3)], &[0.0, 1.0], 1e-14, 10).unwrap();
        assert_abs_diff_eq!(q.value[0], 1.0 / 21.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.value[1], 0.25, epsilon = 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = integrate_scalar(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-8);
    }

    #[test]
    fn gauss_legendre_weights_and_moments() {
        for n in [1, 2, 5, 64, 4000] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-12);
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            if n >= 2 {
                assert_abs_diff_eq!(m2, 2.0 / 3.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn too_few_panels_is_a_numeric_error() {
        let err = integrate(|x| [(1.0 / x).sin()], &[1e-6, 1.0], 1e-14, 4).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }
}
