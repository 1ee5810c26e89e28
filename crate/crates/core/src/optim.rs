//! Derivative-free Nelder–Mead minimization on `R^N`.

/// Outcome of a [`nelder_mead`] run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<const N: usize> {
    pub x: [f64; N],
    pub value: f64,
    pub evaluations: usize,
    /// `true` if the simplex values collapsed below the tolerance before the
    /// evaluation budget ran out.
    pub converged: bool,
}

/// Termination and restart settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Initial simplex edge along each axis.
    pub step: f64,
    /// Stop when the spread of function values across the simplex is below this.
    pub f_tol: f64,
    pub max_evaluations: usize,
    /// Rebuild the simplex around the best point (edge `step · restart_shrink`)
    /// after each convergence, until a restart no longer improves by `f_tol`.
    pub restart_shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { step: 1.0, f_tol: 1e-8, max_evaluations: 2000, restart_shrink: 0.1 }
    }
}

const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

/// Minimizes `f` from `x0`. Non-finite values are treated as `+∞`, so the
/// objective may signal infeasible points that way.
pub fn nelder_mead<const N: usize, F>(mut f: F, x0: [f64; N], opts: &NelderMeadOptions) -> Minimum<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut evaluations = 0;
    let mut eval = |x: &[f64; N], count: &mut usize| -> f64 {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0;
    let mut best_f = eval(&x0, &mut evaluations);
    let mut step = opts.step;
    let mut converged = false;
    loop {
        let run = simplex_descent(&mut eval, best_x, best_f, step, opts, &mut evaluations);
        let improved = best_f - run.1 > opts.f_tol;
        let finished = run.2;
        if run.1 < best_f {
            best_x = run.0;
            best_f = run.1;
        }
        if !finished || evaluations >= opts.max_evaluations {
            break;
        }
        if !improved {
            converged = true;
            break;
        }
        step = opts.step * opts.restart_shrink;
    }
    Minimum { x: best_x, value: best_f, evaluations, converged: converged && best_f.is_finite() }
}

// One simplex run; returns (best x, best f, terminated by tolerance).
fn simplex_descent<const N: usize, E>(
    eval: &mut E,
    x0: [f64; N],
    f0: f64,
    step: f64,
    opts: &NelderMeadOptions,
    evaluations: &mut usize,
) -> ([f64; N], f64, bool)
where
    E: FnMut(&[f64; N], &mut usize) -> f64,
{
    let mut pts = Vec::with_capacity(N + 1);
    pts.push((x0, f0));
    for i in 0..N {
        let mut x = x0;
        x[i] += step;
        let v = eval(&x, evaluations);
        pts.push((x, v));
    }
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lo, hi) = (pts[0].1, pts[N].1);
        if lo.is_finite() && hi - lo <= opts.f_tol {
            return (pts[0].0, lo, true);
        }
        if *evaluations >= opts.max_evaluations {
            return (pts[0].0, lo, false);
        }
        let mut centroid = [0.0; N];
        for (x, _) in &pts[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }
        let along = |t: f64| -> [f64; N] {
            let mut y = [0.0; N];
            for k in 0..N {
                y[k] = centroid[k] + t * (pts[N].0[k] - centroid[k]);
            }
            y
        };
        let xr = along(-ALPHA);
        let fr = eval(&xr, evaluations);
        if fr < pts[0].1 {
            let xe = along(-ALPHA * GAMMA);
            let fe = eval(&xe, evaluations);
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < pts[N - 1].1 {
            pts[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < pts[N].1 {
            let xc = along(-ALPHA * RHO);
            (xc, eval(&xc, evaluations))
        } else {
            let xc = along(RHO);
            (xc, eval(&xc, evaluations))
        };
        if fc < pts[N].1.min(fr) {
            pts[N] = (xc, fc);
            continue;
        }
        let best = pts[0].0;
        for p in pts.iter_mut().skip(1) {
            for (x, b) in p.0.iter_mut().zip(best) {
                *x = b + SIGMA * (*x - b);
            }
            p.1 = eval(&p.0, evaluations);
        }
    }
}
