//! Derivative-free local search with seeded multistart, plus the matrix
//! parametrizations the estimators search over.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::opalg::matrix::{c64, CMat, CVec, Eigh};
use crate::random::{gaussian, split_rng, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self { max_evals: 2000, ftol: 1e-12, xtol: 1e-10, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder–Mead with dimension-adaptive coefficients. After convergence the
/// simplex is rebuilt around the best point while budget remains, which
/// guards against premature collapse.
pub fn nelder_mead(f: &impl Fn(&[f64]) -> f64, x0: &[f64], opts: &NelderMeadOptions) -> LocalResult {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if n == 0 {
        return LocalResult { x: Vec::new(), f: eval(x0), evals: 1, converged: true };
    }
    let nf = n as f64;
    let (alpha, gamma, rho, shrink) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut evals = 0usize;
    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0);
    evals += 1;
    let mut converged = false;
    let mut step = opts.initial_step;

    while evals < opts.max_evals {
        let mut simplex: Vec<Vec<f64>> = vec![best_x.clone()];
        for i in 0..n {
            let mut v = best_x.clone();
            v[i] += if v[i].abs() > 1e-3 { step * v[i].abs().max(1.0) } else { step };
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
        evals += n;
        let start_best = best_f;
        converged = false;
        while evals < opts.max_evals {
            let mut idx: Vec<usize> = (0..=n).collect();
            idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
            values = idx.iter().map(|&i| values[i]).collect();

            let spread_f = (values[n] - values[0]).abs();
            let spread_x = simplex[1..].iter().flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
            if spread_f <= opts.ftol * (1.0 + values[0].abs()) && spread_x <= opts.xtol * (1.0 + norm(&simplex[0])) {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf).collect();
            let along = |t: f64| -> Vec<f64> { (0..n).map(|k| centroid[k] + t * (simplex[n][k] - centroid[k])).collect() };

            let xr = along(-alpha);
            let fr = eval(&xr);
            evals += 1;
            if fr < values[0] {
                let xe = along(-alpha * gamma);
                let fe = eval(&xe);
                evals += 1;
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
            } else {
                let (xc, fc) = if fr < values[n] {
                    let xc = along(-alpha * rho);
                    let fc = eval(&xc);
                    (xc, fc)
                } else {
                    let xc = along(rho);
                    let fc = eval(&xc);
                    (xc, fc)
                };
                evals += 1;
                if fc < values[n].min(fr) {
                    simplex[n] = xc;
                    values[n] = fc;
                } else {
                    for i in 1..=n {
                        for k in 0..n {
                            simplex[i][k] = simplex[0][k] + shrink * (simplex[i][k] - simplex[0][k]);
                        }
                        values[i] = eval(&simplex[i]);
                    }
                    evals += n;
                }
            }
        }
        let (bi, bv) = values.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        if bv < best_f {
            best_f = bv;
            best_x = simplex[bi].clone();
        }
        // converged without improving on the previous rebuild: stop
        if converged && start_best - best_f <= opts.ftol * (1.0 + best_f.abs()) {
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    LocalResult { x: best_x, f: best_f, evals, converged }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Multistart settings. `threads = None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Per-restart evaluation budget; `None` scales with the parameter count.
    pub max_evals: Option<usize>,
    pub threads: Option<usize>,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, max_evals: None, threads: None }
    }
}

impl OptimOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// `500·d²` evaluations, where `d² = n + 1` for the `n` traceless
    /// Hermitian parameters of a `d × d` matrix.
    pub fn budget(&self, n_params: usize) -> usize {
        self.max_evals.unwrap_or(500 * (n_params + 1))
    }
}

#[derive(Debug, Clone)]
pub struct MultistartResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub restarts: usize,
    pub converged: bool,
    pub evals: usize,
}

/// Minimizes `f` from `inits` followed by random starts drawn by `sample`,
/// `opts.restarts` starts in total. Restart `k` owns the RNG stream
/// `split_rng(seed, k)`; the reduction picks the lowest value, ties broken
/// by restart index, so the result does not depend on the thread count.
pub fn multistart<F, S>(f: &F, inits: &[Vec<f64>], sample: S, opts: &OptimOptions) -> Result<MultistartResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut SeededRng) -> Vec<f64> + Sync,
{
    let total = opts.restarts.max(inits.len()).max(1);
    let run = || -> Vec<LocalResult> {
        (0..total)
            .into_par_iter()
            .map(|k| {
                let mut rng = split_rng(opts.seed, k as u64);
                let x0 = if k < inits.len() { inits[k].clone() } else { sample(&mut rng) };
                let nm = NelderMeadOptions { max_evals: opts.budget(x0.len()), ..NelderMeadOptions::default() };
                nelder_mead(f, &x0, &nm)
            })
            .collect()
    };
    let results = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let evals = results.iter().map(|r| r.evals).sum();
    let best = results
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.f.total_cmp(&b.f).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    Ok(MultistartResult { x: best.x, f: best.f, restarts: total, converged: best.converged, evals })
}

/// Number of real parameters of a traceless Hermitian `d × d` matrix.
pub fn traceless_dim(d: usize) -> usize {
    d * d - 1
}

/// Traceless Hermitian matrix from `d² − 1` reals: `d − 1` free diagonal
/// entries (the last one balances the trace), then real/imaginary parts of
/// the strict upper triangle.
pub fn traceless_hermitian(theta: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    let mut last = 0.0;
    for i in 0..d - 1 {
        h[(i, i)] = c64(theta[i], 0.0);
        last -= theta[i];
    }
    h[(d - 1, d - 1)] = c64(last, 0.0);
    let mut k = d - 1;
    for i in 0..d {
        for j in i + 1..d {
            let z = c64(theta[k], theta[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Inverse of [`traceless_hermitian`] after removing the trace part.
pub fn traceless_params(h: &CMat) -> Vec<f64> {
    let d = h.nrows();
    let shift = (0..d).map(|i| h[(i, i)].re).sum::<f64>() / d as f64;
    let mut out: Vec<f64> = (0..d - 1).map(|i| h[(i, i)].re - shift).collect();
    for i in 0..d {
        for j in i + 1..d {
            let z = (h[(i, j)] + h[(j, i)].conj()) * c64(0.5, 0.0);
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

/// `exp(H)` scaled by `e^{−max eig}` so it never overflows; callers
/// normalize afterwards.
pub fn exp_hermitian_scaled(h: &CMat) -> CMat {
    let e = Eigh::new(h);
    let top = e.max();
    e.map(|v| (v - top).exp())
}

/// Hermitian matrix from `d²` reals (diagonal, then upper-triangle pairs).
pub fn hermitian_from_params(theta: &[f64], d: usize) -> CMat {
    let mut h = CMat::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = c64(theta[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in i + 1..d {
            let z = c64(theta[k], theta[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Normalized state vector from `2d` reals.
pub fn state_vector(theta: &[f64], d: usize) -> CVec {
    let v = CVec::from_fn(d, |i, _| c64(theta[2 * i], theta[2 * i + 1]));
    let n = v.norm();
    if n > 0.0 {
        v / c64(n, 0.0)
    } else {
        let mut e = CVec::zeros(d);
        e[0] = c64(1.0, 0.0);
        e
    }
}

pub fn state_params(v: &CVec) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn gaussian_params(n: usize, scale: f64, rng: &mut SeededRng) -> Vec<f64> {
    (0..n).map(|_| scale * gaussian(rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::matrix::max_abs_diff;
    use crate::random::{random_hermitian, seeded_rng};

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let r = nelder_mead(&rosenbrock, &[-1.2, 1.0], &NelderMeadOptions { max_evals: 5000, ..Default::default() });
        assert!(r.f < 1e-10, "f = {}", r.f);
        assert!((r.x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn multistart_is_thread_count_independent() {
        let f = |x: &[f64]| (x[0] * 3.0).sin() + 0.1 * x[0] * x[0] + (x[1] - 0.5).powi(2);
        let sample = |rng: &mut SeededRng| gaussian_params(2, 3.0, rng);
        let one = multistart(&f, &[], sample, &OptimOptions { restarts: 16, seed: 7, max_evals: Some(400), threads: Some(1) }).unwrap();
        let four = multistart(&f, &[], sample, &OptimOptions { restarts: 16, seed: 7, max_evals: Some(400), threads: Some(4) }).unwrap();
        assert_eq!(one.x, four.x);
        assert_eq!(one.f, four.f);
    }

    #[test]
    fn traceless_round_trip() {
        let mut rng = seeded_rng(3);
        let h = random_hermitian(3, &mut rng);
        let theta = traceless_params(&h);
        assert_eq!(theta.len(), traceless_dim(3));
        let back = traceless_hermitian(&theta, 3);
        let shift = crate::opalg::matrix::trace(&h) / c64(3.0, 0.0);
        let expect = &h - crate::opalg::matrix::identity(3) * shift;
        assert!(max_abs_diff(&back, &expect) < 1e-14);
    }
}
