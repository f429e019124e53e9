//! Distance from a point to the convex hull of a finite set under a given
//! norm. Polyhedral norms (l1, l_inf, explicit functional sets) go through an
//! exact epigraph LP; smooth l_p norms use conditional gradient over the
//! simplex with the Frank-Wolfe gap as an optimality certificate.

use serde::Serialize;
use thiserror::Error;

use crate::lp::{LpError, Problem, Rel};
use crate::space::{dot, norm_of, Exponent, NormSpec, SpaceError};

/// Default tolerance for the exact LP paths.
pub const TOL_EXACT: f64 = 1e-7;
/// Default tolerance for the conditional-gradient path.
pub const TOL_ITERATIVE: f64 = 1e-5;

const MEMBERSHIP_TOL: f64 = 1e-9;
const CG_MAX_ITER: usize = 100_000;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("dimension mismatch between point ({x}) and generators ({points})")]
    DimensionMismatch { x: usize, points: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    ExactLp,
    ConditionalGradient,
}

/// Result of a hull-distance solve, carrying the minimizing barycentric
/// weights, the hull point they define, and a certified optimality gap.
#[derive(Clone, Debug, Serialize)]
pub struct HullDistanceResult {
    pub distance: f64,
    pub weights: Vec<f64>,
    pub ambient_point: Vec<f64>,
    pub method: SolveMethod,
    pub gap: f64,
    pub converged: bool,
}

fn check_inputs(x: &[f64], points: &[Vec<f64>]) -> Result<(), HullError> {
    if points.is_empty() {
        return Err(HullError::EmptyPointSet);
    }
    for p in points {
        if p.len() != x.len() {
            return Err(HullError::DimensionMismatch {
                x: x.len(),
                points: p.len(),
            });
        }
    }
    Ok(())
}

/// min_i ||x - a_i|| under `spec`.
pub fn dist_point_to_set(
    x: &[f64],
    points: &[Vec<f64>],
    spec: &NormSpec,
) -> Result<f64, HullError> {
    check_inputs(x, points)?;
    let mut best = f64::INFINITY;
    for a in points {
        let diff: Vec<f64> = x.iter().zip(a).map(|(u, v)| u - v).collect();
        best = best.min(norm_of(&diff, spec)?);
    }
    Ok(best)
}

/// Distance from `x` to co{a_1, ..., a_k} under `spec`.
pub fn dist_to_hull(
    x: &[f64],
    points: &[Vec<f64>],
    spec: &NormSpec,
    tol: f64,
) -> Result<HullDistanceResult, HullError> {
    check_inputs(x, points)?;
    assert!(tol > 0.0);
    match spec {
        NormSpec::Lp(Exponent::Finite(p)) if *p > 1.0 => {
            conditional_gradient(x, points, spec, tol)
        }
        _ => exact_lp(x, points, spec),
    }
}

/// Exact feasibility of x = sum alpha_i a_i, sum alpha_i = 1, alpha >= 0.
/// Norm-independent.
pub fn hull_membership(x: &[f64], points: &[Vec<f64>]) -> Result<bool, HullError> {
    check_inputs(x, points)?;
    let k = points.len();
    let n = x.len();
    let mut lp = Problem::new(k);
    for j in 0..n {
        let coeffs: Vec<f64> = points.iter().map(|a| a[j]).collect();
        lp.constrain(coeffs, Rel::Eq, x[j]);
    }
    lp.constrain(vec![1.0; k], Rel::Eq, 1.0);
    Ok(lp.feasibility_residual()? <= MEMBERSHIP_TOL)
}

fn combine(points: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for (w, a) in alpha.iter().zip(points) {
        for j in 0..n {
            c[j] += w * a[j];
        }
    }
    c
}

/// Epigraph LP: variables are the barycentric weights plus auxiliary
/// absolute-value (l1), sup (l_inf), or gauge (polyhedral) variables.
fn exact_lp(
    x: &[f64],
    points: &[Vec<f64>],
    spec: &NormSpec,
) -> Result<HullDistanceResult, HullError> {
    let k = points.len();
    let n = x.len();
    let mut lp;
    match spec {
        NormSpec::Lp(p) if p.is_one() => {
            // vars: alpha (k), u (n); min sum u_j with u_j >= |x_j - (A alpha)_j|.
            lp = Problem::new(k + n);
            for j in 0..n {
                lp.objective[k + j] = 1.0;
            }
            for j in 0..n {
                let mut pos = vec![0.0; k + n];
                let mut neg = vec![0.0; k + n];
                for i in 0..k {
                    pos[i] = points[i][j];
                    neg[i] = -points[i][j];
                }
                pos[k + j] = -1.0;
                neg[k + j] = -1.0;
                lp.constrain(pos, Rel::Le, x[j]);
                lp.constrain(neg, Rel::Le, -x[j]);
            }
        }
        NormSpec::Lp(Exponent::Inf) => {
            // vars: alpha (k), t; min t with t >= |x_j - (A alpha)_j| for all j.
            lp = Problem::new(k + 1);
            lp.objective[k] = 1.0;
            for j in 0..n {
                let mut pos = vec![0.0; k + 1];
                let mut neg = vec![0.0; k + 1];
                for i in 0..k {
                    pos[i] = points[i][j];
                    neg[i] = -points[i][j];
                }
                pos[k] = -1.0;
                neg[k] = -1.0;
                lp.constrain(pos, Rel::Le, x[j]);
                lp.constrain(neg, Rel::Le, -x[j]);
            }
        }
        NormSpec::Polyhedral(fs) => {
            // vars: alpha (k), t; min t with <f, x - A alpha> <= t for every f.
            lp = Problem::new(k + 1);
            lp.objective[k] = 1.0;
            for f in fs {
                let mut row = vec![0.0; k + 1];
                for i in 0..k {
                    row[i] = -dot(f, &points[i]);
                }
                row[k] = -1.0;
                lp.constrain(row, Rel::Le, -dot(f, x));
            }
        }
        NormSpec::Lp(_) => unreachable!("smooth exponents use the CG path"),
    }
    let mut simplex_row = vec![0.0; lp.n_vars];
    simplex_row[..k].iter_mut().for_each(|v| *v = 1.0);
    lp.constrain(simplex_row, Rel::Eq, 1.0);

    let sol = lp.solve()?;
    let mut weights: Vec<f64> = sol.x[..k].iter().map(|&w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let ambient_point = combine(points, &weights);
    let diff: Vec<f64> = x.iter().zip(&ambient_point).map(|(u, v)| u - v).collect();
    let distance = norm_of(&diff, spec)?;
    Ok(HullDistanceResult {
        distance,
        weights,
        ambient_point,
        method: SolveMethod::ExactLp,
        gap: 0.0,
        converged: true,
    })
}

/// Gradient of ||v||_p at v != 0 (also a subgradient wherever p in (1,2)
/// makes the norm non-smooth in higher derivatives).
fn lp_grad(v: &[f64], p: f64, norm: f64) -> Vec<f64> {
    let scale = norm.powf(p - 1.0);
    v.iter()
        .map(|&t| t.signum() * t.abs().powf(p - 1.0) / scale)
        .collect()
}

fn conditional_gradient(
    x: &[f64],
    points: &[Vec<f64>],
    spec: &NormSpec,
    tol: f64,
) -> Result<HullDistanceResult, HullError> {
    let k = points.len();
    let mut alpha = vec![1.0 / k as f64; k];
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut stalled = 0usize;

    let eval = |alpha: &[f64]| -> f64 {
        let c = combine(points, alpha);
        let diff: Vec<f64> = x.iter().zip(&c).map(|(u, v)| u - v).collect();
        norm_of(&diff, spec).unwrap()
    };

    let mut best_f = f64::INFINITY;
    for iter in 0..CG_MAX_ITER {
        let c = combine(points, &alpha);
        let v: Vec<f64> = x.iter().zip(&c).map(|(u, w)| u - w).collect();
        let f = norm_of(&v, spec)?;
        // Pairwise steps can swap mass in long cycles near the optimum;
        // stop once the objective has hit its floating-point floor.
        if f < best_f - 1e-14 * (1.0 + best_f.min(1e9)) {
            best_f = f;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 50 {
                break;
            }
        }
        if f <= tol * 1e-3 {
            gap = 0.0;
            converged = true;
            break;
        }
        // Gradient (norming functional) of the norm at the residual; for
        // nonsmooth norms this is a subgradient choice.
        let g = match spec {
            NormSpec::Lp(Exponent::Finite(p)) if *p > 1.0 => lp_grad(&v, *p, f),
            _ => crate::space::norming_functional(&v, spec)?.coeffs,
        };
        // d phi / d alpha_i = -<a_i, g>; Frank-Wolfe vertex = argmin.
        let scores: Vec<f64> = points.iter().map(|a| -dot(a, &g)).collect();
        let mut s = 0;
        for i in 1..k {
            if scores[i] < scores[s] - 1e-15 {
                s = i;
            }
        }
        gap = dot(&scores, &alpha) - scores[s];
        if gap <= tol {
            converged = true;
            break;
        }
        // Pairwise step: shift mass from the worst active vertex to the
        // Frank-Wolfe vertex. Linear convergence on these small instances,
        // unlike the classic O(1/t) convex-combination step.
        let mut away = s;
        for i in 0..k {
            if alpha[i] > 1e-15 && (away == s || scores[i] > scores[away]) {
                away = i;
            }
        }
        if away == s {
            break;
        }
        let cap = alpha[away];
        let line = |gamma: f64| {
            let mut a2 = alpha.clone();
            a2[away] -= gamma;
            a2[s] += gamma;
            eval(&a2)
        };
        let mut gamma = golden_min(&line, 0.0, cap, (cap * 1e-12).max(1e-16));
        // The full drop step often is the exact optimum; prefer it on ties.
        if line(cap) <= line(gamma) {
            gamma = cap;
        }
        alpha[away] -= gamma;
        alpha[s] += gamma;
        let _ = iter;
    }

    // Subgradient steps stall at kinks of a polyhedral norm. Finish with a
    // nonsmooth descent: a direction-finding LP over the active functionals
    // plus exact line search. The LP value doubles as a stationarity
    // certificate.
    if let NormSpec::Polyhedral(functionals) = spec {
        let eval = |alpha: &[f64]| -> f64 {
            let c = combine(points, alpha);
            let diff: Vec<f64> = x.iter().zip(&c).map(|(u, v)| u - v).collect();
            norm_of(&diff, spec).unwrap()
        };
        for _ in 0..500 {
            let c = combine(points, &alpha);
            let v: Vec<f64> = x.iter().zip(&c).map(|(u, w)| u - w).collect();
            let f = norm_of(&v, spec)?;
            if f <= tol * 1e-3 {
                gap = 0.0;
                converged = true;
                break;
            }
            let band = 1e-9 * (1.0 + f);
            let mut active: Vec<Vec<f64>> = Vec::new();
            for u in functionals {
                let s = dot(u, &v);
                if s.abs() >= f - band {
                    let sg = if s >= 0.0 { 1.0 } else { -1.0 };
                    active.push(u.iter().map(|c| sg * c).collect());
                }
            }
            // min t s.t. <u, A(gamma - alpha)> >= -t for active u, gamma in
            // the simplex; t < 0 certifies a descent direction.
            let nv = k + 2;
            let mut lp = Problem::new(nv);
            lp.objective[k] = 1.0;
            lp.objective[k + 1] = -1.0;
            for u in &active {
                let mut row = vec![0.0; nv];
                let mut base = 0.0;
                for (i, a) in points.iter().enumerate() {
                    let cu = dot(a, u);
                    row[i] = cu;
                    base += cu * alpha[i];
                }
                row[k] = 1.0;
                row[k + 1] = -1.0;
                lp.constrain(row, Rel::Ge, base);
            }
            let mut srow = vec![0.0; nv];
            srow[..k].iter_mut().for_each(|c| *c = 1.0);
            lp.constrain(srow, Rel::Eq, 1.0);
            let sol = match lp.solve() {
                Ok(sol) => sol,
                Err(_) => break,
            };
            let t_star = sol.x[k] - sol.x[k + 1];
            if t_star >= -1e-12 {
                gap = 0.0;
                converged = true;
                break;
            }
            let gamma = sol.x[..k].to_vec();
            let line = |t: f64| {
                let a2: Vec<f64> = alpha
                    .iter()
                    .zip(&gamma)
                    .map(|(a, g)| (1.0 - t) * a + t * g)
                    .collect();
                eval(&a2)
            };
            let t_best = golden_min(&line, 0.0, 1.0, 1e-14);
            let f_new = line(t_best);
            if f_new >= f - 1e-15 * (1.0 + f) {
                break;
            }
            for (a, g) in alpha.iter_mut().zip(&gamma) {
                *a = (1.0 - t_best) * *a + t_best * g;
            }
        }
    }

    let ambient_point = combine(points, &alpha);
    let diff: Vec<f64> = x.iter().zip(&ambient_point).map(|(u, v)| u - v).collect();
    let distance = norm_of(&diff, spec)?;
    Ok(HullDistanceResult {
        distance,
        weights: alpha,
        ambient_point,
        method: SolveMethod::ConditionalGradient,
        gap,
        converged,
    })
}

/// Golden-section minimization of a unimodal function on [lo, hi].
pub fn golden_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Golden-section maximization.
pub fn golden_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> f64 {
    golden_min(&|t| -f(t), lo, hi, xtol)
}
