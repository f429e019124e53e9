//! Convex-hull deviation of a point configuration: certified lower bounds by
//! multistart ascent, the theoretical upper bounds (dimension, l_p and
//! Hilbert-space estimates), extremal generators attaining the dimension
//! bound, simulated-annealing search over configurations, and the
//! hyperplane-projection constant estimator.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hull::golden_max;
use crate::space::{norm_of, norming_functional, Exponent, Functional, NormSpec, SpaceError};

#[derive(Debug, Error)]
pub enum DeviationError {
    #[error("configuration must contain at least one point")]
    Empty,
    #[error("point {index} has norm {norm} exceeding radius bound {bound}")]
    OutsideRadius { index: usize, norm: f64, bound: f64 },
    #[error("inconsistent point dimensions")]
    DimensionMismatch,
    #[error("oracle budget exceeded: {points} points at {steps} grid steps")]
    OracleBudget { points: usize, steps: usize },
    #[error("internal consistency violation: lower {lower} exceeds upper {upper}")]
    Consistency { lower: f64, upper: f64 },
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A finite point set inside the ball of radius `radius_bound`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointConfig {
    pub points: Vec<Vec<f64>>,
    #[serde(rename = "norm")]
    pub spec: NormSpec,
    pub radius_bound: f64,
}

impl PointConfig {
    pub fn new(
        points: Vec<Vec<f64>>,
        spec: NormSpec,
        radius_bound: f64,
    ) -> Result<Self, DeviationError> {
        if points.is_empty() {
            return Err(DeviationError::Empty);
        }
        let dim = points[0].len();
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(DeviationError::DimensionMismatch);
            }
            let norm = norm_of(p, &spec)?;
            if norm > radius_bound + 1e-9 {
                return Err(DeviationError::OutsideRadius {
                    index,
                    norm,
                    bound: radius_bound,
                });
            }
        }
        Ok(PointConfig {
            points,
            spec,
            radius_bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let diff: Vec<f64> = self.points[i]
                    .iter()
                    .zip(&self.points[j])
                    .map(|(a, b)| a - b)
                    .collect();
                d = d.max(norm_of(&diff, &self.spec).unwrap());
            }
        }
        d
    }
}

/// Which theoretical estimate was binding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    DimBound,
    LpnBound,
    LpBound,
    Hilbert,
    TwoDim,
    TrivialTwo,
    Diameter,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationReport {
    pub lower: f64,
    pub upper: f64,
    pub upper_source: BoundSource,
    pub witness: Witness,
    pub restarts_used: u32,
    pub seed: u64,
}

fn pow_exact(base: f64, t: f64) -> f64 {
    // t = 0 and t = 1 happen at p in {1, 2, inf}; keep those branches exact.
    if t == 0.0 {
        1.0
    } else if t == 1.0 {
        base
    } else {
        base.powf(t)
    }
}

/// Candidate upper bounds for the CHD-constant of the space at unit radius,
/// in report-precedence order.
pub fn zeta_upper_candidates(spec: &NormSpec, dim: usize) -> Vec<(f64, BoundSource)> {
    let mut out = Vec::new();
    let dim_value = if dim >= 2 {
        2.0 * (dim as f64 - 1.0) / dim as f64
    } else {
        1.0
    };
    out.push((dim_value, BoundSource::DimBound));
    if let NormSpec::Lp(p) = spec {
        let pair = crate::space::dual_exponent(*p).unwrap();
        let t = (pair.p.reciprocal() - pair.p_dual.reciprocal()).abs();
        if dim >= 2 {
            if let Exponent::Finite(pv) = p {
                if *pv <= 2.0 {
                    out.push((pow_exact(dim_value, t), BoundSource::LpnBound));
                }
            }
        }
        out.push((pow_exact(2.0, t), BoundSource::LpBound));
        if matches!(p, Exponent::Finite(v) if *v == 2.0) {
            out.push((1.0, BoundSource::Hilbert));
        }
    }
    if dim == 2 {
        out.push((1.0, BoundSource::TwoDim));
    }
    out.push((2.0, BoundSource::TrivialTwo));
    out
}

/// The best applicable upper bound for the CHD-constant of (spec, dim).
pub fn zeta_upper(spec: &NormSpec, dim: usize) -> (f64, BoundSource) {
    let mut best = (f64::INFINITY, BoundSource::TrivialTwo);
    for (v, src) in zeta_upper_candidates(spec, dim) {
        if v < best.0 - 1e-12 {
            best = (v, src);
        }
    }
    best
}

/// Minimum over all applicable theoretical bounds, scaled by the radius
/// bound, plus the configuration-diameter cap. Ties resolve by source
/// precedence (the candidate order).
pub fn theoretical_bounds(cfg: &PointConfig) -> (f64, BoundSource) {
    let mut best = (f64::INFINITY, BoundSource::TrivialTwo);
    for (v, src) in zeta_upper_candidates(&cfg.spec, cfg.dim()) {
        let scaled = v * cfg.radius_bound;
        if scaled < best.0 - 1e-12 {
            best = (scaled, src);
        }
    }
    let diam = cfg.diameter();
    if diam < best.0 - 1e-12 {
        best = (diam, BoundSource::Diameter);
    }
    best
}

fn combine_support(points: &[Vec<f64>], support: &[usize], alpha: &[f64]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for (w, &i) in alpha.iter().zip(support) {
        for j in 0..n {
            c[j] += w * points[i][j];
        }
    }
    c
}

fn min_dist_to_points(c: &[f64], cfg: &PointConfig) -> f64 {
    let mut best = f64::INFINITY;
    let mut diff = vec![0.0; c.len()];
    for a in &cfg.points {
        for j in 0..c.len() {
            diff[j] = c[j] - a[j];
        }
        best = best.min(norm_of(&diff, &cfg.spec).unwrap());
    }
    best
}

struct AscentParams {
    xtol: f64,
    max_sweeps: usize,
}

const ASCENT_FULL: AscentParams = AscentParams {
    xtol: 1e-12,
    max_sweeps: 10_000,
};
const ASCENT_COARSE: AscentParams = AscentParams {
    xtol: 1e-6,
    max_sweeps: 6,
};

/// Coordinate-pairwise exchange ascent of f(alpha) = min_i ||sum alpha_j
/// a_j - a_i|| over the simplex, with golden-section line search on each
/// mass transfer.
fn ascend(
    cfg: &PointConfig,
    support: &[usize],
    alpha: &mut Vec<f64>,
    params: &AscentParams,
) -> f64 {
    let s = support.len();
    let eval = |a: &[f64]| {
        let c = combine_support(&cfg.points, support, a);
        min_dist_to_points(&c, cfg)
    };
    let mut f = eval(alpha);
    for _ in 0..params.max_sweeps {
        let f_before = f;
        for u in 0..s {
            for v in 0..s {
                if u == v || alpha[u] <= 0.0 {
                    continue;
                }
                let cap = alpha[u];
                let line = |t: f64| {
                    let mut a2 = alpha.clone();
                    a2[u] -= t;
                    a2[v] += t;
                    eval(&a2)
                };
                // The slice is a min of convex functions, so it need not be
                // unimodal: bracket the best cell by a coarse scan, then
                // refine with golden section inside that cell.
                const CELLS: usize = 24;
                let mut bi = 0usize;
                let mut bf = f64::NEG_INFINITY;
                for i in 0..=CELLS {
                    let ft = line(cap * i as f64 / CELLS as f64);
                    if ft > bf {
                        bf = ft;
                        bi = i;
                    }
                }
                let lo = cap * bi.saturating_sub(1) as f64 / CELLS as f64;
                let hi = cap * (bi + 1).min(CELLS) as f64 / CELLS as f64;
                let t = golden_max(&line, lo, hi, params.xtol);
                let ft = line(t).max(bf);
                let t = if line(t) >= bf {
                    t
                } else {
                    cap * bi as f64 / CELLS as f64
                };
                if ft > f {
                    alpha[u] -= t;
                    alpha[v] += t;
                    f = ft;
                }
            }
        }
        if f - f_before < 1e-10 {
            break;
        }
    }

    // Ridge polish. Pairwise exchanges stall where several sites are
    // equidistant: the ascent direction must keep the active sites
    // equalized. Two LP subproblems cover the cases: a steepest-ascent LP
    // for first-order gains, and a ridge LP that moves as far as possible
    // inside the null space of the active gradients, where the objective
    // grows to second order.
    let polish_rounds = if params.max_sweeps > 100 { 60 } else { 4 };
    let n = cfg.dim();
    'polish: for _ in 0..polish_rounds {
        if f < 1e-12 {
            break;
        }
        let c = combine_support(&cfg.points, support, alpha);
        // Euclidean gradients of the active distances.
        let mut units: Vec<Vec<f64>> = Vec::new();
        for a in &cfg.points {
            let d: Vec<f64> = c.iter().zip(a).map(|(x, y)| x - y).collect();
            let nd = norm_of(&d, &cfg.spec).unwrap();
            if nd <= f + 1e-9 * (1.0 + f) {
                let e2: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if e2 > 1e-15 {
                    units.push(d.iter().map(|v| v / e2).collect());
                }
            }
        }

        // A(gamma - alpha) projected on a row vector, as LP coefficients.
        let row_of = |w: &[f64], al: &[f64]| -> (Vec<f64>, f64) {
            let mut row = vec![0.0; s];
            let mut base = 0.0;
            for (j, &pi) in support.iter().enumerate() {
                let cw: f64 = cfg.points[pi].iter().zip(w).map(|(x, y)| x * y).sum();
                row[j] = cw;
                base += cw * al[j];
            }
            (row, base)
        };
        let try_gamma = |gamma: &[f64], alpha: &mut Vec<f64>, f: &mut f64| -> bool {
            let line = |t: f64| {
                let a2: Vec<f64> = alpha
                    .iter()
                    .zip(gamma)
                    .map(|(a, g)| (1.0 - t) * a + t * g)
                    .collect();
                eval(&a2)
            };
            const CELLS: usize = 24;
            let mut bi = 0usize;
            let mut bf = *f;
            for i in 1..=CELLS {
                let ft = line(i as f64 / CELLS as f64);
                if ft > bf {
                    bf = ft;
                    bi = i;
                }
            }
            if bi == 0 && bf <= *f + 1e-13 {
                return false;
            }
            let lo = bi.saturating_sub(1) as f64 / CELLS as f64;
            let hi = ((bi + 1).min(CELLS)) as f64 / CELLS as f64;
            let t_star = golden_max(&line, lo, hi, params.xtol);
            let (t_best, f_best) = if line(t_star) >= bf {
                (t_star, line(t_star))
            } else {
                (bi as f64 / CELLS as f64, bf)
            };
            if f_best > *f + 1e-13 {
                for (a, g) in alpha.iter_mut().zip(gamma) {
                    *a = (1.0 - t_best) * *a + t_best * g;
                }
                *f = f_best;
                true
            } else {
                false
            }
        };

        // Steepest ascent: max eps with <u_i, A(gamma - alpha)> >= eps.
        let nv = s + 2;
        let mut lp = crate::lp::Problem::new(nv);
        lp.objective[s] = -1.0;
        lp.objective[s + 1] = 1.0;
        for u in &units {
            let (mut row, base) = row_of(u, alpha);
            row.extend_from_slice(&[-1.0, 1.0]);
            lp.constrain(row, crate::lp::Rel::Ge, base);
        }
        let mut simplex_row = vec![0.0; nv];
        simplex_row[..s].iter_mut().for_each(|v| *v = 1.0);
        lp.constrain(simplex_row, crate::lp::Rel::Eq, 1.0);
        if let Ok(sol) = lp.solve() {
            let eps = sol.x[s] - sol.x[s + 1];
            if eps > 1e-12 && try_gamma(&sol.x[..s].to_vec(), alpha, &mut f) {
                continue 'polish;
            }
        }

        // Ridge moves: orthonormalize the active gradients, then for every
        // leftover coordinate direction w maximize +/- <w, A gamma> subject
        // to staying equalized on the active set.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for u in &units {
            let mut v = u.clone();
            for b in &basis {
                let pr: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= pr * y);
            }
            let nv2: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv2 > 1e-10 {
                v.iter_mut().for_each(|x| *x /= nv2);
                basis.push(v);
            }
        }
        for j in 0..n {
            let mut w = vec![0.0; n];
            w[j] = 1.0;
            for b in &basis {
                let pr = b[j];
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= pr * y);
            }
            let nw: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nw < 1e-8 {
                continue;
            }
            w.iter_mut().for_each(|x| *x /= nw);
            for sign in [1.0, -1.0] {
                let ws: Vec<f64> = w.iter().map(|x| sign * x).collect();
                let (obj_row, _) = row_of(&ws, alpha);
                let mut lp = crate::lp::Problem::new(s);
                for (jv, o) in obj_row.iter().enumerate() {
                    lp.objective[jv] = -o;
                }
                for u in &units {
                    let (row, base) = row_of(u, alpha);
                    lp.constrain(row, crate::lp::Rel::Eq, base);
                }
                lp.constrain(vec![1.0; s], crate::lp::Rel::Eq, 1.0);
                if let Ok(sol) = lp.solve() {
                    let gamma = sol.x[..s].to_vec();
                    let moved: f64 = gamma
                        .iter()
                        .zip(alpha.iter())
                        .map(|(g, a)| (g - a).abs())
                        .sum();
                    if moved > 1e-10 && try_gamma(&gamma, alpha, &mut f) {
                        continue 'polish;
                    }
                }
            }
        }
        break 'polish;
    }
    f
}

fn dirichlet_uniform(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    // Dirichlet(1,...,1) via normalized exponentials.
    let mut w: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln().max(1e-300))
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Best weight vector on a coarse barycentric grid over `support`; a
/// deterministic, permutation-stable seed for the ascent.
fn grid_seed_alpha(cfg: &PointConfig, support: &[usize], steps: usize) -> Vec<f64> {
    let s = support.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; s]);
    let mut weights = vec![0usize; s];
    fn recurse(
        cfg: &PointConfig,
        support: &[usize],
        weights: &mut Vec<usize>,
        idx: usize,
        remaining: usize,
        steps: usize,
        best: &mut (f64, Vec<f64>),
    ) {
        if idx == weights.len() - 1 {
            weights[idx] = remaining;
            let alpha: Vec<f64> = weights.iter().map(|&w| w as f64 / steps as f64).collect();
            let c = combine_support(&cfg.points, support, &alpha);
            let f = min_dist_to_points(&c, cfg);
            if f > best.0 {
                *best = (f, alpha);
            }
            return;
        }
        for w in 0..=remaining {
            weights[idx] = w;
            recurse(cfg, support, weights, idx + 1, remaining - w, steps, best);
        }
    }
    recurse(cfg, support, &mut weights, 0, steps, steps, &mut best);
    best.1
}

fn deviation_lower_with(
    cfg: &PointConfig,
    restarts: u32,
    seed: u64,
    params: &AscentParams,
) -> DeviationReport {
    let k = cfg.points.len();
    let n = cfg.dim();
    let support_size = k.min(n + 1);

    // Canonical point order: restart choices then depend only on the set of
    // points, making the result invariant under input permutation.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        cfg.points[a]
            .partial_cmp(&cfg.points[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let canon = PointConfig {
        points: order.iter().map(|&i| cfg.points[i].clone()).collect(),
        spec: cfg.spec.clone(),
        radius_bound: cfg.radius_bound,
    };
    let cfg = &canon;

    let mut best_f = 0.0_f64;
    let mut best_witness = Witness {
        support: vec![0],
        weights: vec![1.0],
        point: cfg.points[0].clone(),
    };

    // Deterministic stage: coarse grid over the full support when the grid
    // is small enough, then local ascent from the best grid vertex.
    if k <= 6 {
        let support: Vec<usize> = (0..k).collect();
        let mut alpha = grid_seed_alpha(cfg, &support, 6);
        let f = ascend(cfg, &support, &mut alpha, params);
        if f > best_f {
            let point = combine_support(&cfg.points, &support, &alpha);
            best_f = f;
            best_witness = Witness {
                support,
                weights: alpha,
                point,
            };
        }
    }

    for restart in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(restart as u64 + 1);
        // Caratheodory restriction: a near-extremal hull point needs at most
        // dim + 1 generators, so each restart searches a small support.
        let mut support: Vec<usize> = if k <= support_size {
            (0..k).collect()
        } else {
            rand::seq::index::sample(&mut rng, k, support_size).into_vec()
        };
        support.sort_unstable();
        let mut alpha = dirichlet_uniform(&mut rng, support.len());
        let f = ascend(cfg, &support, &mut alpha, params);
        let point = combine_support(&cfg.points, &support, &alpha);
        let better = f > best_f
            || (f == best_f && point < best_witness.point);
        if better {
            best_f = f;
            best_witness = Witness {
                support,
                weights: alpha,
                point,
            };
        }
    }

    // Map the witness support back to the caller's point order.
    let mut pairs: Vec<(usize, f64)> = best_witness
        .support
        .iter()
        .map(|&i| order[i])
        .zip(best_witness.weights.iter().copied())
        .collect();
    pairs.sort_by_key(|&(i, _)| i);
    best_witness.support = pairs.iter().map(|p| p.0).collect();
    best_witness.weights = pairs.iter().map(|p| p.1).collect();

    let (upper, upper_source) = theoretical_bounds(cfg);
    DeviationReport {
        lower: best_f,
        upper,
        upper_source,
        witness: best_witness,
        restarts_used: restarts,
        seed,
    }
}

/// Lower bound on h+(co D, D) by multistart local ascent. Deterministic given
/// the seed; restart r always draws from RNG stream r, so growing `restarts`
/// never changes earlier restarts.
pub fn deviation_lower(cfg: &PointConfig, restarts: u32, seed: u64) -> DeviationReport {
    deviation_lower_with(cfg, restarts.max(1), seed, &ASCENT_FULL)
}

/// Brute-force oracle: max over the regular barycentric grid of the min
/// distance back to the configuration. Test-side ground truth for
/// [`deviation_lower`].
pub fn deviation_oracle(cfg: &PointConfig, grid_steps: usize) -> Result<f64, DeviationError> {
    let k = cfg.points.len();
    if k > 5 || grid_steps > 500 {
        return Err(DeviationError::OracleBudget {
            points: k,
            steps: grid_steps,
        });
    }
    // C(N + k - 1, k - 1) grid points.
    let mut count: f64 = 1.0;
    for i in 0..k - 1 {
        count *= (grid_steps + 1 + i) as f64 / (i + 1) as f64;
    }
    if count > 2e7 {
        return Err(DeviationError::OracleBudget {
            points: k,
            steps: grid_steps,
        });
    }

    let support: Vec<usize> = (0..k).collect();
    let mut weights = vec![0usize; k];
    let mut best = 0.0_f64;
    fn recurse(
        cfg: &PointConfig,
        support: &[usize],
        weights: &mut Vec<usize>,
        idx: usize,
        remaining: usize,
        steps: usize,
        best: &mut f64,
    ) {
        if idx == weights.len() - 1 {
            weights[idx] = remaining;
            let alpha: Vec<f64> = weights.iter().map(|&w| w as f64 / steps as f64).collect();
            let c = combine_support(&cfg.points, support, &alpha);
            let f = min_dist_to_points(&c, cfg);
            if f > *best {
                *best = f;
            }
            return;
        }
        for w in 0..=remaining {
            weights[idx] = w;
            recurse(cfg, support, weights, idx + 1, remaining - w, steps, best);
        }
    }
    recurse(
        cfg,
        &support,
        &mut weights,
        0,
        grid_steps,
        grid_steps,
        &mut best,
    );
    Ok(best)
}

/// Lower bound combined with the theoretical upper bound; raises on a
/// consistency violation (which would signal a solver bug).
pub fn chd_estimate(
    cfg: &PointConfig,
    restarts: u32,
    seed: u64,
) -> Result<DeviationReport, DeviationError> {
    let report = deviation_lower(cfg, restarts, seed);
    if report.lower > report.upper + 1e-6 {
        return Err(DeviationError::Consistency {
            lower: report.lower,
            upper: report.upper,
        });
    }
    Ok(report)
}

/// The standard-basis configuration in l1^n; its deviation is 2(n-1)/n.
pub fn extremal_l1(n: usize) -> Result<PointConfig, DeviationError> {
    if n < 2 {
        return Err(DeviationError::Empty);
    }
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    PointConfig::new(points, NormSpec::l1(), 1.0)
}

/// The sign-pattern configuration a_ij = (-1)^{delta_ij} in l_inf^n; its
/// deviation is 2(n-1)/n.
pub fn extremal_linf(n: usize) -> Result<PointConfig, DeviationError> {
    if n < 2 {
        return Err(DeviationError::Empty);
    }
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { -1.0 } else { 1.0 })
                .collect()
        })
        .collect();
    PointConfig::new(points, NormSpec::linf(), 1.0)
}

/// Annealing schedule knobs; the defaults match the report format and are
/// CLI-overridable.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnnealParams {
    pub t0: f64,
    pub cooling: f64,
    pub chains: u32,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            t0: 0.5,
            cooling: 0.995,
            chains: 16,
        }
    }
}

fn random_ball_point(rng: &mut impl Rng, spec: &NormSpec, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = norm_of(&x, spec).unwrap();
        if norm <= 1.0 {
            return x;
        }
    }
}

/// Uniform-ish random configuration of k points in the unit ball.
pub fn random_config(
    spec: &NormSpec,
    n: usize,
    k: usize,
    rng: &mut impl Rng,
) -> PointConfig {
    let points = (0..k).map(|_| random_ball_point(rng, spec, n)).collect();
    PointConfig::new(points, spec.clone(), 1.0).unwrap()
}

/// Simulated annealing over k-point configurations in the unit ball,
/// approximating the outer supremum in the CHD-constant. Deterministic given
/// the seed.
pub fn extremal_search(
    spec: &NormSpec,
    n: usize,
    k: usize,
    budget: usize,
    seed: u64,
    params: &AnnealParams,
) -> Result<(PointConfig, DeviationReport), DeviationError> {
    assert!(k >= 2, "extremal_search requires k >= 2");
    let chains = params.chains.max(1) as usize;
    let iters = (budget / chains).max(1);

    let eval = |points: &[Vec<f64>]| -> f64 {
        let cfg = PointConfig {
            points: points.to_vec(),
            spec: spec.clone(),
            radius_bound: 1.0,
        };
        deviation_lower_with(&cfg, 2, seed, &ASCENT_COARSE).lower
    };

    let mut chain_bests: Vec<(f64, Vec<Vec<f64>>)> = Vec::with_capacity(chains);

    for chain in 0..chains {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1_000 + chain as u64);
        let mut points: Vec<Vec<f64>> =
            (0..k).map(|_| random_ball_point(&mut rng, spec, n)).collect();
        let mut current = eval(&points);
        let mut best_val = current;
        let mut best_points = points.clone();
        let mut temp = params.t0;
        for _ in 0..iters {
            let idx = rng.gen_range(0..k);
            let scale = temp.max(1e-4);
            let mut candidate = points[idx].clone();
            for c in candidate.iter_mut() {
                *c += scale * rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let norm = norm_of(&candidate, spec)?;
            if norm > 1.0 {
                candidate.iter_mut().for_each(|c| *c /= norm);
            }
            let saved = std::mem::replace(&mut points[idx], candidate);
            let value = eval(&points);
            let delta = value - current;
            let accept = delta >= 0.0 || rng.gen::<f64>() < (delta / temp).exp();
            if accept {
                current = value;
                if value > best_val {
                    best_val = value;
                    best_points = points.clone();
                }
            } else {
                points[idx] = saved;
            }
            temp *= params.cooling;
        }
        chain_bests.push((best_val, best_points));
    }

    // Deterministic polish of each chain's best configuration: coordinate
    // pattern search with shrinking steps, projecting back into the ball.
    // Different chains settle near different local maxima, so all of them
    // deserve the refinement before picking a winner.
    let eval_budget = (budget / chains).max(500);
    let mut winner: Option<(f64, Vec<Vec<f64>>)> = None;
    for (mut val, mut points) in chain_bests {
        let mut step = 0.25_f64;
        let mut evals = 0usize;
        while step > 1e-4 && evals < eval_budget {
            let mut improved = false;
            'moves: for i in 0..k {
                for j in 0..n {
                    for sign in [1.0, -1.0] {
                        let mut candidate = points.clone();
                        candidate[i][j] += sign * step;
                        let norm = norm_of(&candidate[i], spec)?;
                        if norm > 1.0 {
                            candidate[i].iter_mut().for_each(|c| *c /= norm);
                        }
                        let v = eval(&candidate);
                        evals += 1;
                        if v > val + 1e-12 {
                            points = candidate;
                            val = v;
                            improved = true;
                            continue 'moves;
                        }
                        if evals >= eval_budget {
                            break 'moves;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if winner.as_ref().is_none_or(|(w, _)| val > *w) {
            winner = Some((val, points));
        }
    }

    let cfg = PointConfig::new(winner.unwrap().1, spec.clone(), 1.0)?;
    let report = chd_estimate(&cfg, 16, seed)?;
    Ok((cfg, report))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiMethod {
    Grid2d,
    Multistart,
}

/// A certified lower bound on the hyperplane-projection constant
/// xi = sup ||x - <p, x> y|| over unit x, y and norming p of y.
#[derive(Clone, Debug, Serialize)]
pub struct XiEstimate {
    pub value: f64,
    pub witness_x: Vec<f64>,
    pub witness_y: Vec<f64>,
    pub functional: Functional,
    pub method: XiMethod,
    pub seed: u64,
}

fn xi_value(x: &[f64], y: &[f64], spec: &NormSpec) -> Option<(f64, Functional)> {
    let p = norming_functional(y, spec).ok()?;
    let px = p.apply(x);
    let proj: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - px * b).collect();
    Some((norm_of(&proj, spec).ok()?, p))
}

fn unit_vector(v: &[f64], spec: &NormSpec) -> Option<Vec<f64>> {
    let n = norm_of(v, spec).ok()?;
    if n < 1e-12 {
        return None;
    }
    Some(v.iter().map(|c| c / n).collect())
}

fn xi_grid_2d(spec: &NormSpec, seed: u64) -> XiEstimate {
    let angle_point = |theta: f64| -> Vec<f64> {
        unit_vector(&[theta.cos(), theta.sin()], spec).unwrap()
    };
    let value_at = |tx: f64, ty: f64| -> f64 {
        let x = angle_point(tx);
        let y = angle_point(ty);
        xi_value(&x, &y, spec).map(|(v, _)| v).unwrap_or(0.0)
    };

    let coarse = 600usize;
    let step = std::f64::consts::TAU / coarse as f64;
    let mut best = (0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for i in 0..coarse {
        let ty = i as f64 * step;
        for j in 0..coarse {
            let tx = j as f64 * step;
            let v = value_at(tx, ty);
            if v > best.2 {
                best = (tx, ty, v);
            }
        }
    }
    // Coarse-to-fine refinement around the best cell.
    let mut window = step;
    for _ in 0..5 {
        let (cx, cy, _) = best;
        let pts = 21i32;
        for i in -pts..=pts {
            let ty = cy + i as f64 * window / pts as f64;
            for j in -pts..=pts {
                let tx = cx + j as f64 * window / pts as f64;
                let v = value_at(tx, ty);
                if v > best.2 {
                    best = (tx, ty, v);
                }
            }
        }
        window /= pts as f64;
    }

    let x = angle_point(best.0);
    let y = angle_point(best.1);
    let (value, functional) = xi_value(&x, &y, spec).unwrap();
    XiEstimate {
        value,
        witness_x: x,
        witness_y: y,
        functional,
        method: XiMethod::Grid2d,
        seed,
    }
}

fn structured_unit_candidates(spec: &NormSpec, n: usize) -> Vec<Vec<f64>> {
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        raw.push(e);
    }
    if n <= 8 {
        for mask in 0u32..(1 << n) {
            let v: Vec<f64> = (0..n)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            raw.push(v);
        }
    }
    raw.into_iter()
        .filter_map(|v| unit_vector(&v, spec))
        .collect()
}

fn xi_multistart(spec: &NormSpec, n: usize, budget: usize, seed: u64) -> XiEstimate {
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let consider = |x: &[f64], y: &[f64], best: &mut Option<(f64, Vec<f64>, Vec<f64>)>| {
        if let Some((v, _)) = xi_value(x, y, spec) {
            if best.as_ref().map_or(true, |b| v > b.0) {
                *best = Some((v, x.to_vec(), y.to_vec()));
            }
        }
    };

    let structured = structured_unit_candidates(spec, n);
    for y in &structured {
        for x in &structured {
            consider(x, y, &mut best);
        }
    }

    let starts = (budget / 400).clamp(4, 64);
    for start in 0..starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(5_000 + start as u64);
        let mut x = unit_vector(
            &(0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect::<Vec<f64>>(),
            spec,
        )
        .unwrap();
        let mut y = unit_vector(
            &(0..n)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect::<Vec<f64>>(),
            spec,
        )
        .unwrap();
        let mut current = xi_value(&x, &y, spec).map(|(v, _)| v).unwrap_or(0.0);
        consider(&x, &y, &mut best);
        let mut step = 0.5;
        let mut fails = 0;
        for _ in 0..400 {
            let perturb_x = rng.gen_bool(0.5);
            let target = if perturb_x { &x } else { &y };
            let cand: Vec<f64> = target
                .iter()
                .map(|&c| c + step * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            if let Some(u) = unit_vector(&cand, spec) {
                let (cx, cy) = if perturb_x { (&u, &y) } else { (&x, &u) };
                let v = xi_value(cx, cy, spec).map(|(v, _)| v).unwrap_or(0.0);
                if v > current {
                    current = v;
                    if perturb_x {
                        x = u;
                    } else {
                        y = u;
                    }
                    consider(&x, &y, &mut best);
                    fails = 0;
                    continue;
                }
            }
            fails += 1;
            if fails >= 20 {
                step *= 0.7;
                fails = 0;
            }
        }
    }

    let (_, x, y) = best.unwrap();
    let (value, functional) = xi_value(&x, &y, spec).unwrap();
    XiEstimate {
        value,
        witness_x: x,
        witness_y: y,
        functional,
        method: XiMethod::Multistart,
        seed,
    }
}

/// Lower-bound estimate of xi for (spec, n): dense angular grid in 2D,
/// structured plus multistart ascent in higher dimensions.
pub fn xi_estimate(spec: &NormSpec, n: usize, budget: usize, seed: u64) -> XiEstimate {
    assert!(n >= 2, "xi_estimate requires n >= 2");
    if n == 2 {
        xi_grid_2d(spec, seed)
    } else {
        xi_multistart(spec, n, budget, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_examples() {
        // dim 3, l1: dim bound and lpn bound tie at 4/3; precedence says dim.
        let cfg = extremal_l1(3).unwrap();
        let (u, src) = theoretical_bounds(&cfg);
        assert!((u - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(src, BoundSource::DimBound);

        // dim 5, Euclidean: Hilbert ceiling.
        let cfg = PointConfig::new(
            vec![vec![0.0; 5], {
                let mut e = vec![0.0; 5];
                e[0] = 1.0;
                e
            }],
            NormSpec::l2(),
            1.0,
        )
        .unwrap();
        // At p = 2 the l_p^n refinement, the L_p bound and the Hilbert bound
        // all equal 1; source precedence picks the l_p^n refinement.
        let (u, src) = theoretical_bounds(&cfg);
        assert!((u - 1.0).abs() < 1e-12);
        assert_eq!(src, BoundSource::LpnBound);

        // dim 4, p = 1.5: the l_p^n refinement (3/2)^(1/3) is binding.
        let (u, src) = zeta_upper(&NormSpec::lp(1.5).unwrap(), 4);
        assert!((u - 1.5_f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(src, BoundSource::LpnBound);
        assert!((u - 1.1447).abs() < 1e-3);
    }

    #[test]
    fn two_point_closed_form() {
        let cfg = PointConfig::new(
            vec![vec![0.0, 0.0], vec![0.8, -0.4]],
            NormSpec::l1(),
            1.5,
        )
        .unwrap();
        let r = deviation_lower(&cfg, 4, 0);
        assert!((r.lower - 1.2 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn single_point_is_zero() {
        let cfg = PointConfig::new(vec![vec![0.3, 0.1]], NormSpec::l2(), 1.0).unwrap();
        assert_eq!(deviation_lower(&cfg, 2, 0).lower, 0.0);
    }

    #[test]
    fn l1_basis_attains_dimension_bound() {
        let cfg = extremal_l1(3).unwrap();
        let r = deviation_lower(&cfg, 8, 1);
        assert!((r.lower - 4.0 / 3.0).abs() < 1e-6, "lower = {}", r.lower);
        for w in &r.witness.weights {
            assert!((w - 1.0 / 3.0).abs() < 1e-5);
        }
    }

    #[test]
    fn linf_extremal_examples() {
        let cfg = extremal_linf(2).unwrap();
        assert_eq!(cfg.points, vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        let cfg = extremal_linf(3).unwrap();
        assert_eq!(cfg.points[0], vec![-1.0, 1.0, 1.0]);
        // Centroid is ((n-2)/n, ...) = (1/3, 1/3, 1/3).
        let centroid: Vec<f64> = (0..3)
            .map(|j| cfg.points.iter().map(|p| p[j]).sum::<f64>() / 3.0)
            .collect();
        for c in centroid {
            assert!((c - 1.0 / 3.0).abs() < 1e-15);
        }
        let r = chd_estimate(&cfg, 8, 0).unwrap();
        assert!((r.lower - 4.0 / 3.0).abs() < 1e-6);
        assert!((r.upper - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn l1_basis_n5() {
        let cfg = extremal_l1(5).unwrap();
        let r = chd_estimate(&cfg, 8, 0).unwrap();
        assert!((r.lower - 8.0 / 5.0).abs() < 1e-6);
        assert!((r.upper - 8.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn oracle_examples() {
        let cfg = PointConfig::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            NormSpec::l2(),
            1.0,
        )
        .unwrap();
        // Grid hits 1/2 exactly at even grid_steps.
        assert!((deviation_oracle(&cfg, 100).unwrap() - 0.5).abs() < 1e-12);

        let cfg = extremal_l1(3).unwrap();
        let o = deviation_oracle(&cfg, 300).unwrap();
        assert!((o - 4.0 / 3.0).abs() < 2.0 * 4.0 / 300.0);
    }

    #[test]
    fn oracle_budget_enforced() {
        let cfg = random_config(
            &NormSpec::l2(),
            2,
            3,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        assert!(matches!(
            deviation_oracle(&cfg, 501),
            Err(DeviationError::OracleBudget { .. })
        ));
    }

    #[test]
    fn oracle_agrees_with_ascent() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for i in 0..20 {
            let cfg = random_config(&NormSpec::l2(), 2, 3, &mut rng);
            let lower = deviation_lower(&cfg, 8, i).lower;
            let oracle = deviation_oracle(&cfg, 500).unwrap();
            let tol = 1e-3_f64.max(4.0 * cfg.diameter() / 500.0);
            assert!(
                (lower - oracle).abs() <= tol,
                "instance {i}: ascent {lower} vs oracle {oracle} (tol {tol})"
            );
        }
    }

    #[test]
    fn permutation_translation_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let cfg = random_config(&NormSpec::linf(), 3, 4, &mut rng);
        let base = deviation_lower(&cfg, 6, 7).lower;

        let mut permuted = cfg.clone();
        permuted.points.rotate_left(1);
        let p = deviation_lower(&permuted, 6, 7).lower;
        assert!((base - p).abs() < 1e-6);

        let shift = vec![0.4, -0.2, 0.1];
        let shifted_pts: Vec<Vec<f64>> = cfg
            .points
            .iter()
            .map(|q| q.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect();
        let r_new = shifted_pts
            .iter()
            .map(|q| norm_of(q, &cfg.spec).unwrap())
            .fold(0.0_f64, f64::max);
        let shifted = PointConfig::new(shifted_pts, cfg.spec.clone(), r_new).unwrap();
        let s = deviation_lower(&shifted, 6, 7).lower;
        assert!((base - s).abs() < 1e-6);

        let scaled_pts: Vec<Vec<f64>> = cfg
            .points
            .iter()
            .map(|q| q.iter().map(|v| 2.5 * v).collect())
            .collect();
        let scaled = PointConfig::new(scaled_pts, cfg.spec.clone(), 2.5).unwrap();
        let sc = deviation_lower(&scaled, 6, 7).lower;
        assert!((sc - 2.5 * base).abs() < 1e-5);
    }

    #[test]
    fn more_restarts_never_worse() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let cfg = random_config(&NormSpec::l1(), 3, 6, &mut rng);
        let few = deviation_lower(&cfg, 3, 11).lower;
        let many = deviation_lower(&cfg, 12, 11).lower;
        assert!(many >= few - 1e-12);
    }

    #[test]
    fn lower_below_upper_on_random_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for spec in [
            NormSpec::l1(),
            NormSpec::lp(1.5).unwrap(),
            NormSpec::l2(),
            NormSpec::lp(3.0).unwrap(),
            NormSpec::linf(),
        ] {
            for i in 0..20 {
                let dim = rng.gen_range(2..=4);
                let k = rng.gen_range(2..=6);
                let cfg = random_config(&spec, dim, k, &mut rng);
                let r = deviation_lower(&cfg, 6, i);
                assert!(
                    r.lower <= r.upper + 1e-6,
                    "{spec:?} dim {dim}: lower {} upper {} ({:?})",
                    r.lower,
                    r.upper,
                    r.upper_source
                );
            }
        }
    }

    #[test]
    fn annealing_finds_l1_extremal() {
        let (cfg, report) = extremal_search(
            &NormSpec::l1(),
            3,
            3,
            10_000,
            42,
            &AnnealParams::default(),
        )
        .unwrap();
        assert!(report.lower > 1.3, "found only {}", report.lower);
        assert_eq!(cfg.points.len(), 3);
    }

    #[test]
    fn annealing_respects_hilbert_ceiling() {
        let (_, report) = extremal_search(
            &NormSpec::l2(),
            3,
            4,
            2_000,
            1,
            &AnnealParams::default(),
        )
        .unwrap();
        assert!(report.lower <= 1.0 + 1e-6);
    }

    #[test]
    fn xi_euclidean_is_one() {
        for n in [2usize, 3, 4] {
            let e = xi_estimate(&NormSpec::l2(), n, 5_000, 3);
            assert!(
                (e.value - 1.0).abs() < 1e-3,
                "n = {n}: xi estimate {}",
                e.value
            );
        }
    }

    #[test]
    fn xi_witness_identities() {
        for spec in [NormSpec::l1(), NormSpec::linf(), NormSpec::l2()] {
            for n in [2usize, 3] {
                let e = xi_estimate(&spec, n, 3_000, 5);
                assert!((norm_of(&e.witness_x, &spec).unwrap() - 1.0).abs() < 1e-9);
                assert!((norm_of(&e.witness_y, &spec).unwrap() - 1.0).abs() < 1e-9);
                let px = e.functional.apply(&e.witness_x);
                let proj: Vec<f64> = e
                    .witness_x
                    .iter()
                    .zip(&e.witness_y)
                    .map(|(a, b)| a - px * b)
                    .collect();
                assert!((norm_of(&proj, &spec).unwrap() - e.value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn xi_linf3_exceeds_zeta() {
        let e = xi_estimate(&NormSpec::linf(), 3, 10_000, 7);
        assert!(e.value >= 4.0 / 3.0 - 1e-3, "xi estimate {}", e.value);
    }

    #[test]
    fn xi_l1_2d_at_least_one() {
        let e = xi_estimate(&NormSpec::l1(), 2, 0, 0);
        assert!(e.value >= 1.0 - 1e-6);
    }
}
