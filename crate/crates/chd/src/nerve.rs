//! Admissible ball coverings, nerve complexes and their homology over the
//! two-element field, plus the section-covering check. The nerve of a union
//! of convex balls is homotopy equivalent to the union, so nonzero higher
//! Betti numbers of the nerve certify a non-contractible covering.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deviation::zeta_upper;
use crate::lp::{LpError, Problem, Rel};
use crate::space::{dot, norm_of, Exponent, NormSpec, SpaceError};

/// Band around the radius inside which an iterative feasibility value is
/// refused rather than classified.
pub const MARGIN_TOL: f64 = 1e-6;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NerveError {
    #[error("marginal ball intersection for subset {0:?}; refine the system")]
    Marginal(Vec<usize>),
    #[error("subset is empty")]
    EmptySubset,
    #[error("max_dim {max_dim} exceeds vertex count {vertices} - 1")]
    BadMaxDim { max_dim: usize, vertices: usize },
    #[error("section covering requires k = dim - 1 (got k = {k}, dim = {dim})")]
    BadSectionDim { k: usize, dim: usize },
    #[error("degenerate section: could not sample the hyperplane slice")]
    DegenerateSection,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Equal-radius balls with listed centers; a candidate admissible covering.
///
/// Serialized form: `{"radius":1.0,"norm":{...},"centers":[[...],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallSystem {
    pub radius: f64,
    #[serde(rename = "norm")]
    pub spec: NormSpec,
    pub centers: Vec<Vec<f64>>,
}

impl BallSystem {
    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityStatus {
    Feasible,
    Infeasible,
    Marginal,
}

/// Outcome of the k-wise ball intersection test. `margin` is radius minus
/// the best achievable max-distance (positive means slack).
#[derive(Clone, Debug, Serialize)]
pub struct FeasibilityVerdict {
    pub status: FeasibilityStatus,
    pub witness: Option<Vec<f64>>,
    pub margin: f64,
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn max_dist(x: &[f64], centers: &[&Vec<f64>], spec: &NormSpec) -> f64 {
    centers
        .iter()
        .map(|c| norm_of(&diff(x, c), spec).unwrap())
        .fold(0.0_f64, f64::max)
}

/// Decides whether the balls indexed by `subset` have a common point.
/// Polyhedral norms (l1, l_inf, explicit sets) solve an exact epigraph LP;
/// the Euclidean case reduces to the minimum enclosing ball of the centers;
/// other smooth exponents minimize the max-distance iteratively and report
/// `Marginal` when the optimum lands inside the tolerance band even after a
/// 10x refinement pass.
pub fn balls_intersect(
    sys: &BallSystem,
    subset: &[usize],
) -> Result<FeasibilityVerdict, NerveError> {
    if subset.is_empty() {
        return Err(NerveError::EmptySubset);
    }
    let centers: Vec<&Vec<f64>> = subset.iter().map(|&i| &sys.centers[i]).collect();
    if centers.len() == 1 {
        return Ok(FeasibilityVerdict {
            status: FeasibilityStatus::Feasible,
            witness: Some(centers[0].clone()),
            margin: sys.radius,
        });
    }

    let (x, g, exact) = match &sys.spec {
        NormSpec::Lp(Exponent::Finite(p)) if *p == 2.0 => {
            let pts: Vec<Vec<f64>> = centers.iter().map(|c| (*c).clone()).collect();
            let (center, radius) = min_enclosing_ball(&pts);
            (center, radius, true)
        }
        NormSpec::Lp(Exponent::Finite(p)) if *p > 1.0 => {
            let (x, g) = minimax_iterative(&centers, &sys.spec, 2_000);
            if (g - sys.radius).abs() < MARGIN_TOL {
                let (x2, g2) = minimax_iterative(&centers, &sys.spec, 20_000);
                (x2, g2, false)
            } else {
                (x, g, false)
            }
        }
        _ => {
            let (x, g) = minimax_lp(&centers, &sys.spec)?;
            (x, g, true)
        }
    };

    let margin = sys.radius - g;
    let status = if exact {
        if g <= sys.radius + FEAS_TOL {
            FeasibilityStatus::Feasible
        } else {
            FeasibilityStatus::Infeasible
        }
    } else if (g - sys.radius).abs() < MARGIN_TOL {
        FeasibilityStatus::Marginal
    } else if g <= sys.radius {
        FeasibilityStatus::Feasible
    } else {
        FeasibilityStatus::Infeasible
    };

    Ok(FeasibilityVerdict {
        status,
        witness: if status == FeasibilityStatus::Feasible {
            Some(x)
        } else {
            None
        },
        margin,
    })
}

/// Epigraph LP for min_x max_i ||x - c_i|| under a polyhedral norm. The free
/// point variable is split into positive parts; centers are shifted by their
/// centroid for conditioning.
fn minimax_lp(centers: &[&Vec<f64>], spec: &NormSpec) -> Result<(Vec<f64>, f64), NerveError> {
    let n = centers[0].len();
    let m = centers.len();
    let centroid: Vec<f64> = (0..n)
        .map(|j| centers.iter().map(|c| c[j]).sum::<f64>() / m as f64)
        .collect();
    let shifted: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| diff(c, &centroid))
        .collect();

    let sol;
    let t_index;
    match spec {
        NormSpec::Lp(p) if p.is_one() => {
            // vars: x+ (n), x- (n), u (m*n), t.
            let nv = 2 * n + m * n + 1;
            t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for (i, c) in shifted.iter().enumerate() {
                for j in 0..n {
                    let u = 2 * n + i * n + j;
                    let mut pos = vec![0.0; nv];
                    pos[j] = 1.0;
                    pos[n + j] = -1.0;
                    pos[u] = -1.0;
                    lp.constrain(pos, Rel::Le, c[j]);
                    let mut neg = vec![0.0; nv];
                    neg[j] = -1.0;
                    neg[n + j] = 1.0;
                    neg[u] = -1.0;
                    lp.constrain(neg, Rel::Le, -c[j]);
                }
                let mut cap = vec![0.0; nv];
                for j in 0..n {
                    cap[2 * n + i * n + j] = 1.0;
                }
                cap[t_index] = -1.0;
                lp.constrain(cap, Rel::Le, 0.0);
            }
            sol = lp.solve()?;
        }
        NormSpec::Lp(Exponent::Inf) => {
            let nv = 2 * n + 1;
            t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for c in &shifted {
                for j in 0..n {
                    let mut pos = vec![0.0; nv];
                    pos[j] = 1.0;
                    pos[n + j] = -1.0;
                    pos[t_index] = -1.0;
                    lp.constrain(pos, Rel::Le, c[j]);
                    let mut neg = vec![0.0; nv];
                    neg[j] = -1.0;
                    neg[n + j] = 1.0;
                    neg[t_index] = -1.0;
                    lp.constrain(neg, Rel::Le, -c[j]);
                }
            }
            sol = lp.solve()?;
        }
        NormSpec::Polyhedral(fs) => {
            let nv = 2 * n + 1;
            t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for c in &shifted {
                for f in fs {
                    let mut row = vec![0.0; nv];
                    for j in 0..n {
                        row[j] = f[j];
                        row[n + j] = -f[j];
                    }
                    row[t_index] = -1.0;
                    lp.constrain(row, Rel::Le, dot(f, c));
                }
            }
            sol = lp.solve()?;
        }
        NormSpec::Lp(_) => unreachable!("smooth exponents use the iterative path"),
    }
    let x: Vec<f64> = (0..n)
        .map(|j| sol.x[j] - sol.x[n + j] + centroid[j])
        .collect();
    Ok((x, sol.x[t_index]))
}

/// Subgradient descent plus shrinking pattern search for min_x max ||x - c_i||
/// under a smooth l_p norm.
fn minimax_iterative(
    centers: &[&Vec<f64>],
    spec: &NormSpec,
    iters: usize,
) -> (Vec<f64>, f64) {
    let n = centers[0].len();
    let m = centers.len();
    let mut x: Vec<f64> = (0..n)
        .map(|j| centers.iter().map(|c| c[j]).sum::<f64>() / m as f64)
        .collect();
    let mut g = max_dist(&x, centers, spec);
    let p = match spec {
        NormSpec::Lp(Exponent::Finite(p)) => *p,
        _ => unreachable!(),
    };

    // Subgradient phase.
    let step0 = g.max(1e-6) / 4.0;
    let mut best = (x.clone(), g);
    for t in 0..iters {
        let worst = centers
            .iter()
            .position_max_by(|a, b| {
                norm_of(&diff(&x, a), spec)
                    .unwrap()
                    .partial_cmp(&norm_of(&diff(&x, b), spec).unwrap())
                    .unwrap()
            })
            .unwrap();
        let v = diff(&x, centers[worst]);
        let nv = norm_of(&v, spec).unwrap();
        if nv < 1e-15 {
            break;
        }
        let scale = nv.powf(p - 1.0);
        let step = step0 / (1.0 + t as f64).sqrt();
        for j in 0..n {
            let grad = v[j].signum() * v[j].abs().powf(p - 1.0) / scale;
            x[j] -= step * grad;
        }
        g = max_dist(&x, centers, spec);
        if g < best.1 {
            best = (x.clone(), g);
        }
    }
    let (mut x, mut g) = best;

    // Pattern-search polish over compass plus diagonal directions.
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        dirs.push(e.clone());
        e[j] = -1.0;
        dirs.push(e);
    }
    if n <= 6 {
        for mask in 0u32..(1 << n) {
            let d: Vec<f64> = (0..n)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            dirs.push(d);
        }
    }
    let mut step = g.max(0.1) / 2.0;
    let mut evals = 0usize;
    while step > 1e-10 && evals < 200_000 {
        let mut improved = false;
        for d in &dirs {
            let cand: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let gc = max_dist(&cand, centers, spec);
            evals += 1;
            // Demand real progress; cosmetic improvements must not keep the
            // step from shrinking.
            if gc < g - 1e-14 * (1.0 + g) {
                x = cand;
                g = gc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, g)
}

/// Minimum enclosing Euclidean ball (Welzl's algorithm with a deterministic
/// shuffle). The min-max distance to a finite set under the Euclidean norm
/// is exactly its radius.
pub fn min_enclosing_ball(points: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6562);
    order.shuffle(&mut rng);
    let pts: Vec<&Vec<f64>> = order.iter().map(|&i| &points[i]).collect();
    let mut boundary: Vec<&Vec<f64>> = Vec::new();
    welzl(&pts, pts.len(), &mut boundary)
}

fn welzl<'a>(
    pts: &[&'a Vec<f64>],
    n: usize,
    boundary: &mut Vec<&'a Vec<f64>>,
) -> (Vec<f64>, f64) {
    let dim = if boundary.is_empty() && n == 0 {
        return (vec![], 0.0);
    } else if !boundary.is_empty() {
        boundary[0].len()
    } else {
        pts[0].len()
    };
    if n == 0 || boundary.len() == dim + 1 {
        return circumsphere(boundary, dim);
    }
    let p = pts[n - 1];
    let (c, r) = welzl(pts, n - 1, boundary);
    let d: f64 = if c.is_empty() {
        f64::INFINITY
    } else {
        diff(p, &c).iter().map(|v| v * v).sum::<f64>().sqrt()
    };
    if d <= r + 1e-10 * (1.0 + r) {
        return (c, r);
    }
    boundary.push(p);
    let res = welzl(pts, n - 1, boundary);
    boundary.pop();
    res
}

/// Smallest sphere with the given points on its boundary (center in their
/// affine hull).
fn circumsphere(boundary: &[&Vec<f64>], dim: usize) -> (Vec<f64>, f64) {
    match boundary.len() {
        0 => (vec![0.0; dim], -1.0),
        1 => (boundary[0].clone(), 0.0),
        _ => {
            let base = boundary[0];
            let vs: Vec<Vec<f64>> = boundary[1..].iter().map(|q| diff(q, base)).collect();
            let k = vs.len();
            // Gram system: sum_j (v_i . v_j) lam_j = ||v_i||^2 / 2.
            let mut a = vec![vec![0.0; k + 1]; k];
            for i in 0..k {
                for j in 0..k {
                    a[i][j] = dot(&vs[i], &vs[j]);
                }
                a[i][k] = dot(&vs[i], &vs[i]) / 2.0;
            }
            // Gaussian elimination with partial pivoting.
            for col in 0..k {
                let piv = (col..k)
                    .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
                    .unwrap();
                a.swap(col, piv);
                if a[col][col].abs() < 1e-14 {
                    continue;
                }
                for row in 0..k {
                    if row != col {
                        let f = a[row][col] / a[col][col];
                        for c2 in col..=k {
                            a[row][c2] -= f * a[col][c2];
                        }
                    }
                }
            }
            let lam: Vec<f64> = (0..k)
                .map(|i| {
                    if a[i][i].abs() < 1e-14 {
                        0.0
                    } else {
                        a[i][k] / a[i][i]
                    }
                })
                .collect();
            let mut center = base.clone();
            for (l, v) in lam.iter().zip(&vs) {
                for j in 0..dim {
                    center[j] += l * v[j];
                }
            }
            let r = diff(boundary[0], &center)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            (center, r)
        }
    }
}

/// Downward-closed simplicial complex on indexed vertices, stored by
/// dimension as sorted vertex lists.
#[derive(Clone, Debug, Serialize)]
pub struct NerveComplex {
    pub vertex_count: usize,
    pub simplices: Vec<BTreeSet<Vec<usize>>>,
}

impl NerveComplex {
    pub fn contains(&self, simplex: &[usize]) -> bool {
        let d = simplex.len() - 1;
        self.simplices
            .get(d)
            .map_or(false, |s| s.contains(simplex))
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.get(dim).map_or(0, |s| s.len())
    }

    pub fn max_dim(&self) -> usize {
        self.simplices
            .iter()
            .rposition(|s| !s.is_empty())
            .unwrap_or(0)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, s)| {
                let c = s.len() as i64;
                if d % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }

    pub fn is_downward_closed(&self) -> bool {
        for d in 1..self.simplices.len() {
            for s in &self.simplices[d] {
                for skip in 0..s.len() {
                    let mut facet = s.clone();
                    facet.remove(skip);
                    if !self.contains(&facet) {
                        return false;
                    }
                }
            }
        }
        self.simplices
            .first()
            .map_or(true, |verts| verts.len() == self.vertex_count)
    }

    /// Connected components of the 1-skeleton by union-find; independent of
    /// the boundary-matrix route to betti_0.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertex_count).collect();
        fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        if let Some(edges) = self.simplices.get(1) {
            for e in edges {
                let (a, b) = (find(&mut parent, e[0]), find(&mut parent, e[1]));
                if a != b {
                    parent[a] = b;
                }
            }
        }
        (0..self.vertex_count)
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }
}

/// Builds the nerve incrementally: a candidate simplex is only tested when
/// all its facets are present. A marginal verdict aborts with the offending
/// subset rather than guessing.
pub fn build_nerve(sys: &BallSystem, max_dim: usize) -> Result<NerveComplex, NerveError> {
    let k = sys.centers.len();
    if max_dim > k.saturating_sub(1) {
        return Err(NerveError::BadMaxDim {
            max_dim,
            vertices: k,
        });
    }
    let mut simplices: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); max_dim + 1];
    for v in 0..k {
        simplices[0].insert(vec![v]);
    }
    for d in 1..=max_dim {
        let lower = simplices[d - 1].clone();
        for s in &lower {
            let start = s[s.len() - 1] + 1;
            'vertex: for v in start..k {
                let mut cand = s.clone();
                cand.push(v);
                // All facets must already be present.
                for skip in 0..cand.len() {
                    let mut facet = cand.clone();
                    facet.remove(skip);
                    if !simplices[d - 1].contains(&facet) {
                        continue 'vertex;
                    }
                }
                let verdict = balls_intersect(sys, &cand)?;
                match verdict.status {
                    FeasibilityStatus::Feasible => {
                        simplices[d].insert(cand);
                    }
                    FeasibilityStatus::Infeasible => {}
                    FeasibilityStatus::Marginal => {
                        return Err(NerveError::Marginal(cand));
                    }
                }
            }
        }
    }
    Ok(NerveComplex {
        vertex_count: k,
        simplices,
    })
}

/// Ranks of Z/2 homology, degrees 0..=max present dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiProfile {
    pub betti: Vec<usize>,
}

impl BettiProfile {
    /// True when the reduced profile vanishes: one component, nothing above.
    pub fn is_trivial(&self) -> bool {
        self.betti.first() == Some(&1) && self.betti.iter().skip(1).all(|&b| b == 0)
    }
}

fn gf2_rank(rows: &mut Vec<Vec<u64>>, ncols: usize) -> usize {
    let mut rank = 0;
    for col in 0..ncols {
        let word = col / 64;
        let bit = 1u64 << (col % 64);
        let pivot = (rank..rows.len()).find(|&r| rows[r][word] & bit != 0);
        if let Some(p) = pivot {
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[word] & bit != 0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

fn boundary_rank(complex: &NerveComplex, d: usize) -> usize {
    if d == 0 || complex.count(d) == 0 {
        return 0;
    }
    let faces: Vec<&Vec<usize>> = complex.simplices[d - 1].iter().collect();
    let face_index: std::collections::HashMap<&Vec<usize>, usize> =
        faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let ncols = complex.count(d);
    let words = ncols.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = vec![vec![0u64; words]; faces.len()];
    for (col, s) in complex.simplices[d].iter().enumerate() {
        for skip in 0..s.len() {
            let mut facet = s.clone();
            facet.remove(skip);
            let r = face_index[&facet];
            rows[r][col / 64] ^= 1u64 << (col % 64);
        }
    }
    gf2_rank(&mut rows, ncols)
}

/// Betti numbers over Z/2 via boundary-matrix row reduction:
/// betti_k = dim C_k - rank d_k - rank d_{k+1}.
pub fn betti_numbers(complex: &NerveComplex) -> BettiProfile {
    let top = complex.max_dim();
    let ranks: Vec<usize> = (0..=top + 1).map(|d| boundary_rank(complex, d)).collect();
    let betti = (0..=top)
        .map(|d| complex.count(d) - ranks[d] - ranks[d + 1])
        .collect();
    BettiProfile { betti }
}

fn for_each_barycentric<F: FnMut(&[f64]) -> bool>(k: usize, steps: usize, f: &mut F) -> bool {
    // Returns false if the visitor stopped early.
    fn recurse<F: FnMut(&[f64]) -> bool>(
        weights: &mut Vec<f64>,
        idx: usize,
        remaining: usize,
        steps: usize,
        f: &mut F,
    ) -> bool {
        if idx == weights.len() - 1 {
            weights[idx] = remaining as f64 / steps as f64;
            return f(weights);
        }
        for w in 0..=remaining {
            weights[idx] = w as f64 / steps as f64;
            if !recurse(weights, idx + 1, remaining - w, steps, f) {
                return false;
            }
        }
        true
    }
    let mut weights = vec![0.0; k];
    recurse(&mut weights, 0, steps, steps, f)
}

/// Sampling-based admissibility check: the hull of the centers is swept by
/// barycentric grids over every support of size <= dim + 1 (Caratheodory
/// covers the hull) plus Dirichlet-random samples. Returns the first
/// uncovered sample as a refutation witness; a `true` verdict holds up to
/// the sampling resolution.
pub fn check_admissible(
    sys: &BallSystem,
    grid_steps: usize,
    random_samples: usize,
    seed: u64,
) -> (bool, Option<Vec<f64>>) {
    assert!(grid_steps >= 10, "grid_steps must be at least 10");
    let k = sys.centers.len();
    let n = sys.dim();
    let m = k.min(n + 1);
    let covered = |x: &[f64]| {
        sys.centers
            .iter()
            .any(|c| norm_of(&diff(x, c), &sys.spec).unwrap() <= sys.radius + FEAS_TOL)
    };

    let mut uncovered: Option<Vec<f64>> = None;
    for support in (0..k).combinations(m) {
        let done = for_each_barycentric(m, grid_steps, &mut |w: &[f64]| {
            let mut x = vec![0.0; n];
            for (wi, &ci) in w.iter().zip(&support) {
                for j in 0..n {
                    x[j] += wi * sys.centers[ci][j];
                }
            }
            if covered(&x) {
                true
            } else {
                uncovered = Some(x);
                false
            }
        });
        if !done {
            return (false, uncovered);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random_samples {
        let mut w: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.gen::<f64>()).ln().max(1e-300))
            .collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let mut x = vec![0.0; n];
        for (wi, c) in w.iter().zip(&sys.centers) {
            for j in 0..n {
                x[j] += wi * c[j];
            }
        }
        if !covered(&x) {
            return (false, Some(x));
        }
    }
    (true, None)
}

/// Generates a sampled-admissible system: random centers, radius set to the
/// coarse covering radius of their hull inflated by 5%.
pub fn random_admissible(
    spec: &NormSpec,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<BallSystem, NerveError> {
    assert!(n >= 2, "random_admissible requires n >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();

    // Coarse covering radius of the hull.
    let mut r0 = 0.0_f64;
    {
        let m = count.min(n + 1);
        let mut visit = |x: &[f64]| {
            let d = centers
                .iter()
                .map(|c| norm_of(&diff(x, c), spec).unwrap())
                .fold(f64::INFINITY, f64::min);
            r0 = r0.max(d);
            true
        };
        for support in (0..count).combinations(m) {
            for_each_barycentric(m, 8, &mut |w: &[f64]| {
                let mut x = vec![0.0; n];
                for (wi, &ci) in w.iter().zip(&support) {
                    for j in 0..n {
                        x[j] += wi * centers[ci][j];
                    }
                }
                visit(&x)
            });
        }
        for _ in 0..512 {
            let mut w: Vec<f64> = (0..count)
                .map(|_| -(1.0 - rng.gen::<f64>()).ln().max(1e-300))
                .collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            let mut x = vec![0.0; n];
            for (wi, c) in w.iter().zip(&centers) {
                for j in 0..n {
                    x[j] += wi * c[j];
                }
            }
            visit(&x);
        }
    }
    // The exact covering radius of the hull is the deviation of the center
    // set; the sampled value alone can miss pockets between grid points,
    // which would punch a spurious hole in the union.
    let bound = centers
        .iter()
        .map(|c| norm_of(c, spec).unwrap())
        .fold(0.0_f64, f64::max);
    if let Ok(cfg) =
        crate::deviation::PointConfig::new(centers.clone(), spec.clone(), bound.max(1e-9))
    {
        r0 = r0.max(crate::deviation::deviation_lower(&cfg, 8, seed).lower);
    }
    let radius = if r0 > 0.0 { 1.05 * r0 } else { 0.5 };
    Ok(BallSystem {
        radius,
        spec: spec.clone(),
        centers,
    })
}

/// The four-ball system in l1^3 whose union covers the hull of its centers
/// but leaves a hole: the nerve is the boundary of the 3-simplex.
pub fn example_l1_system() -> BallSystem {
    BallSystem {
        radius: 1.0,
        spec: NormSpec::l1(),
        centers: vec![
            vec![-2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            vec![1.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0],
            vec![1.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0],
            vec![-1.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0],
        ],
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleL1Report {
    pub checks: Vec<SubCheck>,
    pub betti: Vec<usize>,
    pub witness_distances: Vec<f64>,
    pub pass: bool,
}

/// End-to-end verification of the four-ball example: admissibility, the
/// sphere-shaped nerve, Betti profile (1, 0, 1), coverage of the boundary of
/// the inner tetrahedron, and the uncovered interior witness.
pub fn verify_example_l1() -> Result<ExampleL1Report, NerveError> {
    let sys = example_l1_system();
    let mut checks = Vec::new();

    let (admissible, uncovered) = check_admissible(&sys, 100, 2_000, 0);
    checks.push(SubCheck {
        name: "admissible_at_grid_100",
        pass: admissible,
        detail: match &uncovered {
            Some(x) => format!("uncovered sample {x:?}"),
            None => "all samples covered".to_string(),
        },
    });

    let nerve = build_nerve(&sys, 3)?;
    let shape_ok = nerve.count(1) == 6 && nerve.count(2) == 4 && nerve.count(3) == 0;
    checks.push(SubCheck {
        name: "nerve_is_boundary_of_3_simplex",
        pass: shape_ok,
        detail: format!(
            "edges {}, triangles {}, tetrahedra {}",
            nerve.count(1),
            nerve.count(2),
            nerve.count(3)
        ),
    });

    let betti = betti_numbers(&nerve);
    let betti_ok = betti.betti == vec![1, 0, 1];
    checks.push(SubCheck {
        name: "betti_profile_1_0_1",
        pass: betti_ok,
        detail: format!("{:?}", betti.betti),
    });

    // Boundary of the inner tetrahedron b1 b2 b3 b4 is covered.
    let b = [
        vec![1.0 / 3.0, 1.0 / 12.0, 1.0 / 12.0],
        vec![1.0 / 12.0, 1.0 / 3.0, 1.0 / 12.0],
        vec![1.0 / 12.0, 1.0 / 12.0, 1.0 / 3.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    ];
    let mut facets_ok = true;
    let mut facet_detail = "all facet samples covered".to_string();
    for facet in (0..4).combinations(3) {
        for_each_barycentric(3, 200, &mut |w: &[f64]| {
            let mut x = vec![0.0; 3];
            for (wi, &bi) in w.iter().zip(&facet) {
                for j in 0..3 {
                    x[j] += wi * b[bi][j];
                }
            }
            let cov = sys
                .centers
                .iter()
                .any(|c| norm_of(&diff(&x, c), &sys.spec).unwrap() <= sys.radius + FEAS_TOL);
            if !cov {
                facets_ok = false;
                facet_detail = format!("uncovered facet sample {x:?}");
            }
            cov
        });
    }
    checks.push(SubCheck {
        name: "tetrahedron_boundary_covered",
        pass: facets_ok,
        detail: facet_detail,
    });

    // Interior witness at l1 distance 9/8 from every center.
    let w = vec![5.0 / 24.0; 3];
    let witness_distances: Vec<f64> = sys
        .centers
        .iter()
        .map(|c| norm_of(&diff(&w, c), &sys.spec).unwrap())
        .collect();
    let witness_ok = witness_distances
        .iter()
        .all(|&d| d > 1.0 && (d - 9.0 / 8.0).abs() < 1e-12);
    checks.push(SubCheck {
        name: "interior_witness_at_distance_9_8",
        pass: witness_ok,
        detail: format!("{witness_distances:?}"),
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(ExampleL1Report {
        checks,
        betti: betti.betti,
        witness_distances,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SectionCoverReport {
    pub eta: f64,
    pub minmax: f64,
    pub worst_gauge: f64,
    pub center: Vec<f64>,
    pub samples: usize,
    pub offset: f64,
    pub pass: bool,
}

/// Builds an orthonormal (Euclidean) basis of the kernel of `p`.
fn kernel_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    let np = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let unit: Vec<f64> = p.iter().map(|v| v / np).collect();
    let mut basis: Vec<Vec<f64>> = vec![unit];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for i in 0..n {
                e[i] -= c * b[i];
            }
        }
        let ne = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ne > 1e-8 {
            e.iter_mut().for_each(|v| *v /= ne);
            basis.push(e);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Support point: x in the unit ball maximizing <p, x>, with the maximum
/// value. Ties in the non-smooth cases use the l1 / l_inf selection rules.
fn support_point(spec: &NormSpec, p: &[f64]) -> Result<(Vec<f64>, f64), NerveError> {
    let n = p.len();
    match spec {
        NormSpec::Lp(q) if q.is_one() => {
            let mut best = 0;
            for j in 1..n {
                if p[j].abs() > p[best].abs() + 1e-15 {
                    best = j;
                }
            }
            let mut x = vec![0.0; n];
            x[best] = if p[best] < 0.0 { -1.0 } else { 1.0 };
            Ok((x, p[best].abs()))
        }
        NormSpec::Lp(Exponent::Inf) => {
            let x: Vec<f64> = p
                .iter()
                .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
                .collect();
            let val = p.iter().map(|v| v.abs()).sum();
            Ok((x, val))
        }
        NormSpec::Lp(Exponent::Finite(q)) => {
            let pair = crate::space::dual_exponent(Exponent::Finite(*q)).unwrap();
            let qd = pair.p_dual.as_f64();
            let npd = crate::space::dual_norm_lp(p, Exponent::Finite(*q))?;
            if npd == 0.0 {
                return Err(NerveError::DegenerateSection);
            }
            let scale = npd.powf(qd - 1.0);
            let x: Vec<f64> = p
                .iter()
                .map(|&v| v.signum() * v.abs().powf(qd - 1.0) / scale)
                .collect();
            Ok((x, npd))
        }
        NormSpec::Polyhedral(fs) => {
            // max <p, x> over the polytope gauge ball, by LP on split x.
            let nv = 2 * n;
            let mut lp = Problem::new(nv);
            for j in 0..n {
                lp.objective[j] = -p[j];
                lp.objective[n + j] = p[j];
            }
            for f in fs {
                let mut row = vec![0.0; nv];
                for j in 0..n {
                    row[j] = f[j];
                    row[n + j] = -f[j];
                }
                lp.constrain(row, Rel::Le, 1.0);
            }
            let sol = lp.solve()?;
            let x: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
            Ok((x, -sol.objective))
        }
    }
}

/// Checks Corollary-style section covering: the section Q of the unit ball
/// at `offset` must be covered by a translate of eta P, where P is the
/// central section and eta = min(2k/(k+1), the zeta upper bound). Sampled
/// on Q; the translate is optimized exactly (LP) for polyhedral norms and by
/// pattern search otherwise.
#[allow(clippy::too_many_arguments)]
pub fn section_cover_check(
    spec: &NormSpec,
    n: usize,
    functional: &[f64],
    offset: f64,
    k: usize,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<SectionCoverReport, NerveError> {
    if k != n - 1 {
        return Err(NerveError::BadSectionDim { k, dim: n });
    }
    assert!(offset.abs() < 1.0, "offset must satisfy |offset| < 1");

    // Normalize the functional to unit support value on the ball.
    let (_, sup) = support_point(spec, functional)?;
    if sup <= 1e-12 {
        return Err(NerveError::DegenerateSection);
    }
    let p: Vec<f64> = functional.iter().map(|v| v / sup).collect();
    let (x_star, _) = support_point(spec, &p)?;
    let x0: Vec<f64> = x_star.iter().map(|v| offset * v).collect();
    if norm_of(&x0, spec)? > 1.0 - 1e-9 {
        return Err(NerveError::DegenerateSection);
    }
    let basis = kernel_basis(&p);
    if basis.len() != n - 1 {
        return Err(NerveError::DegenerateSection);
    }

    // Sample Q: mostly boundary points of the section, some interior.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q_samples: Vec<Vec<f64>> = Vec::with_capacity(samples);
    for s in 0..samples {
        let coeffs: Vec<f64> = (0..basis.len())
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut z = vec![0.0; n];
        for (c, b) in coeffs.iter().zip(&basis) {
            for j in 0..n {
                z[j] += c * b[j];
            }
        }
        let nz = norm_of(&z, spec)?;
        if nz < 1e-12 {
            continue;
        }
        // ||x0 + t z|| is convex with value < 1 at t = 0: bisect the crossing.
        let at = |t: f64| {
            let v: Vec<f64> = x0.iter().zip(&z).map(|(a, b)| a + t * b).collect();
            norm_of(&v, spec).unwrap()
        };
        let mut hi = 1.0 / nz;
        let mut grow = 0;
        while at(hi) < 1.0 && grow < 60 {
            hi *= 2.0;
            grow += 1;
        }
        if at(hi) < 1.0 {
            return Err(NerveError::DegenerateSection);
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if at(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_boundary = lo;
        let t = if s % 4 == 3 {
            rng.gen::<f64>() * t_boundary
        } else {
            t_boundary
        };
        q_samples.push(x0.iter().zip(&z).map(|(a, b)| a + t * b).collect());
    }
    if q_samples.is_empty() {
        return Err(NerveError::DegenerateSection);
    }

    let eta = (2.0 * k as f64 / (k as f64 + 1.0)).min(zeta_upper(spec, n).0);

    // Best translate c = x0 + V w minimizing max_q ||q - c||. Inside the
    // offset hyperplane the gauge of eta P is just the norm over eta.
    let d_samples: Vec<Vec<f64>> = q_samples.iter().map(|q| diff(q, &x0)).collect();
    let nb = basis.len();
    // Euclidean and other smooth exponents share the pattern-search route;
    // polyhedral norms (including l1 and l_inf) get an exact LP.
    let (w_best, minmax) = match spec {
        NormSpec::Lp(Exponent::Finite(pp)) if *pp > 1.0 => {
            section_translate_pattern(&d_samples, &basis, spec, nb)
        }
        _ => section_translate_lp(&d_samples, &basis, spec, nb)?,
    };
    let mut center = x0.clone();
    for (w, b) in w_best.iter().zip(&basis) {
        for j in 0..n {
            center[j] += w * b[j];
        }
    }

    let worst_gauge = minmax / eta;
    Ok(SectionCoverReport {
        eta,
        minmax,
        worst_gauge,
        center,
        samples: q_samples.len(),
        offset,
        pass: worst_gauge <= 1.0 + tol,
    })
}

fn section_translate_lp(
    d_samples: &[Vec<f64>],
    basis: &[Vec<f64>],
    spec: &NormSpec,
    nb: usize,
) -> Result<(Vec<f64>, f64), NerveError> {
    let n = basis[0].len();
    let s = d_samples.len();
    match spec {
        NormSpec::Lp(p) if p.is_one() => {
            // vars: w+ (nb), w- (nb), u (s*n), t.
            let nv = 2 * nb + s * n + 1;
            let t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for (i, d) in d_samples.iter().enumerate() {
                for j in 0..n {
                    let u = 2 * nb + i * n + j;
                    let mut pos = vec![0.0; nv];
                    let mut neg = vec![0.0; nv];
                    for m in 0..nb {
                        pos[m] = -basis[m][j];
                        pos[nb + m] = basis[m][j];
                        neg[m] = basis[m][j];
                        neg[nb + m] = -basis[m][j];
                    }
                    pos[u] = -1.0;
                    neg[u] = -1.0;
                    lp.constrain(pos, Rel::Le, -d[j]);
                    lp.constrain(neg, Rel::Le, d[j]);
                }
                let mut cap = vec![0.0; nv];
                for j in 0..n {
                    cap[2 * nb + i * n + j] = 1.0;
                }
                cap[t_index] = -1.0;
                lp.constrain(cap, Rel::Le, 0.0);
            }
            let sol = lp.solve()?;
            let w: Vec<f64> = (0..nb).map(|m| sol.x[m] - sol.x[nb + m]).collect();
            Ok((w, sol.x[t_index]))
        }
        NormSpec::Lp(Exponent::Inf) => {
            let nv = 2 * nb + 1;
            let t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for d in d_samples {
                for j in 0..n {
                    let mut pos = vec![0.0; nv];
                    let mut neg = vec![0.0; nv];
                    for m in 0..nb {
                        pos[m] = -basis[m][j];
                        pos[nb + m] = basis[m][j];
                        neg[m] = basis[m][j];
                        neg[nb + m] = -basis[m][j];
                    }
                    pos[t_index] = -1.0;
                    neg[t_index] = -1.0;
                    lp.constrain(pos, Rel::Le, -d[j]);
                    lp.constrain(neg, Rel::Le, d[j]);
                }
            }
            let sol = lp.solve()?;
            let w: Vec<f64> = (0..nb).map(|m| sol.x[m] - sol.x[nb + m]).collect();
            Ok((w, sol.x[t_index]))
        }
        NormSpec::Polyhedral(fs) => {
            let nv = 2 * nb + 1;
            let t_index = nv - 1;
            let mut lp = Problem::new(nv);
            lp.objective[t_index] = 1.0;
            for d in d_samples {
                for f in fs {
                    let mut row = vec![0.0; nv];
                    for m in 0..nb {
                        let fb = dot(f, &basis[m]);
                        row[m] = -fb;
                        row[nb + m] = fb;
                    }
                    row[t_index] = -1.0;
                    lp.constrain(row, Rel::Le, -dot(f, d));
                }
            }
            let sol = lp.solve()?;
            let w: Vec<f64> = (0..nb).map(|m| sol.x[m] - sol.x[nb + m]).collect();
            Ok((w, sol.x[t_index]))
        }
        NormSpec::Lp(_) => Ok(section_translate_pattern(d_samples, basis, spec, nb)),
    }
}

fn section_translate_pattern(
    d_samples: &[Vec<f64>],
    basis: &[Vec<f64>],
    spec: &NormSpec,
    nb: usize,
) -> (Vec<f64>, f64) {
    let n = basis[0].len();
    let eval = |w: &[f64]| -> f64 {
        let mut shift = vec![0.0; n];
        for (wm, b) in w.iter().zip(basis) {
            for j in 0..n {
                shift[j] += wm * b[j];
            }
        }
        d_samples
            .iter()
            .map(|d| {
                let r: Vec<f64> = d.iter().zip(&shift).map(|(a, b)| a - b).collect();
                norm_of(&r, spec).unwrap()
            })
            .fold(0.0_f64, f64::max)
    };
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for m in 0..nb {
        let mut e = vec![0.0; nb];
        e[m] = 1.0;
        dirs.push(e.clone());
        e[m] = -1.0;
        dirs.push(e);
    }
    if nb <= 6 {
        for mask in 0u32..(1 << nb) {
            dirs.push(
                (0..nb)
                    .map(|m| if mask >> m & 1 == 1 { -1.0 } else { 1.0 })
                    .collect(),
            );
        }
    }
    let mut w = vec![0.0; nb];
    let mut g = eval(&w);
    let mut step = 0.5;
    let mut rounds = 0usize;
    while step > 1e-9 && rounds < 20_000 {
        let mut improved = false;
        for d in &dirs {
            let cand: Vec<f64> = w.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let gc = eval(&cand);
            if gc < g - 1e-14 * (1.0 + g) {
                w = cand;
                g = gc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
        rounds += 1;
    }
    (w, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1() -> NormSpec {
        NormSpec::l1()
    }

    #[test]
    fn single_ball_is_feasible_with_center_witness() {
        let sys = BallSystem {
            radius: 0.5,
            spec: l1(),
            centers: vec![vec![1.0, 2.0]],
        };
        let v = balls_intersect(&sys, &[0]).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert_eq!(v.witness.unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn touching_l1_balls_are_feasible_with_zero_margin() {
        // Centers at l1 distance 2, radius 1: they share exactly one point.
        let sys = example_l1_system();
        let v = balls_intersect(&sys, &[0, 1]).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Feasible);
        assert!(v.margin.abs() < 1e-9, "margin {}", v.margin);
    }

    #[test]
    fn quadruple_in_example_is_infeasible_by_one_eighth() {
        let sys = example_l1_system();
        let v = balls_intersect(&sys, &[0, 1, 2, 3]).unwrap();
        assert_eq!(v.status, FeasibilityStatus::Infeasible);
        assert!((v.margin + 0.125).abs() < 1e-7, "margin {}", v.margin);
    }

    #[test]
    fn euclidean_pair_meets_iff_distance_at_most_two_radii() {
        let spec = NormSpec::l2();
        let mk = |d: f64| BallSystem {
            radius: 1.0,
            spec: spec.clone(),
            centers: vec![vec![0.0, 0.0, 0.0], vec![d, 0.0, 0.0]],
        };
        let near = balls_intersect(&mk(1.9), &[0, 1]).unwrap();
        assert_eq!(near.status, FeasibilityStatus::Feasible);
        let far = balls_intersect(&mk(2.1), &[0, 1]).unwrap();
        assert_eq!(far.status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn min_enclosing_ball_of_two_points_is_midpoint() {
        let (c, r) = min_enclosing_ball(&[vec![0.0, 0.0], vec![2.0, 0.0]]);
        assert!((c[0] - 1.0).abs() < 1e-9 && c[1].abs() < 1e-9);
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_enclosing_ball_of_obtuse_triangle_uses_longest_edge() {
        let pts = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![2.0, 0.5]];
        let (c, r) = min_enclosing_ball(&pts);
        assert!((r - 2.0).abs() < 1e-9);
        assert!((c[0] - 2.0).abs() < 1e-9 && c[1].abs() < 1e-9);
    }

    #[test]
    fn smooth_p_pair_classifies_clear_cases() {
        let spec = NormSpec::lp(3.0).unwrap();
        let mk = |d: f64| BallSystem {
            radius: 1.0,
            spec: spec.clone(),
            centers: vec![vec![0.0, 0.0], vec![d, 0.0]],
        };
        let near = balls_intersect(&mk(1.5), &[0, 1]).unwrap();
        assert_eq!(near.status, FeasibilityStatus::Feasible);
        let far = balls_intersect(&mk(2.5), &[0, 1]).unwrap();
        assert_eq!(far.status, FeasibilityStatus::Infeasible);
    }

    #[test]
    fn nerve_of_example_is_sphere() {
        let sys = example_l1_system();
        let nerve = build_nerve(&sys, 3).unwrap();
        assert!(nerve.is_downward_closed());
        assert_eq!(nerve.count(0), 4);
        assert_eq!(nerve.count(1), 6);
        assert_eq!(nerve.count(2), 4);
        assert_eq!(nerve.count(3), 0);
        assert_eq!(nerve.euler_characteristic(), 2);
        assert_eq!(nerve.component_count(), 1);
        let betti = betti_numbers(&nerve);
        assert_eq!(betti.betti, vec![1, 0, 1]);
        assert!(!betti.is_trivial());
    }

    #[test]
    fn betti_of_hollow_square_is_circle() {
        // Four l1 balls at the corners of a square: adjacent centers are at
        // l1 distance 3 (balls meet at radius 1.6), diagonals at distance 6
        // and any triple has min-max distance 3, so the nerve is a 4-cycle.
        let sys = BallSystem {
            radius: 1.6,
            spec: l1(),
            centers: vec![
                vec![0.0, 0.0],
                vec![3.0, 0.0],
                vec![3.0, 3.0],
                vec![0.0, 3.0],
            ],
        };
        let nerve = build_nerve(&sys, 3).unwrap();
        assert_eq!(nerve.count(1), 4, "expected a 4-cycle");
        let betti = betti_numbers(&nerve);
        assert_eq!(betti.betti, vec![1, 1]);
    }

    #[test]
    fn betti_of_full_simplex_is_trivial() {
        let sys = BallSystem {
            radius: 3.0,
            spec: l1(),
            centers: vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![1.0, 1.0],
            ],
        };
        let nerve = build_nerve(&sys, 3).unwrap();
        assert_eq!(nerve.count(3), 1);
        assert!(betti_numbers(&nerve).is_trivial());
    }

    #[test]
    fn build_nerve_rejects_bad_max_dim() {
        let sys = example_l1_system();
        assert!(matches!(
            build_nerve(&sys, 4),
            Err(NerveError::BadMaxDim { .. })
        ));
    }

    #[test]
    fn check_admissible_accepts_example_and_rejects_small_radius() {
        let sys = example_l1_system();
        let (ok, witness) = check_admissible(&sys, 40, 500, 7);
        assert!(ok && witness.is_none());
        let small = BallSystem {
            radius: 0.55,
            ..example_l1_system()
        };
        let (ok, witness) = check_admissible(&small, 40, 500, 7);
        assert!(!ok);
        let w = witness.unwrap();
        let min_d = small
            .centers
            .iter()
            .map(|c| norm_of(&diff(&w, c), &small.spec).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min_d > small.radius);
    }

    #[test]
    fn random_admissible_systems_pass_the_check() {
        for seed in 0..5 {
            let sys = random_admissible(&l1(), 3, 5, seed).unwrap();
            let (ok, _) = check_admissible(&sys, 15, 300, seed);
            assert!(ok, "seed {seed} produced an uncovered hull");
        }
    }

    #[test]
    fn random_admissible_is_deterministic() {
        let a = random_admissible(&NormSpec::l2(), 3, 4, 11).unwrap();
        let b = random_admissible(&NormSpec::l2(), 3, 4, 11).unwrap();
        assert_eq!(a.centers, b.centers);
        assert_eq!(a.radius, b.radius);
    }

    #[test]
    fn section_cover_holds_in_l1_3() {
        let report =
            section_cover_check(&l1(), 3, &[1.0, 0.0, 0.0], 0.3, 2, 120, 3, 1e-4).unwrap();
        assert!(report.pass, "worst gauge {}", report.worst_gauge);
        assert!(report.eta <= 4.0 / 3.0 + 1e-12);
    }

    #[test]
    fn section_cover_holds_in_linf_3_with_skew_functional() {
        let report = section_cover_check(
            &NormSpec::linf(),
            3,
            &[0.5, -1.0, 0.25],
            -0.4,
            2,
            120,
            9,
            1e-4,
        )
        .unwrap();
        assert!(report.pass, "worst gauge {}", report.worst_gauge);
    }

    #[test]
    fn section_cover_holds_in_euclidean_3() {
        let report =
            section_cover_check(&NormSpec::l2(), 3, &[0.0, 0.0, 1.0], 0.5, 2, 120, 5, 1e-4)
                .unwrap();
        // Hilbert sections recenter exactly: eta = 1 and the slice fits.
        assert!(report.pass, "worst gauge {}", report.worst_gauge);
    }

    #[test]
    fn section_cover_rejects_wrong_codimension() {
        assert!(matches!(
            section_cover_check(&l1(), 3, &[1.0, 0.0, 0.0], 0.3, 1, 50, 0, 1e-4),
            Err(NerveError::BadSectionDim { .. })
        ));
    }

    #[test]
    fn ball_system_round_trips_through_json() {
        let sys = example_l1_system();
        let json = serde_json::to_string(&sys).unwrap();
        let back: BallSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back.centers, sys.centers);
        assert_eq!(back.radius, sys.radius);
    }
}
