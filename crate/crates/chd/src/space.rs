//! Norms, dual exponents, norming functionals and polyhedral approximations
//! of unit balls. Everything downstream (hull distances, deviation search,
//! nerve feasibility) evaluates geometry through [`NormSpec`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the defining identities of a norming functional.
pub const TAU_J: f64 = 1e-9;

/// An l_p exponent. Infinity is a distinguished variant, never a large float,
/// so branches on p in {1, inf} are exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Inf,
}

impl Exponent {
    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Inf => f64::INFINITY,
        }
    }

    pub fn is_one(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 1.0)
    }

    pub fn is_inf(self) -> bool {
        matches!(self, Exponent::Inf)
    }

    /// 1/p with the convention 1/inf = 0.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Inf => 0.0,
        }
    }

    fn min(self, other: Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Inf, b) => b,
            (a, Exponent::Inf) => a,
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a.min(b)),
        }
    }

    fn max(self, other: Exponent) -> Exponent {
        match (self, other) {
            (Exponent::Inf, _) | (_, Exponent::Inf) => Exponent::Inf,
            (Exponent::Finite(a), Exponent::Finite(b)) => Exponent::Finite(a.max(b)),
        }
    }
}

/// Conjugate exponent pair together with r = min(p, p') and r' = max(p, p').
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualPair {
    pub p: Exponent,
    pub p_dual: Exponent,
    pub r: Exponent,
    pub r_dual: Exponent,
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("exponent must satisfy p >= 1, got {0}")]
    BadExponent(f64),
    #[error("dimension mismatch: vector has dim {got}, norm expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("functional set is not symmetric: missing -f for functional #{0}")]
    NotSymmetric(usize),
    #[error("functional set does not span the dual space (rank {rank} < dim {dim})")]
    NotSpanning { rank: usize, dim: usize },
    #[error("functional set is empty")]
    EmptyFunctionalSet,
    #[error("zero vector has no norming functional")]
    ZeroVector,
    #[error("polyhedral approximation exceeded the functional budget ({0})")]
    ApproxBudget(usize),
    #[error("polyhedral approximation requires an lp spec")]
    ApproxNeedsLp,
}

/// Which norm governs the geometry: an l_p norm or the gauge of a symmetric
/// polytope given by its defining functionals.
///
/// Serialized form: `{"norm":"lp","p":1.5}` (with `"inf"` for infinity) or
/// `{"norm":"polyhedral","functionals":[[...],...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpecWire", into = "NormSpecWire")]
pub enum NormSpec {
    Lp(Exponent),
    Polyhedral(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "lowercase")]
enum NormSpecWire {
    Lp { p: PWire },
    Polyhedral { functionals: Vec<Vec<f64>> },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PWire {
    Num(f64),
    Word(String),
}

impl TryFrom<NormSpecWire> for NormSpec {
    type Error = String;

    fn try_from(w: NormSpecWire) -> Result<Self, String> {
        match w {
            NormSpecWire::Lp { p: PWire::Num(p) } => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(format!("exponent must be a finite real >= 1, got {p}"));
                }
                Ok(NormSpec::Lp(Exponent::Finite(p)))
            }
            NormSpecWire::Lp { p: PWire::Word(w) } => {
                if w == "inf" {
                    Ok(NormSpec::Lp(Exponent::Inf))
                } else {
                    Err(format!("unknown exponent {w:?}, expected a number or \"inf\""))
                }
            }
            NormSpecWire::Polyhedral { functionals } => {
                NormSpec::polyhedral(functionals).map_err(|e| e.to_string())
            }
        }
    }
}

impl From<NormSpec> for NormSpecWire {
    fn from(s: NormSpec) -> Self {
        match s {
            NormSpec::Lp(Exponent::Finite(p)) => NormSpecWire::Lp { p: PWire::Num(p) },
            NormSpec::Lp(Exponent::Inf) => NormSpecWire::Lp {
                p: PWire::Word("inf".to_string()),
            },
            NormSpec::Polyhedral(functionals) => NormSpecWire::Polyhedral { functionals },
        }
    }
}

impl NormSpec {
    pub fn l1() -> Self {
        NormSpec::Lp(Exponent::Finite(1.0))
    }

    pub fn l2() -> Self {
        NormSpec::Lp(Exponent::Finite(2.0))
    }

    pub fn linf() -> Self {
        NormSpec::Lp(Exponent::Inf)
    }

    pub fn lp(p: f64) -> Result<Self, SpaceError> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(SpaceError::BadExponent(p));
        }
        Ok(NormSpec::Lp(Exponent::Finite(p)))
    }

    /// Validates that the functional set is symmetric (C = -C) and spans the
    /// dual space, then wraps it as a polyhedral norm.
    pub fn polyhedral(functionals: Vec<Vec<f64>>) -> Result<Self, SpaceError> {
        if functionals.is_empty() {
            return Err(SpaceError::EmptyFunctionalSet);
        }
        let dim = functionals[0].len();
        for (i, f) in functionals.iter().enumerate() {
            if f.len() != dim {
                return Err(SpaceError::DimensionMismatch {
                    got: f.len(),
                    expected: dim,
                });
            }
            let has_neg = functionals.iter().any(|g| {
                g.iter()
                    .zip(f.iter())
                    .all(|(gi, fi)| (gi + fi).abs() <= 1e-12)
            });
            if !has_neg {
                return Err(SpaceError::NotSymmetric(i));
            }
        }
        let rank = matrix_rank(&functionals);
        if rank < dim {
            return Err(SpaceError::NotSpanning { rank, dim });
        }
        Ok(NormSpec::Polyhedral(functionals))
    }

    /// The ambient dimension the spec is pinned to, if any. An l_p spec works
    /// in every dimension.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            NormSpec::Lp(_) => None,
            NormSpec::Polyhedral(fs) => Some(fs[0].len()),
        }
    }
}

fn matrix_rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = if m.is_empty() { 0 } else { m[0].len() };
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).max_by(|&a, &b| {
            m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()
        });
        match pivot {
            Some(p) if m[p][col].abs() > 1e-10 => {
                m.swap(rank, p);
                for i in 0..m.len() {
                    if i != rank {
                        let factor = m[i][col] / m[rank][col];
                        for j in col..ncols {
                            m[i][j] -= factor * m[rank][j];
                        }
                    }
                }
                rank += 1;
            }
            _ => {}
        }
    }
    rank
}

/// Evaluates the norm of `x` under `spec`.
pub fn norm_of(x: &[f64], spec: &NormSpec) -> Result<f64, SpaceError> {
    match spec {
        NormSpec::Lp(p) => Ok(lp_norm(x, *p)),
        NormSpec::Polyhedral(fs) => {
            if fs[0].len() != x.len() {
                return Err(SpaceError::DimensionMismatch {
                    got: x.len(),
                    expected: fs[0].len(),
                });
            }
            // Gauge of the polytope: max over the defining functionals.
            // Symmetry of the set makes the max nonnegative.
            Ok(fs
                .iter()
                .map(|f| dot(f, x))
                .fold(0.0_f64, f64::max))
        }
    }
}

fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Inf => x.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Exponent::Finite(p) => {
            let m = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
            m * s.powf(1.0 / p)
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// The conjugate exponent pair for p, exact at the endpoints.
pub fn dual_exponent(p: Exponent) -> Result<DualPair, SpaceError> {
    let p_dual = match p {
        Exponent::Inf => Exponent::Finite(1.0),
        Exponent::Finite(v) if v == 1.0 => Exponent::Inf,
        Exponent::Finite(v) if v > 1.0 => Exponent::Finite(v / (v - 1.0)),
        Exponent::Finite(v) => return Err(SpaceError::BadExponent(v)),
    };
    Ok(DualPair {
        p,
        p_dual,
        r: p.min(p_dual),
        r_dual: p.max(p_dual),
    })
}

/// A linear form x -> <coeffs, x> on the ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    pub coeffs: Vec<f64>,
}

impl Functional {
    pub fn apply(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }
}

/// A unit dual functional attaining ||y|| at y.
///
/// When the set of norming functionals is multivalued (p in {1, inf},
/// polyhedral gauges) a deterministic selection is made: the sign vector with
/// sign(0) := +1 for l1, full mass on the lexicographically smallest index of
/// maximal |y_i| for l_inf, and the lexicographically smallest maximizing
/// functional for polyhedral specs.
pub fn norming_functional(y: &[f64], spec: &NormSpec) -> Result<Functional, SpaceError> {
    let ny = norm_of(y, spec)?;
    if ny == 0.0 {
        return Err(SpaceError::ZeroVector);
    }
    let coeffs = match spec {
        NormSpec::Lp(Exponent::Finite(p)) if *p == 1.0 => y
            .iter()
            .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
            .collect(),
        NormSpec::Lp(Exponent::Inf) => {
            let mut best = 0;
            for i in 1..y.len() {
                if y[i].abs() > y[best].abs() + 1e-15 {
                    best = i;
                }
            }
            let mut c = vec![0.0; y.len()];
            c[best] = if y[best] < 0.0 { -1.0 } else { 1.0 };
            c
        }
        NormSpec::Lp(Exponent::Finite(p)) => {
            // Smooth case: p_i = sign(y_i) |y_i|^{p-1} / ||y||^{p-1}.
            let scale = ny.powf(p - 1.0);
            y.iter()
                .map(|&v| v.signum() * v.abs().powf(p - 1.0) / scale)
                .collect()
        }
        NormSpec::Polyhedral(fs) => {
            let mut best: Option<&Vec<f64>> = None;
            let mut best_val = f64::NEG_INFINITY;
            for f in fs {
                let v = dot(f, y);
                let better = v > best_val + 1e-12
                    || ((v - best_val).abs() <= 1e-12
                        && best.map_or(true, |b| lex_less(f, b)));
                if better {
                    best_val = v;
                    best = Some(f);
                }
            }
            best.unwrap().clone()
        }
    };
    Ok(Functional { coeffs })
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Dual norm of a functional with respect to an l_p spec (the conjugate norm).
pub fn dual_norm_lp(f: &[f64], p: Exponent) -> Result<f64, SpaceError> {
    let pair = dual_exponent(p)?;
    Ok(lp_norm(f, pair.p_dual))
}

/// Default budget for [`polyhedral_approx`].
pub const APPROX_BUDGET: usize = 200_000;

/// Replaces an l_p unit ball by a circumscribed polytope within Hausdorff
/// distance `eps`, returned as the polytope's defining functional set.
///
/// l1 and l_inf balls are already polyhedral and are returned exactly.
pub fn polyhedral_approx(
    spec: &NormSpec,
    dim: usize,
    eps: f64,
) -> Result<NormSpec, SpaceError> {
    assert!(dim >= 2, "polyhedral_approx requires dim >= 2");
    assert!(eps > 0.0, "polyhedral_approx requires eps > 0");
    let p = match spec {
        NormSpec::Lp(p) => *p,
        NormSpec::Polyhedral(_) => return Err(SpaceError::ApproxNeedsLp),
    };
    match p {
        Exponent::Finite(v) if v == 1.0 => {
            // Sign functionals: the l1 ball is the intersection of the 2^dim
            // half-spaces <s, x> <= 1.
            let mut fs = Vec::with_capacity(1 << dim);
            for mask in 0u32..(1 << dim) {
                let f: Vec<f64> = (0..dim)
                    .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                    .collect();
                fs.push(f);
            }
            NormSpec::polyhedral(fs)
        }
        Exponent::Inf => {
            let mut fs = Vec::with_capacity(2 * dim);
            for j in 0..dim {
                let mut f = vec![0.0; dim];
                f[j] = 1.0;
                fs.push(f.clone());
                f[j] = -1.0;
                fs.push(f);
            }
            NormSpec::polyhedral(fs)
        }
        Exponent::Finite(v) if v == 2.0 && dim == 2 => {
            // Regular circumscribed polygon: a fan of unit functionals with
            // angular step theta satisfying sec(theta/2) <= 1 + eps.
            let theta_max = 2.0 * (1.0 / (1.0 + eps)).acos();
            let mut m = (std::f64::consts::TAU / theta_max).ceil() as usize + 1;
            if m % 2 == 1 {
                m += 1;
            }
            m = m.max(4);
            if m > APPROX_BUDGET {
                return Err(SpaceError::ApproxBudget(APPROX_BUDGET));
            }
            let step = std::f64::consts::TAU / m as f64;
            let fs: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let a = k as f64 * step;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            NormSpec::polyhedral(fs)
        }
        _ => smooth_approx(p, dim, eps),
    }
}

/// Iterative construction for smooth l_p balls: seed with coordinate norming
/// functionals, then repeatedly add norming functionals at sampled boundary
/// directions where the polytope still sticks out beyond (1 + eps) B_1.
fn smooth_approx(p: Exponent, dim: usize, eps: f64) -> Result<NormSpec, SpaceError> {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    let spec = NormSpec::Lp(p);
    let mut fs: Vec<Vec<f64>> = Vec::new();
    let push_pair = |fs: &mut Vec<Vec<f64>>, f: Vec<f64>| {
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        fs.push(f);
        fs.push(neg);
    };
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        push_pair(&mut fs, e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x706f6c79);
    loop {
        let poly = NormSpec::Polyhedral(fs.clone());
        let mut worst: Vec<Vec<f64>> = Vec::new();
        for _ in 0..10_000 {
            let dir: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let g = norm_of(&dir, &poly)?;
            if g == 0.0 {
                continue;
            }
            let boundary: Vec<f64> = dir.iter().map(|v| v / g).collect();
            let err = norm_of(&boundary, &spec)? - 1.0;
            if err > eps {
                worst.push(boundary);
                if worst.len() >= 64 {
                    break;
                }
            }
        }
        if worst.is_empty() {
            return NormSpec::polyhedral(fs);
        }
        for w in worst {
            let f = norming_functional(&w, &spec)?;
            push_pair(&mut fs, f.coeffs);
            if fs.len() > APPROX_BUDGET {
                return Err(SpaceError::ApproxBudget(APPROX_BUDGET));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn specs_under_test() -> Vec<NormSpec> {
        vec![
            NormSpec::l1(),
            NormSpec::lp(1.5).unwrap(),
            NormSpec::l2(),
            NormSpec::lp(3.0).unwrap(),
            NormSpec::linf(),
            NormSpec::polyhedral(vec![
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, -1.0],
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_of(&[1.0, 1.0], &NormSpec::l1()).unwrap(), 2.0);
        assert_eq!(norm_of(&[3.0, -4.0], &NormSpec::linf()).unwrap(), 4.0);
        let poly = NormSpec::polyhedral(vec![
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
        ])
        .unwrap();
        // max over the six functionals at (1,0) is 1, attained by (1,0) and (1,1).
        assert_eq!(norm_of(&[1.0, 0.0], &poly).unwrap(), 1.0);
    }

    #[test]
    fn dual_exponent_examples() {
        let d = dual_exponent(Exponent::Finite(2.0)).unwrap();
        assert_eq!(d.p_dual, Exponent::Finite(2.0));
        assert_eq!(d.r, Exponent::Finite(2.0));
        assert_eq!(d.r_dual, Exponent::Finite(2.0));

        let d = dual_exponent(Exponent::Finite(1.0)).unwrap();
        assert_eq!(d.p_dual, Exponent::Inf);
        assert_eq!(d.r, Exponent::Finite(1.0));
        assert_eq!(d.r_dual, Exponent::Inf);
        assert_eq!(d.r_dual.reciprocal(), 0.0);

        let d = dual_exponent(Exponent::Finite(4.0)).unwrap();
        assert!((d.p_dual.as_f64() - 4.0 / 3.0).abs() < 1e-15);
        assert!((d.r.as_f64() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.r_dual, Exponent::Finite(4.0));
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(NormSpec::lp(0.5).is_err());
        assert!(dual_exponent(Exponent::Finite(0.9)).is_err());
    }

    #[test]
    fn norm_axioms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in specs_under_test() {
            let dim = spec.ambient_dim().unwrap_or(4);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let lam: f64 = rng.gen_range(-3.0..3.0);
                let nx = norm_of(&x, &spec).unwrap();
                let ny = norm_of(&y, &spec).unwrap();
                let lx: Vec<f64> = x.iter().map(|v| lam * v).collect();
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                let nlx = norm_of(&lx, &spec).unwrap();
                assert!(
                    (nlx - lam.abs() * nx).abs() <= 1e-12 * (1.0 + nlx),
                    "homogeneity failed for {spec:?}"
                );
                assert!(
                    norm_of(&sum, &spec).unwrap() <= nx + ny + 1e-12,
                    "triangle inequality failed for {spec:?}"
                );
            }
            let zero = vec![0.0; dim];
            assert_eq!(norm_of(&zero, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn monotone_in_p() {
        let ps = [1.0, 1.3, 2.0, 2.7, 4.0, 10.0];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut prev = f64::INFINITY;
            for &p in &ps {
                let n = norm_of(&x, &NormSpec::lp(p).unwrap()).unwrap();
                assert!(n <= prev + 1e-12);
                prev = n;
            }
            let ninf = norm_of(&x, &NormSpec::linf()).unwrap();
            assert!(ninf <= prev + 1e-12);
        }
    }

    #[test]
    fn norming_functional_examples() {
        let f = norming_functional(&[1.0, 0.0], &NormSpec::l2()).unwrap();
        assert!((f.coeffs[0] - 1.0).abs() < TAU_J && f.coeffs[1].abs() < TAU_J);

        let s = 1.0 / 2.0_f64.sqrt();
        let f = norming_functional(&[s, s], &NormSpec::l2()).unwrap();
        assert!((f.coeffs[0] - s).abs() < TAU_J && (f.coeffs[1] - s).abs() < TAU_J);

        // Sign-vector functional attains the l1 norm.
        let f = norming_functional(&[1.0, 1.0], &NormSpec::l1()).unwrap();
        assert_eq!(f.coeffs, vec![1.0, 1.0]);
        assert!((f.apply(&[1.0, 1.0]) - 2.0).abs() < TAU_J);
    }

    #[test]
    fn norming_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for spec in specs_under_test() {
            let dim = spec.ambient_dim().unwrap_or(4);
            for _ in 0..300 {
                let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let ny = norm_of(&y, &spec).unwrap();
                if ny < 1e-6 {
                    continue;
                }
                let unit: Vec<f64> = y.iter().map(|v| v / ny).collect();
                let f = norming_functional(&unit, &spec).unwrap();
                assert!((f.apply(&unit) - 1.0).abs() <= TAU_J, "attainment for {spec:?}");
                if let NormSpec::Lp(p) = &spec {
                    assert!((dual_norm_lp(&f.coeffs, *p).unwrap() - 1.0).abs() <= TAU_J);
                }
            }
        }
    }

    #[test]
    fn polyhedral_rejects_asymmetric_and_degenerate() {
        assert!(NormSpec::polyhedral(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(NormSpec::polyhedral(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).is_err());
    }

    #[test]
    fn approx_l1_linf_exact() {
        let a = polyhedral_approx(&NormSpec::l1(), 3, 0.5).unwrap();
        match &a {
            NormSpec::Polyhedral(fs) => assert_eq!(fs.len(), 8),
            _ => panic!(),
        }
        let b = polyhedral_approx(&NormSpec::linf(), 3, 0.5).unwrap();
        match &b {
            NormSpec::Polyhedral(fs) => assert_eq!(fs.len(), 6),
            _ => panic!(),
        }
        // Exact: the gauge equals the original norm everywhere.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(
                (norm_of(&x, &a).unwrap() - norm_of(&x, &NormSpec::l1()).unwrap()).abs() < 1e-12
            );
            assert!(
                (norm_of(&x, &b).unwrap() - norm_of(&x, &NormSpec::linf()).unwrap()).abs() < 1e-12
            );
        }
    }

    #[test]
    fn approx_euclidean_2d_fan() {
        let eps = 0.05;
        let approx = polyhedral_approx(&NormSpec::l2(), 2, eps).unwrap();
        let fs = match &approx {
            NormSpec::Polyhedral(fs) => fs,
            _ => panic!(),
        };
        let step = std::f64::consts::TAU / fs.len() as f64;
        assert!(step <= 2.0 * (1.0 / (1.0 + eps)).acos());
        check_containment(&NormSpec::l2(), &approx, 2, eps);
    }

    #[test]
    fn approx_smooth_p_3d() {
        let eps = 0.1;
        for p in [1.5, 2.0, 3.0] {
            let spec = NormSpec::lp(p).unwrap();
            let approx = polyhedral_approx(&spec, 3, eps).unwrap();
            check_containment(&spec, &approx, 3, eps);
        }
    }

    /// B_1 subset B^c and gauge >= ||.|| / (1 + eps), sampled.
    fn check_containment(spec: &NormSpec, approx: &NormSpec, dim: usize, eps: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let dir: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let n = norm_of(&dir, spec).unwrap();
            if n == 0.0 {
                continue;
            }
            let u: Vec<f64> = dir.iter().map(|v| v / n).collect();
            let g = norm_of(&u, approx).unwrap();
            assert!(g <= 1.0 + 1e-12, "B_1 not contained in polytope");
            assert!(g >= 1.0 / (1.0 + eps) - 1e-9, "polytope too large");
        }
    }

    #[test]
    fn serde_round_trip() {
        let s: NormSpec = serde_json::from_str(r#"{"norm":"lp","p":1.5}"#).unwrap();
        assert_eq!(s, NormSpec::lp(1.5).unwrap());
        let s: NormSpec = serde_json::from_str(r#"{"norm":"lp","p":"inf"}"#).unwrap();
        assert_eq!(s, NormSpec::linf());
        let text = serde_json::to_string(&NormSpec::linf()).unwrap();
        assert_eq!(text, r#"{"norm":"lp","p":"inf"}"#);
        let s: NormSpec = serde_json::from_str(
            r#"{"norm":"polyhedral","functionals":[[1,0],[-1,0],[0,1],[0,-1]]}"#,
        )
        .unwrap();
        assert!(matches!(s, NormSpec::Polyhedral(_)));
        assert!(serde_json::from_str::<NormSpec>(r#"{"norm":"lp","p":0.3}"#).is_err());
    }
}
