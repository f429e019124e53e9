//! Checkers for the Schoenberg/Pichugov family of l_p energy inequalities.
//! The inequalities are theorems, so a negative margin on any instance
//! signals an implementation bug; the fuzz driver persists offenders to a
//! replay file.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{dual_exponent, norm_of, Exponent, NormSpec};

#[derive(Debug, Error)]
pub enum IneqError {
    #[error("weights must be nonnegative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("family is empty")]
    Empty,
    #[error("inequality 3 requires 1 <= p <= 2, got p = {0}")]
    BadExponentRange(f64),
    #[error("families must share dimension and exponent")]
    Mismatch,
}

/// Identifies which inequality a margin belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Centered,
    Schoenberg,
    Refined,
    TwoFamily,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityMargin {
    pub inequality_id: InequalityId,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

impl InequalityMargin {
    fn new(id: InequalityId, lhs: f64, rhs: f64) -> Self {
        InequalityMargin {
            inequality_id: id,
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }
}

/// A weighted point family in l_p^n together with its barycenter and the
/// exponents r = min(p, p'), r' = max(p, p').
///
/// r = min(p, p') <= 2 always, so the 1/r powers below never hit an infinite
/// exponent; r' = inf (at p in {1, inf}) only appears as 2^{-1/r'} = 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedFamily {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub p: Exponent,
    #[serde(skip)]
    pub barycenter: Vec<f64>,
    #[serde(skip)]
    pub r: f64,
    #[serde(skip, default = "placeholder_exponent")]
    pub r_dual: Exponent,
}

// Placeholder for skipped deserialization; revalidate() recomputes it.
fn placeholder_exponent() -> Exponent {
    Exponent::Inf
}

// Exponent serializes inside WeightedFamily as a plain number with inf
// spelled "inf", matching the NormSpec wire format.
impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(v) => s.serialize_f64(*v),
            Exponent::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(f64),
            Word(String),
        }
        match Wire::deserialize(d)? {
            Wire::Num(v) if v >= 1.0 && v.is_finite() => Ok(Exponent::Finite(v)),
            Wire::Num(v) => Err(serde::de::Error::custom(format!("bad exponent {v}"))),
            Wire::Word(w) if w == "inf" => Ok(Exponent::Inf),
            Wire::Word(w) => Err(serde::de::Error::custom(format!("bad exponent {w:?}"))),
        }
    }
}

impl WeightedFamily {
    pub fn new(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        p: Exponent,
    ) -> Result<Self, IneqError> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(IneqError::Empty);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || weights.iter().any(|&w| w < 0.0) {
            return Err(IneqError::BadWeights(sum));
        }
        let dim = points[0].len();
        if points.iter().any(|q| q.len() != dim) {
            return Err(IneqError::Mismatch);
        }
        let mut barycenter = vec![0.0; dim];
        for (w, q) in weights.iter().zip(&points) {
            for j in 0..dim {
                barycenter[j] += w * q[j];
            }
        }
        let pair = dual_exponent(p).map_err(|_| IneqError::BadExponentRange(p.as_f64()))?;
        let r = pair.r.as_f64();
        Ok(WeightedFamily {
            points,
            weights,
            p,
            barycenter,
            r,
            r_dual: pair.r_dual,
        })
    }

    /// Rebuild the derived fields after deserialization.
    pub fn revalidate(self) -> Result<Self, IneqError> {
        WeightedFamily::new(self.points, self.weights, self.p)
    }

    fn spec(&self) -> NormSpec {
        NormSpec::Lp(self.p)
    }

    fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm_of(&d, &self.spec()).unwrap()
    }

    /// sum_i alpha_i ||x_i - x_0||^r, before the 1/r root.
    fn centered_energy_pow(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.points)
            .map(|(w, q)| w * self.dist(q, &self.barycenter).powf(self.r))
            .sum()
    }

    /// sum_{i,j} alpha_i alpha_j ||x_i - x_j||^r, before the 1/r root.
    fn pairwise_energy_pow(&self) -> f64 {
        let k = self.points.len();
        let mut s = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                s += 2.0
                    * self.weights[i]
                    * self.weights[j]
                    * self.dist(&self.points[i], &self.points[j]).powf(self.r);
            }
        }
        s
    }

    fn max_point_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|q| norm_of(q, &self.spec()).unwrap())
            .fold(0.0_f64, f64::max)
    }
}

/// (sum alpha_i alpha_j ||x_i - x_j||^r)^{1/r}.
pub fn energy_pairwise(f: &WeightedFamily) -> f64 {
    f.pairwise_energy_pow().powf(1.0 / f.r)
}

/// (sum alpha_i ||x_i - x_0||^r)^{1/r}.
pub fn energy_centered(f: &WeightedFamily) -> f64 {
    f.centered_energy_pow().powf(1.0 / f.r)
}

fn half_pow_r_dual(r_dual: Exponent) -> f64 {
    // 2^{-1/r'}, with 2^0 = 1 at r' = inf.
    match r_dual {
        Exponent::Inf => 1.0,
        Exponent::Finite(v) => 2.0_f64.powf(-1.0 / v),
    }
}

/// Centered energy against pairwise energy.
pub fn check_ineq1(f: &WeightedFamily) -> InequalityMargin {
    InequalityMargin::new(
        InequalityId::Centered,
        energy_centered(f),
        half_pow_r_dual(f.r_dual) * energy_pairwise(f),
    )
}

/// Pairwise energy against the largest point norm.
pub fn check_ineq2(f: &WeightedFamily) -> InequalityMargin {
    InequalityMargin::new(
        InequalityId::Schoenberg,
        energy_pairwise(f),
        2.0_f64.powf(1.0 / f.r) * f.max_point_norm(),
    )
}

/// The strengthened form for 1 <= p <= 2, with the ((k-1)/k)^{2/p-1} factor.
pub fn check_ineq3(f: &WeightedFamily) -> Result<InequalityMargin, IneqError> {
    let p = match f.p {
        Exponent::Finite(v) if v <= 2.0 => v,
        other => return Err(IneqError::BadExponentRange(other.as_f64())),
    };
    let k = f.points.len() as f64;
    let factor = if k <= 1.0 {
        0.0
    } else {
        ((k - 1.0) / k).powf(2.0 / p - 1.0)
    };
    Ok(InequalityMargin::new(
        InequalityId::Refined,
        energy_pairwise(f),
        2.0_f64.powf(1.0 / f.r) * factor * f.max_point_norm(),
    ))
}

/// The two-family inequality on centered differences.
pub fn check_ineq4(
    f: &WeightedFamily,
    g: &WeightedFamily,
) -> Result<InequalityMargin, IneqError> {
    if f.p != g.p || f.barycenter.len() != g.barycenter.len() {
        return Err(IneqError::Mismatch);
    }
    let r = f.r;
    let mut lhs_pow = 0.0;
    for (a, x) in f.weights.iter().zip(&f.points) {
        let xc: Vec<f64> = x.iter().zip(&f.barycenter).map(|(v, c)| v - c).collect();
        for (b, y) in g.weights.iter().zip(&g.points) {
            let yc: Vec<f64> = y.iter().zip(&g.barycenter).map(|(v, c)| v - c).collect();
            lhs_pow += a * b * f.dist(&xc, &yc).powf(r);
        }
    }
    let rhs = half_pow_r_dual(f.r_dual)
        * (f.pairwise_energy_pow() + g.pairwise_energy_pow()).powf(1.0 / r);
    Ok(InequalityMargin::new(
        InequalityId::TwoFamily,
        lhs_pow.powf(1.0 / r),
        rhs,
    ))
}

/// One fuzz case: either a single family or a pair sharing p.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayCase {
    pub family: WeightedFamily,
    pub second: Option<WeightedFamily>,
    pub inequality_id: InequalityId,
}

pub fn random_family(rng: &mut impl Rng, p: Exponent, dim: usize, k: usize) -> WeightedFamily {
    let points: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut w: Vec<f64> = (0..k)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln().max(1e-300))
        .collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    // Renormalize exactly to absorb rounding.
    let s2: f64 = w.iter().sum();
    let last = w.len() - 1;
    w[last] += 1.0 - s2;
    WeightedFamily::new(points, w, p).unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzOutcome {
    pub cases_run: usize,
    pub worst_margin: f64,
    pub failures: Vec<ReplayCase>,
}

/// Runs `count` random families per inequality for one exponent; margins
/// below -1e-9 are collected as failures.
pub fn fuzz_exponent(p: Exponent, count: usize, seed: u64) -> FuzzOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    let mut cases_run = 0;
    let p_le_2 = matches!(p, Exponent::Finite(v) if v <= 2.0);

    for _ in 0..count {
        let dim = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=8);
        let fam = random_family(&mut rng, p, dim, k);

        let mut record = |m: &InequalityMargin,
                          fam: &WeightedFamily,
                          second: Option<&WeightedFamily>| {
            if m.margin < worst {
                worst = m.margin;
            }
            if m.margin < -1e-9 {
                failures.push(ReplayCase {
                    family: fam.clone(),
                    second: second.cloned(),
                    inequality_id: m.inequality_id,
                });
            }
        };

        record(&check_ineq1(&fam), &fam, None);
        record(&check_ineq2(&fam), &fam, None);
        cases_run += 2;
        if p_le_2 {
            record(&check_ineq3(&fam).unwrap(), &fam, None);
            cases_run += 1;
        }
        let l = rng.gen_range(1..=8);
        let second = random_family(&mut rng, p, dim, l);
        record(&check_ineq4(&fam, &second).unwrap(), &fam, Some(&second));
        cases_run += 1;
    }

    FuzzOutcome {
        cases_run,
        worst_margin: worst,
        failures,
    }
}

/// Re-evaluates a replayed case and returns its margin.
pub fn replay_case(case: &ReplayCase) -> Result<InequalityMargin, IneqError> {
    let fam = case.family.clone().revalidate()?;
    match case.inequality_id {
        InequalityId::Centered => Ok(check_ineq1(&fam)),
        InequalityId::Schoenberg => Ok(check_ineq2(&fam)),
        InequalityId::Refined => check_ineq3(&fam),
        InequalityId::TwoFamily => {
            let second = case
                .second
                .clone()
                .ok_or(IneqError::Mismatch)?
                .revalidate()?;
            check_ineq4(&fam, &second)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1_basis_family() -> WeightedFamily {
        let points = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        WeightedFamily::new(points, vec![1.0 / 3.0; 3], Exponent::Finite(1.0)).unwrap()
    }

    #[test]
    fn energies_on_degenerate_family() {
        let f = WeightedFamily::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![0.5, 0.5],
            Exponent::Finite(2.0),
        )
        .unwrap();
        assert_eq!(energy_pairwise(&f), 0.0);
        assert_eq!(energy_centered(&f), 0.0);
    }

    #[test]
    fn two_point_energies() {
        // d = ||a - b||, equal weights: pairwise = d 2^{-1/r}, centered = d/2.
        for p in [1.0, 1.5, 2.0, 3.0] {
            let f = WeightedFamily::new(
                vec![vec![0.0, 0.0], vec![0.6, -0.8]],
                vec![0.5, 0.5],
                Exponent::Finite(p),
            )
            .unwrap();
            let d = f.dist(&f.points[0], &f.points[1]);
            let r = f.r;
            assert!((energy_pairwise(&f) - d * 2.0_f64.powf(-1.0 / r)).abs() < 1e-12);
            assert!((energy_centered(&f) - d / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_basis_energies_and_tightness() {
        let f = l1_basis_family();
        // r = 1: pairwise = sum_{i != j} (1/9) * 2 = 4/3; centered = 4/3.
        assert!((energy_pairwise(&f) - 4.0 / 3.0).abs() < 1e-12);
        assert!((energy_centered(&f) - 4.0 / 3.0).abs() < 1e-12);
        // Inequality 1 is tight at the extremal configuration (r' = inf).
        let m = check_ineq1(&f);
        assert!((m.lhs - 4.0 / 3.0).abs() < 1e-12);
        assert!((m.rhs - 4.0 / 3.0).abs() < 1e-12);
        assert!(m.margin.abs() < 1e-12);
    }

    #[test]
    fn single_point_margins_zero() {
        let f = WeightedFamily::new(vec![vec![0.0, 0.0]], vec![1.0], Exponent::Finite(2.0))
            .unwrap();
        let m = check_ineq1(&f);
        assert_eq!(m.lhs, 0.0);
        assert_eq!(m.margin, 0.0);
        let m4 = check_ineq4(&f, &f).unwrap();
        assert_eq!(m4.lhs, 0.0);
        assert!(m4.rhs >= 0.0);
    }

    #[test]
    fn ineq3_rejects_large_p() {
        let f = WeightedFamily::new(
            vec![vec![1.0], vec![0.0]],
            vec![0.5, 0.5],
            Exponent::Finite(3.0),
        )
        .unwrap();
        assert!(check_ineq3(&f).is_err());
    }

    #[test]
    fn ineq4_reduces_to_ineq1() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let fam = random_family(&mut rng, Exponent::Finite(p), 4, 5);
            let zero = WeightedFamily::new(vec![vec![0.0; 4]], vec![1.0], Exponent::Finite(p))
                .unwrap();
            let m4 = check_ineq4(&fam, &zero).unwrap();
            let m1 = check_ineq1(&fam);
            assert!((m4.lhs - m1.lhs).abs() < 1e-12);
            assert!((m4.rhs - m1.rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn ineq3_rhs_not_above_ineq2() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let p = rng.gen_range(1.0..=2.0);
            let k = rng.gen_range(1..=6);
            let fam = random_family(&mut rng, Exponent::Finite(p), 3, k);
            let m2 = check_ineq2(&fam);
            let m3 = check_ineq3(&fam).unwrap();
            assert!(m3.rhs <= m2.rhs + 1e-12);
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let fam = random_family(&mut rng, Exponent::Finite(1.5), 3, 4);
        let lam = 2.75;
        let scaled = WeightedFamily::new(
            fam.points
                .iter()
                .map(|q| q.iter().map(|v| lam * v).collect())
                .collect(),
            fam.weights.clone(),
            fam.p,
        )
        .unwrap();
        for (a, b) in [
            (check_ineq1(&fam), check_ineq1(&scaled)),
            (check_ineq2(&fam), check_ineq2(&scaled)),
        ] {
            assert!((b.lhs - lam * a.lhs).abs() < 1e-9);
            assert!((b.rhs - lam * a.rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn fuzz_small_corpus_clean() {
        for p in [
            Exponent::Finite(1.0),
            Exponent::Finite(1.5),
            Exponent::Finite(2.0),
            Exponent::Finite(3.0),
            Exponent::Inf,
        ] {
            let out = fuzz_exponent(p, 200, 99);
            assert!(
                out.failures.is_empty(),
                "p = {p:?}: worst margin {}",
                out.worst_margin
            );
            assert!(out.worst_margin >= -1e-9);
        }
    }

    #[test]
    fn replay_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let fam = random_family(&mut rng, Exponent::Inf, 3, 4);
        let case = ReplayCase {
            family: fam.clone(),
            second: None,
            inequality_id: InequalityId::Centered,
        };
        let text = serde_json::to_string(&case).unwrap();
        let parsed: ReplayCase = serde_json::from_str(&text).unwrap();
        let m_orig = check_ineq1(&fam);
        let m_replay = replay_case(&parsed).unwrap();
        assert!((m_orig.margin - m_replay.margin).abs() < 1e-15);
    }
}
