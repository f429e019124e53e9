//! Dense two-phase simplex solver with Bland's pivot rule.
//!
//! Bland's rule is slower than steepest-edge pricing but cycle-free and fully
//! deterministic, so every LP-backed result reproduces bit-for-bit. Problem
//! sizes here are small (hull distances, ball feasibility, section covers).

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

/// min c.x  subject to  rows, x >= 0.
#[derive(Clone, Debug)]
pub struct Problem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("infeasible linear program (phase-1 residual {residual:.3e})")]
    Infeasible { residual: f64 },
    #[error("unbounded linear program")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

const EPS: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;

impl Problem {
    pub fn new(n_vars: usize) -> Self {
        Problem {
            n_vars,
            objective: vec![0.0; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Rel, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars);
        self.rows.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<Solution, LpError> {
        Tableau::build(self).solve()
    }

    /// Phase-1 only: the minimal total constraint violation. Zero (within
    /// tolerance) means the system has a nonnegative solution.
    pub fn feasibility_residual(&self) -> Result<f64, LpError> {
        let mut t = Tableau::build(self);
        t.phase1()?;
        Ok(t.rhs_col().iter().zip(&t.basis).fold(0.0, |acc, (&b, &j)| {
            if j >= t.art_start {
                acc + b.max(0.0)
            } else {
                acc
            }
        }))
    }
}

struct Tableau {
    // rows x (cols + 1); last column is the rhs.
    m: usize,
    cols: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    n_vars: usize,
    art_start: usize,
    objective: Vec<f64>,
}

impl Tableau {
    fn build(p: &Problem) -> Tableau {
        let m = p.rows.len();
        // Normalize rhs >= 0, count slack columns.
        let mut rows: Vec<(Vec<f64>, Rel, f64)> = p
            .rows
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let flipped: Vec<f64> = c.coeffs.iter().map(|v| -v).collect();
                    let rel = match c.rel {
                        Rel::Le => Rel::Ge,
                        Rel::Ge => Rel::Le,
                        Rel::Eq => Rel::Eq,
                    };
                    (flipped, rel, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.rel, c.rhs)
                }
            })
            .collect();

        let n_slack = rows.iter().filter(|r| r.1 != Rel::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Rel::Le).count();
        let art_start = p.n_vars + n_slack;
        let cols = art_start + n_art;
        let mut data = vec![0.0; m * (cols + 1)];
        let mut basis = vec![0usize; m];

        let mut slack_i = 0;
        let mut art_i = 0;
        for (i, (coeffs, rel, rhs)) in rows.drain(..).enumerate() {
            let row = &mut data[i * (cols + 1)..(i + 1) * (cols + 1)];
            row[..p.n_vars].copy_from_slice(&coeffs);
            row[cols] = rhs;
            match rel {
                Rel::Le => {
                    row[p.n_vars + slack_i] = 1.0;
                    basis[i] = p.n_vars + slack_i;
                    slack_i += 1;
                }
                Rel::Ge => {
                    row[p.n_vars + slack_i] = -1.0;
                    slack_i += 1;
                    row[art_start + art_i] = 1.0;
                    basis[i] = art_start + art_i;
                    art_i += 1;
                }
                Rel::Eq => {
                    row[art_start + art_i] = 1.0;
                    basis[i] = art_start + art_i;
                    art_i += 1;
                }
            }
        }

        Tableau {
            m,
            cols,
            data,
            basis,
            n_vars: p.n_vars,
            art_start,
            objective: p.objective.clone(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * (self.cols + 1)..(i + 1) * (self.cols + 1)]
    }

    fn rhs_col(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.row(i)[self.cols]).collect()
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let w = self.cols + 1;
        let piv = self.data[r * w + c];
        for j in 0..w {
            self.data[r * w + j] /= piv;
        }
        for i in 0..self.m {
            if i != r {
                let f = self.data[i * w + c];
                if f != 0.0 {
                    for j in 0..w {
                        self.data[i * w + j] -= f * self.data[r * w + j];
                    }
                }
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for j in 0..w {
                cost[j] -= f * self.data[r * w + j];
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex on the given reduced-cost row. `banned` columns never enter.
    fn run(&mut self, cost: &mut Vec<f64>, ban_artificials: bool) -> Result<(), LpError> {
        let max_iter = 20_000 + 50 * (self.m + self.cols);
        for _ in 0..max_iter {
            // Bland: entering = smallest-index column with negative reduced cost.
            let limit = if ban_artificials { self.art_start } else { self.cols };
            let entering = (0..limit).find(|&j| cost[j] < -EPS);
            let c = match entering {
                Some(c) => c,
                None => return Ok(()),
            };
            // Ratio test; ties by smallest basis index (Bland).
            let w = self.cols + 1;
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.data[i * w + c];
                if a > EPS {
                    let ratio = self.data[i * w + self.cols] / a;
                    let replace = match best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if replace {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c, cost),
                None => return Err(LpError::Unbounded),
            }
        }
        Err(LpError::IterationLimit)
    }

    fn phase1(&mut self) -> Result<(), LpError> {
        let w = self.cols + 1;
        let mut cost = vec![0.0; w];
        for j in self.art_start..self.cols {
            cost[j] = 1.0;
        }
        // Price out basic artificials.
        for i in 0..self.m {
            if self.basis[i] >= self.art_start {
                for j in 0..w {
                    cost[j] -= self.data[i * w + j];
                }
            }
        }
        self.run(&mut cost, false)?;
        Ok(())
    }

    fn solve(&mut self) -> Result<Solution, LpError> {
        let w = self.cols + 1;
        if self.art_start < self.cols {
            self.phase1()?;
            let residual: f64 = (0..self.m)
                .filter(|&i| self.basis[i] >= self.art_start)
                .map(|i| self.data[i * w + self.cols])
                .sum();
            if residual > FEAS_TOL {
                return Err(LpError::Infeasible { residual });
            }
            // Drive remaining basic artificials out on any nonzero pivot;
            // rows with no such pivot are redundant and stay put at zero.
            for i in 0..self.m {
                if self.basis[i] >= self.art_start {
                    if let Some(c) =
                        (0..self.art_start).find(|&j| self.data[i * w + j].abs() > EPS)
                    {
                        let mut dummy = vec![0.0; w];
                        self.pivot(i, c, &mut dummy);
                    }
                }
            }
        }

        // Phase 2.
        let mut cost = vec![0.0; w];
        cost[..self.n_vars].copy_from_slice(&self.objective);
        for i in 0..self.m {
            let b = self.basis[i];
            if b < self.n_vars && cost[b] != 0.0 {
                let f = cost[b];
                for j in 0..w {
                    cost[j] -= f * self.data[i * w + j];
                }
            }
        }
        self.run(&mut cost, true)?;

        let mut x = vec![0.0; self.n_vars];
        for i in 0..self.m {
            if self.basis[i] < self.n_vars {
                x[self.basis[i]] = self.data[i * w + self.cols];
            }
        }
        let objective = self
            .objective
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum();
        Ok(Solution { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_minimization() {
        // min -x - y  s.t. x + y <= 1, x,y >= 0  ->  objective -1.
        let mut p = Problem::new(2);
        p.objective = vec![-1.0, -1.0];
        p.constrain(vec![1.0, 1.0], Rel::Le, 1.0);
        let s = p.solve().unwrap();
        assert!((s.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_negative_rhs() {
        // min x + y  s.t. x - y = -2, x + y >= 2  ->  x=0, y=2.
        let mut p = Problem::new(2);
        p.objective = vec![1.0, 1.0];
        p.constrain(vec![1.0, -1.0], Rel::Eq, -2.0);
        p.constrain(vec![1.0, 1.0], Rel::Ge, 2.0);
        let s = p.solve().unwrap();
        assert!((s.x[0] - 0.0).abs() < 1e-9);
        assert!((s.x[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = Problem::new(1);
        p.objective = vec![1.0];
        p.constrain(vec![1.0], Rel::Le, 1.0);
        p.constrain(vec![1.0], Rel::Ge, 2.0);
        assert!(matches!(p.solve(), Err(LpError::Infeasible { .. })));
    }

    #[test]
    fn detects_unbounded() {
        let mut p = Problem::new(1);
        p.objective = vec![-1.0];
        p.constrain(vec![-1.0], Rel::Le, 1.0);
        assert!(matches!(p.solve(), Err(LpError::Unbounded)));
    }

    #[test]
    fn degenerate_does_not_cycle() {
        // Classic degenerate instance; Bland must terminate.
        let mut p = Problem::new(4);
        p.objective = vec![-0.75, 150.0, -0.02, 6.0];
        p.constrain(vec![0.25, -60.0, -0.04, 9.0], Rel::Le, 0.0);
        p.constrain(vec![0.5, -90.0, -0.02, 3.0], Rel::Le, 0.0);
        p.constrain(vec![0.0, 0.0, 1.0, 0.0], Rel::Le, 1.0);
        let s = p.solve().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn feasibility_residual_reports_zero_for_feasible() {
        let mut p = Problem::new(2);
        p.constrain(vec![1.0, 1.0], Rel::Eq, 1.0);
        assert!(p.feasibility_residual().unwrap() < 1e-9);
    }
}
