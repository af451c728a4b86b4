//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Solves `min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0` with
//! nonnegative right-hand sides, which covers the minimax weight problem.

use crate::error::{invalid, Error, Result};

const PIVOT_EPS: f64 = 1e-11;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers `y` of the `<=` rows (nonpositive at a minimum).
    pub dual_ub: Vec<f64>,
    /// Multipliers of the equality rows.
    pub dual_eq: Vec<f64>,
    pub pivots: usize,
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                line[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland's rule on the objective row; columns `>= allowed` never enter.
    fn optimize(&mut self, allowed: usize, pivots: &mut usize) -> Result<()> {
        let m = self.basis.len();
        loop {
            let obj = &self.t[m];
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -1e-10) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.t[r][enter];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - 1e-12
                                || ((ratio - lratio).abs() <= 1e-12 && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Internal("linear program is unbounded".into()));
            };
            self.pivot(row, enter);
            *pivots += 1;
            if *pivots > 1_000_000 {
                return Err(Error::Internal("simplex pivot limit reached".into()));
            }
        }
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.c.len();
        let (mu, me) = (self.a_ub.len(), self.a_eq.len());
        if self.b_ub.len() != mu || self.b_eq.len() != me {
            return invalid("row and rhs counts differ");
        }
        if self.a_ub.iter().chain(&self.a_eq).any(|r| r.len() != n) {
            return invalid("constraint row length differs from the variable count");
        }
        if self.b_ub.iter().chain(&self.b_eq).any(|&b| b < 0.0 || !b.is_finite()) {
            return invalid("right-hand sides must be finite and nonnegative");
        }
        let m = mu + me;
        // Columns: structural, slacks (one per <= row), artificials (one per = row).
        let slack0 = n;
        let art0 = n + mu;
        let cols = n + mu + me;
        let mut t = vec![vec![0.0; cols + 1]; m + 1];
        let mut basis = Vec::with_capacity(m);
        for (r, (row, &b)) in self.a_ub.iter().zip(&self.b_ub).enumerate() {
            t[r][..n].copy_from_slice(row);
            t[r][slack0 + r] = 1.0;
            t[r][cols] = b;
            basis.push(slack0 + r);
        }
        for (k, (row, &b)) in self.a_eq.iter().zip(&self.b_eq).enumerate() {
            let r = mu + k;
            t[r][..n].copy_from_slice(row);
            t[r][art0 + k] = 1.0;
            t[r][cols] = b;
            basis.push(art0 + k);
        }
        let mut tab = Tableau { t, basis, cols };
        let mut pivots = 0;

        // Phase one: minimize the sum of artificials.
        if me > 0 {
            for j in 0..=cols {
                tab.t[m][j] = 0.0;
            }
            for k in 0..me {
                tab.t[m][art0 + k] = 1.0;
            }
            for r in mu..m {
                for j in 0..=cols {
                    let v = tab.t[r][j];
                    tab.t[m][j] -= v;
                }
            }
            tab.optimize(art0, &mut pivots)?;
            if -tab.t[m][cols] > 1e-9 {
                return Err(Error::Internal("linear program is infeasible".into()));
            }
            // Drive zero-level artificials out of the basis where possible.
            for r in 0..m {
                if tab.basis[r] >= art0 {
                    if let Some(j) = (0..art0).find(|&j| tab.t[r][j].abs() > 1e-9) {
                        tab.pivot(r, j);
                        pivots += 1;
                    }
                }
            }
        }

        // Phase two: the real objective, reduced against the current basis.
        for j in 0..=cols {
            tab.t[m][j] = if j < n { self.c[j] } else { 0.0 };
        }
        for r in 0..m {
            let b = tab.basis[r];
            let cb = if b < n { self.c[b] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..=cols {
                    let v = tab.t[r][j];
                    tab.t[m][j] -= cb * v;
                }
            }
        }
        tab.optimize(art0, &mut pivots)?;

        let mut x = vec![0.0; n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(r);
            }
        }
        let objective = self.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        // Reduced cost of a unit column e_r is -y_r.
        let dual_ub = (0..mu).map(|r| -tab.t[m][slack0 + r]).collect();
        let dual_eq = (0..me).map(|k| -tab.t[m][art0 + k]).collect();
        Ok(LpSolution { x, objective, dual_ub, dual_eq, pivots })
    }
}
