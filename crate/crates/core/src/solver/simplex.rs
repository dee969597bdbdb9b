//! Dense two-phase simplex with Bland's rule. Standard form is
//! maximize c·x subject to A x = b, x >= 0; a small builder lowers
//! general-form problems (<=, >=, free variables) onto it.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

/// Standard-form LP: maximize objective · x with equality rows and
/// nonnegative variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Dual multipliers of the equality rows.
    pub duals: Vec<f64>,
}

struct Tableau {
    /// rows x (n + m artificials + 1 rhs)
    t: Vec<Vec<f64>>,
    n: usize,
    m: usize,
    basis: Vec<usize>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.n + self.m]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.n + self.m + 1;
        let pv = self.t[row][col];
        for c in 0..cols {
            self.t[row][c] /= pv;
        }
        for r in 0..self.m {
            if r != row {
                let f = self.t[r][col];
                if f != 0.0 {
                    for c in 0..cols {
                        self.t[r][c] -= f * self.t[row][c];
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// One phase of Bland-rule simplex for maximize obj (length n + m).
    /// Returns false if unbounded.
    fn run(&mut self, obj: &[f64], allow: impl Fn(usize) -> bool) -> bool {
        loop {
            // reduced costs: c_j - c_B · B^-1 A_j, computed from the tableau
            let mut entering = None;
            for j in 0..self.n + self.m {
                if !allow(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut red = obj[j];
                for (r, &b) in self.basis.iter().enumerate() {
                    red -= obj[b] * self.t[r][j];
                }
                if red > PIVOT_TOL {
                    entering = Some(j); // Bland: first improving index
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[r][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio < lratio + PIVOT_TOL && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return false; // unbounded
            };
            self.pivot(row, col);
        }
    }
}

/// Solves a standard-form LP. Infeasible and unbounded problems are
/// signaled as distinct errors.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution> {
    let m = p.a_eq.len();
    let n = p.objective.len();
    for row in &p.a_eq {
        if row.len() != n {
            return Err(Error::InvalidInput(format!(
                "constraint row has {} entries, expected {}",
                row.len(),
                n
            )));
        }
    }
    if p.b_eq.len() != m {
        return Err(Error::InvalidInput("rhs length mismatch".into()));
    }
    if p
        .objective
        .iter()
        .chain(p.a_eq.iter().flatten())
        .chain(p.b_eq.iter())
        .any(|v| !v.is_finite())
    {
        return Err(Error::InvalidInput("non-finite LP entry".into()));
    }

    // Build tableau with artificial identity; flip rows so b >= 0.
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for i in 0..m {
        let flip = if p.b_eq[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * p.a_eq[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][n + m] = flip * p.b_eq[i];
    }
    let mut tab = Tableau {
        t,
        n,
        m,
        basis: (n..n + m).collect(),
    };

    // Phase 1: maximize -(sum of artificials).
    let mut phase1 = vec![0.0; n + m];
    for j in n..n + m {
        phase1[j] = -1.0;
    }
    tab.run(&phase1, |_| true);
    let infeas: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .map(|(r, _)| tab.rhs(r))
        .sum();
    if infeas > FEAS_TOL {
        return Err(Error::LpInfeasible { residual: infeas });
    }
    // Drive lingering artificials out of the basis where possible.
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, col);
            }
        }
    }

    // Phase 2: original objective, artificials barred from entering.
    let mut obj = vec![0.0; n + m];
    obj[..n].copy_from_slice(&p.objective);
    if !tab.run(&obj, |j| j < n) {
        return Err(Error::LpUnbounded);
    }

    let mut x = vec![0.0; n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r);
        }
    }
    let value: f64 = p.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
    // Duals from the artificial columns: y = c_B B^{-1}; B^{-1} sits in the
    // artificial block of the final tableau (modulo the row flips).
    let mut duals = vec![0.0; m];
    for i in 0..m {
        let flip = if p.b_eq[i] < 0.0 { -1.0 } else { 1.0 };
        let mut y = 0.0;
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                y += p.objective[b] * tab.t[r][n + i];
            }
        }
        duals[i] = flip * y;
    }
    Ok(LpSolution { value, x, duals })
}

/// Row sense for the general-form builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// General-form LP assembled row by row and lowered to standard form.
/// Variables are nonnegative unless marked free (free ones are split).
#[derive(Debug, Clone)]
pub struct LpBuilder {
    n: usize,
    maximize: bool,
    objective: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
}

impl LpBuilder {
    pub fn new(n_vars: usize, maximize: bool) -> Self {
        LpBuilder {
            n: n_vars,
            maximize,
            objective: vec![0.0; n_vars],
            free: vec![false; n_vars],
            rows: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) {
        self.objective[var] = coeff;
    }

    pub fn mark_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn add_row(&mut self, terms: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        self.rows.push((terms, rel, rhs));
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn solve(&self) -> Result<LpSolution> {
        // variable layout: x_i (and x_i^- right after if free), then slacks
        let mut col_of = vec![0usize; self.n];
        let mut neg_col = vec![usize::MAX; self.n];
        let mut nc = 0usize;
        for i in 0..self.n {
            col_of[i] = nc;
            nc += 1;
            if self.free[i] {
                neg_col[i] = nc;
                nc += 1;
            }
        }
        let n_slack = self
            .rows
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Eq)
            .count();
        let total = nc + n_slack;
        let mut objective = vec![0.0; total];
        let sign = if self.maximize { 1.0 } else { -1.0 };
        for i in 0..self.n {
            objective[col_of[i]] = sign * self.objective[i];
            if self.free[i] {
                objective[neg_col[i]] = -sign * self.objective[i];
            }
        }
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        let mut slack_at = nc;
        for (terms, rel, rhs) in &self.rows {
            let mut row = vec![0.0; total];
            for &(i, coeff) in terms {
                row[col_of[i]] += coeff;
                if self.free[i] {
                    row[neg_col[i]] -= coeff;
                }
            }
            match rel {
                Relation::Eq => {}
                Relation::Le => {
                    row[slack_at] = 1.0;
                    slack_at += 1;
                }
                Relation::Ge => {
                    row[slack_at] = -1.0;
                    slack_at += 1;
                }
            }
            a.push(row);
            b.push(*rhs);
        }
        let sol = lp_solve(&LpProblem {
            objective,
            a_eq: a,
            b_eq: b,
        })?;
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            x[i] = sol.x[col_of[i]];
            if self.free[i] {
                x[i] -= sol.x[neg_col[i]];
            }
        }
        let value: f64 = self.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            value,
            x,
            duals: sol.duals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn single_variable() {
        let p = LpProblem {
            objective: vec![1.0],
            a_eq: vec![vec![1.0]],
            b_eq: vec![1.0],
        };
        let s = lp_solve(&p).unwrap();
        assert!((s.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_variables_on_a_line() {
        let p = LpProblem {
            objective: vec![1.0, 1.0],
            a_eq: vec![vec![1.0, 1.0]],
            b_eq: vec![1.0],
        };
        let s = lp_solve(&p).unwrap();
        assert!((s.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_and_unbounded_are_distinct() {
        let inf = LpProblem {
            objective: vec![1.0],
            a_eq: vec![vec![1.0], vec![1.0]],
            b_eq: vec![1.0, 2.0],
        };
        assert!(matches!(lp_solve(&inf), Err(Error::LpInfeasible { .. })));

        let unb = LpProblem {
            objective: vec![1.0, 1.0],
            a_eq: vec![vec![1.0, -1.0]],
            b_eq: vec![0.0],
        };
        assert!(matches!(lp_solve(&unb), Err(Error::LpUnbounded)));
    }

    /// Exhaustive vertex enumeration over basis subsets.
    fn vertex_oracle(p: &LpProblem) -> Option<f64> {
        let m = p.a_eq.len();
        let n = p.objective.len();
        let mut best: Option<f64> = None;
        let mut subset = vec![0usize; m];
        fn rec(
            p: &LpProblem,
            subset: &mut Vec<usize>,
            at: usize,
            from: usize,
            best: &mut Option<f64>,
        ) {
            let m = p.a_eq.len();
            let n = p.objective.len();
            if at == m {
                // solve square system over the chosen columns
                let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
                for (c, &j) in subset.iter().enumerate() {
                    for r in 0..m {
                        a[(r, c)] = p.a_eq[r][j];
                    }
                }
                let b = nalgebra::DVector::from_vec(p.b_eq.clone());
                if let Some(sol) = a.lu().solve(&b) {
                    if sol.iter().all(|&v| v >= -1e-9) {
                        let mut x = vec![0.0; n];
                        for (c, &j) in subset.iter().enumerate() {
                            x[j] = sol[c];
                        }
                        // verify Ax = b (LU may "solve" singular systems badly)
                        let ok = (0..m).all(|r| {
                            let lhs: f64 =
                                (0..n).map(|j| p.a_eq[r][j] * x[j]).sum();
                            (lhs - p.b_eq[r]).abs() < 1e-7
                        });
                        if ok {
                            let v: f64 =
                                p.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
                            *best = Some(best.map_or(v, |b: f64| b.max(v)));
                        }
                    }
                }
                return;
            }
            for j in from..n {
                subset[at] = j;
                rec(p, subset, at + 1, j + 1, best);
            }
        }
        rec(p, &mut subset, 0, 0, &mut best);
        best
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut rng = crate::random::rng_for(99, "lp-oracle");
        let mut tested = 0;
        while tested < 12 {
            let m = rng.gen_range(1..=3usize);
            let n = rng.gen_range(m + 1..=6usize);
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            // feasible by construction: b = A x0 with x0 >= 0
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
            let b: Vec<f64> = a
                .iter()
                .map(|row| row.iter().zip(x0.iter()).map(|(r, x)| r * x).sum())
                .collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let p = LpProblem {
                objective: c,
                a_eq: a,
                b_eq: b,
            };
            match lp_solve(&p) {
                Ok(sol) => {
                    let oracle = vertex_oracle(&p).expect("oracle found no vertex");
                    assert!(
                        (sol.value - oracle).abs() < 1e-7,
                        "simplex {} vs oracle {}",
                        sol.value,
                        oracle
                    );
                    tested += 1;
                }
                Err(Error::LpUnbounded) => {
                    // oracle cannot certify unboundedness; skip these draws
                    continue;
                }
                Err(e) => panic!("unexpected LP error: {e}"),
            }
        }
    }

    #[test]
    fn complementary_slackness_holds() {
        let mut rng = crate::random::rng_for(100, "lp-cs");
        for _ in 0..8 {
            let m = 2usize;
            let n = 5usize;
            let a: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect())
                .collect();
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let b: Vec<f64> = a
                .iter()
                .map(|row| row.iter().zip(x0.iter()).map(|(r, x)| r * x).sum())
                .collect();
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..0.5)).collect();
            let p = LpProblem {
                objective: c.clone(),
                a_eq: a.clone(),
                b_eq: b,
            };
            match lp_solve(&p) {
                Ok(sol) => {
                    for j in 0..n {
                        let reduced: f64 =
                            c[j] - (0..m).map(|r| sol.duals[r] * a[r][j]).sum::<f64>();
                        // primal support => zero reduced cost; all reduced costs <= 0
                        assert!(reduced <= 1e-8, "reduced cost {reduced} positive");
                        assert!(
                            sol.x[j] * reduced.abs() < 1e-8,
                            "complementary slackness violated: x={} red={}",
                            sol.x[j],
                            reduced
                        );
                    }
                }
                Err(Error::LpUnbounded) => continue,
                Err(e) => panic!("unexpected: {e}"),
            }
        }
    }

    #[test]
    fn builder_handles_inequalities_and_free_vars() {
        // maximize x + y st x <= 2, y <= 3, x + y >= 1, z free with z = x - y
        let mut lp = LpBuilder::new(3, true);
        lp.set_objective(0, 1.0);
        lp.set_objective(1, 1.0);
        lp.mark_free(2);
        lp.add_row(vec![(0, 1.0)], Relation::Le, 2.0);
        lp.add_row(vec![(1, 1.0)], Relation::Le, 3.0);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 1.0);
        lp.add_row(vec![(2, 1.0), (0, -1.0), (1, 1.0)], Relation::Eq, 0.0);
        let s = lp.solve().unwrap();
        assert!((s.value - 5.0).abs() < 1e-9);
        assert!((s.x[2] - (s.x[0] - s.x[1])).abs() < 1e-9);
    }
}
