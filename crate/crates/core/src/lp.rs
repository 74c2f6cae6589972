//! The achievability linear program for 1-LinP, solved exactly.
//!
//! Variables are λ_0..λ_K followed by η_0..η_K. The program is
//!
//! ```text
//! minimize   Σ_{j<K} c(j) η_j
//! subject to Σ_{j>=s} C(K-s, j-s) λ_j <= τ_s      for s in [0:K]
//!            η_s <= λ_s                            for s in [0:K]
//!            Σ_{j<K} C(K-1, j) η_j = 1 - γ
//!            λ, η >= 0
//! ```

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::bounds::{table1_rows, SystemConfig, Table1Row};
use crate::rational::{binom, binom_q, frac, int, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LpSolution {
    pub lambda: Vec<Rational>,
    pub eta: Vec<Rational>,
    pub objective: Rational,
}

impl LpSolution {
    /// Objective value of (λ, η) under the configuration's multicast weights.
    pub fn load_of(cfg: &SystemConfig, eta: &[Rational]) -> Rational {
        (0..cfg.users())
            .map(|j| int(cfg.multicast_weight(j)) * &eta[j])
            .sum()
    }

    /// Check every constraint of the program exactly.
    pub fn check(&self, cfg: &SystemConfig) -> Result<(), String> {
        let k = cfg.users();
        if self.lambda.len() != k + 1 || self.eta.len() != k + 1 {
            return Err(format!("expected {} entries in lambda and eta", k + 1));
        }
        for s in 0..=k {
            if self.eta[s].is_negative() {
                return Err(format!("eta_{s} = {} is negative", self.eta[s]));
            }
            if self.eta[s] > self.lambda[s] {
                return Err(format!("eta_{s} = {} exceeds lambda_{s} = {}", self.eta[s], self.lambda[s]));
            }
            let used: Rational = (s..=k)
                .map(|j| binom_q((k - s) as i64, (j - s) as i64) * &self.lambda[j])
                .sum();
            if used > cfg.tau(s) {
                return Err(format!("rank budget at s={s}: {used} > tau_s = {}", cfg.tau(s)));
            }
        }
        let received: Rational = (0..k)
            .map(|j| binom_q(k as i64 - 1, j as i64) * &self.eta[j])
            .sum();
        if received != Rational::one() - cfg.gamma() {
            return Err(format!("decoding balance {received} != 1 - gamma"));
        }
        if self.objective != Self::load_of(cfg, &self.eta) {
            return Err(format!("objective {} does not match eta", self.objective));
        }
        Ok(())
    }

    /// The same point with every λ_s lowered to η_s. Still feasible, and it
    /// leaves no cached dimensions that are never transmitted.
    pub fn tightened(&self) -> LpSolution {
        LpSolution {
            lambda: self.eta.clone(),
            eta: self.eta.clone(),
            objective: self.objective.clone(),
        }
    }
}

/// Constraint sense for [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// `minimize c·x` subject to rows `a·x (<= | >=) b` and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub costs: Vec<Rational>,
    pub rows: Vec<(Vec<Rational>, Sense, Rational)>,
}

/// Optimal vertex of a [`LinearProgram`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub x: Vec<Rational>,
    pub value: Rational,
}

struct Tableau {
    // each row is [coefficients..., rhs]
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, objective: &mut [Rational]) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let support: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut [Rational]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &support {
                let delta = &f * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(objective);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Minimize with reduced costs in `objective` (last entry is minus the
    /// current value). Bland's rule on entering and leaving variables; only
    /// columns below `allowed` may enter.
    fn optimize(&mut self, objective: &mut [Rational], allowed: usize) -> Result<(), LpError> {
        loop {
            let Some(enter) = (0..allowed).find(|&j| objective[j].is_negative()) else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (r, _) = leave.ok_or(LpError::Unbounded)?;
            self.pivot(r, enter, objective);
        }
    }
}

impl LinearProgram {
    /// Two-phase primal simplex in exact rationals.
    pub fn solve(&self) -> Result<Vertex, LpError> {
        let n = self.costs.len();
        let m = self.rows.len();
        // Normalize every row to a non-negative right-hand side.
        let mut norm: Vec<(Vec<Rational>, Sense, Rational)> = Vec::with_capacity(m);
        for (a, sense, b) in &self.rows {
            debug_assert_eq!(a.len(), n);
            if b.is_negative() {
                let flipped = match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                };
                norm.push((a.iter().map(|v| -v).collect(), flipped, -b));
            } else {
                norm.push((a.clone(), *sense, b.clone()));
            }
        }
        let artificial_rows: Vec<usize> = (0..m).filter(|&i| norm[i].1 == Sense::Ge).collect();
        // columns: x | one slack or surplus per row | artificials
        let n_art = artificial_rows.len();
        let first_art = n + m;
        let width = n + m + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for (i, (a, sense, b)) in norm.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            row[..n].clone_from_slice(a);
            row[width] = b.clone();
            match sense {
                Sense::Le => {
                    row[n + i] = Rational::one();
                    basis.push(n + i);
                }
                Sense::Ge => {
                    row[n + i] = -Rational::one();
                    let col = first_art + artificial_rows.iter().position(|&r| r == i).unwrap();
                    row[col] = Rational::one();
                    basis.push(col);
                }
            }
            rows.push(row);
        }
        let mut t = Tableau { rows, basis, width };

        if n_art > 0 {
            // phase 1: minimize the sum of artificials
            let mut w = vec![Rational::zero(); width + 1];
            for j in first_art..width {
                w[j] = Rational::one();
            }
            for &i in &artificial_rows {
                for j in 0..=width {
                    if !t.rows[i][j].is_zero() {
                        w[j] -= &t.rows[i][j];
                    }
                }
            }
            t.optimize(&mut w, width)?;
            if !w[width].is_zero() {
                return Err(LpError::Infeasible);
            }
            // drive zero-level artificials out of the basis
            for r in 0..m {
                if t.basis[r] >= first_art {
                    if let Some(c) = (0..first_art).find(|&j| !t.rows[r][j].is_zero()) {
                        t.pivot(r, c, &mut w);
                    }
                }
            }
        }

        let mut z = vec![Rational::zero(); width + 1];
        z[..n].clone_from_slice(&self.costs);
        for r in 0..m {
            let b = t.basis[r];
            if b < n && !z[b].is_zero() {
                let f = z[b].clone();
                for j in 0..=width {
                    if !t.rows[r][j].is_zero() {
                        let delta = &f * &t.rows[r][j];
                        z[j] -= delta;
                    }
                }
            }
        }
        t.optimize(&mut z, first_art)?;

        let mut x = vec![Rational::zero(); n];
        for r in 0..m {
            if t.basis[r] < n {
                x[t.basis[r]] = t.rows[r][width].clone();
            }
        }
        let value = self
            .costs
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum();
        Ok(Vertex { x, value })
    }
}

/// Build the achievability program for a configuration.
pub fn build(cfg: &SystemConfig) -> LinearProgram {
    let k = cfg.users();
    let nv = 2 * (k + 1);
    let lam = |s: usize| s;
    let eta = |s: usize| k + 1 + s;
    let mut costs = vec![Rational::zero(); nv];
    for j in 0..k {
        costs[eta(j)] = int(cfg.multicast_weight(j));
    }
    let mut rows = Vec::with_capacity(2 * k + 4);
    for s in 0..=k {
        let mut a = vec![Rational::zero(); nv];
        for j in s..=k {
            a[lam(j)] = binom_q((k - s) as i64, (j - s) as i64);
        }
        rows.push((a, Sense::Le, cfg.tau(s)));
    }
    for s in 0..=k {
        let mut a = vec![Rational::zero(); nv];
        a[eta(s)] = Rational::one();
        a[lam(s)] = -Rational::one();
        rows.push((a, Sense::Le, Rational::zero()));
    }
    let mut balance = vec![Rational::zero(); nv];
    for j in 0..k {
        balance[eta(j)] = binom_q(k as i64 - 1, j as i64);
    }
    let target = Rational::one() - cfg.gamma();
    rows.push((balance.clone(), Sense::Le, target.clone()));
    rows.push((balance, Sense::Ge, target));
    LinearProgram { costs, rows }
}

/// Optimal achievable load and a (λ, η) vertex attaining it.
pub fn solve(cfg: &SystemConfig) -> Result<LpSolution, LpError> {
    let k = cfg.users();
    let v = build(cfg).solve()?;
    let mut x = v.x;
    let eta = x.split_off(k + 1);
    Ok(LpSolution {
        lambda: x,
        eta,
        objective: v.value,
    })
}

fn assemble(cfg: &SystemConfig, pairs: &[(usize, Rational, Rational)]) -> LpSolution {
    let k = cfg.users();
    let mut lambda = vec![Rational::zero(); k + 1];
    let mut eta = vec![Rational::zero(); k + 1];
    for (s, l, e) in pairs {
        lambda[*s] = l.clone();
        eta[*s] = e.clone();
    }
    let objective = LpSolution::load_of(cfg, &eta);
    LpSolution {
        lambda,
        eta,
        objective,
    }
}

/// Closed-form feasible point for one regime.
pub fn feasible_solution_for_row(cfg: &SystemConfig, row: Table1Row) -> LpSolution {
    let k = cfg.users();
    let ki = k as i64;
    let g = cfg.gamma().clone();
    let one_minus = Rational::one() - &g;
    match row {
        Table1Row::SmallMemory => {
            let zero_part = Rational::one() - int(ki) * &g;
            assemble(cfg, &[(0, zero_part.clone(), zero_part), (1, g.clone(), g)])
        }
        Table1Row::LowerMiddle => assemble(cfg, &[(1, frac(1, ki), one_minus / int(ki - 1))]),
        Table1Row::Corner(t) => {
            let ti = t as i64;
            assemble(
                cfg,
                &[(t, frac(1, binom(ki, ti)), frac(1, (ti + 1) * binom(ki - 1, ti)))],
            )
        }
        Table1Row::UpperMiddle => {
            let top = cfg.tau(k - 1);
            let below = (Rational::one() - int(ki) * &top) / binom_q(ki, 2);
            let below_eta = (one_minus - &top) / int(ki - 1);
            assemble(cfg, &[(k - 1, top.clone(), top), (k - 2, below, below_eta)])
        }
        Table1Row::LargeMemory => {
            let full = cfg.tau(k);
            assemble(cfg, &[(k, full.clone(), full), (k - 1, one_minus.clone(), one_minus)])
        }
    }
}

/// The closed-form feasible point for the first regime containing γ.
pub fn feasible_solution_table1(cfg: &SystemConfig) -> Option<LpSolution> {
    table1_rows(cfg)
        .first()
        .map(|&row| feasible_solution_for_row(cfg, row))
}
