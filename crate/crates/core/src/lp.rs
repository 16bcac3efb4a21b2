//! Exact two-phase simplex over the rationals with Bland's rule.
//!
//! Every variable is nonnegative. Each solve returns a certificate that can
//! be checked without trusting the solver: a dual vector bounding the
//! optimum, or a Farkas vector proving infeasibility.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::lattice::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub rel: Relation,
    pub rhs: Rational,
}

/// `maximize objective · x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
    /// Dual multipliers, one per constraint, satisfying the conditions of
    /// [`LinearProgram::dual_bound`].
    pub dual: Vec<Rational>,
    pub basis: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal(LpSolution),
    /// Multipliers `y` with `yᵀA >= 0`, `yᵀb < 0`, `y >= 0` on `Le` rows and
    /// `y <= 0` on `Ge` rows.
    Infeasible(Vec<Rational>),
    Unbounded,
}

impl LpResult {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpResult::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

fn sign_ok(rel: Relation, y: &Rational) -> bool {
    match rel {
        Relation::Le => !y.is_negative(),
        Relation::Ge => !y.is_positive(),
        Relation::Eq => true,
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, rel: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    fn row_dot(c: &Constraint, x: &[Rational]) -> Rational {
        c.coeffs
            .iter()
            .zip(x)
            .filter(|(a, _)| !a.is_zero())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = Self::row_dot(c, x);
                match c.rel {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `yᵀA` as a vector over the variables.
    fn combine(&self, y: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.num_vars];
        for (c, yi) in self.constraints.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(&c.coeffs) {
                if !a.is_zero() {
                    *o += a * yi;
                }
            }
        }
        out
    }

    /// Checks a Farkas infeasibility certificate.
    pub fn check_farkas(&self, y: &[Rational]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let signs = self.constraints.iter().zip(y).all(|(c, v)| sign_ok(c.rel, v));
        let yb: Rational = self.constraints.iter().zip(y).map(|(c, v)| &c.rhs * v).sum();
        signs && yb.is_negative() && self.combine(y).iter().all(|v| !v.is_negative())
    }

    /// If `y` is dual feasible (`yᵀA >= c` with the row sign conditions),
    /// returns the upper bound `yᵀb` on the objective.
    pub fn dual_bound(&self, y: &[Rational]) -> Option<Rational> {
        if y.len() != self.constraints.len() {
            return None;
        }
        let signs = self.constraints.iter().zip(y).all(|(c, v)| sign_ok(c.rel, v));
        let covers = self
            .combine(y)
            .iter()
            .zip(&self.objective)
            .all(|(a, c)| a >= c);
        (signs && covers).then(|| self.constraints.iter().zip(y).map(|(c, v)| &c.rhs * v).sum())
    }

    /// An optimal solution is certified when it is feasible and its value
    /// meets the dual bound.
    pub fn certify(&self, s: &LpSolution) -> bool {
        self.is_feasible_point(&s.x)
            && self.objective_value(&s.x) == s.value
            && self.dual_bound(&s.dual).as_ref() == Some(&s.value)
    }

    pub fn solve(&self) -> LpResult {
        Tableau::build(self).run(self)
    }

    /// Minimizes instead of maximizing; the reported value is the minimum.
    pub fn solve_min(&self) -> LpResult {
        let mut neg = self.clone();
        for c in neg.objective.iter_mut() {
            *c = -&*c;
        }
        match neg.solve() {
            LpResult::Optimal(mut s) => {
                s.value = -s.value;
                for y in s.dual.iter_mut() {
                    *y = -&*y;
                }
                LpResult::Optimal(s)
            }
            other => other,
        }
    }
}

/// Dense tableau. Columns: structural variables, one slack per inequality,
/// one artificial per row, then the right-hand side. Artificial columns
/// start as the identity, so they always hold `B⁻¹`.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n: usize,
    art0: usize,
    width: usize,
    flip: Vec<bool>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let n = lp.num_vars;
        let mut slack_of_row = Vec::with_capacity(m);
        let mut next = n;
        for c in &lp.constraints {
            if c.rel == Relation::Eq {
                slack_of_row.push(None);
            } else {
                slack_of_row.push(Some(next));
                next += 1;
            }
        }
        let art0 = next;
        let width = art0 + m;
        let mut rows = Vec::with_capacity(m);
        let mut flip = Vec::with_capacity(m);
        for (i, c) in lp.constraints.iter().enumerate() {
            let f = c.rhs.is_negative();
            let s = if f { -Rational::one() } else { Rational::one() };
            let mut row = vec![Rational::zero(); width + 1];
            for (j, a) in c.coeffs.iter().enumerate() {
                row[j] = a * &s;
            }
            if let Some(k) = slack_of_row[i] {
                let base = if c.rel == Relation::Le {
                    Rational::one()
                } else {
                    -Rational::one()
                };
                row[k] = base * &s;
            }
            row[art0 + i] = Rational::one();
            row[width] = &c.rhs * &s;
            rows.push(row);
            flip.push(f);
        }
        Self {
            rows,
            basis: (art0..art0 + m).collect(),
            n,
            art0,
            width,
            flip,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Rational::one() / &self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over the current basis. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[i][j].is_zero() {
                        rc -= &cost[b] * &self.rows[i][j];
                    }
                }
                if rc.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else {
                return true;
            };
            let mut best: Option<(Rational, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[self.width] / &row[j];
                    let better = match &best {
                        None => true,
                        Some((r, _, b)) => ratio < *r || (ratio == *r && self.basis[i] < *b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else {
                return false;
            };
            self.pivot(r, j);
        }
    }

    /// `y_i = Σ_k cost[basis_k] · B⁻¹[k][i]` mapped back to the original
    /// row orientation.
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let m = self.rows.len();
        (0..m)
            .map(|i| {
                let mut y = Rational::zero();
                for (k, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() {
                        y += &cost[b] * &self.rows[k][self.art0 + i];
                    }
                }
                if self.flip[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }

    fn run(mut self, lp: &LinearProgram) -> LpResult {
        let m = self.rows.len();
        let mut cost1 = vec![Rational::zero(); self.width];
        for c in cost1.iter_mut().skip(self.art0) {
            *c = -Rational::one();
        }
        let all = vec![true; self.width];
        self.optimize(&cost1, &all);
        let phase1: Rational = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.art0)
            .map(|(i, _)| -self.rows[i][self.width].clone())
            .sum();
        if phase1.is_negative() {
            return LpResult::Infeasible(self.duals(&cost1));
        }
        // drive zero-level artificials out of the basis where possible
        for r in 0..m {
            if self.basis[r] >= self.art0 {
                if let Some(c) = (0..self.art0).find(|&c| !self.rows[r][c].is_zero()) {
                    self.pivot(r, c);
                }
            }
        }
        let mut cost2 = vec![Rational::zero(); self.width];
        cost2[..self.n].clone_from_slice(&lp.objective);
        let mut allowed = vec![true; self.width];
        for a in allowed.iter_mut().skip(self.art0) {
            *a = false;
        }
        if !self.optimize(&cost2, &allowed) {
            return LpResult::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rows[i][self.width].clone();
            }
        }
        let value = lp.objective_value(&x);
        LpResult::Optimal(LpSolution {
            value,
            x,
            dual: self.duals(&cost2),
            basis: self.basis.clone(),
        })
    }
}
