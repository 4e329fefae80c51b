use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A linear program over nonnegative variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    sense: Sense,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<Rational>) -> LinearProgram {
        LinearProgram {
            num_vars: objective.len(),
            sense,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<()> {
        if coeffs.len() != self.num_vars {
            return Err(Error::domain(format!(
                "constraint has {} coefficients for {} variables",
                coeffs.len(),
                self.num_vars
            )));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    /// Adds `sum coeff * x_var <= / = / >= rhs` from sparse terms.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) -> Result<()> {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (var, c) in terms {
            let slot = coeffs
                .get_mut(*var)
                .ok_or_else(|| Error::domain(format!("variable {var} out of range")))?;
            *slot += c;
        }
        self.add(coeffs, relation, rhs)
    }

    /// Whether `x` satisfies every constraint and nonnegativity exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Optimal { value: Rational, vertex: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl SolveResult {
    pub fn optimal(self) -> Option<(Rational, Vec<Rational>)> {
        match self {
            SolveResult::Optimal { value, vertex } => Some((value, vertex)),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, _)| !x.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.width]
    }

    fn pivot(&mut self, pr: usize, pc: usize, cost: &mut [Rational]) {
        let inv = self.rows[pr][pc].recip();
        for v in self.rows[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[pr].clone();
        let support: Vec<usize> = (0..=self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let factor = row[pc].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        }
        if !cost[pc].is_zero() {
            let factor = cost[pc].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                cost[j] -= delta;
            }
        }
        self.basis[pr] = pc;
    }

    /// Reduced-cost row (last entry holds minus the objective value) for the
    /// given column costs.
    fn reduced_costs(&self, costs: &[Rational]) -> Vec<Rational> {
        let mut d: Vec<Rational> = costs.to_vec();
        d.push(Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            if costs[b].is_zero() {
                continue;
            }
            let cb = &costs[b];
            for j in 0..=self.width {
                if !self.rows[r][j].is_zero() {
                    let delta = cb * &self.rows[r][j];
                    d[j] -= delta;
                }
            }
        }
        d
    }

    /// Runs Bland-rule pivots minimising the cost row. `allowed` gates which
    /// columns may enter. Returns false when unbounded.
    fn optimize(&mut self, cost: &mut [Rational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && cost[j].is_negative());
            let Some(pc) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][pc];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((pr, _)) = best else { return false };
            self.pivot(pr, pc, cost);
        }
    }
}

/// Two-phase primal simplex with Bland's rule. With exact arithmetic the
/// optimum and its basic solution are exact rationals.
pub fn solve_lp(lp: &LinearProgram) -> SolveResult {
    let n = lp.num_vars;
    let m = lp.constraints.len();
    let mut slack_cols = 0;
    let mut normalized = Vec::with_capacity(m);
    for c in &lp.constraints {
        let (coeffs, rel, rhs) = if c.rhs.is_negative() {
            let flipped = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            (c.coeffs.iter().map(|v| -v).collect::<Vec<_>>(), flipped, -&c.rhs)
        } else {
            (c.coeffs.clone(), c.relation, c.rhs.clone())
        };
        if rel != Relation::Eq {
            slack_cols += 1;
        }
        normalized.push((coeffs, rel, rhs));
    }
    let artificial_rows: Vec<usize> = normalized
        .iter()
        .enumerate()
        .filter(|(_, (_, rel, _))| *rel != Relation::Le)
        .map(|(i, _)| i)
        .collect();
    let art_start = n + slack_cols;
    let width = art_start + artificial_rows.len();

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = n;
    let mut art = art_start;
    for (coeffs, rel, rhs) in normalized {
        let mut row = coeffs;
        row.resize(width + 1, Rational::zero());
        match rel {
            Relation::Le => {
                row[slack] = Rational::from_integer(1.into());
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
                row[art] = Rational::from_integer(1.into());
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = Rational::from_integer(1.into());
                basis.push(art);
                art += 1;
            }
        }
        row[width] = rhs;
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, width };

    if !artificial_rows.is_empty() {
        let mut phase1: Vec<Rational> = vec![Rational::zero(); width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = Rational::from_integer(1.into());
        }
        let mut cost = tab.reduced_costs(&phase1);
        let allowed = vec![true; width];
        tab.optimize(&mut cost, &allowed);
        if !cost[width].is_zero() {
            return SolveResult::Infeasible;
        }
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[r][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(r, j, &mut cost);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut costs: Vec<Rational> = vec![Rational::zero(); width];
    for (j, c) in lp.objective.iter().enumerate() {
        costs[j] = match lp.sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c,
        };
    }
    let mut cost = tab.reduced_costs(&costs);
    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    if !tab.optimize(&mut cost, &allowed) {
        return SolveResult::Unbounded;
    }
    let mut vertex = vec![Rational::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            vertex[b] = tab.rhs(r).clone();
        }
    }
    let value = lp.objective_value(&vertex);
    SolveResult::Optimal { value, vertex }
}
