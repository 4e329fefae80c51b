use num_traits::{Signed, Zero};

use super::linalg::{rref, solve_unique};
use super::simplex::{dot, solve_lp, LinearProgram, Relation, Sense, SolveResult};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::rational::{int, Rational};

/// `{x : E x = e, A x <= a}` in `R^dim` (variables are free).
#[derive(Clone, Debug, Default)]
pub struct Polytope {
    dim: usize,
    equalities: Vec<(Vec<Rational>, Rational)>,
    inequalities: Vec<(Vec<Rational>, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolytopeVertices {
    pub vertices: Vec<Vec<Rational>>,
}

impl Polytope {
    pub fn new(dim: usize) -> Polytope {
        Polytope {
            dim,
            ..Polytope::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.equalities.len() + self.inequalities.len()
    }

    fn check(&self, a: &[Rational]) -> Result<()> {
        if a.len() == self.dim {
            Ok(())
        } else {
            Err(Error::domain(format!("constraint of length {} in dimension {}", a.len(), self.dim)))
        }
    }

    pub fn add_eq(&mut self, a: Vec<Rational>, b: Rational) -> Result<()> {
        self.check(&a)?;
        self.equalities.push((a, b));
        Ok(())
    }

    pub fn add_le(&mut self, a: Vec<Rational>, b: Rational) -> Result<()> {
        self.check(&a)?;
        self.inequalities.push((a, b));
        Ok(())
    }

    pub fn add_ge(&mut self, a: Vec<Rational>, b: Rational) -> Result<()> {
        self.add_le(a.into_iter().map(|v| -v).collect(), -b)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim
            && self.equalities.iter().all(|(a, b)| dot(a, x) == *b)
            && self.inequalities.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    /// Vertices by incremental double description. The polytope must be
    /// bounded; an empty polytope has no vertices.
    ///
    /// Equalities are eliminated first (the search runs in the affine hull's
    /// free coordinates), then a simplex enclosing the feasible box is cut by
    /// each inequality in turn. Adjacency is decided combinatorially: two
    /// vertices are adjacent iff no third vertex is tight on every constraint
    /// they share.
    pub fn vertices(&self, limits: &Limits) -> Result<PolytopeVertices> {
        let Some(hull) = self.affine_hull() else {
            return Ok(PolytopeVertices { vertices: Vec::new() });
        };
        let f = hull.free.len();
        let mut reduced: Vec<(Vec<Rational>, Rational)> = Vec::new();
        for (a, b) in &self.inequalities {
            let coeffs: Vec<Rational> = (0..f).map(|j| hull.column_dot(a, j)).collect();
            let rhs = b - dot(a, &hull.origin);
            if coeffs.iter().all(Zero::is_zero) {
                if rhs.is_negative() {
                    return Ok(PolytopeVertices { vertices: Vec::new() });
                }
                continue;
            }
            reduced.push((coeffs, rhs));
        }
        if f == 0 {
            return Ok(PolytopeVertices { vertices: vec![hull.origin.clone()] });
        }
        let Some(radius) = bounding_radius(&reduced, f)? else {
            return Ok(PolytopeVertices { vertices: Vec::new() });
        };
        let points = double_description(&reduced, f, &radius, limits)?;
        let mut vertices: Vec<Vec<Rational>> = points.iter().map(|y| hull.lift(y)).collect();
        vertices.sort();
        vertices.dedup();
        Ok(PolytopeVertices { vertices })
    }

    /// Vertices by exhaustive basis enumeration: every choice of `dim - rank`
    /// inequalities made tight together with the equalities, kept when the
    /// resulting system has a unique feasible solution. Exponential; meant as
    /// an independent check on small instances (<= 12 variables, <= 40
    /// constraints).
    pub fn vertices_by_bases(&self) -> Result<PolytopeVertices> {
        if self.dim > 12 || self.num_constraints() > 40 {
            return Err(Error::resource(format!(
                "basis enumeration limited to 12 variables and 40 constraints (got {} and {})",
                self.dim,
                self.num_constraints()
            )));
        }
        let eq_rows: Vec<Vec<Rational>> = self
            .equalities
            .iter()
            .map(|(a, b)| a.iter().cloned().chain([b.clone()]).collect())
            .collect();
        let echelon = rref(eq_rows.clone(), self.dim);
        if !echelon.consistent {
            return Ok(PolytopeVertices { vertices: Vec::new() });
        }
        let need = self.dim - echelon.pivots.len();
        let m = self.inequalities.len();
        if need > m {
            return Ok(PolytopeVertices { vertices: Vec::new() });
        }
        let mut vertices = Vec::new();
        let mut combo: Vec<usize> = (0..need).collect();
        loop {
            let mut rows = echelon.rows.clone();
            for &i in &combo {
                let (a, b) = &self.inequalities[i];
                rows.push(a.iter().cloned().chain([b.clone()]).collect());
            }
            if let Some(x) = solve_unique(rows, self.dim) {
                if self.contains(&x) {
                    vertices.push(x);
                }
            }
            if !next_combination(&mut combo, m) {
                break;
            }
        }
        vertices.sort();
        vertices.dedup();
        Ok(PolytopeVertices { vertices })
    }

    fn affine_hull(&self) -> Option<AffineHull> {
        let rows: Vec<Vec<Rational>> = self
            .equalities
            .iter()
            .map(|(a, b)| a.iter().cloned().chain([b.clone()]).collect())
            .collect();
        let e = rref(rows, self.dim);
        if !e.consistent {
            return None;
        }
        let free: Vec<usize> = (0..self.dim).filter(|c| !e.pivots.contains(c)).collect();
        let mut origin = vec![Rational::zero(); self.dim];
        for (row, &p) in e.rows.iter().zip(&e.pivots) {
            origin[p] = row[self.dim].clone();
        }
        // x = origin + directions * y
        let mut directions = vec![vec![Rational::zero(); free.len()]; self.dim];
        for (j, &fc) in free.iter().enumerate() {
            directions[fc][j] = int(1);
            for (row, &p) in e.rows.iter().zip(&e.pivots) {
                if !row[fc].is_zero() {
                    directions[p][j] = -&row[fc];
                }
            }
        }
        Some(AffineHull { origin, directions, free })
    }
}

struct AffineHull {
    origin: Vec<Rational>,
    directions: Vec<Vec<Rational>>,
    free: Vec<usize>,
}

impl AffineHull {
    fn column_dot(&self, a: &[Rational], j: usize) -> Rational {
        a.iter()
            .zip(&self.directions)
            .filter(|(x, _)| !x.is_zero())
            .fold(Rational::zero(), |acc, (x, d)| acc + x * &d[j])
    }

    fn lift(&self, y: &[Rational]) -> Vec<Rational> {
        self.origin
            .iter()
            .zip(&self.directions)
            .map(|(o, d)| o + dot(d, y))
            .collect()
    }
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// A radius `R` with the feasible set inside `[-R+1, R-1]^f`, or `None` when
/// the set is empty. Free coordinates are split into positive and negative
/// parts for the LP.
fn bounding_radius(ineqs: &[(Vec<Rational>, Rational)], f: usize) -> Result<Option<Rational>> {
    let mut radius = int(1);
    for j in 0..f {
        for sense in [Sense::Maximize, Sense::Minimize] {
            let mut objective = vec![Rational::zero(); 2 * f];
            objective[2 * j] = int(1);
            objective[2 * j + 1] = int(-1);
            let mut lp = LinearProgram::new(sense, objective);
            for (a, b) in ineqs {
                let split: Vec<Rational> = a.iter().flat_map(|v| [v.clone(), -v]).collect();
                lp.add(split, Relation::Le, b.clone())?;
            }
            match solve_lp(&lp) {
                SolveResult::Infeasible => return Ok(None),
                SolveResult::Unbounded => {
                    return Err(Error::domain("vertex enumeration requires a bounded polytope"))
                }
                SolveResult::Optimal { value, .. } => {
                    let r = value.abs() + int(1);
                    if r > radius {
                        radius = r;
                    }
                }
            }
        }
    }
    Ok(Some(radius))
}

#[derive(Clone)]
struct ZeroSet(Vec<u64>);

impl ZeroSet {
    fn new(len: usize) -> ZeroSet {
        ZeroSet(vec![0; len.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &ZeroSet) -> ZeroSet {
        ZeroSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_subset(&self, other: &ZeroSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Point {
    coords: Vec<Rational>,
    zeros: ZeroSet,
}

fn double_description(
    ineqs: &[(Vec<Rational>, Rational)],
    f: usize,
    radius: &Rational,
    limits: &Limits,
) -> Result<Vec<Vec<Rational>>> {
    // Enclosing simplex: y_j >= -R (facet j) and sum y <= f R (facet f).
    let total = f + 1 + ineqs.len();
    let mut points = Vec::with_capacity(f + 1);
    let neg = -radius;
    let mut base = ZeroSet::new(total);
    for j in 0..f {
        base.insert(j);
    }
    points.push(Point { coords: vec![neg.clone(); f], zeros: base });
    let far = radius * int(2 * f as i64 - 1);
    for i in 0..f {
        let mut coords = vec![neg.clone(); f];
        coords[i] = far.clone();
        let mut zeros = ZeroSet::new(total);
        for j in (0..f).filter(|&j| j != i) {
            zeros.insert(j);
        }
        zeros.insert(f);
        points.push(Point { coords, zeros });
    }

    for (k, (a, b)) in ineqs.iter().enumerate() {
        let idx = f + 1 + k;
        let slacks: Vec<Rational> = points.iter().map(|p| b - dot(a, &p.coords)).collect();
        if slacks.iter().all(|s| !s.is_negative()) {
            for (p, s) in points.iter_mut().zip(&slacks) {
                if s.is_zero() {
                    p.zeros.insert(idx);
                }
            }
            continue;
        }
        let plus: Vec<usize> = (0..points.len()).filter(|&i| slacks[i].is_positive()).collect();
        let minus: Vec<usize> = (0..points.len()).filter(|&i| slacks[i].is_negative()).collect();
        let mut created = Vec::new();
        for &v in &plus {
            for &w in &minus {
                let common = points[v].zeros.and(&points[w].zeros);
                if common.count() + 1 < f {
                    continue;
                }
                let blocked = points
                    .iter()
                    .enumerate()
                    .any(|(u, p)| u != v && u != w && common.is_subset(&p.zeros));
                if blocked {
                    continue;
                }
                let t = &slacks[v] / (&slacks[v] - &slacks[w]);
                let coords: Vec<Rational> = points[v]
                    .coords
                    .iter()
                    .zip(&points[w].coords)
                    .map(|(pv, pw)| pv + &t * (pw - pv))
                    .collect();
                let mut zeros = common;
                zeros.insert(idx);
                created.push(Point { coords, zeros });
            }
        }
        let mut next: Vec<Point> = Vec::with_capacity(points.len() + created.len());
        for (p, s) in points.into_iter().zip(&slacks) {
            if s.is_negative() {
                continue;
            }
            let mut p = p;
            if s.is_zero() {
                p.zeros.insert(idx);
            }
            next.push(p);
        }
        next.extend(created);
        if next.len() > limits.max_vertices {
            return Err(Error::resource(format!(
                "vertex enumeration exceeded {} intermediate vertices",
                limits.max_vertices
            )));
        }
        points = next;
    }
    Ok(points.into_iter().map(|p| p.coords).collect())
}
