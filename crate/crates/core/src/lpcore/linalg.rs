use num_traits::Zero;

use crate::rational::Rational;

/// Reduced row echelon form of an augmented system `[A | b]` (each row has
/// `cols + 1` entries).
pub(crate) struct Echelon {
    pub rows: Vec<Vec<Rational>>,
    /// Pivot column of each row, in increasing order.
    pub pivots: Vec<usize>,
    /// False when some row reduces to `0 = c` with `c != 0`.
    pub consistent: bool,
}

pub(crate) fn rref(mut rows: Vec<Vec<Rational>>, cols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (j, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    let delta = &f * pv;
                    row[j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    let consistent = rows[r..].iter().all(|row| row[cols].is_zero());
    rows.truncate(r);
    Echelon { rows, pivots, consistent }
}

/// Unique solution of a square-or-tall system, if the system has full column
/// rank and is consistent.
pub(crate) fn solve_unique(rows: Vec<Vec<Rational>>, cols: usize) -> Option<Vec<Rational>> {
    let e = rref(rows, cols);
    if !e.consistent || e.pivots.len() != cols {
        return None;
    }
    Some(e.rows.iter().map(|row| row[cols].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn solves_and_detects_rank_deficiency() {
        let rows = vec![vec![int(2), int(1), int(5)], vec![int(1), int(-1), int(1)]];
        assert_eq!(solve_unique(rows, 2), Some(vec![int(2), int(1)]));
        let rows = vec![vec![int(1), int(1), int(1)], vec![int(2), int(2), int(2)]];
        assert_eq!(solve_unique(rows, 2), None);
        let rows = vec![vec![int(1), int(1), int(1)], vec![int(1), int(1), int(3)]];
        assert!(!rref(rows, 2).consistent);
    }
}
