use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Row marginals `a` and column marginals `b` of a transportation problem
/// with signed entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportInstance {
    #[serde(with = "crate::rational::serde_vec")]
    pub a: Vec<Rational>,
    #[serde(with = "crate::rational::serde_vec")]
    pub b: Vec<Rational>,
}

fn same_sign(x: &Rational, y: &Rational) -> bool {
    !(x.is_positive() && y.is_negative() || x.is_negative() && y.is_positive())
}

/// A matrix with row sums `a`, column sums `b` and absolute mass at most
/// `max(sum |a|, sum |b|)`.
///
/// Each step takes the lexicographically least (row, column) pair whose
/// marginals share a sign. The smaller of the two in absolute value is
/// placed at that entry, the corresponding row or column is closed with
/// zeros and the other marginal shrinks by the same amount. A single
/// remaining row or column copies the other marginal.
pub fn transport(inst: &TransportInstance) -> Result<Vec<Vec<Rational>>> {
    let (m, n) = (inst.a.len(), inst.b.len());
    if m == 0 || n == 0 {
        return Err(Error::domain("transport marginals must be nonempty"));
    }
    let sa: Rational = inst.a.iter().sum();
    let sb: Rational = inst.b.iter().sum();
    if sa != sb {
        return Err(Error::precondition(format!("marginal totals differ: {sa} vs {sb}")));
    }
    let mut a = inst.a.clone();
    let mut b = inst.b.clone();
    let mut x = vec![vec![Rational::zero(); n]; m];
    let mut rows: Vec<usize> = (0..m).collect();
    let mut cols: Vec<usize> = (0..n).collect();
    loop {
        if let [i] = rows[..] {
            for &j in &cols {
                x[i][j] = b[j].clone();
            }
            return Ok(x);
        }
        if let [j] = cols[..] {
            for &i in &rows {
                x[i][j] = a[i].clone();
            }
            return Ok(x);
        }
        let (ri, cj) = rows
            .iter()
            .enumerate()
            .find_map(|(ri, &i)| cols.iter().position(|&j| same_sign(&a[i], &b[j])).map(|cj| (ri, cj)))
            .expect("equal totals force a same-sign pair");
        let (i, j) = (rows[ri], cols[cj]);
        if a[i].abs() <= b[j].abs() {
            x[i][j] = a[i].clone();
            let ai = a[i].clone();
            b[j] -= ai;
            rows.remove(ri);
        } else {
            x[i][j] = b[j].clone();
            let bj = b[j].clone();
            a[i] -= bj;
            cols.remove(cj);
        }
    }
}
