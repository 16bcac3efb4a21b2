//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::lattice::Rational;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Whether `v` lies in the row span of `rows`.
pub fn in_span(rows: &[Vec<Rational>], v: &[Rational]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    let r = rank(rows);
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(&ext) == r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::int;

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank(&[row(&[1, 2]), row(&[2, 4])]), 1);
        assert_eq!(rank(&[row(&[1, 0]), row(&[0, 1]), row(&[1, 1])]), 2);
        assert_eq!(rank(&[row(&[0, 0])]), 0);
        assert_eq!(rank(&[]), 0);
        assert!(in_span(&[row(&[1, 1, 0])], &row(&[3, 3, 0])));
        assert!(!in_span(&[row(&[1, 1, 0])], &row(&[3, 2, 0])));
    }
}
