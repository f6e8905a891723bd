//! Dense linear algebra over exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;
pub type Mat = Vec<Vec<Q>>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn is_zero_mat(a: &Mat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return Vec::new();
    }
    let (r, c) = (a.len(), a[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = a[i][j].clone();
        }
    }
    t
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let r = a.len();
    let inner = if r == 0 { 0 } else { a[0].len() };
    let c = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = zeros(r, c);
    for i in 0..r {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..c {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
        .collect()
}

pub fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect())
        .collect()
}

pub fn mat_scale(a: &Mat, s: &Q) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn vec_mat(v: &[Q], a: &Mat) -> Vec<Q> {
    let c = if a.is_empty() { 0 } else { a[0].len() };
    let mut out = vec![Q::zero(); c];
    for (k, vk) in v.iter().enumerate() {
        if vk.is_zero() {
            continue;
        }
        for j in 0..c {
            if !a[k][j].is_zero() {
                out[j] += vk * &a[k][j];
            }
        }
    }
    out
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn trace(a: &Mat) -> Q {
    let mut s = Q::zero();
    for (i, row) in a.iter().enumerate() {
        s += &row[i];
    }
    s
}

/// Reduced row echelon form; returns the reduced matrix and its pivot columns.
pub fn rref(a: &Mat) -> (Mat, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    if rows == 0 {
        return (m, Vec::new());
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
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    if !m[r][j].is_zero() {
                        let d = &f * &m[r][j];
                        m[i][j] -= d;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank(a: &Mat) -> usize {
    rref(a).1.len()
}

/// Basis of {x : A x = 0}.
pub fn nullspace(a: &Mat) -> Vec<Vec<Q>> {
    if a.is_empty() {
        return Vec::new();
    }
    let cols = a[0].len();
    let (m, pivots) = rref(a);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Basis of {y : y A = 0} (left kernel).
pub fn left_nullspace(a: &Mat) -> Vec<Vec<Q>> {
    nullspace(&transpose(a))
}

/// Rows of an echelon basis for the row space.
pub fn row_basis(rows: &[Vec<Q>]) -> Mat {
    let (m, pivots) = rref(&rows.to_vec());
    m.into_iter().take(pivots.len()).collect()
}

/// Solve y A = b for a row vector y, if solvable.
pub fn solve_left(a: &Mat, b: &[Q]) -> Option<Vec<Q>> {
    let at = transpose(a);
    solve_right(&at, b)
}

/// Solve A x = b, returning one solution if it exists.
pub fn solve_right(a: &Mat, b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Mat = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut row = r.clone();
            row.push(bi.clone());
            row
        })
        .collect();
    if rows == 0 {
        return if b.iter().all(|x| x.is_zero()) { Some(Vec::new()) } else { None };
    }
    let (m, pivots) = rref(&aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = m[r][cols].clone();
    }
    aug.clear();
    Some(x)
}

pub fn inverse(a: &Mat) -> Option<Mat> {
    let n = a.len();
    let mut aug: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    let (m, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    aug = m.into_iter().map(|r| r[n..].to_vec()).collect();
    Some(aug)
}

pub fn det(a: &Mat) -> Q {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

pub fn is_symmetric(a: &Mat) -> bool {
    let n = a.len();
    (0..n).all(|i| (0..n).all(|j| a[i][j] == a[j][i]))
}

pub fn max_abs(a: &Mat) -> Q {
    let mut m = Q::zero();
    for r in a {
        for x in r {
            if x.abs() > m {
                m = x.abs();
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Mat {
        rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(3));
        assert_eq!(det(&a), q(18));
    }

    #[test]
    fn singular_has_kernel() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert!(inverse(&a).is_none());
        let k = nullspace(&a);
        assert_eq!(k.len(), 1);
        assert!(mat_mul(&a, &transpose(&k)).iter().all(|r| r[0].is_zero()));
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve_right(&a, &[q(3), q(1)]).unwrap();
        assert_eq!(x, vec![q(2), q(1)]);
        let b = m(&[&[1, 1], &[2, 2]]);
        assert!(solve_right(&b, &[q(1), q(3)]).is_none());
        let y = solve_left(&a, &[q(2), q(0)]).unwrap();
        assert_eq!(vec_mat(&y, &a), vec![q(2), q(0)]);
    }
}
