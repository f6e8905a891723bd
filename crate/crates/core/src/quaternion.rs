//! Definite quaternion algebra ramified at p and infinity: maximal order, right
//! ideal classes, Brandt matrices, eigenforms, genus-2 theta series and the
//! weight-0 Yoshida lift.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det, identity, inverse, mat_mul, mat_sub, nullspace, q, qf, solve_left, trace, Mat, Q};
use crate::metaplectic::is_prime;

/// Coordinates on 1, i, j, k.
pub type Quat = [Q; 4];

fn quat(a: Q, b: Q, c: Q, d: Q) -> Quat {
    [a, b, c, d]
}

/// i^2 = -1, j^2 = -p, k = ij.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub p: u64,
}

impl QuaternionAlgebra {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) || p % 4 != 3 {
            return Err(Error::UnsupportedPrime(p));
        }
        Ok(QuaternionAlgebra { p })
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let alpha = q(-1);
        let beta = q(-(self.p as i64));
        let ab = &alpha * &beta;
        let [a1, b1, c1, d1] = x;
        let [a2, b2, c2, d2] = y;
        quat(
            a1 * a2 + &alpha * b1 * b2 + &beta * c1 * c2 - &ab * d1 * d2,
            a1 * b2 + b1 * a2 - &beta * c1 * d2 + &beta * d1 * c2,
            a1 * c2 + c1 * a2 + &alpha * b1 * d2 - &alpha * d1 * b2,
            a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
        )
    }

    pub fn conj(&self, x: &Quat) -> Quat {
        quat(x[0].clone(), -x[1].clone(), -x[2].clone(), -x[3].clone())
    }

    pub fn norm(&self, x: &Quat) -> Q {
        let p = q(self.p as i64);
        &x[0] * &x[0] + &x[1] * &x[1] + &p * (&x[2] * &x[2] + &x[3] * &x[3])
    }

    pub fn trace(&self, x: &Quat) -> Q {
        q(2) * &x[0]
    }

    /// Tr(x y*).
    pub fn pair(&self, x: &Quat, y: &Quat) -> Q {
        let p = q(self.p as i64);
        q(2) * (&x[0] * &y[0] + &x[1] * &y[1] + &p * (&x[2] * &y[2] + &x[3] * &y[3]))
    }
}

fn add(x: &Quat, y: &Quat) -> Quat {
    quat(&x[0] + &y[0], &x[1] + &y[1], &x[2] + &y[2], &x[3] + &y[3])
}

fn scale(x: &Quat, s: &Q) -> Quat {
    quat(&x[0] * s, &x[1] * s, &x[2] * s, &x[3] * s)
}

fn combine(basis: &[Quat], c: &[i64]) -> Quat {
    let mut out = quat(q(0), q(0), q(0), q(0));
    for (b, &ci) in basis.iter().zip(c) {
        if ci != 0 {
            out = add(&out, &scale(b, &q(ci)));
        }
    }
    out
}

fn lcm_denominators(vs: &[Quat]) -> BigInt {
    let mut l = BigInt::one();
    for v in vs {
        for c in v {
            l = l.lcm(c.denom());
        }
    }
    l
}

/// Row Hermite normal form of an integer matrix with 4 columns, full rank.
fn hnf(mut rows: Vec<Vec<BigInt>>) -> Option<Vec<Vec<BigInt>>> {
    let ncol = 4;
    let mut pivot_row = 0;
    for col in 0..ncol {
        loop {
            let nz: Vec<usize> = (pivot_row..rows.len()).filter(|&r| !rows[r][col].is_zero()).collect();
            if nz.is_empty() {
                return None;
            }
            let best = *nz.iter().min_by_key(|&&r| rows[r][col].abs()).unwrap();
            rows.swap(pivot_row, best);
            let mut done = true;
            for r in pivot_row + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let f = rows[r][col].div_floor(&rows[pivot_row][col]);
                for c in 0..ncol {
                    let v = &rows[pivot_row][c] * &f;
                    rows[r][c] -= v;
                }
                if !rows[r][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[pivot_row][col].is_negative() {
            for c in 0..ncol {
                rows[pivot_row][c] = -rows[pivot_row][c].clone();
            }
        }
        for r in 0..pivot_row {
            let f = rows[r][col].div_floor(&rows[pivot_row][col]);
            for c in 0..ncol {
                let v = &rows[pivot_row][c] * &f;
                rows[r][c] -= v;
            }
        }
        pivot_row += 1;
    }
    rows.truncate(ncol);
    Some(rows)
}

/// A full-rank Z-lattice in the algebra, stored by its canonical Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub basis: Vec<Quat>,
}

impl Lattice {
    pub fn from_generators(gens: &[Quat]) -> Result<Self> {
        let l = lcm_denominators(gens);
        let lq = Q::from_integer(l.clone());
        let rows: Vec<Vec<BigInt>> = gens.iter().map(|g| g.iter().map(|c| (c * &lq).to_integer()).collect()).collect();
        let h = hnf(rows).ok_or_else(|| Error::InvalidParams("generators do not span a full lattice".into()))?;
        let basis = h
            .into_iter()
            .map(|r| {
                let v: Vec<Q> = r.into_iter().map(|c| Q::new(c, l.clone())).collect();
                quat(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone())
            })
            .collect();
        Ok(Lattice { basis })
    }

    pub fn product(alg: &QuaternionAlgebra, a: &Lattice, b: &Lattice) -> Result<Self> {
        let gens: Vec<Quat> = a.basis.iter().flat_map(|x| b.basis.iter().map(move |y| alg.mul(x, y))).collect();
        Self::from_generators(&gens)
    }

    pub fn conj(&self, alg: &QuaternionAlgebra) -> Result<Self> {
        Self::from_generators(&self.basis.iter().map(|x| alg.conj(x)).collect::<Vec<_>>())
    }

    /// Gcd of the values of the norm form.
    pub fn norm(&self, alg: &QuaternionAlgebra) -> Q {
        let mut vals = Vec::new();
        for (i, x) in self.basis.iter().enumerate() {
            vals.push(alg.norm(x));
            for y in &self.basis[i + 1..] {
                vals.push(alg.pair(x, y));
            }
        }
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for v in vals {
            num = num.gcd(v.numer());
            den = den.lcm(v.denom());
        }
        Q::new(num, den)
    }

    pub fn covolume(&self) -> Q {
        let m: Mat = self.basis.iter().map(|b| b.to_vec()).collect();
        det(&m).abs()
    }

    pub fn contains(&self, x: &Quat) -> bool {
        let m: Mat = self.basis.iter().map(|b| b.to_vec()).collect();
        match solve_left(&m, x) {
            Some(c) => c.iter().all(|v| v.is_integer()),
            None => false,
        }
    }

    /// Gram of the bilinear form Tr(x y*) / s.
    pub fn trace_gram(&self, alg: &QuaternionAlgebra, s: &Q) -> Mat {
        self.basis.iter().map(|x| self.basis.iter().map(|y| alg.pair(x, y) / s).collect()).collect()
    }
}

/// A lattice with the Gram of its bilinear form (x, y) = Tr(x y*) / (2 s), so that (x, x) = N(x)/s.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderLattice {
    pub basis: Vec<Quat>,
    pub gram: Mat,
    pub scale: Q,
}

impl OrderLattice {
    pub fn new(alg: &QuaternionAlgebra, lattice: &Lattice, s: Q) -> Self {
        let gram = lattice.trace_gram(alg, &(q(2) * &s));
        OrderLattice { basis: lattice.basis.clone(), gram, scale: s }
    }

    /// Gram of twice the form, which is integral for the lattices built here.
    fn integral_gram(&self) -> Result<Vec<Vec<i64>>> {
        self.gram
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| {
                        let v = c * q(2);
                        if v.is_integer() {
                            v.to_integer().to_i64().ok_or_else(|| Error::NormalizationFailure("Gram entry too large".into()))
                        } else {
                            Err(Error::NormalizationFailure(format!("scaled trace form is not integral: {}", v)))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// 1 / trace(G^{-1}), a lower bound for the smallest eigenvalue of the Gram.
    pub fn eigenvalue_lower_bound(&self) -> f64 {
        let inv = inverse(&self.gram).expect("definite");
        (q(1) / trace(&inv)).to_f64().unwrap()
    }

    /// Crude constant C with #{(x, y) : N(x) + N(y) <= k} <= C k^4 for k >= 1.
    pub fn tail_constant(&self) -> f64 {
        (2.0 / self.eigenvalue_lower_bound().sqrt() + 1.0).powi(8)
    }
}

/// Integer vectors x with x^T g x <= bound for a positive definite integer g, with their values.
pub fn short_vectors(g: &[Vec<i64>], bound: i64) -> Vec<(Vec<i64>, i64)> {
    let n = g.len();
    // Q(x) = sum_i d_i (x_i + sum_{j>i} m_ij x_j)^2.
    let mut a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let mut d = vec![0.0; n];
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        d[i] = a[i][i];
        for j in i + 1..n {
            m[i][j] = a[i][j] / d[i];
        }
        for j in i + 1..n {
            for k in i + 1..n {
                a[j][k] -= m[i][j] * d[i] * m[i][k];
            }
        }
    }
    let slack = 1e-9 * (bound as f64 + 1.0);
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    fn rec(
        i: usize,
        rem: f64,
        x: &mut Vec<i64>,
        d: &[f64],
        m: &[Vec<f64>],
        g: &[Vec<i64>],
        bound: i64,
        slack: f64,
        out: &mut Vec<(Vec<i64>, i64)>,
    ) {
        let n = d.len();
        let c: f64 = -(i + 1..n).map(|j| m[i][j] * x[j] as f64).sum::<f64>();
        let r = ((rem + slack).max(0.0) / d[i]).sqrt();
        let lo = (c - r).ceil() as i64;
        let hi = (c + r).floor() as i64;
        for v in lo..=hi {
            x[i] = v;
            let used = d[i] * (v as f64 - c).powi(2);
            if used > rem + slack {
                continue;
            }
            if i == 0 {
                let mut val = 0i64;
                for a in 0..n {
                    for b in 0..n {
                        val += x[a] * g[a][b] * x[b];
                    }
                }
                if val <= bound {
                    out.push((x.clone(), val));
                }
            } else {
                rec(i - 1, rem - used, x, d, m, g, bound, slack, out);
            }
        }
        x[i] = 0;
    }
    if n > 0 {
        rec(n - 1, bound as f64, &mut x, &d, &m, g, bound, slack, &mut out);
    }
    out
}

fn vectors_with_norm_at_most(l: &OrderLattice, norm: i64) -> Result<Vec<(Vec<i64>, i64)>> {
    let g = l.integral_gram()?;
    Ok(short_vectors(&g, 2 * norm).into_iter().map(|(x, v)| (x, v / 2)).collect())
}

/// Number of lattice vectors of scaled norm exactly `n`.
pub fn count_norm(l: &OrderLattice, n: i64) -> Result<u64> {
    Ok(vectors_with_norm_at_most(l, n)?.iter().filter(|(_, v)| *v == n).count() as u64)
}

/// The maximal order with basis 1, i, (i + j)/2, (1 + k)/2.
pub fn construct_maximal_order(p: u64) -> Result<(QuaternionAlgebra, OrderLattice)> {
    let alg = QuaternionAlgebra::new(p)?;
    let h = qf(1, 2);
    let basis = vec![
        quat(q(1), q(0), q(0), q(0)),
        quat(q(0), q(1), q(0), q(0)),
        quat(q(0), h.clone(), h.clone(), q(0)),
        quat(h.clone(), q(0), q(0), h),
    ];
    let lattice = Lattice { basis: basis.clone() };
    let order = OrderLattice { basis: basis.clone(), gram: lattice.trace_gram(&alg, &q(2)), scale: q(1) };
    let hnf_lattice = Lattice::from_generators(&basis)?;
    for x in &basis {
        if !alg.norm(x).is_integer() || !alg.trace(x).is_integer() {
            return Err(Error::InvalidParams("basis element is not integral".into()));
        }
        for y in &basis {
            if !hnf_lattice.contains(&alg.mul(x, y)) {
                return Err(Error::InvalidParams("order is not closed under multiplication".into()));
            }
        }
    }
    if reduced_discriminant(&alg, &hnf_lattice) != q(p as i64) {
        return Err(Error::InvalidParams("order is not maximal".into()));
    }
    Ok((alg, order))
}

/// sqrt |det Tr(x_a x_b)|.
pub fn reduced_discriminant(alg: &QuaternionAlgebra, l: &Lattice) -> Q {
    let m: Mat = l.basis.iter().map(|x| l.basis.iter().map(|y| alg.trace(&alg.mul(x, y))).collect()).collect();
    let d = det(&m).abs();
    let n = d.numer().sqrt();
    let dd = d.denom().sqrt();
    Q::new(n, dd)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdealClassData {
    pub p: u64,
    pub algebra: QuaternionAlgebra,
    pub order: OrderLattice,
    /// Right ideals I_1 = R, ..., I_H.
    pub ideals: Vec<Lattice>,
    pub ideal_norms: Vec<Q>,
    /// Sizes of the unit groups of the left orders, including -1.
    pub weights: Vec<u64>,
    /// L_ij = I_i conj(I_j) with norm scaled by 1/(N(I_i) N(I_j)).
    pub lattices: Vec<Vec<OrderLattice>>,
}

impl IdealClassData {
    pub fn class_number(&self) -> usize {
        self.ideals.len()
    }

    pub fn mass(&self) -> Q {
        self.weights.iter().map(|&e| qf(1, e as i64)).fold(q(0), |a, b| a + b)
    }

    pub fn lattice(&self, i: usize, j: usize) -> &OrderLattice {
        &self.lattices[i][j]
    }
}

fn pair_lattice(alg: &QuaternionAlgebra, a: &Lattice, na: &Q, b: &Lattice, nb: &Q) -> Result<OrderLattice> {
    let prod = Lattice::product(alg, a, &b.conj(alg)?)?;
    Ok(OrderLattice::new(alg, &prod, na * nb))
}

fn equivalent(alg: &QuaternionAlgebra, a: &Lattice, na: &Q, b: &Lattice, nb: &Q) -> Result<bool> {
    Ok(count_norm(&pair_lattice(alg, a, na, b, nb)?, 1)? > 0)
}

/// Right ideals J ⊂ I with N(J) = l N(I).
fn neighbors(alg: &QuaternionAlgebra, order: &Lattice, ideal: &Lattice, n_ideal: &Q, l: u64) -> Result<Vec<Lattice>> {
    let li = l as i64;
    let lq = q(li);
    let target = n_ideal * &lq;
    let scaled: Vec<Quat> = ideal.basis.iter().map(|b| scale(b, &lq)).collect();
    let mut out: Vec<Lattice> = Vec::new();
    let total = (l as usize).pow(4);
    for code in 1..total {
        let mut c = [0i64; 4];
        let mut rest = code;
        for ci in c.iter_mut() {
            *ci = (rest % l as usize) as i64;
            rest /= l as usize;
        }
        let x = combine(&ideal.basis, &c);
        let ratio = alg.norm(&x) / n_ideal;
        if !ratio.is_integer() || !(ratio.to_integer() % BigInt::from(li)).is_zero() {
            continue;
        }
        let mut gens: Vec<Quat> = order.basis.iter().map(|r| alg.mul(&x, r)).collect();
        gens.extend(scaled.iter().cloned());
        let j = Lattice::from_generators(&gens)?;
        if j.norm(alg) != target || j.covolume() != ideal.covolume() * &lq * &lq {
            continue;
        }
        if !out.contains(&j) {
            out.push(j);
        }
    }
    Ok(out)
}

/// Breadth-first search over 2-neighbors until the mass (p - 1)/24 is met.
pub fn enumerate_ideal_classes(alg: &QuaternionAlgebra, order: &OrderLattice) -> Result<IdealClassData> {
    let p = alg.p;
    let r = Lattice::from_generators(&order.basis)?;
    let target = qf(p as i64 - 1, 24);
    let mut ideals = vec![r.clone()];
    let mut norms = vec![q(1)];
    let mut weights = vec![count_norm(&pair_lattice(alg, &r, &q(1), &r, &q(1))?, 1)?];
    let mass = |w: &[u64]| w.iter().map(|&e| qf(1, e as i64)).fold(q(0), |a, b| a + b);
    let mut head = 0;
    while mass(&weights) < target && head < ideals.len() {
        let (ideal, n) = (ideals[head].clone(), norms[head].clone());
        head += 1;
        for j in neighbors(alg, &r, &ideal, &n, 2)? {
            let nj = &n * q(2);
            let mut new = true;
            for (k, known) in ideals.iter().enumerate() {
                if equivalent(alg, &j, &nj, known, &norms[k])? {
                    new = false;
                    break;
                }
            }
            if new {
                let e = count_norm(&pair_lattice(alg, &j, &nj, &j, &nj)?, 1)?;
                ideals.push(j);
                norms.push(nj);
                weights.push(e);
                if mass(&weights) >= target {
                    break;
                }
            }
        }
    }
    let m = mass(&weights);
    if m != target {
        return Err(Error::MassMismatch(format!("sum of 1/e_i is {} but (p - 1)/24 = {}", m, target)));
    }
    let mut lattices = Vec::new();
    for i in 0..ideals.len() {
        let mut row = Vec::new();
        for j in 0..ideals.len() {
            row.push(pair_lattice(alg, &ideals[i], &norms[i], &ideals[j], &norms[j])?);
        }
        lattices.push(row);
    }
    Ok(IdealClassData { p, algebra: *alg, order: order.clone(), ideals, ideal_norms: norms, weights, lattices })
}

/// Brandt matrix of a prime l != p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrix {
    pub l: u64,
    pub entries: Vec<Vec<i64>>,
}

impl BrandtMatrix {
    pub fn to_mat(&self) -> Mat {
        self.entries.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn commutes_with(&self, other: &BrandtMatrix) -> bool {
        let a = self.to_mat();
        let b = other.to_mat();
        mat_mul(&a, &b) == mat_mul(&b, &a)
    }

    /// e_j B_ij is symmetric.
    pub fn is_weighted_symmetric(&self, weights: &[u64]) -> bool {
        let h = self.entries.len();
        (0..h).all(|i| (0..h).all(|j| self.entries[i][j] * weights[j] as i64 == self.entries[j][i] * weights[i] as i64))
    }
}

/// B_ij = #{x ∈ L_ij : N(x) = l} / e_j.
pub fn brandt_matrix(l: u64, classes: &IdealClassData) -> Result<BrandtMatrix> {
    if !is_prime(l) || l == classes.p {
        return Err(Error::InvalidParams(format!("{} is not a prime different from p", l)));
    }
    let h = classes.class_number();
    let mut entries = vec![vec![0i64; h]; h];
    for i in 0..h {
        for j in 0..h {
            let c = count_norm(classes.lattice(i, j), l as i64)?;
            let e = classes.weights[j];
            if c % e != 0 {
                return Err(Error::NormalizationFailure(format!("count {} in L_{}{} is not divisible by e = {}", c, i + 1, j + 1, e)));
            }
            entries[i][j] = (c / e) as i64;
        }
    }
    let m = BrandtMatrix { l, entries };
    if m.row_sums().iter().any(|&s| s != l as i64 + 1) {
        return Err(Error::NormalizationFailure(format!("row sums {:?} differ from l + 1 = {}", m.row_sums(), l + 1)));
    }
    Ok(m)
}

/// Characteristic polynomial det(x I - A), coefficients from the constant term up.
pub fn char_poly(a: &Mat) -> Vec<Q> {
    // Faddeev-LeVerrier.
    let n = a.len();
    let mut coeffs = vec![q(0); n + 1];
    coeffs[n] = q(1);
    let mut m = identity(n);
    for k in 1..=n {
        let am = mat_mul(a, &m);
        let c = -trace(&am) / q(k as i64);
        coeffs[n - k] = c.clone();
        m = am;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &c;
        }
    }
    coeffs
}

fn eval_poly(c: &[Q], x: &Q) -> Q {
    c.iter().rev().fold(q(0), |acc, a| acc * x + a)
}

fn divide_linear(c: &[Q], root: &Q) -> Vec<Q> {
    let n = c.len() - 1;
    let mut out = vec![q(0); n];
    let mut carry = q(0);
    for k in (0..n).rev() {
        carry = &c[k + 1] + carry * root;
        out[k] = carry.clone();
    }
    out
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs().to_u64().expect("small constant term");
    (1..=n).filter(|d| n % d == 0).map(BigInt::from).collect()
}

/// Rational roots with multiplicity; IrrationalEigenvalue if the rest does not split.
pub fn rational_roots(poly: &[Q]) -> Result<Vec<Q>> {
    let den = poly.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let dq = Q::from_integer(den);
    let mut c: Vec<Q> = poly.iter().map(|x| x * &dq).collect();
    let mut roots = Vec::new();
    while c.len() > 1 {
        if c[0].is_zero() {
            roots.push(q(0));
            c = c[1..].to_vec();
            continue;
        }
        let lead = c.last().unwrap().to_integer();
        let mut found = None;
        'search: for a in divisors(&c[0].to_integer()) {
            for b in divisors(&lead) {
                for s in [1i64, -1] {
                    let r = Q::new(&a * s, b.clone());
                    if eval_poly(&c, &r).is_zero() {
                        found = Some(r);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(r) => {
                c = divide_linear(&c, &r);
                roots.push(r);
            }
            None => {
                let factor: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                return Err(Error::IrrationalEigenvalue(format!("factor with coefficients [{}] has no rational root", factor.join(", "))));
            }
        }
    }
    Ok(roots)
}

fn scale_primitive(v: Vec<Q>) -> Vec<Q> {
    let den = v.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = v.iter().map(|c| (c * Q::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    let sign = ints.iter().find(|c| !c.is_zero()).map_or(BigInt::one(), |c| if c.is_negative() { -BigInt::one() } else { BigInt::one() });
    ints.into_iter().map(|c| Q::from_integer(c * &sign / &g)).collect()
}

/// Simultaneous rational eigenvectors of a commuting family: f_1 = all-ones first,
/// the rest weighted-orthogonal to it and scaled to primitive integer vectors.
pub fn eigenforms(family: &[BrandtMatrix], weights: &[u64]) -> Result<Vec<Vec<Q>>> {
    let h = weights.len();
    if family.iter().any(|b| b.entries.len() != h) {
        return Err(Error::InvalidParams("Brandt matrices do not match the class number".into()));
    }
    for a in family {
        for b in family {
            if !a.commutes_with(b) {
                return Err(Error::InvalidParams(format!("B({}) and B({}) do not commute", a.l, b.l)));
            }
        }
    }
    // Split the whole space into joint eigenspaces; each space is a list of basis vectors.
    let mut spaces: Vec<Vec<Vec<Q>>> = vec![identity(h)];
    for b in family {
        // Column action (B f)_i = sum_j B_ij f_j; vectors are stored as rows.
        let bm = b.to_mat();
        let mut next = Vec::new();
        for s in spaces {
            let basis: Mat = s.clone();
            let k = basis.len();
            // Matrix of B on the span: image of each basis vector in coordinates.
            let mut restricted = vec![vec![q(0); k]; k];
            for (r, v) in basis.iter().enumerate() {
                let image: Vec<Q> = (0..h).map(|i| (0..h).map(|j| &bm[i][j] * &v[j]).fold(q(0), |a, x| a + x)).collect();
                let coords = solve_left(&basis, &image).ok_or_else(|| Error::InvalidParams("space is not invariant".into()))?;
                for c in 0..k {
                    restricted[c][r] = coords[c].clone();
                }
            }
            let mut roots = rational_roots(&char_poly(&restricted))?;
            roots.sort();
            roots.dedup();
            for lam in roots {
                let shifted = mat_sub(&restricted, &crate::linalg::mat_scale(&identity(k), &lam));
                let kernel = nullspace(&shifted);
                let vecs: Vec<Vec<Q>> = kernel
                    .iter()
                    .map(|c| (0..h).map(|i| (0..k).map(|r| &c[r] * &basis[r][i]).fold(q(0), |a, x| a + x)).collect())
                    .collect();
                next.push(vecs);
            }
        }
        spaces = next;
    }
    let ones = vec![q(1); h];
    let pair = |f: &[Q], g: &[Q]| -> Q { (0..h).map(|i| &f[i] * &g[i] / q(weights[i] as i64)).fold(q(0), |a, x| a + x) };
    let mut out = vec![ones.clone()];
    for s in spaces {
        if s.len() > 1 {
            return Err(Error::InvalidParams("Brandt family does not separate the eigenspaces".into()));
        }
        let v = s.into_iter().next().unwrap();
        let is_constant = v.iter().all(|c| *c == v[0]);
        if is_constant {
            continue;
        }
        if !pair(&v, &ones).is_zero() {
            return Err(Error::InvalidParams("eigenvector is not orthogonal to the constant".into()));
        }
        out.push(scale_primitive(v));
    }
    Ok(out)
}

/// Eigenvalues of each Brandt matrix on an eigenvector.
pub fn hecke_eigenvalues(family: &[BrandtMatrix], f: &[Q]) -> Vec<(u64, Q)> {
    family
        .iter()
        .filter_map(|b| {
            let i = f.iter().position(|c| !c.is_zero())?;
            let image: Q = (0..f.len()).map(|j| q(b.entries[i][j]) * &f[j]).fold(q(0), |a, x| a + x);
            Some((b.l, image / &f[i]))
        })
        .collect()
}

/// The rational eigenform with sum_i f_i / e_i = 0, from the Brandt matrices of the three smallest primes other than p.
pub fn cusp_eigenform(classes: &IdealClassData) -> Result<Vec<Q>> {
    let primes: Vec<u64> = (2u64..).filter(|&l| l != classes.p && crate::metaplectic::is_prime(l)).take(3).collect();
    let family: Vec<BrandtMatrix> = primes.iter().map(|&l| brandt_matrix(l, classes)).collect::<Result<_>>()?;
    eigenforms(&family, &classes.weights)?
        .into_iter()
        .find(|f| f.iter().zip(&classes.weights).fold(q(0), |s, (x, &e)| s + x / q(e as i64)).is_zero())
        .ok_or_else(|| Error::InvalidParams(format!("no rational cusp eigenform at p = {}", classes.p)))
}

/// Gram triple (A, 2B, C).
pub type GramKey = (i64, i64, i64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaCoefficients {
    pub bound: i64,
    pub counts: BTreeMap<GramKey, u64>,
    /// C in the bound #{T : trace T = k} <= C k^7.
    pub tail_constant: f64,
}

impl ThetaCoefficients {
    pub fn count(&self, key: GramKey) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    /// Is counts(A, 2B, C) = counts(C, 2B, A) for every stored triple.
    pub fn is_swap_symmetric(&self) -> bool {
        self.counts.iter().all(|(&(a, b, c), &n)| self.count((c, b, a)) == n)
    }

    pub fn csv_rows(&self) -> Vec<[i64; 4]> {
        self.counts.iter().map(|(&(a, b, c), &n)| [a, b, c, n as i64]).collect()
    }
}

/// Counts of pairs (x, y) in L^2 by (N(x), Tr(x y*), N(y)) with N(x) + N(y) <= bound.
pub fn theta_series_pair(l: &OrderLattice, bound: i64) -> Result<ThetaCoefficients> {
    let g = l.integral_gram()?;
    let mut vecs = vectors_with_norm_at_most(l, bound.max(0))?;
    vecs.sort_by_key(|(_, v)| *v);
    let mut counts: BTreeMap<GramKey, u64> = BTreeMap::new();
    for (x, a) in &vecs {
        let gx: Vec<i64> = (0..4).map(|j| (0..4).map(|i| x[i] * g[i][j]).sum()).collect();
        for (y, c) in &vecs {
            if a + c > bound {
                break;
            }
            let twob: i64 = (0..4).map(|j| gx[j] * y[j]).sum();
            *counts.entry((*a, twob, *c)).or_insert(0) += 1;
        }
    }
    Ok(ThetaCoefficients { bound, counts, tail_constant: l.tail_constant() })
}

/// Coefficients of sum_{i,j} theta_ij f(y_j) / (e_i e_j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoshidaLift {
    pub bound: i64,
    pub coeffs: BTreeMap<GramKey, Q>,
    pub tail_constant: f64,
}

impl YoshidaLift {
    pub fn coeff(&self, key: GramKey) -> Q {
        self.coeffs.get(&key).cloned().unwrap_or_else(|| q(0))
    }

    /// All stored triples with 4AC = (2B)^2.
    pub fn singular_keys(&self) -> Vec<GramKey> {
        self.coeffs.keys().copied().filter(|&(a, b, c)| 4 * a * c == b * b).collect()
    }

    pub fn definite_keys(&self) -> Vec<GramKey> {
        self.coeffs.keys().copied().filter(|&(a, b, c)| 4 * a * c > b * b).collect()
    }
}

/// The weight coefficients f(y_j)/(e_i e_j).
pub fn lift_weights(f: &[Q], classes: &IdealClassData) -> Vec<Vec<Q>> {
    let e = &classes.weights;
    (0..e.len()).map(|i| (0..e.len()).map(|j| &f[j] / q((e[i] * e[j]) as i64)).collect()).collect()
}

pub fn theta_table(classes: &IdealClassData, bound: i64) -> Result<Vec<Vec<ThetaCoefficients>>> {
    let h = classes.class_number();
    (0..h).map(|i| (0..h).map(|j| theta_series_pair(classes.lattice(i, j), bound)).collect()).collect()
}

pub fn yoshida_lift(f: &[Q], classes: &IdealClassData, bound: i64) -> Result<YoshidaLift> {
    let table = theta_table(classes, bound)?;
    Ok(yoshida_from_table(f, classes, &table))
}

pub fn yoshida_from_table(f: &[Q], classes: &IdealClassData, table: &[Vec<ThetaCoefficients>]) -> YoshidaLift {
    let w = lift_weights(f, classes);
    let mut coeffs: BTreeMap<GramKey, Q> = BTreeMap::new();
    let mut tail = 0.0;
    let bound = table.first().and_then(|r| r.first()).map_or(0, |t| t.bound);
    for (i, row) in table.iter().enumerate() {
        for (j, theta) in row.iter().enumerate() {
            if w[i][j].is_zero() {
                continue;
            }
            tail += w[i][j].abs().to_f64().unwrap() * theta.tail_constant;
            for (&key, &n) in &theta.counts {
                *coeffs.entry(key).or_insert_with(|| q(0)) += &w[i][j] * q(n as i64);
            }
        }
    }
    YoshidaLift { bound, coeffs, tail_constant: tail }
}

/// A point of the genus-2 Siegel upper half space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelPoint {
    pub z11: Complex64,
    pub z12: Complex64,
    pub z22: Complex64,
}

impl SiegelPoint {
    pub fn new(z11: Complex64, z12: Complex64, z22: Complex64) -> Self {
        SiegelPoint { z11, z12, z22 }
    }

    pub fn i_identity() -> Self {
        let i = Complex64::new(0.0, 1.0);
        SiegelPoint::new(i, Complex64::new(0.0, 0.0), i)
    }

    pub fn scale(&self, s: f64) -> Self {
        SiegelPoint::new(self.z11 * s, self.z12 * s, self.z22 * s)
    }

    /// Smallest eigenvalue of Im z.
    pub fn min_imag_eigenvalue(&self) -> f64 {
        let (a, b, c) = (self.z11.im, self.z12.im, self.z22.im);
        let m = (a + c) / 2.0;
        let r = (((a - c) / 2.0).powi(2) + b * b).sqrt();
        m - r
    }

    /// Trace(T z) for T = [[A, B], [B, C]].
    pub fn trace_with(&self, key: GramKey) -> Complex64 {
        let (a, twob, c) = key;
        self.z11 * a as f64 + self.z12 * twob as f64 + self.z22 * c as f64
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected three entries z11,z12,z22 in {:?}", s)));
        }
        let z: Vec<Complex64> = parts
            .iter()
            .map(|p| p.trim().parse::<Complex64>().map_err(|_| Error::Parse(format!("bad complex number {:?}", p))))
            .collect::<Result<_>>()?;
        Ok(SiegelPoint::new(z[0], z[1], z[2]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub value: Complex64,
    /// value - (zero-triple coefficient), summed without cancellation against it.
    pub excess: Complex64,
    pub tail_bound: f64,
}

/// C * sum_{k > bound} k^7 e^{-2 pi lam k}.
pub fn tail_sum(constant: f64, bound: i64, lam: f64) -> f64 {
    let rate = 2.0 * PI * lam;
    let mut sum = 0.0;
    let mut k = (bound + 1).max(1) as f64;
    let peak = 7.0 / rate;
    loop {
        let term = k.powi(7) * (-rate * k).exp();
        sum += term;
        if k > peak {
            let ratio = ((k + 1.0) / k).powi(7) * (-rate).exp();
            if ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-17 * sum.max(f64::MIN_POSITIVE) {
                sum += term * ratio / (1.0 - ratio);
                break;
            }
            if term == 0.0 {
                break;
            }
        }
        k += 1.0;
    }
    constant * sum
}

/// sum_T c(T) exp(2 pi i Trace(T z)) over the given coefficients plus the tail bound.
pub fn evaluate_series<'a, I>(terms: I, bound: i64, tail_constant: f64, z: &SiegelPoint) -> Result<ThetaValue>
where
    I: IntoIterator<Item = (GramKey, f64)>,
{
    let lam = z.min_imag_eigenvalue();
    if !(lam > 0.0) {
        return Err(Error::DivergentTail(lam));
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let mut zero = Complex64::new(0.0, 0.0);
    let mut excess = Complex64::new(0.0, 0.0);
    for (key, c) in terms {
        if c == 0.0 {
            continue;
        }
        if key == (0, 0, 0) {
            zero += c;
        } else {
            excess += (two_pi_i * z.trace_with(key)).exp() * c;
        }
    }
    Ok(ThetaValue { value: zero + excess, excess, tail_bound: tail_sum(tail_constant, bound, lam) })
}

pub fn evaluate_theta_point(coeffs: &ThetaCoefficients, z: &SiegelPoint) -> Result<ThetaValue> {
    evaluate_series(coeffs.counts.iter().map(|(&k, &n)| (k, n as f64)), coeffs.bound, coeffs.tail_constant, z)
}

pub fn evaluate_lift_point(lift: &YoshidaLift, z: &SiegelPoint) -> Result<ThetaValue> {
    evaluate_series(lift.coeffs.iter().map(|(&k, c)| (k, c.to_f64().unwrap())), lift.bound, lift.tail_constant, z)
}
