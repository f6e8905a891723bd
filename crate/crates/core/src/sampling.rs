//! Seeded random generators for group elements, parameters and tensors used
//! by the property tests, the acceptance suite and the CLI.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::exact_arith::{ModuleVector, SymplecticSpace};
use crate::linalg::{mat_mul, q, zeros, Mat, Q};
use crate::loop_symplectic::{exp_truncated, LoopMatrix, ParabolicSplit, UnipotentParams};
use crate::metaplectic::LaurentUnit;
use crate::quaternion::SiegelPoint;
use crate::weil_phase::{OrthogonalSeries, QuadraticSpace, TensorVector};

fn small<R: Rng + ?Sized>(rng: &mut R, mag: i64) -> Q {
    q(rng.gen_range(-mag..=mag))
}

fn sparse<R: Rng + ?Sized>(rng: &mut R, mag: i64) -> Q {
    if rng.gen_bool(0.5) {
        Q::from_integer(0.into())
    } else {
        small(rng, mag)
    }
}

/// Random entries on rows x cols with exponents minval..minval+terms.
pub fn random_block<R: Rng + ?Sized>(
    rng: &mut R,
    s: SymplecticSpace,
    rows: &[usize],
    cols: &[usize],
    minval: i32,
    terms: i32,
) -> LoopMatrix {
    let coeffs: Vec<(i32, Mat)> = (minval..minval + terms)
        .map(|k| {
            let mut m = zeros(s.dim(), s.dim());
            for &i in rows {
                for &j in cols {
                    m[i][j] = sparse(rng, 2);
                }
            }
            (k, m)
        })
        .collect();
    LoopMatrix::from_coeffs(s, &coeffs)
}

/// Element sum_k t^k S_k J^{-1} of t^l sp(W) with S_k symmetric on the
/// symplectically closed coordinate set `idx`.
pub fn random_sp_lie<R: Rng + ?Sized>(rng: &mut R, s: SymplecticSpace, idx: &[usize], l: i32, terms: i32) -> LoopMatrix {
    let j_inv: Mat = s.gram().iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let coeffs: Vec<(i32, Mat)> = (l..l + terms)
        .map(|k| {
            let mut sym = zeros(s.dim(), s.dim());
            for (a, &i) in idx.iter().enumerate() {
                for &j in &idx[a..] {
                    let c = sparse(rng, 2);
                    sym[i][j] = c.clone();
                    sym[j][i] = c;
                }
            }
            (k, mat_mul(&sym, &j_inv))
        })
        .collect();
    LoopMatrix::from_coeffs(s, &coeffs)
}

/// Random symmetric map between l+ and l- pairs of coordinates: entry (rows[i], cols[j]) = entry (rows[j], cols[i]).
fn random_sym_pairing<R: Rng + ?Sized>(
    rng: &mut R,
    s: SymplecticSpace,
    rows: &[usize],
    cols: &[usize],
    minval: i32,
    terms: i32,
) -> LoopMatrix {
    let coeffs: Vec<(i32, Mat)> = (minval..minval + terms)
        .map(|k| {
            let mut m = zeros(s.dim(), s.dim());
            for i in 0..rows.len() {
                for j in i..rows.len() {
                    let c = sparse(rng, 2);
                    m[rows[i]][cols[j]] = c.clone();
                    m[rows[j]][cols[i]] = c;
                }
            }
            (k, m)
        })
        .collect();
    LoopMatrix::from_coeffs(s, &coeffs)
}

/// Random parameter packs (plus, zero, minus) with `terms` t-coefficients per map.
pub fn random_u_params<R: Rng + ?Sized>(
    rng: &mut R,
    sp: ParabolicSplit,
    terms: i32,
) -> (UnipotentParams, UnipotentParams, UnipotentParams) {
    let s = sp.space;
    let (p, m, w) = (sp.plus(), sp.minus(), sp.w0());
    let mu = random_block(rng, s, &p, &w, 0, terms);
    let beta = random_sym_pairing(rng, s, &p, &m, 0, terms);
    let nu = random_block(rng, s, &w, &p, 1, terms);
    let gamma = random_sym_pairing(rng, s, &m, &p, 2, terms);
    let alpha = LoopMatrix::partial_identity(s, &p).add(&random_block(rng, s, &p, &p, 1, terms));
    let delta = exp_truncated(&random_sp_lie(rng, s, &w, 1, terms))
        .expect("random Lie element")
        .keep_block(&w, &w);
    (
        UnipotentParams::plus(sp, mu, beta),
        UnipotentParams::zero_part(sp, alpha, delta),
        UnipotentParams::minus(sp, nu, gamma),
    )
}

/// Random element of Sp(W[[t]]): a constant Levi-type factor times exp of a
/// random element of t sp(W)[[t]].
pub fn random_symplectic_series<R: Rng + ?Sized>(rng: &mut R, s: SymplecticSpace, terms: i32) -> LoopMatrix {
    let n = s.n;
    let all: Vec<usize> = (0..s.dim()).collect();
    // Unipotent upper-triangular A on the e-block; A^{-T} on the f-block.
    let mut a = crate::linalg::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            a[i][j] = small(rng, 1);
        }
    }
    let a_inv_t = crate::linalg::transpose(&crate::linalg::inverse(&a).expect("unipotent"));
    let mut levi = zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            levi[i][j] = a[i][j].clone();
            levi[n + i][n + j] = a_inv_t[i][j].clone();
        }
    }
    let mut shear = crate::linalg::identity(2 * n);
    for i in 0..n {
        for j in i..n {
            let c = small(rng, 1);
            shear[i][n + j] = c.clone();
            shear[j][n + i] = c;
        }
    }
    let constant = LoopMatrix::from_constant(s, &mat_mul(&levi, &shear));
    let e = exp_truncated(&random_sp_lie(rng, s, &all, 1, terms)).expect("random Lie element");
    constant.mul(&e).expect("power series product")
}

/// Random rational vector with small entries, nonzero.
pub fn random_nonzero_vec<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<Q> {
    loop {
        let v: Vec<Q> = (0..m).map(|_| small(rng, 2)).collect();
        if v.iter().any(|x| *x != q(0)) {
            return v;
        }
    }
}

/// Random tensor with W-support on the coordinates `cols` and exponents -depth..=-1.
pub fn random_tensor_on<R: Rng + ?Sized>(
    rng: &mut R,
    ws: SymplecticSpace,
    vs: &QuadraticSpace,
    cols: &[usize],
    depth: i32,
) -> TensorVector {
    let mut coeffs = BTreeMap::new();
    for k in -depth..=-1 {
        let mut m = zeros(vs.m, ws.dim());
        for row in m.iter_mut() {
            for &c in cols {
                row[c] = sparse(rng, 2);
            }
        }
        coeffs.insert(k, m);
    }
    TensorVector::from_layers(ws, vs.clone(), coeffs).expect("X-supported")
}

pub fn random_tensor<R: Rng + ?Sized>(rng: &mut R, ws: SymplecticSpace, vs: &QuadraticSpace, depth: i32) -> TensorVector {
    let all: Vec<usize> = (0..ws.dim()).collect();
    random_tensor_on(rng, ws, vs, &all, depth)
}

/// Random element of O(V)[[t]]: a product of constant reflections times exp of
/// a random element of t o(V)[[t]].
pub fn random_orthogonal_series<R: Rng + ?Sized>(rng: &mut R, vs: &QuadraticSpace, terms: i32) -> OrthogonalSeries {
    let m = vs.m;
    let mut h = OrthogonalSeries::identity(m);
    for _ in 0..rng.gen_range(0..=2usize) {
        let v = random_nonzero_vec(rng, m);
        if let Some(r) = OrthogonalSeries::reflection(vs, &v) {
            h = h.mul(&r).expect("constant product");
        }
    }
    let mut xi: BTreeMap<i32, Mat> = BTreeMap::new();
    let g_inv = crate::linalg::inverse(&vs.gram).expect("nondegenerate");
    for k in 1..=terms {
        let mut a = zeros(m, m);
        for i in 0..m {
            for j in i + 1..m {
                let c = sparse(rng, 2);
                a[i][j] = c.clone();
                a[j][i] = -c;
            }
        }
        xi.insert(k, mat_mul(&a, &g_inv));
    }
    let e = OrthogonalSeries::exp(vs, &OrthogonalSeries::from_coeffs(m, xi)).expect("skew argument");
    h.mul(&e).expect("power series product")
}

/// Random element of W((t)) with exponents lo..=hi.
pub fn random_module_vector<R: Rng + ?Sized>(rng: &mut R, s: SymplecticSpace, lo: i32, hi: i32) -> ModuleVector {
    let mut coeffs = BTreeMap::new();
    for k in lo..=hi {
        coeffs.insert(k, (0..s.dim()).map(|_| sparse(rng, 3)).collect());
    }
    ModuleVector::from_map(s, coeffs).expect("exponents inside the window")
}

/// Random nonzero rational n/d with |n|, d <= mag.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, mag: i64) -> Q {
    loop {
        let n = rng.gen_range(-mag..=mag);
        if n != 0 {
            return Q::new(n.into(), rng.gen_range(1..=mag).into());
        }
    }
}

/// Random nonzero rational with numerator and denominator built from the odd primes up to 13.
pub fn random_odd_rational<R: Rng + ?Sized>(rng: &mut R) -> Q {
    const PRIMES: [i64; 5] = [3, 5, 7, 11, 13];
    let part = |rng: &mut R| -> i64 { (0..rng.gen_range(0..=2)).map(|_| PRIMES[rng.gen_range(0..PRIMES.len())]).product() };
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let n = part(rng);
    let d = part(rng);
    Q::new((sign * n).into(), d.into())
}

/// c t^m u(t) with m in -2..=2 and a short random unit part; `odd` restricts c to odd-prime support.
pub fn random_laurent_unit<R: Rng + ?Sized>(rng: &mut R, odd: bool) -> LaurentUnit {
    let val = rng.gen_range(-2..=2);
    let c = if odd { random_odd_rational(rng) } else { random_rational(rng, 6) };
    let mut u = vec![q(1)];
    for _ in 0..rng.gen_range(0..=3) {
        u.push(small(rng, 2));
    }
    LaurentUnit::new(val, c, u).expect("nonzero leading coefficient")
}

/// Random point of the genus-two Siegel upper half space with imaginary part eigenvalues of order `scale`.
pub fn random_siegel_point<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> SiegelPoint {
    let y11 = scale * rng.gen_range(0.5..1.5);
    let y22 = scale * rng.gen_range(0.5..1.5);
    let y12 = 0.4 * (y11 * y22).sqrt() * rng.gen_range(-1.0..1.0);
    let x = |rng: &mut R| rng.gen_range(-0.5..0.5);
    SiegelPoint::new(Complex64::new(x(rng), y11), Complex64::new(x(rng), y12), Complex64::new(x(rng), y22))
}
