//! Truncated Laurent series over exact rationals, the residue map, the residue
//! symplectic form on W((t)) and the X/Y projections.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicI32, Ordering};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{q, Q};

static TRUNCATION_DEPTH: AtomicI32 = AtomicI32::new(8);

/// Global truncation depth D: series live in the exponent window [-D, D].
pub fn truncation_depth() -> i32 {
    TRUNCATION_DEPTH.load(Ordering::Relaxed)
}

/// Set the global truncation depth. Intended to be called once at start-up.
pub fn set_truncation_depth(d: i32) {
    assert!(d >= 1, "truncation depth must be positive");
    TRUNCATION_DEPTH.store(d, Ordering::Relaxed);
}

fn check_exponent(k: i32) -> Result<()> {
    let d = truncation_depth();
    if k < -d || k > d {
        Err(Error::WindowOverflow { exponent: k, depth: d })
    } else {
        Ok(())
    }
}

/// A Laurent polynomial sum c_k t^k with rational coefficients and a declared window.
#[derive(Clone, Serialize, Deserialize)]
pub struct LaurentScalar {
    coeffs: BTreeMap<i32, Q>,
    window: (i32, i32),
}

/// Equality is equality of series; the declared windows are bookkeeping.
impl PartialEq for LaurentScalar {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for LaurentScalar {}

impl fmt::Debug for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(k, c)| match k {
                0 => format!("{}", c),
                _ => format!("{}*t^{}", c, k),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Default for LaurentScalar {
    fn default() -> Self {
        Self::zero()
    }
}

impl LaurentScalar {
    pub fn zero() -> Self {
        LaurentScalar { coeffs: BTreeMap::new(), window: (0, 0) }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(0, c)
    }

    /// c t^k. Panics if k is outside the truncation window; use `try_monomial` otherwise.
    pub fn monomial(k: i32, c: Q) -> Self {
        Self::try_monomial(k, c).expect("monomial outside truncation window")
    }

    pub fn try_monomial(k: i32, c: Q) -> Result<Self> {
        check_exponent(k)?;
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Ok(LaurentScalar { coeffs, window: (k, k) })
    }

    /// Build from (exponent, coefficient) pairs; repeated exponents are summed.
    pub fn from_terms(terms: &[(i32, Q)]) -> Result<Self> {
        let mut coeffs: BTreeMap<i32, Q> = BTreeMap::new();
        for (k, c) in terms {
            check_exponent(*k)?;
            *coeffs.entry(*k).or_insert_with(Q::zero) += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        let window = match (coeffs.keys().next(), coeffs.keys().next_back()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0, 0),
        };
        Ok(LaurentScalar { coeffs, window })
    }

    pub fn from_int_terms(terms: &[(i32, i64)]) -> Result<Self> {
        let t: Vec<(i32, Q)> = terms.iter().map(|&(k, c)| (k, q(c))).collect();
        Self::from_terms(&t)
    }

    pub fn coeff(&self, k: i32) -> Q {
        self.coeffs.get(&k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i32, &Q)> {
        self.coeffs.iter()
    }

    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeff(0).is_one()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn degree(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn neg(&self) -> Self {
        LaurentScalar {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
            window: self.window,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = coeffs.entry(*k).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                coeffs.remove(k);
            }
        }
        let window = hull(self, other);
        LaurentScalar { coeffs, window }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return LaurentScalar { coeffs: BTreeMap::new(), window: self.window };
        }
        LaurentScalar {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * s)).collect(),
            window: self.window,
        }
    }

    /// Multiply by t^j.
    pub fn shift(&self, j: i32) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            check_exponent(k + j)?;
            coeffs.insert(k + j, c.clone());
        }
        Ok(LaurentScalar { coeffs, window: (self.window.0 + j, self.window.1 + j) })
    }

    /// Exact product; fails if any coefficient leaves the window [-D, D].
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_impl(other, false)
    }

    /// Product as truncated power series: exponents above D are dropped
    /// (the series is known modulo t^(D+1)); exponents below -D still fail.
    pub fn mul_trunc(&self, other: &Self) -> Result<Self> {
        self.mul_impl(other, true)
    }

    fn mul_impl(&self, other: &Self, drop_top: bool) -> Result<Self> {
        let d = truncation_depth();
        let mut coeffs: BTreeMap<i32, Q> = BTreeMap::new();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                let k = i + j;
                if k > d && drop_top {
                    continue;
                }
                check_exponent(k)?;
                *coeffs.entry(k).or_insert_with(Q::zero) += a * b;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        let lo = (self.window.0 + other.window.0).max(-d);
        let hi = (self.window.1 + other.window.1).min(d);
        Ok(LaurentScalar { coeffs, window: (lo.min(hi), hi.max(lo)) })
    }

    /// Keep exponents at most `top`.
    pub fn truncate_above(&self, top: i32) -> Self {
        LaurentScalar {
            coeffs: self.coeffs.range(..=top).map(|(k, c)| (*k, c.clone())).collect(),
            window: (self.window.0.min(top), self.window.1.min(top)),
        }
    }

    /// Keep exponents in [lo, hi].
    pub fn restrict(&self, lo: i32, hi: i32) -> Self {
        LaurentScalar {
            coeffs: self.coeffs.range(lo..=hi).map(|(k, c)| (*k, c.clone())).collect(),
            window: (lo, hi),
        }
    }

    /// Inverse of a power series with nonzero constant term, modulo t^(D+1).
    pub fn inv_unit(&self) -> Result<Self> {
        let d = truncation_depth();
        if self.valuation().map_or(true, |v| v != 0) {
            return Err(Error::InvalidParams(
                "series inversion needs a power series with nonzero constant term".into(),
            ));
        }
        let c0 = self.coeff(0);
        let mut inv: Vec<Q> = vec![Q::zero(); (d + 1) as usize];
        inv[0] = c0.recip();
        for k in 1..=d {
            let mut s = Q::zero();
            for j in 1..=k {
                let a = self.coeff(j);
                if !a.is_zero() {
                    s += a * &inv[(k - j) as usize];
                }
            }
            inv[k as usize] = -s * &inv[0];
        }
        let terms: Vec<(i32, Q)> = inv.into_iter().enumerate().map(|(k, c)| (k as i32, c)).collect();
        Self::from_terms(&terms)
    }
}

fn hull(a: &LaurentScalar, b: &LaurentScalar) -> (i32, i32) {
    (a.window.0.min(b.window.0), a.window.1.max(b.window.1))
}

/// Coefficient of t^-1.
pub fn residue(a: &LaurentScalar) -> Q {
    a.coeff(-1)
}

/// The symplectic space W of dimension 2n with basis e_1..e_n, f_1..f_n and
/// gram [[0, I], [-I, 0]].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticSpace {
    pub n: usize,
}

impl SymplecticSpace {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "half-dimension must be positive");
        SymplecticSpace { n }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Coordinate index of e_i (1-based label).
    pub fn e(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.n);
        i - 1
    }

    /// Coordinate index of f_i (1-based label).
    pub fn f(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.n);
        self.n + i - 1
    }

    pub fn label(&self, idx: usize) -> String {
        if idx < self.n {
            format!("e{}", idx + 1)
        } else {
            format!("f{}", idx - self.n + 1)
        }
    }

    /// Gram entry <b_i, b_j>.
    pub fn gram_entry(&self, i: usize, j: usize) -> i64 {
        let n = self.n;
        if i < n && j == i + n {
            1
        } else if i >= n && j + n == i {
            -1
        } else {
            0
        }
    }

    pub fn gram(&self) -> Vec<Vec<Q>> {
        let d = self.dim();
        (0..d).map(|i| (0..d).map(|j| q(self.gram_entry(i, j))).collect()).collect()
    }

    /// <a, b>_F for constant vectors.
    pub fn pair(&self, a: &[Q], b: &[Q]) -> Q {
        let n = self.n;
        let mut s = Q::zero();
        for i in 0..n {
            if !a[i].is_zero() && !b[i + n].is_zero() {
                s += &a[i] * &b[i + n];
            }
            if !a[i + n].is_zero() && !b[i].is_zero() {
                s -= &a[i + n] * &b[i];
            }
        }
        s
    }
}

/// An element sum_k t^k w_k of W((t)) with finitely many nonzero w_k.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleVector {
    pub space: SymplecticSpace,
    coeffs: BTreeMap<i32, Vec<Q>>,
}

impl fmt::Debug for ModuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, v) in &self.coeffs {
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    parts.push(format!("{}*{}*t^{}", c, self.space.label(i), k));
                }
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl ModuleVector {
    pub fn zero(space: SymplecticSpace) -> Self {
        ModuleVector { space, coeffs: BTreeMap::new() }
    }

    /// c * b_idx * t^k.
    pub fn monomial(space: SymplecticSpace, idx: usize, k: i32, c: Q) -> Result<Self> {
        check_exponent(k)?;
        let mut v = vec![Q::zero(); space.dim()];
        v[idx] = c;
        Self::from_map(space, [(k, v)].into_iter().collect())
    }

    pub fn from_map(space: SymplecticSpace, coeffs: BTreeMap<i32, Vec<Q>>) -> Result<Self> {
        let mut out = BTreeMap::new();
        for (k, v) in coeffs {
            assert_eq!(v.len(), space.dim(), "coefficient vector has wrong length");
            if v.iter().any(|x| !x.is_zero()) {
                check_exponent(k)?;
                out.insert(k, v);
            }
        }
        Ok(ModuleVector { space, coeffs: out })
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Vec<Q>> {
        &self.coeffs
    }

    pub fn coeff(&self, k: i32) -> Vec<Q> {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| vec![Q::zero(); self.space.dim()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space);
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let e = coeffs.entry(*k).or_insert_with(|| vec![Q::zero(); self.space.dim()]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        coeffs.retain(|_, v| v.iter().any(|x| !x.is_zero()));
        ModuleVector { space: self.space, coeffs }
    }

    pub fn scale(&self, s: &Q) -> Self {
        if s.is_zero() {
            return Self::zero(self.space);
        }
        ModuleVector {
            space: self.space,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.iter().map(|x| x * s).collect())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&q(-1)))
    }

    /// Multiply by t^j.
    pub fn shift(&self, j: i32) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            check_exponent(k + j)?;
            coeffs.insert(k + j, v.clone());
        }
        Ok(ModuleVector { space: self.space, coeffs })
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_x_supported(&self) -> bool {
        self.max_exponent().map_or(true, |k| k <= -1)
    }
}

/// Res <w, w2> with <,> extended F((t))-bilinearly.
pub fn residue_form(w: &ModuleVector, w2: &ModuleVector) -> Result<Q> {
    assert_eq!(w.space, w2.space, "vectors live in different spaces");
    for k in w.coeffs.keys().chain(w2.coeffs.keys()) {
        check_exponent(*k)?;
    }
    let mut s = Q::zero();
    for (k, a) in &w.coeffs {
        if let Some(b) = w2.coeffs.get(&(-1 - k)) {
            s += w.space.pair(a, b);
        }
    }
    Ok(s)
}

pub fn project_x(w: &ModuleVector) -> ModuleVector {
    ModuleVector {
        space: w.space,
        coeffs: w.coeffs.range(..=-1).map(|(k, v)| (*k, v.clone())).collect(),
    }
}

pub fn project_y(w: &ModuleVector) -> ModuleVector {
    ModuleVector {
        space: w.space,
        coeffs: w.coeffs.range(0..).map(|(k, v)| (*k, v.clone())).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ls(terms: &[(i32, i64)]) -> LaurentScalar {
        LaurentScalar::from_int_terms(terms).unwrap()
    }

    #[test]
    fn residue_examples() {
        assert_eq!(residue(&ls(&[(-1, 1)])), q(1));
        assert_eq!(residue(&ls(&[(-2, 3), (-1, 5), (0, 7)])), q(5));
        let p = ls(&[(0, 1), (-1, 1)]).mul(&ls(&[(0, 2), (-1, 1)])).unwrap();
        assert_eq!(p, ls(&[(-2, 1), (-1, 3), (0, 2)]));
        assert_eq!(residue(&p), q(3));
    }

    #[test]
    fn residue_form_examples() {
        let s = SymplecticSpace::new(1);
        let e1 = |k| ModuleVector::monomial(s, s.e(1), k, q(1)).unwrap();
        let f1 = |k| ModuleVector::monomial(s, s.f(1), k, q(1)).unwrap();
        assert_eq!(residue_form(&e1(-1), &f1(0)).unwrap(), q(1));
        assert_eq!(residue_form(&e1(0), &f1(0)).unwrap(), q(0));
        assert_eq!(residue_form(&e1(-2), &f1(0)).unwrap(), q(0));
        assert_eq!(residue_form(&e1(-2), &f1(1)).unwrap(), q(1));
        assert_eq!(residue_form(&f1(1), &e1(-2)).unwrap(), q(-1));
    }

    #[test]
    fn projections() {
        let s = SymplecticSpace::new(2);
        let a = ModuleVector::monomial(s, s.e(1), -1, q(1)).unwrap();
        let b = ModuleVector::monomial(s, s.f(2), 2, q(1)).unwrap();
        let w = a.add(&b);
        assert_eq!(project_x(&w), a);
        assert_eq!(project_y(&w), b);
        assert!(project_x(&ModuleVector::zero(s)).is_zero());
    }

    #[test]
    fn window_overflow() {
        let d = truncation_depth();
        assert!(matches!(LaurentScalar::try_monomial(d + 1, q(1)), Err(Error::WindowOverflow { .. })));
        let a = ls(&[(-d, 1)]);
        assert!(a.mul(&ls(&[(-1, 1)])).is_err());
        let top = ls(&[(d, 1)]);
        assert!(top.mul(&ls(&[(1, 1)])).is_err());
        assert!(top.mul_trunc(&ls(&[(1, 1)])).unwrap().is_zero());
    }

    #[test]
    fn window_is_interval_arithmetic() {
        let a = ls(&[(-2, 1), (1, 1)]);
        let b = ls(&[(0, 1), (3, 2)]);
        assert_eq!(a.mul(&b).unwrap().window(), (-2, 4));
    }

    #[test]
    fn unit_inverse() {
        let a = ls(&[(0, 1), (1, 1)]);
        let inv = a.inv_unit().unwrap();
        let d = truncation_depth();
        for k in 0..=d {
            assert_eq!(inv.coeff(k), q(if k % 2 == 0 { 1 } else { -1 }));
        }
        assert!(a.mul_trunc(&inv).unwrap().is_one());
    }

    fn arb_vec(n: usize, lo: i32, hi: i32) -> impl Strategy<Value = ModuleVector> {
        prop::collection::vec((lo..=hi, 0..2 * n, -5i64..=5), 0..6).prop_map(move |terms| {
            let s = SymplecticSpace::new(n);
            terms.into_iter().fold(ModuleVector::zero(s), |acc, (k, i, c)| {
                acc.add(&ModuleVector::monomial(s, i, k, q(c)).unwrap())
            })
        })
    }

    proptest! {
        #[test]
        fn residue_form_antisymmetric(w in arb_vec(2, -4, 3), v in arb_vec(2, -4, 3)) {
            prop_assert_eq!(residue_form(&w, &v).unwrap(), -residue_form(&v, &w).unwrap());
        }

        #[test]
        fn x_and_y_are_lagrangian(w in arb_vec(3, -4, 4), v in arb_vec(3, -4, 4)) {
            prop_assert!(residue_form(&project_x(&w), &project_x(&v)).unwrap().is_zero());
            prop_assert!(residue_form(&project_y(&w), &project_y(&v)).unwrap().is_zero());
        }

        #[test]
        fn projections_split(w in arb_vec(2, -4, 4)) {
            prop_assert_eq!(project_x(&w).add(&project_y(&w)), w.clone());
            prop_assert_eq!(project_x(&project_x(&w)), project_x(&w));
            prop_assert_eq!(project_y(&project_y(&w)), project_y(&w));
        }

        #[test]
        fn nondegenerate_on_monomials(idx in 0usize..4, k in -5i32..=-1) {
            let s = SymplecticSpace::new(2);
            let b = ModuleVector::monomial(s, idx, k, q(1)).unwrap();
            let dual_idx = if idx < 2 { idx + 2 } else { idx - 2 };
            let d = ModuleVector::monomial(s, dual_idx, -k - 1, q(1)).unwrap();
            let v = residue_form(&b, &d).unwrap();
            prop_assert!(v == q(1) || v == q(-1));
        }
    }
}
