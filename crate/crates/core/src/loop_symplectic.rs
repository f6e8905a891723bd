//! Symplectic loop-group elements as Laurent matrices, the X/Y block
//! decomposition, the unipotent generators of a standard maximal parabolic,
//! the truncated exponential and the triangular decomposition of its radical.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{truncation_depth, LaurentScalar, ModuleVector, SymplecticSpace};
use crate::linalg::{q, zeros, Mat, Q};

/// A 2n x 2n matrix over truncated Laurent series acting on row vectors from the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopMatrix {
    pub space: SymplecticSpace,
    entries: Vec<Vec<LaurentScalar>>,
}

impl LoopMatrix {
    pub fn zero(space: SymplecticSpace) -> Self {
        let d = space.dim();
        LoopMatrix { space, entries: vec![vec![LaurentScalar::zero(); d]; d] }
    }

    pub fn identity(space: SymplecticSpace) -> Self {
        let mut m = Self::zero(space);
        for i in 0..space.dim() {
            m.entries[i][i] = LaurentScalar::one();
        }
        m
    }

    pub fn from_entries(space: SymplecticSpace, entries: Vec<Vec<LaurentScalar>>) -> Self {
        assert_eq!(entries.len(), space.dim());
        assert!(entries.iter().all(|r| r.len() == space.dim()));
        LoopMatrix { space, entries }
    }

    /// Constant matrix embedded at exponent 0.
    pub fn from_constant(space: SymplecticSpace, m: &Mat) -> Self {
        Self::from_coeffs(space, &[(0, m.clone())])
    }

    /// sum_k t^k M_k from coefficient matrices.
    pub fn from_coeffs(space: SymplecticSpace, coeffs: &[(i32, Mat)]) -> Self {
        let d = space.dim();
        let mut terms: Vec<Vec<Vec<(i32, Q)>>> = vec![vec![Vec::new(); d]; d];
        for (k, m) in coeffs {
            for i in 0..d {
                for j in 0..d {
                    if !m[i][j].is_zero() {
                        terms[i][j].push((*k, m[i][j].clone()));
                    }
                }
            }
        }
        let entries = terms
            .into_iter()
            .map(|row| row.into_iter().map(|t| LaurentScalar::from_terms(&t).expect("exponent in window")).collect())
            .collect();
        LoopMatrix { space, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentScalar {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LaurentScalar) {
        self.entries[i][j] = v;
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Coefficient matrix of t^k.
    pub fn coeff_matrix(&self, k: i32) -> Mat {
        self.entries.iter().map(|r| r.iter().map(|x| x.coeff(k)).collect()).collect()
    }

    /// Exponents at which some entry is nonzero.
    pub fn exponents(&self) -> Vec<i32> {
        let mut ks: Vec<i32> = self.entries.iter().flatten().flat_map(|x| x.terms().map(|(k, _)| *k)).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn min_valuation(&self) -> Option<i32> {
        self.entries.iter().flatten().filter_map(|x| x.valuation()).min()
    }

    pub fn is_power_series(&self) -> bool {
        self.min_valuation().map_or(true, |v| v >= 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: &Q) -> Self {
        self.map(|a| a.scale(s))
    }

    fn map(&self, f: impl Fn(&LaurentScalar) -> LaurentScalar) -> Self {
        LoopMatrix { space: self.space, entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(&LaurentScalar, &LaurentScalar) -> LaurentScalar) -> Self {
        assert_eq!(self.space, other.space);
        LoopMatrix {
            space: self.space,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(r, s)| r.iter().zip(s).map(|(a, b)| f(a, b)).collect())
                .collect(),
        }
    }

    /// Product modulo t^(D+1).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        assert_eq!(self.space, other.space);
        let d = self.dim();
        let mut out = Self::zero(self.space);
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &other.entries[k][j];
                    if b.is_zero() {
                        continue;
                    }
                    let p = a.mul_trunc(b)?;
                    out.entries[i][j] = out.entries[i][j].add(&p);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_all(factors: &[&LoopMatrix]) -> Result<Self> {
        let mut acc = LoopMatrix::identity(factors[0].space);
        for f in factors {
            acc = acc.mul(f)?;
        }
        Ok(acc)
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim();
        let mut out = Self::zero(self.space);
        for i in 0..d {
            for j in 0..d {
                out.entries[j][i] = self.entries[i][j].clone();
            }
        }
        out
    }

    /// m J for the standard gram J.
    fn mul_gram_right(&self, sign: i64) -> Self {
        let n = self.space.n;
        let d = self.dim();
        let mut out = Self::zero(self.space);
        for i in 0..d {
            for j in 0..n {
                out.entries[i][j + n] = self.entries[i][j].scale(&q(sign));
                out.entries[i][j] = self.entries[i][j + n].scale(&q(-sign));
            }
        }
        out
    }

    /// J m for the standard gram J.
    fn mul_gram_left(&self, sign: i64) -> Self {
        self.transpose().mul_gram_right(-sign).transpose()
    }

    /// J m^T J^{-1}, the adjoint for the symplectic form.
    pub fn adjoint(&self) -> Self {
        self.transpose().mul_gram_left(1).mul_gram_right(-1)
    }

    /// Exponent up to which products involving this matrix are exact.
    pub fn exact_top(&self) -> i32 {
        truncation_depth() + 2 * self.min_valuation().unwrap_or(0).min(0)
    }

    /// g J g^T = J on all exponents where truncation keeps the product exact.
    pub fn is_symplectic(&self) -> Result<bool> {
        let gj = self.mul_gram_right(1);
        let prod = gj.mul(&self.transpose())?;
        let top = self.exact_top();
        let j = LoopMatrix::from_constant(self.space, &self.space.gram());
        Ok(prod.truncate_above(top) == j.truncate_above(top))
    }

    pub fn truncate_above(&self, top: i32) -> Self {
        self.map(|a| {
            let t = a.truncate_above(top);
            LaurentScalar::from_terms(&t.terms().map(|(k, c)| (*k, c.clone())).collect::<Vec<_>>()).unwrap()
        })
    }

    /// Entries with the declared windows dropped, for structural equality tests.
    pub fn normalized(&self) -> Self {
        self.truncate_above(truncation_depth())
    }

    /// Inverse of a symplectic element, J g^T J^{-1}.
    pub fn symplectic_inverse(&self) -> Self {
        self.adjoint()
    }

    /// w g for a row vector w in W((t)).
    pub fn apply(&self, w: &ModuleVector) -> Result<ModuleVector> {
        assert_eq!(w.space, self.space);
        let d = self.dim();
        let top = truncation_depth();
        let mut out: BTreeMap<i32, Vec<Q>> = BTreeMap::new();
        for (k, v) in w.coeffs() {
            for (i, vi) in v.iter().enumerate() {
                if vi.is_zero() {
                    continue;
                }
                for j in 0..d {
                    for (e, c) in self.entries[i][j].terms() {
                        let kk = k + e;
                        if kk > top {
                            continue;
                        }
                        let row = out.entry(kk).or_insert_with(|| vec![Q::zero(); d]);
                        row[j] += vi * c;
                    }
                }
            }
        }
        ModuleVector::from_map(self.space, out)
    }

    /// Restrict to the rows in `rows` and columns in `cols` as a small matrix.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<LaurentScalar>> {
        rows.iter().map(|&i| cols.iter().map(|&j| self.entries[i][j].clone()).collect()).collect()
    }

    /// True when every entry outside rows x cols vanishes.
    pub fn supported_in(&self, rows: &[usize], cols: &[usize]) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| (rows.contains(&i) && cols.contains(&j)) || self.entries[i][j].is_zero()))
    }

    /// Copy of the rows x cols block, zero elsewhere.
    pub fn keep_block(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zero(self.space);
        for &i in rows {
            for &j in cols {
                out.entries[i][j] = self.entries[i][j].clone();
            }
        }
        out
    }

    /// Identity on the given coordinates, zero elsewhere.
    pub fn partial_identity(space: SymplecticSpace, idx: &[usize]) -> Self {
        let mut out = Self::zero(space);
        for &i in idx {
            out.entries[i][i] = LaurentScalar::one();
        }
        out
    }

    /// Inverse of the idx x idx block, assumed congruent to the identity mod t
    /// and supported there; returned embedded, zero elsewhere.
    pub fn block_unipotent_inverse(&self, idx: &[usize]) -> Result<Self> {
        let id = Self::partial_identity(self.space, idx);
        let nil = id.sub(self);
        if nil.min_valuation().map_or(false, |v| v < 1) {
            return Err(Error::InvalidParams("block is not congruent to 1 mod t".into()));
        }
        let mut acc = id.clone();
        let mut pow = id;
        for _ in 0..truncation_depth() {
            pow = pow.mul(&nil)?;
            if pow.min_valuation().is_none() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc)
    }
}

/// The four blocks of g on the truncated monomial bases of X and Y.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    /// Source basis (exponent, coordinate) of truncated X, exponents -depth..=-1.
    pub x_basis: Vec<(i32, usize)>,
    /// Source basis of truncated Y, exponents 0..depth.
    pub y_basis: Vec<(i32, usize)>,
    /// Target coordinates on X, exponents -D..=-1.
    pub x_target: Vec<(i32, usize)>,
    /// Target coordinates on Y, exponents 0..=D.
    pub y_target: Vec<(i32, usize)>,
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

fn monomial_basis(dim: usize, lo: i32, hi: i32) -> Vec<(i32, usize)> {
    (lo..=hi).flat_map(|k| (0..dim).map(move |i| (k, i))).collect()
}

pub fn block_decompose(g: &LoopMatrix, depth: i32) -> Result<BlockDecomposition> {
    let big = truncation_depth();
    if depth < 1 || depth > big {
        return Err(Error::InvalidParams(format!("block depth {} outside 1..={}", depth, big)));
    }
    let dim = g.dim();
    let x_basis = monomial_basis(dim, -depth, -1);
    let y_basis = monomial_basis(dim, 0, depth - 1);
    let x_target = monomial_basis(dim, -big, -1);
    let y_target = monomial_basis(dim, 0, big);
    let locate = |targets: &[(i32, usize)], k: i32, i: usize| targets.iter().position(|&t| t == (k, i));
    let image = |src: &[(i32, usize)]| -> Result<(Mat, Mat)> {
        let mut mx = zeros(src.len(), x_target.len());
        let mut my = zeros(src.len(), y_target.len());
        for (r, &(k, i)) in src.iter().enumerate() {
            let w = ModuleVector::monomial(g.space, i, k, Q::one())?;
            let img = g.apply(&w)?;
            for (kk, v) in img.coeffs() {
                for (j, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if *kk < 0 {
                        let col = locate(&x_target, *kk, j).ok_or(Error::WindowOverflow { exponent: *kk, depth: big })?;
                        mx[r][col] = c.clone();
                    } else {
                        let col = locate(&y_target, *kk, j).ok_or(Error::WindowOverflow { exponent: *kk, depth: big })?;
                        my[r][col] = c.clone();
                    }
                }
            }
        }
        Ok((mx, my))
    };
    let (a, b) = image(&x_basis)?;
    let (c, d) = image(&y_basis)?;
    Ok(BlockDecomposition { x_basis, y_basis, x_target, y_target, a, b, c, d })
}

/// Coordinates of the parabolic split with index a: l+ = e_1..e_a,
/// W0 = e_{a+1}..e_n, f_{a+1}..f_n, l- = f_1..f_a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicSplit {
    pub space: SymplecticSpace,
    pub a: usize,
}

impl ParabolicSplit {
    pub fn new(space: SymplecticSpace, a: usize) -> Self {
        assert!(a <= space.n, "parabolic index exceeds n");
        ParabolicSplit { space, a }
    }

    pub fn plus(&self) -> Vec<usize> {
        (0..self.a).collect()
    }

    pub fn minus(&self) -> Vec<usize> {
        (self.space.n..self.space.n + self.a).collect()
    }

    pub fn w0(&self) -> Vec<usize> {
        let n = self.space.n;
        (self.a..n).chain(n + self.a..2 * n).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnipotentKind {
    Plus,
    Minus,
    Zero,
}

/// Parameters of n+(mu, beta), n-(nu, gamma) or n0(alpha, delta). Every map is
/// stored as a full 2n x 2n Laurent matrix supported on its block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnipotentParams {
    pub kind: UnipotentKind,
    pub split: ParabolicSplit,
    /// l+ -> W0
    pub mu: LoopMatrix,
    /// l+ -> l-
    pub beta: LoopMatrix,
    /// W0 -> l+
    pub nu: LoopMatrix,
    /// l- -> l+
    pub gamma: LoopMatrix,
    /// l+ -> l+
    pub alpha: LoopMatrix,
    /// W0 -> W0
    pub delta: LoopMatrix,
}

impl UnipotentParams {
    pub fn identity(kind: UnipotentKind, split: ParabolicSplit) -> Self {
        let s = split.space;
        UnipotentParams {
            kind,
            split,
            mu: LoopMatrix::zero(s),
            beta: LoopMatrix::zero(s),
            nu: LoopMatrix::zero(s),
            gamma: LoopMatrix::zero(s),
            alpha: LoopMatrix::partial_identity(s, &split.plus()),
            delta: LoopMatrix::partial_identity(s, &split.w0()),
        }
    }

    pub fn plus(split: ParabolicSplit, mu: LoopMatrix, beta: LoopMatrix) -> Self {
        UnipotentParams { mu, beta, ..Self::identity(UnipotentKind::Plus, split) }
    }

    pub fn minus(split: ParabolicSplit, nu: LoopMatrix, gamma: LoopMatrix) -> Self {
        UnipotentParams { nu, gamma, ..Self::identity(UnipotentKind::Minus, split) }
    }

    pub fn zero_part(split: ParabolicSplit, alpha: LoopMatrix, delta: LoopMatrix) -> Self {
        UnipotentParams { alpha, delta, ..Self::identity(UnipotentKind::Zero, split) }
    }

    pub fn is_identity(&self) -> bool {
        let id = Self::identity(self.kind, self.split);
        self.mu.normalized() == id.mu
            && self.beta.normalized() == id.beta
            && self.nu.normalized() == id.nu
            && self.gamma.normalized() == id.gamma
            && self.alpha.normalized() == id.alpha.normalized()
            && self.delta.normalized() == id.delta.normalized()
    }

    /// Check block supports, t-order constraints and symmetry conditions.
    pub fn validate(&self) -> Result<()> {
        let sp = self.split;
        let (p, m, w) = (sp.plus(), sp.minus(), sp.w0());
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let val_at_least = |x: &LoopMatrix, v: i32| x.min_valuation().map_or(true, |mv| mv >= v);
        if !self.mu.supported_in(&p, &w) || !val_at_least(&self.mu, 0) {
            return bad("mu must be a power-series map l+ -> W0");
        }
        if !self.beta.supported_in(&p, &m) || !val_at_least(&self.beta, 0) {
            return bad("beta must be a power-series map l+ -> l-");
        }
        if !self.nu.supported_in(&w, &p) || !val_at_least(&self.nu, 1) {
            return bad("nu must be a map W0 -> l+ divisible by t");
        }
        if !self.gamma.supported_in(&m, &p) || !val_at_least(&self.gamma, 2) {
            return bad("gamma must be a map l- -> l+ divisible by t^2");
        }
        if !self.beta.add(&self.beta.adjoint()).normalized().exponents().is_empty() {
            return bad("beta + beta* must vanish");
        }
        if !self.gamma.add(&self.gamma.adjoint()).normalized().exponents().is_empty() {
            return bad("gamma + gamma* must vanish");
        }
        let ida = LoopMatrix::partial_identity(sp.space, &p);
        let idd = LoopMatrix::partial_identity(sp.space, &w);
        if !self.alpha.supported_in(&p, &p) || !val_at_least(&self.alpha.sub(&ida), 1) {
            return bad("alpha must be an automorphism of l+[[t]] congruent to 1 mod t");
        }
        if !self.delta.supported_in(&w, &w) || !val_at_least(&self.delta.sub(&idd), 1) {
            return bad("delta must be an automorphism of W0[[t]] congruent to 1 mod t");
        }
        let full_delta = self.delta.add(&LoopMatrix::partial_identity(sp.space, &p)).add(
            &LoopMatrix::partial_identity(sp.space, &m),
        );
        if !full_delta.is_symplectic()? {
            return bad("delta must be symplectic on W0");
        }
        let clean = match self.kind {
            UnipotentKind::Plus => self.nu.exponents().is_empty() && self.gamma.exponents().is_empty() && self.alpha.normalized() == ida.normalized() && self.delta.normalized() == idd.normalized(),
            UnipotentKind::Minus => self.mu.exponents().is_empty() && self.beta.exponents().is_empty() && self.alpha.normalized() == ida.normalized() && self.delta.normalized() == idd.normalized(),
            UnipotentKind::Zero => self.mu.exponents().is_empty() && self.beta.exponents().is_empty() && self.nu.exponents().is_empty() && self.gamma.exponents().is_empty(),
        };
        if !clean {
            return bad("parameters outside the declared kind are not trivial");
        }
        Ok(())
    }

    /// (alpha*)^{-1}, supported on l-.
    pub fn alpha_dual_inverse(&self) -> Result<LoopMatrix> {
        self.alpha.adjoint().block_unipotent_inverse(&self.split.minus())
    }
}

/// The dual map m* = J m^T J^{-1}, so that <w, x m> = <w m*, x>.
pub fn dual_map(m: &LoopMatrix) -> LoopMatrix {
    m.adjoint()
}

pub fn make_unipotent(p: &UnipotentParams) -> Result<LoopMatrix> {
    p.validate()?;
    build_unipotent(p)
}

fn build_unipotent(p: &UnipotentParams) -> Result<LoopMatrix> {
    let s = p.split.space;
    let id = LoopMatrix::identity(s);
    let half = Q::new(1.into(), 2.into());
    match p.kind {
        UnipotentKind::Plus => {
            let ms = p.mu.adjoint();
            let corr = p.mu.mul(&ms)?.scale(&half);
            Ok(id.add(&p.mu).sub(&ms).add(&p.beta).sub(&corr))
        }
        UnipotentKind::Minus => {
            let ns = p.nu.adjoint();
            let corr = ns.mul(&p.nu)?.scale(&half);
            Ok(id.add(&p.nu).sub(&ns).add(&p.gamma).sub(&corr))
        }
        UnipotentKind::Zero => Ok(p.alpha.add(&p.delta).add(&p.alpha_dual_inverse()?)),
    }
}

/// exp(xi) = sum xi^i / i! modulo t^(D+1), for xi in t^l sp(W)[[t]].
pub fn exp_truncated(xi: &LoopMatrix) -> Result<LoopMatrix> {
    let s = xi.space;
    let Some(l) = xi.min_valuation() else {
        return Ok(LoopMatrix::identity(s));
    };
    if l < 1 {
        return Err(Error::InvalidParams("exponent argument must be divisible by t".into()));
    }
    let lie = xi.mul_gram_right(1).add(&xi.transpose().mul_gram_left(1));
    if !lie.normalized().exponents().is_empty() {
        return Err(Error::InvalidParams("argument is not in the symplectic Lie algebra".into()));
    }
    let terms = exp_term_count(l, truncation_depth());
    let mut acc = LoopMatrix::identity(s);
    let mut pow = LoopMatrix::identity(s);
    let mut fact = Q::one();
    for i in 1..terms {
        pow = pow.mul(xi)?;
        fact *= q(i as i64);
        acc = acc.add(&pow.scale(&fact.recip()));
    }
    Ok(acc)
}

/// Number of series terms needed at valuation l and window D: ceil((D+1)/l).
pub fn exp_term_count(l: i32, d: i32) -> usize {
    (((d + 1) + l - 1) / l) as usize + 0
}

/// Order in which the three factors of an element of U are multiplied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorOrder {
    PlusZeroMinus,
    MinusZeroPlus,
}

/// Triangular decomposition u = n+ n0 n-.
pub fn decompose_u(u: &LoopMatrix, split: ParabolicSplit) -> Result<(UnipotentParams, UnipotentParams, UnipotentParams)> {
    decompose_u_ordered(u, split, FactorOrder::PlusZeroMinus)
}

/// Decompose u in the prescribed order; the result is always returned as (plus, zero, minus) packs.
pub fn decompose_u_ordered(
    u: &LoopMatrix,
    split: ParabolicSplit,
    order: FactorOrder,
) -> Result<(UnipotentParams, UnipotentParams, UnipotentParams)> {
    let s = split.space;
    if u.space != s {
        return Err(Error::NotInU("space mismatch".into()));
    }
    if !u.is_power_series() {
        return Err(Error::NotInU("entries are not power series".into()));
    }
    let (p, m, w) = (split.plus(), split.minus(), split.w0());
    let half = Q::new(1.into(), 2.into());
    let blk = |r: &[usize], c: &[usize]| u.keep_block(r, c);
    let not_in_u = |e: Error| Error::NotInU(e.to_string());
    let (plus, zero, minus) = match order {
        FactorOrder::PlusZeroMinus => {
            let at = blk(&m, &m);
            let at_inv = at.block_unipotent_inverse(&m).map_err(not_in_u)?;
            let gamma_c = at_inv.mul(&blk(&m, &p))?;
            let nu_star = at_inv.mul(&blk(&m, &w))?.neg();
            let nu = nu_star.adjoint();
            let gamma = gamma_c.add(&nu_star.mul(&nu)?.scale(&half));
            let alpha = at_inv.adjoint();
            let beta_c = blk(&p, &m).mul(&at_inv)?;
            let mu_star = blk(&w, &m).mul(&at_inv)?.neg();
            let mu = mu_star.adjoint();
            let beta = beta_c.add(&mu.mul(&mu_star)?.scale(&half));
            let delta = blk(&w, &w).sub(&mu_star.mul(&at)?.mul(&nu_star)?);
            (
                UnipotentParams::plus(split, mu, beta),
                UnipotentParams::zero_part(split, alpha, delta),
                UnipotentParams::minus(split, nu, gamma),
            )
        }
        FactorOrder::MinusZeroPlus => {
            let alpha = blk(&p, &p);
            let alpha_inv = alpha.block_unipotent_inverse(&p).map_err(not_in_u)?;
            let mu = alpha_inv.mul(&blk(&p, &w))?;
            let beta_c = alpha_inv.mul(&blk(&p, &m))?;
            let nu = blk(&w, &p).mul(&alpha_inv)?;
            let gamma_c = blk(&m, &p).mul(&alpha_inv)?;
            let mu_star = mu.adjoint();
            let nu_star = nu.adjoint();
            let beta = beta_c.add(&mu.mul(&mu_star)?.scale(&half));
            let gamma = gamma_c.add(&nu_star.mul(&nu)?.scale(&half));
            let delta = blk(&w, &w).sub(&nu.mul(&alpha)?.mul(&mu)?);
            (
                UnipotentParams::plus(split, mu, beta),
                UnipotentParams::zero_part(split, alpha, delta),
                UnipotentParams::minus(split, nu, gamma),
            )
        }
    };
    for pack in [&plus, &zero, &minus] {
        pack.validate().map_err(not_in_u)?;
    }
    let (gp, g0, gm) = (build_unipotent(&plus)?, build_unipotent(&zero)?, build_unipotent(&minus)?);
    let recomposed = match order {
        FactorOrder::PlusZeroMinus => gp.mul(&g0)?.mul(&gm)?,
        FactorOrder::MinusZeroPlus => gm.mul(&g0)?.mul(&gp)?,
    };
    if recomposed.normalized() != u.normalized() {
        return Err(Error::NotInU("factors do not recompose to the element".into()));
    }
    Ok((plus, zero, minus))
}

/// Split n+(mu, beta) into n+(mu, 0) n+(0, beta), n0(alpha, delta) into
/// n0(alpha, 1) n0(1, delta) and n-(nu, gamma) into n-(nu, 0) n-(0, gamma).
pub fn pure_factors(p: &UnipotentParams) -> Vec<UnipotentParams> {
    let sp = p.split;
    let s = sp.space;
    let z = LoopMatrix::zero(s);
    match p.kind {
        UnipotentKind::Plus => vec![
            UnipotentParams::plus(sp, p.mu.clone(), z.clone()),
            UnipotentParams::plus(sp, z, p.beta.clone()),
        ],
        UnipotentKind::Minus => vec![
            UnipotentParams::minus(sp, p.nu.clone(), z.clone()),
            UnipotentParams::minus(sp, z, p.gamma.clone()),
        ],
        UnipotentKind::Zero => vec![
            UnipotentParams::zero_part(sp, p.alpha.clone(), LoopMatrix::partial_identity(s, &sp.w0())),
            UnipotentParams::zero_part(sp, LoopMatrix::partial_identity(s, &sp.plus()), p.delta.clone()),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_arith::residue_form;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ls(terms: &[(i32, i64)]) -> LaurentScalar {
        LaurentScalar::from_int_terms(terms).unwrap()
    }

    #[test]
    fn identity_blocks() {
        let s = SymplecticSpace::new(1);
        let bd = block_decompose(&LoopMatrix::identity(s), 2).unwrap();
        assert!(crate::linalg::is_zero_mat(&bd.b));
        assert!(crate::linalg::is_zero_mat(&bd.c));
        assert_eq!(crate::linalg::rank(&bd.a), bd.x_basis.len());
        assert_eq!(crate::linalg::rank(&bd.d), bd.y_basis.len());
    }

    #[test]
    fn torus_element_has_rank_one_c() {
        let s = SymplecticSpace::new(1);
        let mut g = LoopMatrix::zero(s);
        g.set(0, 0, ls(&[(1, 1)]));
        g.set(1, 1, ls(&[(-1, 1)]));
        assert!(g.is_symplectic().unwrap());
        let bd = block_decompose(&g, 3).unwrap();
        assert_eq!(crate::linalg::rank(&bd.c), 1);
        // f1 t^0 is the only Y monomial sent into X, onto f1 t^-1.
        let row = bd.y_basis.iter().position(|&b| b == (0, s.f(1))).unwrap();
        let col = bd.x_target.iter().position(|&b| b == (-1, s.f(1))).unwrap();
        assert_eq!(bd.c[row][col], q(1));
    }

    #[test]
    fn beta_generator_example() {
        // n = 2, a = 1, beta = s t with s = 3: e1 -> e1 + 3t f1, e2 and f2 fixed.
        let s = SymplecticSpace::new(2);
        let sp = ParabolicSplit::new(s, 1);
        let mut beta = LoopMatrix::zero(s);
        beta.set(s.e(1), s.f(1), ls(&[(1, 3)]));
        let g = make_unipotent(&UnipotentParams::plus(sp, LoopMatrix::zero(s), beta)).unwrap();
        let img = g.apply(&ModuleVector::monomial(s, s.e(1), 0, q(1)).unwrap()).unwrap();
        let expect = ModuleVector::monomial(s, s.e(1), 0, q(1)).unwrap().add(&ModuleVector::monomial(s, s.f(1), 1, q(3)).unwrap());
        assert_eq!(img, expect);
        for idx in [s.e(2), s.f(2)] {
            let v = ModuleVector::monomial(s, idx, 0, q(1)).unwrap();
            assert_eq!(g.apply(&v).unwrap(), v);
        }
        assert!(g.is_symplectic().unwrap());
        assert!(crate::linalg::is_zero_mat(&block_decompose(&g, 3).unwrap().c));
    }

    #[test]
    fn invalid_params_rejected() {
        let s = SymplecticSpace::new(2);
        let sp = ParabolicSplit::new(s, 1);
        let mut nu = LoopMatrix::zero(s);
        nu.set(s.e(2), s.e(1), ls(&[(0, 1)]));
        assert!(matches!(make_unipotent(&UnipotentParams::minus(sp, nu, LoopMatrix::zero(s))), Err(Error::InvalidParams(_))));
        let mut beta = LoopMatrix::zero(s);
        beta.set(s.e(1), s.f(2), ls(&[(0, 1)]));
        assert!(make_unipotent(&UnipotentParams::plus(sp, LoopMatrix::zero(s), beta)).is_err());
    }

    #[test]
    fn dual_map_adjunction() {
        // mu: e1 -> e2 for n = 2, a = 1; its dual sends f2 to f1 up to sign.
        let s = SymplecticSpace::new(2);
        let mut mu = LoopMatrix::zero(s);
        mu.set(s.e(1), s.e(2), ls(&[(0, 1)]));
        let ms = dual_map(&mu);
        assert!(ms.entry(s.f(2), s.f(1)).coeff(0) == q(1) || ms.entry(s.f(2), s.f(1)).coeff(0) == q(-1));
        assert!(ms.entry(s.e(2), s.f(1)).is_zero());
        for n in 1..=3 {
            for i in 0..4 {
                for j in 0..4 {
                    let w = ModuleVector::monomial(s, i, -n, q(1)).unwrap();
                    let x = ModuleVector::monomial(s, j, 0, q(1)).unwrap();
                    let xm = mu.apply(&x).unwrap();
                    let wm = ms.apply(&ModuleVector::monomial(s, i, 0, q(1)).unwrap()).unwrap();
                    let tx = ModuleVector::monomial(s, j, -n, q(1)).unwrap();
                    assert_eq!(residue_form(&w, &xm).unwrap(), residue_form(&wm, &tx).unwrap());
                }
            }
        }
        let id = LoopMatrix::identity(s);
        assert_eq!(dual_map(&id), id);
        assert_eq!(dual_map(&LoopMatrix::zero(s)), LoopMatrix::zero(s));
    }

    #[test]
    fn exp_inverse_and_congruence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = SymplecticSpace::new(2);
        for l in 1..=3 {
            let xi = sampling::random_sp_lie(&mut rng, s, &(0..4).collect::<Vec<_>>(), l, 2);
            let g = exp_truncated(&xi).unwrap();
            let h = exp_truncated(&xi.neg()).unwrap();
            assert_eq!(g.mul(&h).unwrap().normalized(), LoopMatrix::identity(s));
            assert!(g.is_symplectic().unwrap());
            assert!(g.sub(&LoopMatrix::identity(s)).min_valuation().map_or(true, |v| v >= l));
        }
        assert_eq!(exp_truncated(&LoopMatrix::zero(s)).unwrap(), LoopMatrix::identity(s));
        assert_eq!(exp_term_count(3, 8), 3);
    }

    #[test]
    fn mu_times_minus_mu_is_beta_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = SymplecticSpace::new(3);
        let sp = ParabolicSplit::new(s, 1);
        let mu = sampling::random_block(&mut rng, s, &sp.plus(), &sp.w0(), 0, 2);
        let z = LoopMatrix::zero(s);
        let g1 = make_unipotent(&UnipotentParams::plus(sp, mu.clone(), z.clone())).unwrap();
        let g2 = make_unipotent(&UnipotentParams::plus(sp, mu.neg(), z.clone())).unwrap();
        let prod = g1.mul(&g2).unwrap();
        let (p, zero, m) = decompose_u(&prod, sp).unwrap();
        assert!(p.mu.normalized().exponents().is_empty());
        assert!(zero.is_identity() && m.is_identity());
        assert!(p.beta.add(&p.beta.adjoint()).normalized().exponents().is_empty());
    }

    #[test]
    fn decompose_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..12 {
            let n = 1 + trial % 3;
            let s = SymplecticSpace::new(n);
            let a = trial % (n + 1);
            let sp = ParabolicSplit::new(s, a);
            let (pp, p0, pm) = sampling::random_u_params(&mut rng, sp, 2);
            let u = make_unipotent(&pp).unwrap().mul(&make_unipotent(&p0).unwrap()).unwrap().mul(&make_unipotent(&pm).unwrap()).unwrap();
            assert!(u.is_symplectic().unwrap());
            assert!(crate::linalg::is_zero_mat(&block_decompose(&u, 3).unwrap().c));
            let (qp, q0, qm) = decompose_u(&u, sp).unwrap();
            assert_eq!(qp.mu.normalized(), pp.mu.normalized());
            assert_eq!(qp.beta.normalized(), pp.beta.normalized());
            assert_eq!(q0.alpha.normalized(), p0.alpha.normalized());
            assert_eq!(q0.delta.normalized(), p0.delta.normalized());
            assert_eq!(qm.nu.normalized(), pm.nu.normalized());
            assert_eq!(qm.gamma.normalized(), pm.gamma.normalized());
            let (rp, r0, rm) = decompose_u_ordered(&u, sp, FactorOrder::MinusZeroPlus).unwrap();
            let back = make_unipotent(&rm).unwrap().mul(&make_unipotent(&r0).unwrap()).unwrap().mul(&make_unipotent(&rp).unwrap()).unwrap();
            assert_eq!(back.normalized(), u.normalized());
        }
    }

    #[test]
    fn wrong_order_product_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = SymplecticSpace::new(2);
        let sp = ParabolicSplit::new(s, 1);
        let z = LoopMatrix::zero(s);
        let nu = sampling::random_block(&mut rng, s, &sp.w0(), &sp.plus(), 1, 2);
        let mu = sampling::random_block(&mut rng, s, &sp.plus(), &sp.w0(), 0, 1);
        let u = make_unipotent(&UnipotentParams::minus(sp, nu, z.clone())).unwrap().mul(&make_unipotent(&UnipotentParams::plus(sp, mu, z)).unwrap()).unwrap();
        let (p, zero, m) = decompose_u(&u, sp).unwrap();
        assert!(!p.is_identity() && !zero.is_identity() && !m.is_identity());
        let back = LoopMatrix::mul_all(&[&make_unipotent(&p).unwrap(), &make_unipotent(&zero).unwrap(), &make_unipotent(&m).unwrap()]).unwrap();
        assert_eq!(back.normalized(), u.normalized());
    }

    #[test]
    fn non_unipotent_rejected() {
        let s = SymplecticSpace::new(1);
        let mut g = LoopMatrix::zero(s);
        g.set(0, 0, ls(&[(0, 2)]));
        g.set(1, 1, LaurentScalar::constant(Q::new(1.into(), 2.into())));
        assert!(matches!(decompose_u(&g, ParabolicSplit::new(s, 1)), Err(Error::NotInU(_))));
    }

    #[test]
    fn symplectic_closure() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SymplecticSpace::new(2);
        let g = sampling::random_symplectic_series(&mut rng, s, 2);
        let h = sampling::random_symplectic_series(&mut rng, s, 2);
        let gh = g.mul(&h).unwrap();
        assert!(gh.is_symplectic().unwrap());
        let inv = gh.symplectic_inverse();
        assert!(inv.is_symplectic().unwrap());
        assert_eq!(gh.mul(&inv).unwrap().normalized(), LoopMatrix::identity(s));
    }
}
