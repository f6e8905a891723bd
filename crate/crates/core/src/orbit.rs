//! Finite-level orbit invariants of tensors in X ⊗ V: the module Im f_r with its
//! elementary divisors, the symmetric invariant T(r), the skew invariant T'(r)
//! and the negligibility test.
//!
//! Elements of the torsion module U((t))/U[[t]] truncated at depth D are stored
//! as flat vectors: coordinate `(k - 1) * dim + b` holds the coefficient of
//! t^{-k} on the basis vector b.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{truncation_depth, ModuleVector, SymplecticSpace};
use crate::linalg::{q, rank, row_basis, solve_left, Mat, Q};
use crate::loop_symplectic::ParabolicSplit;
use crate::weil_phase::{QuadraticSpace, TensorVector};

/// t^j x in the quotient: exponents are raised by j and the nonnegative part dropped.
fn shift(x: &[Q], dim: usize, j: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); x.len()];
    let skip = j * dim;
    if skip < x.len() {
        out[..x.len() - skip].clone_from_slice(&x[skip..]);
    }
    out
}

fn is_zero_vec(x: &[Q]) -> bool {
    x.iter().all(|c| c.is_zero())
}

/// Smallest k with t^k x = 0.
fn order(x: &[Q], dim: usize) -> u32 {
    (0..x.len() / dim).rev().find(|&k| x[k * dim..(k + 1) * dim].iter().any(|c| !c.is_zero())).map_or(0, |k| k as u32 + 1)
}

/// A finite-dimensional F[[t]]-submodule of the truncated quotient, with a
/// quasi-basis and its elementary divisors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionModule {
    pub ambient_dim: usize,
    pub depth: usize,
    /// Quasi-basis, ordered by non-increasing order.
    generators: Vec<Vec<Q>>,
    divisors: Vec<u32>,
    /// Echelon F-basis of the underlying vector space.
    basis: Mat,
}

impl TorsionModule {
    pub fn zero(ambient_dim: usize) -> Self {
        TorsionModule { ambient_dim, depth: truncation_depth() as usize, generators: Vec::new(), divisors: Vec::new(), basis: Vec::new() }
    }

    /// The F[[t]]-span of flat vectors.
    pub fn span(ambient_dim: usize, gens: &[Vec<Q>]) -> Self {
        let depth = truncation_depth() as usize;
        let mut rows = Vec::new();
        for g in gens {
            assert_eq!(g.len(), ambient_dim * depth, "flat vector has the wrong length");
            let mut x = g.clone();
            while !is_zero_vec(&x) {
                let next = shift(&x, ambient_dim, 1);
                rows.push(x);
                x = next;
            }
        }
        let basis = if rows.is_empty() { Vec::new() } else { row_basis(&rows) };
        let mut m = TorsionModule { ambient_dim, depth, generators: Vec::new(), divisors: Vec::new(), basis };
        m.build_quasi_basis();
        m
    }

    pub fn from_module_vectors(space: SymplecticSpace, gens: &[ModuleVector]) -> Result<Self> {
        let flat: Vec<Vec<Q>> = gens.iter().map(|g| flatten(g)).collect::<Result<_>>()?;
        Ok(Self::span(space.dim(), &flat))
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn elementary_divisors(&self) -> &[u32] {
        &self.divisors
    }

    pub fn generators(&self) -> &[Vec<Q>] {
        &self.generators
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn module_generators(&self, space: SymplecticSpace) -> Vec<ModuleVector> {
        assert_eq!(space.dim(), self.ambient_dim);
        self.generators.iter().map(|g| unflatten(space, g)).collect()
    }

    fn t_power_basis(&self, j: usize) -> Mat {
        let rows: Vec<Vec<Q>> = self.basis.iter().map(|b| shift(b, self.ambient_dim, j)).collect();
        if rows.is_empty() {
            Vec::new()
        } else {
            row_basis(&rows)
        }
    }

    /// dim_F t^j M.
    pub fn t_power_dim(&self, j: usize) -> usize {
        self.t_power_basis(j).len()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        if is_zero_vec(x) {
            return true;
        }
        if self.basis.is_empty() {
            return false;
        }
        let mut rows = self.basis.clone();
        rows.push(x.to_vec());
        rank(&rows) == self.basis.len()
    }

    pub fn contains_module(&self, other: &TorsionModule) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Equality of the underlying subspaces.
    pub fn same_span(&self, other: &TorsionModule) -> bool {
        self.ambient_dim == other.ambient_dim && self.dim() == other.dim() && self.contains_module(other)
    }

    fn build_quasi_basis(&mut self) {
        let dim = self.ambient_dim;
        let d = self.basis.len();
        let mut dims = vec![d];
        while *dims.last().unwrap() > 0 {
            let j = dims.len();
            dims.push(self.t_power_dim(j));
        }
        // #{k_i >= j} = dim t^{j-1} M - dim t^j M.
        let at_least: Vec<usize> = (1..dims.len()).map(|j| dims[j - 1] - dims[j]).collect();
        let kmax = at_least.len();
        let mut gens: Vec<Vec<Q>> = Vec::new();
        let mut divisors = Vec::new();
        let mut socle: Vec<Vec<Q>> = Vec::new();
        for j in (1..=kmax).rev() {
            let target = at_least[j - 1];
            if socle.len() == target {
                continue;
            }
            // Elements u of M with t^j u = 0, as combinations of the basis.
            let image: Mat = self.basis.iter().map(|b| shift(b, dim, j)).collect();
            let kernel = crate::linalg::left_nullspace(&image);
            for c in kernel {
                let mut u = vec![Q::zero(); dim * self.depth];
                for (ci, b) in c.iter().zip(&self.basis) {
                    if !ci.is_zero() {
                        for (x, y) in u.iter_mut().zip(b) {
                            *x += ci * y;
                        }
                    }
                }
                let s = shift(&u, dim, j - 1);
                if is_zero_vec(&s) {
                    continue;
                }
                let mut trial = socle.clone();
                trial.push(s.clone());
                if rank(&trial) > socle.len() {
                    socle.push(s);
                    gens.push(u);
                    divisors.push(j as u32);
                    if socle.len() == target {
                        break;
                    }
                }
            }
        }
        self.generators = gens;
        self.divisors = divisors;
    }

    /// Rows t^s u_i for s < k_i, an F-basis of M when the generators are a quasi-basis.
    fn expansion_rows(&self) -> Mat {
        let mut rows = Vec::new();
        for (g, &k) in self.generators.iter().zip(&self.divisors) {
            for s in 0..k as usize {
                rows.push(shift(g, self.ambient_dim, s));
            }
        }
        rows
    }

    /// Polynomials p_i with x = sum_i p_i(t) u_i, each of degree below k_i.
    pub fn coordinates(&self, x: &[Q]) -> Option<Vec<Vec<Q>>> {
        if self.generators.is_empty() {
            return if is_zero_vec(x) { Some(Vec::new()) } else { None };
        }
        let coeffs = solve_left(&self.expansion_rows(), x)?;
        let mut out = Vec::new();
        let mut pos = 0;
        for &k in &self.divisors {
            out.push(coeffs[pos..pos + k as usize].to_vec());
            pos += k as usize;
        }
        Some(out)
    }
}

/// Flat coordinates of the X-part of a module vector.
pub fn flatten(v: &ModuleVector) -> Result<Vec<Q>> {
    let dim = v.space.dim();
    let depth = truncation_depth();
    let mut out = vec![Q::zero(); dim * depth as usize];
    for (k, c) in v.coeffs() {
        if *k >= 0 {
            continue;
        }
        if *k < -depth {
            return Err(Error::WindowOverflow { exponent: *k, depth });
        }
        let base = (-k - 1) as usize * dim;
        out[base..base + dim].clone_from_slice(c);
    }
    Ok(out)
}

pub fn unflatten(space: SymplecticSpace, x: &[Q]) -> ModuleVector {
    let dim = space.dim();
    let map: BTreeMap<i32, Vec<Q>> = x.chunks(dim).enumerate().map(|(k, c)| (-(k as i32) - 1, c.to_vec())).collect();
    ModuleVector::from_map(space, map).expect("depth fits the window")
}

/// Is `candidates` a quasi-basis of M.
pub fn is_quasi_basis_flat(m: &TorsionModule, candidates: &[Vec<Q>]) -> bool {
    if candidates.iter().any(|c| is_zero_vec(c) || !m.contains(c)) {
        return false;
    }
    let generated = TorsionModule::span(m.ambient_dim, candidates);
    if !generated.same_span(m) {
        return false;
    }
    // A generating set is a quasi-basis exactly when the orders add up to dim M.
    let total: usize = candidates.iter().map(|c| order(c, m.ambient_dim) as usize).sum();
    total == m.dim()
}

pub fn is_quasi_basis(m: &TorsionModule, candidates: &[ModuleVector]) -> bool {
    match candidates.iter().map(flatten).collect::<Result<Vec<_>>>() {
        Ok(flat) => is_quasi_basis_flat(m, &flat),
        Err(_) => false,
    }
}

fn intersection_dim(a: &Mat, b: &Mat) -> usize {
    let mut rows = a.clone();
    rows.extend(b.iter().cloned());
    let sum = if rows.is_empty() { 0 } else { rank(&rows) };
    a.len() + b.len() - sum
}

/// L ⊆ M is a direct summand with L/tL → M/tM injective.
pub fn is_primitive_submodule(l: &TorsionModule, m: &TorsionModule) -> bool {
    if !m.contains_module(l) {
        return false;
    }
    let injective = intersection_dim(&l.basis, &m.t_power_basis(1)) == l.t_power_dim(1);
    // Purity L ∩ t^j M = t^j L for all j; for bounded modules this is being a summand.
    let summand = (1..=m.depth).all(|j| intersection_dim(&l.basis, &m.t_power_basis(j)) == l.t_power_dim(j));
    injective && summand
}

/// Polynomials truncated below `len`.
fn poly_mul_trunc(a: &[Q], b: &[Q], len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= len {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Entries sum_{a,b} form[a][b] p_{a,i} p_{b,j} mod t^{min(k_i,k_j)}.
fn reduced_entries(module: &TorsionModule, comps: &[Vec<Q>], form: &Mat) -> Result<Vec<Vec<Vec<Q>>>> {
    let coords: Vec<Vec<Vec<Q>>> = comps
        .iter()
        .map(|c| module.coordinates(c).ok_or(Error::ModulesDiffer))
        .collect::<Result<_>>()?;
    let l = module.divisors.len();
    let mut entries = vec![vec![Vec::new(); l]; l];
    for i in 0..l {
        for j in 0..l {
            let len = module.divisors[i].min(module.divisors[j]) as usize;
            let mut acc = vec![Q::zero(); len];
            for (a, pa) in coords.iter().enumerate() {
                for (b, pb) in coords.iter().enumerate() {
                    if form[a][b].is_zero() {
                        continue;
                    }
                    let prod = poly_mul_trunc(&pa[i], &pb[j], len);
                    for (x, y) in acc.iter_mut().zip(prod) {
                        *x += &form[a][b] * y;
                    }
                }
            }
            entries[i][j] = trim(acc);
        }
    }
    Ok(entries)
}

/// The W-components w_a with r = sum_a w_a ⊗ b_a, flat.
fn w_components(r: &TensorVector) -> Vec<Vec<Q>> {
    let dim = r.ws.dim();
    let depth = truncation_depth() as usize;
    let mut out = vec![vec![Q::zero(); dim * depth]; r.vs.m];
    for (k, layer) in r.layers().range(..0) {
        let base = (-k - 1) as usize * dim;
        for (a, row) in layer.iter().enumerate() {
            out[a][base..base + dim].clone_from_slice(row);
        }
    }
    out
}

/// The V-components v_b with r = sum_b b_b ⊗ v_b, flat.
fn v_components(r: &TensorVector) -> Vec<Vec<Q>> {
    let m = r.vs.m;
    let depth = truncation_depth() as usize;
    let mut out = vec![vec![Q::zero(); m * depth]; r.ws.dim()];
    for (k, layer) in r.layers().range(..0) {
        let base = (-k - 1) as usize * m;
        for (a, row) in layer.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                out[b][base + a] = c.clone();
            }
        }
    }
    out
}

/// The span of sum_a form[a][c] comps[a] over c.
fn image_of(comps: &[Vec<Q>], form: &Mat, dim: usize) -> TorsionModule {
    let len = comps.first().map_or(0, |c| c.len());
    let gens: Vec<Vec<Q>> = (0..form.len())
        .map(|c| {
            let mut g = vec![Q::zero(); len];
            for (a, comp) in comps.iter().enumerate() {
                if !form[a][c].is_zero() {
                    for (x, y) in g.iter_mut().zip(comp) {
                        *x += &form[a][c] * y;
                    }
                }
            }
            g
        })
        .collect();
    TorsionModule::span(dim, &gens)
}

/// Im f_r with f_r(v) = sum_i (v_i, v) w_i.
pub fn image_f_r(r: &TensorVector) -> TorsionModule {
    image_of(&w_components(r), &r.vs.gram, r.ws.dim())
}

/// Im f'_r with f'_r(w) = sum_i <w_i, w> v_i, a submodule of V((t))/V[[t]].
pub fn image_fprime_r(r: &TensorVector) -> TorsionModule {
    image_of(&v_components(r), &r.ws.gram(), r.vs.m)
}

/// T(r) in the quasi-basis of its module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricInvariant {
    pub module: TorsionModule,
    /// entries[i][j] = coefficients of g_ij(t), reduced mod t^{min(k_i, k_j)}.
    pub entries: Vec<Vec<Vec<Q>>>,
}

/// T'(r) in the quasi-basis of Im f'_r.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewInvariant {
    pub module: TorsionModule,
    pub entries: Vec<Vec<Vec<Q>>>,
}

impl SymmetricInvariant {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|p| p.is_empty())
    }

    pub fn is_symmetric(&self) -> bool {
        let l = self.entries.len();
        (0..l).all(|i| (0..l).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

impl SkewInvariant {
    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|p| p.is_empty())
    }

    pub fn is_antisymmetric(&self) -> bool {
        let l = self.entries.len();
        (0..l).all(|i| {
            (0..l).all(|j| self.entries[i][j] == self.entries[j][i].iter().map(|c| -c).collect::<Vec<Q>>())
        })
    }
}

pub fn t_invariant(r: &TensorVector) -> SymmetricInvariant {
    let module = image_f_r(r);
    t_invariant_in(r, &module).expect("components lie in Im f_r")
}

/// T(r) expressed in the quasi-basis of a given module; ModulesDiffer if Im f_r differs.
pub fn t_invariant_in(r: &TensorVector, module: &TorsionModule) -> Result<SymmetricInvariant> {
    if !image_f_r(r).same_span(module) {
        return Err(Error::ModulesDiffer);
    }
    let entries = reduced_entries(module, &w_components(r), &r.vs.gram)?;
    Ok(SymmetricInvariant { module: module.clone(), entries })
}

pub fn tprime_invariant(r: &TensorVector) -> SkewInvariant {
    let module = image_fprime_r(r);
    let entries = reduced_entries(&module, &v_components(r), &r.ws.gram()).expect("components lie in Im f'_r");
    SkewInvariant { module, entries }
}

pub fn is_negligible(r: &TensorVector) -> bool {
    !tprime_invariant(r).is_zero()
}

/// The coordinate indices and depths of the standard generators
/// t^{-k_1} f_1.., t^{-k_a} e_a, t^{-k_{a-1}} e_{a-1}.., t^{-k_{a+1}} f_{a+1}..
fn standard_lines(split: ParabolicSplit, sigma: usize, tau: usize, rho: usize, exponents: &[u32]) -> Result<Vec<(usize, u32)>> {
    let s = split.space;
    let a = split.a;
    if sigma + tau > a {
        return Err(Error::InvalidShape(format!("sigma + tau = {} exceeds a = {}", sigma + tau, a)));
    }
    if rho > s.n - a {
        return Err(Error::InvalidShape(format!("rho = {} exceeds n - a = {}", rho, s.n - a)));
    }
    if exponents.len() != sigma + tau + rho {
        return Err(Error::InvalidShape(format!("expected {} exponents, got {}", sigma + tau + rho, exponents.len())));
    }
    let groups = [&exponents[..sigma], &exponents[sigma..sigma + tau], &exponents[sigma + tau..]];
    for g in groups {
        if g.iter().any(|&k| k == 0) || g.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidShape(format!("exponents {:?} must be non-increasing and at least 1", g)));
        }
    }
    let d = truncation_depth();
    if let Some(&k) = exponents.iter().find(|&&k| k as i32 > d) {
        return Err(Error::WindowOverflow { exponent: -(k as i32), depth: d });
    }
    let mut lines = Vec::new();
    for (i, &k) in groups[0].iter().enumerate() {
        lines.push((s.f(i + 1), k));
    }
    for (i, &k) in groups[1].iter().enumerate() {
        lines.push((s.e(a - i), k));
    }
    for (i, &k) in groups[2].iter().enumerate() {
        lines.push((s.f(a + i + 1), k));
    }
    Ok(lines)
}

/// The span of the standard generators attached to (sigma, tau, rho) and the exponents.
pub fn standard_form_module(split: ParabolicSplit, sigma: usize, tau: usize, rho: usize, exponents: &[u32]) -> Result<TorsionModule> {
    let s = split.space;
    let gens: Vec<ModuleVector> = standard_lines(split, sigma, tau, rho, exponents)?
        .into_iter()
        .map(|(idx, k)| ModuleVector::monomial(s, idx, -(k as i32), q(1)))
        .collect::<Result<_>>()?;
    TorsionModule::from_module_vectors(s, &gens)
}

/// sum_i t^{-k_i} line_i ⊗ v_i over the standard lines.
pub fn standard_form_tensor(
    split: ParabolicSplit,
    vs: &QuadraticSpace,
    sigma: usize,
    tau: usize,
    rho: usize,
    exponents: &[u32],
    vectors: &[Vec<Q>],
) -> Result<TensorVector> {
    let lines = standard_lines(split, sigma, tau, rho, exponents)?;
    if vectors.len() != lines.len() {
        return Err(Error::InvalidShape(format!("expected {} V-vectors, got {}", lines.len(), vectors.len())));
    }
    let terms: Vec<(ModuleVector, Vec<Q>)> = lines
        .into_iter()
        .zip(vectors)
        .map(|((idx, k), v)| Ok((ModuleVector::monomial(split.space, idx, -(k as i32), q(1))?, v.clone())))
        .collect::<Result<_>>()?;
    TensorVector::from_terms(split.space, vs.clone(), &terms)
}

/// t^{-ke} e_i ⊗ v1 + t^{-kf} f_i ⊗ v2: both directions of one symplectic pair.
pub fn crossing_tensor(ws: SymplecticSpace, vs: &QuadraticSpace, i: usize, ke: u32, kf: u32, v1: &[Q], v2: &[Q]) -> Result<TensorVector> {
    let terms = vec![
        (ModuleVector::monomial(ws, ws.e(i), -(ke as i32), q(1))?, v1.to_vec()),
        (ModuleVector::monomial(ws, ws.f(i), -(kf as i32), q(1))?, v2.to_vec()),
    ];
    TensorVector::from_terms(ws, vs.clone(), &terms)
}

/// Ok when (Im f_r, T(r)) agree, with the failing part named otherwise.
pub fn compare_orbit_invariants(r1: &TensorVector, r2: &TensorVector) -> Result<()> {
    let m1 = image_f_r(r1);
    let m2 = image_f_r(r2);
    if !m1.same_span(&m2) {
        return Err(Error::ModulesDiffer);
    }
    let t1 = t_invariant_in(r1, &m1)?;
    let t2 = t_invariant_in(r2, &m1)?;
    if t1.entries != t2.entries {
        return Err(Error::TensorsDiffer);
    }
    Ok(())
}

pub fn orbit_invariants_equal(r1: &TensorVector, r2: &TensorVector) -> bool {
    compare_orbit_invariants(r1, r2).is_ok()
}

pub fn format_poly(p: &[Q]) -> String {
    let terms: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => format!("{}", c),
            1 => format!("{}*t", c),
            _ => format!("{}*t^{}", c, i),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub divisors: Vec<u32>,
    #[serde(rename = "T_entries")]
    pub t_entries: Vec<Vec<String>>,
    #[serde(rename = "Tprime_nonzero")]
    pub tprime_nonzero: bool,
    pub negligible: bool,
}

pub fn orbit_report(r: &TensorVector) -> OrbitReport {
    let t = t_invariant(r);
    let tp = tprime_invariant(r);
    OrbitReport {
        divisors: t.module.elementary_divisors().to_vec(),
        t_entries: t.entries.iter().map(|row| row.iter().map(|p| format_poly(p)).collect()).collect(),
        tprime_nonzero: !tp.is_zero(),
        negligible: !tp.is_zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws() -> SymplecticSpace {
        SymplecticSpace::new(2)
    }

    fn mono(idx: usize, k: i32) -> ModuleVector {
        ModuleVector::monomial(ws(), idx, k, q(1)).unwrap()
    }

    fn tensor(vs: &QuadraticSpace, terms: &[(usize, i32, Vec<i64>)]) -> TensorVector {
        let t: Vec<(ModuleVector, Vec<Q>)> = terms.iter().map(|(i, k, v)| (mono(*i, *k), v.iter().map(|&x| q(x)).collect())).collect();
        TensorVector::from_terms(ws(), vs.clone(), &t).unwrap()
    }

    #[test]
    fn image_examples() {
        let vs = QuadraticSpace::diagonal(&[1, 1]);
        let s = ws();
        assert!(image_f_r(&TensorVector::zero(s, vs.clone())).elementary_divisors().is_empty());
        let m = image_f_r(&tensor(&vs, &[(s.f(1), -2, vec![1, 0])]));
        assert_eq!(m.elementary_divisors(), &[2]);
        assert_eq!(m.dim(), 2);
        assert!(m.contains(&flatten(&mono(s.f(1), -1)).unwrap()));
        let m = image_f_r(&tensor(&vs, &[(s.f(1), -1, vec![1, 0]), (s.e(1), -1, vec![0, 1])]));
        assert_eq!(m.elementary_divisors(), &[1, 1]);
    }

    #[test]
    fn t_invariant_examples() {
        let s = ws();
        let vs = QuadraticSpace::diagonal(&[2, 1]);
        let t = t_invariant(&tensor(&vs, &[(s.f(1), -1, vec![1, 0])]));
        assert_eq!(t.entries, vec![vec![vec![q(2)]]]);
        let hyp = QuadraticSpace::hyperbolic();
        let t = t_invariant(&tensor(&hyp, &[(s.f(1), -1, vec![1, 0]), (s.e(2), -2, vec![1, 0])]));
        assert!(t.is_zero());
        assert!(t.is_symmetric());
    }

    #[test]
    fn tprime_examples() {
        let s = ws();
        let vs = QuadraticSpace::diagonal(&[1, 1]);
        let minus_only = tensor(&vs, &[(s.f(1), -1, vec![1, 0]), (s.f(2), -1, vec![0, 1])]);
        assert!(tprime_invariant(&minus_only).is_zero());
        assert!(!is_negligible(&minus_only));
        let cross = crossing_tensor(s, &vs, 1, 1, 2, &[q(1), q(0)], &[q(0), q(1)]).unwrap();
        let tp = tprime_invariant(&cross);
        assert!(!tp.is_zero());
        assert!(tp.is_antisymmetric());
        assert!(is_negligible(&cross));
        assert!(!is_negligible(&TensorVector::zero(s, vs)));
    }

    #[test]
    fn standard_forms() {
        let s = ws();
        let split = ParabolicSplit::new(s, 1);
        let m = standard_form_module(split, 1, 0, 0, &[2]).unwrap();
        assert!(m.same_span(&TorsionModule::from_module_vectors(s, &[mono(s.f(1), -2)]).unwrap()));
        assert!(standard_form_module(split, 0, 0, 0, &[]).unwrap().is_zero());
        assert!(matches!(standard_form_module(split, 1, 1, 1, &[1, 1, 1]), Err(Error::InvalidShape(_))));
        assert!(matches!(standard_form_module(split, 1, 0, 0, &[0]), Err(Error::InvalidShape(_))));
        let vs = QuadraticSpace::diagonal(&[1, 1, 1]);
        let vecs = vec![vec![q(1), q(0), q(0)], vec![q(0), q(1), q(0)]];
        let r = standard_form_tensor(split, &vs, 1, 0, 1, &[3, 1], &vecs).unwrap();
        assert!(!is_negligible(&r));
        let split2 = ParabolicSplit::new(s, 2);
        let r = standard_form_tensor(split2, &vs, 1, 1, 0, &[2, 1], &vecs).unwrap();
        assert!(!is_negligible(&r));
    }

    #[test]
    fn quasi_basis_examples() {
        let s = ws();
        let u = mono(s.f(1), -2);
        let tu = mono(s.f(1), -1);
        let m = TorsionModule::from_module_vectors(s, &[u.clone()]).unwrap();
        assert!(is_quasi_basis(&m, &[u.clone()]));
        assert!(!is_quasi_basis(&m, &[u.clone(), tu]));
        let u2 = mono(s.e(1), -2);
        let m2 = TorsionModule::from_module_vectors(s, &[u.clone(), u2.clone()]).unwrap();
        let shifted = u.add(&mono(s.e(1), -1));
        assert!(is_quasi_basis(&m2, &[shifted, u2.clone()]));
        let gens = m2.module_generators(s);
        assert!(is_quasi_basis(&m2, &gens));
    }

    #[test]
    fn primitive_examples() {
        let s = ws();
        let m = TorsionModule::from_module_vectors(s, &[mono(s.f(1), -2), mono(s.e(2), -3)]).unwrap();
        assert!(is_primitive_submodule(&m, &m));
        let tm = TorsionModule::from_module_vectors(s, &[mono(s.f(1), -1), mono(s.e(2), -2)]).unwrap();
        assert!(!is_primitive_submodule(&tm, &m));
        let l = TorsionModule::from_module_vectors(s, &[mono(s.e(2), -3)]).unwrap();
        assert!(is_primitive_submodule(&l, &m));
    }

    #[test]
    fn orbit_equality_examples() {
        let s = ws();
        let vs = QuadraticSpace::diagonal(&[1, 1]);
        let r = tensor(&vs, &[(s.f(1), -2, vec![1, 1]), (s.e(2), -1, vec![1, 0])]);
        assert!(orbit_invariants_equal(&r, &r));
        assert_eq!(compare_orbit_invariants(&r, &r.scale(&q(2))), Err(Error::TensorsDiffer));
        let other = tensor(&vs, &[(s.f(2), -2, vec![1, 1])]);
        assert_eq!(compare_orbit_invariants(&r, &other), Err(Error::ModulesDiffer));
        let z = TensorVector::zero(s, vs);
        assert!(orbit_invariants_equal(&z, &z));
    }

    #[test]
    fn report_shape() {
        let s = ws();
        let vs = QuadraticSpace::diagonal(&[2, 1]);
        let rep = orbit_report(&tensor(&vs, &[(s.f(1), -1, vec![1, 0])]));
        assert!(!rep.negligible);
        assert_eq!(rep.divisors, vec![1]);
        assert_eq!(rep.t_entries, vec![vec!["2".to_string()]]);
    }
}
