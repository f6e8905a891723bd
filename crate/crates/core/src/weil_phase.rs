//! Unipotent Weil-action phases on X ⊗ V: closed formulas for the six pure
//! generator types, the matrix oracle, the characters psi_r and the witness
//! search for their nontriviality.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{truncation_depth, ModuleVector, SymplecticSpace};
use crate::linalg::{self, mat_add, mat_mul, mat_scale, q, qf, transpose, zeros, Mat, Q};
use crate::loop_symplectic::{
    decompose_u, exp_truncated, pure_factors, LoopMatrix, ParabolicSplit, UnipotentKind, UnipotentParams,
};

/// A rational quadratic space (V, (,)) given by a symmetric invertible gram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticSpace {
    pub m: usize,
    pub gram: Mat,
}

impl QuadraticSpace {
    pub fn new(gram: Mat) -> Result<Self> {
        let m = gram.len();
        if m == 0 || gram.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidParams("gram must be a nonempty square matrix".into()));
        }
        if !linalg::is_symmetric(&gram) {
            return Err(Error::InvalidParams("gram must be symmetric".into()));
        }
        if linalg::det(&gram).is_zero() {
            return Err(Error::InvalidParams("gram must be nondegenerate".into()));
        }
        Ok(QuadraticSpace { m, gram })
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut g = zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            g[i][i] = q(d);
        }
        Self::new(g).expect("nonzero diagonal")
    }

    /// The hyperbolic plane with gram [[0, 1], [1, 0]].
    pub fn hyperbolic() -> Self {
        Self::new(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap()
    }

    pub fn form(&self, a: &[Q], b: &[Q]) -> Q {
        linalg::dot(&linalg::vec_mat(a, &self.gram), b)
    }

    /// Semi-decision: false as soon as an isotropic integer vector with entries
    /// in [-height, height] is found; true means none exists in that box.
    pub fn is_anisotropic(&self, height: i64) -> bool {
        let m = self.m;
        let mut v = vec![-height; m];
        loop {
            let nonzero = v.iter().any(|&x| x != 0);
            // Only one of v, -v: the first nonzero entry is positive.
            let canonical = v.iter().find(|&&x| x != 0).map_or(false, |&x| x > 0);
            if nonzero && canonical {
                let vq: Vec<Q> = v.iter().map(|&x| q(x)).collect();
                if self.form(&vq, &vq).is_zero() {
                    return false;
                }
            }
            let mut i = 0;
            loop {
                if i == m {
                    return true;
                }
                if v[i] < height {
                    v[i] += 1;
                    break;
                }
                v[i] = -height;
                i += 1;
            }
        }
    }
}

/// Default search height for `is_anisotropic`.
pub const ANISOTROPY_HEIGHT: i64 = 10;

/// A power series sum_{k>=0} t^k H_k of m x m matrices acting on V from the right.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalSeries {
    pub m: usize,
    coeffs: BTreeMap<i32, Mat>,
}

impl OrthogonalSeries {
    pub fn identity(m: usize) -> Self {
        Self::from_coeffs(m, [(0, linalg::identity(m))].into_iter().collect())
    }

    pub fn from_coeffs(m: usize, coeffs: BTreeMap<i32, Mat>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, c)| !linalg::is_zero_mat(c)).collect();
        OrthogonalSeries { m, coeffs }
    }

    pub fn coeff(&self, k: i32) -> Mat {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| zeros(self.m, self.m))
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Mat> {
        &self.coeffs
    }

    /// The reflection x -> x - 2 (x, v)/(v, v) v, if v is anisotropic.
    pub fn reflection(vs: &QuadraticSpace, v: &[Q]) -> Option<Self> {
        let vv = vs.form(v, v);
        if vv.is_zero() {
            return None;
        }
        let gv = linalg::vec_mat(v, &vs.gram);
        let m = vs.m;
        let mut h = linalg::identity(m);
        let f = q(2) / vv;
        for i in 0..m {
            for j in 0..m {
                h[i][j] -= &f * &gv[i] * &v[j];
            }
        }
        Some(Self::from_coeffs(m, [(0, h)].into_iter().collect()))
    }

    /// Product modulo t^(D+1).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = truncation_depth();
        let mut out: BTreeMap<i32, Mat> = BTreeMap::new();
        for (i, a) in &self.coeffs {
            for (j, b) in &other.coeffs {
                if i + j > d {
                    continue;
                }
                if i + j < -d {
                    return Err(Error::WindowOverflow { exponent: i + j, depth: d });
                }
                let p = mat_mul(a, b);
                let e = out.entry(i + j).or_insert_with(|| zeros(self.m, self.m));
                *e = mat_add(e, &p);
            }
        }
        Ok(Self::from_coeffs(self.m, out))
    }

    /// exp(xi) for xi in t o(V)[[t]] (xi G skew), modulo t^(D+1).
    pub fn exp(vs: &QuadraticSpace, xi: &Self) -> Result<Self> {
        if xi.coeffs.keys().any(|&k| k < 1) {
            return Err(Error::InvalidParams("exponent argument must be divisible by t".into()));
        }
        for c in xi.coeffs.values() {
            let s = mat_mul(c, &vs.gram);
            if mat_add(&s, &transpose(&s)).iter().flatten().any(|x| !x.is_zero()) {
                return Err(Error::InvalidParams("argument is not in the orthogonal Lie algebra".into()));
            }
        }
        let mut acc = Self::identity(xi.m);
        let mut pow = Self::identity(xi.m);
        for i in 1..=truncation_depth() {
            pow = pow.mul(xi)?;
            if pow.coeffs.is_empty() {
                break;
            }
            let scaled = pow.coeffs.iter().map(|(k, c)| (*k, mat_scale(c, &(Q::one() / factorial(i))))).collect();
            acc = acc.add(&Self::from_coeffs(xi.m, scaled));
        }
        Ok(acc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = out.entry(*k).or_insert_with(|| zeros(self.m, self.m));
            *e = mat_add(e, c);
        }
        Self::from_coeffs(self.m, out)
    }

    /// H G H^T = G within the window.
    pub fn is_orthogonal(&self, vs: &QuadraticSpace) -> Result<bool> {
        let g = Self::from_coeffs(self.m, [(0, vs.gram.clone())].into_iter().collect());
        let ht = Self::from_coeffs(self.m, self.coeffs.iter().map(|(k, c)| (*k, transpose(c))).collect());
        Ok(self.mul(&g)?.mul(&ht)? == g)
    }
}

fn factorial(i: i32) -> Q {
    (1..=i).fold(Q::one(), |acc, k| acc * q(k as i64))
}

/// An element r = sum_a b_a ⊗ w_a of W((t)) ⊗ V, stored as layers R_k
/// (m x 2n, rows indexed by the basis of V, columns by the basis of W).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorVector {
    pub ws: SymplecticSpace,
    pub vs: QuadraticSpace,
    layers: BTreeMap<i32, Mat>,
}

impl TensorVector {
    pub fn zero(ws: SymplecticSpace, vs: QuadraticSpace) -> Self {
        TensorVector { ws, vs, layers: BTreeMap::new() }
    }

    fn raw(ws: SymplecticSpace, vs: QuadraticSpace, layers: BTreeMap<i32, Mat>) -> Self {
        let layers = layers.into_iter().filter(|(_, c)| !linalg::is_zero_mat(c)).collect();
        TensorVector { ws, vs, layers }
    }

    /// Build from X-supported layers.
    pub fn from_layers(ws: SymplecticSpace, vs: QuadraticSpace, layers: BTreeMap<i32, Mat>) -> Result<Self> {
        let d = truncation_depth();
        for (k, c) in &layers {
            if c.len() != vs.m || c.iter().any(|r| r.len() != ws.dim()) {
                return Err(Error::InvalidParams("layer has the wrong shape".into()));
            }
            if *k < -d {
                return Err(Error::WindowOverflow { exponent: *k, depth: d });
            }
        }
        let r = Self::raw(ws, vs, layers);
        if !r.is_x_supported() {
            return Err(Error::InvalidParams("tensor must be supported in negative exponents".into()));
        }
        Ok(r)
    }

    /// r = sum_i w_i ⊗ v_i.
    pub fn from_terms(ws: SymplecticSpace, vs: QuadraticSpace, terms: &[(ModuleVector, Vec<Q>)]) -> Result<Self> {
        let mut layers: BTreeMap<i32, Mat> = BTreeMap::new();
        for (w, v) in terms {
            assert_eq!(v.len(), vs.m, "vector has the wrong length");
            for (k, wk) in w.coeffs() {
                let layer = layers.entry(*k).or_insert_with(|| zeros(vs.m, ws.dim()));
                for a in 0..vs.m {
                    for j in 0..ws.dim() {
                        layer[a][j] += &v[a] * &wk[j];
                    }
                }
            }
        }
        Self::from_layers(ws, vs, layers)
    }

    /// The W-components w_a with r = sum_a b_a ⊗ w_a over the standard basis b_a of V.
    pub fn components(&self) -> Vec<ModuleVector> {
        (0..self.vs.m)
            .map(|a| {
                let map = self.layers.iter().map(|(k, c)| (*k, c[a].clone())).collect();
                ModuleVector::from_map(self.ws, map).expect("stored exponents fit the window")
            })
            .collect()
    }

    pub fn layers(&self) -> &BTreeMap<i32, Mat> {
        &self.layers
    }

    pub fn layer(&self, k: i32) -> Mat {
        self.layers.get(&k).cloned().unwrap_or_else(|| zeros(self.vs.m, self.ws.dim()))
    }

    pub fn is_zero(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn is_x_supported(&self) -> bool {
        self.layers.keys().all(|&k| k <= -1)
    }

    /// Largest l with a nonzero t^{-l} layer, 0 for zero.
    pub fn depth(&self) -> i32 {
        self.layers.keys().next().map_or(0, |&k| (-k).max(0))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.layers.clone();
        for (k, c) in &other.layers {
            let e = out.entry(*k).or_insert_with(|| zeros(self.vs.m, self.ws.dim()));
            *e = mat_add(e, c);
        }
        Self::raw(self.ws, self.vs.clone(), out)
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::raw(self.ws, self.vs.clone(), self.layers.iter().map(|(k, c)| (*k, mat_scale(c, s))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&q(-1)))
    }

    /// Keep only the W-coordinates in `cols`.
    pub fn restrict_cols(&self, cols: &[usize]) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|(k, c)| {
                let mut m = zeros(self.vs.m, self.ws.dim());
                for a in 0..self.vs.m {
                    for &j in cols {
                        m[a][j] = c[a][j].clone();
                    }
                }
                (*k, m)
            })
            .collect();
        Self::raw(self.ws, self.vs.clone(), layers)
    }

    /// The (x, y, z) parts on l+, W0 and l-.
    pub fn split_parts(&self, sp: ParabolicSplit) -> (Self, Self, Self) {
        (self.restrict_cols(&sp.plus()), self.restrict_cols(&sp.w0()), self.restrict_cols(&sp.minus()))
    }

    pub fn project_x(&self) -> Self {
        Self::raw(self.ws, self.vs.clone(), self.layers.range(..=-1).map(|(k, c)| (*k, c.clone())).collect())
    }

    pub fn project_y(&self) -> Self {
        Self::raw(self.ws, self.vs.clone(), self.layers.range(0..).map(|(k, c)| (*k, c.clone())).collect())
    }

    /// r g with g acting on the W factor, modulo t^(D+1).
    pub fn act(&self, g: &LoopMatrix) -> Result<Self> {
        assert_eq!(g.space, self.ws);
        let d = truncation_depth();
        let gk: Vec<(i32, Mat)> = g.exponents().into_iter().map(|k| (k, g.coeff_matrix(k))).collect();
        let mut out: BTreeMap<i32, Mat> = BTreeMap::new();
        for (i, r) in &self.layers {
            for (j, m) in &gk {
                let k = i + j;
                if k > d {
                    continue;
                }
                if k < -d {
                    return Err(Error::WindowOverflow { exponent: k, depth: d });
                }
                let p = mat_mul(r, m);
                let e = out.entry(k).or_insert_with(|| zeros(self.vs.m, self.ws.dim()));
                *e = mat_add(e, &p);
            }
        }
        Ok(Self::raw(self.ws, self.vs.clone(), out))
    }

    /// r h with h acting on the V factor: layers become H^T R.
    pub fn act_v(&self, h: &OrthogonalSeries) -> Result<Self> {
        assert_eq!(h.m, self.vs.m);
        let d = truncation_depth();
        let mut out: BTreeMap<i32, Mat> = BTreeMap::new();
        for (i, r) in &self.layers {
            for (j, hm) in h.coeffs() {
                let k = i + j;
                if k > d {
                    continue;
                }
                if k < -d {
                    return Err(Error::WindowOverflow { exponent: k, depth: d });
                }
                let p = mat_mul(&transpose(hm), r);
                let e = out.entry(k).or_insert_with(|| zeros(self.vs.m, self.ws.dim()));
                *e = mat_add(e, &p);
            }
        }
        Ok(Self::raw(self.ws, self.vs.clone(), out))
    }

    /// The residue pairing <,> ⊗ (,) on W((t)) ⊗ V.
    pub fn pair(&self, other: &Self) -> Q {
        let mut s = Q::zero();
        let g = &self.vs.gram;
        for (k, r) in &self.layers {
            let Some(o) = other.layers.get(&(-1 - k)) else { continue };
            for a in 0..self.vs.m {
                for b in 0..self.vs.m {
                    if g[a][b].is_zero() {
                        continue;
                    }
                    let p = self.ws.pair(&r[a], &o[b]);
                    if !p.is_zero() {
                        s += &g[a][b] * p;
                    }
                }
            }
        }
        s
    }

    /// The gram (v_i, v_j) of the V-vectors attached to the coordinates `cols` in the t^{-l} layer.
    pub fn layer_gram(&self, l: i32, cols: &[usize]) -> Mat {
        let c = self.layer(-l);
        let vecs: Vec<Vec<Q>> = cols.iter().map(|&j| (0..self.vs.m).map(|a| c[a][j].clone()).collect()).collect();
        vecs.iter().map(|u| vecs.iter().map(|v| self.vs.form(u, v)).collect()).collect()
    }
}

/// The pure generator types of U.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PureType {
    Identity,
    Mu,
    Beta,
    Nu,
    Gamma,
    Alpha,
    Delta,
}

pub fn pure_type(u: &UnipotentParams) -> Result<PureType> {
    u.validate()?;
    let id = UnipotentParams::identity(u.kind, u.split);
    let nz = |m: &LoopMatrix, base: &LoopMatrix| m.normalized() != base.normalized();
    let t = match u.kind {
        UnipotentKind::Plus => match (nz(&u.mu, &id.mu), nz(&u.beta, &id.beta)) {
            (false, false) => PureType::Identity,
            (true, false) => PureType::Mu,
            (false, true) => PureType::Beta,
            (true, true) => return Err(Error::UnsupportedElement("n+(mu, beta) with mu and beta both nonzero".into())),
        },
        UnipotentKind::Minus => match (nz(&u.nu, &id.nu), nz(&u.gamma, &id.gamma)) {
            (false, false) => PureType::Identity,
            (true, false) => PureType::Nu,
            (false, true) => PureType::Gamma,
            (true, true) => return Err(Error::UnsupportedElement("n-(nu, gamma) with nu and gamma both nonzero".into())),
        },
        UnipotentKind::Zero => match (nz(&u.alpha, &id.alpha), nz(&u.delta, &id.delta)) {
            (false, false) => PureType::Identity,
            (true, false) => PureType::Alpha,
            (false, true) => PureType::Delta,
            (true, true) => return Err(Error::UnsupportedElement("n0(alpha, delta) with alpha and delta both nontrivial".into())),
        },
    };
    Ok(t)
}

/// (r a_u, phase) for a pure generator by the closed formulas.
pub fn act_phase_formula(u: &UnipotentParams, r: &TensorVector) -> Result<(TensorVector, Q)> {
    let ty = pure_type(u)?;
    let (x, y, z) = r.split_parts(u.split);
    let half = qf(1, 2);
    let out = match ty {
        PureType::Identity => (r.clone(), Q::zero()),
        PureType::Mu => {
            let ms = u.mu.adjoint();
            let xm = x.act(&u.mu)?;
            let xmm = x.act(&u.mu.mul(&ms)?)?;
            let ym = y.act(&ms)?;
            let shift = xm.sub(&xmm.scale(&half)).sub(&ym).project_x();
            let phase = y.pair(&xm) + half * xm.pair(&xm.project_y());
            (r.add(&shift), phase)
        }
        PureType::Beta => {
            let xb = x.act(&u.beta)?;
            (r.add(&xb.project_x()), half * x.pair(&xb))
        }
        PureType::Nu => {
            let ns = u.nu.adjoint();
            let yn = y.act(&u.nu)?;
            let zns = z.act(&ns)?;
            let znsn = z.act(&ns.mul(&u.nu)?)?;
            let shift = yn.sub(&znsn.scale(&half)).sub(&zns).project_x();
            let phase = z.pair(&yn) + half * zns.pair(&zns.project_y());
            (r.add(&shift), phase)
        }
        PureType::Gamma => {
            let zg = z.act(&u.gamma)?;
            (r.add(&zg.project_x()), half * z.pair(&zg))
        }
        PureType::Alpha => {
            let xa = x.act(&u.alpha)?;
            let za = z.act(&u.alpha_dual_inverse()?)?;
            let phase = half * xa.pair(&za.project_y().sub(&za.project_x()));
            (y.add(&xa.add(&za).project_x()), phase)
        }
        PureType::Delta => {
            let yd = y.act(&u.delta)?;
            let phase = half * yd.project_x().pair(&yd.project_y());
            (x.add(&z).add(&yd.project_x()), phase)
        }
    };
    Ok(out)
}

/// (p_X(r u), 1/2 <p_X(r u), p_Y(r u)>) computed on the matrix.
pub fn act_phase_oracle(u: &LoopMatrix, r: &TensorVector) -> Result<(TensorVector, Q)> {
    if !u.is_power_series() {
        return Err(Error::NonzeroC);
    }
    let ru = r.act(u)?;
    let (px, py) = (ru.project_x(), ru.project_y());
    let phase = qf(1, 2) * px.pair(&py);
    Ok((px, phase))
}

/// Factor u with `decompose_u` and thread r through the pure factors,
/// accumulating the phase additively.
pub fn act_phase_chain(u: &LoopMatrix, split: ParabolicSplit, r: &TensorVector) -> Result<(TensorVector, Q)> {
    let (p, z, m) = decompose_u(u, split)?;
    let mut cur = r.clone();
    let mut phase = Q::zero();
    for pack in [p, z, m] {
        for f in pure_factors(&pack) {
            let (next, ph) = act_phase_formula(&f, &cur)?;
            cur = next;
            phase += ph;
        }
    }
    Ok((cur, phase))
}

/// The character value argument 1/2 <r, r b_u> for u in the stabilizer of r.
pub fn psi_r_phase(r: &TensorVector, u: &LoopMatrix) -> Result<Q> {
    let (ra, phase) = act_phase_oracle(u, r)?;
    if ra != *r {
        return Err(Error::NotInStabilizer);
    }
    Ok(phase)
}

/// Phase oracle for h acting on the V factor.
pub fn vside_phase_oracle(h: &OrthogonalSeries, r: &TensorVector) -> Result<(TensorVector, Q)> {
    if h.coeffs().keys().any(|&k| k < 0) {
        return Err(Error::NonzeroC);
    }
    let rh = r.act_v(h)?;
    let (px, py) = (rh.project_x(), rh.project_y());
    let phase = qf(1, 2) * px.pair(&py);
    Ok((px, phase))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessFamily {
    Beta,
    Gamma,
    Delta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessReport {
    pub family: WitnessFamily,
    /// Depth l of the violating part; the element lives at order t^(2l-1).
    pub depth: i32,
    /// beta0 / gamma0 (a x a) or xi0 (on W0 coordinates).
    pub parameter: Mat,
    pub element: LoopMatrix,
    pub phase: Q,
}

fn unit_symmetric(k: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    for i in 0..k {
        let mut m = zeros(k, k);
        m[i][i] = q(1);
        out.push(m);
    }
    for i in 0..k {
        for j in i + 1..k {
            let mut m = zeros(k, k);
            m[i][j] = q(1);
            m[j][i] = q(1);
            out.push(m);
        }
    }
    out
}

fn part_depth(p: &TensorVector) -> i32 {
    p.depth()
}

/// Search the beta, gamma and delta families, in that order, for an element of
/// the stabilizer of r with nonzero phase.
pub fn find_nontrivial_character_witness(r: &TensorVector, split: ParabolicSplit) -> Result<WitnessReport> {
    let s = split.space;
    let d = truncation_depth();
    let (x, y, z) = r.split_parts(split);
    let (lx, ly, lz) = (part_depth(&x), part_depth(&y), part_depth(&z));
    if x.is_zero() && y.is_zero() && lz <= 1 {
        return Err(Error::InvalidParams("r lies in t^-1 l- ⊗ V, where the character is trivial".into()));
    }
    let (p, m, w) = (split.plus(), split.minus(), split.w0());
    let mut vanishing = Vec::new();
    let check_depth = |l: i32| {
        if 2 * l - 1 > d {
            Err(Error::WindowOverflow { exponent: 2 * l - 1, depth: d })
        } else {
            Ok(())
        }
    };
    if !x.is_zero() {
        check_depth(lx)?;
        if linalg::is_zero_mat(&r.layer_gram(lx, &p)) {
            vanishing.push("<x_l, x_l>_V");
        } else {
            for b0 in unit_symmetric(split.a) {
                let mut beta = zeros(s.dim(), s.dim());
                for i in 0..split.a {
                    for j in 0..split.a {
                        beta[p[i]][m[j]] = b0[i][j].clone();
                    }
                }
                let beta = LoopMatrix::from_coeffs(s, &[(2 * lx - 1, beta)]);
                let params = UnipotentParams::plus(split, LoopMatrix::zero(s), beta);
                let g = crate::loop_symplectic::make_unipotent(&params)?;
                let phase = psi_r_phase(r, &g)?;
                if !phase.is_zero() {
                    return Ok(WitnessReport { family: WitnessFamily::Beta, depth: lx, parameter: b0, element: g, phase });
                }
            }
        }
    }
    if lz >= 2 {
        check_depth(lz)?;
        if linalg::is_zero_mat(&r.layer_gram(lz, &m)) {
            vanishing.push("<z_l, z_l>_V");
        } else {
            for g0 in unit_symmetric(split.a) {
                let mut gamma = zeros(s.dim(), s.dim());
                for i in 0..split.a {
                    for j in 0..split.a {
                        gamma[m[i]][p[j]] = g0[i][j].clone();
                    }
                }
                let gamma = LoopMatrix::from_coeffs(s, &[(2 * lz - 1, gamma)]);
                let params = UnipotentParams::minus(split, LoopMatrix::zero(s), gamma);
                let g = crate::loop_symplectic::make_unipotent(&params)?;
                let phase = psi_r_phase(r, &g)?;
                if !phase.is_zero() {
                    return Ok(WitnessReport { family: WitnessFamily::Gamma, depth: lz, parameter: g0, element: g, phase });
                }
            }
        }
    }
    if !y.is_zero() {
        check_depth(ly)?;
        if linalg::is_zero_mat(&r.layer_gram(ly, &w)) {
            vanishing.push("<y_l, y_l>_V");
        } else {
            let k = w.len();
            let h = k / 2;
            // xi0 = S J^{-1} on W0, with J the gram of W0.
            let mut j_inv = zeros(k, k);
            for i in 0..h {
                j_inv[i][h + i] = q(-1);
                j_inv[h + i][i] = q(1);
            }
            for sym in unit_symmetric(k) {
                let xi0 = mat_mul(&sym, &j_inv);
                let mut xi = zeros(s.dim(), s.dim());
                for i in 0..k {
                    for j in 0..k {
                        xi[w[i]][w[j]] = xi0[i][j].clone();
                    }
                }
                let xi = LoopMatrix::from_coeffs(s, &[(2 * ly - 1, xi)]);
                let g = exp_truncated(&xi)?;
                let phase = psi_r_phase(r, &g)?;
                if !phase.is_zero() {
                    return Ok(WitnessReport { family: WitnessFamily::Delta, depth: ly, parameter: xi0, element: g, phase });
                }
            }
        }
    }
    Err(Error::NoWitness(format!(
        "{} vanish; V is isotropic on the relevant vectors",
        if vanishing.is_empty() { "all families".to_string() } else { vanishing.join(", ") }
    )))
}
