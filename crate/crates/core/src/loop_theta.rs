//! q-damped loop theta series through the depth factorization
//! prod_n theta(q^{n-1} z0), the loop lift, the q-convergence study and the
//! growth of the product vartheta(x) = prod_j (1 + beta e^{-x rho^j}).

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Q;
use crate::quaternion::{
    evaluate_lift_point, evaluate_theta_point, lift_weights, tail_sum, theta_series_pair, yoshida_from_table, GramKey,
    IdealClassData, OrderLattice, SiegelPoint, ThetaCoefficients,
};

/// Largest depth a tail target may require.
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DepthPolicy {
    Fixed(usize),
    /// Smallest depth whose omitted factors multiply to within eps of 1.
    TailTarget(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSiegelPoint {
    pub z0: SiegelPoint,
    pub q: f64,
    pub policy: DepthPolicy,
}

impl LoopSiegelPoint {
    pub fn new(z0: SiegelPoint, q: f64, policy: DepthPolicy) -> Result<Self> {
        if !(q > 1.0) {
            return Err(Error::InvalidParams(format!("q = {} must exceed 1", q)));
        }
        let lam = z0.min_imag_eigenvalue();
        if !(lam > 0.0) {
            return Err(Error::DivergentTail(lam));
        }
        Ok(LoopSiegelPoint { z0, q, policy })
    }

    /// q^{n-1} z0 for depth n >= 1.
    pub fn depth_point(&self, n: usize) -> SiegelPoint {
        self.z0.scale(self.q.powi(n as i32 - 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopThetaValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub depth_used: usize,
    pub per_depth_factors: Vec<Complex64>,
    /// prod_{n >= 2} factor_n - 1, computed without cancellation.
    pub deep_excess: Complex64,
    /// Bound on |prod_{n > N} theta(q^{n-1} z0) - 1|.
    pub omitted_bound: f64,
}

fn log1p(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        z - z * z / 2.0 + z * z * z / 3.0 - z * z * z * z / 4.0
    } else {
        (Complex64::new(1.0, 0.0) + z).ln()
    }
}

fn expm1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0
    } else {
        z.exp() - 1.0
    }
}

fn real_log1p(x: f64) -> f64 {
    x.ln_1p()
}

/// Bound on |theta(w) - 1| over all of T != 0.
fn factor_excess_bound(constant: f64, lam: f64) -> f64 {
    tail_sum(constant, 0, lam)
}

/// Bound on |prod_{n > depth} theta(q^{n-1} z0) - 1|.
fn omitted_bound(constant: f64, pt: &LoopSiegelPoint, depth: usize) -> f64 {
    let lam = pt.z0.min_imag_eigenvalue();
    let mut s = 0.0;
    for n in depth + 1..depth + 200 {
        let t = factor_excess_bound(constant, lam * pt.q.powi(n as i32 - 1));
        s += t;
        if t < 1e-300 || t < 1e-20 * s {
            break;
        }
    }
    s.exp_m1()
}

fn choose_depth(constant: f64, pt: &LoopSiegelPoint) -> Result<usize> {
    match pt.policy {
        DepthPolicy::Fixed(n) if n >= 1 && n <= MAX_DEPTH => Ok(n),
        DepthPolicy::Fixed(n) => Err(Error::InvalidParams(format!("depth {} outside 1..={}", n, MAX_DEPTH))),
        DepthPolicy::TailTarget(eps) => {
            (1..=MAX_DEPTH).find(|&n| omitted_bound(constant, pt, n) <= eps).ok_or(Error::DepthOverflow(eps))
        }
    }
}

/// The loop theta value from the classical coefficients of one lattice.
pub fn loop_theta_from_coeffs(coeffs: &ThetaCoefficients, pt: &LoopSiegelPoint) -> Result<LoopThetaValue> {
    let depth = choose_depth(coeffs.tail_constant, pt)?;
    let mut factors = Vec::with_capacity(depth);
    let mut log_all = Complex64::zero();
    let mut log_deep = Complex64::zero();
    let mut log_abs = 0.0;
    let mut log_rel_err = 0.0;
    for n in 1..=depth {
        let v = evaluate_theta_point(coeffs, &pt.depth_point(n))?;
        let l = log1p(v.excess);
        log_all += l;
        if n >= 2 {
            log_deep += l;
        }
        log_abs += l.re;
        log_rel_err += real_log1p(v.tail_bound / v.value.norm());
        factors.push(v.value);
    }
    let omitted = omitted_bound(coeffs.tail_constant, pt, depth);
    // |true - value| <= prod |a_n| ((1 + U)(1 + R) - 1) with U from classical truncation.
    let u = log_rel_err.exp_m1();
    let tail = log_abs.exp() * (u + omitted + u * omitted);
    Ok(LoopThetaValue {
        value: log_all.exp(),
        tail_bound: tail,
        depth_used: depth,
        per_depth_factors: factors,
        deep_excess: expm1(log_deep),
        omitted_bound: omitted,
    })
}

pub fn loop_theta_ij(l: &OrderLattice, pt: &LoopSiegelPoint, trace_bound: i64) -> Result<LoopThetaValue> {
    loop_theta_from_coeffs(&theta_series_pair(l, trace_bound)?, pt)
}

/// sum_{(x1,y1),(x2,y2)} exp(2 pi i (Trace(T1 z0) + q Trace(T2 z0))) over pairs in L^2 with
/// both traces at most `trace_bound`, enumerated pair by pair without the count table.
pub fn direct_two_depth_sum(l: &OrderLattice, z0: &SiegelPoint, q: f64, trace_bound: i64) -> Result<Complex64> {
    let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    let gram: Vec<Vec<f64>> = l.gram.iter().map(|r| r.iter().map(|c| c.to_f64().unwrap()).collect()).collect();
    let g2: Vec<Vec<i64>> = l.gram.iter().map(|r| r.iter().map(|c| (c * crate::linalg::q(2)).to_integer().to_i64().unwrap()).collect()).collect();
    let vecs: Vec<Vec<i64>> = crate::quaternion::short_vectors(&g2, 2 * trace_bound).into_iter().map(|(x, _)| x).collect();
    let form = |x: &[i64], y: &[i64]| -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += x[a] as f64 * gram[a][b] * y[b] as f64;
            }
        }
        s
    };
    let mut pairs: Vec<GramKey> = Vec::new();
    for x in &vecs {
        for y in &vecs {
            let a = form(x, x).round() as i64;
            let c = form(y, y).round() as i64;
            if a + c <= trace_bound {
                pairs.push((a, (2.0 * form(x, y)).round() as i64, c));
            }
        }
    }
    let w2 = z0.scale(q);
    let mut s = Complex64::zero();
    for t1 in &pairs {
        let e1 = two_pi_i * z0.trace_with(*t1);
        for t2 in &pairs {
            s += (e1 + two_pi_i * w2.trace_with(*t2)).exp();
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopLiftValue {
    pub value: Complex64,
    /// The depth-one part sum_ij w_ij theta_ij(z0).
    pub classical: Complex64,
    /// value - classical.
    pub shift: Complex64,
    pub tail_bound: f64,
    pub depth_used: usize,
}

/// sum_{i,j} theta~_ij f(y_j)/(e_i e_j) from precomputed classical tables.
pub fn loop_lift_from_table(f: &[Q], classes: &IdealClassData, table: &[Vec<ThetaCoefficients>], pt: &LoopSiegelPoint) -> Result<LoopLiftValue> {
    let w = lift_weights(f, classes);
    let total: f64 = w.iter().flatten().map(|x| x.to_f64().unwrap()).sum();
    let exact_total: Q = w.iter().flatten().fold(Q::zero(), |a, x| a + x);
    let mut classical = Complex64::new(if exact_total.is_zero() { 0.0 } else { total }, 0.0);
    let mut shift = Complex64::zero();
    let mut tail = 0.0;
    let mut depth = 0;
    for (i, row) in table.iter().enumerate() {
        for (j, coeffs) in row.iter().enumerate() {
            let wij = w[i][j].to_f64().unwrap();
            if wij == 0.0 {
                continue;
            }
            let v = loop_theta_from_coeffs(coeffs, pt)?;
            let first = v.per_depth_factors[0];
            classical += (first - 1.0) * wij;
            shift += first * v.deep_excess * wij;
            tail += wij.abs() * v.tail_bound;
            depth = depth.max(v.depth_used);
        }
    }
    Ok(LoopLiftValue { value: classical + shift, classical, shift, tail_bound: tail, depth_used: depth })
}

pub fn loop_theta_lift(f: &[Q], classes: &IdealClassData, pt: &LoopSiegelPoint, trace_bound: i64) -> Result<LoopLiftValue> {
    let table = crate::quaternion::theta_table(classes, trace_bound)?;
    loop_lift_from_table(f, classes, &table, pt)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub q: f64,
    pub value: Complex64,
    /// |value - theta^f(z0)|, with theta^f(z0) the depth-one value.
    pub diff: f64,
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// theta^f(z0) from the lift coefficients.
    pub reference: Complex64,
    pub reference_tail: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].diff < w[0].diff)
    }
}

pub fn convergence_study(
    f: &[Q],
    classes: &IdealClassData,
    z0: &SiegelPoint,
    q_list: &[f64],
    trace_bound: i64,
    policy: DepthPolicy,
) -> Result<ConvergenceStudy> {
    if q_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("q values must be increasing".into()));
    }
    let table = crate::quaternion::theta_table(classes, trace_bound)?;
    let lift = yoshida_from_table(f, classes, &table);
    let reference = evaluate_lift_point(&lift, z0)?;
    let mut rows = Vec::new();
    for &q in q_list {
        let pt = LoopSiegelPoint::new(*z0, q, policy)?;
        let v = loop_lift_from_table(f, classes, &table, &pt)?;
        rows.push(ConvergenceRow { q, value: v.value, diff: v.shift.norm(), tail: v.tail_bound });
    }
    Ok(ConvergenceStudy { reference: reference.value, reference_tail: reference.tail_bound, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub beta: f64,
    pub rho: f64,
    pub slope: f64,
    pub residual: f64,
    /// beta / log rho.
    pub stated_rate: f64,
}

/// log vartheta(x), truncated once a factor is within 1e-16 of 1.
pub fn log_vartheta(beta: f64, rho: f64, x: f64) -> f64 {
    let mut s = 0.0;
    let mut j = 1;
    loop {
        let term = beta * (-x * rho.powi(j)).exp();
        if term < 1e-16 {
            break;
        }
        s += term.ln_1p();
        j += 1;
    }
    s
}

/// Log-spaced grid on [lo, hi].
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// Least-squares slope of log vartheta(x) against log(1/x).
pub fn vartheta_growth(beta: f64, rho: f64, x_grid: &[f64]) -> Result<GrowthFit> {
    if !(rho > 1.0) || !(beta > 0.0) {
        return Err(Error::InvalidParams("need rho > 1 and beta > 0".into()));
    }
    if x_grid.len() < 2 || x_grid.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::InvalidParams("grid must have at least two points in (0, 1)".into()));
    }
    let pts: Vec<(f64, f64)> = x_grid.iter().map(|&x| (-x.ln(), log_vartheta(beta, rho, x))).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok(GrowthFit { beta, rho, slope, residual, stated_rate: beta / rho.ln() })
}

/// The default fit grid, away from x near 1.
pub fn default_growth_grid() -> Vec<f64> {
    log_grid(1e-8, 1e-2, 25)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quaternion::{construct_maximal_order, enumerate_ideal_classes};

    fn classes(p: u64) -> IdealClassData {
        let (alg, r) = construct_maximal_order(p).unwrap();
        enumerate_ideal_classes(&alg, &r).unwrap()
    }

    #[test]
    fn single_depth_collapse() {
        let c = classes(7);
        let coeffs = theta_series_pair(c.lattice(0, 0), 6).unwrap();
        let z = SiegelPoint::i_identity();
        let pt = LoopSiegelPoint::new(z, 3.0, DepthPolicy::Fixed(1)).unwrap();
        let v = loop_theta_from_coeffs(&coeffs, &pt).unwrap();
        let direct = evaluate_theta_point(&coeffs, &z).unwrap();
        assert!((v.value - direct.value).norm() < 1e-14);
        assert!(v.omitted_bound > 0.0);
    }

    #[test]
    fn factorization_matches_direct_sum() {
        let c = classes(11);
        let z = SiegelPoint::new(Complex64::new(0.1, 0.6), Complex64::new(0.05, 0.1), Complex64::new(-0.2, 0.5));
        let pt = LoopSiegelPoint::new(z, 3.0, DepthPolicy::Fixed(2)).unwrap();
        let v = loop_theta_ij(c.lattice(0, 1), &pt, 2).unwrap();
        let d = direct_two_depth_sum(c.lattice(0, 1), &z, 3.0, 2).unwrap();
        assert!((v.value - d).norm() <= v.tail_bound + 1e-12, "{} vs {} tail {}", v.value, d, v.tail_bound);
    }

    #[test]
    fn deeper_runs_stay_within_tail() {
        let c = classes(11);
        let coeffs = theta_series_pair(c.lattice(1, 1), 6).unwrap();
        let z = SiegelPoint::new(Complex64::new(0.0, 0.4), Complex64::new(0.1, 0.05), Complex64::new(0.3, 0.45));
        let a = loop_theta_from_coeffs(&coeffs, &LoopSiegelPoint::new(z, 1.5, DepthPolicy::Fixed(2)).unwrap()).unwrap();
        let b = loop_theta_from_coeffs(&coeffs, &LoopSiegelPoint::new(z, 1.5, DepthPolicy::Fixed(6)).unwrap()).unwrap();
        assert!((a.value - b.value).norm() <= a.tail_bound);
    }

    #[test]
    fn depth_policy() {
        let c = classes(3);
        let coeffs = theta_series_pair(c.lattice(0, 0), 4).unwrap();
        let z = SiegelPoint::i_identity();
        let v = loop_theta_from_coeffs(&coeffs, &LoopSiegelPoint::new(z, 2.0, DepthPolicy::TailTarget(1e-12)).unwrap()).unwrap();
        assert!(v.omitted_bound <= 1e-12);
        let tiny = LoopSiegelPoint::new(z.scale(1e-3), 1.0001, DepthPolicy::TailTarget(1e-30)).unwrap();
        assert!(matches!(loop_theta_from_coeffs(&coeffs, &tiny), Err(Error::DepthOverflow(_))));
        assert!(LoopSiegelPoint::new(z, 1.0, DepthPolicy::Fixed(1)).is_err());
    }

    #[test]
    fn lift_converges_in_q() {
        let c = classes(11);
        let f = vec![crate::linalg::q(2), crate::linalg::q(-3)];
        let study = convergence_study(&f, &c, &SiegelPoint::i_identity(), &[2.0, 4.0, 8.0], 12, DepthPolicy::TailTarget(1e-60)).unwrap();
        assert!(study.strictly_decreasing(), "{:?}", study.rows);
        let last = study.rows.last().unwrap();
        assert!((last.value - study.reference).norm() <= last.tail + study.reference_tail + 1e-15);
    }

    #[test]
    fn single_class_lift() {
        let c = classes(3);
        let f = vec![crate::linalg::q(1)];
        let pt = LoopSiegelPoint::new(SiegelPoint::i_identity(), 2.0, DepthPolicy::Fixed(3)).unwrap();
        let lift = loop_theta_lift(&f, &c, &pt, 6).unwrap();
        let single = loop_theta_ij(c.lattice(0, 0), &pt, 6).unwrap();
        assert!((lift.value - single.value / 144.0).norm() < 1e-14);
    }

    #[test]
    fn growth_rate() {
        let fit = vartheta_growth(1.0, std::f64::consts::E, &default_growth_grid()).unwrap();
        assert!((fit.slope - 2f64.ln()).abs() < 0.05, "{:?}", fit);
        assert!(fit.slope >= 0.5 * fit.stated_rate);
        assert!(vartheta_growth(1.0, 1.0, &default_growth_grid()).is_err());
    }
}
