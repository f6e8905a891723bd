//! Tame symbol, valuation parity, Weil indices from normalized Gauss sums, the
//! metaplectic symbol and its product over places.

use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::truncation_depth;
use crate::linalg::{q, Q};

/// c t^m u(t) with u(0) = 1, u truncated at degree D.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentUnit {
    pub val: i32,
    pub leading_coeff: Q,
    /// Coefficients of u(t), starting with the constant 1.
    pub unit_part: Vec<Q>,
}

impl LaurentUnit {
    pub fn new(val: i32, leading_coeff: Q, unit_part: Vec<Q>) -> Result<Self> {
        if leading_coeff.is_zero() {
            return Err(Error::InvalidParams("leading coefficient must be nonzero".into()));
        }
        if unit_part.first().map_or(true, |c| !c.is_one()) {
            return Err(Error::InvalidParams("unit part must have constant term 1".into()));
        }
        let mut u = unit_part;
        u.truncate(truncation_depth() as usize + 1);
        while u.len() > 1 && u.last().map_or(false, |c| c.is_zero()) {
            u.pop();
        }
        Ok(LaurentUnit { val, leading_coeff, unit_part: u })
    }

    /// c t^m.
    pub fn monomial(c: Q, m: i32) -> Self {
        Self::new(m, c, vec![Q::one()]).expect("nonzero coefficient")
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    pub fn t() -> Self {
        Self::monomial(Q::one(), 1)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = truncation_depth() as usize;
        let len = (self.unit_part.len() + other.unit_part.len() - 1).min(d + 1);
        let mut u = vec![Q::zero(); len];
        for (i, a) in self.unit_part.iter().enumerate() {
            for (j, b) in other.unit_part.iter().enumerate() {
                if i + j < len {
                    u[i + j] += a * b;
                }
            }
        }
        Self::new(self.val + other.val, &self.leading_coeff * &other.leading_coeff, u).unwrap()
    }

    /// Coefficients of the series as (exponent, value).
    pub fn terms(&self) -> Vec<(i32, Q)> {
        self.unit_part
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.val + i as i32, c * &self.leading_coeff))
            .collect()
    }

    /// 1 - self, when its leading term is visible within the truncation.
    pub fn one_minus(&self) -> Option<Self> {
        let mut coeffs: std::collections::BTreeMap<i32, Q> = std::collections::BTreeMap::new();
        coeffs.insert(0, Q::one());
        for (k, c) in self.terms() {
            *coeffs.entry(k).or_insert_with(Q::zero) -= c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        let top = self.val.min(0) + truncation_depth();
        let (&v, lc) = coeffs.iter().next()?;
        if v > top {
            return None;
        }
        let lc = lc.clone();
        let len = (top - v + 1).max(1) as usize;
        let mut u = vec![Q::zero(); len];
        for (k, c) in &coeffs {
            let i = (k - v) as usize;
            if i < len {
                u[i] = c / &lc;
            }
        }
        Self::new(v, lc, u).ok()
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse_unit(s)
    }
}

impl fmt::Display for LaurentUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.leading_coeff)?;
        if self.val != 0 {
            write!(f, "*t^{}", self.val)?;
        }
        if self.unit_part.len() > 1 {
            let mut parts = vec!["1".to_string()];
            for (i, c) in self.unit_part.iter().enumerate().skip(1) {
                if !c.is_zero() {
                    parts.push(format!("{}*t^{}", c, i));
                }
            }
            write!(f, "*({})", parts.join("+"))?;
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> Result<Q> {
    let bad = || Error::Parse(format!("not a rational number: {:?}", s));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = s.trim().parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

fn split_top(s: &str, sep: char) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in {:?}", s)));
        }
        if ch == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(ch);
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in {:?}", s)));
    }
    out.push(cur);
    Ok(out)
}

fn parse_power(s: &str) -> Result<i32> {
    // "t", "t^k", "t^(k)"
    let rest = s.strip_prefix('t').ok_or_else(|| Error::Parse(format!("expected t in {:?}", s)))?;
    if rest.is_empty() {
        return Ok(1);
    }
    let e = rest.strip_prefix('^').ok_or_else(|| Error::Parse(format!("expected ^ in {:?}", s)))?;
    let e = e.trim_start_matches('(').trim_end_matches(')');
    e.parse::<i32>().map_err(|_| Error::Parse(format!("bad exponent in {:?}", s)))
}

/// A sum of terms c*t^k with k >= 0 inside parentheses.
fn parse_polynomial(s: &str) -> Result<LaurentUnit> {
    let mut terms: Vec<(i32, Q)> = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut start = 0;
    let mut pieces = Vec::new();
    for i in 1..chars.len() {
        if (chars[i] == '+' || chars[i] == '-') && chars[i - 1] != '^' && chars[i - 1] != '(' && chars[i - 1] != '*' {
            pieces.push(chars[start..i].iter().collect::<String>());
            start = i;
        }
    }
    pieces.push(chars[start..].iter().collect::<String>());
    for piece in pieces {
        let (sign, body) = match piece.strip_prefix('-') {
            Some(b) => (q(-1), b.to_string()),
            None => (q(1), piece.trim_start_matches('+').to_string()),
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty term in {:?}", s)));
        }
        let mut coeff = sign;
        let mut exp = 0;
        for f in body.split('*') {
            if f.starts_with('t') {
                exp += parse_power(f)?;
            } else {
                coeff *= parse_rational(f)?;
            }
        }
        terms.push((exp, coeff));
    }
    let mut map: std::collections::BTreeMap<i32, Q> = std::collections::BTreeMap::new();
    for (k, c) in terms {
        *map.entry(k).or_insert_with(Q::zero) += c;
    }
    map.retain(|_, c| !c.is_zero());
    let (&v, lc) = map.iter().next().ok_or_else(|| Error::Parse(format!("zero polynomial {:?}", s)))?;
    let lc = lc.clone();
    let top = *map.keys().next_back().unwrap();
    let mut u = vec![Q::zero(); (top - v + 1) as usize];
    for (k, c) in &map {
        u[(k - v) as usize] = c / &lc;
    }
    LaurentUnit::new(v, lc, u)
}

fn has_top_level_sum(s: &str) -> bool {
    let chars: Vec<char> = s.chars().collect();
    let mut depth = 0;
    for i in 0..chars.len() {
        match chars[i] {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > 0 && !matches!(chars[i - 1], '^' | '*' | '/') => return true,
            _ => {}
        }
    }
    false
}

fn parse_unit(s: &str) -> Result<LaurentUnit> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty Laurent unit".into()));
    }
    if has_top_level_sum(&s) {
        return parse_polynomial(&s);
    }
    let mut acc = LaurentUnit::constant(Q::one());
    for f in split_top(&s, '*')? {
        let (neg, body) = match f.strip_prefix('-') {
            Some(b) if b.starts_with('t') || b.starts_with('(') => (true, b.to_string()),
            _ => (false, f.clone()),
        };
        let mut unit = if body.starts_with('(') && body.ends_with(')') {
            parse_polynomial(&body[1..body.len() - 1])?
        } else if body.starts_with('t') {
            LaurentUnit::monomial(Q::one(), parse_power(&body)?)
        } else if body.is_empty() {
            return Err(Error::Parse(format!("empty factor in {:?}", s)));
        } else {
            let c = parse_rational(&body)?;
            if c.is_zero() {
                return Err(Error::Parse("zero is not a unit".into()));
            }
            LaurentUnit::constant(c)
        };
        if neg {
            unit.leading_coeff = -unit.leading_coeff;
        }
        acc = acc.mul(&unit);
    }
    Ok(acc)
}

/// Parity of the valuation.
pub fn epsilon(a: &LaurentUnit) -> u8 {
    a.val.rem_euclid(2) as u8
}

fn qpow(x: &Q, e: i32) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// (-1)^{v(a)v(b)} a^{v(b)} / b^{v(a)} evaluated at t = 0.
pub fn tame_symbol(a: &LaurentUnit, b: &LaurentUnit) -> Q {
    let sign = if (a.val as i64 * b.val as i64).rem_euclid(2) == 1 { q(-1) } else { q(1) };
    sign * qpow(&a.leading_coeff, b.val) / qpow(&b.leading_coeff, a.val)
}

/// A place of Q: the real place or a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Real,
    Finite(u64),
}

impl Place {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infty" | "real" | "oo" => Ok(Place::Real),
            t => {
                let p: u64 = t.parse().map_err(|_| Error::Parse(format!("bad place {:?}", t)))?;
                if !is_prime(p) {
                    return Err(Error::Parse(format!("{} is not prime", p)));
                }
                Ok(Place::Finite(p))
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{}", p),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Even precisions at which the Gauss sums are evaluated, and a cap on p^k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussLadder {
    pub rungs: Vec<u32>,
    pub max_modulus: u64,
}

impl Default for GaussLadder {
    fn default() -> Self {
        GaussLadder { rungs: vec![2, 4, 6, 8, 10, 12], max_modulus: 2_000_000 }
    }
}

/// Tolerance for agreement between successive rungs.
pub const LADDER_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeilIndexValue {
    /// exp(2 pi i k / 8).
    Root8(u8),
    Approx { re: f64, im: f64, error: f64 },
}

impl WeilIndexValue {
    pub fn to_complex(&self) -> Complex64 {
        match *self {
            WeilIndexValue::Root8(k) => root8(k as i64),
            WeilIndexValue::Approx { re, im, .. } => Complex64::new(re, im),
        }
    }

    pub fn exponent(&self) -> Option<u8> {
        match *self {
            WeilIndexValue::Root8(k) => Some(k),
            _ => None,
        }
    }
}

pub fn root8(k: i64) -> Complex64 {
    let k = k.rem_euclid(8) as f64;
    Complex64::from_polar(1.0, PI * k / 4.0)
}

fn snap(z: Complex64) -> WeilIndexValue {
    let k = (z.arg() / (PI / 4.0)).round() as i64;
    let r = root8(k);
    if (z - r).norm() < SNAP_TOL {
        WeilIndexValue::Root8(k.rem_euclid(8) as u8)
    } else {
        WeilIndexValue::Approx { re: z.re, im: z.im, error: LADDER_TOL }
    }
}

fn phase_table(n: u64) -> Arc<Vec<Complex64>> {
    static TABLES: OnceLock<Mutex<HashMap<u64, Arc<Vec<Complex64>>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = tables.lock().unwrap().get(&n) {
        return t.clone();
    }
    let t: Arc<Vec<Complex64>> = Arc::new((0..n).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64)).collect());
    tables.lock().unwrap().insert(n, t.clone());
    t
}

fn p_adic_split(a: &Q, p: u64) -> (i64, Q) {
    let pb = BigInt::from(p);
    let mut v = 0i64;
    let mut num = a.numer().clone();
    let mut den = a.denom().clone();
    while num.is_multiple_of(&pb) {
        num /= &pb;
        v += 1;
    }
    while den.is_multiple_of(&pb) {
        den /= &pb;
        v -= 1;
    }
    (v, Q::new(num, den))
}

/// Valuation of a nonzero rational at p.
pub fn valuation(a: &Q, p: u64) -> i64 {
    p_adic_split(a, p).0
}

fn residue_mod(u: &Q, n: u64) -> u64 {
    let nb = BigInt::from(n);
    let num = u.numer().mod_floor(&nb);
    let den = u.denom().mod_floor(&nb);
    let inv = den.modinv(&nb).expect("unit denominator");
    ((num * inv).mod_floor(&nb)).to_u64().unwrap()
}

/// S/|S| for S = sum over x mod p^k of psi_p(a x^2 / (2 p^k)), with a rescaled by
/// even powers of p to valuation 0 or 1.
fn normalized_gauss_sum(a: &Q, p: u64, k: u32) -> Result<Complex64> {
    let (v, u) = p_adic_split(a, p);
    let (count, modulus, c) = if p == 2 {
        if v != 0 {
            return Err(Error::UnsupportedTwoAdic(format!("{} is not a 2-adic unit", a)));
        }
        let m = 1u64 << (k + 1);
        (1u64 << k, m, residue_mod(&u, m))
    } else {
        let m = p.pow(k);
        let inv2 = Q::new(BigInt::one(), BigInt::from(2));
        let c = residue_mod(&(u * inv2), m) * if v.rem_euclid(2) == 1 { p } else { 1 } % m;
        (m, m, c % m)
    };
    let table = phase_table(modulus);
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..count {
        let j = ((c as u128 * ((x as u128 * x as u128) % modulus as u128)) % modulus as u128) as usize;
        s += table[j];
    }
    let n = s.norm();
    if n < 1e-6 {
        return Err(Error::PrecisionFailure(format!("Gauss sum for a = {} at p = {}, k = {} vanishes", a, p, k)));
    }
    Ok(s / n)
}

/// The rungs k of the ladder usable at p, with their normalized sums.
pub fn gauss_ladder_values(a: &Q, p: u64, ladder: &GaussLadder) -> Result<Vec<(u32, Complex64)>> {
    let mut out = Vec::new();
    for &k in &ladder.rungs {
        let m = if p == 2 { 1u64.checked_shl(k + 1) } else { p.checked_pow(k) };
        match m {
            Some(m) if m <= ladder.max_modulus => out.push((k, normalized_gauss_sum(a, p, k)?)),
            _ => break,
        }
    }
    if out.len() < 2 {
        return Err(Error::PrecisionFailure(format!("fewer than two ladder rungs fit under the modulus cap at p = {}", p)));
    }
    Ok(out)
}

fn finite_weil_index(a: &Q, p: u64, ladder: &GaussLadder) -> Result<WeilIndexValue> {
    type Key = (u64, i64, u64, Vec<u32>, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, WeilIndexValue>>> = OnceLock::new();
    // The sums depend on a only through its square class.
    let (v, u) = p_adic_split(a, p);
    let class = if p == 2 {
        residue_mod(&u, 8)
    } else {
        let r = residue_mod(&u, p);
        BigInt::from(r).modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p)).to_u64().unwrap()
    };
    let key = (p, if p == 2 { v } else { v.rem_euclid(2) }, class, ladder.rungs.clone(), ladder.max_modulus);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(*hit);
    }
    let value = uncached_weil_index(a, p, ladder)?;
    cache.lock().unwrap().insert(key, value);
    Ok(value)
}

fn uncached_weil_index(a: &Q, p: u64, ladder: &GaussLadder) -> Result<WeilIndexValue> {
    let vals = gauss_ladder_values(a, p, ladder)?;
    for w in vals.windows(2) {
        if (w[0].1 - w[1].1).norm() > LADDER_TOL {
            return Err(Error::PrecisionFailure(format!(
                "Gauss sums at p = {} disagree between k = {} and k = {}",
                p, w[0].0, w[1].0
            )));
        }
    }
    Ok(snap(vals.last().unwrap().1))
}

/// gamma(a, psi_v) for the quadratic character psi_v(a x^2 / 2).
pub fn weil_index(a: &Q, place: Place) -> Result<WeilIndexValue> {
    weil_index_with(a, place, &GaussLadder::default())
}

pub fn weil_index_with(a: &Q, place: Place, ladder: &GaussLadder) -> Result<WeilIndexValue> {
    if a.is_zero() {
        return Err(Error::InvalidParams("Weil index of 0".into()));
    }
    match place {
        Place::Real => Ok(WeilIndexValue::Root8(if a.is_positive() { 1 } else { 7 })),
        Place::Finite(2) => Err(Error::UnsupportedTwoAdic("the dyadic place is excluded".into())),
        Place::Finite(p) => finite_weil_index(a, p, ladder),
    }
}

/// Dyadic Weil index of a 2-adic unit, used only to close the product formula.
pub fn dyadic_weil_index(a: &Q, ladder: &GaussLadder) -> Result<WeilIndexValue> {
    finite_weil_index(a, 2, ladder)
}

/// zeta_8^root times sqrt(abs_sq).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolValue {
    pub root: u8,
    pub abs_sq: Q,
}

impl SymbolValue {
    pub fn mul(&self, other: &Self) -> Self {
        SymbolValue { root: (self.root + other.root) % 8, abs_sq: &self.abs_sq * &other.abs_sq }
    }

    pub fn to_complex(&self) -> Complex64 {
        root8(self.root as i64) * self.abs_sq.to_f64().unwrap().sqrt()
    }
}

/// |x|_v^{-1} for nonzero rational x.
fn inverse_abs(x: &Q, place: Place) -> Q {
    match place {
        Place::Real => x.abs().recip(),
        Place::Finite(p) => qpow(&q(p as i64), valuation(x, p) as i32),
    }
}

fn gamma_exponent(c: &Q, place: Place, ladder: &GaussLadder) -> Result<u8> {
    let g = match place {
        Place::Finite(2) => dyadic_weil_index(c, ladder)?,
        _ => weil_index_with(c, place, ladder)?,
    };
    g.exponent().ok_or_else(|| Error::PrecisionFailure(format!("Weil index of {} at {} is not an eighth root of unity", c, place)))
}

/// The local symbol gamma(a)^eps(a) gamma(b)^eps(b) / gamma(ab)^eps(ab) * |C(a,b)|^{-1/2},
/// with gamma read on leading coefficients.
pub fn symbol(a: &LaurentUnit, b: &LaurentUnit, place: Place) -> Result<SymbolValue> {
    symbol_with(a, b, place, &GaussLadder::default())
}

pub fn symbol_with(a: &LaurentUnit, b: &LaurentUnit, place: Place, ladder: &GaussLadder) -> Result<SymbolValue> {
    let ab = a.mul(b);
    let mut root = 0i64;
    for (x, sign) in [(a, 1i64), (b, 1), (&ab, -1)] {
        if epsilon(x) == 1 {
            root += sign * gamma_exponent(&x.leading_coeff, place, ladder)? as i64;
        }
    }
    let c = tame_symbol(a, b);
    Ok(SymbolValue { root: root.rem_euclid(8) as u8, abs_sq: inverse_abs(&c, place) })
}

/// sigma(a,b) sigma(ab,c) = sigma(b,c) sigma(a,bc), compared exactly.
pub fn cocycle_check(a: &LaurentUnit, b: &LaurentUnit, c: &LaurentUnit, place: Place) -> Result<bool> {
    let lhs = symbol(a, b, place)?.mul(&symbol(&a.mul(b), c, place)?);
    let rhs = symbol(b, c, place)?.mul(&symbol(a, &b.mul(c), place)?);
    Ok(lhs == rhs)
}

fn odd_support(x: &Q) -> Result<BTreeSet<u64>> {
    let mut out = BTreeSet::new();
    for n in [x.numer().abs(), x.denom().abs()] {
        let mut n = n.to_u64().ok_or_else(|| Error::InvalidParams(format!("{} is too large to factor", x)))?;
        if n % 2 == 0 {
            return Err(Error::UnsupportedTwoAdic(format!("2 divides {}", x)));
        }
        let mut d = 3;
        while d * d <= n {
            while n % d == 0 {
                out.insert(d);
                n /= d;
            }
            d += 2;
        }
        if n > 1 {
            out.insert(n);
        }
    }
    Ok(out)
}

/// The real place and every odd prime in the support of the leading coefficients and C(a, b).
pub fn required_places(a: &LaurentUnit, b: &LaurentUnit) -> Result<Vec<Place>> {
    let mut needed = BTreeSet::new();
    for x in [&a.leading_coeff, &b.leading_coeff, &tame_symbol(a, b)] {
        needed.extend(odd_support(x)?);
    }
    Ok(std::iter::once(Place::Real).chain(needed.into_iter().map(Place::Finite)).collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductReport {
    /// Local symbols at the requested places, then the dyadic place.
    pub local: Vec<(Place, Complex64)>,
    pub product: Complex64,
}

/// prod_v (a, b)_v over the given places together with the dyadic place.
pub fn product_formula(a: &LaurentUnit, b: &LaurentUnit, places: &[Place]) -> Result<ProductReport> {
    product_formula_with(a, b, places, &GaussLadder::default())
}

pub fn product_formula_with(a: &LaurentUnit, b: &LaurentUnit, places: &[Place], ladder: &GaussLadder) -> Result<ProductReport> {
    let c = tame_symbol(a, b);
    let mut needed = BTreeSet::new();
    for x in [&a.leading_coeff, &b.leading_coeff, &c] {
        needed.extend(odd_support(x)?);
    }
    if places.contains(&Place::Finite(2)) {
        return Err(Error::UnsupportedTwoAdic("the dyadic place is added internally".into()));
    }
    if !places.contains(&Place::Real) {
        return Err(Error::InvalidParams("the real place is required".into()));
    }
    let missing: Vec<String> = needed.iter().filter(|p| !places.contains(&Place::Finite(**p))).map(|p| p.to_string()).collect();
    if !missing.is_empty() {
        return Err(Error::InvalidParams(format!("missing places: {}", missing.join(", "))));
    }
    let mut all: Vec<Place> = places.to_vec();
    all.dedup();
    all.push(Place::Finite(2));
    let mut local = Vec::new();
    let mut product = Complex64::new(1.0, 0.0);
    for place in all {
        let v = symbol_with(a, b, place, ladder)?.to_complex();
        product *= v;
        local.push((place, v));
    }
    Ok(ProductReport { local, product })
}

/// gamma(a) gamma(b) / (gamma(ab) gamma(1)) at an odd prime, which is +-1.
pub fn hilbert_from_weil(a: &Q, b: &Q, p: u64) -> Result<i8> {
    let place = Place::Finite(p);
    let ex = |x: &Q| gamma_exponent(x, place, &GaussLadder::default()).map(|e| e as i64);
    let e = (ex(a)? + ex(b)? - ex(&(a * b))? - ex(&q(1))?).rem_euclid(8);
    match e {
        0 => Ok(1),
        4 => Ok(-1),
        _ => Err(Error::PrecisionFailure(format!("Weil-index quotient is zeta_8^{} at p = {}", e, p))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qf;

    fn lu(s: &str) -> LaurentUnit {
        LaurentUnit::parse(s).unwrap()
    }

    fn legendre(a: i64, p: i64) -> i64 {
        let r = num_bigint::BigInt::from(a.rem_euclid(p)).modpow(&BigInt::from((p - 1) / 2), &BigInt::from(p));
        if r.is_one() {
            1
        } else {
            -1
        }
    }

    /// Classical Hilbert symbol at an odd prime.
    fn hilbert_classical(a: i64, b: i64, p: i64) -> i64 {
        let (mut al, mut u) = (0, a);
        while u % p == 0 {
            u /= p;
            al += 1;
        }
        let (mut be, mut w) = (0, b);
        while w % p == 0 {
            w /= p;
            be += 1;
        }
        let sign = if (al * be * (p - 1) / 2) % 2 == 1 { -1 } else { 1 };
        let lu = if be % 2 == 1 { legendre(u, p) } else { 1 };
        let lw = if al % 2 == 1 { legendre(w, p) } else { 1 };
        sign * lu * lw
    }

    #[test]
    fn parse_forms() {
        assert_eq!(lu("t"), LaurentUnit::t());
        assert_eq!(lu("2*t"), LaurentUnit::monomial(q(2), 1));
        assert_eq!(lu("3*t^-1"), LaurentUnit::monomial(q(3), -1));
        assert_eq!(lu("-3/2*t^2*(1+t-2*t^2)").unit_part, vec![q(1), q(1), q(-2)]);
        assert_eq!(lu("(2+4*t)").leading_coeff, q(2));
        assert_eq!(lu("(2+4*t)").unit_part, vec![q(1), q(2)]);
        assert_eq!(lu("-t").leading_coeff, q(-1));
        for bad in ["", "2*", "t^x", "(1+t", "0", "abc"] {
            assert!(matches!(LaurentUnit::parse(bad), Err(Error::Parse(_))), "{}", bad);
        }
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(epsilon(&lu("t")), 1);
        assert_eq!(epsilon(&lu("5")), 0);
        assert_eq!(epsilon(&lu("3*t^-2")), 0);
        assert_eq!(epsilon(&lu("t^-3")), 1);
    }

    #[test]
    fn tame_examples() {
        assert_eq!(tame_symbol(&lu("3*(1+t)"), &lu("5")), q(1));
        assert_eq!(tame_symbol(&lu("t"), &lu("t")), q(-1));
        let c = tame_symbol(&lu("2*t"), &lu("3*t^-1"));
        assert_eq!(c, qf(-1, 6));
        assert_eq!(c, tame_symbol(&lu("2"), &lu("3*t^-1")) * tame_symbol(&lu("t"), &lu("3*t^-1")));
    }

    #[test]
    fn weil_index_values() {
        assert_eq!(weil_index(&q(1), Place::Real).unwrap(), WeilIndexValue::Root8(1));
        assert_eq!(weil_index(&q(-4), Place::Real).unwrap(), WeilIndexValue::Root8(7));
        assert_eq!(weil_index(&q(1), Place::Finite(3)).unwrap(), WeilIndexValue::Root8(0));
        assert_eq!(weil_index(&q(3), Place::Finite(3)).unwrap(), WeilIndexValue::Root8(2));
        assert_eq!(dyadic_weil_index(&q(1), &GaussLadder::default()).unwrap(), WeilIndexValue::Root8(7));
        assert_eq!(dyadic_weil_index(&q(3), &GaussLadder::default()).unwrap(), WeilIndexValue::Root8(5));
        assert!(matches!(weil_index(&q(1), Place::Finite(2)), Err(Error::UnsupportedTwoAdic(_))));
        // Square classes: a and a p^2 agree.
        assert_eq!(weil_index(&q(5 * 9), Place::Finite(3)).unwrap(), weil_index(&q(5), Place::Finite(3)).unwrap());
    }

    #[test]
    fn weil_index_precision_failure() {
        let tiny = GaussLadder { rungs: vec![2, 4], max_modulus: 100 };
        assert!(matches!(weil_index_with(&q(1), Place::Finite(11), &tiny), Err(Error::PrecisionFailure(_))));
    }

    #[test]
    fn weil_product_over_places_for_scalars() {
        for a in [1i64, 3, 5, -7, 15, 21, -33, 35] {
            let a = q(a);
            let mut e = weil_index(&a, Place::Real).unwrap().exponent().unwrap() as i64;
            e += dyadic_weil_index(&a, &GaussLadder::default()).unwrap().exponent().unwrap() as i64;
            for p in odd_support(&a).unwrap() {
                e += weil_index(&a, Place::Finite(p)).unwrap().exponent().unwrap() as i64;
            }
            assert_eq!(e.rem_euclid(8), 0, "a = {}", a);
        }
    }

    #[test]
    fn symbol_examples() {
        assert_eq!(symbol(&lu("1+t"), &lu("(1-t)"), Place::Finite(3)).unwrap(), SymbolValue { root: 0, abs_sq: q(1) });
        let g = weil_index(&q(1), Place::Finite(3)).unwrap().exponent().unwrap();
        assert_eq!(symbol(&lu("t"), &lu("t"), Place::Finite(3)).unwrap(), SymbolValue { root: (2 * g) % 8, abs_sq: q(1) });
    }

    #[test]
    fn cocycle_small() {
        for place in [Place::Finite(3), Place::Real, Place::Finite(5)] {
            assert!(cocycle_check(&lu("t"), &lu("t"), &lu("t"), place).unwrap());
            assert!(cocycle_check(&lu("3*t"), &lu("5*t^-1"), &lu("7*t^3"), place).unwrap());
        }
    }

    #[test]
    fn product_formula_examples() {
        let places = [Place::Finite(3), Place::Finite(5), Place::Real];
        let r = product_formula(&lu("t"), &lu("t"), &places).unwrap();
        assert!((r.product - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let r = product_formula(&lu("3*t"), &lu("5*t^-1"), &places).unwrap();
        assert!((r.product - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let wide = [Place::Real, Place::Finite(7), Place::Finite(11)];
        let r = product_formula(&lu("7*(1+t)"), &lu("11"), &wide).unwrap();
        assert!((r.product - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(matches!(product_formula(&lu("2*t"), &lu("t"), &places), Err(Error::UnsupportedTwoAdic(_))));
        assert!(matches!(product_formula(&lu("7*t"), &lu("t"), &places), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn hilbert_symbol_matches_classical() {
        for p in [3i64, 5, 7] {
            for a in [1i64, 2, 3, 5, 6, 7, 10, 15, -1, -3] {
                for b in [1i64, 2, 3, 5, 7, -1, 14] {
                    let h = hilbert_from_weil(&q(a), &q(b), p as u64).unwrap() as i64;
                    assert_eq!(h, hilbert_classical(a, b, p), "a={} b={} p={}", a, b, p);
                }
            }
        }
    }

    #[test]
    fn steinberg_cases() {
        for s in ["t", "3*t^-2", "2", "1+t", "(1-t+t^3)", "5/3*t^-1*(1+t)"] {
            let a = lu(s);
            let b = a.one_minus().unwrap();
            assert_eq!(tame_symbol(&a, &b), q(1), "{}", s);
        }
    }
}
