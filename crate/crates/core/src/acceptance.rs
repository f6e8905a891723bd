//! The acceptance suite: fifteen criteria, each a list of named clauses with
//! pinned counts, tolerances and time budgets.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact_arith::{project_x, project_y, residue_form, ModuleVector, SymplecticSpace};
use crate::linalg::{q, Q};
use crate::loop_symplectic::{make_unipotent, LoopMatrix, ParabolicSplit};
use crate::loop_theta::{convergence_study, default_growth_grid, direct_two_depth_sum, loop_theta_ij, vartheta_growth, DepthPolicy, LoopSiegelPoint};
use crate::metaplectic::{cocycle_check, gauss_ladder_values, product_formula, required_places, tame_symbol, weil_index, GaussLadder, LaurentUnit, Place, WeilIndexValue};
use crate::orbit::{compare_orbit_invariants, crossing_tensor, standard_form_tensor, tprime_invariant};
use crate::quaternion::{brandt_matrix, construct_maximal_order, cusp_eigenform, enumerate_ideal_classes, yoshida_lift, SiegelPoint};
use crate::sampling;
use crate::weil_phase::{act_phase_chain, act_phase_oracle, find_nontrivial_character_witness, QuadraticSpace, TensorVector};

pub const PRODUCT_TOL: f64 = 1e-10;
pub const LADDER_TOL: f64 = 1e-12;
pub const CONVERGENCE_SLACK: f64 = 1e-6;
/// Allowance for double rounding when comparing two floating evaluations of the same finite sum.
pub const ROUNDING_SLACK: f64 = 1e-12;
pub const GROWTH_REL_TOL: f64 = 0.15;
pub const GROWTH_LOWER_FACTOR: f64 = 0.5;
pub const GROWTH_BETAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const GROWTH_RHOS: [f64; 3] = [2.0, std::f64::consts::E, 4.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Cut the random sample sizes by ten.
    pub quick: bool,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { seed: 20240611, quick: false }
    }
}

impl AcceptanceConfig {
    fn count(&self, n: usize) -> usize {
        if self.quick {
            (n / 10).max(1)
        } else {
            n
        }
    }

    fn rng(&self, id: u8) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(1000).wrapping_add(id as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub clauses: Vec<Clause>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let failed: Vec<&str> = self.clauses.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        let detail: Vec<String> = self.clauses.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        format!(
            "[{}] {:>2} {} ({:.2} s){} | {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            if failed.is_empty() { String::new() } else { format!(" failing: {}", failed.join(", ")) },
            detail.join("; ")
        )
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

struct Builder {
    clauses: Vec<Clause>,
}

impl Builder {
    fn new() -> Self {
        Builder { clauses: Vec::new() }
    }

    fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.clauses.push(Clause { name: name.into(), pass, detail: detail.into() });
    }

    fn counted(&mut self, name: &str, ok: usize, total: usize) {
        self.check(name, ok == total, format!("{}/{}", ok, total));
    }

    fn error(&mut self, name: &str, e: &Error) {
        self.check(name, false, format!("error {}", e));
    }
}

pub const CRITERIA: [(u8, &str); 15] = [
    (1, "residue form antisymmetry and Lagrangian vanishing"),
    (2, "closed-formula action and phase match the matrix oracle"),
    (3, "fixed-vector law on t^-1 l- ⊗ V"),
    (4, "character witnesses and NoWitness cases"),
    (5, "tame symbol bimultiplicativity and Steinberg relation"),
    (6, "symbol cocycle identity"),
    (7, "product formula over all places"),
    (8, "Weil index ladder stabilization and symmetry"),
    (9, "orbit invariance under O(V)[[t]]"),
    (10, "negligibility dichotomy"),
    (11, "mass formula and Brandt matrices"),
    (12, "Yoshida lift singular vanishing"),
    (13, "loop theta depth-two factorization"),
    (14, "loop theta convergence in q"),
    (15, "vartheta growth exponents"),
];

pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id).ok_or_else(|| Error::InvalidParams(format!("no criterion {}", id)))?.1;
    let start = Instant::now();
    let mut b = Builder::new();
    let budget = match id {
        1 => {
            residue_form_check(cfg, &mut b);
            Some(1.0)
        }
        2 => {
            oracle_equivalence(cfg, &mut b);
            Some(30.0)
        }
        3 => {
            fixed_vector_law(cfg, &mut b);
            None
        }
        4 => {
            witnesses(cfg, &mut b);
            None
        }
        5 => {
            tame_laws(cfg, &mut b);
            None
        }
        6 => {
            cocycles(cfg, &mut b);
            None
        }
        7 => {
            products(cfg, &mut b);
            None
        }
        8 => {
            weil_ladder(cfg, &mut b);
            None
        }
        9 => {
            orbit_invariance(cfg, &mut b);
            None
        }
        10 => {
            negligibility(cfg, &mut b);
            None
        }
        11 => {
            quaternion_arithmetic(&mut b);
            Some(120.0)
        }
        12 => {
            yoshida(&mut b);
            Some(600.0)
        }
        13 => {
            factorization(cfg, &mut b);
            None
        }
        14 => {
            convergence(&mut b);
            None
        }
        _ => {
            growth(&mut b);
            Some(10.0)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = budget {
        b.check("time", seconds < limit, format!("{:.2} s < {} s", seconds, limit));
    }
    let pass = b.clauses.iter().all(|c| c.pass);
    Ok(CriterionResult { id, name: name.into(), pass, clauses: b.clauses, seconds })
}

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run_criterion(c.0, cfg).expect("known id")).collect()
}

fn residue_form_check(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(1);
    let n = cfg.count(1000);
    let (mut anti, mut lag) = (0, 0);
    for _ in 0..n {
        let s = SymplecticSpace::new(rng.gen_range(1..=3));
        let w = sampling::random_module_vector(&mut rng, s, -4, 4);
        let w2 = sampling::random_module_vector(&mut rng, s, -4, 4);
        let f = |a: &ModuleVector, c: &ModuleVector| residue_form(a, c).expect("same space");
        if f(&w, &w2) == -f(&w2, &w) {
            anti += 1;
        }
        let (x, x2, y, y2) = (project_x(&w), project_x(&w2), project_y(&w), project_y(&w2));
        if f(&x, &x2).is_zero() && f(&y, &y2).is_zero() {
            lag += 1;
        }
    }
    b.counted("antisymmetry", anti, n);
    b.counted("lagrangian", lag, n);
}

fn random_u<R: Rng>(rng: &mut R, sp: ParabolicSplit) -> Result<LoopMatrix> {
    let (p, z, m) = sampling::random_u_params(rng, sp, 2);
    let g = [make_unipotent(&p)?, make_unipotent(&z)?, make_unipotent(&m)?];
    let order: [usize; 3] = match rng.gen_range(0..3) {
        0 => [0, 1, 2],
        1 => [2, 0, 1],
        _ => [1, 2, 0],
    };
    LoopMatrix::mul_all(&[&g[order[0]], &g[order[1]], &g[order[2]]])
}

fn random_diagonal<R: Rng>(rng: &mut R, max_dim: usize) -> QuadraticSpace {
    let m = rng.gen_range(1..=max_dim);
    let entries: Vec<i64> = (0..m).map(|_| if rng.gen_bool(0.5) { rng.gen_range(1..=3) } else { -rng.gen_range(1..=3) }).collect();
    QuadraticSpace::diagonal(&entries)
}

fn oracle_equivalence(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(2);
    let n = cfg.count(1000);
    let mut ok = 0;
    let mut first_err = None;
    for _ in 0..n {
        let dim = rng.gen_range(1..=3);
        let s = SymplecticSpace::new(dim);
        let sp = ParabolicSplit::new(s, rng.gen_range(0..=dim));
        let vs = random_diagonal(&mut rng, 4);
        let depth = rng.gen_range(1..=4);
        let r = sampling::random_tensor(&mut rng, s, &vs, depth);
        let res = random_u(&mut rng, sp).and_then(|u| Ok((act_phase_chain(&u, sp, &r)?, act_phase_oracle(&u, &r)?)));
        match res {
            Ok((a, o)) if a == o => ok += 1,
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    b.counted("formula == oracle", ok, n);
    if let Some(e) = first_err {
        b.error("errors", &e);
    }
}

fn fixed_vector_law(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(3);
    let n = cfg.count(500);
    let mut ok = 0;
    for _ in 0..n {
        let dim = rng.gen_range(1..=3);
        let s = SymplecticSpace::new(dim);
        let sp = ParabolicSplit::new(s, rng.gen_range(1..=dim));
        let vs = random_diagonal(&mut rng, 4);
        let r = sampling::random_tensor_on(&mut rng, s, &vs, &sp.minus(), 1);
        let Ok(u) = random_u(&mut rng, sp) else { continue };
        let oracle = act_phase_oracle(&u, &r);
        let chain = act_phase_chain(&u, sp, &r);
        let expect = (r.clone(), Q::zero());
        if oracle.as_ref() == Ok(&expect) && chain.as_ref() == Ok(&expect) {
            ok += 1;
        }
    }
    b.counted("r a_u = r, phase 0", ok, n);
}

fn in_trivial_locus(r: &TensorVector, sp: ParabolicSplit) -> bool {
    let (x, y, z) = r.split_parts(sp);
    x.is_zero() && y.is_zero() && z.depth() <= 1
}

fn witnesses(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(4);
    let n = cfg.count(200);
    let spaces = [QuadraticSpace::diagonal(&[1, 1]), QuadraticSpace::diagonal(&[1, 1, 1])];
    let mut ok = 0;
    let mut tried = 0;
    let mut first_err = None;
    while tried < n {
        let dim = rng.gen_range(1..=3);
        let s = SymplecticSpace::new(dim);
        let sp = ParabolicSplit::new(s, rng.gen_range(0..=dim));
        let vs = &spaces[tried % 2];
        let depth = rng.gen_range(1..=3);
        let r = sampling::random_tensor(&mut rng, s, vs, depth);
        if in_trivial_locus(&r, sp) {
            continue;
        }
        tried += 1;
        match find_nontrivial_character_witness(&r, sp) {
            Ok(rep) if !rep.phase.is_zero() => ok += 1,
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    b.counted("anisotropic witness", ok, n);
    if let Some(e) = first_err {
        b.error("witness errors", &e);
    }

    // Isotropic V-vectors on the hyperbolic plane.
    let h = QuadraticSpace::hyperbolic();
    let mut cases = Vec::new();
    for dim in 1..=2usize {
        let s = SymplecticSpace::new(dim);
        for (idx, k) in [(s.e(1), -1), (s.e(1), -2), (s.f(1), -2)] {
            for v in [[1, 0], [0, 1], [0, 3]] {
                let w = ModuleVector::monomial(s, idx, k, q(1)).expect("in window");
                let r = TensorVector::from_terms(s, h.clone(), &[(w, v.iter().map(|&c| q(c)).collect())]).expect("X-supported");
                cases.push((r, ParabolicSplit::new(s, 1)));
            }
        }
    }
    let none = cases.iter().filter(|(r, sp)| matches!(find_nontrivial_character_witness(r, *sp), Err(Error::NoWitness(_)))).count();
    b.counted("hyperbolic NoWitness", none, cases.len());
}

fn tame_laws(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(5);
    let n = cfg.count(500);
    let mut bi = 0;
    for _ in 0..n {
        let a1 = sampling::random_laurent_unit(&mut rng, false);
        let a2 = sampling::random_laurent_unit(&mut rng, false);
        let c = sampling::random_laurent_unit(&mut rng, false);
        let left = tame_symbol(&a1.mul(&a2), &c) == tame_symbol(&a1, &c) * tame_symbol(&a2, &c);
        let right = tame_symbol(&c, &a1.mul(&a2)) == tame_symbol(&c, &a1) * tame_symbol(&c, &a2);
        if left && right {
            bi += 1;
        }
    }
    b.counted("bimultiplicativity", bi, n);
    let mut st = 0;
    let mut found = 0;
    while found < n {
        let mut a = sampling::random_laurent_unit(&mut rng, false);
        if rng.gen_bool(0.3) {
            a = LaurentUnit::new(0, q(1), a.unit_part.clone()).expect("unit");
        }
        let Some(b1) = a.one_minus() else { continue };
        found += 1;
        if tame_symbol(&a, &b1) == q(1) {
            st += 1;
        }
    }
    b.counted("steinberg", st, n);
}

fn random_place<R: Rng>(rng: &mut R) -> Place {
    [Place::Real, Place::Finite(3), Place::Finite(5), Place::Finite(7), Place::Finite(11)][rng.gen_range(0..5)]
}

fn cocycles(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(6);
    let n = cfg.count(200);
    let mut ok = 0;
    let mut first_err = None;
    for _ in 0..n {
        let [x, y, z] = [0; 3].map(|_| sampling::random_laurent_unit(&mut rng, false));
        match cocycle_check(&x, &y, &z, random_place(&mut rng)) {
            Ok(true) => ok += 1,
            Ok(false) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    b.counted("cocycle", ok, n);
    if let Some(e) = first_err {
        b.error("cocycle errors", &e);
    }
}

fn products(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(7);
    let n = cfg.count(100);
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let x = sampling::random_laurent_unit(&mut rng, true);
        let y = sampling::random_laurent_unit(&mut rng, true);
        let res = required_places(&x, &y).and_then(|pl| product_formula(&x, &y, &pl));
        if let Ok(rep) = res {
            let dev = (rep.product - Complex64::new(1.0, 0.0)).norm();
            worst = worst.max(dev);
            if dev <= PRODUCT_TOL {
                ok += 1;
            }
        }
    }
    b.check("product = 1", ok == n, format!("{}/{}, worst {:.1e} (tol {:.0e})", ok, n, worst, PRODUCT_TOL));
}

fn weil_ladder(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(8);
    let per = cfg.count(50);
    let ladder = GaussLadder::default();
    for p in [3u64, 5, 7, 11] {
        let (mut stable, mut unit, mut sym) = (0, 0, 0);
        for _ in 0..per {
            let a = sampling::random_rational(&mut rng, 60);
            let Ok(vals) = gauss_ladder_values(&a, p, &ladder) else { continue };
            if vals.windows(2).all(|w| (w[0].1 - w[1].1).norm() <= LADDER_TOL) {
                stable += 1;
            }
            let g = weil_index(&a, Place::Finite(p));
            let gm = weil_index(&-&a, Place::Finite(p));
            if let (Ok(g), Ok(gm)) = (g, gm) {
                let gc = g.to_complex();
                if matches!(g, WeilIndexValue::Root8(_)) && ((gc.norm() - 1.0).abs() <= LADDER_TOL) && (gc - vals.last().unwrap().1).norm() <= LADDER_TOL {
                    unit += 1;
                }
                if (gc * gm.to_complex() - 1.0).norm() <= LADDER_TOL {
                    sym += 1;
                }
            }
        }
        b.counted(&format!("p={} stable", p), stable, per);
        b.counted(&format!("p={} |gamma|=1", p), unit, per);
        b.counted(&format!("p={} gamma(a)gamma(-a)=1", p), sym, per);
    }
}

fn orbit_invariance(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(9);
    let n = cfg.count(500);
    let (mut ok, mut modules, mut tensors) = (0, 0, 0);
    for _ in 0..n {
        let s = SymplecticSpace::new(rng.gen_range(1..=2));
        let vs = random_diagonal(&mut rng, 3);
        let depth = rng.gen_range(1..=3);
        let r = sampling::random_tensor(&mut rng, s, &vs, depth);
        let h = sampling::random_orthogonal_series(&mut rng, &vs, 3);
        let rh = r.act_v(&h).expect("power series").project_x();
        match compare_orbit_invariants(&r, &rh) {
            Ok(()) => ok += 1,
            Err(Error::ModulesDiffer) => modules += 1,
            Err(_) => tensors += 1,
        }
    }
    b.check("invariants equal", ok == n, format!("{}/{} ({} module, {} tensor mismatches)", ok, n, modules, tensors));
}

fn negligibility(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(10);
    let n = cfg.count(50);
    let mut zero = 0;
    let mut built = 0;
    while built < n {
        let dim = rng.gen_range(2..=3usize);
        let s = SymplecticSpace::new(dim);
        let a = rng.gen_range(0..=dim);
        let sigma = rng.gen_range(0..=a);
        let tau = rng.gen_range(0..=a - sigma);
        let rho = rng.gen_range(0..=dim - a);
        let mut exps = Vec::new();
        for len in [sigma, tau, rho] {
            let mut g: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=3)).collect();
            g.sort_unstable_by(|x, y| y.cmp(x));
            exps.extend(g);
        }
        let vs = random_diagonal(&mut rng, 3);
        let vecs: Vec<Vec<Q>> = (0..exps.len()).map(|_| sampling::random_nonzero_vec(&mut rng, vs.m)).collect();
        let Ok(r) = standard_form_tensor(ParabolicSplit::new(s, a), &vs, sigma, tau, rho, &exps, &vecs) else { continue };
        built += 1;
        if tprime_invariant(&r).is_zero() {
            zero += 1;
        }
    }
    b.counted("standard form T' = 0", zero, n);
    let mut nonzero = 0;
    let mut built = 0;
    while built < n {
        let s = SymplecticSpace::new(rng.gen_range(1..=3));
        let vs = random_diagonal(&mut rng, 3);
        if vs.m < 2 {
            continue;
        }
        let v1 = sampling::random_nonzero_vec(&mut rng, vs.m);
        let v2 = sampling::random_nonzero_vec(&mut rng, vs.m);
        if crate::linalg::rank(&vec![v1.clone(), v2.clone()]) < 2 {
            continue;
        }
        let i = rng.gen_range(1..=s.n);
        let r = crossing_tensor(s, &vs, i, rng.gen_range(1..=3), rng.gen_range(1..=3), &v1, &v2).expect("in window");
        built += 1;
        if !tprime_invariant(&r).is_zero() {
            nonzero += 1;
        }
    }
    b.counted("crossing T' != 0", nonzero, n);
}

fn quaternion_arithmetic(b: &mut Builder) {
    for p in [3u64, 7, 11, 19, 23] {
        match construct_maximal_order(p).and_then(|(alg, r)| enumerate_ideal_classes(&alg, &r)) {
            Ok(c) => {
                let expect = Q::new(((p - 1) as i64).into(), 24.into());
                b.check(&format!("mass p={}", p), c.mass() == expect, format!("h = {}, mass {} vs {}", c.class_number(), c.mass(), expect));
            }
            Err(e) => b.error(&format!("mass p={}", p), &e),
        }
    }
    let classes = match construct_maximal_order(11).and_then(|(alg, r)| enumerate_ideal_classes(&alg, &r)) {
        Ok(c) => c,
        Err(e) => return b.error("p=11 classes", &e),
    };
    let ls = [2u64, 3, 5, 7, 13];
    let family: Result<Vec<_>> = ls.iter().map(|&l| brandt_matrix(l, &classes)).collect();
    let family = match family {
        Ok(f) => f,
        Err(e) => return b.error("brandt", &e),
    };
    let rows = family.iter().filter(|m| m.row_sums().iter().all(|&s| s == m.l as i64 + 1)).count();
    b.counted("row sums l+1", rows, family.len());
    let mut pairs = 0;
    let mut commuting = 0;
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            pairs += 1;
            if family[i].commutes_with(&family[j]) {
                commuting += 1;
            }
        }
    }
    b.counted("commutativity", commuting, pairs);
}

fn flagship() -> Result<(crate::quaternion::IdealClassData, Vec<Q>)> {
    let (alg, r) = construct_maximal_order(11)?;
    let classes = enumerate_ideal_classes(&alg, &r)?;
    let f = cusp_eigenform(&classes)?;
    Ok((classes, f))
}

fn yoshida(b: &mut Builder) {
    let (classes, f) = match flagship() {
        Ok(x) => x,
        Err(e) => return b.error("setup", &e),
    };
    let lift = match yoshida_lift(&f, &classes, 20) {
        Ok(l) => l,
        Err(e) => return b.error("lift", &e),
    };
    let singular = lift.singular_keys();
    let bad = singular.iter().filter(|k| !lift.coeff(**k).is_zero()).count();
    b.check("singular coefficients zero", bad == 0, format!("{} singular triples, {} nonzero", singular.len(), bad));
    let definite = lift.definite_keys();
    let witness = definite.iter().find(|k| !lift.coeff(**k).is_zero());
    b.check(
        "definite coefficient nonzero",
        witness.is_some(),
        match witness {
            Some(k) => format!("A{:?} = {}", k, lift.coeff(*k)),
            None => "all vanish".into(),
        },
    );
}

fn factorization(cfg: &AcceptanceConfig, b: &mut Builder) {
    let mut rng = cfg.rng(13);
    let n = 20;
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    let mut built = Vec::new();
    for p in [3u64, 7, 11] {
        match construct_maximal_order(p).and_then(|(alg, r)| enumerate_ideal_classes(&alg, &r)) {
            Ok(c) => built.push(c),
            Err(e) => return b.error("classes", &e),
        }
    }
    for _ in 0..n {
        let c = &built[rng.gen_range(0..built.len())];
        let (i, j) = (rng.gen_range(0..c.class_number()), rng.gen_range(0..c.class_number()));
        let z = sampling::random_siegel_point(&mut rng, 0.6);
        let qv = rng.gen_range(1.5..4.0);
        let bound = rng.gen_range(1..=2);
        let res = LoopSiegelPoint::new(z, qv, DepthPolicy::Fixed(2))
            .and_then(|pt| Ok((loop_theta_ij(c.lattice(i, j), &pt, bound)?, direct_two_depth_sum(c.lattice(i, j), &z, qv, bound)?)));
        match res {
            Ok((v, d)) => {
                let gap = (v.value - d).norm();
                let allowed = v.tail_bound + ROUNDING_SLACK * d.norm().max(1.0);
                worst = worst.max(gap / allowed);
                if gap <= allowed {
                    ok += 1;
                }
            }
            Err(e) => return b.error("evaluation", &e),
        }
    }
    b.check("direct == product", ok == n, format!("{}/{}, worst gap/allowance {:.2e}", ok, n, worst));
}

pub const CONVERGENCE_Q: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
pub const CONVERGENCE_TRACE_BOUND: i64 = 12;

fn convergence(b: &mut Builder) {
    let (classes, f) = match flagship() {
        Ok(x) => x,
        Err(e) => return b.error("setup", &e),
    };
    let study = match convergence_study(&f, &classes, &SiegelPoint::i_identity(), &CONVERGENCE_Q, CONVERGENCE_TRACE_BOUND, DepthPolicy::TailTarget(1e-60)) {
        Ok(s) => s,
        Err(e) => return b.error("study", &e),
    };
    let diffs: Vec<String> = study.rows.iter().map(|r| format!("{:.2e}", r.diff)).collect();
    b.check("strictly decreasing", study.strictly_decreasing(), diffs.join(" > "));
    let last = study.rows.last().expect("four rows");
    b.check("final within tail", last.diff <= last.tail + CONVERGENCE_SLACK, format!("{:.2e} <= {:.2e} + {:.0e}", last.diff, last.tail, CONVERGENCE_SLACK));
    let nonzero = study.rows.iter().filter(|r| r.q >= 4.0).all(|r| r.value.norm() > r.tail);
    let vals: Vec<String> = study.rows.iter().filter(|r| r.q >= 4.0).map(|r| format!("{:.4e}", r.value.re)).collect();
    b.check("nonvanishing for q >= 4", nonzero, vals.join(", "));
}

fn growth(b: &mut Builder) {
    let grid = default_growth_grid();
    let mut worst_rel: f64 = 0.0;
    let mut worst_lower = f64::INFINITY;
    let mut rows = Vec::new();
    let mut failed = None;
    for beta in GROWTH_BETAS {
        for rho in GROWTH_RHOS {
            match vartheta_growth(beta, rho, &grid) {
                Ok(fit) => {
                    let rel = (fit.slope - fit.stated_rate).abs() / fit.stated_rate;
                    worst_rel = worst_rel.max(rel);
                    worst_lower = worst_lower.min(fit.slope / fit.stated_rate);
                    rows.push(format!("({}, {:.3}): {:.3}/{:.3}", beta, rho, fit.slope, fit.stated_rate));
                }
                Err(e) => failed = Some(e),
            }
        }
    }
    if let Some(e) = failed {
        return b.error("fit", &e);
    }
    b.check(
        "within 15% of beta/log rho",
        worst_rel <= GROWTH_REL_TOL,
        format!("worst relative gap {:.3} [{}]", worst_rel, rows.join(", ")),
    );
    b.check(
        "at least 0.5 beta/log rho",
        worst_lower >= GROWTH_LOWER_FACTOR,
        format!("smallest slope ratio {:.3}", worst_lower),
    );
}

/// Fitted slope against the closed-form log(1 + beta)/log rho, as a relative gap.
pub fn growth_gap_to_log1p_rate(beta: f64, rho: f64) -> Result<f64> {
    let fit = vartheta_growth(beta, rho, &default_growth_grid())?;
    let rate = beta.ln_1p() / rho.ln();
    Ok(((fit.slope - rate) / rate).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_subset_runs() {
        let cfg = AcceptanceConfig { quick: true, ..Default::default() };
        for id in [1u8, 5, 10] {
            let r = run_criterion(id, &cfg).unwrap();
            assert!(r.pass, "{}", r.line());
        }
        assert!(run_criterion(16, &cfg).is_err());
    }
}
