use std::fs;
use std::path::Path;

use looptheta::acceptance::{run_all, AcceptanceConfig};
use looptheta::error::{Error, Result};
use looptheta::exact_arith::SymplecticSpace;
use looptheta::linalg::Q;
use looptheta::loop_symplectic::{make_unipotent, LoopMatrix, ParabolicSplit};
use looptheta::loop_theta::{convergence_study, log_grid, vartheta_growth, DepthPolicy};
use looptheta::metaplectic::{product_formula_with, symbol_with, tame_symbol, weil_index_with, LaurentUnit, Place, WeilIndexValue};
use looptheta::orbit::{compare_orbit_invariants, orbit_report};
use looptheta::quaternion::{
    brandt_matrix, construct_maximal_order, cusp_eigenform, eigenforms, enumerate_ideal_classes, hecke_eigenvalues, theta_series_pair, yoshida_lift,
    IdealClassData, SiegelPoint,
};
use looptheta::sampling;
use looptheta::weil_phase::{act_phase_chain, act_phase_oracle, find_nontrivial_character_witness, QuadraticSpace};
use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{BrandtArgs, EstimateArgs, LoopThetaArgs, OrbitArgs, PhaseArgs, ReproduceArgs, SymbolOp, ThetaArgs};

fn io(e: std::io::Error) -> Error {
    Error::InvalidParams(format!("io: {}", e))
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir).map_err(io)?;
    Ok(&cfg.output_dir)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Write `name`.json into the output directory and echo it on stdout.
fn emit(cfg: &RunConfig, name: &str, v: &Value) -> Result<()> {
    let text = to_json(v);
    fs::write(out_dir(cfg)?.join(format!("{}.json", name)), &text).map_err(io)?;
    print!("{}", text);
    Ok(())
}

fn write_csv(cfg: &RunConfig, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let path = out_dir(cfg)?.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::InvalidParams(format!("csv: {}", e)))?;
    w.write_record(header).map_err(|e| Error::InvalidParams(format!("csv: {}", e)))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::InvalidParams(format!("csv: {}", e)))?;
    }
    w.flush().map_err(io)
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn parse_rational(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| Error::Parse(format!("bad rational {:?}", s)))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|x| x.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {} {:?}", what, x)))).collect()
}

fn parse_places(s: &str) -> Result<Vec<Place>> {
    s.split(',').map(Place::parse).collect()
}

fn parse_diagonal(s: &str) -> Result<QuadraticSpace> {
    let d: Vec<i64> = parse_list(s, "diagonal entry")?;
    if d.is_empty() || d.contains(&0) {
        return Err(Error::Parse(format!("diagonal {:?} must be nonzero entries", s)));
    }
    Ok(QuadraticSpace::diagonal(&d))
}

fn weil_json(v: WeilIndexValue) -> Value {
    let z = v.to_complex();
    match v {
        WeilIndexValue::Root8(k) => json!({"root8": k, "re": z.re, "im": z.im}),
        WeilIndexValue::Approx { error, .. } => json!({"root8": null, "re": z.re, "im": z.im, "error": error}),
    }
}

pub fn symbols(cfg: &RunConfig, op: &SymbolOp) -> Result<u8> {
    let ladder = cfg.ladder();
    let v = match op {
        SymbolOp::Tame { a, b } => {
            let (ua, ub) = (LaurentUnit::parse(a)?, LaurentUnit::parse(b)?);
            json!({"op": "tame", "a": ua.to_string(), "b": ub.to_string(), "value": tame_symbol(&ua, &ub).to_string()})
        }
        SymbolOp::Weil { a, place } => {
            let x = parse_rational(a)?;
            let pl = Place::parse(place)?;
            json!({"op": "weil", "a": x.to_string(), "place": pl.to_string(), "value": weil_json(weil_index_with(&x, pl, &ladder)?)})
        }
        SymbolOp::Symbol { a, b, place } => {
            let (ua, ub) = (LaurentUnit::parse(a)?, LaurentUnit::parse(b)?);
            let pl = Place::parse(place)?;
            let s = symbol_with(&ua, &ub, pl, &ladder)?;
            json!({"op": "symbol", "a": ua.to_string(), "b": ub.to_string(), "place": pl.to_string(),
                   "root8": s.root, "abs_sq": s.abs_sq.to_string(), "value": complex(s.to_complex())})
        }
        SymbolOp::Product { a, b, places } => {
            let (ua, ub) = (LaurentUnit::parse(a)?, LaurentUnit::parse(b)?);
            let pl = parse_places(places)?;
            let rep = product_formula_with(&ua, &ub, &pl, &ladder)?;
            let local: Vec<Value> = rep.local.iter().map(|(p, z)| json!({"place": p.to_string(), "re": z.re, "im": z.im})).collect();
            json!({"op": "product", "a": ua.to_string(), "b": ub.to_string(), "local": local,
                   "product": complex(rep.product), "deviation": (rep.product - 1.0).norm()})
        }
    };
    print!("{}", to_json(&v));
    Ok(0)
}

pub fn phase(cfg: &RunConfig, args: &PhaseArgs) -> Result<u8> {
    if args.n == 0 || args.a > args.n || args.tensor_depth <= 0 {
        return Err(Error::InvalidParams("need n >= 1, 0 <= a <= n and a positive tensor depth".into()));
    }
    let vs = parse_diagonal(&args.v)?;
    let s = SymplecticSpace::new(args.n);
    let sp = ParabolicSplit::new(s, args.a);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut agree = 0;
    let mut phases = Vec::new();
    let mut witness = Value::Null;
    for k in 0..args.samples {
        let r = sampling::random_tensor(&mut rng, s, &vs, args.tensor_depth);
        let (p, z, m) = sampling::random_u_params(&mut rng, sp, 2);
        let u = LoopMatrix::mul_all(&[&make_unipotent(&p)?, &make_unipotent(&z)?, &make_unipotent(&m)?])?;
        let chain = act_phase_chain(&u, sp, &r)?;
        let oracle = act_phase_oracle(&u, &r)?;
        if chain == oracle {
            agree += 1;
        }
        phases.push(oracle.1.to_string());
        if k == 0 {
            witness = match find_nontrivial_character_witness(&r, sp) {
                Ok(w) => json!({"family": format!("{:?}", w.family), "depth": w.depth, "phase": w.phase.to_string()}),
                Err(e) => json!({"error": e.name()}),
            };
        }
    }
    emit(cfg, "phase", &json!({"n": args.n, "a": args.a, "v": args.v, "seed": cfg.seed, "samples": args.samples,
        "agree": agree, "phases": phases, "witness": witness}))?;
    Ok(0)
}

pub fn orbits(cfg: &RunConfig, args: &OrbitArgs) -> Result<u8> {
    if args.n == 0 {
        return Err(Error::InvalidParams("n must be positive".into()));
    }
    let vs = parse_diagonal(&args.v)?;
    let s = SymplecticSpace::new(args.n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pass = 0;
    let mut failures = Vec::new();
    let mut reports = Vec::new();
    for k in 0..args.random {
        let depth = 1 + (k % 3) as i32;
        let r = sampling::random_tensor(&mut rng, s, &vs, depth);
        let h = sampling::random_orthogonal_series(&mut rng, &vs, 3);
        let rh = r.act_v(&h)?.project_x();
        match compare_orbit_invariants(&r, &rh) {
            Ok(()) => pass += 1,
            Err(e) => failures.push(json!({"sample": k, "error": e.name()})),
        }
        if k < 5 {
            reports.push(serde_json::to_value(orbit_report(&r)).expect("serializable"));
        }
    }
    emit(cfg, "orbits", &json!({"samples": args.random, "seed": cfg.seed, "pass": pass, "failures": failures, "reports": reports}))?;
    Ok(0)
}

fn classes_at(p: u64) -> Result<IdealClassData> {
    let (alg, r) = construct_maximal_order(p)?;
    enumerate_ideal_classes(&alg, &r)
}

fn strings(v: &[Q]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

pub fn brandt(cfg: &RunConfig, args: &BrandtArgs) -> Result<u8> {
    let p = args.p.unwrap_or(cfg.p);
    let primes: Vec<u64> = parse_list(&args.primes, "prime")?;
    let classes = classes_at(p)?;
    let family: Vec<_> = primes.iter().map(|&l| brandt_matrix(l, &classes)).collect::<Result<_>>()?;
    let matrices: Vec<Value> = family
        .iter()
        .map(|b| {
            let sums = b.row_sums();
            json!({"l": b.l, "entries": b.entries, "row_sums": sums, "row_sum_check": sums.iter().all(|&s| s == b.l as i64 + 1),
                   "weighted_symmetric": b.is_weighted_symmetric(&classes.weights)})
        })
        .collect();
    let commute = family.iter().all(|a| family.iter().all(|b| a.commutes_with(b)));
    let forms = match eigenforms(&family, &classes.weights) {
        Ok(fs) => json!(fs
            .iter()
            .map(|f| {
                let ev: serde_json::Map<String, Value> = hecke_eigenvalues(&family, f).into_iter().map(|(l, x)| (l.to_string(), json!(x.to_string()))).collect();
                json!({"coords": strings(f), "eigenvalues": ev})
            })
            .collect::<Vec<_>>()),
        Err(e) => json!({"error": e.name()}),
    };
    let expected = Q::new(((p - 1) as i64).into(), 24.into());
    emit(cfg, "brandt", &json!({"p": p, "class_number": classes.class_number(), "weights": classes.weights,
        "ideal_norms": strings(&classes.ideal_norms), "mass": classes.mass().to_string(), "mass_check": classes.mass() == expected,
        "matrices": matrices, "commute": commute, "eigenforms": forms}))?;
    Ok(0)
}

pub fn theta(cfg: &RunConfig, args: &ThetaArgs) -> Result<u8> {
    let p = args.p.unwrap_or(cfg.p);
    let bound = args.trace_bound.unwrap_or(cfg.trace_bound);
    let classes = classes_at(p)?;
    let h = classes.class_number();
    if args.i >= h || args.j >= h {
        return Err(Error::InvalidParams(format!("class indices must be below {}", h)));
    }
    let t = theta_series_pair(classes.lattice(args.i, args.j), bound)?;
    let rows: Vec<Vec<String>> = t.csv_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    write_csv(cfg, "theta.csv", &["A", "twoB", "C", "count"], &rows)?;
    let mut summary = json!({"p": p, "i": args.i, "j": args.j, "trace_bound": bound, "entries": rows.len(),
        "swap_symmetric": t.is_swap_symmetric(), "tail_constant": t.tail_constant});
    if args.lift {
        let f = cusp_eigenform(&classes)?;
        let lift = yoshida_lift(&f, &classes, cfg.lift_bound)?;
        let rows: Vec<Vec<String>> =
            lift.coeffs.iter().map(|(&(a, b, c), x)| vec![a.to_string(), b.to_string(), c.to_string(), x.to_string()]).collect();
        write_csv(cfg, "lift.csv", &["A", "twoB", "C", "coeff"], &rows)?;
        let singular = lift.singular_keys();
        let nonzero_singular = singular.iter().filter(|k| !lift.coeff(**k).is_zero()).count();
        let nonzero_definite = lift.definite_keys().iter().filter(|k| !lift.coeff(**k).is_zero()).count();
        summary["lift"] = json!({"form": strings(&f), "trace_bound": cfg.lift_bound, "singular": singular.len(),
            "singular_nonzero": nonzero_singular, "definite_nonzero": nonzero_definite});
    }
    emit(cfg, "theta", &summary)?;
    Ok(0)
}

pub fn loop_theta(cfg: &RunConfig, args: &LoopThetaArgs) -> Result<u8> {
    let p = args.p.unwrap_or(cfg.p);
    let q_list: Vec<f64> = match &args.q_list {
        Some(s) => parse_list(s, "q")?,
        None => cfg.q_list.clone(),
    };
    let policy = match (args.depth, args.tail_eps) {
        (Some(n), _) => DepthPolicy::Fixed(n),
        (None, Some(e)) => DepthPolicy::TailTarget(e),
        (None, None) => DepthPolicy::TailTarget(1e-30),
    };
    let z0 = SiegelPoint::parse(&args.z0)?;
    let bound = args.trace_bound.unwrap_or(cfg.trace_bound);
    let classes = classes_at(p)?;
    let f = cusp_eigenform(&classes)?;
    let study = convergence_study(&f, &classes, &z0, &q_list, bound, policy)?;
    let rows: Vec<Vec<String>> =
        study.rows.iter().map(|r| vec![r.q.to_string(), format!("{:e}", r.value.re), format!("{:e}", r.value.im), format!("{:e}", r.diff), format!("{:e}", r.tail)]).collect();
    write_csv(cfg, "loop_theta.csv", &["q", "re", "im", "diff", "tail"], &rows)?;
    let json_rows: Vec<Value> = study.rows.iter().map(|r| json!({"q": r.q, "re": r.value.re, "im": r.value.im, "diff": r.diff, "tail": r.tail})).collect();
    emit(cfg, "loop_theta", &json!({"p": p, "form": strings(&f), "z0": args.z0, "trace_bound": bound,
        "policy": serde_json::to_value(policy).expect("serializable"),
        "reference": {"re": study.reference.re, "im": study.reference.im, "tail": study.reference_tail},
        "rows": json_rows, "strictly_decreasing": study.strictly_decreasing()}))?;
    Ok(0)
}

pub fn estimate(cfg: &RunConfig, args: &EstimateArgs) -> Result<u8> {
    if !(args.x_min > 0.0 && args.x_min < args.x_max && args.x_max < 1.0) || args.points < 2 {
        return Err(Error::InvalidParams("need 0 < x_min < x_max < 1 and at least two points".into()));
    }
    let fit = vartheta_growth(args.beta, args.rho, &log_grid(args.x_min, args.x_max, args.points))?;
    emit(cfg, "estimate", &json!({"beta": fit.beta, "rho": fit.rho, "slope": fit.slope, "residual": fit.residual,
        "stated_rate": fit.stated_rate, "log1p_rate": args.beta.ln_1p() / args.rho.ln()}))?;
    Ok(0)
}

pub fn reproduce(cfg: &RunConfig, args: &ReproduceArgs) -> Result<u8> {
    let acfg = AcceptanceConfig { seed: cfg.seed, quick: args.quick };
    let results = run_all(&acfg);
    for r in &results {
        eprintln!("{}", r.line());
    }
    let criteria: Vec<Value> = results
        .iter()
        .map(|r| {
            // Wall-clock readings go to timings.json so the manifest stays reproducible.
            let clauses: Vec<Value> = r
                .clauses
                .iter()
                .map(|c| json!({"name": c.name, "pass": c.pass, "detail": if c.name == "time" { "within budget".to_string() } else { c.detail.clone() }}))
                .collect();
            json!({"id": r.id, "name": r.name, "pass": r.pass, "clauses": clauses})
        })
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    let timings: Vec<Value> = results.iter().map(|r| json!({"id": r.id, "seconds": r.seconds})).collect();
    fs::write(out_dir(cfg)?.join("timings.json"), to_json(&json!(timings))).map_err(io)?;
    emit(cfg, "manifest", &json!({"quick": args.quick, "seed": cfg.seed, "passed": passed, "total": results.len(), "criteria": criteria}))?;
    Ok(if passed == results.len() { 0 } else { 1 })
}
