//! Acceptance checks, one line per criterion. Exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{below, gf, random_graph, small_rational, smallest_field};
use qcap_core::codes::{
    construct_fano, construct_feasibility, construct_intersection, construct_mds_uniform, construct_wheel_component,
    entropy_oracle_all, fano_matrices, intersection_fig5_fixture, intersection_field_bound, rate, verify_code,
    verify_decoding, verify_security, w4_fixture, DEFAULT_ORACLE_LIMIT,
};
use qcap_core::composer::{
    mds_nonuniform_plan, plan_rate, small_graph_plan, validate_plan, wheel_capacity_formula, wheel_plan,
    AchievabilityPlan, PlanJson,
};
use qcap_core::graph::families::binomial;
use qcap_core::graph::maximal::witness_is_valid;
use qcap_core::graph::{
    capacity_small, capacity_upper_bound, fano_graph, intersection_bound, intersection_graph, is_feasible,
    is_strongly_maximal, mds_graph, ones, wheel_bound_search, wheel_graph, NodeId,
};
use qcap_core::quantum::verify_quantum_recovery;
use qcap_core::{BoundCertificate, CodeError, Rational, SecureCode, StorageGraph};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn mds_cases() -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for n in 2..=8 {
        for k in 2..=n {
            if 2 * k > n {
                v.push((n, k));
            }
        }
    }
    v
}

fn mds() -> Check {
    let cases = mds_cases();
    for &(n, k) in &cases {
        let f = smallest_field(n);
        let g = mds_graph(n, k, &ones(n)).map_err(|e| e.to_string())?;
        let code = construct_mds_uniform(n, k, &f).map_err(|e| e.to_string())?;
        let rep = verify_code(&code, &g).map_err(|e| e.to_string())?;
        let want = Rational::int(2 * k as i64 - n as i64);
        ensure(rep.pass, || format!("M_{{{n},{k}}} over F{} fails verification", f.q()))?;
        ensure(rate(&code) == want, || format!("M_{{{n},{k}}} rate {}", rate(&code)))?;
        if n <= 4 {
            let up = capacity_upper_bound(&g).value;
            let exact = capacity_small(&g).map_err(|e| e.to_string())?.value;
            ensure(up == want && exact == want, || format!("M_{{{n},{k}}} bound {up}, exact {exact}"))?;
        }
    }
    Ok(format!("{} (N,K) pairs", cases.len()))
}

fn mds_nonuniform() -> Check {
    let lam: Vec<Rational> = [1, 2, 3, 4].map(Rational::int).to_vec();
    let p = mds_nonuniform_plan(&lam, 4, 3, &gf(5)).map_err(|e| e.to_string())?;
    validate_plan(&p).map_err(|e| e.to_string())?;
    ensure(plan_rate(&p) == Rational::int(3), || format!("rate {}", plan_rate(&p)))?;
    Ok("rate 3".into())
}

fn w4() -> Check {
    let f = gf(5);
    let mut count = 0;
    for l1 in [r(1, 2), r(1, 1), r(3, 2), r(2, 1), r(3, 1), r(5, 1)] {
        for l2 in [Rational::int(1), Rational::int(2)] {
            let lam = vec![l1, l2, l2, l2];
            let p = wheel_plan(&lam, 4, &f).map_err(|e| e.to_string())?;
            validate_plan(&p).map_err(|e| e.to_string())?;
            let want = l1.min(l2).min((l1 + l2) / 3);
            let exact = capacity_small(&p.graph).map_err(|e| e.to_string())?.value;
            ensure(plan_rate(&p) == want && exact == want, || {
                format!("λ={lam:?}: plan {}, exact {exact}, formula {want}", plan_rate(&p))
            })?;
            count += 1;
        }
    }
    let p = wheel_plan(&ones(4), 4, &f).map_err(|e| e.to_string())?;
    ensure(plan_rate(&p) == r(2, 3), || format!("uniform W4 rate {}", plan_rate(&p)))?;
    Ok(format!("{count} size profiles, uniform 2/3"))
}

fn wheels() -> Check {
    for n in 4..=8usize {
        let g = wheel_graph(&ones(n)).map_err(|e| e.to_string())?;
        let p = wheel_plan(&ones(n), n, &gf(8)).map_err(|e| e.to_string())?;
        validate_plan(&p).map_err(|e| e.to_string())?;
        let want = r(n as i64 - 2, 2 * n as i64 - 5);
        ensure(plan_rate(&p) == want, || format!("W_{n} plan rate {}", plan_rate(&p)))?;
        let bound = wheel_bound_search(&g, 8).map_err(|e| e.to_string())?.ok_or("no wheel bound")?;
        ensure(bound.value == want, || format!("W_{n} wheel bound {}", bound.value))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let lam: Vec<Rational> = (0..5).map(|_| small_rational(&mut rng)).collect();
        let p = wheel_plan(&lam, 5, &gf(5)).map_err(|e| e.to_string())?;
        validate_plan(&p).map_err(|e| e.to_string())?;
        let mut s = lam[1..].to_vec();
        s.sort();
        let (l1, l2, l3) = (lam[0], s[0], s[1]);
        let want = l1.min(l2).min((l1 + l2) / 3).min((l1 + l2 + l3) / 5);
        ensure(plan_rate(&p) == want && wheel_capacity_formula(l1, &s) == want, || {
            format!("W5 λ={lam:?}: plan {}, formula {want}", plan_rate(&p))
        })?;
    }
    Ok("W4..W8 uniform, 5 sampled W5".into())
}

fn failing_edges(code: &SecureCode, g: &StorageGraph) -> Result<(Vec<Vec<NodeId>>, Vec<Vec<NodeId>>), String> {
    let mut dec = Vec::new();
    let mut sec = Vec::new();
    for e in g.decoding_sets() {
        if !verify_decoding(code, g, e).map_err(|e| e.to_string())?.0 {
            dec.push(e.clone());
        }
        if !verify_security(code, g, e).map_err(|e| e.to_string())?.0 {
            sec.push(e.clone());
        }
    }
    Ok((dec, sec))
}

fn fano() -> Check {
    let g = fano_graph(&ones(7)).map_err(|e| e.to_string())?;
    for q in [2, 4] {
        let code = construct_fano(&gf(q)).map_err(|e| e.to_string())?;
        let (dec, sec) = failing_edges(&code, &g)?;
        ensure(dec.is_empty() && sec.is_empty(), || format!("F{q}: decoding fails {dec:?}, security fails {sec:?}"))?;
    }
    ensure(matches!(construct_fano(&gf(3)), Err(CodeError::OddCharacteristic)), || "F3 accepted".into())?;
    let (dec, sec) = failing_edges(&fano_matrices(&gf(3)), &g)?;
    ensure(dec == vec![vec![4, 5, 6]] && sec == vec![vec![4, 5, 6]], || {
        format!("F3: decoding fails {dec:?}, security fails {sec:?}")
    })?;
    let code = construct_fano(&gf(2)).map_err(|e| e.to_string())?;
    let verdicts = entropy_oracle_all(&code, &g, DEFAULT_ORACLE_LIMIT).map_err(|e| e.to_string())?;
    for v in &verdicts {
        let rank = (
            verify_decoding(&code, &g, &v.edge).map_err(|e| e.to_string())?.0,
            verify_security(&code, &g, &v.edge).map_err(|e| e.to_string())?.0,
        );
        ensure(rank == (v.decodable, v.secure), || format!("oracle disagrees on {:?}", v.edge))?;
    }
    Ok("F2/F4 pass, F3 fails exactly at {4,5,6}, oracle agrees".into())
}

fn intersection() -> Check {
    let mut notes = Vec::new();
    for ((delta, m), q) in [((4, 2), 8), ((5, 2), 11), ((5, 3), 23), ((6, 3), 37)] {
        let bound = intersection_field_bound(delta, m);
        let f = smallest_field(bound as usize + 1);
        ensure(f.q() == q, || format!("⊓_{{{delta},{m}}}: field {} instead of {q}", f.q()))?;
        let build = construct_intersection(delta, m, &f, 0, 20).map_err(|e| e.to_string())?;
        let code = &build.code;
        let labels = binomial(delta, m);
        let g = intersection_graph(delta, m, &ones(labels)).map_err(|e| e.to_string())?;
        ensure(verify_code(code, &g).map_err(|e| e.to_string())?.pass, || format!("⊓_{{{delta},{m}}} fails"))?;
        let want = Rational::int(binomial(delta - 2, m - 2) as i64);
        ensure(rate(code) == want, || format!("⊓_{{{delta},{m}}} rate {}", rate(code)))?;
        let stacked = code.stacked();
        for e in g.decoding_sets() {
            let dc: Vec<usize> = (0..g.n()).filter(|&p| !e.contains(&(p as NodeId + 1))).collect();
            let cols = code.columns_of(&dc);
            let rk = stacked.select_columns(&cols).map_err(|e| e.to_string())?.rank();
            ensure(rk == code.delta(), || format!("⊓_{{{delta},{m}}} erased rank {rk} for {e:?}"))?;
        }
        notes.push(format!("({delta},{m}) q={q} in {} tries", build.attempts));
    }
    let g = intersection_graph(4, 2, &ones(6)).map_err(|e| e.to_string())?;
    ensure(verify_code(&intersection_fig5_fixture(&gf(2)), &g).map_err(|e| e.to_string())?.pass, || {
        "⊓_{4,2} fixture fails over F2".into()
    })?;
    Ok(notes.join(", "))
}

/// Every code built by the constructors, with its graph.
fn constructed_codes() -> Result<Vec<(String, SecureCode, StorageGraph)>, String> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let mut out = Vec::new();
    for (n, k) in mds_cases() {
        let f = smallest_field(n);
        out.push((format!("M_{n},{k}"), construct_mds_uniform(n, k, &f).map_err(|e| s(&e))?, mds_graph(n, k, &ones(n)).map_err(|e| s(&e))?));
    }
    for n in 4..=8usize {
        for v in [1u8, 2] {
            let f = smallest_field(if v == 1 { n } else { n - 1 });
            out.push((format!("W_{n} v{v}"), construct_wheel_component(n, v, &f).map_err(|e| s(&e))?, wheel_graph(&ones(n)).map_err(|e| s(&e))?));
        }
    }
    out.push(("W_5 v3".into(), construct_wheel_component(5, 3, &gf(5)).map_err(|e| s(&e))?, wheel_graph(&ones(5)).map_err(|e| s(&e))?));
    out.push(("W4 fixture".into(), w4_fixture(), wheel_graph(&[1, 2, 2, 2].map(Rational::int)).map_err(|e| s(&e))?));
    for q in [2, 4, 8] {
        out.push((format!("Fano F{q}"), construct_fano(&gf(q)).map_err(|e| s(&e))?, fano_graph(&ones(7)).map_err(|e| s(&e))?));
    }
    out.push(("⊓42 fixture".into(), intersection_fig5_fixture(&gf(2)), intersection_graph(4, 2, &ones(6)).map_err(|e| s(&e))?));
    let f8 = gf(8);
    let b = construct_intersection(4, 2, &f8, 0, 20).map_err(|e| s(&e))?;
    out.push(("⊓42 F8".into(), b.code, intersection_graph(4, 2, &ones(6)).map_err(|e| s(&e))?));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let g = random_graph(&mut rng, 5);
        if is_feasible(&g).feasible {
            out.push((format!("feasibility #{i}"), construct_feasibility(&g).map_err(|e| s(&e))?, g));
        }
    }
    Ok(out)
}

fn oracle() -> Check {
    let mut checked = 0;
    let mut skipped = 0;
    let agree = |code: &SecureCode, g: &StorageGraph| -> Result<Option<bool>, String> {
        let verdicts = match entropy_oracle_all(code, g, DEFAULT_ORACLE_LIMIT) {
            Ok(v) => v,
            Err(CodeError::LimitExceeded { .. }) => return Ok(None),
            Err(e) => return Err(e.to_string()),
        };
        for v in verdicts {
            let d = verify_decoding(code, g, &v.edge).map_err(|e| e.to_string())?.0;
            let s = verify_security(code, g, &v.edge).map_err(|e| e.to_string())?.0;
            if (d, s) != (v.decodable, v.secure) {
                return Ok(Some(false));
            }
        }
        Ok(Some(true))
    };
    for (name, code, g) in constructed_codes()? {
        match agree(&code, &g)? {
            Some(true) => checked += 1,
            Some(false) => return Err(format!("{name}: oracle and ranks disagree")),
            None => skipped += 1,
        }
    }
    let base = w4_fixture();
    let g = wheel_graph(&[1, 2, 2, 2].map(Rational::int)).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mutants = 0;
    while mutants < 100 {
        let mut s = base.stacked();
        let flips = 1 + below(&mut rng, 3);
        for _ in 0..flips {
            let (row, col) = (below(&mut rng, 4) as usize, below(&mut rng, 7) as usize);
            s.set(row, col, 1 - s.get(row, col));
        }
        let Ok(m) = SecureCode::from_stacked(base.field(), 1, 1, vec![1, 2, 2, 2], &s) else { continue };
        if agree(&m, &g)? != Some(true) {
            return Err(format!("W4 mutant {mutants} disagrees"));
        }
        mutants += 1;
    }
    Ok(format!("{checked} codes agree ({skipped} over the size limit), 100 W4 mutants agree"))
}

fn quantum() -> Check {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let cases: Vec<(&str, SecureCode, StorageGraph)> = vec![
        ("W4 fixture", w4_fixture(), wheel_graph(&[1, 2, 2, 2].map(Rational::int)).map_err(|e| s(&e))?),
        ("Fano F2", construct_fano(&gf(2)).map_err(|e| s(&e))?, fano_graph(&ones(7)).map_err(|e| s(&e))?),
        ("⊓42 F2", intersection_fig5_fixture(&gf(2)), intersection_graph(4, 2, &ones(6)).map_err(|e| s(&e))?),
        ("M32", construct_mds_uniform(3, 2, &gf(3)).map_err(|e| s(&e))?, mds_graph(3, 2, &ones(3)).map_err(|e| s(&e))?),
        ("M43", construct_mds_uniform(4, 3, &gf(4)).map_err(|e| s(&e))?, mds_graph(4, 3, &ones(4)).map_err(|e| s(&e))?),
    ];
    let mut certs = 0;
    let mut secured = 0;
    for (name, code, g) in &cases {
        for e in g.decoding_sets() {
            let c = verify_quantum_recovery(code, g, e).map_err(|err| format!("{name} {e:?}: {err}"))?;
            ensure(c.factorization_ok, || format!("{name} {e:?}: recovery fails"))?;
            ensure(c.security_ok != Some(false), || format!("{name} {e:?}: security fails"))?;
            certs += 1;
            secured += c.security_ok.is_some() as usize;
        }
    }
    let (_, base, g) = &cases[0];
    let mut s = base.stacked();
    s.set(0, 6, 1 - s.get(0, 6));
    let bad = SecureCode::from_stacked(base.field(), 1, 1, vec![1, 2, 2, 2], &s).map_err(|e| e.to_string())?;
    let broken = g.decoding_sets().iter().any(|e| match verify_quantum_recovery(&bad, g, e) {
        Ok(c) => !c.factorization_ok || c.security_ok == Some(false),
        Err(_) => true,
    });
    ensure(broken, || "flipped W4 entry passes every certificate".into())?;
    Ok(format!("{certs} recovery certificates, {secured} with security, mutant rejected"))
}

fn feasibility() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut yes, mut no) = (0, 0);
    for i in 0..200 {
        let g = random_graph(&mut rng, 6);
        let feasible = is_feasible(&g).feasible;
        match construct_feasibility(&g) {
            Ok(code) => {
                ensure(feasible, || format!("graph {i}: built a code for an infeasible graph"))?;
                ensure(verify_code(&code, &g).map_err(|e| e.to_string())?.pass, || format!("graph {i}: code fails"))?;
                yes += 1;
            }
            Err(_) => {
                ensure(!feasible, || format!("graph {i}: no code for a feasible graph"))?;
                let ub = capacity_upper_bound(&g);
                ensure(ub.value.is_zero(), || format!("graph {i}: infeasible but bound {}", ub.value))?;
                no += 1;
            }
        }
    }
    Ok(format!("{yes} feasible, {no} infeasible"))
}

fn maximality() -> Check {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let mut yes: Vec<(String, StorageGraph)> = Vec::new();
    for k in 1..=4 {
        let n = 2 * k - 1;
        yes.push((format!("M_{n},{k}"), mds_graph(n, k, &ones(n)).map_err(|e| s(&e))?));
    }
    for n in 4..=8 {
        yes.push((format!("W_{n}"), wheel_graph(&ones(n)).map_err(|e| s(&e))?));
    }
    yes.push(("F7".into(), fano_graph(&ones(7)).map_err(|e| s(&e))?));
    yes.push(("⊓32".into(), intersection_graph(3, 2, &ones(3)).map_err(|e| s(&e))?));
    let mut no: Vec<(String, StorageGraph)> = Vec::new();
    for (n, k) in mds_cases() {
        if 2 * k - n > 1 {
            no.push((format!("M_{n},{k}"), mds_graph(n, k, &ones(n)).map_err(|e| s(&e))?));
        }
    }
    no.push(("⊓42".into(), intersection_graph(4, 2, &ones(6)).map_err(|e| s(&e))?));
    no.push(("⊓53".into(), intersection_graph(5, 3, &ones(10)).map_err(|e| s(&e))?));
    for (name, g) in &yes {
        let r = is_strongly_maximal(g, 16).map_err(|e| s(&e))?;
        ensure(r.strongly_maximal, || format!("{name} reported not strongly maximal"))?;
    }
    for (name, g) in &no {
        let r = is_strongly_maximal(g, 16).map_err(|e| s(&e))?;
        let w = r.witness.clone().unwrap_or_default();
        ensure(!r.strongly_maximal && r.witness.is_some() && witness_is_valid(g, &w), || {
            format!("{name}: expected a valid witness, got {r:?}")
        })?;
    }
    Ok(format!("{} maximal, {} with witnesses", yes.len(), no.len()))
}

fn recheck_cert(c: &BoundCertificate, g: &StorageGraph, what: &str) -> Result<(), String> {
    let text = serde_json::to_string(c).map_err(|e| e.to_string())?;
    let back: BoundCertificate = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let v = back.recheck(g).map_err(|e| format!("{what}: {e}"))?;
    ensure(v == c.value && back == *c, || format!("{what}: witness gives {v}, claimed {}", c.value))
}

fn recheck_plan(p: &AchievabilityPlan, what: &str) -> Result<(), String> {
    let text = serde_json::to_string(&p.to_json()).map_err(|e| e.to_string())?;
    let back: PlanJson = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let rebuilt = AchievabilityPlan::from_json(&back, &p.graph).map_err(|e| format!("{what}: {e}"))?;
    ensure(plan_rate(&rebuilt) == plan_rate(p), || format!("{what}: rate changed"))
}

fn certificates() -> Check {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let mut graphs: Vec<(String, StorageGraph)> = Vec::new();
    for (n, k) in mds_cases() {
        graphs.push((format!("M_{n},{k}"), mds_graph(n, k, &ones(n)).map_err(|e| s(&e))?));
    }
    for n in 4..=8 {
        graphs.push((format!("W_{n}"), wheel_graph(&ones(n)).map_err(|e| s(&e))?));
    }
    graphs.push(("F7".into(), fano_graph(&ones(7)).map_err(|e| s(&e))?));
    graphs.push(("⊓42".into(), intersection_graph(4, 2, &ones(6)).map_err(|e| s(&e))?));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..100 {
        graphs.push((format!("random #{i}"), random_graph(&mut rng, 6)));
    }
    let mut certs = 0;
    for (name, g) in &graphs {
        recheck_cert(&capacity_upper_bound(g), g, name)?;
        certs += 1;
        if g.decoding_sets().len() >= 2 {
            recheck_cert(&intersection_bound(g).map_err(|e| s(&e))?, g, name)?;
            certs += 1;
        }
        if let Some(c) = wheel_bound_search(g, 8).map_err(|e| s(&e))? {
            recheck_cert(&c, g, name)?;
            certs += 1;
        }
        if let Ok(c) = capacity_small(g) {
            recheck_cert(&c.certificate, g, name)?;
            certs += 1;
        }
    }

    let mut plans: Vec<(String, AchievabilityPlan)> = Vec::new();
    let f = gf(8);
    for n in 4..=8 {
        plans.push((format!("W_{n}"), wheel_plan(&ones(n), n, &f).map_err(|e| s(&e))?));
    }
    let lam: Vec<Rational> = [1, 2, 3, 4].map(Rational::int).to_vec();
    plans.push(("M43 layered".into(), mds_nonuniform_plan(&lam, 4, 3, &f).map_err(|e| s(&e))?));
    for i in 0..20 {
        let lam: Vec<Rational> = (0..5).map(|_| small_rational(&mut rng)).collect();
        plans.push((format!("W5 #{i}"), wheel_plan(&lam, 5, &f).map_err(|e| s(&e))?));
        let n = 3 + below(&mut rng, 5) as usize;
        let k = n / 2 + 1 + below(&mut rng, (n - n / 2) as u32) as usize;
        let lam: Vec<Rational> = (0..n).map(|_| small_rational(&mut rng)).collect();
        plans.push((format!("M_{n},{k} #{i}"), mds_nonuniform_plan(&lam, n, k, &f).map_err(|e| s(&e))?));
    }
    for i in 0..100 {
        let g = random_graph(&mut rng, 4);
        if is_feasible(&g).feasible {
            let p = small_graph_plan(&g, &f).map_err(|e| s(&e))?;
            let exact = capacity_small(&g).map_err(|e| s(&e))?.value;
            ensure(plan_rate(&p) == exact, || format!("small #{i}: plan {} vs capacity {exact}", plan_rate(&p)))?;
            plans.push((format!("small #{i}"), p));
        }
    }
    for (name, p) in &plans {
        recheck_plan(p, name)?;
    }
    Ok(format!("{certs} certificates, {} plans", plans.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("uniform MDS codes meet 2K-N", mds),
        ("layered MDS plan on M43", mds_nonuniform),
        ("W4 plans meet capacity", w4),
        ("wheel plans and wheel bound", wheels),
        ("Fano code by characteristic", fano),
        ("intersection codes", intersection),
        ("entropy oracle matches ranks", oracle),
        ("quantum recovery and security", quantum),
        ("feasibility codes", feasibility),
        ("strong maximality", maximality),
        ("certificates re-evaluate", certificates),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
