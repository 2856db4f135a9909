//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::Command;
use std::time::{Duration, Instant};

use hmax::analysis::{run_ensemble, EvalOptions, Experiment, ExponentPair, FieldSpec, LambdaGrid};
use hmax::covering::{cf_select, est_ratios, random_family, verify_selection, Decision};
use hmax::heisenberg::{group_inv, group_mul, GroupParams, LatticePoint};
use hmax::lattice::{build_prefix_sum, overlap_volume, Rect, ScalarField};
use hmax::maximal::{
    heisenberg_maximal, heisenberg_maximal_multi, maximal_exact, maximal_exact_at, maximal_fast,
    maximal_group_form_at, sandwich_constant, Alpha, Mode,
};
use hmax::rng::FieldRng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn random_point(rng: &mut FieldRng, n: usize) -> LatticePoint {
    const SPAN: i64 = 1 << 20;
    let u = (0..n).map(|_| rng.range_i64(-SPAN, SPAN)).collect();
    let v = (0..n).map(|_| rng.range_i64(-SPAN, SPAN)).collect();
    LatticePoint::new(u, v, rng.range_i64(-SPAN, SPAN)).unwrap()
}

fn group_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = FieldRng::new(1);
    let mut checked = 0;
    for n in [1, 2] {
        for mu in [-2, 0, 1, 3] {
            let p = GroupParams::new(n, mu).unwrap();
            let e = LatticePoint::identity(n);
            for _ in 0..10_000 {
                let (a, b, c) = (random_point(&mut rng, n), random_point(&mut rng, n), random_point(&mut rng, n));
                let mul = |x: &LatticePoint, y: &LatticePoint| group_mul(x, y, p).map_err(|e| e.to_string());
                ensure(mul(&mul(&a, &b)?, &c)? == mul(&a, &mul(&b, &c)?)?, || format!("associativity n={n} mu={mu}"))?;
                ensure(mul(&a, &e)? == a && mul(&e, &a)? == a, || format!("identity n={n} mu={mu}"))?;
                let ai = group_inv(&a);
                ensure(mul(&a, &ai)? == e && mul(&ai, &a)? == e, || format!("inverse n={n} mu={mu}"))?;
                checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{checked} triples in {elapsed:.2?}"))
}

fn definition_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = FieldRng::new(2);
    let mut worst = 0.0f64;
    for trial in 0..30 {
        let hi: Vec<i64> = (0..3).map(|_| rng.range_i64(2, 7)).collect();
        let w = Rect::new(vec![0; 3], hi).unwrap();
        let integer = trial % 2 == 0;
        let f = ScalarField::from_fn(w.clone(), |_| {
            if rng.unit_f64() < 0.3 {
                0.0
            } else if integer {
                rng.range_i64(-3, 4) as f64
            } else {
                rng.uniform(-1.0, 1.0)
            }
        })
        .unwrap();
        let p = GroupParams::new(1, 1 + (trial / 2) % 2).unwrap();
        let alpha = Alpha::new(if (trial / 4) % 2 == 0 { 0.0 } else { 1.0 / 3.0 }).unwrap();
        let reach = w.dilate(3);
        for _ in 0..10 {
            let x: Vec<i64> = (0..3).map(|a| rng.range_i64(reach.lo()[a], reach.hi()[a])).collect();
            let group = maximal_group_form_at(&f, alpha, p, &LatticePoint::from_coords(&x).unwrap()).unwrap();
            let sheared = heisenberg_maximal(&f, alpha, p, &Rect::cell(&x), Mode::Exact).unwrap().field.get(&x);
            if group != sheared {
                worst = worst.max((group - sheared).abs() / group.abs().max(sheared.abs()));
            }
            ensure(rel_close(group, sheared, 1e-12), || format!("x={x:?}: {group} vs {sheared}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("300 points, worst relative gap {worst:.1e}, {elapsed:.2?}"))
}

fn fast_exact_sandwich() -> Outcome {
    let start = Instant::now();
    let mut rng = FieldRng::new(3);
    let alphas = [Alpha::ZERO, Alpha::new(0.25).unwrap(), Alpha::new(0.5).unwrap()];
    let flat = GroupParams::new(1, 0).unwrap();
    let mut worst = [0.0f64; 3];
    for trial in 0..20 {
        let w = Rect::cube(3, 0, 12).unwrap();
        let sparse = trial % 2 == 1;
        let f = ScalarField::from_fn(w.clone(), |_| {
            let v = rng.uniform(0.0, 1.0);
            if sparse && rng.unit_f64() < 0.9 { 0.0 } else { v }
        })
        .unwrap();
        let exact = heisenberg_maximal_multi(&f, &alphas, flat, &w, Mode::Exact).unwrap();
        for (ai, &alpha) in alphas.iter().enumerate() {
            let fast = maximal_fast(&f, alpha, &w).unwrap();
            let c = sandwich_constant(3, alpha);
            for (i, (lo, ex)) in fast.values().iter().zip(exact[ai].values()).enumerate() {
                ensure(*lo <= ex * (1.0 + 1e-12) && *ex <= c * lo * (1.0 + 1e-12), || {
                    format!("alpha={alpha} cell {:?}: fast {lo} exact {ex}", w.point_at(i))
                })?;
                worst[ai] = worst[ai].max(ex / lo);
            }
            for _ in 0..3 {
                let x: Vec<i64> = (0..3).map(|_| rng.range_i64(0, 12)).collect();
                let pointwise = maximal_exact_at(&f, alpha, &x);
                let swept = exact[ai].field.get(&x);
                ensure(rel_close(pointwise, swept, 1e-12), || format!("oracle {pointwise} vs sweep {swept}"))?;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!(
        "worst exact/fast {:.3} {:.3} {:.3} (bounds {:.0} {:.1} {:.1}), {elapsed:.2?}",
        worst[0],
        worst[1],
        worst[2],
        sandwich_constant(3, alphas[0]),
        sandwich_constant(3, alphas[1]),
        sandwich_constant(3, alphas[2])
    ))
}

fn indicator_closed_form() -> Outcome {
    let w = Rect::cube(3, 0, 10).unwrap();
    let shapes = [
        Rect::new(vec![3, 3, 3], vec![5, 5, 5]).unwrap(),
        Rect::new(vec![2, 4, 1], vec![4, 6, 5]).unwrap(),
        Rect::new(vec![1, 3, 2], vec![4, 7, 5]).unwrap(),
    ];
    let mut cells = 0;
    for r in &shapes {
        let f = ScalarField::indicator(w.clone(), r).unwrap();
        for a in [0.0, 0.25, 0.5, 0.75] {
            let alpha = Alpha::new(a).unwrap();
            let m = maximal_exact(&f, alpha, r).unwrap();
            let want = (r.volume() as f64).powf(a);
            for (i, v) in m.values().iter().enumerate() {
                ensure((v - want).abs() <= 1e-12 * want, || format!("{r} alpha={a} at {:?}: {v} vs {want}", r.point_at(i)))?;
                cells += 1;
            }
        }
    }
    let vols: Vec<u128> = shapes.iter().map(Rect::volume).collect();
    ensure(vols == [8, 16, 36], || format!("volumes {vols:?}"))?;
    Ok(format!("volumes {vols:?}, 4 orders, {cells} cell checks"))
}

fn families(seed: u64, size: usize) -> Vec<Vec<Rect>> {
    let mut rng = FieldRng::new(seed);
    (0..100).map(|_| random_family(&mut rng, 3, 32, size, 16)).collect()
}

fn covering_invariants() -> Outcome {
    let start = Instant::now();
    let mut rng = FieldRng::new(55);
    let mut witnessed = 0u128;
    let mut oracle_points = 0;
    for (k, rects) in families(5, 64).iter().enumerate() {
        let sel = cf_select(rects).map_err(|e| e.to_string())?;
        let mut kept: Vec<Rect> = Vec::new();
        for (j, (r, a)) in rects.iter().zip(sel.audit()).enumerate() {
            let overlap = overlap_volume(r, &kept);
            ensure(overlap == a.overlap_volume_at_decision, || format!("family {k} rect {j}: audit overlap"))?;
            match a.decision {
                Decision::Selected => {
                    ensure(2 * overlap <= r.volume(), || format!("family {k} rect {j}: selected over half"))?;
                    ensure(2 * (r.volume() - overlap) >= r.volume(), || format!("family {k} rect {j}: core"))?;
                    kept.push(r.clone());
                }
                Decision::Skipped => {
                    ensure(2 * overlap > r.volume(), || format!("family {k} rect {j}: skipped at most half"))?
                }
            }
        }
        ensure(sel.selected().first() == Some(&0), || format!("family {k}: first not selected"))?;
        // Every x in ∪R_j lies in some R_j, and M_0 χ_{∪R̂}(x) ≥ mass(R_j)/vol(R_j).
        for (j, r) in rects.iter().enumerate() {
            let mass = overlap_volume(r, &kept);
            ensure(2 * mass > r.volume(), || format!("family {k} rect {j}: half-bound witness {mass}/{}", r.volume()))?;
            witnessed += r.volume();
        }
        let v = verify_selection(rects, &sel).map_err(|e| e.to_string())?;
        ensure(v.all_ok(), || format!("family {k}: {v:?}"))?;
        if k < 10 {
            let window = Rect::cube(3, 0, 32).unwrap();
            let chi = ScalarField::from_fn(window, |p| if kept.iter().any(|r| r.contains(p)) { 1.0 } else { 0.0 }).unwrap();
            for _ in 0..10 {
                let r = &rects[rng.below(rects.len() as u64) as usize];
                let x: Vec<i64> = (0..3).map(|a| rng.range_i64(r.lo()[a], r.hi()[a])).collect();
                let m = maximal_exact_at(&chi, Alpha::ZERO, &x);
                ensure(m > 0.5, || format!("family {k}: M chi = {m} at {x:?}"))?;
                oracle_points += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(180))?;
    Ok(format!(
        "100 families of 64, witness volume {witnessed}, {oracle_points} oracle cells, {elapsed:.2?}"
    ))
}

fn est2_stability() -> Outcome {
    let ps = [1.5, 2.0, 3.0];
    let stats = |fams: &[Vec<Rect>]| -> Result<(Vec<f64>, [f64; 3]), String> {
        let mut est1 = Vec::new();
        let mut max2 = [0.0f64; 3];
        for rects in fams {
            let sel = cf_select(rects).map_err(|e| e.to_string())?;
            let e = est_ratios(rects, &sel, &ps).map_err(|e| e.to_string())?;
            for (i, (_, r)) in e.est2_ratios.iter().enumerate() {
                ensure(r.is_finite() && *r >= 1.0, || format!("est2 {r}"))?;
                max2[i] = max2[i].max(*r);
            }
            est1.push(e.est1_ratio);
        }
        est1.sort_by(|a, b| a.total_cmp(b));
        Ok((est1, max2))
    };
    let (est1_64, max_64) = stats(&families(5, 64))?;
    let (est1_128, max_128) = stats(&families(6, 128))?;
    let mut growth = Vec::new();
    for i in 0..3 {
        let g = max_128[i] / max_64[i];
        ensure(g <= 1.25, || format!("p={}: max est2 {} (128) vs {} (64), factor {g:.4}", ps[i], max_128[i], max_64[i]))?;
        growth.push(format!("p={}: {:.3}->{:.3} (x{g:.3})", ps[i], max_64[i], max_128[i]));
    }
    let q = |v: &[f64]| format!("min {:.3} median {:.3} max {:.3}", v[0], v[v.len() / 2], v[v.len() - 1]);
    Ok(format!("{}; est1 64: {}; est1 128: {}", growth.join(", "), q(&est1_64), q(&est1_128)))
}

fn weak_type_stability() -> Outcome {
    let start = Instant::now();
    let exps = [
        ExponentPair::new(2.0, 2.0).unwrap(),
        ExponentPair::new(1.5, 3.0).unwrap(),
        ExponentPair::new(2.0, 4.0).unwrap(),
    ];
    let opts = EvalOptions { mode: Some(Mode::Dyadic), sensitivity_dilation: None, ..EvalOptions::default() };
    let experiment = Experiment::WeakType(LambdaGrid::Attained);
    let seeds: Vec<u64> = (1..=20).collect();
    let run = |size: i64| {
        let spec: FieldSpec = format!("spikes:size={size},count=4,n=1").parse().unwrap();
        run_ensemble(&spec, &seeds, &exps, &[0, 1], &experiment, &opts, false).map_err(|e| e.to_string())
    };
    let (small, large) = (run(8)?, run(16)?);
    let mut parts = Vec::new();
    for mu in [0, 1] {
        for e in &exps {
            let a = small.summary(e.p(), e.q(), mu).unwrap().max;
            let b = large.summary(e.p(), e.q(), mu).unwrap().max;
            ensure(b <= 1.10 * a, || format!("(p,q)=({},{}) mu={mu}: {b} vs {a}", e.p(), e.q()))?;
            parts.push(format!("({},{},mu={mu}) x{:.3}", e.p(), e.q(), b / a));
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("16^3/8^3 max ratio: {}; {elapsed:.2?}", parts.join(", ")))
}

fn operator_properties() -> Outcome {
    let mut rng = FieldRng::new(8);
    let mut counts = [0usize; 4];
    for trial in 0..50 {
        let hi: Vec<i64> = (0..3).map(|_| rng.range_i64(2, 6)).collect();
        let w = Rect::new(vec![0; 3], hi).unwrap();
        let f = ScalarField::from_fn(w.clone(), |_| if rng.unit_f64() < 0.4 { 0.0 } else { rng.uniform(-1.0, 1.0) }).unwrap();
        let g = ScalarField::from_fn(w.clone(), |x| f.get(x).abs() + if rng.unit_f64() < 0.5 { rng.unit_f64() } else { 0.0 }).unwrap();
        let c = rng.uniform(-4.0, 4.0);
        let p = GroupParams::new(1, rng.range_i64(-3, 4)).unwrap();
        let alpha = Alpha::new(rng.uniform(0.0, 0.95)).unwrap();
        let mode = if trial % 2 == 0 { Mode::Exact } else { Mode::Dyadic };
        let q = w.dilate(2);
        let mf = heisenberg_maximal(&f, alpha, p, &q, mode).unwrap();
        let mg = heisenberg_maximal(&g, alpha, p, &q, mode).unwrap();
        let mc = heisenberg_maximal(&f.scaled(c), alpha, p, &q, mode).unwrap();
        for ((a, b), s) in mf.values().iter().zip(mg.values()).zip(mc.values()) {
            ensure((c.abs() * a - s).abs() <= 1e-12 * s.abs().max(1e-300), || format!("homogeneity c={c}: {s} vs {}", c.abs() * a))?;
            ensure(*a <= b * (1.0 + 1e-12), || format!("monotonicity {a} > {b}"))?;
        }
        counts[0] += 1;
        counts[1] += 1;
        for x in w.cells() {
            ensure(mf.field.get(&x) >= f.get(&x).abs() * (1.0 - 1e-12), || format!("lower bound at {x:?}"))?;
        }
        counts[2] += 1;
        // Per-rectangle α-monotonicity on a field bounded by 1.
        let table = build_prefix_sum(&f, true);
        let (a1, a2) = {
            let (s, t) = (rng.uniform(0.0, 0.99), rng.uniform(0.0, 0.99));
            (s.min(t), s.max(t))
        };
        for _ in 0..20 {
            let lo: Vec<i64> = (0..3).map(|a| rng.range_i64(-2, w.hi()[a])).collect();
            let hi: Vec<i64> = lo.iter().map(|&l| l + rng.range_i64(1, 5)).collect();
            let r = Rect::new(lo, hi).unwrap();
            let (vol, mass) = (r.volume() as f64, table.rect_sum(&r));
            ensure(vol.powf(a1 - 1.0) * mass <= vol.powf(a2 - 1.0) * mass * (1.0 + 1e-12), || format!("alpha order on {r}"))?;
        }
        counts[3] += 1;
    }
    Ok(format!(
        "homogeneity {}, monotonicity {}, lower bound {}, per-box alpha order {} instances",
        counts[0], counts[1], counts[2], counts[3]
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_hmax"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("hmax {args:?} exited with {:?}", out.status.code()))?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let configs = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut runs: Vec<Vec<String>> = vec![vec!["selftest".into()]];
    let mut names: Vec<String> = std::fs::read_dir(configs)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "conf"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    names.sort();
    ensure(!names.is_empty(), || "no example configs".into())?;
    runs.extend(names.iter().map(|n| vec!["run".to_string(), n.clone()]));
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (run_cli(&args)?, run_cli(&args)?);
        ensure(!a.is_empty() && a == b, || format!("hmax {args:?}: outputs differ"))?;
    }
    Ok(format!("selftest + {} configs, byte-identical reruns", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 group axioms", group_axioms),
        ("2 definition equivalence", definition_equivalence),
        ("3 fast/exact sandwich", fast_exact_sandwich),
        ("4 indicator closed form", indicator_closed_form),
        ("5 covering invariants", covering_invariants),
        ("6 overlap-norm stability", est2_stability),
        ("7 weak-type stability", weak_type_stability),
        ("8 homogeneity/monotonicity", operator_properties),
        ("9 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
