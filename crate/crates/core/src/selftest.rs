//! Built-in invariant suite behind `hmax selftest`.

use serde::Serialize;

use crate::analysis::{generate_field, FieldSpec};
use crate::covering::{cf_select, random_family, verify_selection};
use crate::error::Result;
use crate::heisenberg::{group_inv, group_mul, GroupParams, LatticePoint};
use crate::lattice::{Rect, ScalarField};
use crate::maximal::{
    heisenberg_maximal, maximal_exact, maximal_fast, maximal_group_form_at, sandwich_constant, Alpha, Mode,
};
use crate::rng::FieldRng;

const MAX_REPORTED_FAILURES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub ok: bool,
    pub suites: Vec<SuiteResult>,
}

struct Suite {
    result: SuiteResult,
}

impl Suite {
    fn new(name: &str) -> Self {
        Suite {
            result: SuiteResult {
                name: name.to_string(),
                cases: 0,
                passed: 0,
                failures: Vec::new(),
            },
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.result.cases += 1;
        if ok {
            self.result.passed += 1;
        } else if self.result.failures.len() < MAX_REPORTED_FAILURES {
            self.result.failures.push(what());
        }
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_point(rng: &mut FieldRng, n: usize, span: i64) -> LatticePoint {
    let mut c = || rng.range_i64(-span, span + 1);
    let u = (0..n).map(|_| c()).collect();
    let v = (0..n).map(|_| c()).collect();
    LatticePoint::new(u, v, c()).unwrap()
}

fn group_axioms(s: &mut Suite) -> Result<()> {
    let mut rng = FieldRng::new(0x5eed_0001);
    for n in [1, 2] {
        for mu in [-2, 0, 1, 3] {
            let p = GroupParams::new(n, mu)?;
            let e = LatticePoint::identity(n);
            for _ in 0..1000 {
                let (a, b, c) = (random_point(&mut rng, n, 1000), random_point(&mut rng, n, 1000), random_point(&mut rng, n, 1000));
                let assoc = group_mul(&group_mul(&a, &b, p)?, &c, p)? == group_mul(&a, &group_mul(&b, &c, p)?, p)?;
                let ident = group_mul(&a, &e, p)? == a && group_mul(&e, &a, p)? == a;
                let inv = group_mul(&a, &group_inv(&a), p)? == e && group_mul(&group_inv(&a), &a, p)? == e;
                s.check(assoc && ident && inv, || format!("n={n} mu={mu} a={:?}", a.coords()));
            }
        }
    }
    Ok(())
}

fn definition_equivalence(s: &mut Suite) -> Result<()> {
    let mut rng = FieldRng::new(0x5eed_0002);
    for trial in 0..8 {
        let w = Rect::cube(3, 0, 4)?;
        let f = ScalarField::from_fn(w.clone(), |_| rng.range_i64(0, 4) as f64)?;
        let p = GroupParams::new(1, 1 + trial % 2)?;
        let alpha = Alpha::new(if trial < 4 { 0.0 } else { 1.0 / 3.0 })?;
        let q = w.dilate(2);
        let m = heisenberg_maximal(&f, alpha, p, &q, Mode::Exact)?;
        for _ in 0..5 {
            let x: Vec<i64> = (0..3).map(|a| rng.range_i64(q.lo()[a], q.hi()[a])).collect();
            let g = maximal_group_form_at(&f, alpha, p, &LatticePoint::from_coords(&x)?)?;
            let h = m.field.get(&x);
            s.check(close(g, h, 1e-12), || format!("x={x:?}: group {g} vs sheared {h}"));
        }
    }
    Ok(())
}

fn sandwich(s: &mut Suite) -> Result<()> {
    let mut rng = FieldRng::new(0x5eed_0003);
    for trial in 0..3 {
        let w = Rect::cube(3, 0, 6)?;
        let f = ScalarField::from_fn(w.clone(), |_| rng.unit_f64().powi(3))?;
        let alpha = Alpha::new([0.0, 0.25, 0.5][trial])?;
        let exact = maximal_exact(&f, alpha, &w)?;
        let fast = maximal_fast(&f, alpha, &w)?;
        let c = sandwich_constant(3, alpha);
        let ok = fast.values().iter().zip(exact.values()).all(|(a, b)| *a <= b * (1.0 + 1e-12) && *b <= c * a * (1.0 + 1e-12));
        s.check(ok, || format!("alpha={alpha}"));
    }
    Ok(())
}

fn indicator_closed_form(s: &mut Suite) -> Result<()> {
    let w = Rect::cube(3, 0, 7)?;
    for (r, a) in [
        (Rect::new(vec![1, 1, 1], vec![3, 3, 3])?, 0.0),
        (Rect::new(vec![0, 2, 1], vec![2, 4, 5])?, 0.5),
        (Rect::new(vec![1, 0, 2], vec![4, 3, 6])?, 0.25),
    ] {
        let f = ScalarField::indicator(w.clone(), &r)?;
        let alpha = Alpha::new(a)?;
        let m = maximal_exact(&f, alpha, &r)?;
        let want = (r.volume() as f64).powf(a);
        for v in m.values() {
            s.check(close(*v, want, 1e-12), || format!("{r}: {v} vs {want}"));
        }
    }
    Ok(())
}

fn covering_invariants(s: &mut Suite) -> Result<()> {
    let mut rng = FieldRng::new(0x5eed_0005);
    for _ in 0..20 {
        let count = rng.range_i64(1, 65) as usize;
        let rects = random_family(&mut rng, 3, 32, count, 16);
        let sel = cf_select(&rects)?;
        let v = verify_selection(&rects, &sel)?;
        s.check(v.all_ok(), || format!("{v:?}"));
    }
    Ok(())
}

fn operator_properties(s: &mut Suite) -> Result<()> {
    let mut rng = FieldRng::new(0x5eed_0006);
    for _ in 0..10 {
        let w = Rect::cube(3, 0, 4)?;
        let f = ScalarField::from_fn(w.clone(), |_| rng.uniform(-1.0, 1.0))?;
        let g = ScalarField::from_fn(w.clone(), |x| f.get(x).abs() + rng.unit_f64())?;
        let c = rng.uniform(-5.0, 5.0);
        let p = GroupParams::new(1, rng.range_i64(-2, 3))?;
        let alpha = Alpha::new(rng.uniform(0.0, 0.9))?;
        let q = w.dilate(2);
        let mf = heisenberg_maximal(&f, alpha, p, &q, Mode::Exact)?;
        let mg = heisenberg_maximal(&g, alpha, p, &q, Mode::Exact)?;
        let mc = heisenberg_maximal(&f.scaled(c), alpha, p, &q, Mode::Exact)?;
        let homog = mf.values().iter().zip(mc.values()).all(|(a, b)| close(c.abs() * a, *b, 1e-12));
        let mono = mf.values().iter().zip(mg.values()).all(|(a, b)| *a <= b * (1.0 + 1e-12));
        let lower = w.cells().all(|x| mf.field.get(&x) >= f.get(&x).abs() * (1.0 - 1e-12));
        s.check(homog, || format!("homogeneity c={c}"));
        s.check(mono, || "monotonicity".to_string());
        s.check(lower, || "pointwise lower bound".to_string());
    }
    Ok(())
}

fn generator_determinism(s: &mut Suite) -> Result<()> {
    for text in ["spikes:size=8,count=4", "rect-union-indicator:size=8,count=5", "uniform-noise:size=5"] {
        let spec: FieldSpec = text.parse()?;
        let spec = spec.with_seed(17);
        s.check(generate_field(&spec)? == generate_field(&spec)?, || text.to_string());
    }
    Ok(())
}

pub fn run_selftest() -> Result<SelftestReport> {
    let suites: [(&str, fn(&mut Suite) -> Result<()>); 7] = [
        ("group-axioms", group_axioms),
        ("definition-equivalence", definition_equivalence),
        ("fast-exact-sandwich", sandwich),
        ("indicator-closed-form", indicator_closed_form),
        ("covering-invariants", covering_invariants),
        ("operator-properties", operator_properties),
        ("generator-determinism", generator_determinism),
    ];
    let mut results = Vec::new();
    for (name, run) in suites {
        let mut s = Suite::new(name);
        run(&mut s)?;
        results.push(s.result);
    }
    Ok(SelftestReport {
        ok: results.iter().all(|r| r.passed == r.cases),
        suites: results,
    })
}
