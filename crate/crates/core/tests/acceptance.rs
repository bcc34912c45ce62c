//! Acceptance criteria. Runs without the libtest harness so that the one-line
//! verdict of every criterion is always printed; exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use krein_calculus::bipoly::{euclid_reduce, hermite_interpolate, varpi, ZeroGrid};
use krein_calculus::harness::{generate, run_groups, Group, Instance, Profile, Report};
use krein_calculus::linalg::{c, diag, eye, from_real_rows, rel_diff};
use krein_calculus::{
    BiPoly, CalculusFunction, DomainPoint, Error, FunctionalCalculus, Jet, JetKind, JetShape,
    RealUniPoly, Region, Tolerances, C64,
};

// Tolerances and budgets, pinned.
const WORKED_TOL: f64 = 1e-12;
const WORKED_BUDGET: Duration = Duration::from_secs(1);
const JET_CASES: usize = 500;
const JET_TOL: f64 = 1e-10;
const BIPOLY_CASES: usize = 200;
const BIPOLY_MAX_DEGREE: usize = 4;
const BIPOLY_TOL: f64 = 1e-10;
const SUITE_INSTANCES: u64 = 100;
const SUITE_MAX_DIM: usize = 8;
const EMBEDDING_TOL: f64 = 1e-9;
const EMBEDDING_BUDGET: Duration = Duration::from_secs(30);
const SPECTRAL_TOL: f64 = 1e-8;
const CALCULUS_TOL: f64 = 1e-8;
const CALCULUS_BUDGET: Duration = Duration::from_secs(120);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("worked instance W1", worked_w1),
        ("worked instance W2", worked_w2),
        ("jet algebra laws", jet_laws),
        ("bivariate polynomial round trips", bipoly_round_trips),
        ("embedding suite on generated instances", embedding_suite),
        ("spectral suite on generated instances", spectral_suite),
        (
            "functional-calculus suite on generated instances",
            calculus_suite,
        ),
        ("negative tests", negative_tests),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} ({})",
            k + 1,
            if verdict.pass { "PASS" } else { "FAIL" },
            name,
            verdict.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn w1() -> FunctionalCalculus {
    let inst = Instance::from_json(include_str!("../fixtures/w1.json")).expect("W1 parses");
    FunctionalCalculus::new(inst.pair).expect("W1 builds")
}

fn w2() -> FunctionalCalculus {
    let inst = Instance::from_json(include_str!("../fixtures/w2.json")).expect("W2 parses");
    FunctionalCalculus::new(inst.pair).expect("W2 builds")
}

/// `RⱼRⱼ*` is `p/(p+q)` (resp. `q/(p+q)`) on each eigenspace of `Θ(N)`:
/// 1/2 at 1+2i, and 1 (resp. 0) at −1+3i.
fn worked_w1() -> Verdict {
    let start = Instant::now();
    let fc = w1();
    let b = fc.bundle();
    let (r1, r2) = (b.rrs(1), b.rrs(2));
    let mut worst = rel_diff(&(&r1 + &r2), &eye(b.dim_v()));
    let expected = [(c(1.0, 2.0), 0.5, 0.5), (c(-1.0, 3.0), 1.0, 0.0)];
    for (z, e1, e2) in expected {
        let point = fc
            .spectral()
            .points()
            .iter()
            .find(|pt| (pt.value - z).norm() < WORKED_TOL)
            .expect("eigenvalue of Theta(N)");
        let e = &point.projection;
        worst = worst.max(rel_diff(&(&r1 * e), &(e * c(e1, 0.0))));
        worst = worst.max(rel_diff(&(&r2 * e), &(e * c(e2, 0.0))));
    }
    // The same operators as spectral integrals of p/(p+q) and q/(p+q).
    let (p, q) = (fc.pair().p().clone(), fc.pair().q().clone());
    let ratio = |z: C64, first: bool| {
        let (pv, qv) = (p.eval(z.re), q.eval(z.im));
        c(if first { pv } else { qv } / (pv + qv), 0.0)
    };
    worst = worst.max(rel_diff(&fc.spectral().integrate(|z| ratio(z, true)), &r1));
    worst = worst.max(rel_diff(&fc.spectral().integrate(|z| ratio(z, false)), &r2));
    let projection = fc
        .spectral_projection(&Region::disk(c(1.0, 2.0), 0.5))
        .expect("disk avoids the critical point");
    worst = worst.max(rel_diff(&projection, &diag(&[c(1.0, 0.0), c(0.0, 0.0)])));
    let elapsed = start.elapsed();
    Verdict::new(
        worst <= WORKED_TOL && elapsed < WORKED_BUDGET,
        format!("max residual {worst:.2e} <= {WORKED_TOL:.0e}, {elapsed:.2?} < {WORKED_BUDGET:?}"),
    )
}

fn worked_w2() -> Verdict {
    let start = Instant::now();
    let fc = w2();
    let trivial = fc.bundle().dim_v() == 0;
    let shape = JetShape::a(2, 1).expect("valid shape");
    // Taylor jet of exp(z + iw) at 0: 1 + z + z²/2 + i·w.
    let mut jet = Jet::zero(shape);
    for (k, l, v) in [
        (0, 0, c(1.0, 0.0)),
        (1, 0, c(1.0, 0.0)),
        (2, 0, c(0.5, 0.0)),
        (0, 1, c(0.0, 1.0)),
    ] {
        jet.set(k, l, v).expect("index in shape");
    }
    let point = fc
        .critical_set()
        .locate(c(0.0, 0.0), 1e-9)
        .expect("0 is critical");
    let phi = fc.delta(point, jet).expect("delta at 0");
    let exact_exp = fc.apply(&phi).expect("apply") == eye(2) + fc.pair().n();
    let exact_riesz = fc.riesz_projection(point).expect("riesz") == eye(2);
    let elapsed = start.elapsed();
    Verdict::new(
        trivial && exact_exp && exact_riesz && elapsed < WORKED_BUDGET,
        format!("dim V = 0: {trivial}, exp = I + N: {exact_exp}, riesz = I: {exact_riesz}, {elapsed:.2?}"),
    )
}

fn random_jet(rng: &mut ChaCha8Rng, shape: JetShape) -> Jet {
    let coeffs = (0..shape.len())
        .map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    Jet::from_coeffs(shape, coeffs).expect("length matches shape")
}

fn jet_laws() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut inversions = 0;
    for kind in [JetKind::A, JetKind::B] {
        for m in 1..=3 {
            for n in 1..=3 {
                let shape = JetShape::new(m, n, kind).expect("valid shape");
                let e = Jet::unit(shape);
                for _ in 0..JET_CASES {
                    let (a, b, d) = (
                        random_jet(&mut rng, shape),
                        random_jet(&mut rng, shape),
                        random_jet(&mut rng, shape),
                    );
                    let ab = a.mul(&b).unwrap();
                    let diff = |x: &Jet, y: &Jet| x.sub(y).unwrap().max_abs();
                    worst = worst.max(diff(&ab, &b.mul(&a).unwrap()));
                    worst = worst.max(diff(
                        &ab.mul(&d).unwrap(),
                        &a.mul(&b.mul(&d).unwrap()).unwrap(),
                    ));
                    worst = worst.max(diff(&e.mul(&a).unwrap(), &a));
                    worst = worst.max(diff(&ab.pi(), &a.pi().mul(&b.pi()).unwrap()));
                    worst = worst.max(diff(&a.conj().pi(), &a.pi().conj()));
                    worst = worst.max(diff(&e.pi(), &Jet::unit(e.pi().shape())));
                    if a.head().norm() >= 1e-6 {
                        let inv = a.inverse(Tolerances::default().abs).unwrap();
                        // Residual relative to the size of the factors.
                        let scale = 1.0 + a.max_abs() * inv.max_abs();
                        worst = worst.max(diff(&a.mul(&inv).unwrap(), &e) / scale);
                        inversions += 1;
                    }
                }
            }
        }
    }
    Verdict::new(
        worst <= JET_TOL,
        format!("{JET_CASES} jets x 18 shapes, {inversions} inversions, max residual {worst:.2e} <= {JET_TOL:.0e}"),
    )
}

/// Monic real polynomial of degree 1..=4 with zeros on a half-integer lattice,
/// occasionally repeated.
fn random_real_poly(rng: &mut ChaCha8Rng) -> RealUniPoly {
    loop {
        let mut p = RealUniPoly::constant(1.0);
        let mut degree = 0;
        let target = rng.gen_range(1..=BIPOLY_MAX_DEGREE);
        while degree < target {
            if target - degree >= 2 && rng.gen_bool(0.3) {
                let mu = c(
                    rng.gen_range(-3..=3) as f64 * 0.5,
                    rng.gen_range(1..=3) as f64 * 0.5,
                );
                p = p.mul(&RealUniPoly::conjugate_pair_factor(mu));
                degree += 2;
            } else {
                let root = rng.gen_range(-4..=4) as f64 * 0.5;
                p = p.mul(&RealUniPoly::from_real_roots(&[root]));
                degree += 1;
            }
        }
        if p.degree() >= 1 {
            return p;
        }
    }
}

fn random_bipoly(rng: &mut ChaCha8Rng, dz: usize, dw: usize) -> BiPoly {
    BiPoly::from_terms(
        (0..=dz)
            .flat_map(|i| (0..=dw).map(move |j| (i, j)))
            .map(|(i, j)| {
                (
                    (i, j),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect::<Vec<_>>(),
    )
}

fn bipoly_round_trips() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tol = Tolerances::default();
    let (mut euclid, mut inversion): (f64, f64) = (0.0, 0.0);
    for _ in 0..BIPOLY_CASES {
        let (a, b) = (random_real_poly(&mut rng), random_real_poly(&mut rng));
        let s = random_bipoly(&mut rng, BIPOLY_MAX_DEGREE, BIPOLY_MAX_DEGREE);
        let (u, v, r) = euclid_reduce(&s, &a, &b).unwrap();
        let expanded = BiPoly::from_z(&a)
            .mul(&u)
            .add(&BiPoly::from_w(&b).mul(&v))
            .add(&r);
        euclid = euclid.max(expanded.rel_diff(&s));
        // hermite_interpolate ∘ ϖ = id on admissible degrees, and ϖ ∘ hermite_interpolate = id.
        let grid = ZeroGrid::new(&a, &b, &tol).unwrap();
        let admissible = random_bipoly(&mut rng, a.degree() - 1, b.degree() - 1);
        let targets = varpi(&admissible, &grid);
        let back = hermite_interpolate(&targets, &grid).unwrap().poly;
        inversion = inversion.max(back.rel_diff(&admissible));
        let scale = 1.0 + targets.iter().map(Jet::max_abs).fold(0.0, f64::max);
        for (t, y) in targets.iter().zip(varpi(&back, &grid)) {
            inversion = inversion.max(t.sub(&y).unwrap().max_abs() / scale);
        }
    }
    Verdict::new(
        euclid <= BIPOLY_TOL && inversion <= BIPOLY_TOL,
        format!("{BIPOLY_CASES} cases, euclid {euclid:.2e}, interpolation {inversion:.2e} <= {BIPOLY_TOL:.0e}"),
    )
}

/// The fixed set of generated instances shared by criteria 5–7.
fn instances() -> Vec<Instance> {
    (0..SUITE_INSTANCES)
        .map(|seed| {
            let n = 1 + seed as usize % SUITE_MAX_DIM;
            generate(seed, n, Profile::ALL[seed as usize % Profile::ALL.len()])
        })
        .collect()
}

fn group_verdict(group: Group, tol: f64, budget: Option<Duration>) -> Verdict {
    let instances = instances();
    let start = Instant::now();
    let reports: Vec<Report> = instances
        .iter()
        .map(|inst| run_groups(inst, &[group]))
        .collect();
    let elapsed = start.elapsed();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (inst, report) in instances.iter().zip(&reports) {
        for p in &report.properties {
            worst = worst.max(p.residual);
            if !p.pass || p.residual > tol {
                failures.push(format!("{}:{}", inst.label, p.name));
            }
        }
    }
    let in_budget = budget.is_none_or(|b| elapsed < b);
    let budget_text = budget.map_or(String::new(), |b| format!(" < {b:?}"));
    Verdict::new(
        failures.is_empty() && in_budget,
        format!(
            "{} instances, {} failing properties{}, max residual {worst:.2e} <= {tol:.0e}, {elapsed:.2?}{budget_text}",
            instances.len(),
            failures.len(),
            failures.first().map_or(String::new(), |f| format!(" (first {f})")),
        ),
    )
}

fn embedding_suite() -> Verdict {
    group_verdict(Group::Embedding, EMBEDDING_TOL, Some(EMBEDDING_BUDGET))
}

fn spectral_suite() -> Verdict {
    group_verdict(Group::Spectral, SPECTRAL_TOL, None)
}

fn calculus_suite() -> Verdict {
    group_verdict(Group::Calculus, CALCULUS_TOL, Some(CALCULUS_BUDGET))
}

fn negative_tests() -> Verdict {
    let mut outcomes = Vec::new();
    let non_normal = r#"{"J": [[[1,0],[0,0]],[[0,0],[1,0]]], "N": [[[0,0],[1,0]],[[0,0],[0,0]]], "p": [0,1], "q": [0,1]}"#;
    outcomes.push((
        "not normal",
        matches!(
            Instance::from_json(non_normal),
            Err(Error::NotNormal { .. })
        ),
    ));
    let bad_q = include_str!("../fixtures/w1.json").replace("\"q\": [3, -1]", "\"q\": [-3, 1]");
    outcomes.push((
        "not PSD",
        matches!(Instance::from_json(&bad_q), Err(Error::NotPsd { .. })),
    ));
    // The circle |z − 1| = 1 passes through the critical spectral point 0 of W2.
    let touching = w2().spectral_projection(&Region::disk(c(1.0, 0.0), 1.0));
    outcomes.push((
        "boundary",
        matches!(touching, Err(Error::BoundaryTouchesCritical { .. })),
    ));
    let mut zero_head = Jet::unit(JetShape::a(2, 1).unwrap());
    zero_head.set(0, 0, c(0.0, 0.0)).unwrap();
    outcomes.push((
        "jet inverse",
        matches!(
            zero_head.inverse(Tolerances::default().abs),
            Err(Error::NotInvertible { .. })
        ),
    ));
    let fc = w1();
    let mut phi: CalculusFunction = fc.one();
    phi.set(DomainPoint::Noncritical(0), Jet::scalar(c(0.0, 0.0)))
        .unwrap();
    outcomes.push((
        "function inverse",
        matches!(
            phi.inverse(fc.critical_set(), fc.tol()),
            Err(Error::NonInvertiblePoint { .. })
        ),
    ));
    // A non-normal operator is also rejected when N is given through A and B.
    let a = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    outcomes.push((
        "A, B not selfadjoint",
        Instance::from_json(&format!(
            r#"{{"J": [[[1,0],[0,0]],[[0,0],[1,0]]], "A": {}, "B": [[[0,0],[0,0]],[[0,0],[0,0]]], "p": [0,1], "q": [0,1]}}"#,
            serde_json::to_string(&krein_calculus::harness::io::matrix_to_record(&a)).unwrap()
        ))
        .is_err(),
    ));
    let pass = outcomes.iter().all(|(_, ok)| *ok);
    let detail = outcomes
        .iter()
        .map(|(name, ok)| format!("{name}: {}", if *ok { "raised" } else { "missed" }))
        .collect::<Vec<_>>()
        .join(", ");
    Verdict::new(pass, detail)
}
