mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use crjet::weights::{log_grid, WeightSequence};
use crjet::{
    finite_order, lie_power_recursive, load_manifold, load_map, map_finite_order, weak_check_first_codim,
    weak_check_hypersurface, CrFrame, Error, Field, GaussianRational, Jet, LieCalculus, ManifoldSpec, MapSpec,
    MultiIndex,
};
use num_rational::Rational64;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    out.pass &= elapsed < limit;
    out.detail = format!("{} ({:.3} s, limit {} s)", out.detail, elapsed.as_secs_f64(), limit.as_secs());
    out
}

// Power series in x = z*zb with Gaussian-rational coefficients, computed by
// long division independently of the jet engine.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Cx(Rational64, Rational64);

impl Cx {
    fn re(n: i64) -> Self {
        Cx(Rational64::from_integer(n), Rational64::from_integer(0))
    }
    fn im(n: i64) -> Self {
        Cx(Rational64::from_integer(0), Rational64::from_integer(n))
    }
    fn mul(self, o: Cx) -> Cx {
        Cx(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn sub(self, o: Cx) -> Cx {
        Cx(self.0 - o.0, self.1 - o.1)
    }
    fn div(self, o: Cx) -> Cx {
        let norm = o.0 * o.0 + o.1 * o.1;
        let inv = Cx(o.0 / norm, -o.1 / norm);
        self.mul(inv)
    }
    fn to_gaussian(self) -> GaussianRational {
        GaussianRational::from_parts((*self.0.numer(), *self.0.denom()), (*self.1.numer(), *self.1.denom()))
    }
}

fn long_division(num: &[Cx], den: &[Cx], len: usize) -> Vec<Cx> {
    let coeff = |v: &[Cx], k: usize| v.get(k).copied().unwrap_or(Cx::re(0));
    let mut q: Vec<Cx> = Vec::with_capacity(len);
    for k in 0..len {
        let mut r = coeff(num, k);
        for j in 1..=k {
            r = r.sub(coeff(den, j).mul(q[k - j]));
        }
        q.push(r.div(den[0]));
    }
    q
}

/// Expected terms `c_k * prefactor * (z zb)^k` of an n = 1, d = 2 series up
/// to total degree `bound`; `shape` maps k to (z exp, zb exp, s1 exp).
fn expected_terms(
    series: &[Cx],
    shape: impl Fn(u32) -> (u32, u32, u32),
    bound: i32,
) -> BTreeMap<MultiIndex, GaussianRational> {
    let mut out = BTreeMap::new();
    for (k, c) in series.iter().enumerate() {
        let (z, zb, s1) = shape(k as u32);
        if (z + zb + s1) as i32 <= bound && *c != Cx::re(0) {
            out.insert(MultiIndex::new(vec![z, zb, s1, 0]), c.to_gaussian());
        }
    }
    out
}

fn matches_series(jet: &Jet, expected: &BTreeMap<MultiIndex, GaussianRational>) -> bool {
    let bound = jet.bound();
    let stored: BTreeMap<MultiIndex, GaussianRational> =
        jet.terms().filter(|(m, _)| m.degree() as i32 <= bound).map(|(m, c)| (m.clone(), c.clone())).collect();
    &stored == expected
}

fn criterion_1() -> Outcome {
    timed(Duration::from_secs(1), || {
        let m = ManifoldSpec::parse(1, 2, 8, &["s1*z1*zb1", "s2*z1*zb1"], None).unwrap();
        let calc = LieCalculus::new(CrFrame::build(&m).unwrap());
        let frame = calc.frame();
        let e1 = MultiIndex::new(vec![1]);
        let row = calc.lie_power(&e1, 0).unwrap();
        let zero = MultiIndex::new(vec![0]);
        let d = calc.multiplier_det(&[zero.clone(), zero, e1], &[0, 1, 0]).unwrap();

        let len = 8;
        // 1/(1 + i x)
        let geometric = long_division(&[Cx::re(1)], &[Cx::re(1), Cx::im(1)], len);
        // (1 - x^2)/(1 + x^2)^2
        let quotient =
            long_division(&[Cx::re(1), Cx::re(0), Cx::re(-1)], &[Cx::re(1), Cx::re(0), Cx::re(2), Cx::re(0), Cx::re(1)], len);
        let scaled = |s: &[Cx], c: Cx| s.iter().map(|q| c.mul(*q)).collect::<Vec<_>>();

        let b = frame.b(0, 0);
        let b_ok = matches_series(b, &expected_terms(&scaled(&geometric, Cx::im(1)), |k| (k + 1, k, 1), b.bound()));
        let t1_ok = matches_series(
            &row.t[0],
            &expected_terms(&scaled(&geometric, Cx::im(-1)), |k| (k + 1, k, 0), row.t[0].bound()),
        );
        let t2_ok = row.t[1].is_zero();
        let a_series = scaled(&quotient, Cx::im(-2));
        let a_ok = matches_series(&row.a[0], &expected_terms(&a_series, |k| (k, k, 1), row.a[0].bound()));
        let d_ok = matches_series(&d, &expected_terms(&a_series, |k| (k, k, 1), d.bound()));
        let depth = [b.bound(), row.t[0].bound(), row.a[0].bound(), d.bound()];
        let deep_enough = depth.iter().all(|&v| v >= 5);
        outcome(
            b_ok && t1_ok && t2_ok && a_ok && d_ok && deep_enough,
            format!(
                "C3 oracle: b {b_ok}, T1 {t1_ok}, T2 {t2_ok}, A1 {a_ok}, D {d_ok}; exact through degrees {depth:?}"
            ),
        )
    })
}

fn criterion_2() -> Outcome {
    timed(Duration::from_secs(1), || {
        let sphere = finite_order(&load_manifold(data("sphere.cr")).unwrap(), 2).unwrap();
        let minus_2i = GaussianRational::from_parts((0, 1), (-2, 1));
        let sphere_ok = sphere.k0 == Some(1) && sphere.witnesses.first().map(|w| &w.value_at_0) == Some(&minus_2i);
        let flat = finite_order(&load_manifold(data("flat.cr")).unwrap(), 4).unwrap();
        let flat_ok = flat.k0.is_none() && flat.ranks.len() == 5 && flat.ranks.iter().all(|&(_, r)| r == 1);
        outcome(
            sphere_ok && flat_ok,
            format!("sphere k0 = {:?} with witness -2i: {sphere_ok}; flat ranks {:?}, k0 = {:?}", sphere.k0, flat.ranks, flat.k0),
        )
    })
}

const CORPUS_SEED: u64 = 0x5eed_c0de;
const CORPUS_SIZE: usize = 50;

fn criterion_3() -> Outcome {
    timed(Duration::from_secs(30), || {
        let corpus = common::random_corpus(CORPUS_SEED, CORPUS_SIZE, 5);
        let mut rows = 0;
        let mut mismatches = 0;
        for m in &corpus {
            let calc = LieCalculus::new(CrFrame::build(m).unwrap());
            let sig = m.sig();
            for alpha in MultiIndex::all_up_to(sig.n(), 3) {
                for mu in 0..sig.d() {
                    let a = calc.lie_power(&alpha, mu).unwrap();
                    let b = lie_power_recursive(calc.frame(), &alpha, mu).unwrap();
                    rows += 1;
                    let same = a.entries().zip(b.entries()).all(|(x, y)| x.agrees_with(y) && x.bound() >= 0);
                    if !same {
                        mismatches += 1;
                    }
                }
            }
        }
        outcome(
            mismatches == 0 && corpus.len() >= 50,
            format!("iterated vs recursive rows: {rows} compared over {} manifolds, {mismatches} mismatches", corpus.len()),
        )
    })
}

fn criterion_4() -> Outcome {
    timed(Duration::from_secs(30), || {
        let corpus = common::random_corpus(CORPUS_SEED, CORPUS_SIZE, 5);
        let (mut integrability, mut antisymmetry, mut annihilation) = (0, 0, 0);
        let mut checks = 0;
        for m in &corpus {
            let f = CrFrame::build(m).unwrap();
            let (n, d) = (m.sig().n(), m.sig().d());
            for mu in 0..d {
                for j in 0..n {
                    for k in 0..n {
                        checks += 1;
                        let lhs = f.apply_l(j, f.b(k, mu)).unwrap();
                        let rhs = f.apply_l(k, f.b(j, mu)).unwrap();
                        if !lhs.agrees_with(&rhs) {
                            integrability += 1;
                        }
                        if !f.lambda(j, k, mu).conjugate().agrees_with(&-f.lambda(k, j, mu)) {
                            antisymmetry += 1;
                        }
                    }
                    for field in [Field::L(j), Field::Lbar(j)] {
                        let p = f.pair_theta(mu, field).unwrap();
                        if !p.is_zero() {
                            annihilation += 1;
                        }
                    }
                }
            }
        }
        outcome(
            integrability + antisymmetry + annihilation == 0,
            format!(
                "frame identities over {checks} index triples: integrability failures {integrability}, \
                 antisymmetry failures {antisymmetry}, theta pairing failures {annihilation}"
            ),
        )
    })
}

fn criterion_5() -> Outcome {
    let weak = load_manifold(data("weak_hypersurface.cr")).unwrap();
    let finite = finite_order(&weak, 3).unwrap();
    let weak_report = weak_check_hypersurface(&weak, 3).unwrap();
    let c3 = load_manifold(data("c3_example.cr")).unwrap();
    let gamma = weak_check_first_codim(&c3, 3);
    let gamma_ok = matches!(gamma, Err(Error::GammaConstraintViolated(_)));
    outcome(
        finite.k0.is_none() && weak_report.k0 == Some(1) && gamma_ok,
        format!(
            "s|z|^2: finite k0 = {:?} up to 3, weak k0 = {:?}; C3 first-codimension check rejected: {gamma_ok}",
            finite.k0, weak_report.k0
        ),
    )
}

fn criterion_6() -> Outcome {
    let sphere = load_manifold(data("sphere.cr")).unwrap();
    let manifold_k0 = finite_order(&sphere, 3).unwrap().k0;
    let from_file = map_finite_order(&load_map(data("sphere_identity_map.cr")).unwrap(), 3).unwrap().k0;
    let built = map_finite_order(&MapSpec::identity(&sphere).unwrap(), 3).unwrap().k0;
    let constant = map_finite_order(&load_map(data("constant_map.cr")).unwrap(), 4).unwrap();
    outcome(
        from_file == Some(1) && built == manifold_k0 && from_file == manifold_k0 && constant.k0.is_none(),
        format!(
            "identity map k0 = {from_file:?} (built {built:?}), manifold k0 = {manifold_k0:?}; constant map ranks {:?}",
            constant.ranks
        ),
    )
}

fn criterion_7a() -> Outcome {
    let s = WeightSequence::gevrey(1.0).unwrap().quasianalytic_diag(100).unwrap().s_k;
    let oracle: f64 = (1..=100u32).map(|k| 1.0 / f64::from(k * k)).sum();
    let pass = (s - 1.634984).abs() < 1e-6 && (s - oracle).abs() < 1e-12;
    outcome(pass, format!("gevrey(1) S_100 = {s:.12}, direct sum {oracle:.12}, target 1.634984 +- 1e-6"))
}

fn criterion_7b() -> Outcome {
    let h = WeightSequence::gevrey(1.0).unwrap().assoc_weight((-1.0f64).exp()).unwrap();
    let target = 2.0 * (-2.0f64).exp();
    outcome((h - target).abs() < 1e-9, format!("gevrey(1) h(1/e) = {h:.12}, target 2e^-2 = {target:.12} +- 1e-9"))
}

fn criterion_7c() -> Outcome {
    let w = WeightSequence::gevrey(1.0).unwrap();
    let grid = log_grid(1e-6, 1.0, 10_000);
    let targets = [1.0, 1.0, 2.0];
    let values: Vec<f64> = (0..3).map(|k| w.recover_mk(k, &grid).unwrap().value).collect();
    let pass = values.iter().zip(targets).all(|(v, t)| (v - t).abs() <= 0.01 * t);
    outcome(pass, format!("gevrey(1) recovered m_0..m_2 = {values:.6?}, targets {targets:?} within 1%"))
}

fn criterion_7d() -> Outcome {
    let r = WeightSequence::constant().check_regular(50).unwrap();
    outcome(!r.m4.pass, format!("constant sequence M4 verdict: {}", if r.m4.pass { "pass" } else { "fail" }))
}

fn criterion_7e() -> Outcome {
    let terms = 100_000;
    let q1 = WeightSequence::log_pow(1.0).unwrap().quasianalytic_diag(terms).unwrap();
    let q2 = WeightSequence::log_pow(2.0).unwrap().quasianalytic_diag(terms).unwrap();
    let factor = q1.increment_ratio / q2.increment_ratio;
    let tails = (q1.s_k - q1.s_half) / (q2.s_k - q2.s_half);
    outcome(
        factor > 5.0,
        format!(
            "log_pow increment ratios at K = {terms}: sigma=1 {:.4}, sigma=2 {:.4}, separation {factor:.4} (need > 5); \
             tail increments differ by {tails:.2}x",
            q1.increment_ratio, q2.increment_ratio
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7a", criterion_7a),
        ("7b", criterion_7b),
        ("7c", criterion_7c),
        ("7d", criterion_7d),
        ("7e", criterion_7e),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut weights_time = Duration::ZERO;
    for (id, run) in criteria {
        let t = Instant::now();
        let out = run();
        if id.starts_with('7') {
            weights_time += t.elapsed();
        }
        println!("{} criterion {id}: {}", if out.pass { "PASS" } else { "FAIL" }, out.detail);
        if !out.pass {
            failed.push(id);
        }
    }
    let weights_ok = weights_time < Duration::from_secs(10);
    println!(
        "{} criterion 7 runtime: {:.3} s (limit 10 s)",
        if weights_ok { "PASS" } else { "FAIL" },
        weights_time.as_secs_f64()
    );
    if !weights_ok {
        failed.push("7 runtime");
    }
    println!("acceptance: {} failed {failed:?}, total {:.2} s", failed.len(), start.elapsed().as_secs_f64());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
