//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with a plain `main` so the verdict lines are visible under
//! `cargo test` without `--nocapture`. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ldlcert::bridge::{transform, verify_bridge, BridgeParams, DEFAULT_LAMBDA_SUPPORT};
use ldlcert::correlations::{condition_on_inputs, marginal, postselect, Behavior, JointDistribution, Scenario};
use ldlcert::files::{self, DataFile};
use ldlcert::ldl::{
    enumerate_ld_vertices, enumerate_ldl_vertices, membership_against, separation_margin, Convention,
    DetectionBounds, Efficiencies,
};
use ldlcert::lp::{solve_feasibility, Certificate, FeasibilityProblem, Scalar, SolverOptions};
use ldlcert::mdl::{
    enumerate_input_dist_vertices, enumerate_mdl_vertices, mdl_separation_margin, membership_mdl_against, MdlBounds,
};
use ldlcert::quantum::{apply_detection, born_behavior, hardy_behavior, hardy_measurements, hardy_state};
use ldlcert::strategies::assignment_mix;

/// Margins of every infeasibility certificate produced by the suite.
#[derive(Default)]
struct Ledger {
    float: Vec<(String, Option<f64>)>,
    exact: Vec<(String, Option<BigRational>)>,
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn measured() -> JointDistribution {
    match files::read(&fixture("measured.json")).unwrap() {
        DataFile::Joint(j) => j,
        _ => unreachable!(),
    }
}

fn binary() -> Scenario {
    Scenario::bipartite_binary()
}

fn analyze_cli(extra: &[&str]) -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let t = fixture("measured.json");
    let mut args = vec!["analyze", t.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    let status = Command::new(env!("CARGO_BIN_EXE_ldlcert")).args(&args).output().unwrap().status;
    assert!(status.success(), "analyze exited with {status}");
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

fn c1() -> Verdict {
    let r = analyze_cli(&[])["critical_ratio"].as_f64().unwrap();
    verdict((r - 0.267).abs() <= 0.002, format!("critical_ratio = {r:.7} (target 0.267 ± 0.002)"))
}

fn c2() -> Verdict {
    let t = analyze_cli(&[])["mdl_ldl_threshold"].as_f64().unwrap();
    verdict((t - 0.15529).abs() <= 0.0005, format!("mdl_ldl_threshold = {t:.7} (target 0.15529 ± 0.0005)"))
}

fn c3() -> Verdict {
    let r = analyze_cli(&["--eta-max", "0.5,0.1"]);
    let a = r["required_eta_min"]["0.5"].as_f64().unwrap();
    let b = r["required_eta_min"]["0.1"].as_f64().unwrap();
    verdict(
        (a - 0.134).abs() <= 0.002 && (b - 0.027).abs() <= 0.001,
        format!("required_eta_min = {a:.7} at η_max 0.5 (0.134 ± 0.002), {b:.7} at η_max 0.1 (0.027 ± 0.001)"),
    )
}

fn c4() -> Verdict {
    let b = born_behavior(&hardy_state(), &hardy_measurements());
    let zeros = [b.get(&[0, 1], &[0, 1]), b.get(&[1, 0], &[1, 0]), b.get(&[0, 0], &[1, 1])];
    let p = b.get(&[0, 0], &[0, 0]);
    let ok_zeros = zeros.iter().all(|z| *z < 1e-10);
    let ok_p = (0.0901..=0.0903).contains(&p);
    verdict(
        ok_zeros && ok_p,
        format!(
            "zeros max {:.1e} (< 1e-10: {ok_zeros}); P(00|00) = {p:.7} (required [0.0901, 0.0903]: {ok_p})",
            zeros.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

/// Margin of an LDL dual against every enumerated vertex.
fn ldl_margin<T: Scalar>(vs: &ldlcert::ldl::VertexSet, b: &Behavior, eff: &Efficiencies, dual: &[T]) -> Option<T> {
    separation_margin(vs, b, eff, dual).ok().flatten()
}

fn c5(ledger: &mut Ledger) -> Verdict {
    let h = hardy_behavior();
    let opts = SolverOptions::default();
    let eff = Efficiencies::UniformUnknown;
    let strict = DetectionBounds::per_party(1e-3, 1.0).unwrap();
    let vs = enumerate_ldl_vertices(&binary(), &[strict]).unwrap();
    let m = membership_against::<f64>(&vs, &h, &eff, &opts).unwrap();
    let margin = match &m.certificate {
        Certificate::Infeasible { dual } => {
            let g = ldl_margin(&vs, &h, &eff, dual);
            ledger.float.push(("hardy, η_min = 1e-3".into(), g));
            g
        }
        Certificate::Feasible { .. } => None,
    };
    let exact = membership_against::<BigRational>(&vs, &h, &eff, &opts).unwrap();
    if let Certificate::Infeasible { dual } = &exact.certificate {
        let g = ldl_margin(&vs, &h, &eff, dual);
        ledger.exact.push(("hardy, η_min = 1e-3, exact".into(), g));
    }
    let open = DetectionBounds::per_party(0.0, 1.0).unwrap();
    let vs0 = enumerate_ldl_vertices(&binary(), &[open]).unwrap();
    let feasible = membership_against::<f64>(&vs0, &h, &eff, &opts).unwrap().certificate.is_feasible();
    let verified = margin.is_some_and(|g| g > opts.delta_sep);
    verdict(
        verified && !exact.certificate.is_feasible() && feasible,
        format!(
            "η_min = 1e-3: {} (dual margin {:.3e}, exact {}); η_min = 0: {}",
            if m.certificate.is_feasible() { "feasible" } else { "infeasible" },
            margin.unwrap_or(f64::NAN),
            if exact.certificate.is_feasible() { "feasible" } else { "infeasible" },
            if feasible { "feasible" } else { "infeasible" },
        ),
    )
}

fn c6(ledger: &mut Ledger) -> Verdict {
    let (b, _) = condition_on_inputs(&measured()).unwrap();
    let opts = SolverOptions::default();
    let eff = Efficiencies::UniformUnknown;
    let feasible_at = |r: f64| {
        let bounds = DetectionBounds::per_party(r, 1.0).unwrap();
        let vs = enumerate_ldl_vertices(&binary(), &[bounds]).unwrap();
        membership_against::<f64>(&vs, &b, &eff, &opts).unwrap().certificate.is_feasible()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !feasible_at(lo) || feasible_at(hi) {
        return verdict(false, "no sign change on [0, 1]");
    }
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if feasible_at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let confirm = |r: f64, ledger: &mut Ledger| {
        let bounds = DetectionBounds::per_party(r, 1.0).unwrap();
        let vs = enumerate_ldl_vertices(&binary(), &[bounds]).unwrap();
        let m = membership_against::<BigRational>(&vs, &b, &eff, &opts).unwrap();
        if let Certificate::Infeasible { dual } = &m.certificate {
            let g = ldl_margin(&vs, &b, &eff, dual);
            ledger.exact.push((format!("measured data, ratio {r:.6}, exact"), g));
        }
        m.certificate.is_feasible()
    };
    let lo_ok = confirm(lo, ledger);
    let hi_ok = !confirm(hi, ledger);
    // float dual at the infeasible end, for criterion 10
    {
        let bounds = DetectionBounds::per_party(hi, 1.0).unwrap();
        let vs = enumerate_ldl_vertices(&binary(), &[bounds]).unwrap();
        if let Certificate::Infeasible { dual } = membership_against::<f64>(&vs, &b, &eff, &opts).unwrap().certificate {
            let g = ldl_margin(&vs, &b, &eff, &dual);
            ledger.float.push((format!("measured data, ratio {hi:.6}"), g));
        }
    }
    let flip = 0.5 * (lo + hi);
    let signaling = marginal(&b, 0).unwrap().signaling_deviation().max(marginal(&b, 1).unwrap().signaling_deviation());
    verdict(
        (flip - 0.267).abs() <= 0.005 && lo_ok && hi_ok,
        format!(
            "flip at η_min/η_max = {flip:.5} (target 0.267 ± 0.005); exact confirms feasible at {lo:.6}: {lo_ok}, \
             infeasible at {hi:.6}: {hi_ok}; marginal signaling in the data {signaling:.4}"
        ),
    )
}

/// Independent extremality check: `q` is not a convex combination of the
/// other vertices (exact LP).
fn is_extreme(q: &[BigRational], others: &[&Vec<BigRational>]) -> bool {
    if others.is_empty() {
        return true;
    }
    let n = q.len();
    let mut rows: Vec<Vec<BigRational>> = (0..n).map(|k| others.iter().map(|v| v[k].clone()).collect()).collect();
    rows.push(vec![<BigRational as Scalar>::one(); others.len()]);
    let mut rhs = q.to_vec();
    rhs.push(<BigRational as Scalar>::one());
    let p = FeasibilityProblem::nonnegative(rows, rhs).unwrap();
    !solve_feasibility(&p, &SolverOptions::default()).unwrap().is_feasible()
}

/// Brute-force vertices of `{q : l ≤ q ≤ h, Σq = 1}`: all but at most one
/// coordinate at a bound.
fn brute_input_vertices(n: usize, l: &BigRational, h: &BigRational) -> BTreeSet<Vec<BigRational>> {
    let one = <BigRational as Scalar>::one();
    let mut out = BTreeSet::new();
    for free in 0..=n {
        for mask in 0u32..(1 << n) {
            let mut q: Vec<BigRational> = (0..n).map(|i| if mask >> i & 1 == 1 { h.clone() } else { l.clone() }).collect();
            if free < n {
                let rest: BigRational = q.iter().enumerate().filter(|(i, _)| *i != free).map(|(_, v)| v.clone()).sum();
                q[free] = &one - rest;
            }
            let sum: BigRational = q.iter().cloned().sum();
            if sum == one && q.iter().all(|v| v >= l && v <= h) {
                out.insert(q);
            }
        }
    }
    out
}

fn c7() -> Verdict {
    let single = Scenario::new(vec![2], vec![2]).unwrap();
    let generic = DetectionBounds::per_party(0.2, 0.8).unwrap();
    let n1 = enumerate_ld_vertices(&single, &generic).unwrap().len();
    let n2 = enumerate_ldl_vertices(&binary(), &[generic]).unwrap().len();
    let n3 = enumerate_ldl_vertices(&binary(), &[DetectionBounds::per_party(1.0, 1.0).unwrap()]).unwrap().len();
    let mut mdl_ok = true;
    let mut mdl_counts = Vec::new();
    for (l, h) in [(0.2, 0.3), (0.1, 0.4), (0.0, 1.0), (0.25, 0.25), (0.05, 0.6)] {
        let bounds = MdlBounds::new(l, h).unwrap();
        let verts = enumerate_input_dist_vertices(4, &bounds).unwrap();
        let (le, he) = bounds.exact();
        let brute = brute_input_vertices(4, &le, &he);
        let set: BTreeSet<_> = verts.iter().cloned().collect();
        let extreme = (0..verts.len()).all(|i| {
            let others: Vec<&Vec<BigRational>> = verts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).collect();
            is_extreme(&verts[i], &others)
        });
        mdl_ok &= extreme && set == brute;
        mdl_counts.push(verts.len());
    }
    verdict(
        n1 == 16 && n2 == 256 && n3 == 16 && mdl_ok,
        format!(
            "single-party {n1}, product {n2}, unit efficiency {n3}; MDL input vertices {mdl_counts:?} extremal and complete: {mdl_ok}"
        ),
    )
}

fn c8() -> Verdict {
    let mut failures = Vec::new();
    for (conv, lo, hi) in [(Convention::PerParty, 0.6, 0.95), (Convention::Joint, 0.36, 0.9)] {
        let p = BridgeParams {
            mdl: MdlBounds::new(0.15, 0.4).unwrap(),
            detection: DetectionBounds::new(lo, hi, conv).unwrap(),
        };
        let r = verify_bridge(200, 2024, &binary(), &p, DEFAULT_LAMBDA_SUPPORT).unwrap();
        failures.push(r.failures);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let l = rng.gen_range(0.0..0.25);
        let h = rng.gen_range(0.25..=1.0);
        let a = rng.gen_range(0.01..=1.0);
        let b = rng.gen_range(a..=1.0);
        let mdl = MdlBounds::new(l, h).unwrap();
        let pp = transform(&BridgeParams { mdl, detection: DetectionBounds::new(a, b, Convention::PerParty).unwrap() }).unwrap();
        let jt = transform(&BridgeParams { mdl, detection: DetectionBounds::new(a * a, b * b, Convention::Joint).unwrap() }).unwrap();
        worst = worst.max((pp.bounds.l - jt.bounds.l).abs()).max((pp.bounds.h - jt.bounds.h).abs());
    }
    verdict(
        failures.iter().all(|f| *f == 0) && worst < 1e-12,
        format!("failures per-party {}, joint {}; squaring relation max deviation {worst:.1e}", failures[0], failures[1]),
    )
}

fn random_behavior(rng: &mut ChaCha8Rng) -> Behavior {
    let table: Vec<f64> = (0..4)
        .flat_map(|_| {
            let row: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(move |v| v / s)
        })
        .collect();
    Behavior::new(binary(), table).unwrap()
}

fn pr_box() -> Behavior {
    Behavior::from_fn(binary(), |a, x| if (a[0] ^ a[1]) == (x[0] & x[1]) { 0.5 } else { 0.0 }).unwrap()
}

/// Random mixture of non-signaling extremal behaviors.
fn random_nonsignaling(rng: &mut ChaCha8Rng) -> Behavior {
    let parts = [
        hardy_behavior(),
        pr_box(),
        Behavior::deterministic(binary(), &[vec![rng.gen_range(0..2), rng.gen_range(0..2)], vec![rng.gen_range(0..2), rng.gen_range(0..2)]]).unwrap(),
        Behavior::uniform(binary()),
    ];
    let w: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..1.0)).collect();
    let s: f64 = w.iter().sum();
    let table = (0..16).map(|k| parts.iter().zip(&w).map(|(p, wi)| p.table()[k] * wi / s).sum()).collect();
    Behavior::new(binary(), table).unwrap()
}

fn single_party(rng: &mut ChaCha8Rng) -> Behavior {
    let a = rng.gen_range(0.0..=1.0);
    let b = rng.gen_range(0.0..=1.0);
    Behavior::new(Scenario::new(vec![2], vec![2]).unwrap(), vec![a, 1.0 - a, b, 1.0 - b]).unwrap()
}

fn c9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = [0.0f64; 3];
    for _ in 0..500 {
        let b = random_behavior(&mut rng);
        let etas: Vec<Vec<f64>> = (0..2).map(|_| (0..2).map(|_| rng.gen_range(0.01..=1.0)).collect()).collect();
        let (back, eff) = postselect(&apply_detection(&b, &etas).unwrap()).unwrap();
        for (x, y) in b.table().iter().zip(back.table()) {
            worst[0] = worst[0].max((x - y).abs());
        }
        for xi in 0..4 {
            let x = binary().input_tuple(xi);
            worst[0] = worst[0].max((eff.values()[xi] - etas[0][x[0]] * etas[1][x[1]]).abs());
        }

        let p = random_nonsignaling(&mut rng);
        let eta = rng.gen_range(0.01..=1.0);
        let pure = assignment_mix(&p, eta, 0.0, None, None).unwrap();
        for (x, y) in p.table().iter().zip(pure.table()) {
            worst[1] = worst[1].max((x - y).abs());
        }
        let (la, lb) = (single_party(&mut rng), single_party(&mut rng));
        let full = assignment_mix(&p, eta, 1.0, Some(&la), Some(&lb)).unwrap();
        let (ma, mb) = (marginal(&p, 0).unwrap(), marginal(&p, 1).unwrap());
        for ai in 0..4 {
            for xi in 0..4 {
                let (a, x) = (binary().outcome_tuple(ai), binary().input_tuple(xi));
                let (pa, pb) = (ma.get(a[0], &x), mb.get(a[1], &x));
                let (qa, qb) = (la.get(&[a[0]], &[x[0]]), lb.get(&[a[1]], &[x[1]]));
                let want = eta * eta * p.get(&a, &x) + eta * (1.0 - eta) * (pa * qb + qa * pb) + (1.0 - eta).powi(2) * qa * qb;
                worst[2] = worst[2].max((full.get(&a, &x) - want).abs());
            }
        }
    }
    verdict(
        worst.iter().all(|w| *w <= 1e-12),
        format!(
            "500 cases; max deviation: fair-sampling round trip {:.1e}, η_min_target = 0 {:.1e}, η_min_target = 1 {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn c10(ledger: &mut Ledger) -> Verdict {
    // MDL certificates too
    let j = measured();
    let bounds = MdlBounds::new(0.2, 0.3).unwrap();
    let vs = enumerate_mdl_vertices(j.scenario(), &bounds).unwrap();
    let opts = SolverOptions::default();
    if let Certificate::Infeasible { dual } = membership_mdl_against::<f64>(&vs, &j, &opts).unwrap() {
        ledger.float.push(("measured data, MDL [0.2, 0.3]".into(), mdl_separation_margin(&vs, &j, &dual).ok()));
    }
    if let Certificate::Infeasible { dual } = membership_mdl_against::<BigRational>(&vs, &j, &opts).unwrap() {
        ledger.exact.push(("measured data, MDL [0.2, 0.3], exact".into(), mdl_separation_margin(&vs, &j, &dual).ok()));
    }
    let float_ok = !ledger.float.is_empty() && ledger.float.iter().all(|(_, g)| g.is_some_and(|g| g > 1e-9));
    let exact_ok = !ledger.exact.is_empty() && ledger.exact.iter().all(|(_, g)| g.as_ref().is_some_and(|g| *g > <BigRational as Zero>::zero()));
    let min_float = ledger.float.iter().filter_map(|(_, g)| *g).fold(f64::INFINITY, f64::min);
    let bad: Vec<&str> = ledger
        .float
        .iter()
        .filter(|(_, g)| !g.is_some_and(|g| g > 1e-9))
        .map(|(l, _)| l.as_str())
        .chain(ledger.exact.iter().filter(|(_, g)| !g.as_ref().is_some_and(|g| *g > <BigRational as Zero>::zero())).map(|(l, _)| l.as_str()))
        .collect();
    verdict(
        float_ok && exact_ok,
        format!(
            "{} float duals (min margin {min_float:.3e}), {} exact duals (all > 0: {exact_ok}){}",
            ledger.float.len(),
            ledger.exact.len(),
            if bad.is_empty() { String::new() } else { format!("; unverified: {bad:?}") }
        ),
    )
}

fn main() {
    let mut ledger = Ledger::default();
    let mut results: Vec<(u32, &str, Duration, Verdict)> = Vec::new();
    let mut run = |n: u32, name: &'static str, limit: Duration, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let mut v = f();
        let took = start.elapsed();
        if took > limit {
            v.pass = false;
            v.detail += &format!("; exceeded the {} s budget", limit.as_secs());
        }
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag}  {name} [{:.2} s]: {}", took.as_secs_f64(), v.detail);
        results.push((n, name, took, v));
    };
    let s = Duration::from_secs;
    run(1, "threshold reproduction", s(1), &mut c1);
    run(2, "combined-bound reproduction", s(1), &mut c2);
    run(3, "illustration values", s(1), &mut c3);
    run(4, "Hardy realization", s(1), &mut c4);
    run(5, "arbitrary-η_min violation", s(5), &mut || c5(&mut ledger));
    run(6, "two-sided data check", s(30), &mut || c6(&mut ledger));
    run(7, "vertex-count oracles", s(5), &mut c7);
    run(8, "bridge property suite", s(60), &mut c8);
    run(9, "round-trip invariants", s(10), &mut c9);
    run(10, "certificate soundness", s(30), &mut || c10(&mut ledger));

    let passed = results.iter().filter(|r| r.3.pass).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
