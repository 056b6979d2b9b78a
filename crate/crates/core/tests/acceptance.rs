//! Acceptance battery; prints one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use bmtransform::experiments::{run_experiment, ExperimentId, ExperimentSpec};
use bmtransform::functionals::QuadRule;
use bmtransform::stattests::ks_statistic;
use serde_json::Value;

type Outcome = (bool, String);

fn single_worker<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn run_cli(workers: usize, out: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_bmtransform"))
        .args(["run", "--id", "all", "--seed", "42", "--workers", &workers.to_string(), "--out"])
        .arg(out)
        .status()
        .expect("binary runs")
        .code()
        .unwrap_or(-1)
}

fn load(dir: &Path, id: ExperimentId) -> Value {
    let text = std::fs::read_to_string(dir.join(format!("{}.json", id.name()))).expect("report written");
    serde_json::from_str(&text).unwrap()
}

fn tests_of(r: &Value) -> &Vec<Value> {
    r["tests"].as_array().unwrap()
}

fn with_prefix<'a>(r: &'a Value, p: &str) -> Vec<&'a Value> {
    tests_of(r).iter().filter(|t| t["test_name"].as_str().unwrap().starts_with(p)).collect()
}

fn p(t: &Value) -> f64 {
    t["p_value"].as_f64().unwrap_or(f64::NAN)
}

fn wall(r: &Value) -> f64 {
    r["wall_time_s"].as_f64().unwrap()
}

fn min_p(ts: &[&Value]) -> f64 {
    ts.iter().map(|t| p(t)).fold(1.0, f64::min)
}

/// KS on every marginal at 0.001, Bonferroni at `alpha / m`, energy at 0.01.
fn battery_ok(r: &Value) -> (bool, String) {
    let ks = with_prefix(r, "ks:");
    let bonf = with_prefix(r, "bonferroni");
    let energy = with_prefix(r, "energy");
    let ok = !ks.is_empty()
        && ks.iter().all(|t| p(t) >= 0.001)
        && bonf.iter().all(|t| t["pass"] == true)
        && energy.iter().all(|t| p(t) >= 0.01 && t["details"]["n_permutations"] == 500);
    let e = energy.first().map(|t| p(t)).unwrap_or(f64::NAN);
    (ok, format!("{} KS min p {:.4}, energy p {:.4}", ks.len(), min_p(&ks), e))
}

fn criterion_1() -> Outcome {
    let spec = ExperimentSpec::for_id(ExperimentId::AlgSuite);
    let start = Instant::now();
    let r = single_worker(|| run_experiment(&spec)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let laws = r.tests.iter().filter(|t| t.test_name.starts_with("law:")).count();
    let max = r.test("max_residual").unwrap().statistic;
    let ok = r.overall_pass && laws == 17 && max <= 1e-9 && secs < 10.0
        && spec.n_paths == 100 && spec.n_steps == 1024 && spec.seed == 7;
    (ok, format!("17 laws x 100 paths x 10 draws, max residual {max:.3e}, {secs:.1}s"))
}

fn criterion_2(dir: &Path) -> Outcome {
    let r = load(dir, ExperimentId::ThmMain);
    let (ok, msg) = battery_ok(&r);
    let ks = with_prefix(&r, "ks:").len();
    let neg = ExperimentSpec { negative_control: true, ..ExperimentSpec::for_id(ExperimentId::ThmMain) };
    let nr = single_worker(|| run_experiment(&neg)).unwrap();
    let neg_p = nr.min_p_value().unwrap();
    let pass = ok && ks == 5 && r["overall_pass"] == true && wall(&r) < 60.0 && neg_p < 1e-6;
    (pass, format!("{msg}, {:.1}s; control min p {neg_p:.2e}", wall(&r)))
}

fn criterion_3(dir: &Path) -> Outcome {
    let r = load(dir, ExperimentId::ThmMainPrime);
    let (ok, msg) = battery_ok(&r);
    let mean = with_prefix(&r, "weighted:mean");
    let z = mean.first().map(|t| t["details"]["z"].as_f64().unwrap()).unwrap_or(f64::NAN);
    let pass = ok && mean.len() == 1 && mean[0]["pass"] == true && z.abs() <= 3.0;
    (pass, format!("{msg}; mean gap at {z:.2} combined SE"))
}

fn single(dir: &Path, id: ExperimentId) -> Outcome {
    let r = load(dir, id);
    let ks = with_prefix(&r, "ks:");
    let t = ks[0];
    let pass = ks.len() == 1 && p(t) >= 0.001 && t["n_lhs"] == 100_000 && t["n_rhs"] == 100_000;
    (pass, format!("KS p {:.4}, n = {} per side", p(t), t["n_lhs"]))
}

fn criterion_5(dir: &Path) -> Outcome {
    let r = load(dir, ExperimentId::Dufresne);
    let (ok, msg) = single(dir, ExperimentId::Dufresne);
    let s = &r["spec"];
    (ok && s["mu"] == 1.0 && s["truncation_T"] == 30.0, format!("{msg}, mu 1, T 30"))
}

const JOINT: [ExperimentId; 10] = [
    ExperimentId::CorMain,
    ExperimentId::PropOppdg,
    ExperimentId::PropPinv1,
    ExperimentId::PropPinv2,
    ExperimentId::PropPinvLimit,
    ExperimentId::PropPdii,
    ExperimentId::LemmaCsym,
    ExperimentId::BridgeTbb,
    ExperimentId::PropPsdiI,
    ExperimentId::PropPsdiII,
];

fn criterion_6(dir: &Path) -> Outcome {
    let mut failed = Vec::new();
    let mut slowest = 0.0f64;
    for id in JOINT {
        let r = load(dir, id);
        let (ok, _) = battery_ok(&r);
        slowest = slowest.max(wall(&r));
        if !(ok && r["overall_pass"] == true && wall(&r) < 120.0) {
            failed.push(id.name());
        }
    }
    let msg = if failed.is_empty() {
        format!("{} experiments, slowest {slowest:.1}s", JOINT.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    (failed.is_empty(), msg)
}

fn criterion_7(dir: &Path) -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (id, combos) in [
        (ExperimentId::PropPinvr1, 2),
        (ExperimentId::PropPinvr2, 2),
        (ExperimentId::DriftedTalpha, 4),
    ] {
        let r = load(dir, id);
        let w = with_prefix(&r, "weighted:");
        let ident = with_prefix(&r, "weight_identity:");
        ok &= w.len() == 3 * combos && ident.len() == combos / 2;
        ok &= ident.iter().all(|t| t["pass"] == true && t["statistic"].as_f64().unwrap() <= 1e-12);
        for t in &w {
            ok &= t["pass"] == true && t["threshold"] == 3.0 && t["n_lhs"] == 200_000;
            worst = worst.max(t["details"]["z"].as_f64().unwrap().abs());
            count += 1;
        }
        if id == ExperimentId::DriftedTalpha {
            ok &= w.iter().any(|t| t["test_name"].as_str().unwrap().ends_with("mu=0.5"));
            ok &= w.iter().any(|t| t["test_name"].as_str().unwrap().ends_with("mu=1"));
        }
    }
    (ok, format!("{count} weighted comparisons, largest |z| {worst:.2}"))
}

fn criterion_8() -> Outcome {
    let (coarse, fine) = common::propagation_gap_rms(1000, 256, 2048, 808);
    let order = (coarse / fine).ln() / 8f64.ln();
    let a: Vec<f64> = [256usize, 512, 1024]
        .iter()
        .map(|&n| common::deterministic(n, QuadRule::Trapezoid, |s| s).terminal_a())
        .collect();
    let smooth = ((a[0] - a[1]) / (a[1] - a[2])).abs().log2();
    (order >= 0.5 && smooth >= 1.9, format!("Brownian order {order:.2}, ramp trapezoid order {smooth:.2}"))
}

fn criterion_9() -> Outcome {
    let frac = common::ks_null_fraction(200, 1000, 909);
    let d = ks_statistic(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]);
    let ok = (0.04..=0.18).contains(&frac) && d == 1.0 / 3.0;
    (ok, format!("null fraction p<0.1 = {frac:.3}, hand oracle D = {d}"))
}

fn strip_wall_time(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let kept: Vec<&str> = text.lines().filter(|l| !l.contains("\"wall_time_s\"")).collect();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), kept.join("\n"));
    }
    out
}

fn criterion_10(one: &Path, eight: &Path) -> Outcome {
    let a = strip_wall_time(one);
    let b = strip_wall_time(eight);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    // the summary records the worker count itself
    let differing: Vec<&&String> = differing.iter().filter(|k| k.as_str() != "summary.json").collect();
    let ok = a.len() == 20 && a.len() == b.len() && differing.is_empty();
    (ok, format!("{} files compared, {} differ", a.len(), differing.len()))
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let one = tmp.path().join("workers1");
    let eight = tmp.path().join("workers8");
    let code1 = run_cli(1, &one);

    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("exact transform algebra", criterion_1()));
    results.push(("invariance under T~ with negative control", criterion_2(&one)));
    results.push(("reciprocal functional form and mean check", criterion_3(&one)));
    results.push(("Bougerol identity", single(&one, ExperimentId::Bougerol)));
    results.push(("Dufresne identity", criterion_5(&one)));
    results.push(("joint-law experiments", criterion_6(&one)));
    results.push(("change-of-measure identities", criterion_7(&one)));
    results.push(("quadrature consistency", criterion_8()));
    results.push(("statistical calibration", criterion_9()));
    let code8 = run_cli(8, &eight);
    let (ok10, msg10) = criterion_10(&one, &eight);
    results.push(("reproducibility across worker counts", (ok10, format!("{msg10}; exit codes {code1}/{code8}"))));

    let mut all = true;
    for (i, (name, (ok, detail))) in results.iter().enumerate() {
        all &= ok;
        println!("criterion {:>2} {} {name}: {detail}", i + 1, if *ok { "PASS" } else { "FAIL" });
    }
    if !all {
        std::process::exit(1);
    }
}
