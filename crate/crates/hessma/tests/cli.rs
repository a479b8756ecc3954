use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use hessma::cli::run;
use hessma::io::{
    read_grid_csv, read_json, read_partition_csv, BinnedMassesFile, ExactMassesFile, FlatReportFile, MeasureFile, SolutionFile,
};
use hessma::manifest::RunManifest;
use serde_json::{json, Value};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(tag: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::SeqCst);
    let dir = std::env::temp_dir().join(format!("hessma-cli-{}-{tag}-{n}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn hessma(args: &[&str], input: Option<&Path>, out: &Path) -> i32 {
    let mut full: Vec<String> = vec!["hessma".into()];
    full.extend(args.iter().map(|s| s.to_string()));
    if let Some(p) = input {
        full.push("--input".into());
        full.push(p.display().to_string());
    }
    full.push("--out-dir".into());
    full.push(out.display().to_string());
    run(full)
}

fn json_value(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn cosine() -> Value {
    json!({"type": "cosine", "c0": 1.0, "terms": [{"freq": [1], "amp": 0.5}]})
}

fn zero_csv(dir: &Path, m: usize) -> PathBuf {
    let mut s = String::from("x0,value\n");
    for j in 0..m {
        s.push_str(&format!("{},0\n", -0.5 + j as f64 / m as f64));
    }
    let p = dir.join("zero.csv");
    fs::write(&p, s).unwrap();
    p
}

#[test]
fn twisted_single_atom() {
    let d = scratch("single");
    let input = write(&d, "p.json", &json!({"dim": 1, "atoms": [{"point": [0.0], "weight": 1.0}]}));
    assert_eq!(hessma(&["solve-twisted", "--svg"], Some(&input), &d.join("out")), 0);
    let sol: SolutionFile = read_json(&d.join("out/solution.json")).unwrap();
    assert!(sol.converged);
    assert!(sol.values[0].abs() <= 1e-6);
    let g = read_grid_csv(&d.join("out/samples.csv")).unwrap();
    for i in 0..g.values().len() {
        let x = g.node(i)[0];
        assert!((g.values()[i] - (x.abs() / 2.0 - x * x / 2.0)).abs() <= 1e-9);
    }
    assert!(fs::read_to_string(d.join("out/plot.svg")).unwrap().contains("<polyline"));
    let m: RunManifest = read_json(&d.join("out/manifest.json")).unwrap();
    assert_eq!(m.command, "solve-twisted");
}

#[test]
fn missing_atoms_is_input_error() {
    let d = scratch("missing");
    let input = write(&d, "p.json", &json!({"dim": 1}));
    assert_eq!(hessma(&["solve-twisted"], Some(&input), &d.join("out")), 1);
    assert!(d.join("out/manifest.json").exists());
}

#[test]
fn iteration_cap_is_convergence_failure_with_partial_output() {
    let d = scratch("cap");
    let input = write(&d, "p.json", &json!({"dim": 1, "atoms": [{"point": [0.0], "weight": 0.3}, {"point": [0.5], "weight": 0.7}]}));
    assert_eq!(hessma(&["solve-twisted", "--max-iter", "1"], Some(&input), &d.join("out")), 2);
    let sol: SolutionFile = read_json(&d.join("out/solution.json")).unwrap();
    assert!(!sol.converged);
    assert_eq!(sol.iterations, 1);
}

#[test]
fn flat_constants() {
    let d = scratch("flat");
    let cos = write(&d, "cos.json", &json!({"dim": 1, "atoms": [{"point": [0.0], "weight": 1.0}], "density": cosine()}));
    assert_eq!(hessma(&["solve-flat", "--eps-min", "1e-3"], Some(&cos), &d.join("a")), 0);
    let r: FlatReportFile = read_json(&d.join("a/flat_report.json")).unwrap();
    assert!((r.c - 1.5).abs() <= 1e-3, "{}", r.c);
    assert!(r.spread_ok);

    let flat = write(&d, "flat.json", &json!({"dim": 1, "atoms": [{"point": [0.0], "weight": 0.5}, {"point": [0.5], "weight": 0.5}]}));
    assert_eq!(hessma(&["solve-flat"], Some(&flat), &d.join("b")), 0);
    let r: FlatReportFile = read_json(&d.join("b/flat_report.json")).unwrap();
    assert!((r.c - 1.0).abs() <= 1e-3, "{}", r.c);

    assert_eq!(hessma(&["solve-flat", "--eps-min", "0"], Some(&cos), &d.join("c")), 1);
}

#[test]
fn slopes_of_zero_function_are_uniform() {
    let d = scratch("zero");
    let input = zero_csv(&d, 64);
    let out = d.join("out");
    assert_eq!(hessma(&["measure", "--oracle", "slopes", "--bins", "4", "--samples", "20000"], Some(&input), &out), 0);
    let m: BinnedMassesFile = read_json(&out.join("masses.json")).unwrap();
    assert_eq!(m.masses.len(), 4);
    for (mass, se) in m.masses.iter().zip(&m.stderr) {
        assert!((mass - 0.25).abs() <= 3.0 * se + 1e-12, "{mass} ± {se}");
    }
    let rows = read_partition_csv(&out.join("partition.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().map(|r| r.mass).collect::<Vec<_>>(), m.masses);
    assert_eq!(hessma(&["measure", "--oracle", "exact"], Some(&input), &d.join("bad")), 1);
}

#[test]
fn exact_masses_and_cells() {
    let d = scratch("exact");
    let two = write(&d, "two.json", &json!({"sites": [[0.0], [0.5]], "values": [0.0, 0.0]}));
    assert_eq!(hessma(&["measure"], Some(&two), &d.join("a")), 0);
    let m: ExactMassesFile = read_json(&d.join("a/masses.json")).unwrap();
    assert_eq!(m.masses.len(), 2);
    for h in &m.masses {
        assert!((h - 0.5).abs() <= 1e-12);
    }

    let three = write(&d, "three.json", &json!({"sites": [[0.0, 0.0], [0.25, 0.5], [-0.25, 0.25]], "values": [0.0, 0.0, 0.0]}));
    assert_eq!(hessma(&["measure", "--svg"], Some(&three), &d.join("b")), 0);
    let svg = fs::read_to_string(d.join("b/plot.svg")).unwrap();
    assert_eq!(svg.matches("class=\"cell\"").count(), 3);
    let m: ExactMassesFile = read_json(&d.join("b/masses.json")).unwrap();
    assert!((m.total - 1.0).abs() <= 1e-9);
}

#[test]
fn verify_suites() {
    let d = scratch("verify");
    assert_eq!(hessma(&["verify", "--suite", "oracles", "--samples", "1000"], None, &d.join("a")), 0);
    let report = json_value(&d.join("a/verify_report.json"));
    assert_eq!(report["pass"], json!(true));
    assert!(report["properties"].as_array().unwrap().len() >= 3);
    assert_eq!(hessma(&["verify", "--suite", "nonsense"], None, &d.join("b")), 1);
}

#[test]
fn regularize_paths() {
    let d = scratch("reg");
    let single = write(&d, "single.json", &json!({"sites": [[0.0]], "values": [0.0]}));
    assert_eq!(hessma(&["regularize", "--eps", "1e-2"], Some(&single), &d.join("a")), 0);
    let r = json_value(&d.join("a/regularize_report.json"));
    let c = r["constant"].as_f64().unwrap();
    assert!(c > 0.0 && c < 1.0, "{c}");

    assert_eq!(hessma(&["regularize", "--eps", "1e-3"], Some(&single), &d.join("charts")), 0);
    assert_eq!(hessma(&["regularize", "--eps", "1e-3", "--method", "global"], Some(&single), &d.join("global")), 0);
    let g1 = read_grid_csv(&d.join("charts/samples.csv")).unwrap();
    let g2 = read_grid_csv(&d.join("global/samples.csv")).unwrap();
    assert!(g1.sup_distance(&g2).unwrap() <= 5e-3);

    let mut s = String::from("x0,value\n");
    for j in 0..256 {
        let x = -0.5 + j as f64 / 256.0;
        s.push_str(&format!("{x},{}\n", 0.3 * (2.0 * std::f64::consts::PI * x).cos()));
    }
    let wavy = d.join("wavy.csv");
    fs::write(&wavy, s).unwrap();
    assert_eq!(hessma(&["regularize", "--eps", "1e-2"], Some(&wavy), &d.join("c")), 2);
    assert_eq!(hessma(&["regularize", "--eps", "0.3"], Some(&single), &d.join("e")), 1);
}

#[test]
fn quantize_examples() {
    let d = scratch("quant");
    let leb = write(&d, "leb.json", &json!({"dim": 1}));
    assert_eq!(hessma(&["quantize", "--atoms", "4"], Some(&leb), &d.join("a")), 0);
    let m: MeasureFile = read_json(&d.join("a/measure.json")).unwrap();
    let mut pts: Vec<f64> = m.atoms.iter().map(|a| a.point[0]).collect();
    pts.sort_by(f64::total_cmp);
    for (p, want) in pts.iter().zip([-0.375, -0.125, 0.125, 0.375]) {
        assert!((p - want).abs() <= 1e-12);
    }
    assert!(m.atoms.iter().all(|a| (a.weight - 0.25).abs() <= 1e-12));

    let spike = write(&d, "spike.json", &json!({"dim": 1, "samples": [{"point": [0.1], "weight": 1.0}]}));
    assert_eq!(hessma(&["quantize", "--atoms", "4"], Some(&spike), &d.join("b")), 0);
    let m: MeasureFile = read_json(&d.join("b/measure.json")).unwrap();
    assert_eq!(m.atoms.len(), 1);
    assert!((m.atoms[0].point[0] - 0.1).abs() <= 1e-12);

    let cos = write(&d, "cos.json", &json!({"dim": 1, "density": cosine()}));
    assert_eq!(hessma(&["quantize", "--atoms", "4"], Some(&cos), &d.join("c")), 0);
    let m: MeasureFile = read_json(&d.join("c/measure.json")).unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    for a in &m.atoms {
        let (lo, hi) = (a.point[0] - 0.125, a.point[0] + 0.125);
        let want = (hi - lo) + 0.5 * ((tau * hi).sin() - (tau * lo).sin()) / tau;
        assert!((a.weight - want).abs() <= 1e-12, "{} vs {want}", a.weight);
    }
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn reruns_are_byte_identical() {
    let d = scratch("rerun");
    let problem = write(
        &d,
        "p.json",
        &json!({"dim": 1, "atoms": [{"point": [-0.3], "weight": 0.2}, {"point": [0.1], "weight": 0.8}], "density": cosine()}),
    );
    let zero = zero_csv(&d, 64);
    let runs: [(&[&str], &Path); 3] = [
        (&["solve-twisted", "--svg"], &problem),
        (&["solve-flat"], &problem),
        (&["measure", "--oracle", "slopes", "--bins", "8", "--samples", "5000"], &zero),
    ];
    for (k, (args, input)) in runs.iter().enumerate() {
        let (a, b) = (d.join(format!("{k}a")), d.join(format!("{k}b")));
        assert_eq!(hessma(args, Some(input), &a), 0);
        assert_eq!(hessma(args, Some(input), &b), 0);
        let (fa, fb) = (output_files(&a), output_files(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{args:?}");
    }
}

#[test]
fn solution_round_trips_as_input() {
    let d = scratch("round");
    let problem = write(&d, "p.json", &json!({"dim": 1, "atoms": [{"point": [0.0], "weight": 0.5}, {"point": [0.5], "weight": 0.5}]}));
    assert_eq!(hessma(&["solve-twisted"], Some(&problem), &d.join("a")), 0);
    // The solution's samples feed straight back into the slope oracle.
    let samples = d.join("a/samples.csv");
    assert_eq!(hessma(&["measure", "--oracle", "slopes", "--bins", "2", "--samples", "20000"], Some(&samples), &d.join("b")), 0);
    let m: BinnedMassesFile = read_json(&d.join("b/masses.json")).unwrap();
    assert!((m.total - 1.0).abs() <= 1e-9);
}
