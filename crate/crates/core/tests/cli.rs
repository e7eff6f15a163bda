use std::fs;
use std::process::{Command, Output};

use gauss_spectral::grid::{GridFunction, Rule};
use num_complex::Complex64;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauss-spectral"))
        .args(args)
        .env_remove("GAUSS_SPECTRAL_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scalar_examples() {
    let o = run(&["hurwitz", "--s", "2,0", "--z", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.6449340668");
    let o = run(&["lambda1", "--t", "1.0", "--tol", "1e-10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.0000000000");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["hurwitz", "--s", "2,0", "--z", "1", "--bogus"]).status.code(), Some(64));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(run(&["hurwitz", "--s", "2,0,1", "--z", "1"]).status.code(), Some(64));
    // Domain and pole errors.
    assert_eq!(run(&["lambda1", "--t", "0.3"]).status.code(), Some(1));
    assert_eq!(run(&["hurwitz", "--s", "1,0", "--z", "1"]).status.code(), Some(1));
    assert_eq!(run(&["dets", "--beta", "0.5,0"]).status.code(), Some(1));
    // Newton far from any zero fails the bracket test.
    assert_eq!(run(&["find-zero", "--beta", "3,0", "--which", "minus", "--dim", "16"]).status.code(), Some(2));
}

#[test]
fn scan_output_is_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&[
            "scan", "--sigma", "0.5", "--r-min", "9.0", "--r-max", "9.5", "--step", "0.1", "--dim", "24", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,det_minus_re,det_minus_im,det_plus_re,det_plus_im,Z_re,Z_im,dim");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r.len(), 8);
        assert_eq!(r[7], 24.0);
        let z = Complex64::new(r[1], r[2]) * Complex64::new(r[3], r[4]);
        assert!((z - Complex64::new(r[5], r[6])).norm() <= 1e-12 * (1.0 + z.norm()));
    }
}

#[test]
fn seeded_runs_repeat() {
    let args = ["defect", "--beta", "1,0", "--alpha", "0.6", "--l", "1", "--n", "8", "--cutoff", "8", "--trials", "2", "--seed", "5"];
    let (x, y) = (run(&args), run(&args));
    assert_eq!(x.status.code(), Some(0));
    assert_eq!(x.stdout, y.stdout);
    let chain = ["chain-test", "--alpha", "0.5", "--samples", "1000", "--seed", "3"];
    let o = run(&chain);
    assert_eq!(o.stdout, run(&chain).stdout);
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "0");
}

#[test]
fn json_runs_echo_the_config() {
    let o = run(&["--format", "json", "dets", "--beta", "1.2,3", "--dim", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["config"]["dim"], 16);
    assert_eq!(header["config"]["command"]["command"], "dets");
    let body: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert!(body[0]["det_minus_re"].is_number());
}

#[test]
fn apply_reads_grid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let h = GridFunction::chebyshev(24, 0.0, 1.0, |x| Complex64::new(1.0 / (1.0 + x), 0.0)).unwrap();
    h.write_csv(fs::File::create(&path).unwrap()).unwrap();
    let back = GridFunction::read_csv(std::io::BufReader::new(fs::File::open(&path).unwrap()), Rule::ChebyshevBarycentric).unwrap();
    for (&x, v) in h.nodes().iter().zip(h.values()) {
        assert_eq!(back.eval(x).unwrap(), *v);
    }
    let o = run(&["apply", "--input", path.to_str().unwrap(), "--beta", "1,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for line in out.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!((v[1] - 1.0 / (1.0 + v[0])).abs() < 1e-12 && v[2].abs() < 1e-12, "{line}");
    }
    let o = run(&["pln", "--input", path.to_str().unwrap(), "--alpha", "0.5", "--l", "1", "--n", "4", "--cutoff", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn three_term_subcommands() {
    let q = r#"{"constant":0.0,"cos":[1.0],"sin":[]}"#;
    let o = run(&["three-term", "solve", "--q", q, "--lambda", "2,0", "--beta", "1,0", "--z", "0,0.5,1.5", "--depth", "30"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = run(&["three-term", "residual", "--q", q, "--lambda", "2,0", "--beta", "1,0", "--depth", "30"]);
    let r: f64 = stdout(&o).trim().parse().unwrap();
    assert!(r < 1e-8);
    let odd = r#"{"constant":0.0,"cos":[],"sin":[1.0]}"#;
    let o = run(&["three-term", "residual", "--q", odd, "--lambda", "1,0", "--beta", "0.5,9.5", "--closed-form", "--grid", "0.1:2:20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["three-term", "coeffs", "--q", q, "--lambda", "2,0", "--beta", "1,0"]);
    assert_eq!(o.status.code(), Some(0));
    // |λ| at or below λ₁(Re β + 1) is outside the solvable range.
    let o = run(&["three-term", "solve", "--q", q, "--lambda", "0.1,0", "--beta", "1,0", "--z", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn spectrum_and_self_test() {
    let o = run(&["spectrum", "--beta", "1,0", "--count", "3", "--dim", "32"]);
    let out = stdout(&o);
    let second: Vec<f64> = out.lines().nth(2).unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert!((second[1] + 0.3036630028987326).abs() < 1e-8);
    let o = run(&["--self-test"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
