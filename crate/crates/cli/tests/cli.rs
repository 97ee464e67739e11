use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ceo(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ceo"))
        .args(args)
        .env("CEO_OUT_DIR", out_dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key).map(|v| v.trim().parse::<f64>().unwrap()))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
}

#[test]
fn bounds_prints_sum_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["bounds", "--p1", "0.15", "--p2", "0.15", "--d1", "0.1", "--d2", "0.1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!((value(&out, "r_sum ") - 0.9898).abs() < 1e-4, "{out}");
    assert!((value(&out, "dist ") - 0.5925).abs() < 1e-4, "{out}");
}

#[test]
fn mumax_prints_exact_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["mumax", "--p1", "0.15", "--p2", "0.15"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.49");
}

#[test]
fn validation_failures_exit_2_and_list_everything() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["bounds", "--p1", "1.5", "--p2", "0.15", "--d2", "0.7"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("--p1 = 1.5 is out of range"), "{err}");
    assert!(err.contains("--d2 = 0.7 is out of range"), "{err}");
    assert!(err.contains("missing required --d1"), "{err}");
}

#[test]
fn unknown_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["mumax", "--p1", "0.1", "--p2", "0.1", "--nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_and_io_failures_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.txt");
    let m = missing.to_str().unwrap();
    let o = ceo(&["quantize", "--code", m, "--input", m], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    // k > m is rejected by the code builder.
    let o = ceo(&["design", "--n", "100", "--m1", "50", "--k1", "60"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "[bounds]\np1 = 0.15\np2 = 0.15\nd1 = 0.3\nd2 = 0.1\n").unwrap();
    let o = ceo(&["bounds", "--config", cfg.to_str().unwrap(), "--d1", "0.1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!((value(&stdout(&o), "r_sum ") - 0.9898).abs() < 1e-4);
    assert!(stderr(&o).contains("flag overrides config file value 0.3"), "{}", stderr(&o));
}

#[test]
fn table1_theory_columns() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["table1", "--published-rows", "--n", "10000"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(text.starts_with("# schema: ceo-table v1\n# config: "));
    assert!(text.contains("\"seed\":1"));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (r, d) = (col("r_th"), col("d_th"));
    let expected = [
        (1.6722, 0.4204),
        (0.9898, 0.5925),
        (0.6319, 0.7206),
        (0.9898, 0.5925),
        (0.531, 0.7601),
        (0.1187, 0.9427),
    ];
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), expected.len());
    for (row, (er, ed)) in rows.iter().zip(expected) {
        let rv: f64 = row[r].parse().unwrap();
        let dv: f64 = row[d].parse().unwrap();
        assert!((rv - er).abs() <= 1e-3 && (dv - ed).abs() <= 1e-3, "{row:?}");
    }
}

#[test]
fn locus_and_sweep_write_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = ceo(&["locus", "--p1", "0.15", "--p2", "0.15", "--samples", "5", "--grid-step", "0.01", "--refine-tol", "0.0001"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let locus = fs::read_to_string(dir.path().join("locus.csv")).unwrap();
    assert_eq!(locus.lines().filter(|l| !l.starts_with('#')).count(), 6);

    let o = ceo(&["sweep", "--p1", "0.15", "--p2", "0.15", "--samples", "4", "--grid-step", "0.01", "--refine-tol", "0.0001"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(sweep.contains("kind,mu,r_sum,dist"));
    assert_eq!(sweep.lines().filter(|l| l.starts_with("theory,")).count(), 4);
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--p1", "0.15", "--p2", "0.15", "--d1", "0.1", "--d2", "0.1", "--n", "600", "--trials", "2",
        "--seed", "7",
    ];
    for d in [&a, &b] {
        let o = ceo(&args, d.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["simulate.csv", "simulate.json"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
    let csv = fs::read_to_string(a.path().join("simulate.csv")).unwrap();
    assert!(csv.contains("\"base_seed\":7"));
}

#[test]
fn design_encode_decode_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // Full binning (k = m): the payload is the info word and decoding is exact.
    let o = ceo(&["design", "--n", "400", "--m1", "220", "--k1", "220"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let code = p.join("code1.txt");
    assert!(fs::read_to_string(&code).unwrap().starts_with("# schema: ceo-code v1"));

    let y: String = (0..400).map(|i| if (i * 7919) % 11 < 3 { '1' } else { '0' }).collect();
    let y_path = p.join("y.txt");
    fs::write(&y_path, format!("# source word\n{y}\n")).unwrap();

    let o = ceo(&["quantize", "--code", code.to_str().unwrap(), "--input", y_path.to_str().unwrap()], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let u = fs::read_to_string(p.join("u.txt")).unwrap();

    let o = ceo(&["encode", "--code", code.to_str().unwrap(), "--input", y_path.to_str().unwrap()], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let payload = p.join("payload.txt");

    let o = ceo(
        &["decode", "--code1", code.to_str().unwrap(), "--payload1", payload.to_str().unwrap(), "--q", "0.2"],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("link 1 converged true"), "{}", stdout(&o));
    let u_hat = fs::read_to_string(p.join("u1_hat.txt")).unwrap();
    let body = |t: &str| t.lines().filter(|l| !l.starts_with('#')).collect::<String>();
    assert_eq!(body(&u_hat), body(&u));
}

#[test]
fn paired_design_is_rebuilt_for_decoding() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = ceo(&["design", "--n", "300", "--m1", "150", "--k1", "100", "--m2", "150", "--k2", "100"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("(paired)"));
    let y: String = (0..300).map(|i| if i % 5 == 0 { '1' } else { '0' }).collect();
    let y_path = p.join("y.txt");
    fs::write(&y_path, &y).unwrap();
    let mut payloads = Vec::new();
    for link in ["code1.txt", "code2.txt"] {
        let code = p.join(link);
        let o = ceo(&["encode", "--code", code.to_str().unwrap(), "--input", y_path.to_str().unwrap()], p);
        assert!(o.status.success(), "{}", stderr(&o));
        let dest = p.join(format!("payload_{link}"));
        fs::rename(p.join("payload.txt"), &dest).unwrap();
        payloads.push(dest);
    }
    let (c1, c2) = (p.join("code1.txt"), p.join("code2.txt"));
    let o = ceo(
        &[
            "decode", "--code1", c1.to_str().unwrap(), "--payload1", payloads[0].to_str().unwrap(), "--code2",
            c2.to_str().unwrap(), "--payload2", payloads[1].to_str().unwrap(), "--q", "0.01",
        ],
        p,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("paired true"), "{}", stdout(&o));
}
