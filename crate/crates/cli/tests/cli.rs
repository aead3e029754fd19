use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bldl_core::dense::CMatrix;
use bldl_core::io::MatrixFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bldl"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn identity_channel_inverts_to_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inv.txt");
    let o = run(&["preprocess", s(&fixture("identity4.txt")), "-o", s(&out), "--float", "--rho", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let inv = MatrixFile::read(&out).unwrap();
    assert_eq!(inv.kind, "inverse");
    assert_eq!(inv.to_cmatrix(), CMatrix::identity(4));
}

#[test]
fn fixed_output_is_bit_exact_file() {
    let dir = tempfile::tempdir().unwrap();
    let (out, l, dinv) = (dir.path().join("x"), dir.path().join("l"), dir.path().join("d"));
    let o = run(&[
        "preprocess",
        s(&fixture("iid64x16.txt")),
        "-o",
        s(&out),
        "--rho",
        "0.2",
        "--l-out",
        s(&l),
        "--dinv-out",
        s(&dinv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("16 16 inverse fixed:21:15:"));
    let parsed = MatrixFile::read(&out).unwrap();
    assert_eq!(parsed.to_text(), text);
    assert!(std::fs::read_to_string(&l).unwrap().starts_with("16 16 l fixed:21:17:0"));
    assert!(MatrixFile::read(&dinv).is_ok());
}

#[test]
fn archsim_report_has_phase_cycle_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inv.txt");
    let csv = dir.path().join("cycles.csv");
    let trace = dir.path().join("trace.csv");
    let o = run(&[
        "preprocess",
        s(&fixture("iid64x16.txt")),
        "-o",
        s(&out),
        "--rho",
        "0.2",
        "--archsim",
        "--report-csv",
        s(&csv),
        "--trace",
        s(&trace),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let kv = std::fs::read_to_string(dir.path().join("inv.txt.cycles")).unwrap();
    assert!(kv.contains("gram_cycles=65\n"));
    assert!(kv.contains("backsub_cycles=32\n"));
    let csv = std::fs::read_to_string(&csv).unwrap();
    assert!(csv.starts_with("gram_cycles,bldl_cycles,backsub_cycles,handoff_cycles,total_cycles,clock_hz"));
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("cycle,phase,unit"));
}

#[test]
fn corrupt_header_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "64 sixteen channel float\n").unwrap();
    let out = dir.path().join("inv.txt");
    let o = run(&["preprocess", s(&bad), "-o", s(&out)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error at line 1"));
    assert!(!out.exists());
}

#[test]
fn singular_block_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inv.txt");
    for mode in ["--fixed", "--float"] {
        let o = run(&["preprocess", s(&fixture("rank_deficient8x4.txt")), "-o", s(&out), mode]);
        assert!(!o.status.success());
        assert!(String::from_utf8_lossy(&o.stderr).contains("singular block D_22"), "{mode}");
    }
}

#[test]
fn compare_reports_bit_exactness() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("cmp.txt");
    let o = run(&["compare", s(&fixture("iid64x16.txt")), "-o", s(&rep), "--rho", "0.05", "--rd"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = std::fs::read_to_string(&rep).unwrap();
    assert!(r.contains("golden_vs_archsim_bit_exact=true"));
    assert!(r.contains("consistent=true"));
}

#[test]
fn compare_identity_has_zero_error() {
    let o = run(&["compare", s(&fixture("identity4.txt")), "--norm", "none", "--rho", "1"]);
    assert!(o.status.success());
    let r = String::from_utf8(o.stdout).unwrap();
    assert!(r.contains("fixed_vs_reference_rel_frobenius=0e0"), "{r}");
}

#[test]
fn compare_singular_in_both_paths() {
    let o = run(&["compare", s(&fixture("rank_deficient8x4.txt"))]);
    assert!(o.status.success());
    let r = String::from_utf8(o.stdout).unwrap();
    assert!(r.contains("golden=singular_block=2"));
    assert!(r.contains("archsim=singular_block=2"));
    assert!(r.contains("consistent=true"));
}

#[test]
fn schedule_lut_csv() {
    let o = run(&["schedule", "--users", "4"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "cycle,unit,op,operands,result");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("0,MINV,"));
    assert!(!run(&["schedule", "--users", "5"]).status.success());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "fixed=false\nrho=1000\n").unwrap();
    let out = dir.path().join("inv.txt");
    let o = run(&["preprocess", s(&fixture("identity4.txt")), "-o", s(&out), "--config", s(&cfg), "--rho", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let inv = MatrixFile::read(&out).unwrap();
    assert!(inv.precision() == "float");
    assert!((inv.to_cmatrix()[(0, 0)].re - 0.5).abs() < 1e-15);
}

fn ber_config(dir: &Path) -> PathBuf {
    let cfg = dir.join("sweep.cfg");
    std::fs::write(
        &cfg,
        "snr_db=0,10,20\ntrials=100\npreprocessors=bldl-float,neumann-3\nb=32\nu=8\nseed=5\n",
    )
    .unwrap();
    cfg
}

#[test]
fn ber_writes_one_csv_per_backend() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ber_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["ber", "--config", s(&cfg), "--out-dir", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["ber_bldl-float.csv", "ber_neumann-3.csv"] {
        let x = std::fs::read_to_string(a.join(name)).unwrap();
        assert_eq!(x, std::fs::read_to_string(b.join(name)).unwrap());
        let mut lines = x.lines();
        assert_eq!(lines.next().unwrap(), "snr_db,bit_errors,bits_total,ber,singular_trials");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 3);
        for row in rows {
            let ber: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
            assert!((0.0..=0.5).contains(&ber));
        }
    }
    let meta = std::fs::read_to_string(a.join("ber_bldl-float.meta")).unwrap();
    assert!(meta.contains("snr_definition="));
}

#[test]
fn ber_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "snr_db=0\npreprocessors=qr\n").unwrap();
    let o = run(&["ber", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preprocessor"));
}
