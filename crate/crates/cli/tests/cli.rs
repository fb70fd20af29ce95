use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blocktri::interchange::{read_matrix_market, write_matrix_market};
use blocktri::matcore::{c64, ComplexMatrix};
use serde_json::Value;

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blocktri"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn mtx_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".mtx"))
        .collect();
    names.sort();
    names
}

#[test]
fn generate_companion_from_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "generate",
            "--family",
            "companion",
            "--coeffs",
            "1,0,0,0,1",
            "--out",
            "d",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let d = tmp.path().join("d");
    assert_eq!(mtx_files(&d), ["A.mtx", "C.mtx"]);
    let manifest = json(&d.join("manifest.json"));
    assert_eq!(manifest["family"], "companion");
    assert_eq!(manifest["schema_version"], "1");
    let a = read_matrix_market(d.join("A.mtx")).unwrap();
    assert_eq!(a.shape(), (4, 4));
    assert_eq!(a[(0, 3)], c64(-1.0, 0.0));
    assert!(fs::read_to_string(d.join("A.mtx"))
        .unwrap()
        .starts_with("%%matrixmarket matrix array complex general\n"));
}

#[test]
fn generate_fourier_sum_writes_h_and_z() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &["generate", "--family", "fourier-sum", "--n", "16", "--seed", "1"],
        tmp.path(),
    );
    assert!(out.status.success());
    assert_eq!(mtx_files(tmp.path()), ["H.mtx", "Z.mtx"]);
    let red = run(&["reduce", "--input", ".", "--out", "r"], tmp.path());
    assert!(red.status.success(), "{}", String::from_utf8_lossy(&red.stdout));
    let report = json(&tmp.path().join("r/report.json"));
    assert!(report["breakdown_events"][0]["step"].as_u64().unwrap() <= 3);
}

#[test]
fn curve_manifest_lists_the_conic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "generate",
            "--family",
            "curve",
            "--curve",
            "parabola-arc",
            "--n",
            "32",
            "--seed",
            "3",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let manifest = json(&tmp.path().join("manifest.json"));
    for key in ["a20", "a11", "a02", "a10", "a01", "a00"] {
        assert!(manifest["conic"][key].is_array(), "{key}");
    }
    let red = run(&["reduce", "--input", ".", "--out", "r"], tmp.path());
    assert!(red.status.success());
    let sizes: Vec<u64> = json(&tmp.path().join("r/report.json"))["block_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert!(sizes[0] <= 6 && sizes[1..].iter().all(|&s| s <= 4), "{sizes:?}");
}

#[test]
fn reduce_arrow_and_companion_then_track() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert!(run(
        &["generate", "--family", "arrow", "--n", "32", "--seed", "1", "--out", "arrow"],
        p
    )
    .status
    .success());
    let red = run(&["reduce", "--input", "arrow", "--out", "arrow_r"], p);
    assert!(red.status.success());
    let report = json(&p.join("arrow_r/report.json"));
    assert!(report["block_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_u64().unwrap() <= 2));
    for key in ["unitarity", "similarity", "off_profile", "certificate"] {
        assert!(report["residuals"][key].as_f64().unwrap().is_finite());
    }
    assert_eq!(report["input_digests"].as_object().unwrap().len(), 2);
    for f in ["U.mtx", "T.mtx", "A_reduced.mtx", "C_reduced.mtx"] {
        assert!(p.join("arrow_r").join(f).is_file(), "{f}");
    }

    assert!(run(
        &[
            "generate",
            "--family",
            "companion",
            "--n",
            "16",
            "--seed",
            "2",
            "--out",
            "comp"
        ],
        p
    )
    .status
    .success());
    assert!(run(&["reduce", "--input", "comp", "--out", "comp_r"], p)
        .status
        .success());
    let report = json(&p.join("comp_r/report.json"));
    assert!(report["block_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .all(|v| v.as_u64().unwrap() <= 4));
    let track = run(
        &[
            "qr-track",
            "--matrix",
            "comp_r/A_reduced.mtx",
            "--c",
            "comp_r/C_reduced.mtx",
            "--steps",
            "30",
            "--out",
            "qr.json",
        ],
        p,
    );
    assert!(track.status.success(), "{}", String::from_utf8_lossy(&track.stdout));
    let q = json(&p.join("qr.json"));
    assert_eq!(q["iterations"].as_array().unwrap().len(), 30);
    assert!(q["max_off_profile_rank"].as_u64().unwrap() <= 2);
}

#[test]
fn qr_track_rejects_unreduced_input() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert!(
        run(&["generate", "--family", "companion", "--n", "16", "--out", "comp"], p)
            .status
            .success()
    );
    let out = run(&["qr-track", "--matrix", "comp/A.mtx", "--c", "comp/C.mtx"], p);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("blocktri reduce"));
}

#[test]
fn qr_track_hermitian_tridiagonal_has_rank_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 10;
    let t = ComplexMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => c64(i as f64, 0.0),
        1 => c64(1.0, 0.0),
        _ => c64(0.0, 0.0),
    });
    write_matrix_market(tmp.path().join("T.mtx"), &t).unwrap();
    write_matrix_market(tmp.path().join("C.mtx"), &ComplexMatrix::zeros(n, n)).unwrap();
    let out = run(
        &["qr-track", "--matrix", "T.mtx", "--c", "C.mtx", "--steps", "10"],
        tmp.path(),
    );
    assert!(out.status.success());
    let q = json(&tmp.path().join("qr_track.json"));
    assert_eq!(q["max_off_profile_rank"], 0);
}

#[test]
fn verify_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let d = ComplexMatrix::from_diagonal(&[c64(1.0, 1.0), c64(-2.0, 0.5), c64(0.0, 3.0)]);
    write_matrix_market(p.join("N.mtx"), &d).unwrap();
    write_matrix_market(p.join("Z.mtx"), &ComplexMatrix::zeros(3, 3)).unwrap();
    let ok = run(&["verify", "--matrix", "N.mtx", "--c", "Z.mtx", "--k", "0"], p);
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("dim(S): 0"));

    assert!(run(
        &["generate", "--family", "unitary", "--n", "12", "--seed", "4", "--out", "u"],
        p
    )
    .status
    .success());
    assert!(run(&["verify", "--matrix", "u/A.mtx", "--c", "u/C.mtx", "--k", "2"], p)
        .status
        .success());

    let missing = run(&["verify", "--matrix", "missing.mtx", "--c", "Z.mtx"], p);
    assert_eq!(missing.status.code(), Some(3));
    let usage = run(&["verify", "--nonsense"], p);
    assert_eq!(usage.status.code(), Some(4));
}

#[test]
fn spy_identity_ascii_and_pgm() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    write_matrix_market(p.join("I.mtx"), &ComplexMatrix::identity(4)).unwrap();
    let out = run(&["spy", "--matrix", "I.mtx", "--tol", "1e-12", "--format", "ascii"], p);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "*...\n.*..\n..*.\n...*\n");
    let out = run(&["spy", "--matrix", "I.mtx", "--format", "pgm", "--out", "i.pgm"], p);
    assert!(out.status.success());
    let bytes = fs::read(p.join("i.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n4 4\n255\n"));
    assert_eq!(bytes.len(), 11 + 16);
}

#[test]
fn spy_of_reduced_arrow_is_a_staircase() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    assert!(run(
        &["generate", "--family", "arrow", "--n", "12", "--seed", "5", "--out", "a"],
        p
    )
    .status
    .success());
    assert!(run(&["reduce", "--input", "a", "--out", "r"], p).status.success());
    let out = run(&["spy", "--matrix", "r/T.mtx", "--tol", "1e-12"], p);
    let rows: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(rows.len(), 12);
    for (i, row) in rows.iter().enumerate() {
        for (j, ch) in row.chars().enumerate() {
            if (i / 2).abs_diff(j / 2) > 1 {
                assert_eq!(ch, '.', "entry ({i}, {j})");
            }
        }
    }
}

#[test]
fn identical_commands_give_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path();
    let mut reports = Vec::new();
    for _ in 0..2 {
        assert!(run(
            &["generate", "--family", "unitary", "--n", "10", "--seed", "9", "--out", "g"],
            p
        )
        .status
        .success());
        assert!(run(&["reduce", "--input", "g", "--out", "r"], p).status.success());
        let mut r = json(&p.join("r/report.json"));
        r.as_object_mut().unwrap().remove("elapsed_ms");
        reports.push(r);
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn auto_start_needs_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    write_matrix_market(tmp.path().join("A.mtx"), &ComplexMatrix::identity(3)).unwrap();
    let out = run(&["reduce", "--input", "A.mtx"], tmp.path());
    assert_eq!(out.status.code(), Some(4));
    write_matrix_market(tmp.path().join("Z.mtx"), &ComplexMatrix::unit_vector(3, 0)).unwrap();
    let out = run(
        &["reduce", "--input", "A.mtx", "--start", "Z.mtx", "--out", "r"],
        tmp.path(),
    );
    assert!(out.status.success());
}
