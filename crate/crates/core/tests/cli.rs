use std::path::{Path, PathBuf};
use std::process::Command;

use qsrlab::cli::{load_report, load_state, run_command, save_report, save_state, StateFile};
use qsrlab::states::{random_pure, random_state, QuantumState, RandomKind, RegisterLayout};
use qsrlab::ComplexMatrix;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn diag_file(dir: &Path, name: &str, d: &[f64]) -> PathBuf {
    let s = QuantumState::single("A", ComplexMatrix::from_real_diag(d)).unwrap();
    let p = dir.join(name);
    save_state(&StateFile::from_mixed(&s), &p).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn trace_violation_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"format_version": 1, "registers": [{"label": "A", "dim": 2}],
            "matrix": [[0.5, 0], [0, 0], [0, 0], [0.4, 0]]}"#,
    );
    let err = load_state(&p).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("trace"), "{err}");
}

#[test]
fn schema_dimension_and_invariant_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let schema = write(
        dir.path(),
        "schema.json",
        r#"{"format_version": 1, "registers": [{"label": "A", "dim": 2}], "bogus": 1}"#,
    );
    let dimension = write(
        dir.path(),
        "dim.json",
        r#"{"format_version": 1, "registers": [{"label": "A", "dim": 2}],
            "matrix": [[1, 0], [0, 0], [0, 0]]}"#,
    );
    let invariant = write(
        dir.path(),
        "psd.json",
        r#"{"format_version": 1, "registers": [{"label": "A", "dim": 2}],
            "matrix": [[1.5, 0], [0, 0], [0, 0], [-0.5, 0]]}"#,
    );
    let codes: Vec<&str> = [&schema, &dimension, &invariant]
        .iter()
        .map(|p| load_state(p).unwrap_err().code())
        .collect();
    assert_eq!(codes, ["schema", "dimension", "input"]);
    let msg = load_state(&schema).unwrap_err().to_string();
    assert!(msg.contains("line") && msg.contains("bogus"), "{msg}");
}

#[test]
fn seeded_state_survives_a_save_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let layout = RegisterLayout::new([("A", 3), ("B", 2)]).unwrap();
    let rho = random_state(layout.clone(), RandomKind::MixedGinibre, 42);
    let p = dir.path().join("rho.json");
    save_state(&StateFile::from_mixed(&rho), &p).unwrap();
    let back = load_state(&p).unwrap().density();
    assert_eq!(back.layout(), rho.layout());
    assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-12);

    let psi = random_pure(layout, 43);
    save_state(&StateFile::from_pure(&psi), &p).unwrap();
    let back = load_state(&p).unwrap().to_pure().unwrap();
    let diff = back
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-12);
}

#[test]
fn report_round_trip_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, report) = run_command(&[
        "verify",
        "--suite",
        "gentle",
        "--trials",
        "5",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0);
    let loaded = load_report(&out).unwrap();
    assert_eq!(loaded, report);
    let again = dir.path().join("again.json");
    save_report(&loaded, &again).unwrap();
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        std::fs::read_to_string(&again).unwrap()
    );
}

#[test]
fn same_arguments_give_the_same_report() {
    let args = [
        "verify", "--suite", "dh-chain", "--trials", "10", "--seed", "9",
    ];
    let (_, mut a) = run_command(&args);
    let (_, mut b) = run_command(&args);
    a.wall_time_s = 0.0;
    b.wall_time_s = 0.0;
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}

#[test]
fn verify_suite_passes() {
    let (code, report) = run_command(&[
        "verify",
        "--suite",
        "hayashi-nagaoka",
        "--trials",
        "100",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    assert_eq!(report.results["all_passed"], true);
}

#[test]
fn dmax_of_the_diagonal_pair() {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_file(dir.path(), "rho.json", &[0.7, 0.3]);
    let sigma = diag_file(dir.path(), "sigma.json", &[0.4, 0.6]);
    let (code, report) = run_command(&[
        "entropy",
        "--quantity",
        "dmax",
        "--in",
        s(&rho),
        "--sigma",
        s(&sigma),
    ]);
    assert_eq!(code, 0);
    let v = report.results["result"]["value"].as_f64().unwrap();
    assert!((v - 0.807354922).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_file(dir.path(), "rho.json", &[0.7, 0.3]);
    let zero = diag_file(dir.path(), "zero.json", &[1.0, 0.0]);
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (
            vec![
                "entropy",
                "--quantity",
                "dh",
                "--eps",
                "1.5",
                "--in",
                s(&rho),
                "--sigma",
                s(&rho),
            ],
            2,
        ),
        (
            vec![
                "entropy",
                "--quantity",
                "rel",
                "--in",
                "missing.json",
                "--sigma",
                s(&rho),
            ],
            2,
        ),
        (vec!["verify", "--suite", "nonsense"], 2),
        (vec!["verify", "--suite", "gentle", "--frobnicate"], 2),
        (vec!["frobnicate"], 2),
        (vec!["--help"], 0),
        // infinite values are results, not errors
        (
            vec![
                "entropy",
                "--quantity",
                "dmax",
                "--in",
                s(&rho),
                "--sigma",
                s(&zero),
            ],
            0,
        ),
    ];
    for (argv, want) in cases {
        let (code, report) = run_command(&argv);
        assert_eq!(code, want, "{argv:?}: {report:?}");
        assert_eq!(report.exit_code, want);
    }
}

#[test]
fn infinite_values_are_written_as_strings() {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_file(dir.path(), "rho.json", &[0.7, 0.3]);
    let zero = diag_file(dir.path(), "zero.json", &[1.0, 0.0]);
    let (_, report) = run_command(&[
        "entropy",
        "--quantity",
        "dmax",
        "--in",
        s(&rho),
        "--sigma",
        s(&zero),
    ]);
    assert_eq!(report.results["result"]["value"], "+inf");
}

#[test]
fn conditional_quantities_take_labels_from_the_partition() {
    let dir = tempfile::tempdir().unwrap();
    let layout = RegisterLayout::new([("A", 2), ("B", 2)]).unwrap();
    let bell = qsrlab::states::PureVector::maximally_entangled("A", "B", 2);
    assert_eq!(bell.layout(), &layout);
    let p = dir.path().join("bell.json");
    save_state(&StateFile::from_pure(&bell), &p).unwrap();
    for (q, want) in [("hmin", -1.0), ("hmax", -1.0), ("mi", 2.0), ("imax", 2.0)] {
        let (code, report) = run_command(&[
            "entropy",
            "--quantity",
            q,
            "--partition",
            "A,B",
            "--in",
            s(&p),
        ]);
        assert_eq!(code, 0, "{q}: {report:?}");
        let v = report.results["result"]["value"].as_f64().unwrap();
        assert!((v - want).abs() < 1e-6, "{q}: {v}");
    }
    let (code, _) = run_command(&[
        "entropy",
        "--quantity",
        "cmi",
        "--partition",
        "A,B",
        "--in",
        s(&p),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn protocol_command_runs_the_bell_example() {
    let dir = tempfile::tempdir().unwrap();
    let phi = qsrlab::states::PureVector::maximally_entangled("R", "B", 2)
        .tensor(&qsrlab::states::PureVector::maximally_entangled(
            "A", "C", 2,
        ))
        .unwrap();
    let p = dir.path().join("phi.json");
    save_state(&StateFile::from_pure(&phi), &p).unwrap();
    let (code, report) = run_command(&[
        "protocol",
        "--in",
        s(&p),
        "--partition",
        "R,A,B,C",
        "--n",
        "4",
        "--b",
        "1",
    ]);
    assert_eq!(code, 0, "{report:?}");
    let t = &report.results["transcript"];
    assert_eq!(t["qubits_sent"], 1.0);
    assert!(t["measured_P"].as_f64().unwrap() < 1e-6);
}

#[test]
fn binary_prints_the_report_and_exits_with_its_code() {
    let dir = tempfile::tempdir().unwrap();
    let rho = diag_file(dir.path(), "rho.json", &[0.7, 0.3]);
    let sigma = diag_file(dir.path(), "sigma.json", &[0.4, 0.6]);
    let out = Command::new(env!("CARGO_BIN_EXE_qsrlab"))
        .args([
            "entropy",
            "--quantity",
            "dmax",
            "--in",
            s(&rho),
            "--sigma",
            s(&sigma),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.807354922058"), "{text}");

    let out = Command::new(env!("CARGO_BIN_EXE_qsrlab"))
        .args(["entropy", "--nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}
