use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dpsketch::eval::{adjusted_rand_index, gen_planted_clusters, kmeans_on_sketches, KMeansConfig, PlantedClusterSpec};
use dpsketch::io::{bundle_to_bytes, dataset_to_bytes, kmeans_report, KMeansRun, Report};
use dpsketch::{publish, PrivacyBudget};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpsketch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen_and_publish(dir: &TempDir, noise_scale: &str) -> (PathBuf, PathBuf, PathBuf) {
    let (ds, labels, bundle) = (path(dir, "ds.csv"), path(dir, "labels.csv"), path(dir, "b.bin"));
    ok(&[
        "gen",
        "--n",
        "80",
        "--d",
        "64",
        "--c",
        "3",
        "--flip",
        "0.05",
        "--seed",
        "5",
        "--out",
        s(&ds),
        "--labels",
        s(&labels),
    ]);
    ok(&[
        "publish",
        "--input",
        s(&ds),
        "--k",
        "16",
        "--epsilon",
        "2",
        "--delta",
        "1e-5",
        "--matrix-seed",
        "7",
        "--noise-seed",
        "8",
        "--noise-scale",
        noise_scale,
        "--out",
        s(&bundle),
    ]);
    (ds, labels, bundle)
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["publish", "--k", "nope"]).status.code(), Some(1));

    let dir = TempDir::new().unwrap();
    let missing = path(&dir, "missing.bin");
    assert_eq!(
        run(&["dist", "--bundle", s(&missing), "--a", "x", "--b", "y"])
            .status
            .code(),
        Some(2)
    );
    let junk = path(&dir, "junk.csv");
    std::fs::write(&junk, "user_id,bit_0\nu,7\n").unwrap();
    let out = run(&[
        "publish",
        "--input",
        s(&junk),
        "--k",
        "1",
        "--epsilon",
        "1",
        "--delta",
        "1e-5",
        "--matrix-seed",
        "1",
        "--noise-seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let audit = |scale: &str| {
        run(&[
            "audit",
            "--mechanism",
            "projection",
            "--d",
            "32",
            "--k",
            "4",
            "--epsilon",
            "1",
            "--delta",
            "1e-3",
            "--samples",
            "50000",
            "--noise-scale",
            scale,
        ])
        .status
        .code()
    };
    assert_eq!(audit("1"), Some(0));
    assert_eq!(audit("0.25"), Some(3));
}

#[test]
fn unknown_bundle_version_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let (_, _, bundle) = gen_and_publish(&dir, "1");
    let bytes = std::fs::read(&bundle).unwrap();
    let meta_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let meta = String::from_utf8(bytes[12..12 + meta_len].to_vec()).unwrap();
    let patched = meta.replace("\"format_version\":1", "\"format_version\":9");
    let mut out = bytes[..12].to_vec();
    out.extend_from_slice(patched.as_bytes());
    out.extend_from_slice(&bytes[12 + meta_len..]);
    let bad = path(&dir, "bad.bin");
    std::fs::write(&bad, out).unwrap();
    let res = run(&["dist", "--bundle", s(&bad), "--a", "u0", "--b", "u1"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains('9'));
}

#[test]
fn publish_is_deterministic_and_reads_stdin() {
    let dir = TempDir::new().unwrap();
    let (ds, _, bundle) = gen_and_publish(&dir, "1");
    let first = std::fs::read(&bundle).unwrap();
    let child = Command::new(env!("CARGO_BIN_EXE_dpsketch"))
        .args([
            "publish",
            "--k",
            "16",
            "--epsilon",
            "2",
            "--delta",
            "1e-5",
            "--matrix-seed",
            "7",
            "--noise-seed",
            "8",
        ])
        .stdin(std::fs::File::open(&ds).unwrap())
        .output()
        .unwrap();
    assert_eq!(child.status.code(), Some(0));
    assert_eq!(child.stdout, first);
}

#[test]
fn self_distance_without_noise_is_zero() {
    let dir = TempDir::new().unwrap();
    let (_, _, bundle) = gen_and_publish(&dir, "0");
    let out = ok(&["dist", "--bundle", s(&bundle), "--a", "u3", "--b", "u3"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "user_a,user_b,raw,clamped\nu3,u3,0,0\n"
    );
}

#[test]
fn eval_kmeans_matches_library_pipeline() {
    let dir = TempDir::new().unwrap();
    let (ds, _, bundle) = gen_and_publish(&dir, "1");
    let report = path(&dir, "km.csv");
    ok(&[
        "eval-kmeans",
        "--bundle",
        s(&bundle),
        "--labels",
        s(&path(&dir, "labels.csv")),
        "--c",
        "3",
        "--seed",
        "40",
        "--runs",
        "3",
        "--out",
        s(&report),
    ]);

    let spec = PlantedClusterSpec {
        n: 80,
        d: 64,
        c: 3,
        flip_noise: 0.05,
        seed: 5,
    };
    let (data, labels) = gen_planted_clusters(&spec).unwrap();
    assert_eq!(dataset_to_bytes(&data).unwrap(), std::fs::read(&ds).unwrap());
    let lib_bundle = publish(&data, 16, PrivacyBudget::new(2.0, 1e-5).unwrap(), 7, 8).unwrap();
    assert_eq!(bundle_to_bytes(&lib_bundle).unwrap(), std::fs::read(&bundle).unwrap());
    let base = KMeansConfig::new(3, 40);
    let runs: Vec<KMeansRun> = (0..3)
        .map(|r| {
            let cfg = KMeansConfig { seed: 40 + r, ..base };
            let res = kmeans_on_sketches(&lib_bundle, &cfg).unwrap();
            KMeansRun {
                seed: cfg.seed,
                ari: adjusted_rand_index(&res.assignments, &labels),
                inertia: res.inertia,
                iterations: res.iterations,
            }
        })
        .collect();
    let expected = kmeans_report(&lib_bundle, &base, &runs).to_bytes().unwrap();
    assert_eq!(std::fs::read(&report).unwrap(), expected);
}

#[test]
fn reports_parse_and_rerun_identically() {
    let dir = TempDir::new().unwrap();
    let (ds, _, bundle) = gen_and_publish(&dir, "1");
    let cmds: Vec<Vec<&str>> = vec![
        vec!["rr", "--input", s(&ds), "--epsilon", "1", "--seed", "3"],
        vec!["matrix-noise", "--input", s(&ds), "--epsilon", "1", "--seed", "3"],
        vec!["query", "--bundle", s(&bundle), "--queries", s(&ds)],
        vec!["eval-knn", "--dataset", s(&ds), "--bundle", s(&bundle), "--m", "4"],
        vec![
            "compare-mse",
            "--d",
            "64",
            "--k",
            "8",
            "--epsilon",
            "1",
            "--delta",
            "1e-5",
            "--grid",
            "4,32",
            "--trials",
            "50",
            "--mechanisms",
            "projection,rr,matrix",
        ],
        vec![
            "audit",
            "--mechanism",
            "matrix",
            "--d",
            "16",
            "--epsilon",
            "1",
            "--samples",
            "500",
        ],
        vec![
            "audit",
            "--mechanism",
            "rr",
            "--d",
            "16",
            "--epsilon",
            "1",
            "--samples",
            "500",
        ],
    ];
    for args in cmds {
        let a = ok(&args).stdout;
        assert_eq!(a, ok(&args).stdout, "{args:?}");
        if args[0] != "rr" {
            let r = Report::read(a.as_slice()).unwrap();
            assert!(!r.rows.is_empty(), "{args:?}");
            assert_eq!(r.provenance["command"], args[0]);
        }
    }
}
