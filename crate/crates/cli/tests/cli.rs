use std::fs;
use std::process::{Command, Output};

fn calbund(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calbund"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn anti_holomorphic_coassociative_passes_with_r6_note() {
    let o = calbund(&[
        "verify",
        "--surface",
        "catalog:antiholomorphic_expz",
        "--construction",
        "coassociative_F",
        "--samples",
        "40",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let report = text(&o.stdout);
    assert!(report.contains("sign_match=minus"));
    assert!(report.contains("contained in an affine R^6"));
}

#[test]
fn negative_control_is_a_successful_run() {
    let args = [
        "verify",
        "--surface",
        "catalog:holomorphic_expz",
        "--construction",
        "coassociative_F",
        "--samples",
        "40",
    ];
    let o = calbund(&[&args[..], &["--expect", "fail"]].concat());
    assert_eq!(code(&o), 0);
    assert!(text(&o.stderr).contains("expected failure observed"));
    let o = calbund(&args);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stderr).contains("unexpected failure"));
}

#[test]
fn catenoid_associative_passes() {
    let o = calbund(&[
        "verify",
        "--surface",
        "catalog:catenoid(C=2,K=0.5)",
        "--construction",
        "associative_E",
        "--fibre-box",
        "-10,10",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
}

#[test]
fn unexpected_pass_is_a_verdict_failure() {
    let o = calbund(&[
        "verify",
        "--surface",
        "catalog:plane",
        "--construction",
        "associative_E",
        "--samples",
        "10",
        "--expect",
        "fail",
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        let o = calbund(
            &[
                &[
                    "verify",
                    "--surface",
                    "catalog:rotational",
                    "--construction",
                    "cayley_plus",
                    "--samples",
                    "25",
                    "--seed",
                    "9",
                    "--mode",
                    "fd",
                    "--out",
                    p,
                ][..],
                extra,
            ]
            .concat(),
        );
        assert_eq!(code(&o), 0, "{}", text(&o.stderr));
        fs::read(path).unwrap()
    };
    let a = run("a.toml", &[]);
    assert_eq!(a, run("b.toml", &[]));
    assert_eq!(a, run("c.toml", &["--sequential"]));
    let doc = text(&a);
    assert!(doc.contains("seed = 9"));
    assert!(doc.contains("mode = \"fd\""));
    assert!(doc.contains("tol = 0.00001"));
}

#[test]
fn sample_grid_shape() {
    let o = calbund(&[
        "sample",
        "--surface",
        "catalog:holomorphic_expz",
        "--construction",
        "associative_E",
        "--grid",
        "20",
    ]);
    assert_eq!(code(&o), 0);
    let csv = text(&o.stdout);
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2000);
    assert!(rows.iter().all(|r| r.split(',').count() == 7));
    assert!(csv.lines().any(|l| l == "# w1,w2,w3,x1,x2,x3,x4"));
}

#[test]
fn negative_spinor_cloud_has_no_real_part() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cloud.csv");
    let o = calbund(&[
        "sample",
        "--surface",
        "catalog:holomorphic_expz",
        "--construction",
        "cayley_minus",
        "--grid",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out).unwrap();
    for row in csv.lines().filter(|l| !l.starts_with('#')) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 8);
        assert!(cols[0].abs() < 1e-12);
    }
}

#[test]
fn surface_documents_and_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p.to_str().unwrap().to_string()
    };
    let good = write(
        "good.toml",
        "kind = \"graph\"\ncomponents = [\"u^2 - v^2\", \"-2*u*v\"]\n[domain]\nu = [-1, 1]\nv = [-1, 1]\n[sampling]\nsamples = 20\n",
    );
    let o = calbund(&[
        "verify",
        "--surface",
        &good,
        "--construction",
        "coassociative_F",
    ]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));

    let empty = write(
        "empty.toml",
        "kind = \"graph\"\ncomponents = [\"u\", \"v\"]\n[domain]\nu = [-1, 1]\nv = [-1, 1]\nexclude = \"1\"\n",
    );
    let o = calbund(&["sample", "--surface", &empty, "--construction", "conormal"]);
    assert_eq!(code(&o), 3);
    let o = calbund(&["verify", "--surface", &empty, "--construction", "conormal"]);
    assert_eq!(code(&o), 3);

    let broken = write(
        "broken.toml",
        "kind = \"graph\"\ncomponents = [\"u*(\", \"v\"]\n[domain]\nu = [-1, 1]\nv = [-1, 1]\n",
    );
    let o = calbund(&["verify", "--surface", &broken, "--construction", "conormal"]);
    assert_eq!(code(&o), 2);
    let o = calbund(&[
        "verify",
        "--surface",
        "catalog:plane",
        "--construction",
        "cayley",
    ]);
    assert_eq!(code(&o), 2);
    let o = calbund(&[
        "verify",
        "--surface",
        "catalog:sphere3",
        "--construction",
        "cayley_plus",
    ]);
    assert_eq!(code(&o), 3);
    let o = calbund(&[
        "verify",
        "--surface",
        "/nonexistent/surface.toml",
        "--construction",
        "conormal",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn catalog_listing_is_stable() {
    let a = calbund(&["catalog"]);
    let b = calbund(&["catalog"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let listing = text(&a.stdout);
    assert!(listing.contains("catenoid C=2 K=0.5"));
    assert!(listing.contains("rotational K=1 L=4"));
    assert!(listing.contains("note: defined for u^2 + v^2 > 2"));
}
