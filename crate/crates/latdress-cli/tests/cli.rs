//! End-to-end behavior of the command-line binary: exit codes, report
//! determinism, and archive handling.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latdress"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(&cfg, "dimz = 4,4\n");
    let out = bin()
        .args(["check-composers", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown key"), "{err}");
}

#[test]
fn corrupt_archive_magic_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let arch = dir.path().join("input.dfm");
    // produce a valid archive, then wreck the magic
    let save = bin()
        .args(["gaugefix", "--save-input"])
        .arg(&arch)
        .arg("--out")
        .arg(dir.path().join("o1"))
        .output()
        .unwrap();
    assert_eq!(
        save.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&save.stderr)
    );
    let mut bytes = std::fs::read(&arch).unwrap();
    bytes[0] = b'Z';
    std::fs::write(&arch, &bytes).unwrap();
    let out = bin()
        .args(["gaugefix", "--load-input"])
        .arg(&arch)
        .arg("--out")
        .arg(dir.path().join("o2"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad magic"), "{err}");
}

#[test]
fn non_convergence_exits_1_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    // a tolerance one Newton step cannot reach
    write(
        &cfg,
        "dims = 2,2\ngroup = su2\ngf = rxi-nonabelian\nxi = 2.0\ntol = 1e-15\nmax_iter = 1\n",
    );
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["gaugefix", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    // the report is still written
    let report = std::fs::read_to_string(out_dir.join("solve_report.json")).unwrap();
    assert!(report.contains("\"converged\": false"), "{report}");
}

#[test]
fn archive_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    write(
        &cfg,
        "dims = 2,2\ngroup = su2\ngf = unitary\nseed = 99\ntol = 1e-8\n",
    );
    let arch = dir.path().join("input.dfm");
    let first = bin()
        .args(["gaugefix", "--save-input"])
        .arg(&arch)
        .args(["--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o1"))
        .output()
        .unwrap();
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    // loading the saved bundle reproduces the identical solve report
    let second = bin()
        .args(["gaugefix", "--load-input"])
        .arg(&arch)
        .args(["--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("o2"))
        .output()
        .unwrap();
    assert_eq!(second.status.code(), Some(0));
    let r1 = std::fs::read(dir.path().join("o1/solve_report.json")).unwrap();
    let r2 = std::fs::read(dir.path().join("o2/solve_report.json")).unwrap();
    assert_eq!(r1, r2);
    let d1 = std::fs::read(dir.path().join("o1/dressed.dfm")).unwrap();
    let d2 = std::fs::read(dir.path().join("o2/dressed.dfm")).unwrap();
    assert_eq!(d1, d2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    write(
        &cfg,
        "dims = 6\ngroup = u1\ngf = rxi-abelian\nxi = 2.0\nxis = 2,20,200\nseed = 5\n",
    );
    for sub in ["xi-sweep", "locality"] {
        let mut paths = Vec::new();
        for run in 0..2 {
            let out_dir = dir.path().join(format!("{sub}-{run}"));
            let out = bin()
                .arg(sub)
                .args(["--config"])
                .arg(&cfg)
                .arg("--out")
                .arg(&out_dir)
                .output()
                .unwrap();
            assert_eq!(
                out.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            paths.push(out_dir);
        }
        for file in ["xi_sweep.csv", "locality.csv"] {
            let a = paths[0].join(file);
            if a.exists() {
                let b = paths[1].join(file);
                assert_eq!(
                    std::fs::read(&a).unwrap(),
                    std::fs::read(&b).unwrap(),
                    "{file}"
                );
            }
        }
    }
}

#[test]
fn xi_sweep_on_loaded_single_mode_matches_fourier_factors() {
    use latdress::fields::{ActionTag, FieldBundle, LinkField, ScalarField};
    use latdress::{GroupKind, Lattice, Representation};

    // theta = 0, chi(x) = cos(2 pi x / 4): the sweep errors follow
    // khat^2/(khat^2 + e v xi) with khat^2 = 2
    let lat = Lattice::new(&[4]).unwrap();
    let links = LinkField::identity(&lat, GroupKind::U1, 1.0).unwrap();
    let scalar = ScalarField::from_fn(
        &lat,
        Representation::U1Complex,
        ActionTag::Representation,
        |s| {
            let chi = (2.0 * std::f64::consts::PI * s as f64 / 4.0).cos();
            vec![chi.cos(), chi.sin()]
        },
    )
    .unwrap();
    let bundle = FieldBundle::new(links, scalar).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let arch = dir.path().join("mode.dfm");
    std::fs::write(&arch, latdress_cli::archive::encode(&bundle)).unwrap();
    let cfg = dir.path().join("exp.cfg");
    write(
        &cfg,
        "dims = 4\ngroup = u1\ngf = rxi-abelian\nxi = 1\nxis = 2,20,200\n",
    );

    let out = bin()
        .args(["xi-sweep", "--load-input"])
        .arg(&arch)
        .args(["--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = std::fs::read_to_string(dir.path().join("out/xi_sweep.csv")).unwrap();
    let expected = [2.0 / 4.0, 2.0 / 22.0, 2.0 / 202.0];
    for (line, want) in csv.lines().skip(1).zip(expected) {
        let cols: Vec<&str> = line.split(',').collect();
        let distance: f64 = cols[1].parse().unwrap();
        assert!((distance - want).abs() < 1e-9, "{line} vs {want}");
    }
}

#[test]
fn seed_override_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    write(&cfg, "dims = 6\ngroup = u1\ngf = rxi-abelian\nxis = 2,20\n");
    let mut csvs = Vec::new();
    for seed in ["1", "2"] {
        let out_dir = dir.path().join(format!("s{seed}"));
        let out = bin()
            .args(["xi-sweep", "--seed", seed, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        csvs.push(std::fs::read(out_dir.join("xi_sweep.csv")).unwrap());
    }
    assert_ne!(csvs[0], csvs[1]);
}

#[test]
fn all_subcommands_run_green_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    // small lattice keeps the dense builders fast
    write(
        &cfg,
        "dims = 4\ngroup = u1\ngf = rxi-abelian\nn_configs = 5\n",
    );
    for sub in [
        "check-composers",
        "check-action",
        "gaugefix",
        "check-equivariance",
        "xi-sweep",
        "fp-det",
        "jacobian",
        "locality",
        "variations",
    ] {
        let out = bin()
            .arg(sub)
            .args(["--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub}: stdout:\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn su2_subcommands_run_green() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    write(
        &cfg,
        "dims = 2,2\ngroup = su2\ngf = rxi-nonabelian\nxi = 2.0\ntol = 1e-8\n\
         xis = 10,100,1000\nn_configs = 3\nspread = 0.3\n",
    );
    for sub in [
        "gaugefix",
        "check-equivariance",
        "xi-sweep",
        "fp-det",
        "jacobian",
        "variations",
    ] {
        let out = bin()
            .arg(sub)
            .args(["--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.path().join(sub))
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{sub}: stdout:\n{}\nstderr:\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

mod archive_properties {
    use latdress::random::{random_bundle, random_bundle_real4};
    use latdress::{GroupKind, Lattice};
    use latdress_cli::archive::{decode, encode};
    use proptest::prelude::*;

    // decode(encode(x)) = x for arbitrary seeded bundles
    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn roundtrip_is_identity(
            seed in any::<u64>(),
            spread in 0.0f64..1.2,
            kind_pick in 0usize..3,
            nx in 2usize..4,
            ny in 2usize..4,
        ) {
            let lat = Lattice::new(&[nx, ny]).unwrap();
            let b = match kind_pick {
                0 => random_bundle(&lat, GroupKind::U1, seed, spread),
                1 => random_bundle(&lat, GroupKind::Su2, seed, spread),
                _ => random_bundle_real4(&lat, seed, spread),
            };
            let bytes = encode(&b);
            let back = decode(&bytes).unwrap();
            prop_assert_eq!(&b, &back);
            prop_assert_eq!(bytes, encode(&back));
        }
    }
}
