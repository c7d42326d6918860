use std::fs;
use std::path::Path;

use nlslab::cli::dispatch;
use nlslab::diagnostics::DiagnosticRecord;
use nlslab::field::{ComplexField, Grid, C64};
use nlslab::io::{
    decode_snapshot, encode_snapshot, ground_state_for, initial_field, parse_config, parse_config_with,
    read_diagnostics, read_snapshot, write_diagnostics, write_snapshot, Preset, SnapshotKind, SCHEMA_LINE,
};
use nlslab::Error;
use proptest::prelude::*;
use tempfile::tempdir;

const MINIMAL: &str = "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"gaussian\"\n";

#[test]
fn minimal_config_takes_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.grid, Grid::new(1, 256, 16.0).unwrap());
    assert_eq!(cfg.mu, -1.0);
    assert_eq!(cfg.preset, Preset::Gaussian);
    assert_eq!(cfg.evolution, nlslab::evolve::EvolutionConfig::default());
    assert_eq!(cfg.ground_state_tol, 1e-10);
    assert!(cfg.sample_times.is_empty() && cfg.cutoff.is_none() && cfg.morawetz_radius.is_none());
}

#[test]
fn config_errors_name_the_key() {
    let err = parse_config(&format!("{MINIMAL}dampening = 0.1\n")).unwrap_err();
    assert!(matches!(&err, Error::Config(m) if m.contains("dampening")), "{err}");
    let err = parse_config_with(MINIMAL, &["mu=0".into()]).unwrap_err();
    assert!(matches!(&err, Error::Config(m) if m.contains("mu")), "{err}");
    let err = parse_config_with(MINIMAL, &["evolution.dt0=-1".into()]).unwrap_err();
    assert!(matches!(&err, Error::Config(m) if m.contains("evolution.dt0")), "{err}");
    let err = parse_config(&MINIMAL.replace("\"gaussian\"", "\"file:/no/such/file.nls\"")).unwrap_err();
    assert!(matches!(&err, Error::Config(m) if m.contains("preset")), "{err}");
    let err = parse_config(&MINIMAL.replace("n = 256", "n = \"many\"")).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn overrides_reach_nested_keys() {
    let cfg = parse_config_with(MINIMAL, &["evolution.t_end=2.5".into(), "preset_params.seed=9".into()]).unwrap();
    assert_eq!(cfg.evolution.t_end, 2.5);
    assert_eq!(cfg.params.seed, 9);
}

#[test]
fn perturbed_preset_is_deterministic() {
    let text = "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"perturbed_soliton\"\n\
                [preset_params]\nseed = 7\nperturbation = 0.01\n";
    let build = || {
        let cfg = parse_config(text).unwrap();
        let q = ground_state_for(&cfg).unwrap();
        initial_field(&cfg, q.as_ref()).unwrap()
    };
    let (a, b) = (build(), build());
    let bits = |f: &ComplexField| -> Vec<u64> {
        f.samples().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect()
    };
    assert_eq!(bits(&a), bits(&b));
}

fn random_field(seed: u64) -> ComplexField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = Grid::new(2, 16, 3.0).unwrap();
    let samples = (0..g.len()).map(|_| C64::new(rng.random(), rng.random::<f64>() - 0.5)).collect();
    ComplexField::new(g, samples, 0.75).unwrap()
}

#[test]
fn snapshot_round_trip_is_exact() {
    let dir = tempdir().unwrap();
    let f = random_field(1);
    let path = dir.path().join("f.nls");
    write_snapshot(&f, &path).unwrap();
    let g = read_snapshot(&path).unwrap();
    assert_eq!(f, g);
    let bytes = fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"NLS1");
    assert_eq!(bytes.len(), 4 + 4 + 4 + 4 + 2 * 4 + 8 + 8 + 16 * 256);
}

#[test]
fn snapshot_errors_are_distinct() {
    let bytes = encode_snapshot(&random_field(2), SnapshotKind::GroundState);
    assert_eq!(decode_snapshot(&bytes).unwrap().1, SnapshotKind::GroundState);

    let mut v2 = bytes.clone();
    v2[3] = b'2';
    assert!(matches!(decode_snapshot(&v2), Err(Error::VersionMismatch(_))));
    let mut bad = bytes.clone();
    bad[..4].copy_from_slice(b"HDF5");
    assert!(matches!(decode_snapshot(&bad), Err(Error::BadMagic(m)) if &m == b"HDF5"));
    let mut version = bytes.clone();
    version[4] = 2;
    assert!(matches!(decode_snapshot(&version), Err(Error::VersionMismatch(_))));
    for cut in [2, 10, 30, bytes.len() - 1] {
        assert!(matches!(decode_snapshot(&bytes[..cut]), Err(Error::Payload(_))), "cut {cut}");
    }
}

fn record(t: f64, tracked: bool) -> DiagnosticRecord {
    DiagnosticRecord {
        t,
        mass: 1.0 / 3.0,
        energy: -0.1 * t,
        momentum: vec![1e-17, std::f64::consts::PI],
        variance: 2.5,
        grad_sq: 7.0,
        linf: 1.25,
        lambda: tracked.then_some(0.9),
        x_center: tracked.then(|| vec![0.1, -0.2]),
        xi: tracked.then(|| vec![1.0 / 7.0, 0.0]),
        gamma: tracked.then_some(-2.0),
        spacetime_norm_partial: t.sqrt(),
        morawetz_value: None,
        fit_distance: tracked.then_some(1e-9),
    }
}

#[test]
fn diagnostics_csv_round_trip() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_diagnostics(&[], 2, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), SCHEMA_LINE);
    assert!(read_diagnostics(&path).unwrap().is_empty());

    let recs = vec![record(0.0, false), record(0.1, true), record(0.2, true)];
    write_diagnostics(&recs, 2, &path).unwrap();
    assert_eq!(read_diagnostics(&path).unwrap(), recs);

    let mut nan = record(0.3, true);
    nan.energy = f64::NAN;
    assert!(matches!(write_diagnostics(&[nan], 2, &path), Err(Error::Serialize(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_floats_survive(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let dir = tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let mut r = record(1.0, true);
        r.energy = v;
        r.gamma = Some(-v);
        write_diagnostics(std::slice::from_ref(&r), 2, &path).unwrap();
        let back = read_diagnostics(&path).unwrap();
        prop_assert_eq!(back[0].energy.to_bits(), v.to_bits());
        prop_assert_eq!(back[0].gamma.unwrap().to_bits(), (-v).to_bits());
    }
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("c.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("nlslab").chain(args.iter().copied()))
}

#[test]
fn cli_exit_codes() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), MINIMAL);
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["evolve", "--config", &cfg, "--out", out, "--override", "mu=0"]), 1);
    assert_eq!(run(&["evolve", "--config", "/no/such.toml", "--out", out]), 1);
    // a Morawetz check with a cutoff is an unsupported mode, a runtime failure
    let cut = write_config(dir.path(), &format!("{MINIMAL}cutoff = 3.0\n"));
    assert_eq!(run(&["morawetz-check", "--config", &cut, "--out", out]), 2);
}

#[test]
fn cli_ground_state_and_evolve() {
    let dir = tempdir().unwrap();
    let body = "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"soliton\"\nsample_times = [0.0, 0.1, 0.2]\n\
                [evolution]\nt_end = 0.2\nrecord_stride = 50\n";
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["ground-state", "--config", &cfg, "--out", o]), 0);
    assert!(out.join("ground_state.nls").is_file());
    assert!(fs::read_to_string(out.join("ground_state_report.toml")).unwrap().contains("residual"));

    assert_eq!(run(&["evolve", "--config", &cfg, "--out", o]), 0);
    for i in 0..3 {
        assert!(out.join(format!("snapshot_{i:04}.nls")).is_file());
    }
    let first = read_diagnostics(out.join("diagnostics.csv")).unwrap();
    assert!(first.iter().all(|r| r.lambda.is_some()));

    // resume from the middle snapshot into the same directory
    let mid = out.join("snapshot_0001.nls");
    let resume = format!(
        "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"file:{}\"\n[evolution]\nt_end = 0.2\nrecord_stride = 50\n",
        mid.display()
    );
    let cfg2 = write_config(dir.path(), &resume);
    assert_eq!(run(&["evolve", "--config", &cfg2, "--out", o]), 0);
    let spliced = read_diagnostics(out.join("diagnostics.csv")).unwrap();
    assert!(spliced.windows(2).all(|w| w[1].t > w[0].t));
    assert!((spliced.last().unwrap().t - 0.3).abs() < 1e-12);
    assert!(spliced.iter().any(|r| r.t < 0.1));
}

#[test]
fn cli_transform_fit_and_virial() {
    let dir = tempdir().unwrap();
    let body = "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"boosted_soliton\"\n\
                [preset_params]\nboost = [0.3]\n\
                [transform]\nkind = \"group\"\nlambda = 1.1\nx0 = [0.5]\n\
                [evolution]\nt_end = 0.1\nrecord_stride = 20\nrate_constant = 100.0\n";
    let cfg = write_config(dir.path(), body);
    let out = dir.path().join("r");
    let o = out.to_str().unwrap();
    assert_eq!(run(&["transform", "--config", &cfg, "--out", o]), 0);
    assert!(read_snapshot(out.join("transformed.nls")).is_ok());
    assert_eq!(run(&["fit", "--config", &cfg, "--out", o]), 0);
    let fit = read_diagnostics(out.join("diagnostics.csv")).unwrap();
    assert!(fit[0].fit_distance.unwrap() < 1e-6);
    assert_eq!(run(&["virial-check", "--config", &cfg, "--out", o]), 0);
    assert!(out.join("virial.csv").is_file());
}
