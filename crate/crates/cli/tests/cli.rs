use std::path::PathBuf;
use std::process::Command as Proc;

use fgaudin_cli::config::{AlgebraSection, EllipticSection, SiteKind, SiteSection, WeightSpec};
use fgaudin_cli::report::{write_jsonl, write_records_csv, write_sweep_csv};
use fgaudin_cli::*;
use proptest::prelude::*;

const MINIMAL: &str = r#"
[algebra]
series = "A"
rank = 1

[elliptic]
tau = "0.1+0.9i"

[[sites]]
z = "0.1+0.05i"
kind = "irrep"
weight = { dynkin = [1] }

[[sites]]
z = "0.55+0.3i"
kind = "irrep"
weight = { dynkin = [1] }
"#;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn shipped(name: &str) -> String {
    std::fs::read_to_string(configs_dir().join(name)).unwrap()
}

fn semantic_constraint(src: &str) -> &'static str {
    match load_config_str(src) {
        Err(ConfigError::Semantic { constraint, .. }) => constraint,
        other => panic!("expected a semantic error, got {other:?}"),
    }
}

#[test]
fn minimal_config_loads_with_defaults_echoed() {
    let cfg = load_config_str(MINIMAL).unwrap();
    assert_eq!(cfg.tolerances.commute, 1e-8);
    assert_eq!(cfg.tolerances.eigen, 1e-7);
    assert_eq!(cfg.sampling.commute_samples, 20);
    assert_eq!(cfg.sampling.sweep_points, 100);
    assert_eq!(cfg.elliptic.n_max, 64);
    let echoed = cfg.to_toml();
    for key in ["[tolerances]", "[sampling]", "[run]", "eps_term", "pole_guard", "negative_control"] {
        assert!(echoed.contains(key), "{key} missing from\n{echoed}");
    }
    assert_eq!(load_config_str(&echoed).unwrap(), cfg);
}

#[test]
fn dual_verma_depth_is_materialized() {
    let cfg = load_config_str(&shipped("a1_dual_verma_m1.toml")).unwrap();
    assert!(cfg.sites.iter().all(|s| s.depth == Some(3)));
    let cfg = load_config_str(&shipped("a2_dual_verma_m2.toml")).unwrap();
    assert!(cfg.sites.iter().all(|s| s.depth == Some(4)));
}

#[test]
fn coinciding_sites_are_named() {
    let src = MINIMAL.replace("0.55+0.3i", "0.1+0.05i");
    assert_eq!(semantic_constraint(&src), "sites coincide mod lattice");
    // z₂ = z₁ + 1 + τ.
    let src = MINIMAL.replace("0.55+0.3i", "1.2+0.95i");
    assert_eq!(semantic_constraint(&src), "sites coincide mod lattice");
}

#[test]
fn charge_violation_is_named() {
    let src = shipped("a1_dual_verma_m1.toml").replace("0.63-0.11i", "0.6-0.11i");
    assert!(semantic_constraint(&src).starts_with("charge condition"));
}

#[test]
fn other_semantic_errors() {
    assert_eq!(semantic_constraint(&MINIMAL.replace("rank = 1", "rank = 5")), "supported algebra");
    assert_eq!(semantic_constraint(&MINIMAL.replace("\"A\"", "\"E\"")), "supported algebra");
    assert_eq!(semantic_constraint(&MINIMAL.replace("0.1+0.9i", "0.1-0.9i")), "Im τ > 0");
    assert_eq!(
        semantic_constraint(&MINIMAL.replacen("dynkin = [1]", "dynkin = [1, 0]", 1)),
        "weight length equals rank"
    );
    assert_eq!(
        semantic_constraint(&MINIMAL.replacen("dynkin = [1]", "dynkin = [\"0.5\"]", 1)),
        "irrep weight dominant integral"
    );
    let with_bethe = format!("{MINIMAL}\n[bethe]\nassignment = [0]\n");
    assert_eq!(semantic_constraint(&with_bethe), "Bethe sites are dual Verma modules");
    let src = shipped("a1_dual_verma_m1.toml").replace("assignment = [0]", "assignment = [0]\nseeds = [[\"0.3\", \"0.4\"]]");
    assert_eq!(semantic_constraint(&src), "seed has one finite value per root");
    let src = format!("{MINIMAL}\n[sampling]\ncommute_samples = 0\n");
    assert_eq!(semantic_constraint(&src), "sample count in range");
    let src = format!("{MINIMAL}\n[tolerances]\neigen = -1.0\n");
    assert_eq!(semantic_constraint(&src), "positive finite tolerance");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let src = format!("{MINIMAL}\n[run]\nseed = 1\ncolour = 3\n");
    match load_config_str(&src) {
        Err(ConfigError::Parse { line, message, .. }) => {
            assert_eq!(line, src.lines().position(|l| l.starts_with("colour")).unwrap() + 1);
            assert!(message.contains("colour"));
        }
        other => panic!("{other:?}"),
    }
    let src = MINIMAL.replace("tau = \"0.1+0.9i\"", "tau = \"0.1+0.9j\"");
    match load_config_str(&src) {
        Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 7),
        other => panic!("{other:?}"),
    }
    assert!(matches!(load_config_str("[algebra\n"), Err(ConfigError::Parse { line: 1, .. })));
}

#[test]
fn shipped_configs_all_load() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        let cfg = load_config(&path).unwrap();
        Instance::build(cfg).unwrap();
        n += 1;
    }
    assert!(n >= 6);
}

#[test]
fn commute_check_with_equal_spectral_parameters_is_zero() {
    let src = format!("{MINIMAL}\n[sampling]\nequal_spectral = true\ncommute_samples = 3\n");
    let inst = Instance::from_toml(&src).unwrap();
    let rep = run(Command::CommuteCheck, &inst, RunOptions::default());
    let rec = rep.records.iter().find(|r| r.name == "commute.normalized").unwrap();
    assert_eq!(rec.residual, Some(0.0));
    assert!(rec.pass);
}

#[test]
fn empty_report_gives_header_only_csv() {
    let mut buf = Vec::new();
    write_records_csv(&Report::default(), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "name,instance,residual,tolerance,comparison,pass,detail\n");
    assert!(Report::default().verdict());
}

#[test]
fn one_record_gives_one_json_line() {
    let rep = Report {
        records: vec![Record::measured("x.check", "abc", 1e-9, 1e-8, Comparison::AtMost)],
        ..Report::default()
    };
    let mut buf = Vec::new();
    write_jsonl(&rep, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
    assert_eq!(v["name"], "x.check");
    assert!(v.get("wall_ms").is_none());
}

#[test]
fn csv_quotes_fields_with_commas_and_quotes() {
    let rep = Report {
        records: vec![Record::info("a", "d", "x, \"y\"")],
        ..Report::default()
    };
    let mut buf = Vec::new();
    write_records_csv(&rep, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with("\"x, \"\"y\"\"\""), "{text}");
}

#[test]
fn eigen_sweep_has_100_monotone_rows() {
    let inst = Instance::from_toml(&shipped("a1_dual_verma_m1.toml")).unwrap();
    let rep = run(Command::EigenCheck, &inst, RunOptions::default());
    assert!(rep.verdict(), "{:?}", rep.records);
    assert_eq!(rep.sweep.len(), 100);
    assert!(rep.sweep.windows(2).all(|w| w[1].u_re > w[0].u_re));
    assert!(rep.sweep.iter().all(|r| r.tau.is_some()));
    let mut buf = Vec::new();
    write_sweep_csv(&rep, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 101);
}

#[test]
fn bethe_solve_records_provenance() {
    let inst = Instance::from_toml(&shipped("a1_dual_verma_m1.toml")).unwrap();
    let rep = run(Command::BetheSolve, &inst, RunOptions::default());
    let rec = rep.records.iter().find(|r| r.name == "bethe.newton").unwrap();
    assert!(rec.pass);
    let sols = rec.data.as_ref().unwrap().as_array().unwrap();
    assert!(!sols.is_empty());
    for s in sols {
        for key in ["t", "seed", "iterations", "residual", "condition"] {
            assert!(s.get(key).is_some(), "{key}");
        }
        let t = parse_complex(s["t"][0].as_str().unwrap()).unwrap();
        assert!(t.norm().is_finite());
    }
}

#[test]
fn records_are_ordered_by_name_and_negative_control_fails() {
    let inst = Instance::from_toml(&shipped("a1_dual_verma_m1.toml")).unwrap();
    let rep = run(Command::FullVerify, &inst, RunOptions::default());
    let names: Vec<&str> = rep.records.iter().map(|r| r.name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert!(rep.verdict());
    let neg = run(Command::EigenCheck, &inst, RunOptions { negative_control: true });
    assert!(!neg.verdict());
}

#[test]
fn seed_changes_samples_but_not_validity() {
    let src = shipped("a1_fund_fund.toml");
    let a = Instance::from_toml(&format!("{src}\n[run]\nseed = 1\n")).unwrap();
    let b = Instance::from_toml(&format!("{src}\n[run]\nseed = 2\n")).unwrap();
    assert_ne!(a.digest, b.digest);
    let ra = run(Command::CommuteCheck, &a, RunOptions::default());
    let rb = run(Command::CommuteCheck, &b, RunOptions::default());
    assert!(ra.verdict() && rb.verdict());
    assert_ne!(ra.records[0].residual, rb.records[0].residual);
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_fgaudin"))
}

#[test]
fn exit_codes_end_to_end() {
    let cfg = configs_dir().join("a1_dual_verma_m1.toml");
    let ok = bin().args(["full-verify", "--format", "jsonl", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let neg = bin()
        .args(["eigen-check", "--negative-control", "--format", "jsonl", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(neg.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, MINIMAL.replace("0.55+0.3i", "0.1+0.05i")).unwrap();
    let out = bin().args(["full-verify", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sites coincide mod lattice"));
    let fund = configs_dir().join("a1_fund_fund.toml");
    let out = bin().args(["bethe-solve", "--config"]).arg(&fund).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["full-verify", "--format", "xml", "--config"]).arg(&fund).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_directory_receives_report_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("a1_dual_verma_m1.toml");
    let st = bin()
        .args(["full-verify", "--format", "csv", "--seed", "5", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["config.toml", "report.csv", "sweep.csv", "elliptic_table.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let echoed = load_config(&dir.path().join("config.toml")).unwrap();
    assert_eq!(echoed.run.seed, 5);
    let table = std::fs::read_to_string(dir.path().join("elliptic_table.csv")).unwrap();
    assert!(table.starts_with("z_re,z_im,theta_re,theta_im,zeta_re,zeta_im,w_re,w_im\n"));
    assert_eq!(table.lines().count(), 101);
}

#[test]
fn jsonl_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs_dir().join("a2_dual_verma_m2.toml");
    let mut outs = Vec::new();
    for k in 0..2 {
        let d = dir.path().join(k.to_string());
        let st = bin()
            .args(["full-verify", "--format", "jsonl", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&d)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        outs.push(std::fs::read(d.join("report.jsonl")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

fn cx() -> impl Strategy<Value = Cx> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Cx::new(a, b))
}

fn site() -> impl Strategy<Value = SiteSection> {
    (cx(), prop::bool::ANY, cx(), prop::option::of(0usize..6)).prop_map(|(z, dynkin, w, depth)| SiteSection {
        z,
        kind: SiteKind::DualVerma,
        weight: if dynkin { WeightSpec::Dynkin(vec![w]) } else { WeightSpec::Simple(vec![w]) },
        depth,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip_is_lossless(
        tau in (-1.0f64..1.0, 0.3f64..2.0),
        sites in prop::collection::vec(site(), 1..4),
        seed in any::<u64>(),
        eigen in 1e-12f64..1e-3,
    ) {
        let mut cfg = ExperimentConfig {
            algebra: AlgebraSection { series: "A".into(), rank: 1 },
            elliptic: EllipticSection { tau: Cx::new(tau.0, tau.1), eps_term: 1e-16, n_max: 64 },
            sites,
            bethe: None,
            tolerances: Default::default(),
            sampling: Default::default(),
            run: Default::default(),
        };
        cfg.run.seed = seed;
        cfg.tolerances.eigen = eigen;
        if let Ok(valid) = validate(cfg) {
            let text = valid.to_toml();
            prop_assert_eq!(load_config_str(&text).unwrap(), valid);
        }
    }

    #[test]
    fn complex_format_parse_round_trip(re in any::<f64>(), im in any::<f64>()) {
        prop_assume!(re.is_finite() && im.is_finite());
        let z = fgaudin::C64::new(re, im);
        let back = parse_complex(&format_complex(z)).unwrap();
        prop_assert_eq!(back.re.to_bits(), re.to_bits());
        prop_assert_eq!(back.im.to_bits(), im.to_bits());
    }

    #[test]
    fn verdict_fails_iff_some_record_fails(passes in prop::collection::vec(any::<bool>(), 0..12)) {
        let records = passes
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let r = Record::measured(&format!("c{k}"), "d", 1.0, 2.0, Comparison::AtMost);
                if p { r } else { Record::error(&format!("c{k}"), "d", "boom") }
            })
            .collect();
        let rep = Report { records, ..Report::default() };
        prop_assert_eq!(rep.verdict(), passes.iter().all(|&p| p));
    }
}

#[test]
fn fuzz_corpus_replays_cleanly() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus");
    let read = |dir: &str| -> Vec<String> {
        let mut v: Vec<_> = std::fs::read_dir(root.join(dir))
            .unwrap()
            .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
            .collect();
        v.sort();
        v
    };
    for s in read("parse_complex") {
        if let Ok(z) = fgaudin_cli::parse_complex(&s) {
            let back = fgaudin_cli::parse_complex(&fgaudin_cli::format_complex(z)).unwrap();
            assert_eq!((back.re.to_bits(), back.im.to_bits()), (z.re.to_bits(), z.im.to_bits()));
        }
    }
    for s in read("config_parse") {
        if let Ok(cfg) = fgaudin_cli::parse_config(&s) {
            assert_eq!(fgaudin_cli::parse_config(&cfg.to_toml()).unwrap().to_toml(), cfg.to_toml());
        }
    }
    let mut valid = 0;
    for s in read("config_validate") {
        if let Ok(cfg) = fgaudin_cli::load_config_str(&s) {
            fgaudin_cli::load_config_str(&cfg.to_toml()).unwrap();
            valid += 1;
        }
    }
    assert!(valid >= 6);
}
