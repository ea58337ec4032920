use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-swipt"))
}

const TINY: &str = r#"
n_r = 4
m = 2
t_f = 2
t_s = 2
t_c = 1
monte_carlo = 1
heuristic_samples = 20
max_outer_iters = 3
inst_rounds = 1
inst_ascent_steps = 2
schemes = ["random", "low-complexity", "sa-ssca"]
"#;

#[test]
fn run_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let st = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(&out).args(["--seed", "5"]).status().unwrap();
        assert!(st.success());
        outputs.push(std::fs::read_to_string(out.join("run.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(lines.next().unwrap(), "scheme,param,value,rate_bps_hz,stderr,n_slots,n_dropped,seed,wall_s");
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_writes_one_row_per_value_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY.replace("\"low-complexity\", \"sa-ssca\"", "\"channel-power-max\"")).unwrap();
    let out = dir.path().join("sw");
    let st = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--param", "pt_dbm", "--values", "35,45"])
        .arg("--out")
        .arg(&out)
        .args(["--seed", "2"])
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(out.join("sweep_pt_dbm.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().starts_with("random,pt_dbm,35.0,"));
}

#[test]
fn unknown_config_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "n_r = 4\nwhatever = 3\n").unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).args(["--seed", "1"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("whatever"));
}

#[test]
fn validate_quick_passes() {
    let out = bin().args(["validate", "--quick"]).env("RIS_SWIPT_THREADS", "1").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn shipped_configs_parse() {
    for name in ["desk", "paper", "quick"] {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/{name}.toml"));
        ris_swipt::harness::FileConfig::load(&path).and_then(|f| f.into_experiment()).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
