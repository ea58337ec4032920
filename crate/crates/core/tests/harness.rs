use ris_swipt::baselines::random_phases;
use ris_swipt::harness::*;
use ris_swipt::metrics::worst_case_secrecy;
use ris_swipt::scenario::{draw_channel_sample, effective_channels, ChannelStats, SystemConfig};
use ris_swipt::shortterm::{solve_from_scratch, CccpBcdConfig};

fn small() -> ExperimentConfig {
    ExperimentConfig {
        system: SystemConfig { n_r: 8, m: 2, ..SystemConfig::default() },
        t_f: 3,
        t_s: 2,
        t_c: 2,
        monte_carlo: 2,
        heuristic_samples: 50,
        short_term: CccpBcdConfig { max_outer_iters: 10, ..CccpBcdConfig::default() },
        ..ExperimentConfig::default()
    }
}

#[test]
fn degenerate_loop_is_one_slot() {
    let ecfg = ExperimentConfig { t_f: 1, t_s: 1, monte_carlo: 1, ..small() };
    let seed = 17;
    let run = run_scheme(&ecfg, SchemeId::Random, seed).unwrap();
    assert_eq!(run.slots.len(), 1);
    let rec = run.record("none", None);
    assert_eq!((rec.n_slots, rec.stderr), (1, 0.0));

    let cfg = &ecfg.system;
    let stats = ChannelStats::new(cfg, &mut rng_for(seed, &[stream::SCENARIO, 0])).unwrap();
    let sample = draw_channel_sample(&stats, &mut rng_for(seed, &[stream::SLOT, 0, 0, 0]));
    let theta = random_phases(cfg.n_r, &mut rng_for(seed, &[stream::RANDOM_PHASES, 0, 0, 0]));
    let eff = effective_channels(&sample, &theta).unwrap();
    let sol = solve_from_scratch(&eff, cfg, &ecfg.short_term).unwrap().solution;
    assert_eq!(rec.rate_bps_hz, worst_case_secrecy(&eff, &sol, cfg));
}

#[test]
fn same_seed_same_records() {
    let ecfg = small();
    for scheme in SchemeId::ALL {
        let a = run_scheme(&ecfg, scheme, 3).unwrap();
        let b = run_scheme(&ecfg, scheme, 3).unwrap();
        assert_eq!(a, b, "{scheme}");
        assert!(a.rates().all(|r| r >= 0.0));
    }
    let a = run_scheme(&ecfg, SchemeId::Random, 3).unwrap();
    let c = run_scheme(&ecfg, SchemeId::Random, 4).unwrap();
    assert_ne!(a, c);
}

#[test]
fn warmup_frames_are_not_recorded() {
    let ecfg = ExperimentConfig { warmup_frames: 2, ..small() };
    let run = run_scheme(&ecfg, SchemeId::SaSsca, 5).unwrap();
    assert_eq!(run.slots.len(), ecfg.monte_carlo * ecfg.t_s);
    assert!(run.slots.iter().all(|s| s.frame == 2));
}

#[test]
fn single_value_sweep_matches_run() {
    let file = FileConfig { n_r: 8, m: 2, t_f: 2, t_s: 2, t_c: 1, monte_carlo: 1, heuristic_samples: 30, max_outer_iters: 5, schemes: vec![SchemeId::LowComplexity], ..FileConfig::default() };
    let swept = sweep(&file, "pt_dbm", &[file.pt_dbm], 9).unwrap();
    let plain = run_records(&file, 9).unwrap();
    assert_eq!(swept.len(), 1);
    assert_eq!(swept[0].rate_bps_hz, plain[0].rate_bps_hz);
    assert_eq!(swept[0].n_slots, plain[0].n_slots);
    assert_eq!((swept[0].param.as_str(), swept[0].value), ("pt_dbm", Some(file.pt_dbm)));
    assert!(sweep(&file, "pt_dbm", &[], 9).is_err());
    assert!(sweep(&file, "not_a_key", &[1.0], 9).is_err());
}

#[test]
fn infeasible_slots_are_counted() {
    // 1 W per EU cannot be harvested 5 m away
    let mut ecfg = ExperimentConfig { monte_carlo: 1, t_f: 1, ..small() };
    ecfg.system.eps_uw = 1e6;
    let run = run_scheme(&ecfg, SchemeId::ChannelPowerMax, 1).unwrap();
    let rec = run.record("none", None);
    assert_eq!((rec.n_slots, rec.n_dropped), (0, 2));
    assert!(rec.rate_bps_hz.is_nan());
}

#[test]
fn csv_has_the_documented_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x/out.csv");
    let run = run_scheme(&ExperimentConfig { monte_carlo: 1, t_f: 1, ..small() }, SchemeId::Random, 2).unwrap();
    write_csv(&path, &[run.record("none", None), run.record("pt_dbm", Some(45.0))]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("random,none,,"));
    assert!(lines[2].starts_with("random,pt_dbm,45.0,"));
    assert_eq!(parse_values("35, 45,55").unwrap(), vec![35.0, 45.0, 55.0]);
    assert!(parse_values(" , ").is_err());
}

#[test]
fn sa_ssca_learns_on_a_frozen_scenario() {
    let ecfg = ExperimentConfig {
        system: SystemConfig { n_r: 8, m: 2, ..SystemConfig::default() },
        t_f: 120,
        t_s: 2,
        t_c: 4,
        tau: 0.02,
        monte_carlo: 1,
        frozen_scenario: true,
        short_term: CccpBcdConfig { max_outer_iters: 10, ..CccpBcdConfig::default() },
        ..ExperimentConfig::default()
    };
    let run = run_scheme(&ecfg, SchemeId::SaSsca, 8).unwrap();
    let mean = |lo: usize, hi: usize| summarize(run.slots.iter().filter(|s| s.frame >= lo && s.frame < hi).filter_map(|s| s.rate));
    let (first, se1, _) = mean(0, 40);
    let (last, se2, _) = mean(80, 120);
    assert!(last >= first, "first {first:.3}±{se1:.3}, last {last:.3}±{se2:.3}");
}
