use super::*;
use crate::channel::{Dmc, InputPrior};

fn cfg(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn noiseless_m2(trials: usize) -> ExperimentConfig {
    cfg(&format!(
        r#"{{"scheme":"known","channel":{{"type":"noiseless","size":2}},"codebook":{{"M":2}},"epsilon":0.0625,"trials":{trials}}}"#
    ))
}

#[test]
fn noiseless_binary_stops_at_five() {
    let c = noiseless_m2(2000);
    let exp = Experiment::new(c).unwrap();
    let mut ties = 0;
    for i in 0..2000 {
        let r = exp.trial(i);
        assert_eq!(r.t, 5, "trial {i}");
        assert!(!r.truncated);
        // The only way to err is both codewords agreeing on all five symbols.
        if r.error {
            assert!(r.tie);
            ties += 1;
        }
    }
    // Tie probability is 2^-5.
    let ci = wilson_interval(ties, 2000, Z99);
    assert!(ci.contains(1.0 / 32.0), "{ties} ties");
}

#[test]
fn zero_capacity_truncates() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.5},"codebook":{"M":4,"prior":[0.5,0.5]},
        "epsilon":0.1,"trials":20,"max_symbols":1000}"#);
    let report = run_experiment(&c).unwrap();
    assert_eq!(report.truncations, 20);
    assert_eq!(report.errors, 20);
    assert_eq!(report.mean_t, 1000.0);
}

#[test]
fn zero_capacity_without_cap_is_rejected() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.5},"codebook":{"M":4,"prior":[0.5,0.5]},
        "epsilon":0.1,"trials":20}"#);
    assert!(matches!(Experiment::new(c), Err(SimError::Config(_))));
}

#[test]
fn trials_are_deterministic() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.11},"codebook":{"M":256},"epsilon":0.0625,"trials":10,"seed":7}"#);
    for i in [0, 3, 9] {
        assert_eq!(run_trial(&c, i).unwrap(), run_trial(&c, i).unwrap());
    }
    assert_ne!(run_trial(&c, 0).unwrap(), run_trial(&c, 1).unwrap());
}

#[test]
fn record_invariants() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.25},"codebook":{"M":16},"epsilon":0.25,"trials":300,"max_symbols":40}"#);
    let (_, records) = run_experiment_with_records(&c).unwrap();
    for r in &records {
        assert!(r.t <= 40);
        assert_eq!(r.error, r.w_hat != Some(r.w) || r.tie || r.truncated);
    }
}

#[test]
fn report_is_independent_of_workers() {
    let mut c = cfg(r#"{"scheme":"universal","channel":{"type":"bsc","p":0.11},"codebook":{"M":64},"epsilon":0.125,"trials":200}"#);
    let a = run_experiment(&c).unwrap().to_json();
    c.workers = 3;
    let b = run_experiment(&c).unwrap();
    assert_eq!(a, b.to_json());
}

#[test]
fn bec_repetition_mean() {
    let c = cfg(r#"{"scheme":"bec_repetition","channel":{"type":"bec","delta":0.5},"trials":20000}"#);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.errors, 0);
    let se = r.std_t / (r.trials as f64).sqrt();
    assert!((r.mean_t - 2.0).abs() <= Z99 * se, "{} ± {se}", r.mean_t);
    assert_eq!(r.bound("expected_transmissions"), Some(2.0));
}

#[test]
fn universal_replay_holds() {
    let c = cfg(r#"{"scheme":"universal","channel":{"type":"bsc","p":0.25},"codebook":{"M":64},"epsilon":0.125,"trials":100}"#);
    let (report, records) = run_experiment_with_records(&c).unwrap();
    assert!(records.iter().all(|r| r.replay.map_or(r.truncated, |c| c.holds())));
    assert_eq!(report.extra("replay_violations"), Some(0.0));
    assert_eq!(report.extra("dominance_violations"), Some(0.0));
}

#[test]
fn feedback_latch_adds_at_most_s_minus_one() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.11},"codebook":{"M":64},"epsilon":0.125,"trials":200}"#);
    let cmp = run_feedback_comparison(&c, &[1, 3, 8]).unwrap();
    assert_eq!(cmp.violations, vec![0, 0, 0]);
    for (s, r) in cmp.periods.iter().zip(&cmp.reports) {
        assert!(r.mean_t >= cmp.reports[0].mean_t);
        assert_eq!(r.feedback_period, *s);
    }
}

#[test]
fn randomizer_aborts_have_zero_length() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"bsc","p":0.11},"codebook":{"M":16},"epsilon":0.125,
        "trials":500,"randomize_alpha":0.5}"#);
    let (r, records) = run_experiment_with_records(&c).unwrap();
    assert!(records.iter().filter(|r| r.aborted).all(|r| r.t == 0 && r.error));
    assert!(wilson_interval(r.aborts, 500, Z99).contains(0.5));
    assert!(r.bound("expected_time_randomized").is_some());
}

#[test]
fn slepian_wolf_identical_pair() {
    let c = cfg(r#"{"scheme":"slepian_wolf","channel":{"type":"noiseless","size":2},"epsilon":0.25,"trials":400,
        "source":{"type":"pair","joint":[[0.25,0,0,0],[0,0.25,0,0],[0,0,0.25,0],[0,0,0,0.25]]}}"#);
    let (r, records) = run_experiment_with_records(&c).unwrap();
    // W2 is known once W1 is: the second stage has one candidate with threshold log2(2/ε) = 3.
    let clean: Vec<_> = records.iter().filter(|r| !r.error).collect();
    assert!(clean.len() > 300);
    assert!(clean.iter().all(|r| r.stage_times.unwrap()[1] == 3));
    assert!(r.error_ci.lo <= 0.25);
    assert!(r.extra("mean_t1").unwrap() <= 2.0 + 2.0 + 1.0);
}

#[test]
fn config_errors() {
    let bad = [
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.1},"codebook":{"M":4},"epsilon":0.1,"trials":0}"#,
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.1},"codebook":{"M":4},"epsilon":1.5,"trials":3}"#,
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.1},"codebook":{"M":4},"trials":3}"#,
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.1},"codebook":{"M":4},"epsilon":0.1,"trials":3,"feedback_period":0}"#,
        r#"{"scheme":"universal","channel":{"type":"awgn","signal_power":1,"noise_variance":1},"codebook":{"M":4},"epsilon":0.1,"trials":3}"#,
        r#"{"scheme":"bec_repetition","channel":{"type":"bsc","p":0.1},"trials":3}"#,
        r#"{"scheme":"known","channel":{"type":"bsc","p":0.1},"codebook":{"M":5},"source":{"type":"uniform","M":4},"epsilon":0.1,"trials":3}"#,
    ];
    for b in bad {
        assert!(Experiment::new(cfg(b)).is_err(), "{b}");
    }
    assert!(ExperimentConfig::from_json(r#"{"scheme":"known","bogus":1}"#).is_err());
}

#[test]
fn gaussian_known_decoder_runs() {
    let c = cfg(r#"{"scheme":"known","channel":{"type":"awgn","signal_power":1,"noise_variance":1},"codebook":{"M":16},"epsilon":0.125,"trials":200}"#);
    let r = run_experiment(&c).unwrap();
    assert_eq!(r.truncations, 0);
    assert!(r.error_ci.lo <= 0.125);
    assert!(r.mean_t <= r.bound("expected_time_known").unwrap() + 3.0 * r.mean_t_half_width());
}

#[test]
fn audit_single_step_has_unit_mean() {
    let dmc = Dmc::bsc(0.2).unwrap();
    let a = martingale_audit(&dmc, &InputPrior::uniform(2), 1, 20000, 10.0, 3).unwrap();
    assert!(a.known.mean_consistent(), "{:?}", a.known);
    assert!(a.universal.mean_consistent(), "{:?}", a.universal);
    assert_eq!(a.known.crossing_fraction, 0.0);
}

#[test]
fn trials_csv_has_header_and_rows() {
    let (_, records) = run_experiment_with_records(&noiseless_m2(3)).unwrap();
    let mut buf = Vec::new();
    write_trials_csv(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("trial,w,w_hat,T,error,tie,truncated"));
}
