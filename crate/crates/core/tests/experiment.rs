use spbm::coverage::count_witnesses;
use spbm::experiment::{
    parse_csv, parse_json, rate_study, replicate, run_experiment, to_csv, to_json, ExperimentConfig, Study,
};
use spbm::model::{default_zeta, sample_process, scaling_radius, RadiusLaw, RngStream, ScalingSchedule, ScheduleVariant};
use spbm::region::Aabb;

fn config(variant: ScheduleVariant, law: RadiusLaw, t: Vec<f64>, m: usize) -> ExperimentConfig {
    let s = ScalingSchedule::new(2, 1, 0.0, variant).unwrap();
    let mut c = ExperimentConfig::new(s, law, t, m, 2718);
    c.timing = false;
    c
}

#[test]
fn report_does_not_depend_on_workers() {
    let mut c = config(ScheduleVariant::Corrected, RadiusLaw::UniformInterval(0.5, 1.5), vec![200.0, 2000.0], 30);
    c.studies = vec![Study::Coverage, Study::MeanWitness, Study::Threshold];
    let base = run_experiment(&c).unwrap();
    for w in [2, 5] {
        c.workers = w;
        let other = run_experiment(&c).unwrap();
        assert_eq!(base.rows, other.rows);
        assert_eq!(base.threshold_samples, other.threshold_samples);
    }
    c.seed += 1;
    assert_ne!(run_experiment(&c).unwrap().threshold_samples, base.threshold_samples);
}

#[test]
fn corrected_schedule_dominates_per_replication() {
    let t = vec![500.0, 5000.0];
    let hj = config(ScheduleVariant::HallJanson, RadiusLaw::Deterministic(1.0), t.clone(), 200);
    let corr = config(ScheduleVariant::Corrected, RadiusLaw::Deterministic(1.0), t, 200);
    let mut strictly = 0;
    for ti in 0..2 {
        assert!(scaling_radius(hj.t_values[ti], &corr.schedule, &corr.law).unwrap() > scaling_radius(hj.t_values[ti], &hj.schedule, &hj.law).unwrap());
        for rep in 0..200 {
            let a = replicate(&hj, ti, rep).unwrap();
            let b = replicate(&corr, ti, rep).unwrap();
            assert_eq!(a.points, b.points, "common random numbers");
            if a.resamples == 0 && b.resamples == 0 {
                assert!(!a.covered || b.covered, "t index {ti} replication {rep}");
                strictly += (b.covered && !a.covered) as usize;
            }
        }
    }
    assert!(strictly > 0);
}

#[test]
fn truncation_only_matters_with_large_marks() {
    let a = Aabb::<2>::unit();
    let t = 1e4f64;
    for law in [RadiusLaw::Deterministic(1.0), RadiusLaw::UniformInterval(0.5, 1.5)] {
        let s = ScalingSchedule::new(2, 1, 0.0, ScheduleVariant::Corrected).unwrap();
        let r = scaling_radius(t, &s, &law).unwrap();
        let level = t.powf(default_zeta(2, &law));
        for seed in 0..5 {
            let full = sample_process(&a, t, &law, r, RngStream::new(seed, 0), None).unwrap();
            let cut = full.truncated(level);
            let nf = count_witnesses(&full, r, &a, 1).unwrap().count;
            let nc = count_witnesses(&cut, r, &a, 1).unwrap().count;
            if full.max_mark() <= level {
                assert_eq!(nf, nc, "{law} seed {seed}");
            }
        }
        if law == RadiusLaw::Deterministic(1.0) {
            assert!(level >= 1.0);
        }
    }
}

#[test]
fn reports_round_trip() {
    let mut c = config(ScheduleVariant::Corrected, RadiusLaw::Deterministic(1.0), vec![300.0], 12);
    c.studies = vec![Study::MeanWitness, Study::Threshold];
    let r = run_experiment(&c).unwrap();
    let (cfg, rows) = parse_csv(&to_csv(&r).unwrap()).unwrap();
    assert_eq!(cfg.unwrap(), c);
    assert_eq!(rows, r.rows);
    let back = parse_json(&to_json(&r).unwrap()).unwrap();
    assert_eq!(back.rows, r.rows);
    assert_eq!(back.config, r.config);
}

#[test]
fn rate_study_fits_every_t() {
    let c = config(ScheduleVariant::Corrected, RadiusLaw::Deterministic(1.0), vec![100.0, 300.0, 1000.0, 10000.0], 40);
    let fit = rate_study(&c).unwrap();
    assert_eq!(fit.points.len(), 4);
    assert_eq!(fit.slope.is_none(), fit.indeterminate);
}
