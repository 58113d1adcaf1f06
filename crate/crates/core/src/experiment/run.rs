use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Study};
use super::stats::{fit_rate, ks_gumbel, mean_se, RateFit};
use crate::coverage::{Decision, FastCoverage};
use crate::error::{Error, Result};
use crate::model::{
    alpha, constant_cdky, default_zeta, extend_process, limit_probability, sample_process, scaling_radius,
    MarkedPointSet, RngStream, ScalingSchedule, ScheduleVariant,
};
use crate::region::Aabb;

/// Attempts per replication before a run is abandoned; the attempt number
/// occupies 8 bits of the stream index.
pub const MAX_ATTEMPTS: u64 = 255;
const MAX_EXTENSIONS: u64 = 255;

/// Stream index of one draw: `t` index, attempt and window extension in the
/// high bits, replication in the low 32.
pub fn stream_index(t_index: usize, attempt: u64, extension: u64, rep: usize) -> u64 {
    debug_assert!(t_index < 1 << 16 && attempt <= MAX_ATTEMPTS && extension <= MAX_EXTENSIONS);
    ((t_index as u64) << 48) | (attempt << 40) | (extension << 32) | rep as u64
}

/// Outcome of one replication at one `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Replication {
    pub covered: bool,
    /// Witness count of the truncated process, when requested.
    pub witness_count: Option<usize>,
    /// Coverage threshold, when requested; infinite with fewer than `k` points.
    pub threshold: Option<f64>,
    /// Draws discarded because a verdict was unreliable or a count degenerate.
    pub resamples: u64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub r_t: f64,
    pub p_hat: f64,
    pub std_err: f64,
    pub limit_prob: f64,
    pub abs_error: f64,
    #[serde(rename = "mean_F")]
    pub mean_f: Option<f64>,
    #[serde(rename = "F_std_err")]
    pub f_std_err: Option<f64>,
    #[serde(rename = "predicted_mean_F")]
    pub predicted_mean_f: f64,
    pub ks_stat: Option<f64>,
    pub wall_time_s: f64,
    pub degenerate_resamples: u64,
}

/// Normalized coverage thresholds at one `t`, in replication order.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdSamples {
    pub t: f64,
    pub values: Vec<f64>,
    pub ks_stat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    #[serde(default)]
    pub rate_fit: Option<RateFit>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub threshold_samples: Vec<ThresholdSamples>,
}

/// Share of resampled draws above which a run is flagged.
pub const RESAMPLE_BUDGET: f64 = 0.01;

/// Per-`t` quantities shared by all replications.
#[derive(Clone, Copy, Debug)]
struct Level {
    t: f64,
    r_t: f64,
    /// Sampling margin scale, the same for both schedule variants so that
    /// they see common random numbers.
    r_sample: f64,
    truncate_at: f64,
}

fn levels(cfg: &ExperimentConfig) -> Result<Vec<Level>> {
    let zeta = cfg.zeta.unwrap_or_else(|| default_zeta(cfg.schedule.d, &cfg.law));
    let a = alpha(cfg.schedule.d, &cfg.law);
    cfg.t_values
        .iter()
        .map(|&t| {
            let r_t = scaling_radius(t, &cfg.schedule, &cfg.law)?;
            let mut r_max: f64 = 0.0;
            for variant in [ScheduleVariant::HallJanson, ScheduleVariant::Corrected] {
                let s = ScalingSchedule { variant, ..cfg.schedule };
                r_max = r_max.max(scaling_radius(t, &s, &cfg.law)?);
            }
            let r_sample = if r_max > 0.0 {
                2.0 * r_max
            } else {
                (1.0 / (a * t)).powf(1.0 / cfg.schedule.d as f64)
            };
            Ok(Level {
                t,
                r_t,
                r_sample,
                truncate_at: t.powf(zeta),
            })
        })
        .collect()
}

struct Runner<'c, const D: usize> {
    cfg: &'c ExperimentConfig,
    region: Aabb<D>,
    want_count: bool,
    want_threshold: bool,
}

impl<const D: usize> Runner<'_, D> {
    fn replicate(&self, ti: usize, lv: &Level, rep: usize) -> Result<Replication> {
        for attempt in 0..=MAX_ATTEMPTS {
            let stream = RngStream::new(self.cfg.seed, stream_index(ti, attempt, 0, rep));
            let set = sample_process(&self.region, lv.t, &self.cfg.law, lv.r_sample, stream, None)?;
            if let Some(mut out) = self.attempt(ti, lv, rep, attempt, set)? {
                out.resamples = attempt;
                return Ok(out);
            }
        }
        Err(Error::Config(format!(
            "replication {rep} at t = {} stayed degenerate after {MAX_ATTEMPTS} resamples",
            lv.t
        )))
    }

    /// `None` asks for a fresh draw.
    fn attempt(
        &self,
        ti: usize,
        lv: &Level,
        rep: usize,
        attempt: u64,
        set: MarkedPointSet<D>,
    ) -> Result<Option<Replication>> {
        let k = self.cfg.schedule.k;
        let r_t = lv.r_t;
        let fast = FastCoverage::new(set.points(), &self.region, if r_t > 0.0 { r_t } else { lv.r_sample })?;
        let scan = (r_t > 0.0).then(|| fast.scan(r_t, k));
        let covered = match &scan {
            None => false,
            Some(s) => match fast.decide_scan(s) {
                Decision::Covered => true,
                Decision::NotCovered => false,
                Decision::Unreliable => return Ok(None),
            },
        };

        let mut witness_count = None;
        if self.want_count {
            let (n, degenerate) = match &scan {
                None => (0, 0),
                Some(s) if set.max_mark() <= lv.truncate_at => fast.count_scan(s),
                Some(_) => {
                    let kept = set.truncated(lv.truncate_at);
                    let f = FastCoverage::new(kept.points(), &self.region, r_t)?;
                    f.count_scan(&f.scan(r_t, k))
                }
            };
            if degenerate > 0 {
                return Ok(None);
            }
            witness_count = Some(n);
        }

        let mut threshold = None;
        if self.want_threshold {
            threshold = Some(if set.len() < k {
                f64::INFINITY
            } else {
                let below = scan.as_ref().filter(|_| !covered);
                match fast.threshold_from(below, k, self.cfg.tol_rel, self.hint(lv), lv.r_sample) {
                    Ok(o) => o.radius,
                    Err(Error::Config(_)) => self.threshold_extended(ti, lv, rep, attempt, &set)?,
                    Err(e) => return Err(e),
                }
            });
        }

        Ok(Some(Replication {
            covered,
            witness_count,
            threshold,
            resamples: 0,
            points: set.len(),
        }))
    }

    fn hint(&self, lv: &Level) -> (f64, f64) {
        let r = if lv.r_t > 0.0 { lv.r_t } else { 0.5 * lv.r_sample };
        (0.9 * r, 1.4 * r)
    }

    /// Widens the sampled window until the threshold fits inside its margin.
    fn threshold_extended(
        &self,
        ti: usize,
        lv: &Level,
        rep: usize,
        attempt: u64,
        set: &MarkedPointSet<D>,
    ) -> Result<f64> {
        let k = self.cfg.schedule.k;
        let mut current = set.clone();
        let mut margin = lv.r_sample;
        for ext in 1..=MAX_EXTENSIONS {
            margin *= 2.0;
            let stream = RngStream::new(self.cfg.seed, stream_index(ti, attempt, ext, rep));
            current = extend_process(&current, lv.t, &self.cfg.law, margin, stream)?;
            let fast = FastCoverage::new(current.points(), &self.region, lv.r_sample)?;
            match fast.threshold_from(None, k, self.cfg.tol_rel, self.hint(lv), margin) {
                Ok(o) => return Ok(o.radius),
                Err(Error::Config(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Config(format!("coverage threshold at t = {} outgrew every window", lv.t)))
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

fn run_d<const D: usize>(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let runner = Runner::<D> {
        cfg,
        region: cfg.region.to_box()?,
        want_count: cfg.has(Study::MeanWitness),
        want_threshold: cfg.has(Study::Threshold),
    };
    let sched = &cfg.schedule;
    let vol = cfg.region.volume();
    let m = cfg.replications;
    let c = constant_cdky(sched.d, sched.k, &cfg.law);
    let a = alpha(sched.d, &cfg.law);
    let limit = limit_probability(sched, &cfg.law, vol);
    let predicted_f = c * vol * (-sched.beta).exp();
    let pool = pool(cfg.workers)?;

    let mut rows = Vec::with_capacity(cfg.t_values.len());
    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    for (ti, lv) in levels(cfg)?.iter().enumerate() {
        let start = Instant::now();
        let reps: Vec<Replication> =
            pool.install(|| (0..m).into_par_iter().map(|rep| runner.replicate(ti, lv, rep)).collect::<Result<_>>())?;
        let wall = start.elapsed().as_secs_f64();

        let covered = reps.iter().filter(|r| r.covered).count();
        let p_hat = covered as f64 / m as f64;
        let resamples: u64 = reps.iter().map(|r| r.resamples).sum();
        if resamples as f64 > RESAMPLE_BUDGET * m as f64 {
            warnings.push(format!(
                "t = {}: {resamples} degenerate resamples exceed {}% of {m} replications",
                lv.t,
                RESAMPLE_BUDGET * 100.0
            ));
        }

        let (mean_f, f_std_err) = if runner.want_count {
            let f: Vec<f64> = reps.iter().map(|r| r.witness_count.unwrap_or(0) as f64).collect();
            let (mean, se) = mean_se(&f);
            (Some(mean), Some(se))
        } else {
            (None, None)
        };

        let ks_stat = if runner.want_threshold {
            let centering = sched.centering(lv.t) + (c * vol).ln();
            let values: Vec<f64> = reps
                .iter()
                .map(|r| {
                    let radius = r.threshold.unwrap_or(f64::INFINITY);
                    a * lv.t * radius.powi(D as i32) - centering
                })
                .collect();
            let ks = ks_gumbel(&values)?;
            samples.push(ThresholdSamples {
                t: lv.t,
                values,
                ks_stat: ks,
            });
            if m < 100 {
                warnings.push(format!("t = {}: KS distance from only {m} samples", lv.t));
            }
            Some(ks)
        } else {
            None
        };

        rows.push(ReportRow {
            t: lv.t,
            r_t: lv.r_t,
            p_hat,
            std_err: (p_hat * (1.0 - p_hat) / m as f64).sqrt(),
            limit_prob: limit,
            abs_error: (p_hat - limit).abs(),
            mean_f,
            f_std_err,
            predicted_mean_f: predicted_f,
            ks_stat,
            wall_time_s: if cfg.timing { wall } else { 0.0 },
            degenerate_resamples: resamples,
        });
    }

    let rate_fit = if cfg.has(Study::Rate) {
        let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
        let err: Vec<f64> = rows.iter().map(|r| r.abs_error).collect();
        let se: Vec<f64> = rows.iter().map(|r| r.std_err).collect();
        Some(fit_rate(&t, &err, &se)?)
    } else {
        None
    };

    Ok(ExperimentReport {
        config: cfg.clone(),
        rows,
        rate_fit,
        warnings,
        threshold_samples: samples,
    })
}

/// Runs every study the configuration asks for. The report depends only on
/// the configuration, not on the number of workers.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match cfg.schedule.d {
        2 => run_d::<2>(cfg),
        3 => run_d::<3>(cfg),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// One replication, exactly as [`run_experiment`] computes it.
pub fn replicate(cfg: &ExperimentConfig, t_index: usize, rep: usize) -> Result<Replication> {
    cfg.validate()?;
    let lv = *levels(cfg)?
        .get(t_index)
        .ok_or_else(|| crate::error::invalid(format!("no t value at index {t_index}")))?;
    if rep >= cfg.replications {
        return Err(crate::error::invalid(format!("replication {rep} out of range")));
    }
    fn go<const D: usize>(cfg: &ExperimentConfig, ti: usize, lv: &Level, rep: usize) -> Result<Replication> {
        let runner = Runner::<D> {
            cfg,
            region: cfg.region.to_box()?,
            want_count: cfg.has(Study::MeanWitness),
            want_threshold: cfg.has(Study::Threshold),
        };
        runner.replicate(ti, lv, rep)
    }
    match cfg.schedule.d {
        2 => go::<2>(cfg, t_index, &lv, rep),
        3 => go::<3>(cfg, t_index, &lv, rep),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn with_studies(cfg: &ExperimentConfig, studies: Vec<Study>) -> ExperimentConfig {
    ExperimentConfig {
        studies,
        ..cfg.clone()
    }
}

/// Coverage probability at `r_t` for each `t`, against its limit.
pub fn estimate_coverage_probability(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment(&with_studies(cfg, vec![Study::Coverage]))
}

/// Normalized coverage thresholds per `t` with their KS distance to the
/// standard Gumbel law.
pub fn threshold_statistic_sample(cfg: &ExperimentConfig) -> Result<Vec<ThresholdSamples>> {
    Ok(run_experiment(&with_studies(cfg, vec![Study::Threshold]))?.threshold_samples)
}

/// Mean witness count of the truncated process against its limit.
pub fn mean_witness_study(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    Ok(run_experiment(&with_studies(cfg, vec![Study::MeanWitness]))?.rows)
}

/// Decay of the coverage error in `t`.
pub fn rate_study(cfg: &ExperimentConfig) -> Result<RateFit> {
    run_experiment(&with_studies(cfg, vec![Study::Rate]))?
        .rate_fit
        .ok_or_else(|| Error::Config("rate fit missing".into()))
}
