use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{RadiusLaw, ScalingSchedule};
use crate::region::Aabb;

/// Axis-aligned box as written in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RegionSpec {
    pub fn unit(d: usize) -> Self {
        RegionSpec {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    pub fn to_box<const D: usize>(&self) -> Result<Aabb<D>> {
        Aabb::from_slices(&self.lo, &self.hi)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Coverage indicator at `r_t`.
    Coverage,
    /// Witness count of the truncated process at `r_t`.
    MeanWitness,
    /// Coverage threshold and its Gumbel statistic.
    Threshold,
    /// Fit of the coverage error against `1 / log t`; implies `Coverage`.
    Rate,
}

fn one() -> usize {
    1
}

fn default_studies() -> Vec<Study> {
    vec![Study::Coverage]
}

fn default_tol() -> f64 {
    1e-7
}

fn yes() -> bool {
    true
}

/// Parameters of a Monte Carlo study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schedule: ScalingSchedule,
    pub law: RadiusLaw,
    pub region: RegionSpec,
    /// Strictly increasing, each above 1.
    pub t_values: Vec<f64>,
    pub replications: usize,
    #[serde(alias = "master_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_studies")]
    pub studies: Vec<Study>,
    /// Relative precision of coverage thresholds.
    #[serde(default = "default_tol")]
    pub tol_rel: f64,
    /// Truncation exponent for witness counts; marks above `t^zeta` are
    /// dropped. Defaults to half the admissible bound for the law.
    #[serde(default)]
    pub zeta: Option<f64>,
    /// When false, `wall_time_s` is reported as 0 so reports are
    /// byte-reproducible.
    #[serde(default = "yes")]
    pub timing: bool,
}

/// Replication indices occupy the low 32 bits of a stream index.
pub const MAX_REPLICATIONS: usize = u32::MAX as usize;

impl ExperimentConfig {
    /// Smallest meaningful configuration: one study on the unit box.
    pub fn new(schedule: ScalingSchedule, law: RadiusLaw, t_values: Vec<f64>, replications: usize, seed: u64) -> Self {
        ExperimentConfig {
            region: RegionSpec::unit(schedule.d),
            schedule,
            law,
            t_values,
            replications,
            seed,
            workers: 1,
            studies: default_studies(),
            tol_rel: default_tol(),
            zeta: None,
            timing: true,
        }
    }

    pub fn has(&self, s: Study) -> bool {
        self.studies.contains(&s)
    }

    pub fn wants_coverage(&self) -> bool {
        self.has(Study::Coverage) || self.has(Study::Rate)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        let d = self.schedule.d;
        if !(d == 2 || d == 3) {
            return Err(invalid(format!("experiments support d = 2 or 3, got {d}")));
        }
        self.law.validate()?;
        if !self.law.satisfies_moment_conditions(d) {
            return Err(invalid(format!("law {} violates the moment conditions", self.law)));
        }
        if self.region.lo.len() != d || self.region.hi.len() != d {
            return Err(invalid(format!("region must have {d} coordinates per corner")));
        }
        if self.region.lo.iter().zip(&self.region.hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(invalid("region needs finite lo < hi on every axis"));
        }
        if self.t_values.is_empty() {
            return Err(invalid("t_values must not be empty"));
        }
        if self.t_values.iter().any(|t| !(*t > 1.0 && t.is_finite())) {
            return Err(invalid("every t must be a finite value above 1"));
        }
        if self.t_values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("t_values must be strictly increasing"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be at least 1"));
        }
        if self.replications > MAX_REPLICATIONS {
            return Err(invalid(format!("replications must not exceed {MAX_REPLICATIONS}")));
        }
        if self.t_values.len() >= 1 << 16 {
            return Err(invalid("too many t values"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if self.studies.is_empty() {
            return Err(invalid("studies must not be empty"));
        }
        if !(self.tol_rel > 0.0 && self.tol_rel <= 1e-2) {
            return Err(invalid(format!("tol_rel must lie in (0, 0.01], got {}", self.tol_rel)));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0 && z.is_finite()) {
                return Err(invalid(format!("zeta must be positive, got {z}")));
            }
        }
        if self.has(Study::Rate) {
            let span = self.t_values[self.t_values.len() - 1] / self.t_values[0];
            if self.t_values.len() < 4 || span < 100.0 {
                return Err(invalid("the rate study needs at least 4 t values spanning 2 decades"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScheduleVariant;

    fn base() -> ExperimentConfig {
        let s = ScalingSchedule::new(2, 1, 0.0, ScheduleVariant::Corrected).unwrap();
        ExperimentConfig::new(s, RadiusLaw::Deterministic(1.0), vec![100.0], 10, 1)
    }

    #[test]
    fn defaults_fill_in() {
        let js = r#"{"schedule":{"d":2,"k":1,"variant":"corrected"},"law":"det:1",
            "region":{"lo":[0,0],"hi":[1,1]},"t_values":[100],"replications":10,"seed":1}"#;
        let c: ExperimentConfig = serde_json::from_str(js).unwrap();
        assert_eq!(c, base());
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let js = r#"{"schedule":{"d":2,"k":1,"variant":"corrected"},"law":"det:1",
            "region":{"lo":[0,0],"hi":[1,1]},"t_values":[100],"replications":10,"seed":1,"foo":2}"#;
        let err = serde_json::from_str::<ExperimentConfig>(js).unwrap_err().to_string();
        assert!(err.contains("foo"), "{err}");
        let mut c = base();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = base();
        c.t_values = vec![100.0, 10.0];
        assert!(c.validate().is_err());
        let mut c = base();
        c.studies = vec![Study::Rate];
        assert!(c.validate().is_err());
        c.t_values = vec![1e2, 1e3, 1e4, 1e5];
        c.validate().unwrap();
        let mut c = base();
        c.region = RegionSpec::unit(3);
        assert!(c.validate().is_err());
    }
}
