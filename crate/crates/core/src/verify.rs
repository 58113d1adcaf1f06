//! Cross-validation suites: the cone predicate against the hyperplane
//! falsifier, the exact coverage checker against the grid oracle, and the
//! closed-form constants against Monte Carlo integration.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::coverage::is_covered;
use crate::error::{invalid, Error, Result};
use crate::geom::{
    cone_condition, h_indicator, hyperplane_falsifier, sphere_intersection, GeomTolerance, Indicator,
    IntersectionResult, MarkedPoint, Point,
};
use crate::model::{alpha, closed_form_g, constant_c0, constant_cdky, MarkedPointSet, RadiusLaw, RngStream};
use crate::oracle::{grid_coverage_oracle, mc_constant_c0, mc_integral_g, C0Method, GridSpec};
use crate::region::Aabb;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// How far the measured quantity is from its threshold, in words.
    pub margin: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {} {}: {}", self.suite, if c.passed { "PASS" } else { "FAIL" }, c.name, c.margin)?;
        }
        Ok(())
    }
}

fn check(name: impl Into<String>, passed: bool, margin: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        margin: margin.into(),
    }
}

// ---------------------------------------------------------------------------
// predicates

/// Outcome of comparing the cone predicate with the hyperplane falsifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PredicateAgreement {
    pub configurations: usize,
    pub agreements: usize,
    /// Configurations flagged degenerate or within `10 tol` of a boundary.
    pub in_band: usize,
    pub disagreements_in_band: usize,
    pub disagreements_outside_band: usize,
    /// Cases where the local-minimum indicator and the cone test at its
    /// upper point disagree; always zero unless the kernel is inconsistent.
    pub indicator_mismatches: usize,
}

/// Compares both predicates at the upper crossing point of `n` random
/// `D`-tuples of spheres that meet.
pub fn predicate_agreement<const D: usize>(n: usize, n_dirs: usize, seed: u64) -> Result<PredicateAgreement> {
    let tol = GeomTolerance::default();
    let band = 10.0 * tol.eps_geo;
    let mut rng = RngStream::new(seed, D as u64).rng();
    let mut out = PredicateAgreement::default();
    let mut tries = 0usize;
    while out.configurations < n {
        tries += 1;
        if tries > 100 * n.max(1) {
            return Err(Error::Config("too few intersecting configurations were drawn".into()));
        }
        let tuple: [MarkedPoint<D>; D] = std::array::from_fn(|_| {
            let c: [f64; D] = std::array::from_fn(|_| rng.random::<f64>());
            MarkedPoint::new(c, rng.random_range(0.4..1.2))
        });
        let centers: Vec<Point<D>> = tuple.iter().map(|p| p.center).collect();
        let radii: Vec<f64> = tuple.iter().map(|p| p.mark).collect();
        let degenerate_pair;
        let q = match sphere_intersection(&centers, &radii, tol)? {
            IntersectionResult::Empty => continue,
            IntersectionResult::Pair { upper, .. } => {
                degenerate_pair = false;
                upper
            }
            IntersectionResult::Degenerate(_) => {
                out.configurations += 1;
                out.in_band += 1;
                continue;
            }
        };
        out.configurations += 1;
        let h = h_indicator(&tuple, 1.0, tol)?;
        let cone = cone_condition(&q, &centers, tol)?;
        let fals = hyperplane_falsifier(&q, &centers, n_dirs, &mut rng, tol)?;
        if h.as_bool().is_some_and(|b| b != cone.inside) {
            out.indicator_mismatches += 1;
        }
        let flagged = degenerate_pair
            || h == Indicator::Degenerate
            || cone.degenerate
            || cone.min_coefficient.abs() < band
            || fals.best_sampled_margin.abs() < band;
        if flagged {
            out.in_band += 1;
        }
        let agree = (h == Indicator::One) == fals.holds;
        if agree {
            out.agreements += 1;
        } else if flagged {
            out.disagreements_in_band += 1;
        } else {
            out.disagreements_outside_band += 1;
        }
    }
    Ok(out)
}

pub fn verify_predicates(dims: &[usize], n: usize, seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &d in dims {
        let a = match d {
            2 => predicate_agreement::<2>(n, 1000, seed)?,
            3 => predicate_agreement::<3>(n, 1000, seed)?,
            d => return Err(Error::UnsupportedDimension(d)),
        };
        checks.push(check(
            format!("cone vs falsifier, d={d}"),
            a.disagreements_outside_band == 0,
            format!(
                "{} disagreements outside the band (allowed 0); {}/{} agree, {} in band",
                a.disagreements_outside_band, a.agreements, a.configurations, a.in_band
            ),
        ));
        checks.push(check(
            format!("indicator vs cone, d={d}"),
            a.indicator_mismatches == 0,
            format!("{} mismatches (allowed 0)", a.indicator_mismatches),
        ));
    }
    Ok(SuiteReport {
        suite: "predicates".into(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OracleAgreement {
    pub instances: usize,
    pub covered: usize,
    /// Instances whose verdict flips when every radius moves by one grid
    /// cell diagonal.
    pub borderline: usize,
    pub strict_agreements: usize,
    pub borderline_agreements: usize,
}

impl OracleAgreement {
    pub fn strict_total(&self) -> usize {
        self.instances - self.borderline
    }

    pub fn strict_rate(&self) -> f64 {
        if self.strict_total() == 0 {
            1.0
        } else {
            self.strict_agreements as f64 / self.strict_total() as f64
        }
    }
}

/// One random planar instance: 1 to 50 balls around the unit square, with
/// a radius scale that makes both verdicts common.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> (MarkedPointSet<2>, f64, usize) {
    let n = rng.random_range(1..=50usize);
    let k = rng.random_range(1..=2usize);
    let pts = (0..n)
        .map(|_| {
            let c = [rng.random_range(-0.3..1.3), rng.random_range(-0.3..1.3)];
            MarkedPoint::new(c, rng.random_range(0.5..1.5))
        })
        .collect();
    // expected depth about `c` over the sampling box
    let c = rng.random_range(1.0..7.0) * k as f64;
    let r = (c * 1.6 * 1.6 / (PI * n as f64 * 13.0 / 12.0)).sqrt();
    (MarkedPointSet::from_points(pts).expect("finite points"), r, k)
}

fn shifted(set: &MarkedPointSet<2>, r: f64, delta: f64) -> MarkedPointSet<2> {
    let pts = set
        .points()
        .iter()
        .filter_map(|p| {
            let a = p.mark + delta / r;
            (a > 0.0).then_some(MarkedPoint { mark: a, ..*p })
        })
        .collect();
    MarkedPointSet::from_points(pts).expect("finite points")
}

/// Compares the exact checker with the grid oracle on random instances.
pub fn oracle_agreement(instances: usize, resolution: usize, seed: u64) -> Result<OracleAgreement> {
    let region = Aabb::<2>::unit();
    let grid = GridSpec::new(resolution, region)?;
    let delta = grid.spacing(0) * 2f64.sqrt();
    let mut out = OracleAgreement::default();
    for i in 0..instances {
        let mut rng = RngStream::new(seed, i as u64).rng();
        let (set, r, k) = random_instance(&mut rng);
        let exact = is_covered(&set, r, &region, k)?.covered;
        let grid_says = grid_coverage_oracle(&set, r, &region, k, &grid)?.covered;
        let grown = is_covered(&shifted(&set, r, delta), r, &region, k)?.covered;
        let shrunk = {
            let s = shifted(&set, r, -delta);
            !s.is_empty() && is_covered(&s, r, &region, k)?.covered
        };
        out.instances += 1;
        out.covered += exact as usize;
        if grown != shrunk {
            out.borderline += 1;
            out.borderline_agreements += (exact == grid_says) as usize;
        } else {
            out.strict_agreements += (exact == grid_says) as usize;
        }
    }
    Ok(out)
}

pub const ORACLE_MIN_AGREEMENT: f64 = 0.99;

pub fn verify_oracle(instances: usize, resolution: usize, seed: u64) -> Result<SuiteReport> {
    if instances == 0 {
        return Err(invalid("at least one instance is needed"));
    }
    let a = oracle_agreement(instances, resolution, seed)?;
    let rate = a.strict_rate();
    Ok(SuiteReport {
        suite: "oracle".into(),
        checks: vec![check(
            format!("exact vs grid {resolution}^2"),
            rate >= ORACLE_MIN_AGREEMENT,
            format!(
                "strict agreement {}/{} = {:.4} (needs {ORACLE_MIN_AGREEMENT}); {} borderline, {} covered",
                a.strict_agreements,
                a.strict_total(),
                rate,
                a.borderline,
                a.covered
            ),
        )],
    })
}

// ---------------------------------------------------------------------------
// constants

/// Radii whose `G` integral is checked in each dimension.
pub fn g_cases(d: usize) -> Vec<Vec<f64>> {
    match d {
        2 => vec![vec![1.0, 1.0], vec![2.0, 3.0]],
        3 => vec![vec![1.0, 1.0, 1.0]],
        _ => vec![vec![1.0; d]],
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Closed-form constants: reference values and the identity linking `c_0`
/// to `c_{d,k,Y}`, to `1e-12` relative.
pub fn closed_form_checks() -> Vec<Check> {
    let det = RadiusLaw::Deterministic(1.0);
    let mut checks = vec![
        {
            let e = rel(constant_cdky(2, 1, &det), 1.0);
            check("c(2,1,det:1) = 1", e <= 1e-12, format!("relative error {e:.2e}"))
        },
        {
            let e = rel(constant_cdky(3, 1, &det), 3.0 * PI * PI / 32.0);
            check("c(3,1,det:1) = 3 pi^2 / 32", e <= 1e-12, format!("relative error {e:.2e}"))
        },
        {
            let e = rel(constant_c0(2, &det), PI);
            check("c0(2,det:1) = pi", e <= 1e-12, format!("relative error {e:.2e}"))
        },
    ];
    let mut worst: f64 = 0.0;
    for law in [det, RadiusLaw::UniformInterval(0.0, 1.0)] {
        for d in 2..=4usize {
            for k in 1..=3usize {
                let fact: f64 = (1..k).map(|i| i as f64).product();
                let lhs = constant_c0(d, &law) * alpha(d, &law).powi(1 - d as i32) / fact;
                worst = worst.max(rel(lhs, constant_cdky(d, k, &law)));
            }
        }
    }
    checks.push(check(
        "c0 alpha^(1-d) / (k-1)! = c(d,k,Y)",
        worst <= 1e-12,
        format!("worst relative error {worst:.2e} over d 2..4, k 1..3, det:1 and unif:0:1"),
    ));
    checks
}

pub fn verify_constants(dims: &[usize], n: usize, seed: u64) -> Result<SuiteReport> {
    let mut checks = closed_form_checks();
    for &d in dims {
        for (j, radii) in g_cases(d).into_iter().enumerate() {
            let mut rng = RngStream::new(seed, ((d as u64) << 8) | j as u64).rng();
            let est = mc_integral_g(&radii, n, &mut rng)?;
            let target = closed_form_g(&radii);
            let z = (est.estimate - target).abs() / est.std_err;
            checks.push(check(
                format!("G{radii:?} by integration"),
                est.within(target, 3.0),
                format!("{:.6} vs {:.6}, {z:.2} sigma (allowed 3)", est.estimate, target),
            ));
        }
        // nested integration over marks, the path independent of the closed form
        let outer = 50;
        let mut rng = RngStream::new(seed, ((d as u64) << 8) | 0xff).rng();
        let est = mc_constant_c0(d, &RadiusLaw::Deterministic(1.0), outer, C0Method::Integral {
            inner_samples: (n / outer).max(1000),
        }, &mut rng)?;
        let target = constant_c0(d, &RadiusLaw::Deterministic(1.0));
        let z = (est.estimate - target).abs() / est.std_err;
        checks.push(check(
            format!("c0(d={d}, det:1) by nested integration"),
            est.within(target, 3.0),
            format!("{:.6} vs {:.6}, {z:.2} sigma (allowed 3)", est.estimate, target),
        ));
    }
    Ok(SuiteReport {
        suite: "constants".into(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_predicate_suite_passes() {
        let r = verify_predicates(&[2, 3], 2000, 1).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn small_oracle_suite_passes() {
        let a = oracle_agreement(20, 256, 3).unwrap();
        assert_eq!(a.instances, 20);
        assert!(a.covered > 0 && a.covered < 20, "{a:?}");
        assert_eq!(a.strict_agreements, a.strict_total(), "{a:?}");
    }

    #[test]
    fn closed_forms_hold() {
        for c in closed_form_checks() {
            assert!(c.passed, "{}: {}", c.name, c.margin);
        }
    }

    #[test]
    fn constant_suite_reports_margins() {
        let r = verify_constants(&[2], 20_000, 5).unwrap();
        assert!(r.checks.len() >= 6);
        assert!(r.to_string().contains("sigma"));
    }
}
