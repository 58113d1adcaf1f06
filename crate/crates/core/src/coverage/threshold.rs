use super::{check_dimension, CoverageIndex, Decision};
use crate::error::{invalid, Error, Result};
use crate::model::MarkedPointSet;
use crate::region::Aabb;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdOutcome {
    pub radius: f64,
    /// Coverage decisions made.
    pub evaluations: usize,
    /// Decisions that came back unreliable; each was treated as not covered.
    pub unreliable_steps: usize,
}

struct Search<'a, const D: usize> {
    process: &'a MarkedPointSet<D>,
    region: &'a Aabb<D>,
    k: usize,
    index: Option<CoverageIndex<D>>,
    evaluations: usize,
    unreliable_steps: usize,
}

impl<const D: usize> Search<'_, D> {
    fn covered(&mut self, r: f64) -> bool {
        // an index built for a much larger scale has bloated neighbor lists
        let stale = match &self.index {
            Some(ix) => ix.r_max() < r || ix.r_max() > 2.0 * r,
            None => true,
        };
        if stale {
            self.index = Some(CoverageIndex::new(self.process.points(), r));
        }
        self.evaluations += 1;
        match self.index.as_ref().expect("built above").decide(r, self.region, self.k) {
            Decision::Covered => true,
            Decision::NotCovered => false,
            Decision::Unreliable => {
                self.unreliable_steps += 1;
                false
            }
        }
    }
}

/// `inf { r : region is k-covered }` for the realized point set, to relative
/// precision `tol_rel`.
pub fn coverage_threshold<const D: usize>(
    process: &MarkedPointSet<D>,
    region: &Aabb<D>,
    k: usize,
    tol_rel: f64,
) -> Result<f64> {
    threshold_search(process, region, k, tol_rel, None).map(|o| o.radius)
}

/// Bisection for the coverage threshold, optionally starting from a guessed
/// bracket `(lo, hi)`; the bracket is widened until it is valid.
///
/// On return `region` is covered at `radius * (1 + tol_rel)` and not surely
/// covered at `radius * (1 - tol_rel)`: that decision was a clean failure or
/// fell within the geometric tolerance band.
pub fn threshold_search<const D: usize>(
    process: &MarkedPointSet<D>,
    region: &Aabb<D>,
    k: usize,
    tol_rel: f64,
    hint: Option<(f64, f64)>,
) -> Result<ThresholdOutcome> {
    check_dimension::<D>()?;
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(invalid(format!("tol_rel must lie in (0, 1), got {tol_rel}")));
    }
    let points = process.points();
    if points.len() < k {
        return Err(Error::Uncoverable { k, points: points.len() });
    }
    // every ball contains the region at this scale
    let r_all = points
        .iter()
        .map(|p| region.max_dist_to(&p.center.0) / p.mark)
        .fold(0.0, f64::max)
        * (1.0 + 1e-12)
        + f64::MIN_POSITIVE;

    let mut s = Search {
        process,
        region,
        k,
        index: None,
        evaluations: 0,
        unreliable_steps: 0,
    };

    // spacing between points as the first guess when no hint is given
    let (guess_lo, guess_hi) = hint.unwrap_or_else(|| {
        let a_max = process.max_mark();
        let spacing = (region.volume() / points.len() as f64).powf(1.0 / D as f64) / a_max;
        (0.25 * spacing, 0.5 * spacing)
    });
    let mut hi = guess_hi.min(r_all);
    let mut lo = guess_lo.min(hi);
    if hi <= 0.0 || !hi.is_finite() {
        hi = r_all;
    }
    while hi < r_all && !s.covered(hi) {
        lo = hi;
        hi = (2.0 * hi).min(r_all);
    }
    if lo >= hi {
        lo = 0.5 * hi;
    }
    while lo > 0.0 && s.covered(lo) {
        hi = lo;
        lo *= 0.5;
        if lo < 1e-300 {
            lo = 0.0;
        }
    }

    while hi - lo > tol_rel * (hi + lo) {
        let mid = 0.5 * (lo + hi);
        if s.covered(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdOutcome {
        radius: 0.5 * (lo + hi),
        evaluations: s.evaluations,
        unreliable_steps: s.unreliable_steps,
    })
}
