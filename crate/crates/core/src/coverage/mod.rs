//! Exact k-coverage of a box, witness counting and coverage thresholds.
//!
//! A point of the box is left uncovered exactly when some candidate is: the
//! lowest point of every vacant component of the closed box is either a
//! crossing of `d` spheres in the interior, a crossing of `j` spheres
//! restricted to a `j`-face, or a vertex. Candidates are therefore
//!
//! - both crossing points of every pairwise-meeting `d`-tuple of spheres,
//! - crossings of `j`-tuples of spheres with each proper `j`-face,
//! - the vertices,
//!
//! and each is tested against the balls other than the ones defining it.

mod fast;
mod index;
mod threshold;
mod witness;

use crate::error::{invalid, Error, Result};
use crate::geom::{point_depth, MarkedPoint, Point};
use crate::model::MarkedPointSet;
use crate::region::{Aabb, FaceId};

pub use fast::{CellScan, FastCoverage};
pub use index::CoverageIndex;
use index::{RawWitness, ScanMode};
pub use threshold::{coverage_threshold, threshold_search, ThresholdOutcome};
pub use witness::{read_witness_lines, write_witness_lines};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WitnessKind {
    /// Upper crossing of `d` spheres with `h = 1`.
    InteriorLocalMin,
    /// Any other interior crossing point: a lower crossing, or an upper one
    /// failing the cone condition.
    InteriorCrossing,
    /// Crossing of spheres restricted to a proper face.
    FaceCritical(FaceId),
    Vertex(FaceId),
}

impl WitnessKind {
    pub fn is_interior(&self) -> bool {
        matches!(self, WitnessKind::InteriorLocalMin | WitnessKind::InteriorCrossing)
    }
}

/// A candidate point covered by fewer than `k` balls besides its own tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct VacancyWitness<const D: usize> {
    pub location: Point<D>,
    /// Sorted indices into the point set; empty for vertices.
    pub tuple_indices: Vec<usize>,
    /// Closed-ball depth among the balls outside the tuple; `< k`.
    pub depth: usize,
    pub kind: WitnessKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageVerdict<const D: usize> {
    pub covered: bool,
    /// Every failing candidate; empty iff `covered`.
    pub witnesses: Vec<VacancyWitness<D>>,
    /// Tangent or singular configurations and candidates whose depth is
    /// within the geometric tolerance of `k`.
    pub degenerate_events: usize,
    /// False when no clean witness exists but an ambiguous candidate could
    /// flip the verdict.
    pub reliable: bool,
}

/// Outcome of the early-exit coverage test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Covered,
    NotCovered,
    Unreliable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessCount<const D: usize> {
    pub count: usize,
    pub witnesses: Vec<VacancyWitness<D>>,
    pub degenerate_events: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CandidateStatus {
    Covered,
    Fail { depth: usize },
    /// Depth straddles `k` within the tolerance band.
    Ambiguous,
}

pub(crate) fn check_dimension<const D: usize>() -> Result<()> {
    if D == 2 || D == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(D))
    }
}

fn check_args(r: f64, k: usize) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius scale must be positive, got {r}")));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    Ok(())
}

impl<const D: usize> CoverageIndex<D> {
    /// Early-exit coverage test: stops at the first clean failing candidate.
    pub fn decide(&self, r: f64, region: &Aabb<D>, k: usize) -> Decision {
        let scan = self.scan(r, region, k, ScanMode::Decide);
        if scan.failed {
            Decision::NotCovered
        } else if scan.ambiguous > 0 {
            Decision::Unreliable
        } else {
            Decision::Covered
        }
    }

    /// Full verdict with every failing candidate.
    pub fn verdict(&self, r: f64, region: &Aabb<D>, k: usize) -> CoverageVerdict<D> {
        let scan = self.scan(r, region, k, ScanMode::Collect);
        CoverageVerdict {
            covered: !scan.failed,
            witnesses: self.publish(scan.witnesses),
            degenerate_events: scan.degenerate,
            reliable: scan.failed || scan.ambiguous == 0,
        }
    }

    /// Witnesses whose upper crossing lies in `region`.
    pub fn witness_count(&self, r: f64, region: &Aabb<D>, k: usize) -> WitnessCount<D> {
        let out = self.count(r, k, region, |q| region.contains(q));
        WitnessCount {
            count: out.witnesses.len(),
            witnesses: self.publish(out.witnesses),
            degenerate_events: out.degenerate,
        }
    }

    fn publish(&self, raw: Vec<RawWitness<D>>) -> Vec<VacancyWitness<D>> {
        let mut out: Vec<VacancyWitness<D>> = raw
            .into_iter()
            .map(|w| {
                let mut tuple: Vec<usize> = w.tuple.iter().map(|&l| self.original_index(l)).collect();
                tuple.sort_unstable();
                VacancyWitness {
                    location: Point(w.location),
                    tuple_indices: tuple,
                    depth: w.depth,
                    kind: w.kind,
                }
            })
            .collect();
        out.sort_by(|a, b| {
            a.tuple_indices
                .cmp(&b.tuple_indices)
                .then(a.kind.cmp(&b.kind))
                .then_with(|| a.location.0.partial_cmp(&b.location.0).unwrap_or(std::cmp::Ordering::Equal))
        });
        out
    }
}

/// Decides whether every point of `region` lies in at least `k` of the
/// closed balls `B(x_i, r a_i)`.
///
/// Exact for the given point set; balls of an infinite process centered
/// outside the sampling window are assumed not to reach `region`.
pub fn is_covered<const D: usize>(
    process: &MarkedPointSet<D>,
    r: f64,
    region: &Aabb<D>,
    k: usize,
) -> Result<CoverageVerdict<D>> {
    check_dimension::<D>()?;
    check_args(r, k)?;
    Ok(CoverageIndex::new(process.points(), r).verdict(r, region, k))
}

/// Counts `d`-tuples whose upper crossing `q` lies in `region`, satisfies the
/// cone condition, and is covered by fewer than `k` of the other balls.
pub fn count_witnesses<const D: usize>(
    process: &MarkedPointSet<D>,
    r: f64,
    region: &Aabb<D>,
    k: usize,
) -> Result<WitnessCount<D>> {
    check_dimension::<D>()?;
    check_args(r, k)?;
    Ok(CoverageIndex::new(process.points(), r).witness_count(r, region, k))
}

/// Whether "not covered implies a witness near `region`" holds on this
/// realization.
///
/// The witness is either an interior local minimum within distance `sqrt(r)`
/// of `region`, or a boundary candidate of `region` whose depth, recomputed by
/// brute force over the other balls, is below `k`.
pub fn witness_containment_check<const D: usize>(
    process: &MarkedPointSet<D>,
    r: f64,
    region: &Aabb<D>,
    k: usize,
) -> Result<bool> {
    check_dimension::<D>()?;
    check_args(r, k)?;
    let grown = region.expand(r.sqrt());
    let index = CoverageIndex::new(process.points(), r);
    let verdict = index.verdict(r, region, k);
    if verdict.covered {
        return Ok(true);
    }
    let interior = index.count(r, k, &grown, |q| region.dist2_to(q) <= r);
    if !interior.witnesses.is_empty() {
        return Ok(true);
    }
    let points = process.points();
    Ok(verdict.witnesses.iter().any(|w| {
        if w.kind.is_interior() {
            return false;
        }
        let others: Vec<MarkedPoint<D>> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| !w.tuple_indices.contains(i))
            .map(|(_, p)| *p)
            .collect();
        point_depth(&w.location, &others, r) < k
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::MarkedPoint;

    fn set(pts: &[([f64; 2], f64)]) -> MarkedPointSet<2> {
        MarkedPointSet::from_points(pts.iter().map(|&(c, a)| MarkedPoint::new(c, a)).collect()).unwrap()
    }

    #[test]
    fn count_single_pair() {
        let p = set(&[([0.0, 0.0], 1.0), ([1.0, 0.0], 1.0)]);
        let d = Aabb::new([-2.0, -2.0], [2.0, 2.0]).unwrap();
        let c = count_witnesses(&p, 1.0, &d, 1).unwrap();
        assert_eq!(c.count, 1);
        let w = &c.witnesses[0];
        assert_eq!(w.depth, 0);
        assert_eq!(w.tuple_indices, vec![0, 1]);
        assert!((w.location.0[0] - 0.5).abs() < 1e-12);
        assert!((w.location.0[1] - 3f64.sqrt() / 2.0).abs() < 1e-12);

        let lower = Aabb::new([-2.0, -2.0], [2.0, 0.0]).unwrap();
        assert_eq!(count_witnesses(&p, 1.0, &lower, 1).unwrap().count, 0);
        let empty = set(&[]);
        assert_eq!(count_witnesses(&empty, 1.0, &d, 1).unwrap().count, 0);
    }

    #[test]
    fn single_covering_ball() {
        let p = set(&[([0.5, 0.5], 1.0)]);
        let a = Aabb::unit();
        let v = is_covered(&p, 1.0, &a, 1).unwrap();
        assert!(v.covered && v.witnesses.is_empty() && v.reliable);
        let v = is_covered(&p, 1.0, &a, 2).unwrap();
        assert!(!v.covered);
        let vertices: Vec<_> = v.witnesses.iter().filter(|w| matches!(w.kind, WitnessKind::Vertex(_))).collect();
        assert_eq!(vertices.len(), 4);
        assert!(vertices.iter().all(|w| w.depth == 1));
    }

    #[test]
    fn two_balls_miss_corner() {
        let p = set(&[([0.25, 0.5], 1.0), ([0.75, 0.5], 1.0)]);
        let v = is_covered(&p, 0.5, &Aabb::unit(), 1).unwrap();
        assert!(!v.covered);
        assert!(v.witnesses.iter().any(|w| w.location.0 == [0.0, 0.0] && w.depth == 0));
        assert!(witness_containment_check(&p, 0.5, &Aabb::unit(), 1).unwrap());
        assert!(is_covered(&p, 0.56, &Aabb::unit(), 1).unwrap().covered);
    }

    #[test]
    fn containment_for_empty_process() {
        let p = set(&[]);
        assert!(!is_covered(&p, 0.3, &Aabb::unit(), 1).unwrap().covered);
        assert!(witness_containment_check(&p, 0.3, &Aabb::unit(), 1).unwrap());
    }

    #[test]
    fn interior_hole_is_found() {
        // four balls leave a small hole at the center of the square
        let s = 0.5;
        let p = set(&[([0.0, 0.0], 1.0), ([1.0, 0.0], 1.0), ([0.0, 1.0], 1.0), ([1.0, 1.0], 1.0)]);
        let a = Aabb::new([0.2, 0.2], [0.8, 0.8]).unwrap();
        let r = 0.7; // < sqrt(0.5)
        let v = is_covered(&p, r, &a, 1).unwrap();
        assert!(!v.covered);
        assert!(v.witnesses.iter().any(|w| w.kind == WitnessKind::InteriorLocalMin));
        assert!(is_covered(&p, 0.71, &a, 1).unwrap().covered);
        let c = count_witnesses(&p, r, &a, 1).unwrap();
        assert_eq!(c.count, 1);
        assert!(c.witnesses[0].location.0[1] < s);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = set(&[([0.5, 0.5], 1.0)]);
        assert!(is_covered(&p, 0.0, &Aabb::unit(), 1).is_err());
        assert!(is_covered(&p, 1.0, &Aabb::unit(), 0).is_err());
        let p4 = MarkedPointSet::<4>::from_points(vec![]).unwrap();
        assert!(matches!(
            is_covered(&p4, 1.0, &Aabb::unit(), 1),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn three_dimensional_cube() {
        let p = MarkedPointSet::<3>::from_points(vec![MarkedPoint::new([0.5, 0.5, 0.5], 1.0)]).unwrap();
        let a = Aabb::<3>::unit();
        let corner = 0.75f64.sqrt();
        assert!(is_covered(&p, corner + 1e-6, &a, 1).unwrap().covered);
        assert!(!is_covered(&p, corner - 1e-6, &a, 1).unwrap().covered);
    }
}
