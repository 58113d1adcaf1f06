use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::RadiusLaw;
use crate::error::{invalid, Error, Result};
use crate::geom::{MarkedPoint, Point};
use crate::region::Aabb;

/// A reproducible random stream: the ChaCha8 keystream keyed by
/// `master_seed`, on stream number `stream_index`.
///
/// Distinct indices select disjoint keystreams, so results never depend on
/// which thread draws which stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// One realization of the marked process, restricted to `window` grown by
/// `margin`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedPointSet<const D: usize> {
    points: Vec<MarkedPoint<D>>,
    window: Aabb<D>,
    margin: f64,
    truncation_level: Option<f64>,
}

impl<const D: usize> MarkedPointSet<D> {
    /// Checks that every center lies in `window ⊕ margin` and every mark is
    /// positive.
    pub fn new(points: Vec<MarkedPoint<D>>, window: Aabb<D>, margin: f64) -> Result<Self> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(invalid(format!("margin must be nonnegative, got {margin}")));
        }
        let outer = window.expand(margin);
        for (i, p) in points.iter().enumerate() {
            if !(p.mark > 0.0 && p.mark.is_finite()) {
                return Err(invalid(format!("point {i} has nonpositive mark {}", p.mark)));
            }
            if !outer.contains(&p.center.0) {
                return Err(invalid(format!("point {i} lies outside the sampling window")));
            }
        }
        Ok(MarkedPointSet {
            points,
            window,
            margin,
            truncation_level: None,
        })
    }

    /// Wraps explicit points; the window is their bounding box (or the unit
    /// box for an empty list) and the margin is zero.
    pub fn from_points(points: Vec<MarkedPoint<D>>) -> Result<Self> {
        let window = if points.is_empty() {
            Aabb::unit()
        } else {
            let mut lo = [f64::INFINITY; D];
            let mut hi = [f64::NEG_INFINITY; D];
            for p in &points {
                for i in 0..D {
                    lo[i] = lo[i].min(p.center.0[i]);
                    hi[i] = hi[i].max(p.center.0[i]);
                }
            }
            for i in 0..D {
                if hi[i] <= lo[i] {
                    hi[i] = lo[i] + 1.0;
                }
            }
            Aabb::new(lo, hi)?
        };
        Self::new(points, window, 0.0)
    }

    pub fn points(&self) -> &[MarkedPoint<D>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn window(&self) -> &Aabb<D> {
        &self.window
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn truncation_level(&self) -> Option<f64> {
        self.truncation_level
    }

    pub fn max_mark(&self) -> f64 {
        self.points.iter().map(|p| p.mark).fold(0.0, f64::max)
    }

    pub fn min_mark(&self) -> f64 {
        self.points.iter().map(|p| p.mark).fold(f64::INFINITY, f64::min)
    }

    /// The sub-process of points with mark at most `level`.
    pub fn truncated(&self, level: f64) -> Self {
        MarkedPointSet {
            points: self.points.iter().copied().filter(|p| p.mark <= level).collect(),
            window: self.window,
            margin: self.margin,
            truncation_level: Some(self.truncation_level.map_or(level, |l| l.min(level))),
        }
    }

    /// Adds points inside the sampling window.
    pub fn with_extra(&self, extra: &[MarkedPoint<D>]) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        let mut out = Self::new(pts, self.window, self.margin)?;
        out.truncation_level = self.truncation_level;
        Ok(out)
    }
}

/// Samples the Poisson process of intensity `t` with i.i.d. marks from `law`
/// on `window ⊕ r * mark_bound`, where `mark_bound` is the law's supremum or
/// `truncate_at` when given; no ball centered further out can reach `window`.
///
/// With `truncate_at`, points whose mark exceeds it are discarded (thinning),
/// which is the restriction of the full process to marks `<= truncate_at`.
pub fn sample_process<const D: usize>(
    window: &Aabb<D>,
    t: f64,
    law: &RadiusLaw,
    r: f64,
    stream: RngStream,
    truncate_at: Option<f64>,
) -> Result<MarkedPointSet<D>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("intensity must be nonnegative, got {t}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius scale must be nonnegative, got {r}")));
    }
    law.validate()?;
    if let Some(level) = truncate_at {
        if !(level > 0.0) {
            return Err(invalid(format!("truncation level must be positive, got {level}")));
        }
    }
    let bound = match truncate_at {
        Some(level) => level.min(law.sup()),
        None if law.is_bounded() => law.sup(),
        None => return Err(Error::UnboundedLaw),
    };
    let margin = r * bound;
    let outer = window.expand(margin);
    let mean = t * outer.volume();
    let mut rng = stream.rng();
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| invalid(format!("poisson mean {mean}: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = [0.0; D];
        for i in 0..D {
            c[i] = outer.lo[i] + (outer.hi[i] - outer.lo[i]) * rng.random::<f64>();
        }
        let mark = law.sample(&mut rng);
        if truncate_at.is_some_and(|level| mark > level) {
            continue;
        }
        points.push(MarkedPoint {
            center: Point(c),
            mark,
        });
    }
    let mut set = MarkedPointSet::new(points, *window, margin)?;
    set.truncation_level = truncate_at;
    Ok(set)
}

/// Grows the sampling window of `set` to `window ⊕ r * sup(law)` by adding an
/// independent sample of the process on the new shell only.
///
/// The union is again the process on the larger window, so a realization can
/// be widened on demand without redrawing what was already used.
pub fn extend_process<const D: usize>(
    set: &MarkedPointSet<D>,
    t: f64,
    law: &RadiusLaw,
    r: f64,
    stream: RngStream,
) -> Result<MarkedPointSet<D>> {
    if set.truncation_level.is_some() {
        return Err(invalid("cannot extend a truncated process"));
    }
    let margin = r * law.sup();
    if margin <= set.margin {
        return Ok(set.clone());
    }
    let shell = sample_process(&set.window, t, law, r, stream, None)?;
    let inner = set.window.expand(set.margin);
    let mut points = set.points.clone();
    points.extend(shell.points.into_iter().filter(|p| !inner.contains(&p.center.0)));
    MarkedPointSet::new(points, set.window, margin)
}
