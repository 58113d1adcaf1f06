//! Coverage decisions for large point sets.
//!
//! The region is split into a lattice of cells of side about `r / 3`. A cell
//! lying inside `k` balls with margin `eps_geo` is covered; each remaining
//! cell is decided exactly on its own closed box with the balls that reach
//! it. The region is covered iff every cell is, and every witness of the
//! region lies in a cell that is not surely covered, so both the verdict and
//! the witness count are exact.

use super::{check_dimension, threshold_search, CoverageIndex, Decision, ThresholdOutcome};
use crate::error::{invalid, Error, Result};
use crate::geom::{GeomTolerance, MarkedPoint};
use crate::model::MarkedPointSet;
use crate::region::Aabb;

/// `floor` via an integer cast; the baseline x86-64 target lowers
/// `f64::floor` to a library call.
#[inline]
fn floor_i(x: f64) -> i64 {
    let i = x as i64;
    if (i as f64) > x {
        i - 1
    } else {
        i
    }
}

#[inline]
fn ceil_i(x: f64) -> i64 {
    let i = x as i64;
    if (i as f64) < x {
        i + 1
    } else {
        i
    }
}

/// Centers bucketed on a uniform grid for range gathering.
struct Buckets<const D: usize> {
    origin: [f64; D],
    cell: f64,
    dims: [usize; D],
    start: Vec<u32>,
    order: Vec<u32>,
}

impl<const D: usize> Buckets<D> {
    fn new(points: &[MarkedPoint<D>], cell_hint: f64) -> Self {
        let n = points.len();
        let mut lo = [0.0; D];
        let mut hi = [0.0; D];
        if n > 0 {
            lo = [f64::INFINITY; D];
            hi = [f64::NEG_INFINITY; D];
            for p in points {
                for a in 0..D {
                    lo[a] = lo[a].min(p.center.0[a]);
                    hi[a] = hi[a].max(p.center.0[a]);
                }
            }
        }
        let extent = (0..D).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let per_axis = (n.max(1) as f64).powf(1.0 / D as f64).ceil();
        let mut cell = cell_hint.max(extent / per_axis);
        if !(cell > 0.0 && cell.is_finite()) {
            cell = 1.0;
        }
        let mut dims = [1usize; D];
        let mut total = 1;
        for a in 0..D {
            dims[a] = ((hi[a] - lo[a]) / cell).floor() as usize + 1;
            total *= dims[a];
        }
        let mut b = Buckets {
            origin: lo,
            cell,
            dims,
            start: vec![0; total + 1],
            order: vec![0; n],
        };
        let ids: Vec<usize> = points.iter().map(|p| b.id_of(&p.center.0)).collect();
        for &c in &ids {
            b.start[c + 1] += 1;
        }
        for c in 0..total {
            b.start[c + 1] += b.start[c];
        }
        let mut fill = b.start.clone();
        for (i, &c) in ids.iter().enumerate() {
            b.order[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        b
    }

    fn coord(&self, x: f64, a: usize) -> isize {
        floor_i((x - self.origin[a]) / self.cell) as isize
    }

    fn id_of(&self, p: &[f64; D]) -> usize {
        let mut id = 0;
        let mut stride = 1;
        for a in 0..D {
            let c = self.coord(p[a], a).clamp(0, self.dims[a] as isize - 1) as usize;
            id += c * stride;
            stride *= self.dims[a];
        }
        id
    }

    /// Calls `f` with every point index whose bucket meets `lo..=hi`.
    fn for_each_in<F: FnMut(u32)>(&self, lo: &[f64; D], hi: &[f64; D], mut f: F) {
        let mut from = [0usize; D];
        let mut to = [0usize; D];
        for a in 0..D {
            let c0 = self.coord(lo[a], a).max(0);
            let c1 = self.coord(hi[a], a).min(self.dims[a] as isize - 1);
            if c0 > c1 {
                return;
            }
            from[a] = c0 as usize;
            to[a] = c1 as usize;
        }
        let mut cur = from;
        loop {
            let mut id = 0;
            let mut stride = 1;
            for a in 0..D {
                id += cur[a] * stride;
                stride *= self.dims[a];
            }
            for &i in &self.order[self.start[id] as usize..self.start[id + 1] as usize] {
                f(i);
            }
            let mut a = 0;
            while a < D {
                if cur[a] < to[a] {
                    cur[a] += 1;
                    break;
                }
                cur[a] = from[a];
                a += 1;
            }
            if a == D {
                return;
            }
        }
    }
}

/// Cell-filtered exact coverage for one point set and one region.
pub struct FastCoverage<'a, const D: usize> {
    points: &'a [MarkedPoint<D>],
    region: Aabb<D>,
    buckets: Buckets<D>,
    a_max: f64,
    a_mean: f64,
    tol: GeomTolerance,
}

/// Lattice of cells over the region at one scale; `edges[a]` holds the
/// `dims[a] + 1` cell boundaries along axis `a`, the last one clipped to the
/// region.
struct Cells<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    side: f64,
    dims: [usize; D],
    edges: [Vec<f64>; D],
}

impl<const D: usize> Cells<D> {
    fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn unflatten(&self, mut id: usize) -> [usize; D] {
        let mut idx = [0; D];
        for a in 0..D {
            idx[a] = id % self.dims[a];
            id /= self.dims[a];
        }
        idx
    }

    fn cell_box(&self, idx: &[usize; D]) -> Aabb<D> {
        let mut lo = [0.0; D];
        let mut hi = [0.0; D];
        for a in 0..D {
            lo[a] = self.edges[a][idx[a]];
            hi[a] = self.edges[a][idx[a] + 1];
        }
        Aabb { lo, hi }
    }

    fn index_of(&self, p: &[f64; D]) -> [usize; D] {
        let mut idx = [0; D];
        for a in 0..D {
            let j = floor_i((p[a] - self.lo[a]) / self.side);
            idx[a] = (j.max(0) as usize).min(self.dims[a] - 1);
        }
        idx
    }

    /// Cells along axis `a` whose extent lies inside `[c - w, c + w]`, up to
    /// rounding; callers shrink `w` by a margin that absorbs it.
    #[inline]
    fn inside_range(&self, a: usize, c: f64, w: f64) -> Option<(usize, usize)> {
        let n = self.dims[a] as i64;
        let j0 = ceil_i((c - w - self.lo[a]) / self.side).max(0);
        let j1 = if c + w >= self.hi[a] {
            n - 1
        } else {
            (floor_i((c + w - self.lo[a]) / self.side) - 1).min(n - 1)
        };
        (j0 <= j1).then_some((j0 as usize, j1 as usize))
    }
}

/// The cells of a region left undecided by the containment filter at one
/// scale and depth.
pub struct CellScan<const D: usize> {
    cells: Cells<D>,
    uncertain: Vec<u32>,
    r: f64,
    k: usize,
}

impl<const D: usize> CellScan<D> {
    pub fn scale(&self) -> f64 {
        self.r
    }

    pub fn total_cells(&self) -> usize {
        self.cells.total()
    }

    pub fn uncertain_cells(&self) -> usize {
        self.uncertain.len()
    }
}

impl<'a, const D: usize> FastCoverage<'a, D> {
    /// `r_hint` is the typical scale of later queries; it only tunes the
    /// bucket size.
    pub fn new(points: &'a [MarkedPoint<D>], region: &Aabb<D>, r_hint: f64) -> Result<Self> {
        Self::with_tolerance(points, region, r_hint, GeomTolerance::default())
    }

    pub fn with_tolerance(points: &'a [MarkedPoint<D>], region: &Aabb<D>, r_hint: f64, tol: GeomTolerance) -> Result<Self> {
        check_dimension::<D>()?;
        if !(r_hint > 0.0 && r_hint.is_finite()) {
            return Err(invalid(format!("radius hint must be positive, got {r_hint}")));
        }
        let a_max = points.iter().map(|p| p.mark).fold(0.0, f64::max);
        let a_mean = if points.is_empty() {
            1.0
        } else {
            points.iter().map(|p| p.mark).sum::<f64>() / points.len() as f64
        };
        Ok(FastCoverage {
            points,
            region: *region,
            buckets: Buckets::new(points, r_hint * a_max),
            a_max,
            a_mean,
            tol,
        })
    }

    fn cells(&self, r: f64) -> Cells<D> {
        let vol = self.region.volume();
        let cap = 16.0 * self.points.len() as f64 + 1024.0;
        let side = (0.35 * r * self.a_mean).max((vol / cap).powf(1.0 / D as f64));
        let mut dims = [1usize; D];
        let edges = std::array::from_fn(|a| {
            let (lo, hi) = (self.region.lo[a], self.region.hi[a]);
            let mut n = (((hi - lo) / side).ceil() as usize).max(1);
            // the last cell must keep positive width
            while n > 1 && lo + (n - 1) as f64 * side >= hi {
                n -= 1;
            }
            dims[a] = n;
            let mut e: Vec<f64> = (0..n).map(|j| lo + j as f64 * side).collect();
            e.push(hi);
            e
        });
        Cells {
            lo: self.region.lo,
            hi: self.region.hi,
            side,
            dims,
            edges,
        }
    }

    /// Rasterizes, for every ball, the cells it contains with margin
    /// `2 eps_geo`, and keeps the cells contained in fewer than `k` balls.
    /// Spans are recorded as row-wise differences and summed once.
    pub fn scan(&self, r: f64, k: usize) -> CellScan<D> {
        let cells = self.cells(r);
        let total = cells.total();
        if !(r > 0.0) {
            return CellScan {
                uncertain: (0..total as u32).collect(),
                cells,
                r,
                k,
            };
        }
        // per-row difference array: +1 at a span start, -1 one past its end
        let row_len = cells.dims[0] + 1;
        let rows = total / cells.dims[0];
        let mut diff = vec![0i32; rows * row_len];
        let margin = 2.0 * self.tol.eps_geo;
        let mut strides = [1usize; D];
        for a in 1..D {
            strides[a] = strides[a - 1] * cells.dims[a - 1];
        }
        // bucket order keeps the touched rows of consecutive balls in cache
        for &i in &self.buckets.order {
            let p = &self.points[i as usize];
            let c = &p.center.0;
            let rs = r * p.mark - margin;
            if rs <= 0.0 {
                continue;
            }
            let mut from = [0usize; D];
            let mut to = [0usize; D];
            let mut empty = false;
            for a in 1..D {
                match cells.inside_range(a, c[a], rs) {
                    Some((j0, j1)) => {
                        from[a] = j0;
                        to[a] = j1;
                    }
                    None => empty = true,
                }
            }
            if empty {
                continue;
            }
            let rs2 = rs * rs;
            let mut row = from;
            loop {
                // farthest squared offset of the row's cells over axes 1..D
                let mut far = 0.0;
                let mut base = 0;
                for a in 1..D {
                    let e0 = cells.edges[a][row[a]] - c[a];
                    let e1 = cells.edges[a][row[a] + 1] - c[a];
                    far += (e0 * e0).max(e1 * e1);
                    base += row[a] * strides[a];
                }
                if far < rs2 {
                    if let Some((j0, j1)) = cells.inside_range(0, c[0], (rs2 - far).sqrt()) {
                        let b = base / cells.dims[0] * row_len;
                        diff[b + j0] += 1;
                        diff[b + j1 + 1] -= 1;
                    }
                }
                let mut a = 1;
                while a < D {
                    if row[a] < to[a] {
                        row[a] += 1;
                        break;
                    }
                    row[a] = from[a];
                    a += 1;
                }
                if a == D {
                    break;
                }
            }
        }
        let kk = k as i32;
        let mut uncertain = Vec::new();
        for (row, d) in diff.chunks_exact(row_len).enumerate() {
            let mut depth = 0;
            for (j, &v) in d[..row_len - 1].iter().enumerate() {
                depth += v;
                if depth < kk {
                    uncertain.push((row * cells.dims[0] + j) as u32);
                }
            }
        }
        CellScan { cells, uncertain, r, k }
    }

    /// Balls that can reach `bx` at scale `r`.
    fn gather(&self, bx: &Aabb<D>, r: f64, out: &mut Vec<MarkedPoint<D>>) {
        out.clear();
        let eps = self.tol.eps_geo;
        let grown = bx.expand(r * self.a_max + eps);
        self.buckets.for_each_in(&grown.lo, &grown.hi, |i| {
            let p = self.points[i as usize];
            let rr = r * p.mark + eps;
            if bx.dist2_to(&p.center.0) <= rr * rr {
                out.push(p);
            }
        });
    }

    fn decide_cell(&self, bx: &Aabb<D>, r: f64, k: usize, local: &mut Vec<MarkedPoint<D>>) -> Decision {
        self.gather(bx, r, local);
        if local.len() < k {
            return Decision::NotCovered;
        }
        CoverageIndex::with_tolerance(local, r, self.tol).decide(r, bx, k)
    }

    /// Exact decision, stopping at the first uncovered cell.
    pub fn decide(&self, r: f64, k: usize) -> Decision {
        if k == 0 {
            return Decision::Covered;
        }
        self.decide_scan(&self.scan(r, k))
    }

    pub fn decide_scan(&self, scan: &CellScan<D>) -> Decision {
        if !(scan.r > 0.0) {
            return Decision::NotCovered;
        }
        let mut local = Vec::new();
        let mut unreliable = false;
        for &id in &scan.uncertain {
            let bx = scan.cells.cell_box(&scan.cells.unflatten(id as usize));
            match self.decide_cell(&bx, scan.r, scan.k, &mut local) {
                Decision::Covered => {}
                Decision::NotCovered => return Decision::NotCovered,
                Decision::Unreliable => unreliable = true,
            }
        }
        if unreliable {
            Decision::Unreliable
        } else {
            Decision::Covered
        }
    }

    /// Number of interior local-minimum witnesses in the region, and the
    /// number of degenerate tuples skipped.
    pub fn count_witnesses(&self, r: f64, k: usize) -> (usize, usize) {
        if k == 0 {
            return (0, 0);
        }
        self.count_scan(&self.scan(r, k))
    }

    pub fn count_scan(&self, scan: &CellScan<D>) -> (usize, usize) {
        if !(scan.r > 0.0) {
            return (0, 0);
        }
        let (r, k) = (scan.r, scan.k);
        let mut local = Vec::new();
        let mut count = 0;
        let mut degenerate = 0;
        for &id in &scan.uncertain {
            let idx = scan.cells.unflatten(id as usize);
            let bx = scan.cells.cell_box(&idx);
            self.gather(&bx, r, &mut local);
            let region = &self.region;
            let cells = &scan.cells;
            // each crossing point is charged to the one cell its floor index names
            let out = CoverageIndex::with_tolerance(&local, r, self.tol)
                .count(r, k, &bx, |q| region.contains(q) && cells.index_of(q) == idx);
            count += out.witnesses.len();
            degenerate += out.degenerate;
        }
        (count, degenerate)
    }

    /// Coverage threshold of the region, starting from the bracket hint.
    ///
    /// Only balls within `margin_scale * a_i` of the region are assumed to be
    /// present; a threshold above `margin_scale` is reported as an error so
    /// the caller can supply a larger window.
    pub fn threshold(&self, k: usize, tol_rel: f64, hint: (f64, f64), margin_scale: f64) -> Result<ThresholdOutcome> {
        self.threshold_from(None, k, tol_rel, hint, margin_scale)
    }

    /// As [`FastCoverage::threshold`], reusing `below`, a scan at a scale the
    /// caller found not covered, as the lower bracket.
    pub fn threshold_from(
        &self,
        below: Option<&CellScan<D>>,
        k: usize,
        tol_rel: f64,
        hint: (f64, f64),
        margin_scale: f64,
    ) -> Result<ThresholdOutcome> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if !(tol_rel > 0.0 && tol_rel < 1.0) {
            return Err(invalid(format!("tol_rel must lie in (0, 1), got {tol_rel}")));
        }
        if self.points.len() < k {
            return Err(Error::Uncoverable { k, points: self.points.len() });
        }
        let (lo0, hi) = hint;
        if !(lo0 > 0.0 && hi > lo0 && margin_scale > 0.0) {
            return Err(invalid(format!("bad threshold bracket ({lo0}, {hi})")));
        }
        let mut evaluations = 0;
        let mut unreliable_steps = 0;
        let mut local = Vec::new();
        let mut gather_scale = hi.min(margin_scale);
        let mut owned;
        let mut scan = match below {
            Some(s) if s.k == k && s.r > 0.0 => s,
            _ => {
                owned = self.scan(lo0, k);
                &owned
            }
        };
        loop {
            let lo = scan.r;
            let mut order = scan.uncertain.clone();
            // a fixed pseudo-random order keeps record updates rare
            let mut state = 0x9e37_79b9_7f4a_7c15u64;
            for i in (1..order.len()).rev() {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                order.swap(i, (state % (i as u64 + 1)) as usize);
            }
            let mut best = 0.0f64;
            for id in order {
                let bx = scan.cells.cell_box(&scan.cells.unflatten(id as usize));
                let floor = best.max(lo);
                loop {
                    self.gather(&bx, gather_scale.max(floor), &mut local);
                    evaluations += 1;
                    let covered = local.len() >= k
                        && match CoverageIndex::with_tolerance(&local, floor, self.tol).decide(floor, &bx, k) {
                            Decision::Covered => true,
                            Decision::NotCovered => false,
                            Decision::Unreliable => {
                                unreliable_steps += 1;
                                false
                            }
                        };
                    if covered {
                        break;
                    }
                    let found = if local.len() >= k {
                        let set = MarkedPointSet::from_points(local.clone())?;
                        let o = threshold_search(&set, &bx, k, tol_rel, Some((floor, gather_scale.max(floor * 1.01))))?;
                        evaluations += o.evaluations;
                        unreliable_steps += o.unreliable_steps;
                        (o.radius * (1.0 + tol_rel) <= gather_scale).then_some(o.radius)
                    } else {
                        None
                    };
                    match found {
                        Some(rc) => {
                            best = rc;
                            break;
                        }
                        None if gather_scale >= margin_scale => {
                            return Err(Error::Config(format!(
                                "coverage threshold exceeds the sampled margin scale {margin_scale}"
                            )));
                        }
                        None => gather_scale = (2.0 * gather_scale).min(margin_scale),
                    }
                }
            }
            if best > 0.0 {
                return Ok(ThresholdOutcome {
                    radius: best,
                    evaluations,
                    unreliable_steps,
                });
            }
            // covered at `lo`: move the lower bracket down
            let next = 0.8 * lo;
            if next < 1e-300 {
                return Err(invalid("region is covered at every positive scale"));
            }
            owned = self.scan(next, k);
            scan = &owned;
        }
    }
}
