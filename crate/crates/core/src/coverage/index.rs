//! Uniform grid over the ball centers plus per-ball neighbor lists.
//!
//! Built once for a largest radius scale `r_max`; every query at a scale
//! `r <= r_max` reuses it. Points are stored in cell order for locality and
//! mapped back to their original indices when witnesses are reported.

use std::ops::ControlFlow;

use crate::geom::{cone_raw, dist2, intersect_raw, Degeneracy, GeomTolerance, IntersectionResult, MarkedPoint};
use crate::region::{Aabb, Face};

use super::{CandidateStatus, WitnessKind};

struct Grid<const D: usize> {
    origin: [f64; D],
    cell: f64,
    dims: [usize; D],
    strides: [usize; D],
    /// `start[c]..start[c + 1]` are the local indices stored in cell `c`.
    start: Vec<u32>,
}

impl<const D: usize> Grid<D> {
    fn coord(&self, p: &[f64; D], axis: usize) -> isize {
        ((p[axis] - self.origin[axis]) / self.cell).floor() as isize
    }

    fn cell_of(&self, p: &[f64; D]) -> usize {
        let mut id = 0;
        for a in 0..D {
            let c = self.coord(p, a).clamp(0, self.dims[a] as isize - 1) as usize;
            id += c * self.strides[a];
        }
        id
    }

    /// Calls `f` with each local-index range in the 3^D block of cells around
    /// `p`. Cells outside the grid are skipped; `p` itself may lie outside.
    #[inline]
    fn for_each_block<F: FnMut(std::ops::Range<usize>)>(&self, p: &[f64; D], mut f: F) {
        if self.start.len() <= 1 {
            return;
        }
        let mut base = [0isize; D];
        for a in 0..D {
            base[a] = self.coord(p, a);
        }
        let total = 3usize.pow(D as u32);
        'cells: for code in 0..total {
            let mut c = code;
            let mut id = 0usize;
            for a in 0..D {
                let ca = base[a] + (c % 3) as isize - 1;
                c /= 3;
                if ca < 0 || ca >= self.dims[a] as isize {
                    continue 'cells;
                }
                id += ca as usize * self.strides[a];
            }
            let lo = self.start[id] as usize;
            let hi = self.start[id + 1] as usize;
            if lo < hi {
                f(lo..hi);
            }
        }
    }
}

/// Raw witness with local indices, converted by the public layer.
#[derive(Clone, Debug)]
pub(crate) struct RawWitness<const D: usize> {
    pub location: [f64; D],
    pub tuple: Vec<u32>,
    pub depth: usize,
    pub kind: WitnessKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ScanMode {
    /// Stop at the first clean failing candidate.
    Decide,
    /// Visit every candidate and collect all failures.
    Collect,
}

#[derive(Debug, Default)]
pub(crate) struct ScanResult<const D: usize> {
    pub witnesses: Vec<RawWitness<D>>,
    pub failed: bool,
    pub ambiguous: usize,
    pub degenerate: usize,
    pub candidates: usize,
}

#[derive(Debug, Default)]
pub(crate) struct CountResult<const D: usize> {
    pub witnesses: Vec<RawWitness<D>>,
    pub degenerate: usize,
}

/// Precomputed neighborhood structure for one point set.
pub struct CoverageIndex<const D: usize> {
    centers: Vec<[f64; D]>,
    marks: Vec<f64>,
    orig: Vec<u32>,
    r_max: f64,
    nbr_start: Vec<u32>,
    nbrs: Vec<u32>,
    grid: Grid<D>,
    tol: GeomTolerance,
}

impl<const D: usize> CoverageIndex<D> {
    pub fn new(points: &[MarkedPoint<D>], r_max: f64) -> Self {
        Self::with_tolerance(points, r_max, GeomTolerance::default())
    }

    pub fn with_tolerance(points: &[MarkedPoint<D>], r_max: f64, tol: GeomTolerance) -> Self {
        let n = points.len();
        let a_max = points.iter().map(|p| p.mark).fold(0.0, f64::max);
        let slack = 4.0 * tol.eps_geo;
        let reach = 2.0 * r_max * a_max + slack;

        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for p in points {
            for a in 0..D {
                lo[a] = lo[a].min(p.center.0[a]);
                hi[a] = hi[a].max(p.center.0[a]);
            }
        }
        if n == 0 {
            lo = [0.0; D];
            hi = [0.0; D];
        }
        let max_extent = (0..D).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        // at most about 2n cells in total
        let per_axis = ((2 * n.max(1)) as f64).powf(1.0 / D as f64).ceil().max(1.0);
        let mut cell = reach.max(max_extent / per_axis);
        if !(cell > 0.0) {
            cell = 1.0;
        }
        let mut dims = [1usize; D];
        let mut strides = [1usize; D];
        let mut total = 1usize;
        for a in 0..D {
            dims[a] = ((hi[a] - lo[a]) / cell).floor() as usize + 1;
            strides[a] = total;
            total *= dims[a];
        }
        let mut grid = Grid {
            origin: lo,
            cell,
            dims,
            strides,
            start: vec![0; total + 1],
        };

        // counting sort by cell
        let cells: Vec<usize> = points.iter().map(|p| grid.cell_of(&p.center.0)).collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..total {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        let mut orig = vec![0u32; n];
        for (i, &c) in cells.iter().enumerate() {
            orig[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        let centers: Vec<[f64; D]> = orig.iter().map(|&i| points[i as usize].center.0).collect();
        let marks: Vec<f64> = orig.iter().map(|&i| points[i as usize].mark).collect();

        let mut nbr_start = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::new();
        nbr_start.push(0u32);
        for i in 0..n {
            let xi = &centers[i];
            let first = nbrs.len();
            grid.for_each_block(xi, |range| {
                for j in range {
                    if j == i {
                        continue;
                    }
                    let cut = r_max * (marks[i] + marks[j]) + slack;
                    if dist2(xi, &centers[j]) <= cut * cut {
                        nbrs.push(j as u32);
                    }
                }
            });
            nbrs[first..].sort_unstable();
            nbr_start.push(nbrs.len() as u32);
        }

        CoverageIndex {
            centers,
            marks,
            orig,
            r_max,
            nbr_start,
            nbrs,
            grid,
            tol,
        }
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn tolerance(&self) -> GeomTolerance {
        self.tol
    }

    pub(crate) fn original_index(&self, local: u32) -> usize {
        self.orig[local as usize] as usize
    }

    #[inline]
    fn neighbors(&self, i: usize) -> &[u32] {
        &self.nbrs[self.nbr_start[i] as usize..self.nbr_start[i + 1] as usize]
    }

    #[inline]
    fn balls_meet(&self, i: usize, j: usize, r: f64) -> bool {
        let cut = r * (self.marks[i] + self.marks[j]) + self.tol.eps_geo;
        dist2(&self.centers[i], &self.centers[j]) <= cut * cut
    }

    /// Depth of `z` among the balls in `pool`, skipping `exclude`.
    #[inline]
    fn classify<I: IntoIterator<Item = usize>>(&self, z: &[f64; D], r: f64, k: usize, pool: I, exclude: &[u32]) -> CandidateStatus {
        let eps = self.tol.eps_geo;
        let mut closed = 0;
        let mut sure = 0;
        let mut maybe = 0;
        for m in pool {
            if exclude.contains(&(m as u32)) {
                continue;
            }
            let rho = r * self.marks[m];
            let d2 = dist2(z, &self.centers[m]);
            let outer = rho + eps;
            if d2 > outer * outer {
                continue;
            }
            maybe += 1;
            if d2 <= rho * rho {
                closed += 1;
            }
            if rho > eps {
                let inner = rho - eps;
                if d2 <= inner * inner {
                    sure += 1;
                    if sure >= k {
                        return CandidateStatus::Covered;
                    }
                }
            }
        }
        if maybe < k {
            CandidateStatus::Fail { depth: closed }
        } else if sure >= k {
            CandidateStatus::Covered
        } else {
            CandidateStatus::Ambiguous
        }
    }

    fn classify_on_sphere(&self, z: &[f64; D], r: f64, k: usize, tuple: &[u32]) -> CandidateStatus {
        let first = tuple[0] as usize;
        self.classify(z, r, k, self.neighbors(first).iter().map(|&m| m as usize), tuple)
    }

    fn classify_free(&self, z: &[f64; D], r: f64, k: usize) -> CandidateStatus {
        let mut pool = Vec::new();
        self.grid.for_each_block(z, |range| pool.extend(range));
        self.classify(z, r, k, pool, &[])
    }

    /// Enumerates `size`-cliques of pairwise meeting balls among those with
    /// `allowed[i]`, each in increasing local-index order.
    fn for_each_clique<F>(&self, size: usize, r: f64, allowed: &[bool], mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&[u32]) -> ControlFlow<()>,
    {
        debug_assert!((1..=3).contains(&size));
        let mut cand: Vec<u32> = Vec::new();
        for i in 0..self.len() {
            if !allowed[i] {
                continue;
            }
            if size == 1 {
                f(&[i as u32])?;
                continue;
            }
            cand.clear();
            for &j in self.neighbors(i) {
                let j = j as usize;
                if j > i && allowed[j] && self.balls_meet(i, j, r) {
                    cand.push(j as u32);
                }
            }
            for (a, &j) in cand.iter().enumerate() {
                if size == 2 {
                    f(&[i as u32, j])?;
                    continue;
                }
                for &l in &cand[a + 1..] {
                    if self.balls_meet(j as usize, l as usize, r) {
                        f(&[i as u32, j, l])?;
                    }
                }
            }
        }
        ControlFlow::Continue(())
    }

    fn relevant_to(&self, r: f64, region: &Aabb<D>, out: &mut Vec<bool>) {
        let eps = self.tol.eps_geo;
        out.clear();
        out.extend((0..self.len()).map(|i| {
            let reach = r * self.marks[i] + eps;
            region.dist2_to(&self.centers[i]) <= reach * reach
        }));
    }

    /// Visits every coverage candidate of `region` at scale `r`.
    pub(crate) fn scan(&self, r: f64, region: &Aabb<D>, k: usize, mode: ScanMode) -> ScanResult<D> {
        assert!(r <= self.r_max * (1.0 + 1e-12), "scale {r} exceeds index scale {}", self.r_max);
        let mut out = ScanResult::default();
        let eps = self.tol.eps_geo;

        // record a candidate; Break when deciding and a clean failure was seen
        let record = |out: &mut ScanResult<D>,
                          status: CandidateStatus,
                          z: [f64; D],
                          tuple: &[u32],
                          kind: &dyn Fn() -> WitnessKind|
         -> ControlFlow<()> {
            out.candidates += 1;
            match status {
                CandidateStatus::Covered => ControlFlow::Continue(()),
                CandidateStatus::Ambiguous => {
                    out.ambiguous += 1;
                    out.degenerate += 1;
                    ControlFlow::Continue(())
                }
                CandidateStatus::Fail { depth } => {
                    out.failed = true;
                    out.witnesses.push(RawWitness {
                        location: z,
                        tuple: tuple.to_vec(),
                        depth,
                        kind: kind(),
                    });
                    if mode == ScanMode::Decide {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                }
            }
        };
        // degenerate geometry: ambiguous unless its approximate point is surely covered
        let degenerate_at = |out: &mut ScanResult<D>, status: Option<CandidateStatus>| {
            out.degenerate += 1;
            if !matches!(status, Some(CandidateStatus::Covered)) {
                out.ambiguous += 1;
            }
        };

        // vertices
        for (id, v) in region.vertices() {
            let status = self.classify_free(&v.0, r, k);
            if record(&mut out, status, v.0, &[], &|| WitnessKind::Vertex(id)).is_break() {
                return out;
            }
        }
        if self.is_empty() {
            return out;
        }

        let mut relevant = Vec::new();
        self.relevant_to(r, region, &mut relevant);

        // faces: j spheres restricted to a j-dimensional face
        let mut allowed = vec![false; self.len()];
        let mut restricted = vec![0.0f64; self.len()];
        for face in region.faces() {
            let j = face.free_dims;
            let mut any = false;
            for i in 0..self.len() {
                allowed[i] = false;
                if !relevant[i] {
                    continue;
                }
                let c = &self.centers[i];
                let rho = r * self.marks[i];
                let mut h2 = 0.0;
                for a in 0..D {
                    if let Some(v) = face.fixed[a] {
                        h2 += (c[a] - v) * (c[a] - v);
                    }
                }
                let rr2 = rho * rho - h2;
                if rr2 < -(eps * eps) {
                    continue;
                }
                if rr2 <= eps * eps + 64.0 * f64::EPSILON * rho * rho {
                    // sphere tangent to the face's affine hull
                    let mut z = *c;
                    for a in 0..D {
                        if let Some(v) = face.fixed[a] {
                            z[a] = v;
                        }
                    }
                    if region.contains(&z) {
                        let s = self.classify_on_sphere(&z, r, k, &[i as u32]);
                        degenerate_at(&mut out, Some(s));
                    }
                    continue;
                }
                // restricted ball must reach the face rectangle
                let mut d2 = 0.0;
                for a in 0..D {
                    if face.fixed[a].is_none() {
                        let t = if c[a] < region.lo[a] {
                            region.lo[a] - c[a]
                        } else if c[a] > region.hi[a] {
                            c[a] - region.hi[a]
                        } else {
                            0.0
                        };
                        d2 += t * t;
                    }
                }
                if d2 <= rr2 {
                    allowed[i] = true;
                    restricted[i] = rr2.sqrt();
                    any = true;
                }
            }
            if !any {
                continue;
            }
            let flow = self.for_each_clique(j, r, &allowed, |tuple| {
                let (points, degenerate) = self.face_points(&face, tuple, &restricted);
                if let Some(z) = degenerate {
                    if z[0].is_nan() {
                        degenerate_at(&mut out, None);
                    } else if region.contains(&z) {
                        let status = self.classify_on_sphere(&z, r, k, tuple);
                        degenerate_at(&mut out, Some(status));
                    }
                }
                for z in points.into_iter().flatten() {
                    if !region.contains(&z) {
                        continue;
                    }
                    let status = self.classify_on_sphere(&z, r, k, tuple);
                    record(&mut out, status, z, tuple, &|| WitnessKind::FaceCritical(face.id))?;
                }
                ControlFlow::Continue(())
            });
            if flow.is_break() {
                return out;
            }
        }

        // interior: D spheres
        let _ = self.for_each_clique(D, r, &relevant, |tuple| {
            let mut cs = [[0.0; D]; D];
            let mut radii = [0.0; D];
            for (s, &m) in tuple.iter().enumerate() {
                cs[s] = self.centers[m as usize];
                radii[s] = r * self.marks[m as usize];
            }
            match intersect_raw::<D>(&cs, &radii, eps) {
                IntersectionResult::Empty => ControlFlow::Continue(()),
                IntersectionResult::Degenerate(d) => {
                    match d {
                        Degeneracy::Tangent(p) => {
                            if region.contains(&p.0) {
                                let s = self.classify_on_sphere(&p.0, r, k, tuple);
                                degenerate_at(&mut out, Some(s));
                            }
                        }
                        Degeneracy::Singular => degenerate_at(&mut out, None),
                    }
                    ControlFlow::Continue(())
                }
                IntersectionResult::Pair { lower, upper } => {
                    if region.contains(&lower.0) {
                        let s = self.classify_on_sphere(&lower.0, r, k, tuple);
                        record(&mut out, s, lower.0, tuple, &|| WitnessKind::InteriorCrossing)?;
                    }
                    if region.contains(&upper.0) {
                        let s = self.classify_on_sphere(&upper.0, r, k, tuple);
                        record(&mut out, s, upper.0, tuple, &|| {
                            let c = cone_raw(&upper.0, &cs, eps);
                            if c.inside && !c.degenerate {
                                WitnessKind::InteriorLocalMin
                            } else {
                                WitnessKind::InteriorCrossing
                            }
                        })?;
                    }
                    ControlFlow::Continue(())
                }
            }
        });
        out
    }

    /// Intersection points of the `tuple` spheres restricted to `face`, in
    /// full coordinates, plus an approximate point when the restricted system
    /// is degenerate (`[NaN; D]` when no point is available).
    fn face_points(&self, face: &Face<D>, tuple: &[u32], restricted: &[f64]) -> ([Option<[f64; D]>; 2], Option<[f64; D]>) {
        let mut free = [0usize; D];
        let mut nf = 0;
        for a in 0..D {
            if face.fixed[a].is_none() {
                free[nf] = a;
                nf += 1;
            }
        }
        let lift = |local: &[f64]| {
            let mut z = [0.0; D];
            for a in 0..D {
                if let Some(v) = face.fixed[a] {
                    z[a] = v;
                }
            }
            for (s, &a) in free[..nf].iter().enumerate() {
                z[a] = local[s];
            }
            z
        };
        match nf {
            1 => {
                let m = tuple[0] as usize;
                let c = self.centers[m][free[0]];
                let rr = restricted[m];
                ([Some(lift(&[c - rr])), Some(lift(&[c + rr]))], None)
            }
            2 => {
                let mut cs = [[0.0; 2]; 2];
                let mut radii = [0.0; 2];
                for (s, &m) in tuple.iter().enumerate() {
                    let c = &self.centers[m as usize];
                    cs[s] = [c[free[0]], c[free[1]]];
                    radii[s] = restricted[m as usize];
                }
                match intersect_raw::<2>(&cs, &radii, self.tol.eps_geo) {
                    IntersectionResult::Empty => ([None, None], None),
                    IntersectionResult::Pair { lower, upper } => ([Some(lift(&lower.0)), Some(lift(&upper.0))], None),
                    IntersectionResult::Degenerate(Degeneracy::Tangent(p)) => ([None, None], Some(lift(&p.0))),
                    IntersectionResult::Degenerate(Degeneracy::Singular) => ([None, None], Some([f64::NAN; D])),
                }
            }
            _ => unreachable!("faces of boxes in d <= 3 have at most two free axes"),
        }
    }

    /// Upper intersection points of `D`-tuples that satisfy `h = 1`, lie in
    /// `inside`, and are covered by fewer than `k` other balls. Only balls
    /// reaching `reach_region` are considered, so it must contain `inside`.
    pub(crate) fn count<F>(&self, r: f64, k: usize, reach_region: &Aabb<D>, inside: F) -> CountResult<D>
    where
        F: Fn(&[f64; D]) -> bool,
    {
        assert!(r <= self.r_max * (1.0 + 1e-12), "scale {r} exceeds index scale {}", self.r_max);
        let eps = self.tol.eps_geo;
        let mut out = CountResult::default();
        if self.is_empty() {
            return out;
        }
        let relevant: Vec<bool> = (0..self.len())
            .map(|i| {
                let reach = r * self.marks[i] + eps;
                reach_region.dist2_to(&self.centers[i]) <= reach * reach
            })
            .collect();
        let _ = self.for_each_clique(D, r, &relevant, |tuple| {
            let mut cs = [[0.0; D]; D];
            let mut radii = [0.0; D];
            for (s, &m) in tuple.iter().enumerate() {
                cs[s] = self.centers[m as usize];
                radii[s] = r * self.marks[m as usize];
            }
            match intersect_raw::<D>(&cs, &radii, eps) {
                IntersectionResult::Empty => {}
                IntersectionResult::Degenerate(d) => {
                    let near = match d {
                        Degeneracy::Tangent(p) => inside(&p.0),
                        Degeneracy::Singular => true,
                    };
                    if near {
                        out.degenerate += 1;
                    }
                }
                IntersectionResult::Pair { upper, .. } => {
                    if !inside(&upper.0) {
                        return ControlFlow::Continue(());
                    }
                    let c = cone_raw(&upper.0, &cs, eps);
                    if c.degenerate {
                        out.degenerate += 1;
                        return ControlFlow::Continue(());
                    }
                    if !c.inside {
                        return ControlFlow::Continue(());
                    }
                    match self.classify_on_sphere(&upper.0, r, k, tuple) {
                        CandidateStatus::Covered => {}
                        CandidateStatus::Ambiguous => out.degenerate += 1,
                        CandidateStatus::Fail { depth } => out.witnesses.push(RawWitness {
                            location: upper.0,
                            tuple: tuple.to_vec(),
                            depth,
                            kind: WitnessKind::InteriorLocalMin,
                        }),
                    }
                }
            }
            ControlFlow::Continue(())
        });
        out
    }
}
