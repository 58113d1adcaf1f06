//! Brute-force validators: a lattice coverage oracle and Monte Carlo
//! integration of the local-minimum volume `G`.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geom::{dist2, h_raw, Indicator, Point};
use crate::model::{closed_form_g, MarkedPointSet, RadiusLaw};
use crate::region::Aabb;

/// A lattice of `resolution` nodes per axis spanning `region`, endpoints
/// included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<const D: usize> {
    pub resolution: usize,
    pub region: Aabb<D>,
}

impl<const D: usize> GridSpec<D> {
    pub fn new(resolution: usize, region: Aabb<D>) -> Result<Self> {
        if resolution < 2 {
            return Err(invalid(format!("grid resolution must be at least 2, got {resolution}")));
        }
        Ok(GridSpec { resolution, region })
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.region.hi[axis] - self.region.lo[axis]) / (self.resolution - 1) as f64
    }

    fn node(&self, idx: &[usize; D]) -> [f64; D] {
        let mut p = [0.0; D];
        for a in 0..D {
            p[a] = if idx[a] + 1 == self.resolution {
                self.region.hi[a]
            } else {
                self.region.lo[a] + idx[a] as f64 * self.spacing(a)
            };
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome<const D: usize> {
    pub covered: bool,
    /// First node, in axis-0-fastest order, whose depth is below `k`.
    pub first_uncovered: Option<Point<D>>,
    pub min_depth: usize,
    pub min_depth_location: Point<D>,
}

/// Evaluates the closed-ball depth at every lattice node.
///
/// Depths are accumulated one ball at a time along axis-0 spans, so the cost
/// is the number of (node, covering ball) pairs rather than nodes times balls.
pub fn grid_coverage_oracle<const D: usize>(
    process: &MarkedPointSet<D>,
    r: f64,
    region: &Aabb<D>,
    k: usize,
    grid: &GridSpec<D>,
) -> Result<OracleOutcome<D>> {
    if grid.region != *region {
        return Err(invalid("grid must span the tested region"));
    }
    if grid.resolution < 2 {
        return Err(invalid("grid resolution must be at least 2"));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius scale must be nonnegative, got {r}")));
    }
    let n = grid.resolution;
    let total = n
        .checked_pow(D as u32)
        .filter(|&t| t <= 1 << 31)
        .ok_or_else(|| invalid(format!("grid of {n}^{D} nodes is too large")))?;
    let mut depth = vec![0u16; total];
    let h: [f64; D] = std::array::from_fn(|a| grid.spacing(a));
    let lo = region.lo;
    let idx_range = |a: usize, from: f64, to: f64| -> Option<(usize, usize)> {
        let i0 = ((from - lo[a]) / h[a]).ceil().max(0.0);
        let i1 = ((to - lo[a]) / h[a]).floor().min((n - 1) as f64);
        (i0 <= i1).then_some((i0 as usize, i1 as usize))
    };

    for p in process.points() {
        let c = p.center.0;
        let rho = r * p.mark;
        let rho2 = rho * rho;
        // rows: index tuples over axes 1..D inside the ball's bounding box
        let mut bounds = [(0usize, 0usize); D];
        let mut empty = false;
        for a in 1..D {
            match idx_range(a, c[a] - rho, c[a] + rho) {
                Some(b) => bounds[a] = b,
                None => empty = true,
            }
        }
        if empty {
            continue;
        }
        let mut row = [0usize; D];
        for a in 1..D {
            row[a] = bounds[a].0;
        }
        loop {
            let mut node = grid.node(&row);
            let mut rest = 0.0;
            for a in 1..D {
                rest += (node[a] - c[a]) * (node[a] - c[a]);
            }
            if rest <= rho2 {
                let w = (rho2 - rest).sqrt();
                if let Some((mut i0, mut i1)) = idx_range(0, c[0] - w, c[0] + w) {
                    // snap the span ends to the exact closed-ball test
                    let mut inside = |i: usize| {
                        row[0] = i;
                        node = grid.node(&row);
                        dist2(&node, &c) <= rho2
                    };
                    while i0 > 0 && inside(i0 - 1) {
                        i0 -= 1;
                    }
                    while i1 + 1 < n && inside(i1 + 1) {
                        i1 += 1;
                    }
                    while i0 <= i1 && !inside(i0) {
                        i0 += 1;
                    }
                    while i1 >= i0 && !inside(i1) {
                        if i1 == 0 {
                            break;
                        }
                        i1 -= 1;
                    }
                    if i0 <= i1 && inside(i1) {
                        let mut base = 0;
                        let mut stride = 1;
                        for a in 0..D {
                            if a > 0 {
                                base += row[a] * stride;
                            }
                            stride *= n;
                        }
                        for d in &mut depth[base + i0..=base + i1] {
                            *d = d.saturating_add(1);
                        }
                    }
                }
            }
            // next row
            let mut a = 1;
            loop {
                if a == D {
                    break;
                }
                if row[a] < bounds[a].1 {
                    row[a] += 1;
                    break;
                }
                row[a] = bounds[a].0;
                a += 1;
            }
            if a == D {
                break;
            }
        }
    }

    let unflatten = |mut flat: usize| -> [usize; D] {
        let mut idx = [0usize; D];
        for v in idx.iter_mut() {
            *v = flat % n;
            flat /= n;
        }
        idx
    };
    let first = depth.iter().position(|&d| (d as usize) < k);
    let (min_at, &min_depth) = depth
        .iter()
        .enumerate()
        .min_by_key(|&(_, d)| *d)
        .expect("grid has at least 2^D nodes");
    Ok(OracleOutcome {
        covered: first.is_none(),
        first_uncovered: first.map(|f| Point(grid.node(&unflatten(f)))),
        min_depth: min_depth as usize,
        min_depth_location: Point(grid.node(&unflatten(min_at))),
    })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.estimate - target).abs() <= sigmas * self.std_err
    }
}

fn mean_and_se(sum: f64, sum2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / nf).sqrt())
}

fn integral_g_fixed<const D: usize, R: Rng + ?Sized>(radii: &[f64], n: usize, rng: &mut R) -> McEstimate {
    let a1 = radii[0];
    let mut half = [0.0; D];
    let mut vol = 1.0;
    for i in 1..D {
        half[i] = a1 + radii[i];
        vol *= (2.0 * half[i]).powi(D as i32);
    }
    let mut rads = [0.0; D];
    rads.copy_from_slice(radii);
    let mut centers = [[0.0; D]; D];
    let mut hits = 0usize;
    'sample: for _ in 0..n {
        for i in 1..D {
            for a in 0..D {
                centers[i][a] = half[i] * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        // every pair must meet for h to be nonzero
        for i in 0..D {
            for j in i + 1..D {
                let s = rads[i] + rads[j];
                if dist2(&centers[i], &centers[j]) > s * s {
                    continue 'sample;
                }
            }
        }
        if h_raw::<D>(&centers, &rads, 1e-12) == Indicator::One {
            hits += 1;
        }
    }
    let fact: f64 = (1..=D).map(|i| i as f64).product();
    let scale = vol / fact;
    let (m, se) = mean_and_se(hits as f64, hits as f64, n);
    McEstimate {
        estimate: scale * m,
        std_err: scale * se,
        samples: n,
    }
}

/// Estimates `G(a_1, ..., a_d) = (1/d!) * integral of h` over the positions of
/// balls `2..d`, with ball 1 at the origin.
///
/// Ball `i` can meet ball 1 only inside `[-(a_1 + a_i), a_1 + a_i]^d`, so
/// sampling that box loses nothing. Degenerate `h` outcomes count as 0.
pub fn mc_integral_g<R: Rng + ?Sized>(radii: &[f64], n: usize, rng: &mut R) -> Result<McEstimate> {
    if n < 2 {
        return Err(invalid("at least two samples are needed"));
    }
    if radii.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(invalid("radii must be positive"));
    }
    match radii.len() {
        2 => Ok(integral_g_fixed::<2, R>(radii, n, rng)),
        3 => Ok(integral_g_fixed::<3, R>(radii, n, rng)),
        4 => Ok(integral_g_fixed::<4, R>(radii, n, rng)),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// How `mc_constant_c0` evaluates `G` at each sampled mark vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum C0Method {
    ClosedForm,
    /// Nested Monte Carlo with this many integration samples per mark vector.
    Integral { inner_samples: usize },
}

/// Estimates `c_0 = E[G(Y_1, ..., Y_d)]` by sampling `n` mark vectors.
///
/// With nested integration the outer sample variance already contains the
/// inner noise, so the reported error covers both stages.
pub fn mc_constant_c0<R: Rng + ?Sized>(
    d: usize,
    law: &RadiusLaw,
    n: usize,
    method: C0Method,
    rng: &mut R,
) -> Result<McEstimate> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if n < 2 {
        return Err(invalid("at least two samples are needed"));
    }
    law.validate()?;
    let mut marks = vec![0.0; d];
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        for m in marks.iter_mut() {
            *m = law.sample(rng);
        }
        let g = match method {
            C0Method::ClosedForm => closed_form_g(&marks),
            C0Method::Integral { inner_samples } => mc_integral_g(&marks, inner_samples, rng)?.estimate,
        };
        sum += g;
        sum2 += g * g;
    }
    let (estimate, std_err) = mean_and_se(sum, sum2, n);
    Ok(McEstimate {
        estimate,
        std_err,
        samples: n,
    })
}
