//! Geometric kernel.
//!
//! Intersections of `d` sphere boundaries in `R^d`, the canonical ordering of
//! the two intersection points, and the local-minimum predicate `h` evaluated
//! through the cone test. The hyperplane falsifier is an independent oracle
//! for the cone test and is only used for validation.
//!
//! Everything here is allocation free and generic over the ambient dimension
//! `D`; the hot paths in [`crate::coverage`] call the `*_raw` variants
//! directly on coordinate arrays.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// A point of `R^D`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<const D: usize>(pub [f64; D]);

impl<const D: usize> Point<D> {
    pub fn new(coords: [f64; D]) -> Self {
        Point(coords)
    }

    pub fn origin() -> Self {
        Point([0.0; D])
    }

    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }

    /// Height along the last coordinate axis.
    pub fn height(&self) -> f64 {
        self.0[D - 1]
    }

    pub fn dist2(&self, other: &Point<D>) -> f64 {
        dist2(&self.0, &other.0)
    }

    /// `true` if `self` is lower than `other`, with lexicographic tie-break.
    pub fn precedes(&self, other: &Point<D>) -> bool {
        precedes(&self.0, &other.0)
    }
}

impl<const D: usize> From<[f64; D]> for Point<D> {
    fn from(c: [f64; D]) -> Self {
        Point(c)
    }
}

/// A ball center together with its radius multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkedPoint<const D: usize> {
    pub center: Point<D>,
    pub mark: f64,
}

impl<const D: usize> MarkedPoint<D> {
    pub fn new(center: impl Into<Point<D>>, mark: f64) -> Self {
        MarkedPoint {
            center: center.into(),
            mark,
        }
    }
}

/// Absolute tolerance for singular systems and tangencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeomTolerance {
    pub eps_geo: f64,
}

impl GeomTolerance {
    pub fn new(eps_geo: f64) -> Result<Self> {
        if !(eps_geo > 0.0 && eps_geo.is_finite()) {
            return Err(invalid(format!("eps_geo must be positive, got {eps_geo}")));
        }
        Ok(GeomTolerance { eps_geo })
    }
}

impl Default for GeomTolerance {
    fn default() -> Self {
        GeomTolerance { eps_geo: 1e-9 }
    }
}

/// Why an intersection could not be classified as empty or a clean pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Degeneracy<const D: usize> {
    /// The boundaries touch (within tolerance) at approximately this point.
    Tangent(Point<D>),
    /// The centers are affinely dependent within tolerance.
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntersectionResult<const D: usize> {
    Empty,
    /// `lower` precedes `upper` in the height-then-lexicographic order.
    Pair {
        lower: Point<D>,
        upper: Point<D>,
    },
    Degenerate(Degeneracy<D>),
}

impl<const D: usize> IntersectionResult<D> {
    pub fn upper(&self) -> Option<Point<D>> {
        match self {
            IntersectionResult::Pair { upper, .. } => Some(*upper),
            _ => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, IntersectionResult::Degenerate(_))
    }
}

/// Value of the local-minimum indicator `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Indicator {
    Zero,
    One,
    Degenerate,
}

impl Indicator {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Indicator::Zero => Some(false),
            Indicator::One => Some(true),
            Indicator::Degenerate => None,
        }
    }
}

/// Result of the cone test `e_d in Cone(q - x_1, ..., q - x_d)^o`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeOutcome {
    pub inside: bool,
    /// The linear system was singular within tolerance; `inside` is `false`.
    pub degenerate: bool,
    /// Smallest coefficient of `e_d` in the basis of normalized `q - x_i`.
    pub min_coefficient: f64,
}

/// Result of the randomized hyperplane-condition oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FalsifierOutcome<const D: usize> {
    /// `false` when a falsifying direction was found.
    pub holds: bool,
    /// A direction `f` with `<f, e_d> <= 0` and `<f, q - x_i> >= -tol` for all i.
    pub witness: Option<Point<D>>,
    /// Best margin `min(-<f,e_d>, min_i <f, u_i>)` over the random directions.
    pub best_sampled_margin: f64,
}

// ---------------------------------------------------------------------------
// small vector helpers

#[inline]
pub(crate) fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub(crate) fn dist2<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for i in 0..D {
        let t = a[i] - b[i];
        s += t * t;
    }
    s
}

#[inline]
fn sub<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = a[i] - b[i];
    }
    out
}

#[inline]
pub(crate) fn precedes<const D: usize>(a: &[f64; D], b: &[f64; D]) -> bool {
    if a[D - 1] != b[D - 1] {
        return a[D - 1] < b[D - 1];
    }
    for i in 0..D {
        if a[i] != b[i] {
            return a[i] < b[i];
        }
    }
    false
}

fn normalize<const D: usize>(v: &mut [f64; D]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

/// Modified Gram-Schmidt on `rows`, returning the orthonormal rows and the
/// lower-triangular factor `L` with `rows[i] = sum_{j<=i} L[i][j] q[j]`.
/// Returns `None` when some pivot `L[i][i]` is at most `pivot_tol`.
type Basis<const D: usize> = [[f64; D]; D];

fn gram_schmidt<const D: usize>(
    rows: &[[f64; D]],
    pivot_tol: f64,
) -> Option<(Basis<D>, Basis<D>)> {
    debug_assert!(rows.len() <= D);
    let mut q = [[0.0; D]; D];
    let mut l = [[0.0; D]; D];
    for (i, row) in rows.iter().enumerate() {
        let mut v = *row;
        for j in 0..i {
            let c = dot(&v, &q[j]);
            l[i][j] = c;
            for m in 0..D {
                v[m] -= c * q[j][m];
            }
        }
        // second pass keeps the basis orthogonal for nearly dependent rows
        for j in 0..i {
            let c = dot(&v, &q[j]);
            l[i][j] += c;
            for m in 0..D {
                v[m] -= c * q[j][m];
            }
        }
        let n = normalize(&mut v);
        if n <= pivot_tol {
            return None;
        }
        l[i][i] = n;
        q[i] = v;
    }
    Some((q, l))
}

/// A unit vector orthogonal to the first `used` rows of the orthonormal `q`.
fn complement<const D: usize>(q: &[[f64; D]; D], used: usize) -> [f64; D] {
    let mut best = 0;
    let mut best_res = f64::NEG_INFINITY;
    for m in 0..D {
        let mut res = 1.0;
        for row in q.iter().take(used) {
            res -= row[m] * row[m];
        }
        if res > best_res {
            best_res = res;
            best = m;
        }
    }
    let mut v = [0.0; D];
    v[best] = 1.0;
    for _ in 0..2 {
        for row in q.iter().take(used) {
            let c = dot(&v, row);
            for m in 0..D {
                v[m] -= c * row[m];
            }
        }
    }
    normalize(&mut v);
    v
}

// ---------------------------------------------------------------------------
// sphere intersection

/// Intersection of the `D` sphere boundaries `|y - centers[i]| = radii[i]`.
///
/// Subtracting the first equation from the others leaves `D - 1` linear
/// equations whose solution set is a line; the points are where that line
/// meets the first sphere. No validation: callers pass exactly `D` centers.
pub(crate) fn intersect_raw<const D: usize>(
    centers: &[[f64; D]],
    radii: &[f64],
    eps: f64,
) -> IntersectionResult<D> {
    debug_assert_eq!(centers.len(), D);
    debug_assert_eq!(radii.len(), D);
    let x0 = &centers[0];
    let r0 = radii[0];
    let mut rows = [[0.0; D]; D];
    let mut rhs = [0.0; D];
    for i in 1..D {
        let c = sub(&centers[i], x0);
        rhs[i - 1] = 0.5 * (r0 * r0 - radii[i] * radii[i] + dot(&c, &c));
        rows[i - 1] = c;
    }
    let Some((q, l)) = gram_schmidt(&rows[..D - 1], eps) else {
        return IntersectionResult::Degenerate(Degeneracy::Singular);
    };
    // forward substitution: L w = rhs, z0 = sum w_j q_j
    let mut w = [0.0; D];
    for i in 0..D - 1 {
        let mut s = rhs[i];
        for j in 0..i {
            s -= l[i][j] * w[j];
        }
        w[i] = s / l[i][i];
    }
    let mut z0 = [0.0; D];
    for j in 0..D - 1 {
        for m in 0..D {
            z0[m] += w[j] * q[j][m];
        }
    }
    let n = complement(&q, D - 1);
    let z0n = dot(&z0, &z0);
    let disc = r0 * r0 - z0n;
    let noise = 64.0 * f64::EPSILON * (r0 * r0 + z0n);
    if disc.abs() <= eps * eps + noise {
        let mut p = [0.0; D];
        for m in 0..D {
            p[m] = x0[m] + z0[m];
        }
        return IntersectionResult::Degenerate(Degeneracy::Tangent(Point(p)));
    }
    if disc < 0.0 {
        return IntersectionResult::Empty;
    }
    let s = disc.sqrt();
    let mut a = [0.0; D];
    let mut b = [0.0; D];
    for m in 0..D {
        let base = x0[m] + z0[m];
        a[m] = base + s * n[m];
        b[m] = base - s * n[m];
    }
    if precedes(&a, &b) {
        IntersectionResult::Pair {
            lower: Point(a),
            upper: Point(b),
        }
    } else {
        IntersectionResult::Pair {
            lower: Point(b),
            upper: Point(a),
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Both points of `cap_i dB(centers[i], radii[i])` when that set has exactly
/// two points.
pub fn sphere_intersection<const D: usize>(
    centers: &[Point<D>],
    radii: &[f64],
    tol: GeomTolerance,
) -> Result<IntersectionResult<D>> {
    check_len(D, centers.len())?;
    check_len(D, radii.len())?;
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(invalid(format!("radii must be positive and finite, got {r}")));
    }
    let mut cs = [[0.0; D]; D];
    for (c, p) in cs.iter_mut().zip(centers) {
        *c = p.0;
    }
    Ok(intersect_raw(&cs, radii, tol.eps_geo))
}

// ---------------------------------------------------------------------------
// cone test

pub(crate) fn cone_raw<const D: usize>(q: &[f64; D], centers: &[[f64; D]], eps: f64) -> ConeOutcome {
    // columns are the normalized vectors q - x_i; rhs is e_D
    let mut m = [[0.0; D]; D];
    for (col, x) in centers.iter().enumerate() {
        let mut u = sub(q, x);
        normalize(&mut u);
        for row in 0..D {
            m[row][col] = u[row];
        }
    }
    let mut rhs = [0.0; D];
    rhs[D - 1] = 1.0;
    let degenerate = ConeOutcome {
        inside: false,
        degenerate: true,
        min_coefficient: f64::NAN,
    };
    for c in 0..D {
        let mut p = c;
        for r in c + 1..D {
            if m[r][c].abs() > m[p][c].abs() {
                p = r;
            }
        }
        if m[p][c].abs() <= eps {
            return degenerate;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in c + 1..D {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for j in c..D {
                    m[r][j] -= f * m[c][j];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    let mut b = [0.0; D];
    for c in (0..D).rev() {
        let mut s = rhs[c];
        for j in c + 1..D {
            s -= m[c][j] * b[j];
        }
        b[c] = s / m[c][c];
    }
    let min_coefficient = b.iter().copied().fold(f64::INFINITY, f64::min);
    ConeOutcome {
        inside: min_coefficient > eps,
        degenerate: false,
        min_coefficient,
    }
}

fn validate_query<const D: usize>(q: &Point<D>, centers: &[Point<D>], tol: GeomTolerance) -> Result<[[f64; D]; D]> {
    check_len(D, centers.len())?;
    let mut cs = [[0.0; D]; D];
    for (c, p) in cs.iter_mut().zip(centers) {
        if dist2(&q.0, &p.0).sqrt() <= tol.eps_geo {
            return Err(Error::CoincidentPoint);
        }
        *c = p.0;
    }
    Ok(cs)
}

/// Tests whether `e_d` lies in the open cone spanned by `q - x_i`.
///
/// Solves `sum b_i (q - x_i)/|q - x_i| = e_d`; the cone holds iff the system
/// is nonsingular and every `b_i > tol`.
pub fn cone_condition<const D: usize>(
    q: &Point<D>,
    centers: &[Point<D>],
    tol: GeomTolerance,
) -> Result<ConeOutcome> {
    let cs = validate_query(q, centers, tol)?;
    Ok(cone_raw(&q.0, &cs, tol.eps_geo))
}

// ---------------------------------------------------------------------------
// hyperplane falsifier (test oracle)

#[inline]
fn margin<const D: usize>(f: &[f64; D], us: &[[f64; D]; D]) -> f64 {
    let mut m = -f[D - 1];
    for u in us {
        m = m.min(dot(f, u));
    }
    m
}

/// Randomized search for a direction `f` with `<f, e_d> <= 0` and
/// `<f, q - x_i> >= 0` for every i; such an `f` falsifies the hyperplane
/// condition.
///
/// Besides `n_dirs` random directions, the extreme rays of that polyhedral
/// cone (one per choice of `D - 1` active constraints) are tried, so a
/// falsifier is found whenever the cone is nontrivial. A `false` verdict is
/// certain up to `tol`; `true` means no falsifier was found.
pub fn hyperplane_falsifier<const D: usize, R: Rng + ?Sized>(
    q: &Point<D>,
    centers: &[Point<D>],
    n_dirs: usize,
    rng: &mut R,
    tol: GeomTolerance,
) -> Result<FalsifierOutcome<D>> {
    if n_dirs == 0 {
        return Err(invalid("n_dirs must be at least 1"));
    }
    let cs = validate_query(q, centers, tol)?;
    let mut us = [[0.0; D]; D];
    for (u, x) in us.iter_mut().zip(&cs) {
        *u = sub(&q.0, x);
        normalize(u);
    }
    let eps = tol.eps_geo;
    let mut witness: Option<[f64; D]> = None;
    let mut best_sampled = f64::NEG_INFINITY;
    for _ in 0..n_dirs {
        let mut f = [0.0; D];
        for x in f.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        if f[D - 1] > 0.0 {
            f[D - 1] = -f[D - 1];
        }
        if normalize(&mut f) == 0.0 {
            continue;
        }
        let m = margin(&f, &us);
        if m > best_sampled {
            best_sampled = m;
        }
        if m >= -eps && witness.is_none() {
            witness = Some(f);
        }
    }
    if witness.is_none() {
        // constraint normals: u_1..u_D and -e_D; drop two of the D + 1
        let mut normals = [[0.0; D]; D];
        let mut all = Vec::with_capacity(D + 1);
        all.extend_from_slice(&us);
        let mut down = [0.0; D];
        down[D - 1] = -1.0;
        all.push(down);
        'outer: for a in 0..=D {
            for b in a + 1..=D {
                let mut n = 0;
                for (i, v) in all.iter().enumerate() {
                    if i != a && i != b {
                        normals[n] = *v;
                        n += 1;
                    }
                }
                let Some((qb, _)) = gram_schmidt(&normals[..n], 1e-12) else {
                    continue;
                };
                let f = complement(&qb, n);
                for sign in [1.0, -1.0] {
                    let mut g = f;
                    for x in g.iter_mut() {
                        *x *= sign;
                    }
                    if margin(&g, &us) >= -eps {
                        witness = Some(g);
                        break 'outer;
                    }
                }
            }
        }
    }
    Ok(FalsifierOutcome {
        holds: witness.is_none(),
        witness: witness.map(Point),
        best_sampled_margin: best_sampled,
    })
}

// ---------------------------------------------------------------------------
// h and depth

/// `h` for `D` balls of radii `r * mark`, evaluated via the cone test at the
/// upper intersection point. No validation.
pub(crate) fn h_raw<const D: usize>(centers: &[[f64; D]], radii: &[f64], eps: f64) -> Indicator {
    match intersect_raw(centers, radii, eps) {
        IntersectionResult::Empty => Indicator::Zero,
        IntersectionResult::Degenerate(_) => Indicator::Degenerate,
        IntersectionResult::Pair { upper, .. } => {
            let c = cone_raw(&upper.0, centers, eps);
            if c.degenerate {
                Indicator::Degenerate
            } else if c.inside {
                Indicator::One
            } else {
                Indicator::Zero
            }
        }
    }
}

/// Local-minimum indicator of the set outside the open balls
/// `B(x_i, r a_i)^o` at the upper intersection point of their boundaries.
pub fn h_indicator<const D: usize>(tuple: &[MarkedPoint<D>], r: f64, tol: GeomTolerance) -> Result<Indicator> {
    check_len(D, tuple.len())?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    let mut cs = [[0.0; D]; D];
    let mut radii = [0.0; D];
    for (i, p) in tuple.iter().enumerate() {
        if !(p.mark > 0.0 && p.mark.is_finite()) {
            return Err(invalid(format!("marks must be positive, got {}", p.mark)));
        }
        for other in &tuple[..i] {
            if other.center == p.center {
                return Err(invalid("tuple contains repeated centers"));
            }
        }
        cs[i] = p.center.0;
        radii[i] = r * p.mark;
    }
    Ok(h_raw(&cs, &radii[..], tol.eps_geo))
}

/// Number of closed balls `B(x, r a)` containing `q`.
pub fn point_depth<const D: usize>(q: &Point<D>, points: &[MarkedPoint<D>], r: f64) -> usize {
    points
        .iter()
        .filter(|p| {
            let rho = r * p.mark;
            q.dist2(&p.center) <= rho * rho
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> GeomTolerance {
        GeomTolerance::default()
    }

    fn pair<const D: usize>(r: IntersectionResult<D>) -> (Point<D>, Point<D>) {
        match r {
            IntersectionResult::Pair { lower, upper } => (lower, upper),
            other => panic!("expected a pair, got {other:?}"),
        }
    }

    #[test]
    fn unit_circles_meet_symmetrically() {
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([1.0, 0.0])], &[1.0, 1.0], tol()).unwrap();
        let (p, q) = pair(r);
        let h = 3f64.sqrt() / 2.0;
        assert_abs_diff_eq!(p.0[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.0[1], -h, epsilon = 1e-12);
        assert_abs_diff_eq!(q.0[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(q.0[1], h, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_and_nested_circles_are_empty() {
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([3.0, 0.0])], &[1.0, 1.0], tol()).unwrap();
        assert_eq!(r, IntersectionResult::Empty);
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([0.1, 0.0])], &[1.0, 0.2], tol()).unwrap();
        assert_eq!(r, IntersectionResult::Empty);
    }

    #[test]
    fn three_unit_spheres() {
        let c = [Point([0.0, 0.0, 0.0]), Point([1.0, 0.0, 0.0]), Point([0.0, 1.0, 0.0])];
        let (p, q) = pair(sphere_intersection(&c, &[1.0, 1.0, 1.0], tol()).unwrap());
        let z = 0.5f64.sqrt();
        for (got, want) in p.0.iter().zip([0.5, 0.5, -z]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        for (got, want) in q.0.iter().zip([0.5, 0.5, z]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn tangency_and_singular_are_degenerate() {
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([2.0, 0.0])], &[1.0, 1.0], tol()).unwrap();
        match r {
            IntersectionResult::Degenerate(Degeneracy::Tangent(p)) => {
                assert_abs_diff_eq!(p.0[0], 1.0, epsilon = 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([0.0, 0.0])], &[1.0, 1.0], tol()).unwrap();
        assert_eq!(r, IntersectionResult::Degenerate(Degeneracy::Singular));
        // collinear centers in 3D
        let c = [Point([0.0, 0.0, 0.0]), Point([1.0, 0.0, 0.0]), Point([2.0, 0.0, 0.0])];
        let r = sphere_intersection(&c, &[1.5, 1.5, 1.5], tol()).unwrap();
        assert_eq!(r, IntersectionResult::Degenerate(Degeneracy::Singular));
    }

    #[test]
    fn equal_heights_break_ties_lexicographically() {
        // circles centered on a vertical line meet at equal heights
        let r = sphere_intersection(&[Point([0.0, 0.0]), Point([0.0, -1.0])], &[1.0, 1.0], tol()).unwrap();
        let (p, q) = pair(r);
        assert_eq!(p.0[1], q.0[1]);
        assert!(p.0[0] < q.0[0]);
        assert_abs_diff_eq!(q.0[0], 3f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn intersection_input_errors() {
        let e = sphere_intersection(&[Point([0.0, 0.0])], &[1.0], tol()).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { expected: 2, got: 1 }));
        let e = sphere_intersection(&[Point([0.0, 0.0]), Point([1.0, 0.0])], &[1.0, -1.0], tol()).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter(_)));
    }

    #[test]
    fn cone_examples() {
        let s3 = 3f64.sqrt();
        let c = [Point([0.0, 0.0]), Point([1.0, 0.0])];
        let out = cone_condition(&Point([0.5, s3 / 2.0]), &c, tol()).unwrap();
        assert!(out.inside && !out.degenerate);
        // with unit vectors u_i = q - x_i the coefficients are 1/sqrt(3)
        assert_abs_diff_eq!(out.min_coefficient, 1.0 / s3, epsilon = 1e-12);

        let out = cone_condition(&Point([0.5, -s3 / 2.0]), &c, tol()).unwrap();
        assert!(!out.inside);

        let c = [Point([0.0, 0.0]), Point([0.0, -1.0])];
        let out = cone_condition(&Point([s3 / 2.0, -0.5]), &c, tol()).unwrap();
        assert!(!out.inside && !out.degenerate);
    }

    #[test]
    fn cone_singular_is_flagged() {
        // q - x_1 and q - x_2 parallel
        let c = [Point([0.0, 0.0]), Point([0.0, 1.0])];
        let out = cone_condition(&Point([0.0, 2.0]), &c, tol()).unwrap();
        assert!(out.degenerate && !out.inside);
        let e = cone_condition(&Point([0.0, 0.0]), &c, tol()).unwrap_err();
        assert!(matches!(e, Error::CoincidentPoint));
    }

    #[test]
    fn falsifier_examples() {
        let s3 = 3f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let c = [Point([0.0, 0.0]), Point([1.0, 0.0])];
        let out = hyperplane_falsifier(&Point([0.5, s3 / 2.0]), &c, 10_000, &mut rng, tol()).unwrap();
        assert!(out.holds);
        assert!(out.best_sampled_margin < 0.0);

        let c = [Point([0.0, 0.0]), Point([0.0, -1.0])];
        let q = Point([s3 / 2.0, -0.5]);
        let out = hyperplane_falsifier(&q, &c, 10_000, &mut rng, tol()).unwrap();
        assert!(!out.holds);
        let f = out.witness.unwrap();
        assert!(f.0[1] <= 0.0);
        for x in &c {
            let u = sub(&q.0, &x.0);
            assert!(dot(&f.0, &u) >= -1e-9);
        }
        // f = (1, 0) is a falsifier, found by the extreme-ray search even with one sample
        let out = hyperplane_falsifier(&q, &c, 1, &mut rng, tol()).unwrap();
        assert!(!out.holds);
    }

    #[test]
    fn falsifier_input_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = hyperplane_falsifier(&Point([0.0, 1.0]), &[Point([0.0, 0.0])], 10, &mut rng, tol()).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { .. }));
        let c = [Point([0.0, 0.0]), Point([1.0, 0.0])];
        assert!(hyperplane_falsifier(&Point([0.0, 1.0]), &c, 0, &mut rng, tol()).is_err());
    }

    #[test]
    fn h_examples() {
        let m = |x: f64, y: f64| MarkedPoint::new([x, y], 1.0);
        assert_eq!(h_indicator(&[m(0.0, 0.0), m(1.0, 0.0)], 1.0, tol()).unwrap(), Indicator::One);
        assert_eq!(h_indicator(&[m(0.0, 0.0), m(3.0, 0.0)], 1.0, tol()).unwrap(), Indicator::Zero);
        assert_eq!(h_indicator(&[m(0.0, 0.0), m(0.0, -1.0)], 1.0, tol()).unwrap(), Indicator::Zero);
        assert_eq!(h_indicator(&[m(0.0, 0.0), m(2.0, 0.0)], 1.0, tol()).unwrap(), Indicator::Degenerate);
        assert!(h_indicator(&[m(0.0, 0.0)], 1.0, tol()).is_err());
        assert!(h_indicator(&[m(0.0, 0.0), m(0.0, 0.0)], 1.0, tol()).is_err());
    }

    #[test]
    fn depth_uses_closed_balls() {
        let pts = [MarkedPoint::new([0.0, 0.0], 1.0)];
        assert_eq!(point_depth(&Point([0.0, 0.0]), &pts, 1.0), 1);
        assert_eq!(point_depth(&Point([2.0, 0.0]), &pts, 1.0), 0);
        assert_eq!(point_depth(&Point([1.0, 0.0]), &pts, 1.0), 1);
    }
}
