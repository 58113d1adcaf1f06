//! Axis-aligned boxes and their faces.

use std::fmt;

use crate::error::{invalid, Result};
use crate::geom::Point;

/// Closed axis-aligned box `[lo_1, hi_1] x ... x [lo_D, hi_D]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<const D: usize> {
    pub lo: [f64; D],
    pub hi: [f64; D],
}

impl<const D: usize> Aabb<D> {
    pub fn new(lo: [f64; D], hi: [f64; D]) -> Result<Self> {
        for i in 0..D {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return Err(invalid(format!(
                    "box side {i} must satisfy lo < hi, got [{}, {}]",
                    lo[i], hi[i]
                )));
            }
        }
        Ok(Aabb { lo, hi })
    }

    pub fn from_slices(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != D || hi.len() != D {
            return Err(crate::Error::DimensionMismatch {
                expected: D,
                got: lo.len().max(hi.len()),
            });
        }
        let mut l = [0.0; D];
        let mut h = [0.0; D];
        l.copy_from_slice(lo);
        h.copy_from_slice(hi);
        Self::new(l, h)
    }

    /// The unit cube `[0, 1]^D`.
    pub fn unit() -> Self {
        Aabb {
            lo: [0.0; D],
            hi: [1.0; D],
        }
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|i| self.hi[i] - self.lo[i]).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..D)
            .map(|i| (self.hi[i] - self.lo[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, p: &[f64; D]) -> bool {
        (0..D).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    /// The box grown by `margin` on every side.
    pub fn expand(&self, margin: f64) -> Self {
        let mut out = *self;
        for i in 0..D {
            out.lo[i] -= margin;
            out.hi[i] += margin;
        }
        out
    }

    /// Euclidean distance from `p` to the box (zero inside).
    pub fn dist2_to(&self, p: &[f64; D]) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            let t = if p[i] < self.lo[i] {
                self.lo[i] - p[i]
            } else if p[i] > self.hi[i] {
                p[i] - self.hi[i]
            } else {
                0.0
            };
            s += t * t;
        }
        s
    }

    /// Largest distance from `p` to a point of the box.
    pub fn max_dist_to(&self, p: &[f64; D]) -> f64 {
        (0..D)
            .map(|i| (p[i] - self.lo[i]).abs().max((p[i] - self.hi[i]).abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn vertices(&self) -> impl Iterator<Item = (FaceId, Point<D>)> + '_ {
        (0..1usize << D).map(move |bits| {
            let mut p = [0.0; D];
            let mut sides = [Side::Free; D];
            for i in 0..D {
                if bits >> i & 1 == 1 {
                    p[i] = self.hi[i];
                    sides[i] = Side::Hi;
                } else {
                    p[i] = self.lo[i];
                    sides[i] = Side::Lo;
                }
            }
            (FaceId::from_sides(&sides), Point(p))
        })
    }

    /// All proper faces with at least one free axis, i.e. every face except
    /// the box interior and the vertices, in a fixed order.
    pub fn faces(&self) -> Vec<Face<D>> {
        let mut out = Vec::new();
        let total = 3usize.pow(D as u32);
        for code in 0..total {
            let mut sides = [Side::Free; D];
            let mut c = code;
            for s in sides.iter_mut() {
                *s = match c % 3 {
                    0 => Side::Free,
                    1 => Side::Lo,
                    _ => Side::Hi,
                };
                c /= 3;
            }
            let free = sides.iter().filter(|s| **s == Side::Free).count();
            if free == 0 || free == D {
                continue;
            }
            let mut fixed = [None; D];
            for i in 0..D {
                fixed[i] = match sides[i] {
                    Side::Free => None,
                    Side::Lo => Some(self.lo[i]),
                    Side::Hi => Some(self.hi[i]),
                };
            }
            out.push(Face {
                id: FaceId::from_sides(&sides),
                fixed,
                free_dims: free,
            });
        }
        // higher-dimensional faces first
        out.sort_by_key(|f| (std::cmp::Reverse(f.free_dims), f.id.0));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Free,
    Lo,
    Hi,
}

/// Face label: one base-3 digit per axis (0 free, 1 at `lo`, 2 at `hi`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId(pub u32);

impl FaceId {
    pub fn from_sides(sides: &[Side]) -> Self {
        let mut code = 0u32;
        for s in sides.iter().rev() {
            code = code * 3
                + match s {
                    Side::Free => 0,
                    Side::Lo => 1,
                    Side::Hi => 2,
                };
        }
        FaceId(code)
    }

    pub fn sides(&self, dim: usize) -> Vec<Side> {
        let mut c = self.0;
        (0..dim)
            .map(|_| {
                let s = match c % 3 {
                    0 => Side::Free,
                    1 => Side::Lo,
                    _ => Side::Hi,
                };
                c /= 3;
                s
            })
            .collect()
    }

    /// Per-axis label such as `*-` (x free, y at its lower bound).
    pub fn label(&self, dim: usize) -> String {
        self.sides(dim)
            .into_iter()
            .map(|s| match s {
                Side::Free => '*',
                Side::Lo => '-',
                Side::Hi => '+',
            })
            .collect()
    }

    pub fn parse(label: &str) -> Option<Self> {
        let sides: Option<Vec<Side>> = label
            .chars()
            .map(|c| match c {
                '*' => Some(Side::Free),
                '-' => Some(Side::Lo),
                '+' => Some(Side::Hi),
                _ => None,
            })
            .collect();
        sides.map(|s| FaceId::from_sides(&s))
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A face of a box: the axes in `fixed` are pinned, the others are free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face<const D: usize> {
    pub id: FaceId,
    pub fixed: [Option<f64>; D],
    pub free_dims: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_faces_and_vertices() {
        let a = Aabb::<2>::unit();
        let faces = a.faces();
        assert_eq!(faces.len(), 4);
        assert!(faces.iter().all(|f| f.free_dims == 1));
        assert_eq!(a.vertices().count(), 4);
        let labels: Vec<String> = faces.iter().map(|f| f.id.label(2)).collect();
        assert!(labels.contains(&"*-".to_string()));
        assert!(labels.contains(&"+*".to_string()));
    }

    #[test]
    fn cube_faces() {
        let a = Aabb::<3>::unit();
        let faces = a.faces();
        assert_eq!(faces.iter().filter(|f| f.free_dims == 2).count(), 6);
        assert_eq!(faces.iter().filter(|f| f.free_dims == 1).count(), 12);
        assert_eq!(faces[0].free_dims, 2);
    }

    #[test]
    fn face_label_round_trip() {
        for code in 0..27 {
            let id = FaceId(code);
            assert_eq!(FaceId::parse(&id.label(3)), Some(id));
        }
    }

    #[test]
    fn rejects_empty_box() {
        assert!(Aabb::new([0.0, 0.0], [1.0, 0.0]).is_err());
        assert!(Aabb::<2>::from_slices(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn distances() {
        let a = Aabb::<2>::unit();
        assert_eq!(a.dist2_to(&[0.5, 0.5]), 0.0);
        assert!((a.dist2_to(&[2.0, 0.5]) - 1.0).abs() < 1e-15);
        assert!((a.max_dist_to(&[0.5, 0.5]) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((a.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }
}
