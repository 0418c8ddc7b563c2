//! Points of R^{2n} and R^{2n} x S^1, axis-aligned boxes, and uniform grids.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// A point of R^{2n} with coordinates ordered `(x_1..x_n, y_1..y_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EuclideanPoint(Vec<f64>);

impl EuclideanPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 2 != 0 {
            return domain(format!(
                "point needs an even, non-zero number of coordinates, got {}",
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return domain("point coordinates must be finite");
        }
        Ok(Self(coords))
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![0.0; 2 * n.max(1)])
    }

    /// Half the ambient dimension.
    pub fn n(&self) -> usize {
        self.0.len() / 2
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn x(&self) -> &[f64] {
        &self.0[..self.n()]
    }

    pub fn y(&self) -> &[f64] {
        &self.0[self.n()..]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Self) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    // Only for coordinates already known to be valid.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.len() % 2 == 0 && !coords.is_empty());
        Self(coords)
    }
}

impl TryFrom<Vec<f64>> for EuclideanPoint {
    type Error = crate::error::Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EuclideanPoint> for Vec<f64> {
    fn from(p: EuclideanPoint) -> Self {
        p.0
    }
}

/// A point of R^{2n} x S^1 with the circle coordinate stored in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub base: EuclideanPoint,
    fiber: f64,
}

impl CylinderPoint {
    pub fn new(base: EuclideanPoint, z: f64) -> Self {
        Self { base, fiber: wrap_unit(z) }
    }

    pub fn fiber(&self) -> f64 {
        self.fiber
    }
}

/// Reduce a real number to its representative in `[0, 1)`.
pub fn wrap_unit(z: f64) -> f64 {
    let w = z.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Closed axis-aligned box; `None` bounds encode the empty box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    dim: usize,
    bounds: Option<(Vec<f64>, Vec<f64>)>,
}

impl SupportBox {
    pub fn empty(dim: usize) -> Self {
        Self { dim, bounds: None }
    }

    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return domain("box bounds must have equal, non-zero length");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return domain("box needs finite bounds with lo < hi on every axis");
        }
        Ok(Self { dim: lo.len(), bounds: Some((lo, hi)) })
    }

    /// Cube `center ± half_width` on every axis.
    pub fn cube(center: &[f64], half_width: f64) -> Result<Self> {
        Self::new(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_none()
    }

    pub fn lo(&self) -> Option<&[f64]> {
        self.bounds.as_ref().map(|(lo, _)| lo.as_slice())
    }

    pub fn hi(&self) -> Option<&[f64]> {
        self.bounds.as_ref().map(|(_, hi)| hi.as_slice())
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match &self.bounds {
            None => false,
            Some((lo, hi)) => p.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *a <= *x && *x <= *b),
        }
    }

    pub fn contains_open(&self, p: &[f64]) -> bool {
        match &self.bounds {
            None => false,
            Some((lo, hi)) => p.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| *a < *x && *x < *b),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        match (&self.bounds, &other.bounds) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some((l1, h1)), Some((l2, h2))) => Self {
                dim: self.dim,
                bounds: Some((
                    l1.iter().zip(l2).map(|(a, b)| a.min(*b)).collect(),
                    h1.iter().zip(h2).map(|(a, b)| a.max(*b)).collect(),
                )),
            },
        }
    }

    /// Clamp `p` into the box in place.
    pub fn clamp(&self, p: &mut [f64]) {
        if let Some((lo, hi)) = &self.bounds {
            for (x, (a, b)) in p.iter_mut().zip(lo.iter().zip(hi)) {
                *x = x.clamp(*a, *b);
            }
        }
    }

    /// A point guaranteed to lie outside the box (used to witness the exterior level).
    pub fn exterior_point(&self) -> Vec<f64> {
        match &self.bounds {
            None => vec![0.0; self.dim],
            Some((_, hi)) => hi.iter().map(|h| h + 1.0).collect(),
        }
    }
}

/// Uniform tensor grid with `res` nodes per axis, endpoints included.
#[derive(Debug, Clone)]
pub struct Grid {
    lo: Vec<f64>,
    step: Vec<f64>,
    res: usize,
}

impl Grid {
    pub fn new(bx: &SupportBox, res: usize) -> Option<Self> {
        let (lo, hi) = (bx.lo()?, bx.hi()?);
        let res = res.max(2);
        let step = lo.iter().zip(hi).map(|(a, b)| (b - a) / (res - 1) as f64).collect();
        Some(Self { lo: lo.to_vec(), step, res })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn len(&self) -> usize {
        self.res.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest per-axis spacing.
    pub fn spacing(&self) -> f64 {
        self.step.iter().cloned().fold(0.0, f64::max)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for slot in out.iter_mut() {
            *slot = idx % self.res;
            idx /= self.res;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().rev().fold(0, |acc, i| acc * self.res + i)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(self.lo.iter().zip(&self.step))
            .map(|(i, (lo, h))| lo + h * *i as f64)
            .collect()
    }

    /// Flat indices of the 3^d - 1 grid neighbours that exist.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let base = self.multi_index(idx);
        let d = self.dim();
        let mut out = Vec::with_capacity(3usize.pow(d as u32));
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut m = base.clone();
            let mut valid = true;
            let mut all_zero = true;
            for slot in m.iter_mut() {
                let off = (c % 3) as isize - 1;
                c /= 3;
                if off != 0 {
                    all_zero = false;
                }
                let v = *slot as isize + off;
                if v < 0 || v >= self.res as isize {
                    valid = false;
                    break;
                }
                *slot = v as usize;
            }
            if valid && !all_zero {
                out.push(self.flat_index(&m));
            }
        }
        out
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Derivative-free compass search maximizing `f` inside `bx`, starting at
/// `x0` with initial step `step0`; stops once the step drops below `min_step`.
pub fn compass_maximize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step0: f64,
    min_step: f64,
    bx: &SupportBox,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = step0;
    let mut trial = x.clone();
    let mut evals = 0usize;
    while step > min_step && evals < 200_000 {
        let mut improved = false;
        for axis in 0..x.len() {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[axis] += sign * step;
                bx.clamp(&mut trial);
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    fx = ft;
                    x.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_validation() {
        assert!(EuclideanPoint::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(EuclideanPoint::new(vec![]).is_err());
        assert!(EuclideanPoint::new(vec![f64::NAN, 0.0]).is_err());
        let p = EuclideanPoint::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.x(), &[1.0, 2.0]);
        assert_eq!(p.y(), &[3.0, 4.0]);
    }

    #[test]
    fn fiber_wraps_mod_one() {
        let q = CylinderPoint::new(EuclideanPoint::origin(1), 2.25);
        assert!((q.fiber() - 0.25).abs() < 1e-15);
        let q = CylinderPoint::new(EuclideanPoint::origin(1), -0.25);
        assert!((q.fiber() - 0.75).abs() < 1e-15);
        assert!(wrap_unit(-1e-18) < 1.0);
    }

    #[test]
    fn grid_indexing_round_trips() {
        let bx = SupportBox::new(vec![-1.0, -2.0], vec![1.0, 2.0]).unwrap();
        let g = Grid::new(&bx, 5).unwrap();
        assert_eq!(g.len(), 25);
        for i in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(i)), i);
        }
        assert_eq!(g.point(0), vec![-1.0, -2.0]);
        assert_eq!(g.point(24), vec![1.0, 2.0]);
        assert_eq!(g.point(12), vec![0.0, 0.0]);
        assert_eq!(g.neighbors(12).len(), 8);
        assert_eq!(g.neighbors(0).len(), 3);
        assert!((g.spacing() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compass_finds_quadratic_peak() {
        let bx = SupportBox::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let (x, fx) = compass_maximize(
            |p| -(p[0] - 0.3).powi(2) - 2.0 * (p[1] + 0.7).powi(2),
            &[1.0, 1.0],
            0.5,
            1e-12,
            &bx,
        );
        assert!((x[0] - 0.3).abs() < 1e-9 && (x[1] + 0.7).abs() < 1e-9);
        assert!(fx.abs() < 1e-16);
    }

    #[test]
    fn box_union_and_membership() {
        let a = SupportBox::cube(&[0.0, 0.0], 1.0).unwrap();
        let b = SupportBox::cube(&[3.0, 0.0], 1.0).unwrap();
        let u = a.union(&b);
        assert!(u.contains(&[2.0, 0.5]));
        assert!(!u.contains_open(&[4.0, 0.0]));
        assert!(SupportBox::empty(2).union(&a) == a);
        assert!(!u.contains(&u.exterior_point()));
    }
}
