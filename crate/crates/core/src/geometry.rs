//! Convex polytopes in halfspace and vertex form, and the workspace model
//! (a convex bounding set minus convex obstacles, with labeled regions).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linsolve::{self, Constraint, LinearProgram, LpError, LpStatus, Relation};

/// Tolerance for membership tests on unit-normalized halfspaces.
pub const GEO_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unbounded support in direction {0:?}")]
    UnboundedSupport(Vec<f64>),
    #[error("polytope has no vertex representation")]
    MissingVertices,
    #[error("empty polytope")]
    EmptyPolytope,
    #[error("unbounded polytope")]
    Unbounded,
    #[error("operation supports only dimension 2, got {0}")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative tube scale {0}")]
    NegativeScale(f64),
    #[error("halfspace with zero normal and offset {0}")]
    DegenerateHalfspace(f64),
    #[error("vertex {index} violates halfspace {halfspace} by {excess:e}")]
    InconsistentRepresentation { index: usize, halfspace: usize, excess: f64 },
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// `normal · x <= offset`, with `|normal| = 1` after ingest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Option<Vec<Vec<f64>>>,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(dim: usize, hs: Vec<Halfspace>) -> Result<Vec<Halfspace>> {
    let mut out = Vec::with_capacity(hs.len());
    for h in hs {
        if h.normal.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, got: h.normal.len() });
        }
        let n = norm(&h.normal);
        if n <= 1e-14 {
            if h.offset >= -GEO_TOL {
                continue;
            }
            return Err(GeometryError::DegenerateHalfspace(h.offset));
        }
        out.push(Halfspace { normal: h.normal.iter().map(|a| a / n).collect(), offset: h.offset / n });
    }
    Ok(out)
}

impl Polytope {
    /// Halfspace form only; normals are unit-normalized.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        Ok(Polytope { dim, halfspaces: normalize(dim, halfspaces)?, vertices: None })
    }

    /// Both representations, checked for consistency (every vertex inside
    /// every halfspace).
    pub fn from_both(dim: usize, halfspaces: Vec<Halfspace>, vertices: Vec<Vec<f64>>) -> Result<Self> {
        let halfspaces = normalize(dim, halfspaces)?;
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: v.len() });
            }
            for (k, h) in halfspaces.iter().enumerate() {
                let excess = h.eval(v);
                if excess > GEO_TOL * (1.0 + h.offset.abs()) {
                    return Err(GeometryError::InconsistentRepresentation { index, halfspace: k, excess });
                }
            }
        }
        if vertices.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        Ok(Polytope { dim, halfspaces, vertices: Some(vertices) })
    }

    /// Planar convex hull of `points` in both representations.
    pub fn from_vertices_2d(points: &[Vec<f64>]) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| p.len() != 2) {
            return Err(GeometryError::UnsupportedDimension(p.len()));
        }
        if points.is_empty() {
            return Err(GeometryError::EmptyPolytope);
        }
        let hull = convex_hull_2d(points);
        let halfspaces = if hull.len() >= 3 {
            (0..hull.len())
                .map(|i| {
                    let p = &hull[i];
                    let q = &hull[(i + 1) % hull.len()];
                    let normal = vec![q[1] - p[1], p[0] - q[0]];
                    let offset = dot(&normal, p);
                    Halfspace { normal, offset }
                })
                .collect()
        } else {
            // Degenerate hull: a point or a segment. Describe it by its
            // bounding box plus the supporting lines of the segment.
            let mut hs = Vec::new();
            let lo = [hull.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), hull.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min)];
            let hi =
                [hull.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max), hull.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max)];
            for k in 0..2 {
                let mut e = vec![0.0; 2];
                e[k] = 1.0;
                hs.push(Halfspace::new(e.clone(), hi[k]));
                e[k] = -1.0;
                hs.push(Halfspace::new(e, -lo[k]));
            }
            if hull.len() == 2 {
                let (p, q) = (&hull[0], &hull[1]);
                let normal = vec![q[1] - p[1], p[0] - q[0]];
                let offset = dot(&normal, p);
                hs.push(Halfspace::new(normal.clone(), offset));
                hs.push(Halfspace::new(normal.iter().map(|a| -a).collect(), -offset));
            }
            hs
        };
        Polytope::from_both(2, halfspaces, hull)
    }

    /// Axis-aligned box `[lo, hi]` in both representations.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Result<Self> {
        let dim = lo.len();
        if hi.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, got: hi.len() });
        }
        if lo.iter().zip(hi).any(|(l, h)| l > h) {
            return Err(GeometryError::EmptyPolytope);
        }
        let mut hs = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            hs.push(Halfspace::new(e.clone(), hi[k]));
            e[k] = -1.0;
            hs.push(Halfspace::new(e, -lo[k]));
        }
        let mut verts = Vec::with_capacity(1 << dim);
        for mask in 0..(1usize << dim) {
            verts.push((0..dim).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect::<Vec<_>>());
        }
        if dim == 2 {
            // counter-clockwise
            verts = vec![verts[0].clone(), verts[1].clone(), verts[3].clone(), verts[2].clone()];
        }
        verts.dedup();
        Polytope::from_both(dim, hs, verts)
    }

    /// Regular polygon with `sides` vertices on the circle of `radius`
    /// around `center`, first vertex on the positive x-axis.
    pub fn regular_polygon(center: &[f64], radius: f64, sides: usize) -> Result<Self> {
        if center.len() != 2 {
            return Err(GeometryError::UnsupportedDimension(center.len()));
        }
        let pts: Vec<Vec<f64>> = (0..sides.max(3))
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / sides.max(3) as f64;
                vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect();
        Polytope::from_vertices_2d(&pts)
    }

    pub fn singleton(point: &[f64]) -> Result<Self> {
        Polytope::boxed(point, point)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        self.vertices.as_deref()
    }

    pub fn require_vertices(&self) -> Result<&[Vec<f64>]> {
        self.vertices.as_deref().ok_or(GeometryError::MissingVertices)
    }

    /// Adds a vertex list: computed for planar sets, otherwise an error.
    pub fn with_vertices(mut self) -> Result<Self> {
        if self.vertices.is_none() {
            let v = vertices_2d(&self)?;
            self.vertices = Some(v);
        }
        Ok(self)
    }

    /// `max_{x∈P} d·x`.
    pub fn support(&self, d: &[f64]) -> Result<f64> {
        if let Some(vs) = &self.vertices {
            return Ok(vs.iter().map(|v| dot(v, d)).fold(f64::NEG_INFINITY, f64::max));
        }
        let mut lp = LinearProgram::new(self.dim);
        for k in 0..self.dim {
            lp.set_free(k);
        }
        lp.set_objective(d.to_vec());
        for h in &self.halfspaces {
            lp.add_le(h.normal.clone(), h.offset);
        }
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.objective),
            LpStatus::Unbounded => Err(GeometryError::UnboundedSupport(d.to_vec())),
            LpStatus::Infeasible => Err(GeometryError::EmptyPolytope),
        }
    }

    /// `a·x <= b + tol` for every halfspace.
    pub fn contains_point(&self, x: &[f64], tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.eval(x) <= tol)
    }

    /// Smallest halfspace slack `b - a·x` (negative outside).
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.halfspaces.iter().map(|h| -h.eval(x)).fold(f64::INFINITY, f64::min)
    }

    /// Whether the halfspace system has a solution.
    pub fn is_empty(&self) -> Result<bool> {
        let rows: Vec<Constraint> = self.rows();
        Ok(linsolve::feasible_point(self.dim, &rows, &vec![(f64::NEG_INFINITY, f64::INFINITY); self.dim])?.is_none())
    }

    fn rows(&self) -> Vec<Constraint> {
        self.halfspaces.iter().map(|h| Constraint { coeffs: h.normal.clone(), relation: Relation::Le, rhs: h.offset }).collect()
    }

    /// `x + P`, both representations.
    pub fn translate(&self, x: &[f64]) -> Polytope {
        Polytope {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace { normal: h.normal.clone(), offset: h.offset + dot(&h.normal, x) })
                .collect(),
            vertices: self.vertices.as_ref().map(|vs| vs.iter().map(|v| v.iter().zip(x).map(|(a, b)| a + b).collect()).collect()),
        }
    }

    /// Componentwise bounds of the set.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut lo = vec![0.0; self.dim];
        let mut hi = vec![0.0; self.dim];
        for k in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[k] = 1.0;
            hi[k] = self.support(&e)?;
            e[k] = -1.0;
            lo[k] = -self.support(&e)?;
        }
        Ok((lo, hi))
    }

    /// Euclidean diameter of the bounding box.
    pub fn box_diameter(&self) -> Result<f64> {
        let (lo, hi) = self.bounding_box()?;
        Ok(lo.iter().zip(&hi).map(|(l, h)| (h - l) * (h - l)).sum::<f64>().sqrt())
    }
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-12 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-12 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `inner ⊆ outer`: every vertex of `inner` satisfies every halfspace of
/// `outer`.
pub fn contains_polytope(inner: &Polytope, outer: &Polytope) -> Result<bool> {
    let vs = inner.require_vertices()?;
    Ok(vs.iter().all(|v| outer.contains_point(v, GEO_TOL)))
}

/// Closed-set intersection test via phase 1 on the joint system.
pub fn intersects(p: &Polytope, q: &Polytope) -> Result<bool> {
    if p.dim != q.dim {
        return Err(GeometryError::DimensionMismatch { expected: p.dim, got: q.dim });
    }
    let mut rows = p.rows();
    rows.extend(q.rows());
    let free = vec![(f64::NEG_INFINITY, f64::INFINITY); p.dim];
    Ok(linsolve::feasible_point(p.dim, &rows, &free)?.is_some())
}

/// Center and radius of the largest inscribed Euclidean ball.
pub fn chebyshev_center(p: &Polytope) -> Result<(Vec<f64>, f64)> {
    let n = p.dim;
    let mut lp = LinearProgram::new(n + 1);
    for k in 0..n {
        lp.set_free(k);
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    lp.set_objective(c);
    for h in &p.halfspaces {
        let mut row = h.normal.clone();
        row.push(norm(&h.normal));
        lp.add_le(row, h.offset);
    }
    let sol = lp.solve()?;
    match sol.status {
        LpStatus::Optimal => {
            let r = sol.point[n];
            Ok((sol.point[..n].to_vec(), r))
        }
        LpStatus::Infeasible => Err(GeometryError::EmptyPolytope),
        LpStatus::Unbounded => Err(GeometryError::Unbounded),
    }
}

/// Pontryagin difference `P ⊖ S = {(a, b - h_S(a))}`. The result may be
/// empty; check with [`Polytope::is_empty`].
pub fn erode_halfspaces(p: &Polytope, s: &Polytope) -> Result<Polytope> {
    let mut hs = Vec::with_capacity(p.halfspaces.len());
    for h in &p.halfspaces {
        hs.push(Halfspace { normal: h.normal.clone(), offset: h.offset - s.support(&h.normal)? });
    }
    Ok(Polytope { dim: p.dim, halfspaces: hs, vertices: None })
}

/// `center ⊕ scale·shape`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeCrossSection {
    pub center: Vec<f64>,
    pub scale: f64,
}

/// Both representations of `center ⊕ scale·shape`.
pub fn section_to_polytope(shape: &Polytope, center: &[f64], scale: f64) -> Result<Polytope> {
    if scale < 0.0 {
        return Err(GeometryError::NegativeScale(scale));
    }
    if center.len() != shape.dim {
        return Err(GeometryError::DimensionMismatch { expected: shape.dim, got: center.len() });
    }
    let zs = shape.require_vertices()?;
    let vertices = zs.iter().map(|z| z.iter().zip(center).map(|(zi, ci)| ci + scale * zi).collect()).collect();
    let halfspaces = shape
        .halfspaces
        .iter()
        .map(|h| Halfspace { normal: h.normal.clone(), offset: dot(&h.normal, center) + scale * h.offset })
        .collect();
    Ok(Polytope { dim: shape.dim, halfspaces, vertices: Some(vertices) })
}

impl TubeCrossSection {
    pub fn to_polytope(&self, shape: &Polytope) -> Result<Polytope> {
        section_to_polytope(shape, &self.center, self.scale)
    }
}

/// Counter-clockwise vertices of a bounded planar halfspace system.
pub fn vertices_2d(p: &Polytope) -> Result<Vec<Vec<f64>>> {
    if p.dim != 2 {
        return Err(GeometryError::UnsupportedDimension(p.dim));
    }
    if p.is_empty()? {
        return Err(GeometryError::EmptyPolytope);
    }
    let unbounded = |d: [f64; 2]| -> Result<bool> {
        let free = Polytope { dim: 2, halfspaces: p.halfspaces.clone(), vertices: None };
        match free.support(&d) {
            Ok(_) => Ok(false),
            Err(GeometryError::UnboundedSupport(_)) => Ok(true),
            Err(e) => Err(e),
        }
    };
    for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]] {
        if unbounded(d)? {
            return Err(GeometryError::Unbounded);
        }
    }
    let hs = &p.halfspaces;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (a, b) = (&hs[i], &hs[j]);
            let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (a.offset * b.normal[1] - a.normal[1] * b.offset) / det;
            let y = (a.normal[0] * b.offset - a.offset * b.normal[0]) / det;
            let v = vec![x, y];
            if p.contains_point(&v, 1e-9) && !pts.iter().any(|q| (q[0] - x).abs() < 1e-9 && (q[1] - y).abs() < 1e-9) {
                pts.push(v);
            }
        }
    }
    if pts.is_empty() {
        return Err(GeometryError::EmptyPolytope);
    }
    let hull = convex_hull_2d(&pts);
    Ok(hull)
}

/// Convex bounding set minus convex obstacles, with disjoint labeled regions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub bounding: Polytope,
    pub obstacles: Vec<Polytope>,
    pub regions: Vec<Polytope>,
    pub region_centers: Vec<Vec<f64>>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorkspaceError {
    #[error("regions {0} and {1} overlap")]
    OverlappingRegions(usize, usize),
    #[error("region {0} is not inside the bounding set")]
    RegionOutside(usize),
    #[error("obstacle {0} is not inside the bounding set")]
    ObstacleOutside(usize),
    #[error("region {0} intersects obstacle {1}")]
    RegionInObstacle(usize, usize),
    #[error("{0} has dimension {1}, expected {2}")]
    Dimension(String, usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl Workspace {
    /// Validates the layout and computes vertex lists (planar case) and
    /// Chebyshev centers of the regions.
    pub fn new(bounding: Polytope, obstacles: Vec<Polytope>, regions: Vec<Polytope>) -> std::result::Result<Self, WorkspaceError> {
        let n = bounding.dim();
        let fill = |p: Polytope| -> Result<Polytope> {
            if p.vertices().is_none() && p.dim() == 2 {
                p.with_vertices()
            } else {
                Ok(p)
            }
        };
        let bounding = fill(bounding)?;
        let mut obs = Vec::new();
        for (k, o) in obstacles.into_iter().enumerate() {
            if o.dim() != n {
                return Err(WorkspaceError::Dimension(format!("obstacle {k}"), o.dim(), n));
            }
            let o = fill(o)?;
            if !contains_polytope(&o, &bounding)? {
                return Err(WorkspaceError::ObstacleOutside(k));
            }
            obs.push(o);
        }
        let mut regs = Vec::new();
        for (k, r) in regions.into_iter().enumerate() {
            if r.dim() != n {
                return Err(WorkspaceError::Dimension(format!("region {k}"), r.dim(), n));
            }
            let r = fill(r)?;
            if !contains_polytope(&r, &bounding)? {
                return Err(WorkspaceError::RegionOutside(k));
            }
            for (m, o) in obs.iter().enumerate() {
                if intersects(&r, o)? {
                    return Err(WorkspaceError::RegionInObstacle(k, m));
                }
            }
            regs.push(r);
        }
        for i in 0..regs.len() {
            for j in i + 1..regs.len() {
                if intersects(&regs[i], &regs[j])? {
                    return Err(WorkspaceError::OverlappingRegions(i, j));
                }
            }
        }
        let region_centers = regs.iter().map(|r| chebyshev_center(r).map(|c| c.0)).collect::<Result<Vec<_>>>()?;
        Ok(Workspace { bounding, obstacles: obs, regions: regs, region_centers })
    }

    pub fn dim(&self) -> usize {
        self.bounding.dim()
    }

    /// Inside the bounding set and outside every (closed) obstacle.
    pub fn in_free_space(&self, x: &[f64]) -> bool {
        self.bounding.contains_point(x, GEO_TOL) && !self.obstacles.iter().any(|o| o.contains_point(x, -GEO_TOL))
    }

    /// Index of the region containing `x`, if any.
    pub fn region_of(&self, x: &[f64]) -> Option<usize> {
        self.regions.iter().position(|r| r.contains_point(x, GEO_TOL))
    }

    /// Membership in `𝒳_ij`: free space minus every region other than `i`
    /// and `j`.
    pub fn in_corridor(&self, x: &[f64], i: usize, j: usize) -> bool {
        self.in_free_space(x)
            && !self.obstacles.iter().any(|o| o.contains_point(x, GEO_TOL))
            && self.regions.iter().enumerate().all(|(n, r)| n == i || n == j || !r.contains_point(x, GEO_TOL))
    }

    /// Whether a set (with vertices) lies in `𝒳_ij`.
    pub fn set_in_corridor(&self, p: &Polytope, i: usize, j: usize) -> Result<bool> {
        if !contains_polytope(p, &self.bounding)? {
            return Ok(false);
        }
        for o in &self.obstacles {
            if intersects(p, o)? {
                return Ok(false);
            }
        }
        for (n, r) in self.regions.iter().enumerate() {
            if n != i && n != j && intersects(p, r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polytope {
        Polytope::boxed(&[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn support_examples() {
        let b = Polytope::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(b.support(&[2.0, 1.0]).unwrap(), 3.0);
        assert_eq!(Polytope::singleton(&[0.0, 0.0]).unwrap().support(&[3.0, -2.0]).unwrap(), 0.0);
        let tri = Polytope::from_vertices_2d(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((tri.support(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_by_lp_and_unbounded() {
        let half = Polytope::from_halfspaces(2, vec![Halfspace::new(vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(matches!(half.support(&[0.0, 1.0]), Err(GeometryError::UnboundedSupport(_))));
        let b = Polytope::from_halfspaces(2, Polytope::boxed(&[-1.0, -2.0], &[1.0, 2.0]).unwrap().halfspaces().to_vec()).unwrap();
        assert!((b.support(&[1.0, 1.0]).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn contains_point_examples() {
        let s = unit_square();
        assert!(s.contains_point(&[0.5, 0.5], 1e-6));
        assert!(!s.contains_point(&[1.0001, 0.0], 1e-6));
        assert!(s.contains_point(&[1.0000005, 0.0], 1e-6));
    }

    #[test]
    fn contains_polytope_examples() {
        let s = unit_square();
        assert!(contains_polytope(&s, &Polytope::boxed(&[-1.0, -1.0], &[2.0, 2.0]).unwrap()).unwrap());
        assert!(!contains_polytope(&s, &Polytope::boxed(&[0.0, 0.0], &[0.5, 1.0]).unwrap()).unwrap());
        assert!(contains_polytope(&s, &s).unwrap());
        let h = Polytope::from_halfspaces(2, s.halfspaces().to_vec()).unwrap();
        assert_eq!(contains_polytope(&h, &s), Err(GeometryError::MissingVertices));
    }

    #[test]
    fn intersects_examples() {
        let s = unit_square();
        assert!(!intersects(&s, &Polytope::boxed(&[2.0, 2.0], &[3.0, 3.0]).unwrap()).unwrap());
        assert!(intersects(&s, &Polytope::boxed(&[0.5, 0.5], &[2.0, 2.0]).unwrap()).unwrap());
        assert!(intersects(&s, &Polytope::boxed(&[1.0, 1.0], &[2.0, 2.0]).unwrap()).unwrap());
    }

    #[test]
    fn chebyshev_examples() {
        let (c, r) = chebyshev_center(&unit_square()).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-9 && (c[1] - 0.5).abs() < 1e-9 && (r - 0.5).abs() < 1e-9);
        let r2 = Polytope::boxed(&[-4.5, -4.5], &[-3.5, -3.5]).unwrap();
        let (c, r) = chebyshev_center(&r2).unwrap();
        assert!((c[0] + 4.0).abs() < 1e-9 && (c[1] + 4.0).abs() < 1e-9 && (r - 0.5).abs() < 1e-9);
        let empty = Polytope::boxed(&[0.0], &[1.0]).unwrap();
        let empty = Polytope::from_halfspaces(1, {
            let mut h = empty.halfspaces().to_vec();
            h.push(Halfspace::new(vec![1.0], -1.0));
            h
        })
        .unwrap();
        assert_eq!(chebyshev_center(&empty), Err(GeometryError::EmptyPolytope));
    }

    #[test]
    fn erosion_examples() {
        let p = Polytope::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let w = Polytope::boxed(&[-0.15, -0.15], &[0.15, 0.15]).unwrap();
        let e = erode_halfspaces(&p, &w).unwrap();
        let (lo, hi) = e.bounding_box().unwrap();
        for k in 0..2 {
            assert!((lo[k] + 0.85).abs() < 1e-12 && (hi[k] - 0.85).abs() < 1e-12);
        }
        let same = erode_halfspaces(&p, &Polytope::singleton(&[0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(same.halfspaces(), p.halfspaces());
        let small = Polytope::boxed(&[-0.1, -0.1], &[0.1, 0.1]).unwrap();
        let big = Polytope::boxed(&[-0.2, -0.2], &[0.2, 0.2]).unwrap();
        assert!(erode_halfspaces(&small, &big).unwrap().is_empty().unwrap());
    }

    #[test]
    fn section_examples() {
        let z = Polytope::boxed(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let s = section_to_polytope(&z, &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(s.bounding_box().unwrap(), (vec![-1.0, -1.0], vec![1.0, 1.0]));
        let s = section_to_polytope(&z, &[2.0, 3.0], 0.0).unwrap();
        assert!(s.vertices().unwrap().iter().all(|v| v == &vec![2.0, 3.0]));
        assert!(s.contains_point(&[2.0, 3.0], 0.0) && !s.contains_point(&[2.0, 3.001], 1e-6));
        let s = section_to_polytope(&z, &[1.0, 0.0], 2.0).unwrap();
        assert_eq!(s.bounding_box().unwrap(), (vec![-1.0, -2.0], vec![3.0, 2.0]));
        assert_eq!(section_to_polytope(&z, &[0.0, 0.0], -1.0), Err(GeometryError::NegativeScale(-1.0)));
    }

    #[test]
    fn vertices_2d_examples() {
        let tri = Polytope::from_halfspaces(
            2,
            vec![Halfspace::new(vec![-1.0, 0.0], 0.0), Halfspace::new(vec![0.0, -1.0], 0.0), Halfspace::new(vec![1.0, 1.0], 1.0)],
        )
        .unwrap();
        let v = vertices_2d(&tri).unwrap();
        assert_eq!(v.len(), 3);
        for want in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]] {
            assert!(v.iter().any(|p| (p[0] - want[0]).abs() < 1e-12 && (p[1] - want[1]).abs() < 1e-12));
        }
        let mut hs = unit_square().halfspaces().to_vec();
        hs.push(Halfspace::new(vec![1.0, 0.0], 5.0));
        assert_eq!(vertices_2d(&Polytope::from_halfspaces(2, hs).unwrap()).unwrap().len(), 4);
        let bad = Polytope::from_halfspaces(2, vec![Halfspace::new(vec![1.0, 0.0], -1.0), Halfspace::new(vec![-1.0, 0.0], -1.0)]).unwrap();
        assert!(vertices_2d(&bad).is_err());
        let cube = Polytope::boxed(&[0.0; 3], &[1.0; 3]).unwrap();
        assert_eq!(vertices_2d(&cube), Err(GeometryError::UnsupportedDimension(3)));
    }

    #[test]
    fn workspace_rejects_overlap() {
        let b = Polytope::boxed(&[-5.0, -5.0], &[5.0, 5.0]).unwrap();
        let r1 = Polytope::boxed(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let r2 = Polytope::boxed(&[0.5, 0.5], &[2.0, 2.0]).unwrap();
        assert_eq!(Workspace::new(b, vec![], vec![r1, r2]), Err(WorkspaceError::OverlappingRegions(0, 1)));
    }
}
