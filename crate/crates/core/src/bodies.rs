//! Observation windows: fixed bodies with exact measures and the geometric
//! predicates the samplers need (membership and boundary crossings).
//!
//! Every body is defined about its own reference origin. Placement is always
//! done by moving the curve, never the body.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure_dim, Error, Result};
use crate::theory::sphere_area;
use crate::vector::{dot, norm, norm_sq, quadratic_roots, trig_roots};

/// Relative discriminant below which a segment/boundary contact is a tangency
/// and produces no crossing.
pub const TANGENCY_TOL: f64 = 1e-12;

/// JSON descriptor for a body, e.g. `{"shape":"annulus","r_in":0.5,"r_out":1.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        radius: f64,
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Box {
        edges: Vec<f64>,
    },
    Annulus {
        r_in: f64,
        r_out: f64,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    SphericalShell {
        r_in: f64,
        r_out: f64,
    },
}

fn default_dimension() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Ball { radius: f64 },
    /// Axis-aligned box centred on the origin.
    Box { half: Vec<f64> },
    Annulus { r_in: f64, r_out: f64 },
    Polygon(Polygon),
    SphericalShell { r_in: f64, r_out: f64 },
}

/// Simple polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<[f64; 2]>,
    area: f64,
    perimeter: f64,
}

impl Polygon {
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(
                "polygon needs at least 3 distinct vertices".into(),
            ));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("polygon vertex is not finite".into()));
        }
        let signed = shoelace(&vertices);
        if signed.abs() <= f64::EPSILON * bbox_scale(&vertices) {
            return Err(Error::InvalidInput("polygon has zero area".into()));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(Error::InvalidInput("polygon is self-intersecting".into()));
        }
        let perimeter = edges(&vertices).map(|(a, b)| seg_len(a, b)).sum();
        Ok(Polygon {
            vertices,
            area: signed.abs(),
            perimeter,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        // Even-odd rule.
        let mut inside = false;
        for (a, b) in edges(&self.vertices) {
            if (a[1] > y) != (b[1] > y) {
                let xc = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if x < xc {
                    inside = !inside;
                }
            }
        }
        inside || self.on_boundary(x, y)
    }

    fn on_boundary(&self, x: f64, y: f64) -> bool {
        edges(&self.vertices).any(|(a, b)| {
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let (px, py) = (x - a[0], y - a[1]);
            let cross = ex * py - ey * px;
            let len2 = ex * ex + ey * ey;
            let along = ex * px + ey * py;
            cross * cross <= 1e-24 * len2 * len2.max(1.0) && along >= 0.0 && along <= len2
        })
    }

    /// Andrew's monotone chain.
    pub fn convex_hull(&self) -> Polygon {
        let mut pts = self.vertices.clone();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        let turn = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
            (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        };
        let mut lower: Vec<[f64; 2]> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<[f64; 2]> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Polygon::new(lower).expect("hull of a valid polygon is a valid polygon")
    }

    fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let o = self.vertices[i];
            let a = self.vertices[(i + 1) % n];
            let b = self.vertices[(i + 2) % n];
            (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]) >= 0.0
        })
    }
}

fn edges(v: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn seg_len(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    0.5 * edges(v).map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum::<f64>()
}

fn bbox_scale(v: &[[f64; 2]]) -> f64 {
    let m = v
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, c| acc.max(c.abs()));
    m * m
}

fn is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    for i in 0..n {
        for j in (i + 1)..n {
            // Adjacent edges share a vertex.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (c, d) = (v[j], v[(j + 1) % n]);
            let d1 = orient(a, b, c);
            let d2 = orient(a, b, d);
            let d3 = orient(c, d, a);
            let d4 = orient(c, d, b);
            if d1 * d2 <= 0.0 && d3 * d4 <= 0.0 {
                return false;
            }
        }
    }
    true
}

/// Exact analytic measures of a body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measures {
    /// V₀ (area F₀ in the plane).
    pub volume: f64,
    /// Boundary measure: perimeter L₀ in 2D, surface area F₀ in 3D.
    pub surface: f64,
    pub euler_char: i32,
    /// Integral of mean curvature M₀; 3D bodies only.
    pub mean_curvature_integral: Option<f64>,
    pub min_curvature_radius: f64,
    pub max_curvature_radius: f64,
}

/// A fixed observation window K₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    dim: usize,
    shape: Shape,
    lo: Vec<f64>,
    hi: Vec<f64>,
    circumradius: f64,
}

impl Body {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
        }
        check_len("radius", radius)?;
        Ok(Self::with_box(
            dim,
            Shape::Ball { radius },
            vec![radius; dim],
            radius,
        ))
    }

    pub fn disk(radius: f64) -> Result<Self> {
        Self::ball(2, radius)
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::ball(3, radius)
    }

    /// Axis-aligned box with the given edge lengths, centred on the origin.
    pub fn cuboid(edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "box needs at least 2 edges, got {}",
                edges.len()
            )));
        }
        for &e in edges {
            check_len("box edge", e)?;
        }
        let half: Vec<f64> = edges.iter().map(|e| 0.5 * e).collect();
        let circ = norm(&half);
        Ok(Self::with_box(
            edges.len(),
            Shape::Box { half: half.clone() },
            half,
            circ,
        ))
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self> {
        check_len("r_in", r_in)?;
        check_len("r_out", r_out)?;
        if r_in >= r_out {
            return Err(Error::InvalidInput(format!(
                "annulus needs r_in < r_out (got {r_in} >= {r_out})"
            )));
        }
        Ok(Self::with_box(
            2,
            Shape::Annulus { r_in, r_out },
            vec![r_out; 2],
            r_out,
        ))
    }

    pub fn spherical_shell(r_in: f64, r_out: f64) -> Result<Self> {
        check_len("r_in", r_in)?;
        check_len("r_out", r_out)?;
        if r_in >= r_out {
            return Err(Error::InvalidInput(format!(
                "spherical shell needs r_in < r_out (got {r_in} >= {r_out})"
            )));
        }
        Ok(Self::with_box(
            3,
            Shape::SphericalShell { r_in, r_out },
            vec![r_out; 3],
            r_out,
        ))
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let poly = Polygon::new(vertices)?;
        let mut lo = vec![f64::INFINITY; 2];
        let mut hi = vec![f64::NEG_INFINITY; 2];
        let mut circ: f64 = 0.0;
        for v in poly.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
            circ = circ.max(v[0].hypot(v[1]));
        }
        Ok(Body {
            dim: 2,
            shape: Shape::Polygon(poly),
            lo,
            hi,
            circumradius: circ,
        })
    }

    pub fn from_spec(spec: &BodySpec) -> Result<Self> {
        match spec {
            BodySpec::Ball { radius, dimension } => Self::ball(*dimension, *radius),
            BodySpec::Box { edges } => Self::cuboid(edges),
            BodySpec::Annulus { r_in, r_out } => Self::annulus(*r_in, *r_out),
            BodySpec::Polygon { vertices } => Self::polygon(vertices.clone()),
            BodySpec::SphericalShell { r_in, r_out } => Self::spherical_shell(*r_in, *r_out),
        }
    }

    pub fn to_spec(&self) -> BodySpec {
        match &self.shape {
            Shape::Ball { radius } => BodySpec::Ball {
                radius: *radius,
                dimension: self.dim,
            },
            Shape::Box { half } => BodySpec::Box {
                edges: half.iter().map(|h| 2.0 * h).collect(),
            },
            Shape::Annulus { r_in, r_out } => BodySpec::Annulus {
                r_in: *r_in,
                r_out: *r_out,
            },
            Shape::Polygon(p) => BodySpec::Polygon {
                vertices: p.vertices.clone(),
            },
            Shape::SphericalShell { r_in, r_out } => BodySpec::SphericalShell {
                r_in: *r_in,
                r_out: *r_out,
            },
        }
    }

    fn with_box(dim: usize, shape: Shape, half: Vec<f64>, circumradius: f64) -> Self {
        Body {
            dim,
            shape,
            lo: half.iter().map(|h| -h).collect(),
            hi: half,
            circumradius,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Radius of the smallest origin-centred ball containing the body.
    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Axis-aligned bounding box as `(lo, hi)`.
    pub fn bounding_box(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => 2.0 * radius,
            Shape::Box { half } => 2.0 * norm(half),
            Shape::Annulus { r_out, .. } | Shape::SphericalShell { r_out, .. } => 2.0 * r_out,
            Shape::Polygon(p) => {
                let v = p.vertices();
                let mut d: f64 = 0.0;
                for i in 0..v.len() {
                    for j in (i + 1)..v.len() {
                        d = d.max(seg_len(v[i], v[j]));
                    }
                }
                d
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.shape {
            Shape::Ball { .. } | Shape::Box { .. } => true,
            Shape::Annulus { .. } | Shape::SphericalShell { .. } => false,
            Shape::Polygon(p) => p.is_convex(),
        }
    }

    pub fn measures(&self) -> Measures {
        let n = self.dim;
        match &self.shape {
            Shape::Ball { radius: r } => {
                let area = sphere_area(n - 1);
                Measures {
                    volume: area / n as f64 * r.powi(n as i32),
                    surface: area * r.powi(n as i32 - 1),
                    euler_char: 1,
                    mean_curvature_integral: (n == 3).then(|| 4.0 * PI * r),
                    min_curvature_radius: *r,
                    max_curvature_radius: *r,
                }
            }
            Shape::Box { half } => {
                let volume: f64 = half.iter().map(|h| 2.0 * h).product();
                // Each pair of opposite facets has measure 2 * volume / edge.
                let surface: f64 = half.iter().map(|h| 2.0 * volume / (2.0 * h)).sum();
                // M = (π/2) Σ edges · (edge multiplicity 4) / 2 for a 3-box: π(a+b+c).
                let mean_curv = (n == 3).then(|| PI * half.iter().map(|h| 2.0 * h).sum::<f64>());
                Measures {
                    volume,
                    surface,
                    euler_char: 1,
                    mean_curvature_integral: mean_curv,
                    min_curvature_radius: 0.0,
                    max_curvature_radius: f64::INFINITY,
                }
            }
            Shape::Annulus { r_in, r_out } => Measures {
                volume: PI * (r_out * r_out - r_in * r_in),
                surface: 2.0 * PI * (r_out + r_in),
                euler_char: 0,
                mean_curvature_integral: None,
                min_curvature_radius: *r_in,
                max_curvature_radius: *r_out,
            },
            Shape::Polygon(p) => Measures {
                volume: p.area,
                surface: p.perimeter,
                euler_char: 1,
                mean_curvature_integral: None,
                min_curvature_radius: 0.0,
                max_curvature_radius: f64::INFINITY,
            },
            Shape::SphericalShell { r_in, r_out } => Measures {
                volume: 4.0 / 3.0 * PI * (r_out.powi(3) - r_in.powi(3)),
                surface: 4.0 * PI * (r_out * r_out + r_in * r_in),
                euler_char: 2,
                // The inner sphere is seen from outside the solid: its mean curvature is negative.
                mean_curvature_integral: Some(4.0 * PI * (r_out - r_in)),
                min_curvature_radius: *r_in,
                max_curvature_radius: *r_out,
            },
        }
    }

    /// Smallest convex superset. Convex bodies return a copy of themselves.
    pub fn convex_hull(&self) -> Body {
        match &self.shape {
            Shape::Ball { .. } | Shape::Box { .. } => self.clone(),
            Shape::Annulus { r_out, .. } => Body::disk(*r_out).expect("valid radius"),
            Shape::SphericalShell { r_out, .. } => Body::sphere(*r_out).expect("valid radius"),
            Shape::Polygon(p) => {
                if p.is_convex() {
                    self.clone()
                } else {
                    Body::polygon(p.convex_hull().vertices).expect("hull is a valid polygon")
                }
            }
        }
    }

    /// The same body dilated by `factor` about its reference origin.
    pub fn scaled(&self, factor: f64) -> Result<Body> {
        check_len("scale factor", factor)?;
        match &self.shape {
            Shape::Ball { radius } => Body::ball(self.dim, radius * factor),
            Shape::Box { half } => {
                Body::cuboid(&half.iter().map(|h| 2.0 * h * factor).collect::<Vec<_>>())
            }
            Shape::Annulus { r_in, r_out } => Body::annulus(r_in * factor, r_out * factor),
            Shape::SphericalShell { r_in, r_out } => {
                Body::spherical_shell(r_in * factor, r_out * factor)
            }
            Shape::Polygon(p) => Body::polygon(
                p.vertices
                    .iter()
                    .map(|v| [v[0] * factor, v[1] * factor])
                    .collect(),
            ),
        }
    }

    /// Closed-region membership.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        ensure_dim(self.dim, point.len(), "contains")?;
        Ok(self.contains_point(point))
    }

    pub(crate) fn contains_point(&self, p: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { radius } => norm_sq(p) <= radius * radius,
            Shape::Box { half } => p.iter().zip(half).all(|(x, h)| x.abs() <= *h),
            Shape::Annulus { r_in, r_out } | Shape::SphericalShell { r_in, r_out } => {
                let r2 = norm_sq(p);
                r2 >= r_in * r_in && r2 <= r_out * r_out
            }
            Shape::Polygon(poly) => poly.contains(p[0], p[1]),
        }
    }

    /// Membership of `p0 + t (p1 - p0)` without materialising the point.
    fn contains_on_segment(&self, p0: &[f64], p1: &[f64], t: f64) -> bool {
        let at = |k: usize| p0[k] + t * (p1[k] - p0[k]);
        match &self.shape {
            Shape::Ball { radius } => {
                (0..self.dim).map(|k| at(k) * at(k)).sum::<f64>() <= radius * radius
            }
            Shape::Box { half } => half.iter().enumerate().all(|(k, h)| at(k).abs() <= *h),
            Shape::Annulus { r_in, r_out } | Shape::SphericalShell { r_in, r_out } => {
                let r2: f64 = (0..self.dim).map(|k| at(k) * at(k)).sum();
                r2 >= r_in * r_in && r2 <= r_out * r_out
            }
            Shape::Polygon(poly) => poly.contains(at(0), at(1)),
        }
    }

    /// Parameters t ∈ (0, 1), strictly increasing, where the open segment
    /// `p0 → p1` crosses the boundary transversally.
    pub fn boundary_crossings(&self, p0: &[f64], p1: &[f64]) -> Result<Vec<f64>> {
        ensure_dim(self.dim, p0.len(), "boundary_crossings")?;
        ensure_dim(self.dim, p1.len(), "boundary_crossings")?;
        if p0 == p1 {
            return Err(Error::Usage("boundary_crossings: p0 == p1".into()));
        }
        let mut scratch = ClipScratch::default();
        self.clip_segment(p0, p1, &mut scratch);
        Ok(scratch.crossings)
    }

    /// Splits the segment `p0 → p1` into inside sub-intervals of `[0, 1]`,
    /// written to `scratch.inside`, and the crossing parameters, written to
    /// `scratch.crossings`.
    pub(crate) fn clip_segment(&self, p0: &[f64], p1: &[f64], scratch: &mut ClipScratch) {
        scratch.clear();
        self.segment_candidates(p0, p1, &mut scratch.candidates);
        let cands = &mut scratch.candidates;
        cands.retain(|t| *t > 0.0 && *t < 1.0);
        cands.sort_by(f64::total_cmp);
        cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

        let mut prev = 0.0;
        let mut prev_inside: Option<bool> = None;
        let mut run_start = 0.0;
        let n = cands.len();
        for i in 0..=n {
            let next = if i < n { cands[i] } else { 1.0 };
            let inside = self.contains_on_segment(p0, p1, 0.5 * (prev + next));
            match prev_inside {
                None => {
                    if inside {
                        run_start = 0.0;
                    }
                }
                Some(was) if was != inside => {
                    scratch.crossings.push(prev);
                    if inside {
                        run_start = prev;
                    } else {
                        scratch.inside.push((run_start, prev));
                    }
                }
                _ => {}
            }
            prev_inside = Some(inside);
            prev = next;
        }
        if prev_inside == Some(true) {
            scratch.inside.push((run_start, 1.0));
        }
    }

    /// Raw candidate parameters where the supporting line meets a boundary
    /// component. Filtering by membership happens in `clip_segment`.
    fn segment_candidates(&self, p0: &[f64], p1: &[f64], out: &mut Vec<f64>) {
        let dim = self.dim;
        let sphere_roots = |r: f64, out: &mut Vec<f64>| {
            let mut a = 0.0;
            let mut b = 0.0;
            let mut c = 0.0;
            for k in 0..dim {
                let d = p1[k] - p0[k];
                a += d * d;
                b += 2.0 * p0[k] * d;
                c += p0[k] * p0[k];
            }
            c -= r * r;
            if let Some((t1, t2)) = quadratic_roots(a, b, c, TANGENCY_TOL) {
                out.push(t1);
                out.push(t2);
            }
        };
        match &self.shape {
            Shape::Ball { radius } => sphere_roots(*radius, out),
            Shape::Annulus { r_in, r_out } | Shape::SphericalShell { r_in, r_out } => {
                sphere_roots(*r_in, out);
                sphere_roots(*r_out, out);
            }
            Shape::Box { half } => {
                // Slab clipping: a convex box meets a line in one interval.
                let mut t_lo = f64::NEG_INFINITY;
                let mut t_hi = f64::INFINITY;
                for (k, h) in half.iter().enumerate() {
                    let d = p1[k] - p0[k];
                    if d == 0.0 {
                        if p0[k].abs() >= *h {
                            return;
                        }
                        continue;
                    }
                    let ta = (-h - p0[k]) / d;
                    let tb = (h - p0[k]) / d;
                    t_lo = t_lo.max(ta.min(tb));
                    t_hi = t_hi.min(ta.max(tb));
                }
                if t_hi - t_lo > 1e-12 * (t_hi.abs() + t_lo.abs()).max(1e-300) {
                    out.push(t_lo);
                    out.push(t_hi);
                }
            }
            Shape::Polygon(poly) => {
                let d = [p1[0] - p0[0], p1[1] - p0[1]];
                for (a, b) in edges(&poly.vertices) {
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let denom = d[0] * e[1] - d[1] * e[0];
                    if denom.abs() <= 1e-14 * (d[0].hypot(d[1]) * e[0].hypot(e[1])) {
                        continue;
                    }
                    let w = [a[0] - p0[0], a[1] - p0[1]];
                    let t = (w[0] * e[1] - w[1] * e[0]) / denom;
                    let u = (w[0] * d[1] - w[1] * d[0]) / denom;
                    if (-1e-12..=1.0 + 1e-12).contains(&u) {
                        out.push(t);
                    }
                }
            }
        }
    }

    /// Angles θ where the circle `center + r (cos θ u + sin θ v)` crosses the
    /// boundary. `u`, `v` must be orthonormal; only 2D and 3D circles exist.
    pub(crate) fn circle_crossings(
        &self,
        center: &[f64],
        u: &[f64],
        v: &[f64],
        r: f64,
        scratch: &mut ClipScratch,
    ) {
        scratch.clear();
        let cands = &mut scratch.candidates;
        let sphere = |rr: f64, out: &mut Vec<f64>| {
            let a = 2.0 * r * dot(center, u);
            let b = 2.0 * r * dot(center, v);
            let c = rr * rr - norm_sq(center) - r * r;
            trig_roots(a, b, c, TANGENCY_TOL, out);
        };
        match &self.shape {
            Shape::Ball { radius } => sphere(*radius, cands),
            Shape::Annulus { r_in, r_out } | Shape::SphericalShell { r_in, r_out } => {
                sphere(*r_in, cands);
                sphere(*r_out, cands);
            }
            Shape::Box { half } => {
                for (k, h) in half.iter().enumerate() {
                    for side in [-h, *h] {
                        trig_roots(r * u[k], r * v[k], side - center[k], TANGENCY_TOL, cands);
                    }
                }
            }
            Shape::Polygon(poly) => {
                for (a, b) in edges(&poly.vertices) {
                    let nrm = [b[1] - a[1], a[0] - b[0]];
                    let off = nrm[0] * a[0] + nrm[1] * a[1];
                    trig_roots(
                        r * (nrm[0] * u[0] + nrm[1] * u[1]),
                        r * (nrm[0] * v[0] + nrm[1] * v[1]),
                        off - (nrm[0] * center[0] + nrm[1] * center[1]),
                        TANGENCY_TOL,
                        cands,
                    );
                }
            }
        }
        cands.sort_by(f64::total_cmp);
        cands.dedup_by(|a, b| (*a - *b).abs() <= 1e-14);

        let mut buf = [0.0_f64; 3];
        let dim = self.dim;
        let mut inside_at = |th: f64| {
            let (s, c) = th.sin_cos();
            for k in 0..dim {
                buf[k] = center[k] + r * (c * u[k] + s * v[k]);
            }
            self.contains_point(&buf[..dim])
        };
        let tau = std::f64::consts::TAU;
        let n = cands.len();
        if n == 0 {
            if inside_at(0.0) {
                scratch.inside.push((0.0, tau));
            }
            return;
        }
        // Arc i runs from cands[i] to cands[i+1] (cyclically).
        let states: Vec<bool> = (0..n)
            .map(|i| {
                let a = cands[i];
                let b = if i + 1 < n { cands[i + 1] } else { cands[0] + tau };
                inside_at(0.5 * (a + b))
            })
            .collect();
        for i in 0..n {
            let before = states[(i + n - 1) % n];
            if before != states[i] {
                scratch.crossings.push(cands[i]);
            }
        }
        if scratch.crossings.is_empty() {
            if states[0] {
                scratch.inside.push((0.0, tau));
            }
            return;
        }
        // Walk arcs starting at a crossing so runs never straddle the seam.
        let start = (0..n).find(|&i| states[(i + n - 1) % n] != states[i]).unwrap();
        let mut run: Option<f64> = None;
        for step in 0..n {
            let i = (start + step) % n;
            let a = cands[i] + if i < start { tau } else { 0.0 };
            let is_cross = states[(i + n - 1) % n] != states[i];
            if is_cross {
                if states[i] {
                    run = Some(a);
                } else if let Some(s) = run.take() {
                    scratch.inside.push((s, a));
                }
            }
        }
        if let Some(s) = run {
            scratch.inside.push((s, cands[start] + tau));
        }
    }
}

/// Reusable buffers for segment and circle clipping.
#[derive(Debug, Default, Clone)]
pub(crate) struct ClipScratch {
    pub candidates: Vec<f64>,
    pub crossings: Vec<f64>,
    pub inside: Vec<(f64, f64)>,
}

impl ClipScratch {
    fn clear(&mut self) {
        self.candidates.clear();
        self.crossings.clear();
        self.inside.clear();
    }
}

fn check_len(what: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "{what} must be positive and finite, got {x}"
        )));
    }
    Ok(())
}
