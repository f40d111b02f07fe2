//! The moving object K₁: segments, Pearson walks, circle loops and ramified trees.
//!
//! Piecewise-linear curves share one representation, [`SegmentSet`]: a flat
//! vertex buffer, an edge list laid out in arc-length order, and per-chunk
//! bounding boxes used to cull edges far from the window.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Pareto, StandardNormal, UnitCircle, UnitSphere};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::theory::MeanLength;
use crate::vector::{dist, dot, norm};

/// Edges per culling chunk.
const CHUNK_EDGES: usize = 16;
/// Chunks per culling group.
const GROUP_CHUNKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Simple open curve, χ₁ = 1.
    Fiber,
    /// Closed curve, χ₁ = 0.
    Loop,
    /// Connected acyclic graph of edges, χ₁ = 1.
    Tree,
}

/// I.i.d. step (or edge) length distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepLengthLaw {
    Constant { length: f64 },
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
    Pareto { x_min: f64, alpha: f64 },
}

impl StepLengthLaw {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "step law parameter {name} must be positive, got {x}"
                )))
            }
        };
        match *self {
            StepLengthLaw::Constant { length } => pos("length", length),
            StepLengthLaw::Exponential { mean } => pos("mean", mean),
            StepLengthLaw::Gamma { shape, scale } => pos("shape", shape).and(pos("scale", scale)),
            StepLengthLaw::Pareto { x_min, alpha } => pos("x_min", x_min).and(pos("alpha", alpha)),
        }
    }

    /// Analytic mean; `+∞` for Pareto with α ≤ 1.
    pub fn mean(&self) -> f64 {
        match *self {
            StepLengthLaw::Constant { length } => length,
            StepLengthLaw::Exponential { mean } => mean,
            StepLengthLaw::Gamma { shape, scale } => shape * scale,
            StepLengthLaw::Pareto { x_min, alpha } => {
                if alpha <= 1.0 {
                    f64::INFINITY
                } else {
                    alpha * x_min / (alpha - 1.0)
                }
            }
        }
    }

    pub(crate) fn sampler(&self) -> Result<StepSampler> {
        self.validate()?;
        let bad = |e: String| Error::InvalidInput(e);
        Ok(match *self {
            StepLengthLaw::Constant { length } => StepSampler::Constant(length),
            StepLengthLaw::Exponential { mean } => {
                StepSampler::Exp(Exp::new(1.0 / mean).map_err(|e| bad(e.to_string()))?)
            }
            StepLengthLaw::Gamma { shape, scale } => {
                StepSampler::Gamma(Gamma::new(shape, scale).map_err(|e| bad(e.to_string()))?)
            }
            StepLengthLaw::Pareto { x_min, alpha } => {
                StepSampler::Pareto(Pareto::new(x_min, alpha).map_err(|e| bad(e.to_string()))?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum StepSampler {
    Constant(f64),
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Pareto(Pareto<f64>),
}

impl StepSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            StepSampler::Constant(c) => *c,
            StepSampler::Exp(d) => d.sample(rng),
            StepSampler::Gamma(d) => d.sample(rng),
            StepSampler::Pareto(d) => d.sample(rng),
        }
    }
}

/// Uniform unit vector in `R^dim`, written to `out`.
pub(crate) fn random_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    match out.len() {
        2 => {
            let v: [f64; 2] = UnitCircle.sample(rng);
            out.copy_from_slice(&v);
        }
        3 => {
            let v: [f64; 3] = UnitSphere.sample(rng);
            out.copy_from_slice(&v);
        }
        _ => loop {
            for x in out.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
            let n = norm(out);
            if n > 1e-12 {
                out.iter_mut().for_each(|x| *x /= n);
                return;
            }
        },
    }
}

fn box_near(lo: &[f64], hi: &[f64], center: &[f64], radius: f64) -> bool {
    let mut d2 = 0.0;
    for k in 0..center.len() {
        let x = center[k];
        let gap = if x < lo[k] {
            lo[k] - x
        } else if x > hi[k] {
            x - hi[k]
        } else {
            0.0
        };
        d2 += gap * gap;
    }
    d2 <= radius * radius
}

/// Straight edges over a shared vertex buffer, stored in arc-length order.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    dim: usize,
    vertices: Vec<f64>,
    edges: Vec<[usize; 2]>,
    offsets: Vec<f64>,
    lengths: Vec<f64>,
    chunk_lo: Vec<f64>,
    chunk_hi: Vec<f64>,
    group_lo: Vec<f64>,
    group_hi: Vec<f64>,
}

impl SegmentSet {
    fn new(dim: usize, vertices: Vec<f64>, edges: Vec<[usize; 2]>) -> Self {
        let mut offsets = Vec::with_capacity(edges.len());
        let mut lengths = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        for e in &edges {
            let l = dist(
                &vertices[e[0] * dim..(e[0] + 1) * dim],
                &vertices[e[1] * dim..(e[1] + 1) * dim],
            );
            offsets.push(acc);
            lengths.push(l);
            acc += l;
        }
        let n_chunks = edges.len().div_ceil(CHUNK_EDGES);
        let mut chunk_lo = vec![f64::INFINITY; n_chunks * dim];
        let mut chunk_hi = vec![f64::NEG_INFINITY; n_chunks * dim];
        for (i, e) in edges.iter().enumerate() {
            let c = i / CHUNK_EDGES;
            for &v in e {
                for k in 0..dim {
                    let x = vertices[v * dim + k];
                    chunk_lo[c * dim + k] = chunk_lo[c * dim + k].min(x);
                    chunk_hi[c * dim + k] = chunk_hi[c * dim + k].max(x);
                }
            }
        }
        let n_groups = n_chunks.div_ceil(GROUP_CHUNKS);
        let mut group_lo = vec![f64::INFINITY; n_groups * dim];
        let mut group_hi = vec![f64::NEG_INFINITY; n_groups * dim];
        for c in 0..n_chunks {
            let g = c / GROUP_CHUNKS;
            for k in 0..dim {
                group_lo[g * dim + k] = group_lo[g * dim + k].min(chunk_lo[c * dim + k]);
                group_hi[g * dim + k] = group_hi[g * dim + k].max(chunk_hi[c * dim + k]);
            }
        }
        SegmentSet {
            dim,
            vertices,
            edges,
            offsets,
            lengths,
            chunk_lo,
            chunk_hi,
            group_lo,
            group_hi,
        }
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Arc-length offset of the start of edge `i`.
    pub fn offset(&self, i: usize) -> f64 {
        self.offsets[i]
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        self.lengths[i]
    }

    pub(crate) fn chunk_count(&self) -> usize {
        self.chunk_lo.len() / self.dim
    }

    pub(crate) fn chunk_edges(&self, c: usize) -> std::ops::Range<usize> {
        c * CHUNK_EDGES..((c + 1) * CHUNK_EDGES).min(self.edges.len())
    }

    pub(crate) fn group_count(&self) -> usize {
        self.group_lo.len() / self.dim
    }

    pub(crate) fn group_chunks(&self, g: usize) -> std::ops::Range<usize> {
        g * GROUP_CHUNKS..((g + 1) * GROUP_CHUNKS).min(self.chunk_count())
    }

    /// Does chunk `c`'s bounding box come within `radius` of `center`?
    pub(crate) fn chunk_near(&self, c: usize, center: &[f64], radius: f64) -> bool {
        let r = c * self.dim..(c + 1) * self.dim;
        box_near(&self.chunk_lo[r.clone()], &self.chunk_hi[r], center, radius)
    }

    pub(crate) fn group_near(&self, g: usize, center: &[f64], radius: f64) -> bool {
        let r = g * self.dim..(g + 1) * self.dim;
        box_near(&self.group_lo[r.clone()], &self.group_hi[r], center, radius)
    }

    /// Axis-aligned bounds of the edge set after rotation by `rot` (row-major),
    /// taken over the finest of vertices, chunk boxes or group boxes that has
    /// at most 64 members. Never smaller than the exact bounds.
    pub(crate) fn rotated_bounds(&self, rot: &[f64], lo: &mut [f64], hi: &mut [f64]) {
        const MAX_BOXES: usize = 64;
        let n = self.dim;
        lo.iter_mut().for_each(|x| *x = f64::INFINITY);
        hi.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
        if self.vertex_count() <= MAX_BOXES {
            for v in self.vertices.chunks(n) {
                for i in 0..n {
                    let x = dot(&rot[i * n..(i + 1) * n], v);
                    lo[i] = lo[i].min(x);
                    hi[i] = hi[i].max(x);
                }
            }
            return;
        }
        let (blo, bhi) = if self.chunk_count() <= MAX_BOXES {
            (&self.chunk_lo, &self.chunk_hi)
        } else {
            (&self.group_lo, &self.group_hi)
        };
        for (a, b) in blo.chunks(n).zip(bhi.chunks(n)) {
            for i in 0..n {
                let row = &rot[i * n..(i + 1) * n];
                let (mut mn, mut mx) = (0.0, 0.0);
                for k in 0..n {
                    let (p, q) = (row[k] * a[k], row[k] * b[k]);
                    mn += p.min(q);
                    mx += p.max(q);
                }
                lo[i] = lo[i].min(mn);
                hi[i] = hi[i].max(mx);
            }
        }
    }

    fn max_vertex_norm(&self) -> f64 {
        self.vertices
            .chunks(self.dim)
            .map(norm)
            .fold(0.0, f64::max)
    }

    fn point_at(&self, s: f64, out: &mut [f64]) {
        let i = self
            .offsets
            .partition_point(|&o| o <= s)
            .saturating_sub(1)
            .min(self.edges.len() - 1);
        let len = self.lengths[i];
        let t = if len > 0.0 {
            ((s - self.offsets[i]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let [a, b] = self.edges[i];
        crate::vector::lerp_into(self.vertex(a), self.vertex(b), t, out);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Open chain; edge `i` joins vertices `i` and `i + 1`.
    Polyline(SegmentSet),
    /// Closed chain; the last edge returns to vertex 0.
    ClosedPolyline(SegmentSet),
    /// Circle of the given radius about the origin, in the plane of the first two axes.
    Circle { radius: f64 },
    /// Edges oriented parent → child in depth-first order from vertex 0.
    Tree(SegmentSet),
}

/// A moving curve K₁ about its own reference origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    dim: usize,
    geometry: Geometry,
    total_length: f64,
    topology: Topology,
    circumradius: f64,
    min_curvature_radius: f64,
}

impl Curve {
    /// Open polyline through `vertices` (flat, stride `dim`).
    pub fn polyline(dim: usize, vertices: Vec<f64>) -> Result<Self> {
        check_vertices(dim, &vertices, 2)?;
        let n = vertices.len() / dim;
        let edges = (0..n - 1).map(|i| [i, i + 1]).collect();
        let set = SegmentSet::new(dim, vertices, edges);
        let min_curv = if set.edge_count() == 1 { f64::INFINITY } else { 0.0 };
        Ok(Self::from_set(Geometry::Polyline(set), Topology::Fiber, min_curv))
    }

    /// Closed polyline; the first vertex must be repeated at the end.
    pub fn closed_polyline(dim: usize, vertices: Vec<f64>) -> Result<Self> {
        check_vertices(dim, &vertices, 4)?;
        let n = vertices.len() / dim;
        if vertices[..dim] != vertices[(n - 1) * dim..] {
            return Err(Error::InvalidInput(
                "closed polyline: first vertex must equal last vertex".into(),
            ));
        }
        let mut vertices = vertices;
        vertices.truncate((n - 1) * dim);
        let m = n - 1;
        let edges = (0..m).map(|i| [i, (i + 1) % m]).collect();
        let set = SegmentSet::new(dim, vertices, edges);
        Ok(Self::from_set(Geometry::ClosedPolyline(set), Topology::Loop, 0.0))
    }

    /// Tree over `vertices` with the given undirected edges. Must be connected and acyclic.
    pub fn tree(dim: usize, vertices: Vec<f64>, edges: &[[usize; 2]]) -> Result<Self> {
        check_vertices(dim, &vertices, 2)?;
        let n = vertices.len() / dim;
        if edges.len() + 1 != n {
            return Err(Error::InvalidInput(format!(
                "tree needs |E| = |V| - 1 (got {} edges, {n} vertices)",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for &[a, b] in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidInput(format!("bad tree edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        // Depth-first preorder from vertex 0; consecutive edges chain whenever possible.
        let mut seen = vec![false; n];
        let mut ordered = Vec::with_capacity(edges.len());
        let mut stack = vec![(0usize, 0usize)];
        seen[0] = true;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if !seen[w] {
                    seen[w] = true;
                    ordered.push([v, w]);
                    stack.push((w, 0));
                }
            } else {
                stack.pop();
            }
        }
        if ordered.len() != edges.len() {
            return Err(Error::InvalidInput("tree edges are not connected".into()));
        }
        let set = SegmentSet::new(dim, vertices, ordered);
        let min_curv = if set.edge_count() == 1 { f64::INFINITY } else { 0.0 };
        Ok(Self::from_set(Geometry::Tree(set), Topology::Tree, min_curv))
    }

    fn from_set(geometry: Geometry, topology: Topology, min_curvature_radius: f64) -> Self {
        let set = match &geometry {
            Geometry::Polyline(s) | Geometry::ClosedPolyline(s) | Geometry::Tree(s) => s,
            Geometry::Circle { .. } => unreachable!(),
        };
        Curve {
            dim: set.dim,
            total_length: set.lengths.iter().sum(),
            circumradius: set.max_vertex_norm(),
            topology,
            min_curvature_radius,
            geometry,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    pub fn min_curvature_radius(&self) -> f64 {
        self.min_curvature_radius
    }

    /// Edge structure for polyline and tree geometries.
    pub fn segments(&self) -> Option<&SegmentSet> {
        match &self.geometry {
            Geometry::Polyline(s) | Geometry::ClosedPolyline(s) | Geometry::Tree(s) => Some(s),
            Geometry::Circle { .. } => None,
        }
    }

    /// Point at arc length `s`. Tree arc length follows the depth-first edge order.
    pub fn arc_point(&self, s: f64) -> Result<Vec<f64>> {
        let tol = 1e-12 * self.total_length.max(1.0);
        if !(s >= -tol && s <= self.total_length + tol) {
            return Err(Error::Usage(format!(
                "arc_point: s = {s} outside [0, {}]",
                self.total_length
            )));
        }
        let s = s.clamp(0.0, self.total_length);
        let mut out = vec![0.0; self.dim];
        match &self.geometry {
            Geometry::Circle { radius } => {
                let th = s / radius;
                out[0] = radius * th.cos();
                out[1] = radius * th.sin();
            }
            Geometry::Polyline(set) | Geometry::ClosedPolyline(set) | Geometry::Tree(set) => {
                set.point_at(s, &mut out)
            }
        }
        Ok(out)
    }

    /// Same curve dilated by `factor` about its reference origin.
    pub fn scaled(&self, factor: f64) -> Result<Curve> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor {factor}")));
        }
        Ok(match &self.geometry {
            Geometry::Circle { radius } => make_circle_loop(radius * factor, self.dim)?,
            Geometry::Polyline(s) | Geometry::ClosedPolyline(s) | Geometry::Tree(s) => {
                let verts: Vec<f64> = s.vertices.iter().map(|x| x * factor).collect();
                let set = SegmentSet::new(self.dim, verts, s.edges.clone());
                let geometry = match &self.geometry {
                    Geometry::Polyline(_) => Geometry::Polyline(set),
                    Geometry::ClosedPolyline(_) => Geometry::ClosedPolyline(set),
                    _ => Geometry::Tree(set),
                };
                let min_curv = self.min_curvature_radius * factor;
                Self::from_set(geometry, self.topology, min_curv)
            }
        })
    }
}

fn check_vertices(dim: usize, vertices: &[f64], min_count: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
    }
    if !vertices.len().is_multiple_of(dim) || vertices.len() / dim < min_count {
        return Err(Error::InvalidInput(format!(
            "need at least {min_count} vertices of dimension {dim}"
        )));
    }
    if vertices.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("vertex coordinate is not finite".into()));
    }
    Ok(())
}

fn check_positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be positive, got {x}")))
    }
}

/// Straight segment along the first axis, centred on the origin.
pub fn make_segment(length: f64, dim: usize) -> Result<Curve> {
    check_positive("segment length", length)?;
    let mut v = vec![0.0; 2 * dim];
    v[0] = -0.5 * length;
    v[dim] = 0.5 * length;
    Curve::polyline(dim, v)
}

/// Isotropic walk with i.i.d. steps from `law`, the last step clipped so the
/// total length is exactly `target_length`. The origin is the arc-length midpoint.
pub fn make_pearson_walk<R: Rng + ?Sized>(
    rng: &mut R,
    law: &StepLengthLaw,
    target_length: f64,
    dim: usize,
) -> Result<Curve> {
    check_positive("target length", target_length)?;
    let sampler = law.sampler()?;
    let mut verts = vec![0.0; dim];
    let mut dir = vec![0.0; dim];
    let mut walked = 0.0;
    let eps = 1e-12 * target_length;
    loop {
        let remaining = target_length - walked;
        let mut step = sampler.sample(rng);
        let last = step >= remaining - eps;
        if last {
            step = remaining;
        }
        random_direction(rng, &mut dir);
        let base = verts.len() - dim;
        for k in 0..dim {
            let x = verts[base + k] + step * dir[k];
            verts.push(x);
        }
        walked += step;
        if last {
            break;
        }
    }
    let mut curve = Curve::polyline(dim, verts)?;
    let mid = curve.arc_point(0.5 * curve.total_length)?;
    if let Geometry::Polyline(set) = &curve.geometry {
        let shifted: Vec<f64> = set
            .vertices
            .chunks(dim)
            .flat_map(|v| v.iter().zip(&mid).map(|(x, m)| x - m))
            .collect();
        curve = Curve::polyline(dim, shifted)?;
    }
    Ok(curve)
}

/// Circle loop of the given radius (dimension 2 or 3).
pub fn make_circle_loop(radius: f64, dim: usize) -> Result<Curve> {
    check_positive("loop radius", radius)?;
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "circle loops exist in 2 or 3 dimensions, got {dim}"
        )));
    }
    Ok(Curve {
        dim,
        geometry: Geometry::Circle { radius },
        total_length: TAU * radius,
        topology: Topology::Loop,
        circumradius: radius,
        min_curvature_radius: radius,
    })
}

/// Grows a tree by repeatedly attaching an isotropic edge at a point chosen
/// uniformly (by length) on the existing tree. `branch_count` edges are drawn
/// from `law`; splitting an edge at the attachment point adds a vertex and an
/// edge, so V − E = 1 throughout. The origin is the bounding-box centre.
pub fn make_ramified_tree<R: Rng + ?Sized>(
    rng: &mut R,
    branch_count: usize,
    law: &StepLengthLaw,
    dim: usize,
) -> Result<Curve> {
    if branch_count == 0 {
        return Err(Error::InvalidInput("branch_count must be >= 1".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension {dim} < 2")));
    }
    let sampler = law.sampler()?;
    let mut dir = vec![0.0; dim];
    let mut verts = vec![0.0; dim];
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(2 * branch_count);
    let mut lens: Vec<f64> = Vec::with_capacity(2 * branch_count);

    let attach = |verts: &mut Vec<f64>, from: usize, len: f64, dir: &[f64]| -> usize {
        for k in 0..dim {
            let x = verts[from * dim + k] + len * dir[k];
            verts.push(x);
        }
        verts.len() / dim - 1
    };

    let len = sampler.sample(rng);
    random_direction(rng, &mut dir);
    let w = attach(&mut verts, 0, len, &dir);
    edges.push([0, w]);
    lens.push(len);

    for _ in 1..branch_count {
        let total: f64 = lens.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut k = 0;
        while k + 1 < lens.len() && u >= lens[k] {
            u -= lens[k];
            k += 1;
        }
        let frac = (u / lens[k]).clamp(0.0, 1.0);
        let [a, b] = edges[k];
        let mut split = vec![0.0; dim];
        crate::vector::lerp_into(
            &verts[a * dim..(a + 1) * dim],
            &verts[b * dim..(b + 1) * dim],
            frac,
            &mut split,
        );
        verts.extend_from_slice(&split);
        let m = verts.len() / dim - 1;
        let full = lens[k];
        edges[k] = [a, m];
        lens[k] = frac * full;
        edges.push([m, b]);
        lens.push(full - lens[k]);

        let len = sampler.sample(rng);
        random_direction(rng, &mut dir);
        let w = attach(&mut verts, m, len, &dir);
        edges.push([m, w]);
        lens.push(len);
    }

    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for v in verts.chunks(dim) {
        for k in 0..dim {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    for v in verts.chunks_mut(dim) {
        for k in 0..dim {
            v[k] -= 0.5 * (lo[k] + hi[k]);
        }
    }
    Curve::tree(dim, verts, &edges)
}

/// JSON process descriptor, e.g.
/// `{"curve":"pearson","step":{"law":"exponential","mean":0.2},"length":50.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "curve", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessSpec {
    Segment {
        length: f64,
    },
    /// `length` may be omitted for the infinite-curve estimator, which sets it
    /// from the truncation factor.
    Pearson {
        step: StepLengthLaw,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<f64>,
    },
    CircleLoop {
        radius: f64,
    },
    Tree {
        branches: usize,
        edge: StepLengthLaw,
    },
    /// Isotropic uniform random lines (infinite straight curves).
    Line,
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessSpec::Segment { .. } => "segment",
            ProcessSpec::Pearson { .. } => "pearson",
            ProcessSpec::CircleLoop { .. } => "circle_loop",
            ProcessSpec::Tree { .. } => "tree",
            ProcessSpec::Line => "line",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Segment { length } => check_positive("segment length", *length),
            ProcessSpec::Pearson { step, length } => {
                step.validate()?;
                if let Some(l) = length {
                    check_positive("walk length", *l)?;
                }
                Ok(())
            }
            ProcessSpec::CircleLoop { radius } => check_positive("loop radius", *radius),
            ProcessSpec::Tree { branches, edge } => {
                if *branches == 0 {
                    return Err(Error::InvalidInput("tree branches must be >= 1".into()));
                }
                edge.validate()
            }
            ProcessSpec::Line => Ok(()),
        }
    }

    /// Does every draw produce the same curve?
    pub fn is_deterministic(&self) -> bool {
        match self {
            ProcessSpec::Segment { .. } | ProcessSpec::CircleLoop { .. } | ProcessSpec::Line => {
                true
            }
            ProcessSpec::Pearson { step, .. } => matches!(step, StepLengthLaw::Constant { .. }),
            ProcessSpec::Tree { .. } => false,
        }
    }

    /// ⟨s⟩, the expected total length of one curve.
    pub fn mean_length(&self) -> Result<MeanLength> {
        Ok(match self {
            ProcessSpec::Segment { length } => MeanLength::Finite(*length),
            ProcessSpec::Pearson { length, .. } => MeanLength::Finite(length.ok_or_else(|| {
                Error::Config("pearson process needs a length for this estimator".into())
            })?),
            ProcessSpec::CircleLoop { radius } => MeanLength::Finite(TAU * radius),
            ProcessSpec::Tree { branches, edge } => {
                let m = edge.mean() * *branches as f64;
                if m.is_finite() {
                    MeanLength::Finite(m)
                } else {
                    MeanLength::Infinite
                }
            }
            ProcessSpec::Line => MeanLength::Infinite,
        })
    }

    pub fn topology(&self) -> Topology {
        match self {
            ProcessSpec::CircleLoop { .. } => Topology::Loop,
            ProcessSpec::Tree { .. } => Topology::Tree,
            _ => Topology::Fiber,
        }
    }

    /// Draws one curve. Lines have no finite representative here; the
    /// kinematics module samples them directly.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, dim: usize) -> Result<Curve> {
        match self {
            ProcessSpec::Segment { length } => make_segment(*length, dim),
            ProcessSpec::Pearson { step, length } => {
                let l = length.ok_or_else(|| {
                    Error::Config("pearson process needs a length".into())
                })?;
                make_pearson_walk(rng, step, l, dim)
            }
            ProcessSpec::CircleLoop { radius } => make_circle_loop(*radius, dim),
            ProcessSpec::Tree { branches, edge } => make_ramified_tree(rng, *branches, edge, dim),
            ProcessSpec::Line => Err(Error::Usage(
                "line processes are sampled as lines, not drawn as curves".into(),
            )),
        }
    }
}
