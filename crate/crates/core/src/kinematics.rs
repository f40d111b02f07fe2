//! Rigid motions under the kinematic density, and the intersection record of
//! a placed curve with a window.
//!
//! A motion `g` acts on curve coordinates as `x ↦ R x + t`. Hitting motions are
//! drawn by rejection: `R` is Haar-uniform on SO(n) and `t` is uniform on the
//! window's bounding box dilated by the curve circumradius, which contains
//! every hitting translation for every rotation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, UnitDisc};
use serde::Serialize;

use crate::bodies::{Body, ClipScratch};
use crate::curves::{make_segment, random_direction, Curve, Geometry, SegmentSet, Topology};
use crate::error::{ensure_dim, Error, Result};
use crate::vector::{dot, norm};

/// Rejections tolerated before giving up on a hitting configuration.
pub const MAX_REJECTIONS: u64 = 10_000_000;
/// Minimum acceptance rate below which sampling is declared degenerate.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    dim: usize,
    /// Row-major `dim × dim` rotation.
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl RigidMotion {
    pub fn identity(dim: usize) -> Self {
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        RigidMotion {
            dim,
            rotation,
            translation: vec![0.0; dim],
        }
    }

    pub fn translation_only(t: &[f64]) -> Self {
        let mut m = Self::identity(t.len());
        m.translation.copy_from_slice(t);
        m
    }

    /// Planar rotation by `angle` followed by translation `t`.
    pub fn planar(angle: f64, t: [f64; 2]) -> Self {
        let (s, c) = angle.sin_cos();
        RigidMotion {
            dim: 2,
            rotation: vec![c, -s, s, c],
            translation: t.to_vec(),
        }
    }

    /// Rotation from a unit quaternion `(w, x, y, z)`; the quaternion is normalised first.
    pub fn from_quaternion(q: [f64; 4], t: [f64; 3]) -> Result<Self> {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput("quaternion has zero norm".into()));
        }
        let mut rotation = vec![0.0; 9];
        quaternion_matrix(q, &mut rotation);
        Ok(RigidMotion {
            dim: 3,
            rotation,
            translation: t.to_vec(),
        })
    }

    /// From an explicit row-major rotation; rejects anything not in SO(n) to 1e-10.
    pub fn from_matrix(dim: usize, rotation: Vec<f64>, translation: Vec<f64>) -> Result<Self> {
        if rotation.len() != dim * dim || translation.len() != dim {
            return Err(Error::InvalidInput("rigid motion: wrong matrix size".into()));
        }
        let m = RigidMotion {
            dim,
            rotation,
            translation,
        };
        if m.orthogonality_defect() > 1e-10 || (m.determinant() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(
                "rigid motion: rotation is not in SO(n)".into(),
            ));
        }
        Ok(m)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub(crate) fn rotation_mut(&mut self) -> &mut [f64] {
        &mut self.rotation
    }

    pub(crate) fn translation_mut(&mut self) -> &mut [f64] {
        &mut self.translation
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// `out = R p + t`
    #[inline]
    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            out[i] = dot(&self.rotation[i * n..(i + 1) * n], p) + self.translation[i];
        }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(p, &mut out);
        out
    }

    /// `out = Rᵀ (p − t)`, i.e. world coordinates back into the curve frame.
    #[inline]
    pub fn inverse_apply_into(&self, p: &[f64], out: &mut [f64]) {
        let n = self.dim;
        out.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let d = p[i] - self.translation[i];
            for j in 0..n {
                out[j] += self.rotation[i * n + j] * d;
            }
        }
    }

    /// Column `j` of the rotation, i.e. the image of the j-th axis.
    fn column_into(&self, j: usize, out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = self.rotation[i * self.dim + j];
        }
    }

    /// max |RᵀR − I|.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let s: f64 = (0..n)
                    .map(|i| self.rotation[i * n + a] * self.rotation[i * n + b])
                    .sum();
                worst = worst.max((s - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    pub fn determinant(&self) -> f64 {
        determinant(self.dim, &self.rotation)
    }

    /// One JSON line for debugging: `{"rot":[[..],..],"t":[..]}`.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            rot: Vec<&'a [f64]>,
            t: &'a [f64],
        }
        let rot = self.rotation.chunks(self.dim).collect();
        serde_json::to_string(&Line {
            rot,
            t: &self.translation,
        })
        .expect("plain floats serialise")
    }
}

fn determinant(n: usize, m: &[f64]) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Haar-uniform rotation in SO(`dim`), row-major.
pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    sample_rotation_into(rng, dim, &mut m);
    m
}

pub(crate) fn sample_rotation_into<R: Rng + ?Sized>(rng: &mut R, dim: usize, m: &mut [f64]) {
    match dim {
        2 => {
            let th = rng.random::<f64>() * std::f64::consts::TAU;
            let (s, c) = th.sin_cos();
            m.copy_from_slice(&[c, -s, s, c]);
        }
        3 => loop {
            let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
            if q.iter().map(|x| x * x).sum::<f64>() > 1e-12 {
                quaternion_matrix(q, m);
                return;
            }
        },
        n => {
            // Gram–Schmidt on Gaussian columns gives Haar on O(n); flipping the
            // first column on the det = −1 coset gives Haar on SO(n).
            'retry: loop {
                let mut cols: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| StandardNormal.sample(rng)).collect())
                    .collect();
                for j in 0..n {
                    for k in 0..j {
                        let p = dot(&cols[j], &cols[k]);
                        let (head, tail) = cols.split_at_mut(j);
                        tail[0].iter_mut().zip(&head[k]).for_each(|(x, y)| *x -= p * y);
                    }
                    let l = norm(&cols[j]);
                    if l < 1e-10 {
                        continue 'retry;
                    }
                    cols[j].iter_mut().for_each(|x| *x /= l);
                }
                for (j, c) in cols.iter().enumerate() {
                    for i in 0..n {
                        m[i * n + j] = c[i];
                    }
                }
                if determinant(n, m) < 0.0 {
                    for i in 0..n {
                        m[i * n] = -m[i * n];
                    }
                }
                return;
            }
        }
    }
}

/// Rotation matrix of the quaternion `q`, normalised on the fly.
fn quaternion_matrix(q: [f64; 4], m: &mut [f64]) {
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|c| c / n);
    m.copy_from_slice(&[
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    ]);
}

/// Region of candidate translations for a curve of a given circumradius.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingWindow {
    lo: Vec<f64>,
    hi: Vec<f64>,
    volume: f64,
}

impl SamplingWindow {
    /// Body bounding box dilated by `curve_radius` on every side.
    pub fn new(body: &Body, curve_radius: f64) -> Self {
        let (lo, hi) = body.bounding_box();
        let mut w = Self::from_bounds(lo, hi);
        w.dilate(curve_radius);
        w
    }

    pub(crate) fn from_bounds(lo: &[f64], hi: &[f64]) -> Self {
        let volume = lo.iter().zip(hi).map(|(a, b)| b - a).product();
        SamplingWindow {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            volume,
        }
    }

    pub(crate) fn dilate(&mut self, by: f64) {
        self.lo.iter_mut().for_each(|x| *x -= by);
        self.hi.iter_mut().for_each(|x| *x += by);
        self.volume = self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product();
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        t.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    /// Haar rotation and uniform translation in the window.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RigidMotion {
        let mut g = RigidMotion::identity(self.lo.len());
        self.sample_into(rng, &mut g);
        g
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, g: &mut RigidMotion) {
        sample_rotation_into(rng, g.dim, &mut g.rotation);
        for (t, (a, b)) in g.translation.iter_mut().zip(self.lo.iter().zip(&self.hi)) {
            *t = a + (b - a) * rng.random::<f64>();
        }
    }
}

/// Intersection of one placed curve with the window.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IntersectionResult {
    /// Total arc length of the curve inside the window.
    pub inside_length: f64,
    /// Maximal inside arc-length intervals. On closed curves a piece through
    /// s = 0 is reported as `(start, end)` with `end > total_length`.
    pub pieces: Vec<(f64, f64)>,
    /// N(K₁ ∩ ∂K₀): transversal boundary crossings.
    pub crossing_count: usize,
    /// Connected components of the inside set. Equals `pieces.len()` for
    /// chains and loops; for trees pieces on different branches may join at
    /// an inside branch point.
    pub components: usize,
    pub fully_inside: bool,
    pub fully_outside: bool,
}

impl IntersectionResult {
    fn clear(&mut self) {
        self.inside_length = 0.0;
        self.pieces.clear();
        self.crossing_count = 0;
        self.components = 0;
        self.fully_inside = false;
        self.fully_outside = true;
    }
}

/// χ(K₁ ∩ K₀) in the piece-counting convention: pieces (connected inside
/// sub-trees for trees); a loop lying entirely inside counts 0.
pub fn piece_count_as_chi(result: &IntersectionResult, curve: &Curve) -> usize {
    match curve.topology() {
        Topology::Fiber | Topology::Tree => result.components,
        Topology::Loop => {
            if result.fully_inside {
                0
            } else {
                result.components
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RawPiece {
    edge: usize,
    start: f64,
    end: f64,
    at_tail: bool,
    at_head: bool,
}

/// Reusable buffers for repeated intersections in a hot loop.
#[derive(Debug, Default, Clone)]
pub struct Intersector {
    clip: ClipScratch,
    raw: Vec<RawPiece>,
    p0: Vec<f64>,
    p1: Vec<f64>,
    aux: Vec<f64>,
    parent: Vec<usize>,
}

impl Intersector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intersect(
        &mut self,
        body: &Body,
        curve: &Curve,
        motion: &RigidMotion,
        out: &mut IntersectionResult,
    ) -> Result<()> {
        let dim = body.dimension();
        ensure_dim(dim, curve.dimension(), "intersect")?;
        ensure_dim(dim, motion.dimension(), "intersect")?;
        out.clear();
        self.p0.resize(dim, 0.0);
        self.p1.resize(dim, 0.0);
        self.aux.resize(dim, 0.0);
        match curve.geometry() {
            Geometry::Circle { radius } => self.circle(body, *radius, motion, out),
            Geometry::Polyline(set) => self.segments(body, set, motion, out, Chain::Open),
            Geometry::ClosedPolyline(set) => self.segments(body, set, motion, out, Chain::Closed),
            Geometry::Tree(set) => self.segments(body, set, motion, out, Chain::Tree),
        }
        out.inside_length = out.pieces.iter().map(|(a, b)| b - a).sum();
        out.fully_outside = out.pieces.is_empty();
        Ok(())
    }

    fn circle(&mut self, body: &Body, r: f64, motion: &RigidMotion, out: &mut IntersectionResult) {
        let center = motion.translation();
        if norm(center) > body.circumradius() + r {
            return;
        }
        motion.column_into(0, &mut self.p0);
        motion.column_into(1, &mut self.p1);
        body.circle_crossings(center, &self.p0, &self.p1, r, &mut self.clip);
        out.crossing_count = self.clip.crossings.len();
        let tau = std::f64::consts::TAU;
        for &(a, b) in &self.clip.inside {
            out.pieces.push((a * r, b * r));
        }
        out.components = out.pieces.len();
        out.fully_inside = out.crossing_count == 0
            && out.pieces.len() == 1
            && out.pieces[0] == (0.0, tau * r);
    }

    fn segments(
        &mut self,
        body: &Body,
        set: &SegmentSet,
        motion: &RigidMotion,
        out: &mut IntersectionResult,
        chain: Chain,
    ) {
        let dim = body.dimension();
        self.raw.clear();
        // Body reference origin in the curve frame; the body lies within
        // `reach` of it, so edges farther away are outside.
        let zero = vec![0.0; dim];
        motion.inverse_apply_into(&zero, &mut self.aux);
        let reach = body.circumradius();
        let mut full_edges = 0usize;
        let near_chunks = (0..set.group_count())
            .filter(|&g| set.group_near(g, &self.aux, reach))
            .flat_map(|g| set.group_chunks(g))
            .filter(|&c| set.chunk_near(c, &self.aux, reach));
        for c in near_chunks {
            for e in set.chunk_edges(c) {
                let [a, b] = set.edges()[e];
                let (va, vb) = (set.vertex(a), set.vertex(b));
                if segment_point_dist_sq(va, vb, &self.aux) > reach * reach {
                    continue;
                }
                motion.apply_into(va, &mut self.p0);
                motion.apply_into(vb, &mut self.p1);
                if self.p0 == self.p1 {
                    continue;
                }
                body.clip_segment(&self.p0, &self.p1, &mut self.clip);
                out.crossing_count += self.clip.crossings.len();
                let (off, len) = (set.offset(e), set.edge_length(e));
                for &(ta, tb) in &self.clip.inside {
                    if ta == 0.0 && tb == 1.0 {
                        full_edges += 1;
                    }
                    self.raw.push(RawPiece {
                        edge: e,
                        start: off + ta * len,
                        end: off + tb * len,
                        at_tail: ta == 0.0,
                        at_head: tb == 1.0,
                    });
                }
            }
        }
        out.fully_inside = out.crossing_count == 0 && full_edges == set.edge_count();

        if chain == Chain::Tree {
            out.components = self.tree_components(set);
        }
        // Merge pieces that continue across a shared vertex.
        let edges = set.edges();
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.raw.len());
        let mut last: Option<RawPiece> = None;
        for &p in &self.raw {
            if let Some(prev) = last.as_mut() {
                let joined = prev.at_head
                    && p.at_tail
                    && p.edge == prev.edge + 1
                    && edges[prev.edge][1] == edges[p.edge][0];
                if joined {
                    merged.last_mut().unwrap().1 = p.end;
                    prev.edge = p.edge;
                    prev.at_head = p.at_head;
                    continue;
                }
            }
            merged.push((p.start, p.end));
            last = Some(p);
        }
        if chain == Chain::Closed && merged.len() > 1 {
            let first = self.raw.first().unwrap();
            let tail = last.unwrap();
            if first.edge == 0 && first.at_tail && tail.edge == edges.len() - 1 && tail.at_head {
                let head = merged.remove(0);
                let total = set.offset(edges.len() - 1) + set.edge_length(edges.len() - 1);
                merged.last_mut().unwrap().1 = total + head.1;
            }
        }
        out.pieces.extend(merged);
        if chain != Chain::Tree {
            out.components = out.pieces.len();
        }
    }

    /// Connected components of the inside part of a tree: pieces are joined
    /// through edge endpoints that lie inside.
    fn tree_components(&mut self, set: &SegmentSet) -> usize {
        let n_raw = self.raw.len();
        let nv = set.vertex_count();
        self.parent.clear();
        self.parent.extend(0..n_raw + nv);
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let edges = set.edges();
        for (i, piece) in self.raw.iter().enumerate() {
            let [a, b] = edges[piece.edge];
            for (touch, v) in [(piece.at_tail, a), (piece.at_head, b)] {
                if touch {
                    let (x, y) = (find(&mut self.parent, i), find(&mut self.parent, n_raw + v));
                    if x != y {
                        self.parent[x] = y;
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..n_raw).map(|i| find(&mut self.parent, i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chain {
    Open,
    Closed,
    Tree,
}

fn segment_point_dist_sq(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for k in 0..a.len() {
        let d = b[k] - a[k];
        ab2 += d * d;
        ap_ab += (p[k] - a[k]) * d;
    }
    let t = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    (0..a.len())
        .map(|k| {
            let x = a[k] + t * (b[k] - a[k]) - p[k];
            x * x
        })
        .sum()
}

/// Applies `motion` to `curve` and intersects it with `body`.
pub fn intersect(body: &Body, curve: &Curve, motion: &RigidMotion) -> Result<IntersectionResult> {
    let mut out = IntersectionResult::default();
    Intersector::new().intersect(body, curve, motion, &mut out)?;
    Ok(out)
}

/// Rejection-samples a motion from the kinematic density conditioned on
/// `g K₁ ∩ K₀ ≠ ∅`. Also returns the number of candidates drawn.
pub fn sample_hitting_motion_counted<R: Rng + ?Sized>(
    rng: &mut R,
    body: &Body,
    curve: &Curve,
    window: &SamplingWindow,
    scratch: &mut Intersector,
) -> Result<(RigidMotion, IntersectionResult, u64)> {
    ensure_dim(body.dimension(), curve.dimension(), "sample_hitting_motion")?;
    let mut out = IntersectionResult::default();
    for attempt in 1..=MAX_REJECTIONS {
        let g = window.sample(rng);
        scratch.intersect(body, curve, &g, &mut out)?;
        if !out.fully_outside {
            return Ok((g, out, attempt));
        }
    }
    Err(Error::Degenerate(format!(
        "no hitting motion in {MAX_REJECTIONS} candidates (acceptance < {MIN_ACCEPTANCE})"
    )))
}

pub fn sample_hitting_motion<R: Rng + ?Sized>(
    rng: &mut R,
    body: &Body,
    curve: &Curve,
) -> Result<(RigidMotion, IntersectionResult)> {
    let window = SamplingWindow::new(body, curve.circumradius());
    let (g, r, _) =
        sample_hitting_motion_counted(rng, body, curve, &window, &mut Intersector::new())?;
    Ok((g, r))
}

/// Finite stand-in for an infinite line through `body`: a segment along the
/// first axis that reaches past the body's circumscribed ball once placed by
/// [`sample_line_motion`].
pub fn line_probe(body: &Body) -> Curve {
    make_segment(2.0 * body.circumradius() * (1.0 + 1e-6), body.dimension())
        .expect("positive circumradius")
}

/// Isotropic uniform random line meeting the body's circumscribed ball, as a
/// motion of [`line_probe`]: direction `R e₁`, offset uniform in the
/// perpendicular (n−1)-disk.
pub fn sample_line_motion<R: Rng + ?Sized>(rng: &mut R, body: &Body) -> RigidMotion {
    let mut g = RigidMotion::identity(body.dimension());
    sample_line_motion_into(rng, body, &mut g);
    g
}

pub(crate) fn sample_line_motion_into<R: Rng + ?Sized>(rng: &mut R, body: &Body, g: &mut RigidMotion) {
    let dim = body.dimension();
    let rho = body.circumradius();
    sample_rotation_into(rng, dim, &mut g.rotation);
    let mut local = [0.0; 8];
    let local = if dim <= 8 { &mut local[..dim] } else { &mut vec![0.0; dim][..] };
    local[0] = 0.0;
    match dim - 1 {
        1 => local[1] = rho * (2.0 * rng.random::<f64>() - 1.0),
        2 => {
            let d: [f64; 2] = UnitDisc.sample(rng);
            local[1] = rho * d[0];
            local[2] = rho * d[1];
        }
        m => {
            random_direction(rng, &mut local[1..]);
            let radius = rho * rng.random::<f64>().powf(1.0 / m as f64);
            local[1..].iter_mut().for_each(|x| *x *= radius);
        }
    }
    g.translation.iter_mut().for_each(|x| *x = 0.0);
    let mut t = [0.0; 8];
    let t = if dim <= 8 { &mut t[..dim] } else { &mut vec![0.0; dim][..] };
    g.apply_into(local, t);
    g.translation.copy_from_slice(t);
}
