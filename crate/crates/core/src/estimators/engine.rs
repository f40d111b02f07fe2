//! Deterministic parallel sampling of hitting configurations.
//!
//! Work is split into chunks of a fixed number of accepted samples. Chunk `c`
//! draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, and partial
//! tallies are merged in chunk order, so results depend on the seed and the
//! chunk size only, never on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::stats::Moments;
use crate::bodies::Body;
use crate::curves::{Curve, ProcessSpec};
use crate::error::{Error, Result};
use crate::kinematics::{
    line_probe, sample_line_motion_into, sample_rotation_into, IntersectionResult, Intersector,
    RigidMotion, SamplingWindow, MAX_REJECTIONS, MIN_ACCEPTANCE,
};

/// Accepted samples per chunk.
pub const CHUNK_ACCEPTED: u64 = 8192;

/// Sample budget and reproducibility knobs shared by every estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Accepted (hitting) samples to collect.
    pub n_samples: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
}

impl RunConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        RunConfig {
            n_samples,
            seed,
            workers: 0,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Where candidate curves come from.
pub(crate) enum Source {
    /// The same curve every time.
    Fixed(Curve),
    /// A fresh curve per sampling unit.
    Random(ProcessSpec),
    /// Isotropic uniform lines through the body's circumscribed ball.
    Lines(Curve),
}

impl Source {
    pub(crate) fn for_process(process: &ProcessSpec, dim: usize) -> Result<Source> {
        process.validate()?;
        Ok(match process {
            ProcessSpec::Line => unreachable!("lines are built with Source::Lines"),
            p if p.is_deterministic() => {
                // Seed is irrelevant for deterministic processes.
                Source::Fixed(p.draw(&mut ChaCha8Rng::seed_from_u64(0), dim)?)
            }
            p => Source::Random(p.clone()),
        })
    }
}

/// Merged output of a sampling run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tallies<const K: usize> {
    pub moments: Moments<K>,
    /// Candidate motions drawn.
    pub draws: u64,
    /// Candidates that hit the body.
    pub accepted: u64,
}

impl<const K: usize> Default for Tallies<K> {
    fn default() -> Self {
        Tallies {
            moments: Moments::new(),
            draws: 0,
            accepted: 0,
        }
    }
}

impl<const K: usize> Tallies<K> {
    fn merge(&mut self, other: &Self) {
        self.moments.merge(&other.moments);
        self.draws += other.draws;
        self.accepted += other.accepted;
    }
}

/// Collects `cfg.n_samples` hits. Each sampling unit fixes one curve, makes
/// `attempts_per_unit` candidate placements of it and records the sum over
/// hits of `tally(curve, hit)` times the placement weight; units that miss
/// record zeros. With one attempt per unit every candidate uses a fresh
/// curve.
pub(crate) fn simulate<const K: usize, F>(
    body: &Body,
    source: &Source,
    cfg: &RunConfig,
    attempts_per_unit: u64,
    tally: F,
) -> Result<Tallies<K>>
where
    F: Fn(&Curve, &IntersectionResult) -> [f64; K] + Sync,
{
    run_chunks(cfg, |rng, target| {
        run_units(body, source, target, attempts_per_unit, &tally, rng)
    })
}

/// Runs `chunk(rng, target)` for every chunk of the budget on the worker pool
/// and merges the partial tallies in chunk order.
pub(crate) fn run_chunks<const K: usize, F>(cfg: &RunConfig, chunk: F) -> Result<Tallies<K>>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<Tallies<K>> + Sync,
{
    if cfg.n_samples == 0 {
        return Err(Error::Usage("n_samples must be positive".into()));
    }
    let n_chunks = cfg.n_samples.div_ceil(CHUNK_ACCEPTED);
    let run_chunk = |c: u64| -> Result<Tallies<K>> {
        let target = CHUNK_ACCEPTED.min(cfg.n_samples - c * CHUNK_ACCEPTED);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(c);
        chunk(&mut rng, target)
    };
    let partials: Vec<Result<Tallies<K>>> = if cfg.workers == 1 {
        (0..n_chunks).map(run_chunk).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut total = Tallies::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

fn run_units<const K: usize, F>(
    body: &Body,
    source: &Source,
    target: u64,
    attempts_per_unit: u64,
    tally: &F,
    rng: &mut ChaCha8Rng,
) -> Result<Tallies<K>>
where
    F: Fn(&Curve, &IntersectionResult) -> [f64; K],
{
    let dim = body.dimension();
    let mut out = Tallies::<K>::default();
    let mut scratch = Intersector::new();
    let mut rec = IntersectionResult::default();
    let mut placer = Placer::new(body);
    let mut g = RigidMotion::identity(dim);
    let mut misses_in_a_row = 0u64;
    while out.accepted < target {
        let drawn;
        let curve = match source {
            Source::Fixed(c) | Source::Lines(c) => c,
            Source::Random(p) => {
                drawn = p.draw(rng, dim)?;
                &drawn
            }
        };
        let lines = matches!(source, Source::Lines(_));
        placer.prepare(curve);
        let mut sum = [0.0; K];
        for _ in 0..attempts_per_unit {
            let weight = if lines {
                sample_line_motion_into(rng, body, &mut g);
                1.0
            } else {
                placer.place(rng, curve, &mut g)
            };
            scratch.intersect(body, curve, &g, &mut rec)?;
            out.draws += 1;
            if rec.fully_outside {
                misses_in_a_row += 1;
                if misses_in_a_row >= MAX_REJECTIONS {
                    return Err(Error::Degenerate(format!(
                        "{MAX_REJECTIONS} consecutive misses: hit probability below \
                         {MIN_ACCEPTANCE}, body and curve scales are mismatched"
                    )));
                }
                continue;
            }
            misses_in_a_row = 0;
            out.accepted += 1;
            let t = tally(curve, &rec);
            for k in 0..K {
                sum[k] += weight * t[k];
            }
        }
        out.moments.push(&sum);
    }
    Ok(out)
}

/// Draws kinematic motions of one curve. Polyline and tree curves use a
/// rotation-dependent window: after the Haar rotation, the translation is
/// uniform on the box of translations that can bring the rotated curve's
/// bounding box onto the body's. Circles use the fixed window of
/// [`SamplingWindow`]. The returned weight is the window volume, so that
/// weighted tallies are proportional to integrals over the kinematic measure.
struct Placer {
    body_lo: Vec<f64>,
    body_hi: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    fixed: Option<SamplingWindow>,
}

impl Placer {
    fn new(body: &Body) -> Self {
        let (lo, hi) = body.bounding_box();
        Placer {
            body_lo: lo.to_vec(),
            body_hi: hi.to_vec(),
            lo: vec![0.0; lo.len()],
            hi: vec![0.0; lo.len()],
            fixed: None,
        }
    }

    fn prepare(&mut self, curve: &Curve) {
        self.fixed = match curve.segments() {
            Some(_) => None,
            None => {
                let mut w = SamplingWindow::from_bounds(&self.body_lo, &self.body_hi);
                w.dilate(curve.circumradius());
                Some(w)
            }
        };
    }

    fn place(&mut self, rng: &mut ChaCha8Rng, curve: &Curve, g: &mut RigidMotion) -> f64 {
        if let Some(w) = &self.fixed {
            w.sample_into(rng, g);
            return w.volume();
        }
        let set = curve.segments().expect("edge-set curve");
        let dim = self.lo.len();
        sample_rotation_into(rng, dim, g.rotation_mut());
        set.rotated_bounds(g.rotation(), &mut self.lo, &mut self.hi);
        let mut volume = 1.0;
        for k in 0..dim {
            let (a, b) = (self.body_lo[k] - self.hi[k], self.body_hi[k] - self.lo[k]);
            g.translation_mut()[k] = a + (b - a) * rand::Rng::random::<f64>(rng);
            volume *= b - a;
        }
        volume
    }
}

/// Straight-line source for `body`.
pub(crate) fn lines(body: &Body) -> Source {
    Source::Lines(line_probe(body))
}
