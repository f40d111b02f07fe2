//! Monte Carlo estimators for every quantity the [`theory`](crate::theory)
//! module predicts, each paired with its closed-form value.
//!
//! All estimators condition on the hit event `gK₁ ∩ K₀ ≠ ∅`. Means over hits
//! are ratios of per-unit tallies (tally sum over hit indicator sum) and carry
//! delta-method standard errors.

mod engine;
pub mod stats;

use std::time::Instant;

use serde::Serialize;

pub use engine::{RunConfig, CHUNK_ACCEPTED};
use engine::{lines, run_chunks, simulate, Source, Tallies};

use crate::bodies::{Body, Shape};
use crate::curves::{make_circle_loop, Curve, ProcessSpec, Topology};
use crate::error::{ensure_dim, Error, Result};
use crate::kinematics::piece_count_as_chi;
use crate::theory::{self, MeanLength, TheoryValue};

/// Smallest sample budget an estimator accepts.
pub const MIN_SAMPLES: u64 = 1000;
/// Default truncation factor κ for infinite curves (length κ × body diameter).
pub const DEFAULT_TRUNCATION: f64 = 1000.0;
/// Candidate placements per walk in the infinite-curve estimator.
pub const WALK_ATTEMPTS: u64 = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_error: f64,
    /// Candidate motions drawn, hits and misses.
    pub n_samples: u64,
    /// Hitting motions the estimate is built from.
    pub n_accepted: u64,
    pub theory: Option<TheoryValue>,
    /// (estimate − theory) / std_error.
    pub z_score: Option<f64>,
    /// Secondary prediction, e.g. the finite-length value for a truncated curve.
    pub reference: Option<TheoryValue>,
    /// |theory − reference| when the primary theory is an asymptote the
    /// simulated curve only approaches.
    pub truncation_offset: Option<f64>,
    /// Seconds spent sampling.
    pub wall_time: f64,
}

impl EstimatorResult {
    fn new<const K: usize>(
        estimate: f64,
        std_error: f64,
        tallies: &Tallies<K>,
        theory: Option<TheoryValue>,
        started: Instant,
    ) -> Self {
        let z_score = theory.as_ref().map(|t| {
            let diff = estimate - t.value;
            // An exact estimate (e.g. an impossible event never observed) has no spread.
            if diff == 0.0 {
                0.0
            } else {
                diff / std_error
            }
        });
        EstimatorResult {
            estimate,
            std_error,
            n_samples: tallies.draws,
            n_accepted: tallies.accepted,
            theory,
            z_score,
            reference: None,
            truncation_offset: None,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }

    /// Does the estimate lie within `tol_sigma` standard errors of theory,
    /// widened by any truncation offset?
    pub fn agrees(&self, tol_sigma: f64) -> bool {
        match &self.theory {
            Some(t) => {
                let slack = tol_sigma * self.std_error + self.truncation_offset.unwrap_or(0.0);
                (self.estimate - t.value).abs() <= slack
            }
            None => false,
        }
    }
}

/// |a − b| / √(σ_a² + σ_b²) for two independent estimates.
pub fn two_sample_z(a: &EstimatorResult, b: &EstimatorResult) -> f64 {
    (a.estimate - b.estimate) / a.std_error.hypot(b.std_error)
}

fn check_budget(cfg: &RunConfig) -> Result<()> {
    if cfg.n_samples < MIN_SAMPLES {
        return Err(Error::Usage(format!(
            "n_samples = {} is below the minimum of {MIN_SAMPLES}",
            cfg.n_samples
        )));
    }
    Ok(())
}

fn no_pieces() -> Error {
    Error::Degenerate("no accepted sample produced an inside piece".into())
}

/// Curvature radii of a curve: (smallest, largest).
fn curvature_range(curve: &Curve) -> (f64, f64) {
    match curve.geometry() {
        crate::curves::Geometry::Circle { radius } => (*radius, *radius),
        _ => (curve.min_curvature_radius(), f64::INFINITY),
    }
}

/// Cauchy-type prediction of ⟨L⟩ for `process` on `body`, choosing the loop
/// regime from curvature radii.
fn mean_length_theory(body: &Body, process: &ProcessSpec, sample: Option<&Curve>) -> Result<TheoryValue> {
    match process.topology() {
        Topology::Loop => {
            let curve = sample.ok_or_else(|| Error::Usage("loop theory needs the loop".into()))?;
            let m = body.measures();
            let (lo, hi) = curvature_range(curve);
            if lo >= m.max_curvature_radius {
                theory::big_loop_mean_length(body)
            } else if hi <= m.min_curvature_radius {
                let (l1, f1) = loop_measures(curve)?;
                theory::small_loop_mean_length(l1, f1, body)
            } else {
                Err(Error::Regime(format!(
                    "loop curvature radii [{lo}, {hi}] straddle the body's [{}, {}]: \
                     neither the big- nor the small-loop formula applies",
                    m.min_curvature_radius, m.max_curvature_radius
                )))
            }
        }
        _ => theory::harmonic_mean_length(process.mean_length()?, body),
    }
}

/// (L₁, F₁) of a planar loop.
fn loop_measures(curve: &Curve) -> Result<(f64, f64)> {
    match curve.geometry() {
        crate::curves::Geometry::Circle { radius } if curve.dimension() == 2 => {
            Ok((curve.total_length(), std::f64::consts::PI * radius * radius))
        }
        _ => Err(Error::Usage("loop measures need a planar circle loop".into())),
    }
}

/// ⟨L⟩ = Σ inside length / Σ χ over hits, with χ the piece count.
/// Lines are estimated against the mean chord.
pub fn estimate_mean_traversed_length(
    body: &Body,
    process: &ProcessSpec,
    cfg: &RunConfig,
) -> Result<EstimatorResult> {
    check_budget(cfg)?;
    let started = Instant::now();
    let (source, theory) = match process {
        ProcessSpec::Line => (lines(body), theory::mean_chord(body)),
        p => {
            let source = Source::for_process(p, body.dimension())?;
            let sample = match &source {
                Source::Fixed(c) => Some(c),
                _ => None,
            };
            let theory = mean_length_theory(body, p, sample)?;
            (source, theory)
        }
    };
    let t = simulate::<2, _>(body, &source, cfg, 1, |curve, r| {
        [r.inside_length, piece_count_as_chi(r, curve) as f64]
    })?;
    if t.moments.mean(1) == 0.0 {
        return Err(no_pieces());
    }
    let m = &t.moments;
    Ok(EstimatorResult::new(
        m.ratio(0, 1),
        m.ratio_std_error(0, 1),
        &t,
        Some(theory),
        started,
    ))
}

/// Four coupled estimates for a small loop inside a planar window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallLoopEstimates {
    pub mean_length: EstimatorResult,
    pub inclusion_p: EstimatorResult,
    pub mean_arc: EstimatorResult,
    pub mean_chi: EstimatorResult,
    /// ⟨L⟩ − (p L₁ + (1 − p)⟨s⟩) from the estimates.
    pub length_identity_residual: f64,
    pub length_identity_std_error: f64,
    /// ⟨χ⟩ − (1 − p) from the estimates.
    pub chi_identity_residual: f64,
    pub chi_identity_std_error: f64,
}

/// Mean inside length, inclusion probability, mean arc of crossing loops
/// and mean χ, all from one stream of hitting placements of `loop_process`.
/// The loop must be smaller than every curvature radius of the window.
pub fn estimate_small_loop_quantities(
    body: &Body,
    loop_process: &ProcessSpec,
    cfg: &RunConfig,
) -> Result<SmallLoopEstimates> {
    check_budget(cfg)?;
    if body.dimension() != 2 {
        return Err(Error::Usage("small-loop estimates need a planar window".into()));
    }
    let curve = match loop_process {
        ProcessSpec::CircleLoop { radius } => make_circle_loop(*radius, 2)?,
        _ => return Err(Error::Usage("small-loop estimates need a circle_loop process".into())),
    };
    let (l1, f1) = loop_measures(&curve)?;
    let (_, r_max) = curvature_range(&curve);
    let r0 = body.measures().min_curvature_radius;
    if !(r_max < r0) {
        return Err(Error::Regime(format!(
            "loop radius {r_max} is not below the window's smallest curvature radius {r0}"
        )));
    }
    let l0 = body.measures().surface;
    let started = Instant::now();
    // Tallies: hit, L, inside, L if crossing, crossing, χ.
    let t = simulate::<6, _>(body, &Source::Fixed(curve.clone()), cfg, 1, |c, r| {
        let inside = r.fully_inside as u8 as f64;
        [
            1.0,
            r.inside_length,
            inside,
            (1.0 - inside) * r.inside_length,
            1.0 - inside,
            piece_count_as_chi(r, c) as f64,
        ]
    })?;
    let m = &t.moments;
    if m.mean(4) == 0.0 {
        return Err(Error::Degenerate("no sampled loop crossed the window boundary".into()));
    }
    let result = |num: usize, den: usize, th: TheoryValue| {
        EstimatorResult::new(m.ratio(num, den), m.ratio_std_error(num, den), &t, Some(th), started)
    };
    let mean_length = result(1, 0, theory::small_loop_mean_length(l1, f1, body)?);
    let inclusion_p = result(2, 0, theory::inclusion_probability_2d(body, l1, f1)?);
    let mean_arc = result(3, 4, theory::mean_arc(l1, f1, l0)?);
    let mean_chi = result(5, 0, theory::mean_chi_loop(l1, f1, body)?);

    // Residuals as smooth functions of the tally means; gradients for the delta method.
    let (p, s) = (inclusion_p.estimate, mean_arc.estimate);
    let length_identity_residual = mean_length.estimate - (p * l1 + (1.0 - p) * s);
    let g_len = {
        let (gl, gp, gs) = (m.ratio_gradient(1, 0), m.ratio_gradient(2, 0), m.ratio_gradient(3, 4));
        let mut g = [0.0; 6];
        for k in 0..6 {
            g[k] = gl[k] - (l1 - s) * gp[k] - (1.0 - p) * gs[k];
        }
        g
    };
    let chi_identity_residual = mean_chi.estimate - (1.0 - p);
    let g_chi = {
        let (gc, gp) = (m.ratio_gradient(5, 0), m.ratio_gradient(2, 0));
        let mut g = [0.0; 6];
        for k in 0..6 {
            g[k] = gc[k] + gp[k];
        }
        g
    };
    Ok(SmallLoopEstimates {
        length_identity_std_error: m.linear_std_error(&g_len),
        chi_identity_std_error: m.linear_std_error(&g_chi),
        length_identity_residual,
        chi_identity_residual,
        mean_length,
        inclusion_p,
        mean_arc,
        mean_chi,
    })
}

/// P[K₁ ⊆ K₀ | K₁ ∩ K₀ ≠ ∅] for two solid balls, by event counting over
/// uniform hitting translations (rotations leave balls unchanged).
pub fn estimate_inclusion_probability_3d(
    window: &Body,
    moving: &Body,
    cfg: &RunConfig,
) -> Result<EstimatorResult> {
    check_budget(cfg)?;
    ensure_dim(window.dimension(), moving.dimension(), "inclusion probability")?;
    let (r0, r1) = match (window.shape(), moving.shape()) {
        (Shape::Ball { radius: a }, Shape::Ball { radius: b }) => (*a, *b),
        _ => return Err(Error::Usage("inclusion probability needs two balls".into())),
    };
    let theory = match window.dimension() {
        3 => theory::inclusion_probability_3d_bodies(window, moving)?,
        2 => {
            let m = moving.measures();
            theory::inclusion_probability_2d(window, m.surface, m.volume)?
        }
        n => {
            return Err(Error::Usage(format!(
                "inclusion probability is implemented for n = 2, 3, not {n}"
            )))
        }
    };
    let started = Instant::now();
    let (hit, inside) = (r0 + r1, r0 - r1);
    let dim = window.dimension();
    let half = r0 + r1;
    let t = run_chunks(cfg, |rng, target| {
        use rand::Rng;
        let mut t = Tallies::<2>::default();
        let mut p = vec![0.0; dim];
        while t.accepted < target {
            p.iter_mut().for_each(|x| *x = rng.random_range(-half..=half));
            t.draws += 1;
            let d = crate::vector::norm(&p);
            if d <= hit {
                t.accepted += 1;
                t.moments.push(&[1.0, (d <= inside) as u8 as f64]);
            }
        }
        Ok(t)
    })?;
    let m = &t.moments;
    Ok(EstimatorResult::new(
        m.ratio(1, 0),
        m.ratio_std_error(1, 0),
        &t,
        Some(theory),
        started,
    ))
}

/// ⟨L⟩ for an unbounded curve, simulated as a walk of length κ × diameter
/// (or exactly, for lines) with pieces counted as half the boundary
/// crossings. The theory is the mean chord η_n V/S; for walks the
/// finite-length prediction is attached as the reference.
pub fn estimate_infinite_curve_mean_length(
    body: &Body,
    process: &ProcessSpec,
    truncation_factor: f64,
    cfg: &RunConfig,
) -> Result<EstimatorResult> {
    check_budget(cfg)?;
    let started = Instant::now();
    let asymptote = theory::mean_chord(body);
    let tally = |_: &Curve, r: &crate::kinematics::IntersectionResult| {
        [r.inside_length, r.crossing_count as f64 / 2.0]
    };
    let (t, reference) = match process {
        ProcessSpec::Line => (simulate::<2, _>(body, &lines(body), cfg, 1, tally)?, None),
        ProcessSpec::Pearson { step, .. } => {
            if !(truncation_factor.is_finite() && truncation_factor > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "truncation factor must be positive, got {truncation_factor}"
                )));
            }
            let length = truncation_factor * body.diameter();
            let walk = ProcessSpec::Pearson {
                step: *step,
                length: Some(length),
            };
            let source = Source::for_process(&walk, body.dimension())?;
            let reference = theory::harmonic_mean_length(MeanLength::Finite(length), body)?;
            (simulate::<2, _>(body, &source, cfg, WALK_ATTEMPTS, tally)?, Some(reference))
        }
        other => {
            return Err(Error::Usage(format!(
                "the infinite-curve estimator takes pearson or line processes, not {}",
                other.name()
            )))
        }
    };
    if t.moments.mean(1) == 0.0 {
        return Err(no_pieces());
    }
    let m = &t.moments;
    let mut result = EstimatorResult::new(
        m.ratio(0, 1),
        m.ratio_std_error(0, 1),
        &t,
        Some(asymptote.clone()),
        started,
    );
    if let Some(r) = reference {
        result.truncation_offset = Some((asymptote.value - r.value).abs());
        result.reference = Some(r);
    }
    Ok(result)
}

/// One-chord and multiple-chord means from the same stream of lines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChordMeans {
    /// Mean total inside length per hitting line.
    pub ocd: EstimatorResult,
    /// Mean length per inside piece.
    pub mcd: EstimatorResult,
    /// OCD / MCD, i.e. the mean number of pieces per hitting line.
    pub ratio: EstimatorResult,
}

/// OCD, MCD and their ratio over isotropic uniform random lines. The OCD
/// counts all pieces of one line as a single chord.
pub fn estimate_chord_means(body: &Body, cfg: &RunConfig) -> Result<ChordMeans> {
    check_budget(cfg)?;
    let started = Instant::now();
    let t = simulate::<3, _>(body, &lines(body), cfg, 1, |_, r| {
        [1.0, r.inside_length, r.pieces.len() as f64]
    })?;
    let m = &t.moments;
    let ocd_theory = theory::ocd_mean_chord(body);
    let mcd_theory = theory::mean_chord(body);
    let ratio_theory = TheoryValue {
        value: ocd_theory.value / mcd_theory.value,
        formula: ocd_theory.formula,
        inputs: vec![
            ("OCD".into(), ocd_theory.value),
            ("MCD".into(), mcd_theory.value),
        ],
    };
    Ok(ChordMeans {
        ocd: EstimatorResult::new(m.ratio(1, 0), m.ratio_std_error(1, 0), &t, Some(ocd_theory), started),
        mcd: EstimatorResult::new(m.ratio(1, 2), m.ratio_std_error(1, 2), &t, Some(mcd_theory), started),
        ratio: EstimatorResult::new(m.ratio(2, 0), m.ratio_std_error(2, 0), &t, Some(ratio_theory), started),
    })
}

/// Mean one-chord length of lines through a (possibly non-convex) body.
pub fn estimate_ocd_mean_chord(body: &Body, cfg: &RunConfig) -> Result<EstimatorResult> {
    Ok(estimate_chord_means(body, cfg)?.ocd)
}

/// Mean traversed length for several processes on one body, with every
/// pairwise two-sample z-score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub names: Vec<String>,
    pub results: Vec<EstimatorResult>,
    /// `z_matrix[i][j]` compares process i with process j.
    pub z_matrix: Vec<Vec<f64>>,
}

impl InvarianceReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_matrix
            .iter()
            .flatten()
            .fold(0.0, |a: f64, z| a.max(z.abs()))
    }
}

/// Runs [`estimate_mean_traversed_length`] for every process. Process `i`
/// uses seed `cfg.seed + i` so the runs are independent.
pub fn invariance_suite(
    body: &Body,
    processes: &[ProcessSpec],
    cfg: &RunConfig,
) -> Result<InvarianceReport> {
    let mut results = Vec::with_capacity(processes.len());
    for (i, p) in processes.iter().enumerate() {
        let cfg = RunConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..*cfg
        };
        results.push(estimate_mean_traversed_length(body, p, &cfg)?);
    }
    let z_matrix = results
        .iter()
        .enumerate()
        .map(|(i, a)| {
            results
                .iter()
                .enumerate()
                .map(|(j, b)| if i == j { 0.0 } else { two_sample_z(a, b) })
                .collect()
        })
        .collect();
    Ok(InvarianceReport {
        names: processes
            .iter()
            .map(|p| serde_json::to_string(p).expect("process specs serialise"))
            .collect(),
        results,
        z_matrix,
    })
}
