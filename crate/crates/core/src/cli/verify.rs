//! Named batches of estimator-versus-theory checks.

use std::fmt::Write as _;

use crate::bodies::Body;
use crate::curves::{ProcessSpec, StepLengthLaw};
use crate::error::Result;
use crate::estimators::{
    estimate_chord_means, estimate_inclusion_probability_3d, estimate_infinite_curve_mean_length,
    estimate_mean_traversed_length, estimate_small_loop_quantities, invariance_suite,
    EstimatorResult, InvarianceReport, RunConfig, DEFAULT_TRUNCATION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Cauchy2d,
    Cauchy3d,
    Loops2d,
    Inclusion3d,
    Ocd,
    Invariance,
    Infinite,
}

/// One comparison of an estimate with its prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub estimate: f64,
    pub std_error: f64,
    pub expected: f64,
    /// Allowed deviation on top of `tol_sigma` standard errors.
    pub offset: f64,
}

impl Check {
    fn from_result(label: impl Into<String>, r: &EstimatorResult) -> Self {
        Check {
            label: label.into(),
            estimate: r.estimate,
            std_error: r.std_error,
            expected: r.theory.as_ref().map_or(f64::NAN, |t| t.value),
            offset: r.truncation_offset.unwrap_or(0.0),
        }
    }

    pub fn z(&self) -> f64 {
        let d = self.estimate - self.expected;
        if d.abs() <= 1e-12 * (1.0 + self.expected.abs()) {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn passes(&self, tol_sigma: f64) -> bool {
        let d = (self.estimate - self.expected).abs();
        d <= tol_sigma * self.std_error + self.offset || self.z() == 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
    pub invariance: Vec<(String, InvarianceReport)>,
}

impl SuiteReport {
    pub fn passes(&self, tol_sigma: f64) -> bool {
        self.checks.iter().all(|c| c.passes(tol_sigma))
            && self.invariance.iter().all(|(_, r)| r.max_abs_z() < tol_sigma)
    }

    /// One PASS/FAIL line per check and per z-matrix.
    pub fn render(&self, tol_sigma: f64) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.passes(tol_sigma) { "PASS" } else { "FAIL" };
            let _ = write!(
                s,
                "{verdict} {}: {:.6} ± {:.2e} vs {:.6} (z = {:+.2}",
                c.label,
                c.estimate,
                c.std_error,
                c.expected,
                c.z()
            );
            if c.offset > 0.0 {
                let _ = write!(s, ", truncation offset {:.2e}", c.offset);
            }
            s.push_str(")\n");
        }
        for (title, rep) in &self.invariance {
            let verdict = if rep.max_abs_z() < tol_sigma { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{verdict} {title}: max pairwise |z| = {:.2}", rep.max_abs_z());
            for (i, name) in rep.names.iter().enumerate() {
                let _ = write!(s, "  [{i}] {name:<72}");
                for z in &rep.z_matrix[i] {
                    let _ = write!(s, " {z:+6.2}");
                }
                s.push('\n');
            }
        }
        s
    }
}

fn walk(step: StepLengthLaw, length: f64) -> ProcessSpec {
    ProcessSpec::Pearson {
        step,
        length: Some(length),
    }
}

/// Processes sharing ⟨s⟩ = `mean`: constant, exponential and gamma walks,
/// a ramified tree and a straight segment.
pub fn equal_mean_processes(mean: f64) -> Vec<ProcessSpec> {
    vec![
        walk(StepLengthLaw::Constant { length: mean / 10.0 }, mean),
        walk(StepLengthLaw::Exponential { mean: mean / 10.0 }, mean),
        walk(StepLengthLaw::Gamma { shape: 2.0, scale: mean / 20.0 }, mean),
        ProcessSpec::Tree {
            branches: 5,
            edge: StepLengthLaw::Exponential { mean: mean / 5.0 },
        },
        ProcessSpec::Segment { length: mean },
    ]
}

/// Unbounded exponential-step walk used for the infinite-curve checks. The
/// mean step is a body radius in 2D and half of one in 3D, which keeps the
/// cost per hit lowest for a unit disk or ball.
pub fn long_walk(dim: usize) -> ProcessSpec {
    let mean = if dim == 2 { 1.0 } else { 0.5 };
    ProcessSpec::Pearson {
        step: StepLengthLaw::Exponential { mean },
        length: None,
    }
}

pub fn run_suite(suite: Suite, base: &RunConfig) -> Result<SuiteReport> {
    let mut rep = SuiteReport::default();
    // Each estimator in a suite gets its own seed so runs are independent.
    let mut k = 0u64;
    let mut next = || {
        k += 1;
        RunConfig {
            seed: base.seed.wrapping_mul(1000).wrapping_add(k),
            ..*base
        }
    };
    let disk = Body::disk(1.0)?;
    let sphere = Body::sphere(1.0)?;
    let ring = Body::annulus(0.5, 1.0)?;
    match suite {
        Suite::Cauchy2d => {
            for l in [0.5, 2.0, 8.0] {
                let r = estimate_mean_traversed_length(&disk, &ProcessSpec::Segment { length: l }, &next())?;
                rep.checks.push(Check::from_result(format!("segments l={l} on disk(1), harmonic law"), &r));
            }
            let r = estimate_mean_traversed_length(&ring, &ProcessSpec::Line, &next())?;
            rep.checks.push(Check::from_result("lines on annulus(0.5,1), mean chord", &r));
            let r = estimate_mean_traversed_length(&Body::cuboid(&[2.0, 3.0])?, &ProcessSpec::Line, &next())?;
            rep.checks.push(Check::from_result("lines on box 2x3, mean chord", &r));
            for radius in [3.0, 10.0] {
                let r = estimate_mean_traversed_length(&disk, &ProcessSpec::CircleLoop { radius }, &next())?;
                rep.checks.push(Check::from_result(format!("big loop R={radius} on disk(1)"), &r));
            }
        }
        Suite::Cauchy3d => {
            for l in [0.5, 2.0] {
                let r = estimate_mean_traversed_length(&sphere, &ProcessSpec::Segment { length: l }, &next())?;
                rep.checks.push(Check::from_result(format!("segments l={l} on sphere(1), harmonic law"), &r));
            }
            let r = estimate_mean_traversed_length(&sphere, &ProcessSpec::Line, &next())?;
            rep.checks.push(Check::from_result("lines on sphere(1), mean chord", &r));
            let r = estimate_mean_traversed_length(&Body::cuboid(&[1.0, 2.0, 1.5])?, &ProcessSpec::Line, &next())?;
            rep.checks.push(Check::from_result("lines on box 1x2x1.5, mean chord", &r));
            let r = estimate_mean_traversed_length(
                &Body::spherical_shell(0.5, 1.0)?,
                &ProcessSpec::Segment { length: 1.0 },
                &next(),
            )?;
            rep.checks.push(Check::from_result("segments l=1 on shell(0.5,1), harmonic law", &r));
        }
        Suite::Loops2d => {
            let disk2 = Body::disk(2.0)?;
            let est = estimate_small_loop_quantities(&disk2, &ProcessSpec::CircleLoop { radius: 0.25 }, &next())?;
            let tag = "loop R=0.25 in disk(2)";
            rep.checks.push(Check::from_result(format!("{tag}, mean length"), &est.mean_length));
            rep.checks.push(Check::from_result(format!("{tag}, inclusion probability"), &est.inclusion_p));
            rep.checks.push(Check::from_result(format!("{tag}, mean arc"), &est.mean_arc));
            rep.checks.push(Check::from_result(format!("{tag}, mean chi"), &est.mean_chi));
            rep.checks.push(Check {
                label: format!("{tag}, identity <L> = pL1 + (1-p)<s>"),
                estimate: est.length_identity_residual,
                std_error: est.length_identity_std_error,
                expected: 0.0,
                offset: 0.0,
            });
            rep.checks.push(Check {
                label: format!("{tag}, identity <chi> = 1 - p"),
                estimate: est.chi_identity_residual,
                std_error: est.chi_identity_std_error,
                expected: 0.0,
                offset: 0.0,
            });
            let est = estimate_small_loop_quantities(&disk2, &ProcessSpec::CircleLoop { radius: 1.0 }, &next())?;
            rep.checks.push(Check::from_result("loop R=1 in disk(2), inclusion probability", &est.inclusion_p));
        }
        Suite::Inclusion3d => {
            let r = estimate_inclusion_probability_3d(&Body::sphere(2.0)?, &sphere, &next())?;
            rep.checks.push(Check::from_result("ball R=1 inside ball R=2, inclusion probability", &r));
            let r = estimate_inclusion_probability_3d(&Body::sphere(2.0)?, &Body::sphere(0.5)?, &next())?;
            rep.checks.push(Check::from_result("ball R=0.5 inside ball R=2, inclusion probability", &r));
        }
        Suite::Ocd => {
            let m = estimate_chord_means(&ring, &next())?;
            rep.checks.push(Check::from_result("annulus(0.5,1), one-chord mean", &m.ocd));
            rep.checks.push(Check::from_result("annulus(0.5,1), multiple-chord mean", &m.mcd));
            rep.checks.push(Check::from_result("annulus(0.5,1), one-chord / multiple-chord", &m.ratio));
            let m = estimate_chord_means(&disk, &next())?;
            rep.checks.push(Check::from_result("disk(1), one-chord mean", &m.ocd));
        }
        Suite::Invariance => {
            let cases = [
                ("disk(1)", disk.clone()),
                ("box 2x3", Body::cuboid(&[2.0, 3.0])?),
                ("sphere(1)", sphere.clone()),
            ];
            for (name, body) in cases {
                let inv = invariance_suite(&body, &equal_mean_processes(5.0), &next())?;
                for (pname, r) in inv.names.iter().zip(&inv.results) {
                    rep.checks.push(Check::from_result(format!("{name}, {pname}"), r));
                }
                rep.invariance.push((format!("invariance on {name}, <s> = 5"), inv));
            }
        }
        Suite::Infinite => {
            let r = estimate_infinite_curve_mean_length(&disk, &long_walk(2), DEFAULT_TRUNCATION, &next())?;
            rep.checks.push(Check::from_result("walk kappa=1000 on disk(1), mean chord", &r));
            let r = estimate_infinite_curve_mean_length(&sphere, &long_walk(3), DEFAULT_TRUNCATION, &next())?;
            rep.checks.push(Check::from_result("walk kappa=1000 on sphere(1), mean chord", &r));
            let r = estimate_infinite_curve_mean_length(&ring, &ProcessSpec::Line, DEFAULT_TRUNCATION, &next())?;
            rep.checks.push(Check::from_result("lines on annulus(0.5,1), crossing count", &r));
        }
    }
    Ok(rep)
}
