//! Closed-form integral-geometry predictions: Cauchy-type mean lengths,
//! inclusion probabilities and loop statistics.
//!
//! Every value is returned as a [`TheoryValue`] carrying the formula tag and an
//! echo of its inputs, so reports can show exactly what was compared.
//!
//! The curve-length identity ∫ L dK₁ = O₁⋯O_{n−1} V₀ s used by
//! [`harmonic_mean_length`] is the same whether it is derived from the n-D
//! kinematic formula or from the mean-curvature integral M_{n−2} = O_{n−2} s/(n−1)
//! of a curve; there is one code path for it.

use serde::Serialize;
use std::f64::consts::PI;

use crate::bodies::Body;
use crate::error::{Error, Result};

/// Tolerance for probabilities that land a rounding error outside `[0, 1]`.
const PROB_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    CauchyMeanChord,
    HarmonicMeanLength,
    BigLoop,
    SmallLoop,
    Inclusion2d,
    Inclusion3d,
    MeanArc,
    MeanChiLoop,
    MeanChiOpenLoop,
    OcdMeanChord,
    EtaN,
    UnitSphereArea,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryValue {
    pub value: f64,
    pub formula: FormulaId,
    pub inputs: Vec<(String, f64)>,
}

impl TheoryValue {
    fn new(value: f64, formula: FormulaId, inputs: &[(&str, f64)]) -> Self {
        TheoryValue {
            value,
            formula,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// Mean length of the moving curve. Infinite curves are their own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanLength {
    Finite(f64),
    Infinite,
}

/// O_m = 2π^{(m+1)/2} / Γ((m+1)/2): area of the unit m-sphere in R^{m+1}.
pub(crate) fn sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

pub fn unit_sphere_area(m: i64) -> Result<TheoryValue> {
    if m < 0 {
        return Err(Error::Usage(format!("unit_sphere_area: m = {m} < 0")));
    }
    Ok(TheoryValue::new(
        sphere_area(m as usize),
        FormulaId::UnitSphereArea,
        &[("m", m as f64)],
    ))
}

/// η_n = √π (n−1) Γ((n−1)/2) / Γ(n/2), the Cauchy constant (π in 2D, 4 in 3D).
pub(crate) fn eta_value(n: usize) -> f64 {
    let n = n as f64;
    PI.sqrt() * (n - 1.0) * libm::tgamma((n - 1.0) / 2.0) / libm::tgamma(n / 2.0)
}

pub fn eta(n: usize) -> Result<TheoryValue> {
    if n < 2 {
        return Err(Error::Usage(format!("eta: n = {n} < 2")));
    }
    Ok(TheoryValue::new(eta_value(n), FormulaId::EtaN, &[("n", n as f64)]))
}

/// Cauchy mean chord ⟨σ⟩ = η_n V/S (multiple-chord convention on non-convex bodies).
pub fn mean_chord(body: &Body) -> TheoryValue {
    let m = body.measures();
    let n = body.dimension();
    TheoryValue::new(
        eta_value(n) * m.volume / m.surface,
        FormulaId::CauchyMeanChord,
        &[("n", n as f64), ("volume", m.volume), ("surface", m.surface)],
    )
}

/// 1/⟨L⟩ = 1/⟨s⟩ + 1/⟨σ⟩ for curves without loops of mean length ⟨s⟩.
pub fn harmonic_mean_length(mean_curve_length: MeanLength, body: &Body) -> Result<TheoryValue> {
    let sigma = mean_chord(body).value;
    match mean_curve_length {
        MeanLength::Infinite => Ok(TheoryValue::new(
            sigma,
            FormulaId::HarmonicMeanLength,
            &[("mean_length", f64::INFINITY), ("mean_chord", sigma)],
        )),
        MeanLength::Finite(s) => {
            if !(s > 0.0) || s.is_nan() {
                return Err(Error::InvalidInput(format!(
                    "mean curve length must be positive, got {s}"
                )));
            }
            if s.is_infinite() {
                return harmonic_mean_length(MeanLength::Infinite, body);
            }
            // s σ / (s + σ) avoids the 1/s underflow for tiny s.
            Ok(TheoryValue::new(
                s * sigma / (s + sigma),
                FormulaId::HarmonicMeanLength,
                &[("mean_length", s), ("mean_chord", sigma)],
            ))
        }
    }
}

/// Big loops (minimal curvature radius above the body's maximal one): ⟨L⟩ = π F₀/L₀.
pub fn big_loop_mean_length(body: &Body) -> Result<TheoryValue> {
    require_planar_convex(body, "big_loop_mean_length")?;
    let sigma = mean_chord(body);
    Ok(TheoryValue::new(sigma.value, FormulaId::BigLoop, &[
        ("volume", body.measures().volume),
        ("surface", body.measures().surface),
    ]))
}

fn require_planar_convex(body: &Body, what: &str) -> Result<()> {
    if body.dimension() != 2 {
        return Err(Error::Usage(format!("{what}: body must be planar")));
    }
    if body.measures().euler_char != 1 {
        return Err(Error::Regime(format!(
            "{what}: loop formulas assume a simply connected window (χ₀ = 1)"
        )));
    }
    Ok(())
}

fn check_loop(l1: f64, f1: f64) -> Result<()> {
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(Error::InvalidInput(format!("loop length must be positive, got {l1}")));
    }
    if !(f1 > 0.0 && f1.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "filled-loop area must be positive, got {f1}"
        )));
    }
    // Isoperimetric inequality: a closed curve of length L encloses at most L²/4π.
    if f1 > l1 * l1 / (4.0 * PI) * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "area {f1} exceeds the isoperimetric bound for length {l1}"
        )));
    }
    Ok(())
}

/// Kinematic measure of hitting positions of a filled loop, 2π(F₀+F₁) + L₀L₁.
fn filled_hit_measure(body: &Body, l1: f64, f1: f64) -> (f64, f64, f64) {
    let m = body.measures();
    (2.0 * PI * (m.volume + f1), m.surface * l1, m.volume)
}

/// Small loops: ⟨L⟩ = 2πF₀L₁ / (2π(F₀+F₁) + L₀L₁).
pub fn small_loop_mean_length(l1: f64, f1: f64, body: &Body) -> Result<TheoryValue> {
    require_planar_convex(body, "small_loop_mean_length")?;
    check_loop(l1, f1)?;
    let (area_term, cross, f0) = filled_hit_measure(body, l1, f1);
    Ok(TheoryValue::new(
        2.0 * PI * f0 * l1 / (area_term + cross),
        FormulaId::SmallLoop,
        &[("L1", l1), ("F1", f1), ("F0", f0), ("L0", body.measures().surface)],
    ))
}

fn probability(raw: f64, what: &str) -> Result<f64> {
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&raw) {
        return Err(Error::Regime(format!(
            "{what} = {raw} lies outside [0, 1]: inputs violate the curvature regime"
        )));
    }
    Ok(raw.clamp(0.0, 1.0))
}

/// p = (2π(F₀+F₁) − L₀L₁) / (2π(F₀+F₁) + L₀L₁).
pub fn inclusion_probability_2d(body: &Body, l1: f64, f1: f64) -> Result<TheoryValue> {
    require_planar_convex(body, "inclusion_probability_2d")?;
    check_loop(l1, f1)?;
    let (area_term, cross, f0) = filled_hit_measure(body, l1, f1);
    let p = probability((area_term - cross) / (area_term + cross), "inclusion probability")?;
    Ok(TheoryValue::new(p, FormulaId::Inclusion2d, &[
        ("L1", l1),
        ("F1", f1),
        ("F0", f0),
        ("L0", body.measures().surface),
    ]))
}

/// p = (4π(V₀−V₁) + F₁M₀ − F₀M₁) / (4π(V₀+V₁) + F₁M₀ + F₀M₁) for smooth convex 3-bodies.
pub fn inclusion_probability_3d(
    v0: f64,
    f0: f64,
    m0: f64,
    v1: f64,
    f1: f64,
    m1: f64,
) -> Result<TheoryValue> {
    for (name, x) in [("V0", v0), ("F0", f0), ("M0", m0), ("V1", v1), ("F1", f1), ("M1", m1)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidInput(format!("{name} must be positive, got {x}")));
        }
    }
    let num = 4.0 * PI * (v0 - v1) + f1 * m0 - f0 * m1;
    let den = 4.0 * PI * (v0 + v1) + f1 * m0 + f0 * m1;
    let p = probability(num / den, "inclusion probability")?;
    Ok(TheoryValue::new(p, FormulaId::Inclusion3d, &[
        ("V0", v0),
        ("F0", f0),
        ("M0", m0),
        ("V1", v1),
        ("F1", f1),
        ("M1", m1),
    ]))
}

/// Same as [`inclusion_probability_3d`] with the measures read off two bodies.
pub fn inclusion_probability_3d_bodies(window: &Body, moving: &Body) -> Result<TheoryValue> {
    let (a, b) = (window.measures(), moving.measures());
    let need = |m: Option<f64>| {
        m.ok_or_else(|| Error::Usage("inclusion_probability_3d: bodies must be 3D".into()))
    };
    inclusion_probability_3d(
        a.volume,
        a.surface,
        need(a.mean_curvature_integral)?,
        b.volume,
        b.surface,
        need(b.mean_curvature_integral)?,
    )
}

/// Mean arc inside the window given that the loop crosses its boundary:
/// ⟨s⟩ = L₁/2 − πF₁/L₀.
pub fn mean_arc(l1: f64, f1: f64, l0: f64) -> Result<TheoryValue> {
    if !(l0 > 0.0) {
        return Err(Error::InvalidInput(format!("L0 must be positive, got {l0}")));
    }
    if !(l1 > 0.0) || f1 < 0.0 {
        return Err(Error::InvalidInput(format!("bad loop measures L1={l1}, F1={f1}")));
    }
    Ok(TheoryValue::new(
        l1 / 2.0 - PI * f1 / l0,
        FormulaId::MeanArc,
        &[("L1", l1), ("F1", f1), ("L0", l0)],
    ))
}

/// ⟨χ(K₁∩K₀)⟩ = 2L₀L₁ / (2π(F₀+F₁) + L₀L₁) for a small closed loop.
pub fn mean_chi_loop(l1: f64, f1: f64, body: &Body) -> Result<TheoryValue> {
    require_planar_convex(body, "mean_chi_loop")?;
    check_loop(l1, f1)?;
    let (area_term, cross, _) = filled_hit_measure(body, l1, f1);
    Ok(TheoryValue::new(
        2.0 * cross / (area_term + cross),
        FormulaId::MeanChiLoop,
        &[("L1", l1), ("F1", f1)],
    ))
}

/// ⟨χ(K̃₁∩K₀)⟩ = (2πF₀ + 2L₀L₁) / (2π(F₀+F₁) + L₀L₁) for the loop with one point removed.
pub fn mean_chi_open_loop(l1: f64, f1: f64, body: &Body) -> Result<TheoryValue> {
    require_planar_convex(body, "mean_chi_open_loop")?;
    check_loop(l1, f1)?;
    let (area_term, cross, f0) = filled_hit_measure(body, l1, f1);
    Ok(TheoryValue::new(
        (2.0 * PI * f0 + 2.0 * cross) / (area_term + cross),
        FormulaId::MeanChiOpenLoop,
        &[("L1", l1), ("F1", f1)],
    ))
}

/// One-chord mean ⟨σ_OCD⟩ = η_n V₀ / S(hull K₀).
pub fn ocd_mean_chord(body: &Body) -> TheoryValue {
    let n = body.dimension();
    let v = body.measures().volume;
    let hull_surface = body.convex_hull().measures().surface;
    TheoryValue::new(
        eta_value(n) * v / hull_surface,
        FormulaId::OcdMeanChord,
        &[("n", n as f64), ("volume", v), ("hull_surface", hull_surface)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// Inside arc length of a circle of radius `r` whose centre sits at distance
    /// `d` from the centre of a disk of radius `big`.
    fn arc_inside(d: f64, r: f64, big: f64) -> f64 {
        if d == 0.0 {
            return if r <= big { 2.0 * PI * r } else { 0.0 };
        }
        let k = (big * big - d * d - r * r) / (2.0 * d * r);
        if k >= 1.0 {
            2.0 * PI * r
        } else if k <= -1.0 {
            0.0
        } else {
            r * (2.0 * PI - 2.0 * k.acos())
        }
    }

    /// Composite Simpson over the hitting radii; rotations are irrelevant for
    /// a circle in a disk so the kinematic average reduces to this radial one.
    fn quadrature_mean_length(r: f64, big: f64) -> f64 {
        let simpson = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let f = |x: f64| arc_inside(x, r, big) * 2.0 * PI * x;
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        // Split at the kink d = big - r.
        let total = simpson(0.0, big - r, 2000) + simpson(big - r, big + r, 200_000);
        total / (PI * (big + r) * (big + r))
    }

    #[test]
    fn unit_sphere_area_examples() {
        assert!(close(unit_sphere_area(0).unwrap().value, 2.0, 1e-15));
        assert!(close(unit_sphere_area(1).unwrap().value, 2.0 * PI, 1e-15));
        assert!(close(unit_sphere_area(2).unwrap().value, 4.0 * PI, 1e-15));
        assert!(unit_sphere_area(-1).is_err());
    }

    #[test]
    fn eta_examples() {
        assert!(close(eta(2).unwrap().value, PI, 1e-14));
        assert!(close(eta(3).unwrap().value, 4.0, 1e-14));
        assert!(close(eta(4).unwrap().value, 1.5 * PI, 1e-14));
        assert!(eta(1).is_err());
    }

    #[test]
    fn eta_matches_sphere_area_ratio() {
        for n in 2..=10 {
            let via_areas = 2.0 * PI * sphere_area(n - 1) / sphere_area(n);
            assert!((eta_value(n) - via_areas).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn mean_chord_examples() {
        assert!(close(mean_chord(&Body::disk(1.0).unwrap()).value, PI / 2.0, 1e-14));
        assert!(close(mean_chord(&Body::sphere(1.0).unwrap()).value, 4.0 / 3.0, 1e-14));
        assert!(close(mean_chord(&Body::annulus(0.5, 1.0).unwrap()).value, PI / 4.0, 1e-14));
        assert!(close(
            mean_chord(&Body::cuboid(&[2.0, 3.0]).unwrap()).value,
            PI * 6.0 / 10.0,
            1e-14
        ));
    }

    #[test]
    fn harmonic_examples() {
        let disk = Body::disk(1.0).unwrap();
        let v = harmonic_mean_length(MeanLength::Finite(2.0), &disk).unwrap().value;
        assert!(close(v, 1.0 / (0.5 + 2.0 / PI), 1e-14));
        assert!((v - 0.879802).abs() < 1e-6);
        let inf = harmonic_mean_length(MeanLength::Infinite, &disk).unwrap().value;
        assert!(close(inf, PI / 2.0, 1e-15));
        let tiny = harmonic_mean_length(MeanLength::Finite(1e-6), &disk).unwrap().value;
        assert!((tiny / 1e-6 - 1.0).abs() < 1e-5);
        assert!(harmonic_mean_length(MeanLength::Finite(0.0), &disk).is_err());
        let sphere = Body::sphere(1.0).unwrap();
        let v = harmonic_mean_length(MeanLength::Finite(5.0), &sphere).unwrap().value;
        assert!(close(v, 1.0 / (0.2 + 0.75), 1e-14));
    }

    #[test]
    fn small_loop_matches_radial_quadrature() {
        let disk2 = Body::disk(2.0).unwrap();
        let r: f64 = 0.25;
        let (l1, f1) = (2.0 * PI * r, PI * r * r);
        let v = small_loop_mean_length(l1, f1, &disk2).unwrap().value;
        let oracle = quadrature_mean_length(r, 2.0);
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
        assert!((v - 1.241123023640412).abs() < 1e-12);
        for r in [0.1, 0.5, 1.0, 1.7] {
            let v = small_loop_mean_length(2.0 * PI * r, PI * r * r, &disk2).unwrap().value;
            assert!((v - quadrature_mean_length(r, 2.0)).abs() < 1e-7, "r={r}");
        }
    }

    #[test]
    fn small_loop_tiny_limit_and_preconditions() {
        let disk = Body::disk(1.0).unwrap();
        let r = 1e-7;
        let v = small_loop_mean_length(2.0 * PI * r, PI * r * r, &disk).unwrap().value;
        assert!((v / (2.0 * PI * r) - 1.0).abs() < 1e-6);
        assert!(matches!(
            small_loop_mean_length(1.0, 0.0, &disk),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            small_loop_mean_length(1.0, 0.01, &Body::annulus(0.5, 1.0).unwrap()),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn inclusion_2d_two_circles() {
        let circle = |r: f64| (2.0 * PI * r, PI * r * r);
        let disk2 = Body::disk(2.0).unwrap();
        let (l1, f1) = circle(1.0);
        assert!(close(inclusion_probability_2d(&disk2, l1, f1).unwrap().value, 1.0 / 9.0, 1e-14));
        let (l1, f1) = circle(2.0);
        assert!(inclusion_probability_2d(&disk2, l1, f1).unwrap().value.abs() < 1e-14);
        let (l1, f1) = circle(1e-9);
        assert!((inclusion_probability_2d(&disk2, l1, f1).unwrap().value - 1.0).abs() < 1e-8);
        // For two circles the formula is ((R₀−R₁)/(R₀+R₁))² whatever the ordering;
        // the curvature regime is the caller's responsibility.
        let (l1, f1) = circle(3.0);
        assert!(close(inclusion_probability_2d(&disk2, l1, f1).unwrap().value, 1.0 / 25.0, 1e-14));
        // A long thin loop drives the raw formula negative.
        assert!(matches!(
            inclusion_probability_2d(&disk2, 20.0, 0.1),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn inclusion_3d_two_spheres() {
        let s0 = Body::sphere(2.0).unwrap();
        let p = inclusion_probability_3d_bodies(&s0, &Body::sphere(1.0).unwrap()).unwrap();
        assert!(close(p.value, 1.0 / 27.0, 1e-14));
        let p = inclusion_probability_3d_bodies(&s0, &s0).unwrap();
        assert!(p.value.abs() < 1e-14);
        assert!(inclusion_probability_3d_bodies(&s0, &Body::sphere(3.0).unwrap()).is_err());
        assert!(inclusion_probability_3d_bodies(&Body::disk(1.0).unwrap(), &s0).is_err());
    }

    #[test]
    fn mean_arc_examples() {
        let v = mean_arc(PI / 2.0, PI / 16.0, 4.0 * PI).unwrap().value;
        assert!(close(v, PI / 4.0 - PI / 64.0, 1e-15));
        assert!((v - 0.7363).abs() < 1e-4);
        assert!(close(mean_arc(3.0, 0.0, 1.0).unwrap().value, 1.5, 1e-15));
    }

    #[test]
    fn mean_chi_examples() {
        let disk2 = Body::disk(2.0).unwrap();
        let (l1, f1) = (2.0 * PI, PI);
        let chi = mean_chi_loop(l1, f1, &disk2).unwrap().value;
        assert!(close(chi, 8.0 / 9.0, 1e-14));
        let p = 1.0 / 9.0;
        let s = mean_arc(l1, f1, disk2.measures().surface).unwrap().value;
        let open = mean_chi_open_loop(l1, f1, &disk2).unwrap().value;
        assert!(close(open, 1.0 + (1.0 - p) * s / l1, 1e-13));
        let r = 1e-9;
        assert!(mean_chi_loop(2.0 * PI * r, PI * r * r, &disk2).unwrap().value < 1e-8);
    }

    #[test]
    fn ocd_examples() {
        let ring = Body::annulus(0.5, 1.0).unwrap();
        assert!(close(ocd_mean_chord(&ring).value, 3.0 * PI / 8.0, 1e-14));
        let disk = Body::disk(1.0).unwrap();
        assert!(close(ocd_mean_chord(&disk).value, mean_chord(&disk).value, 1e-15));
        let ratio = mean_chord(&ring).value / ocd_mean_chord(&ring).value;
        assert!(close(ratio, 1.0 / 1.5, 1e-14));
    }

    proptest! {
        #[test]
        fn loop_consistency_chain(r0 in 0.5f64..5.0, frac in 0.01f64..0.99) {
            let r1 = r0 * frac;
            let body = Body::disk(r0).unwrap();
            let (l1, f1) = (2.0 * PI * r1, PI * r1 * r1);
            let p = inclusion_probability_2d(&body, l1, f1).unwrap().value;
            let two_circles = ((r0 - r1) / (r0 + r1)).powi(2);
            prop_assert!((p - two_circles).abs() < 1e-12);
            let chi = mean_chi_loop(l1, f1, &body).unwrap().value;
            prop_assert!((chi - (1.0 - p)).abs() < 1e-12);
            let s = mean_arc(l1, f1, body.measures().surface).unwrap().value;
            let len = small_loop_mean_length(l1, f1, &body).unwrap().value;
            prop_assert!((len - (p * l1 + (1.0 - p) * s)).abs() < 1e-12 * len.max(1.0));
            let open = mean_chi_open_loop(l1, f1, &body).unwrap().value;
            prop_assert!((p - (1.0 + len / l1 - open)).abs() < 1e-12);
        }

        #[test]
        fn inclusion_3d_positivity_condition(r0 in 0.5f64..5.0, r1 in 0.01f64..5.0) {
            let s0 = Body::sphere(r0).unwrap();
            let s1 = Body::sphere(r1).unwrap();
            let (a, b) = (s0.measures(), s1.measures());
            let (m0, m1) = (a.mean_curvature_integral.unwrap(), b.mean_curvature_integral.unwrap());
            let lhs = 4.0 * PI * a.volume + b.surface * m0;
            let rhs = 4.0 * PI * b.volume + a.surface * m1;
            match inclusion_probability_3d_bodies(&s0, &s1) {
                Ok(p) => {
                    prop_assert!((p.value - ((r0 - r1) / (r0 + r1)).powi(3)).abs() < 1e-12);
                    if p.value > 1e-12 { prop_assert!(lhs > rhs); }
                }
                Err(_) => prop_assert!(lhs < rhs),
            }
        }

        #[test]
        fn harmonic_is_monotone_and_bounded(a in 1e-3f64..100.0, b in 1e-3f64..100.0) {
            prop_assume!((a - b).abs() > 1e-9 * a.max(b));
            let body = Body::cuboid(&[2.0, 3.0]).unwrap();
            let sigma = mean_chord(&body).value;
            let la = harmonic_mean_length(MeanLength::Finite(a), &body).unwrap().value;
            let lb = harmonic_mean_length(MeanLength::Finite(b), &body).unwrap().value;
            prop_assert_eq!(a < b, la < lb);
            prop_assert!(la < sigma && lb < sigma);
        }
    }
}
