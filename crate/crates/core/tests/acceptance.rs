//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Every estimate uses 10⁶ accepted samples and a fixed seed; the tolerance
//! is 4 standard errors unless a line says otherwise. Oracle values are
//! evaluated here from closed forms, not taken from the library.

use std::f64::consts::PI;
use std::time::Instant;

use kinemetrica::cli::verify::{equal_mean_processes, long_walk};
use kinemetrica::curves::{make_pearson_walk, Curve, StepLengthLaw};
use kinemetrica::estimators::stats::Moments;
use kinemetrica::estimators::{
    estimate_chord_means, estimate_inclusion_probability_3d, estimate_infinite_curve_mean_length,
    estimate_mean_traversed_length, estimate_small_loop_quantities, invariance_suite, two_sample_z,
    EstimatorResult, RunConfig, DEFAULT_TRUNCATION,
};
use kinemetrica::kinematics::{intersect, SamplingWindow};
use kinemetrica::theory;
use kinemetrica::{Body, ProcessSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const N: u64 = 1_000_000;
const TOL: f64 = 4.0;

fn run(seed: u64) -> RunConfig {
    RunConfig::new(N, seed)
}

/// Collects the sub-checks of one criterion.
struct Criterion {
    lines: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new() -> Self {
        Criterion { lines: Vec::new(), ok: true }
    }

    fn check(&mut self, pass: bool, detail: String) {
        self.ok &= pass;
        self.lines.push(format!("{} {detail}", if pass { "ok  " } else { "FAIL" }));
    }

    /// |estimate − oracle| ≤ TOL·SE + slack.
    fn against(&mut self, label: &str, r: &EstimatorResult, oracle: f64, slack: f64) {
        let d = (r.estimate - oracle).abs();
        let z = if r.std_error > 0.0 { (r.estimate - oracle) / r.std_error } else { 0.0 };
        self.check(
            d <= TOL * r.std_error + slack,
            format!(
                "{label}: {:.6} ± {:.2e} vs {oracle:.6} (z = {z:+.2}{})",
                r.estimate,
                r.std_error,
                if slack > 0.0 { format!(", slack {slack:.2e}") } else { String::new() }
            ),
        );
    }
}

/// Cauchy mean chord of the unit disk, πF/L = π/2.
const DISK_CHORD: f64 = PI / 2.0;

fn harmonic(l: f64, chord: f64) -> f64 {
    1.0 / (1.0 / l + 1.0 / chord)
}

fn harmonic_law() -> Criterion {
    let mut c = Criterion::new();
    let disk = Body::disk(1.0).unwrap();
    let oracles = [1.0 / (2.0 + 2.0 / PI), 0.879802, 1.0 / (0.125 + 2.0 / PI)];
    for (k, (l, listed)) in [0.5, 2.0, 8.0].into_iter().zip(oracles).enumerate() {
        let oracle = harmonic(l, DISK_CHORD);
        c.check(
            (oracle - listed).abs() < 1e-6,
            format!("oracle l={l}: {oracle:.6} matches tabulated {listed:.6}"),
        );
        let r = estimate_mean_traversed_length(&disk, &ProcessSpec::Segment { length: l }, &run(100 + k as u64))
            .unwrap();
        c.against(&format!("segments l={l} on disk(1)"), &r, oracle, 0.0);
    }
    c
}

fn process_invariance() -> Criterion {
    let mut c = Criterion::new();
    let disk = Body::disk(1.0).unwrap();
    let rep = invariance_suite(&disk, &equal_mean_processes(5.0), &run(200)).unwrap();
    let oracle = 1.0 / (1.0 / 5.0 + 2.0 / PI);
    for (name, r) in rep.names.iter().zip(&rep.results) {
        c.against(name, r, oracle, 0.0);
    }
    c.check(rep.max_abs_z() < TOL, format!("max pairwise |z| = {:.2}", rep.max_abs_z()));
    c
}

fn infinite_curves() -> Criterion {
    let mut c = Criterion::new();
    for (k, (label, body, oracle)) in [
        ("walk kappa=1000 on disk(1)", Body::disk(1.0).unwrap(), PI / 2.0),
        ("walk kappa=1000 on sphere(1)", Body::sphere(1.0).unwrap(), 4.0 / 3.0),
    ]
    .into_iter()
    .enumerate()
    {
        let r = estimate_infinite_curve_mean_length(&body, &long_walk(body.dimension()), DEFAULT_TRUNCATION, &run(300 + k as u64))
            .unwrap();
        // Finite-length prediction at L = κ·diameter bounds the truncation bias.
        let finite = harmonic(DEFAULT_TRUNCATION * 2.0, oracle);
        let offset = r.truncation_offset.unwrap();
        c.check(
            (offset - (oracle - finite)).abs() < 1e-12,
            format!("{label}: reported offset {offset:.3e} equals chord − finite-length value"),
        );
        c.against(label, &r, oracle, offset);
    }
    c
}

fn big_loops() -> Criterion {
    let mut c = Criterion::new();
    let disk = Body::disk(1.0).unwrap();
    let results: Vec<EstimatorResult> = [3.0, 10.0]
        .iter()
        .enumerate()
        .map(|(k, &radius)| {
            estimate_mean_traversed_length(&disk, &ProcessSpec::CircleLoop { radius }, &run(400 + k as u64))
                .unwrap()
        })
        .collect();
    for (radius, r) in [3.0, 10.0].iter().zip(&results) {
        c.against(&format!("big loop R={radius} on disk(1)"), r, PI * PI / (2.0 * PI), 0.0);
    }
    let z = two_sample_z(&results[0], &results[1]);
    c.check(z.abs() < TOL, format!("R=3 vs R=10: z = {z:+.2}"));
    c
}

fn small_loops() -> Criterion {
    let mut c = Criterion::new();
    let disk = Body::disk(2.0).unwrap();
    let est = estimate_small_loop_quantities(&disk, &ProcessSpec::CircleLoop { radius: 0.25 }, &run(500)).unwrap();
    let (r, big_r) = (0.25f64, 2.0f64);
    let (l0, f0) = (2.0 * PI * big_r, PI * big_r * big_r);
    let (l1, f1) = (2.0 * PI * r, PI * r * r);
    // For two circles the containing motions have measure 2π·π(R − r)² and
    // the hitting ones 2π·π(R + r)².
    let p = ((big_r - r) / (big_r + r)).powi(2);
    let arc = l1 / 2.0 - PI * f1 / l0;
    let chi = 2.0 * l0 * l1 / (2.0 * PI * (f0 + f1) + l0 * l1);
    c.check((chi - (1.0 - p)).abs() < 1e-12, format!("oracle <chi> = 1 − p = {chi:.6}"));
    c.against("mean length", &est.mean_length, p * l1 + (1.0 - p) * arc, 0.0);
    c.against("inclusion probability", &est.inclusion_p, p, 0.0);
    c.against("mean arc", &est.mean_arc, arc, 0.0);
    c.against("mean chi", &est.mean_chi, chi, 0.0);
    c.check(
        est.chi_identity_residual.abs() <= TOL * est.chi_identity_std_error + 1e-12,
        format!(
            "<chi> − (1 − p) = {:+.2e} ± {:.2e}",
            est.chi_identity_residual, est.chi_identity_std_error
        ),
    );
    c.check(
        est.length_identity_residual.abs() <= TOL * est.length_identity_std_error + 1e-12,
        format!(
            "<L> − (pL1 + (1 − p)<s>) = {:+.2e} ± {:.2e}",
            est.length_identity_residual, est.length_identity_std_error
        ),
    );
    c
}

fn inclusion() -> Criterion {
    let mut c = Criterion::new();
    let est = estimate_small_loop_quantities(&Body::disk(2.0).unwrap(), &ProcessSpec::CircleLoop { radius: 1.0 }, &run(600))
        .unwrap();
    c.against("circle R=1 in disk(2)", &est.inclusion_p, ((2.0 - 1.0) / (2.0 + 1.0f64)).powi(2), 0.0);
    let r = estimate_inclusion_probability_3d(&Body::sphere(2.0).unwrap(), &Body::sphere(1.0).unwrap(), &run(601))
        .unwrap();
    c.against("ball R=1 in ball(2)", &r, ((2.0 - 1.0) / (2.0 + 1.0f64)).powi(3), 0.0);
    c
}

fn chords() -> Criterion {
    let mut c = Criterion::new();
    let ring = Body::annulus(0.5, 1.0).unwrap();
    let m = estimate_chord_means(&ring, &run(700)).unwrap();
    // OCD divides the ring area by the perimeter of its convex hull (the unit
    // disk); MCD by the full boundary length, inner circle included.
    let area = PI * (1.0 - 0.25);
    let ocd = PI * area / (2.0 * PI);
    let mcd = PI * area / (2.0 * PI * 1.5);
    c.against("OCD mean", &m.ocd, ocd, 0.0);
    c.against("MCD mean", &m.mcd, mcd, 0.0);
    c.against("OCD / MCD", &m.ratio, ocd / mcd, 0.0);
    c
}

fn properties() -> Criterion {
    let mut c = Criterion::new();
    let disk = Body::disk(1.0).unwrap();

    // Determinism: same seed, any worker count, same bits.
    let walk = ProcessSpec::Pearson {
        step: StepLengthLaw::Gamma { shape: 2.0, scale: 0.25 },
        length: Some(3.0),
    };
    let small = |w| RunConfig::new(100_000, 801).with_workers(w);
    let a = estimate_mean_traversed_length(&disk, &walk, &small(1)).unwrap();
    let same = [2, 4, 0]
        .iter()
        .all(|&w| {
            let b = estimate_mean_traversed_length(&disk, &walk, &small(w)).unwrap();
            a.estimate.to_bits() == b.estimate.to_bits()
                && a.std_error.to_bits() == b.std_error.to_bits()
                && a.n_samples == b.n_samples
        });
    c.check(same, "determinism: workers 1, 2, 4, auto give bit-identical results".into());

    // Merge associativity of the streaming moments.
    let mut rng = ChaCha8Rng::seed_from_u64(802);
    let data: Vec<[f64; 3]> = (0..30_000)
        .map(|_| {
            let x: f64 = rng.random();
            [x * 10.0, x * x + rng.random::<f64>(), (rng.random::<f64>() - 0.5) * 1e3]
        })
        .collect();
    let part = |s: &[[f64; 3]]| {
        let mut m = Moments::<3>::new();
        s.iter().for_each(|x| m.push(x));
        m
    };
    let (p, q, r) = (part(&data[..7_000]), part(&data[7_000..19_000]), part(&data[19_000..]));
    let mut left = p;
    left.merge(&q);
    left.merge(&r);
    let mut right = q;
    right.merge(&r);
    let mut outer = p;
    outer.merge(&right);
    let whole = part(&data);
    let mut worst = 0.0f64;
    for m in [&left, &outer] {
        for i in 0..3 {
            worst = worst.max(rel(m.mean(i), whole.mean(i)));
            for j in 0..3 {
                worst = worst.max(rel(m.covariance(i, j), whole.covariance(i, j)));
            }
        }
    }
    c.check(worst <= 1e-10, format!("merge associativity: worst relative difference {worst:.1e}"));

    // Scaling covariance with paired seeds.
    for lambda in [0.5, 3.0] {
        let scaled_disk = disk.scaled(lambda).unwrap();
        for (name, base, scaled) in [
            ("segment l=1.5", ProcessSpec::Segment { length: 1.5 }, ProcessSpec::Segment { length: 1.5 * lambda }),
            (
                "exponential walk L=3",
                ProcessSpec::Pearson { step: StepLengthLaw::Exponential { mean: 0.5 }, length: Some(3.0) },
                ProcessSpec::Pearson { step: StepLengthLaw::Exponential { mean: 0.5 * lambda }, length: Some(3.0 * lambda) },
            ),
        ] {
            let cfg = RunConfig::new(50_000, 803);
            let a = estimate_mean_traversed_length(&disk, &base, &cfg).unwrap();
            let b = estimate_mean_traversed_length(&scaled_disk, &scaled, &cfg).unwrap();
            let d = rel(b.estimate, lambda * a.estimate);
            c.check(d < 1e-9, format!("scaling λ={lambda}, {name}: relative deviation {d:.1e}"));
        }
    }

    // Even-crossing parity on random fibers.
    let bodies = [
        disk.clone(),
        Body::annulus(0.5, 1.0).unwrap(),
        Body::cuboid(&[2.0, 3.0]).unwrap(),
        Body::polygon(vec![[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 0.8], [0.0, 2.0]]).unwrap(),
        Body::sphere(1.0).unwrap(),
        Body::spherical_shell(0.5, 1.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(804);
    let (mut bad, mut loops) = (0, 0);
    let fibers = 100_000;
    let law = StepLengthLaw::Exponential { mean: 0.4 };
    for i in 0..fibers {
        let body = &bodies[i % bodies.len()];
        let dim = body.dimension();
        let open = make_pearson_walk(&mut rng, &law, 4.0, dim).unwrap();
        let set = open.segments().unwrap();
        let m = set.vertex_count();
        let closed = (m >= 3).then(|| {
            Curve::closed_polyline(dim, (0..=m).flat_map(|v| set.vertex(v % m).to_vec()).collect())
                .unwrap()
        });
        let window = SamplingWindow::new(body, 4.0);
        let g = window.sample(&mut rng);
        let hit = intersect(body, &open, &g).unwrap();
        let ends = [0.0, open.total_length()].map(|s| {
            body.contains(&g.apply(&open.arc_point(s).unwrap())).unwrap()
        });
        if hit.crossing_count % 2 != usize::from(ends[0] != ends[1]) {
            bad += 1;
        }
        if let Some(closed) = closed {
            loops += 1;
            if !intersect(body, &closed, &g).unwrap().crossing_count.is_multiple_of(2) {
                bad += 1;
            }
        }
    }
    c.check(bad == 0, format!("crossing parity: {bad} violations in {fibers} open and {loops} closed fibers"));

    // η_n against the sphere-area identity, with η₂ = π and η₃ = 4 as anchors.
    let mut worst = 0.0f64;
    for n in 2..=10usize {
        let eta = theory::eta(n).unwrap().value;
        let o = |m: usize| theory::unit_sphere_area(m as i64).unwrap().value;
        worst = worst.max((eta - 2.0 * PI * o(n - 1) / o(n)).abs());
    }
    let anchors = (theory::eta(2).unwrap().value - PI).abs() < 1e-12
        && (theory::eta(3).unwrap().value - 4.0).abs() < 1e-12;
    c.check(worst < 1e-12 && anchors, format!("eta identity n=2..10: worst deviation {worst:.1e}"));
    c
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn main() {
    type Run = fn() -> Criterion;
    let criteria: [(&str, Run); 8] = [
        ("1 harmonic law for segments on disk(1)", harmonic_law),
        ("2 process invariance at <s> = 5 on disk(1)", process_invariance),
        ("3 infinite walks tend to the mean chord", infinite_curves),
        ("4 big loops give piF0/L0", big_loops),
        ("5 small-loop suite in disk(2)", small_loops),
        ("6 inclusion probabilities 1/9 and 1/27", inclusion),
        ("7 one-chord and multiple-chord means on annulus(0.5,1)", chords),
        ("8 property suite", properties),
    ];
    // Optional criterion numbers on the command line select a subset.
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.split(' ').next() == Some(o.as_str())) {
            continue;
        }
        let started = Instant::now();
        let c = f();
        for l in &c.lines {
            println!("    {l}");
        }
        println!(
            "{} criterion {name} ({:.1} s)",
            if c.ok { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        failed += usize::from(!c.ok);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
