//! Small helpers over `&[f64]` points. Points are stored flat (stride = dimension)
//! throughout the crate so the hot loops never allocate per point.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `out = a + t (b - a)`
#[inline]
pub fn lerp_into(a: &[f64], b: &[f64], t: f64, out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
        *o = x + t * (y - x);
    }
}

/// Real roots of `a t^2 + b t + c = 0` in ascending order, using the
/// cancellation-free form. Returns `None` when the discriminant is below
/// `rel_tol` relative to `b^2 + 4|ac|`, i.e. the line is tangent or misses.
pub fn quadratic_roots(a: f64, b: f64, c: f64, rel_tol: f64) -> Option<(f64, f64)> {
    if a == 0.0 {
        return None;
    }
    let disc = b * b - 4.0 * a * c;
    let scale = b * b + 4.0 * (a * c).abs();
    if disc <= rel_tol * scale {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 {
        // b == 0 and c == 0 would give a double root at zero, excluded above.
        let r = (-c / a).sqrt();
        (-r, r)
    } else {
        (q / a, c / q)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Solutions θ ∈ [0, 2π) of `A cos θ + B sin θ = C`, excluding tangential contact.
pub fn trig_roots(a: f64, b: f64, c: f64, rel_tol: f64, out: &mut Vec<f64>) {
    let rho_sq = a * a + b * b;
    if rho_sq == 0.0 {
        return;
    }
    let disc = rho_sq - c * c;
    if disc <= rel_tol * rho_sq {
        return;
    }
    let rho = rho_sq.sqrt();
    let phase = b.atan2(a);
    let half = (c / rho).clamp(-1.0, 1.0).acos();
    for th in [phase - half, phase + half] {
        out.push(th.rem_euclid(std::f64::consts::TAU));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_roots_are_ordered_and_stable() {
        let (r1, r2) = quadratic_roots(1.0, -3.0, 2.0, 1e-12).unwrap();
        assert!((r1 - 1.0).abs() < 1e-15 && (r2 - 2.0).abs() < 1e-15);
        // Large b: naive formula loses the small root entirely.
        let (s, _) = quadratic_roots(1.0, 1e8, 1.0, 1e-12).unwrap();
        assert!((s + 1e8).abs() / 1e8 < 1e-12);
        assert!(quadratic_roots(1.0, 2.0, 1.0, 1e-12).is_none());
        assert!(quadratic_roots(1.0, 0.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn trig_roots_solve_unit_circle_cut() {
        let mut out = Vec::new();
        // cos θ = 0.5
        trig_roots(1.0, 0.0, 0.5, 1e-12, &mut out);
        out.sort_by(f64::total_cmp);
        let expect = [std::f64::consts::FRAC_PI_3, 5.0 * std::f64::consts::FRAC_PI_3];
        for (g, e) in out.iter().zip(expect) {
            assert!((g - e).abs() < 1e-12);
        }
        out.clear();
        trig_roots(1.0, 0.0, 1.0, 1e-12, &mut out);
        assert!(out.is_empty());
    }
}
