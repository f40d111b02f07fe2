//! Streaming first and second moments of tally vectors, mergeable across
//! workers (Welford updates, Chan et al. pairwise merge).

/// Running mean and co-moment matrix of `K`-component observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<const K: usize> {
    n: u64,
    mean: [f64; K],
    /// Σ (xᵢ − x̄)(yᵢ − ȳ) for every component pair.
    comoment: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Moments {
            n: 0,
            mean: [0.0; K],
            comoment: [[0.0; K]; K],
        }
    }
}

impl<const K: usize> Moments<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: &[f64; K]) {
        self.n += 1;
        let n = self.n as f64;
        let mut before = [0.0; K];
        for k in 0..K {
            before[k] = x[k] - self.mean[k];
            self.mean[k] += before[k] / n;
        }
        for a in 0..K {
            let after = x[a] - self.mean[a];
            for b in 0..K {
                self.comoment[a][b] += before[b] * after;
            }
        }
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let mut delta = [0.0; K];
        for k in 0..K {
            delta[k] = other.mean[k] - self.mean[k];
        }
        for a in 0..K {
            for b in 0..K {
                self.comoment[a][b] += other.comoment[a][b] + delta[a] * delta[b] * na * nb / n;
            }
        }
        for k in 0..K {
            self.mean[k] += delta[k] * nb / n;
        }
        self.n += other.n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, k: usize) -> f64 {
        self.mean[k]
    }

    /// Sample covariance (n − 1 denominator); zero with fewer than two observations.
    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.comoment[a][b] / (self.n - 1) as f64
        }
    }

    pub fn variance(&self, k: usize) -> f64 {
        self.covariance(k, k)
    }

    /// Standard error of the mean of component `k`.
    pub fn std_error(&self, k: usize) -> f64 {
        self.linear_std_error(&unit::<K>(k))
    }

    /// Standard error of Σ gₖ x̄ₖ.
    pub fn linear_std_error(&self, grad: &[f64; K]) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        let mut v = 0.0;
        for a in 0..K {
            for b in 0..K {
                v += grad[a] * grad[b] * self.covariance(a, b);
            }
        }
        (v.max(0.0) / self.n as f64).sqrt()
    }

    pub fn ratio(&self, num: usize, den: usize) -> f64 {
        self.mean[num] / self.mean[den]
    }

    /// Delta-method standard error of x̄_num / x̄_den.
    pub fn ratio_std_error(&self, num: usize, den: usize) -> f64 {
        self.linear_std_error(&self.ratio_gradient(num, den))
    }

    /// Gradient of x̄_num / x̄_den with respect to the component means.
    pub fn ratio_gradient(&self, num: usize, den: usize) -> [f64; K] {
        let r = self.ratio(num, den);
        let mut g = [0.0; K];
        g[num] += 1.0 / self.mean[den];
        g[den] -= r / self.mean[den];
        g
    }
}

fn unit<const K: usize>(k: usize) -> [f64; K] {
    let mut e = [0.0; K];
    e[k] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive(xs: &[[f64; 2]]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mx = xs.iter().map(|x| x[0]).sum::<f64>() / n;
        let my = xs.iter().map(|x| x[1]).sum::<f64>() / n;
        let cov = xs.iter().map(|x| (x[0] - mx) * (x[1] - my)).sum::<f64>() / (n - 1.0);
        (mx, my, cov)
    }

    #[test]
    fn matches_two_pass_formulas() {
        let xs: Vec<[f64; 2]> = (0..100)
            .map(|i| {
                let t = i as f64;
                [t.sin() + 3.0, (0.3 * t).cos() * 2.0 + t * 0.01]
            })
            .collect();
        let mut m = Moments::<2>::new();
        xs.iter().for_each(|x| m.push(x));
        let (mx, my, cov) = naive(&xs);
        assert!((m.mean(0) - mx).abs() < 1e-13);
        assert!((m.mean(1) - my).abs() < 1e-13);
        assert!((m.covariance(0, 1) - cov).abs() < 1e-13);
        assert!((m.covariance(1, 0) - cov).abs() < 1e-13);
    }

    #[test]
    fn ratio_error_reduces_to_mean_error_for_constant_denominator() {
        let mut m = Moments::<2>::new();
        for i in 0..50 {
            m.push(&[i as f64, 2.0]);
        }
        assert_eq!(m.variance(1), 0.0);
        assert!((m.ratio_std_error(0, 1) - m.std_error(0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_counts() {
        let m = Moments::<1>::new();
        assert!(m.std_error(0).is_nan());
        let mut m = Moments::<1>::new();
        m.push(&[4.0]);
        assert_eq!(m.variance(0), 0.0);
        let mut e = Moments::<1>::new();
        e.merge(&m);
        assert_eq!(e, m);
        m.merge(&Moments::new());
        assert_eq!(e, m);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(
            xs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..200),
            cut1 in 0usize..200,
            cut2 in 0usize..200,
        ) {
            let xs: Vec<[f64; 2]> = xs.into_iter().map(|(a, b)| [a, b]).collect();
            let (c1, c2) = {
                let (a, b) = (cut1 % xs.len(), cut2 % xs.len());
                (a.min(b), a.max(b))
            };
            let part = |s: &[[f64; 2]]| {
                let mut m = Moments::<2>::new();
                s.iter().for_each(|x| m.push(x));
                m
            };
            let (a, b, c) = (part(&xs[..c1]), part(&xs[c1..c2]), part(&xs[c2..]));
            let mut left = a;
            left.merge(&b);
            left.merge(&c);
            let mut right = c;
            right.merge(&a);
            right.merge(&b);
            let whole = part(&xs);
            for m in [left, right] {
                prop_assert_eq!(m.count(), whole.count());
                for k in 0..2 {
                    let scale = 1.0 + whole.mean(k).abs();
                    prop_assert!((m.mean(k) - whole.mean(k)).abs() <= 1e-10 * scale);
                    for j in 0..2 {
                        let scale = 1.0 + whole.covariance(k, j).abs();
                        prop_assert!((m.covariance(k, j) - whole.covariance(k, j)).abs() <= 1e-10 * scale);
                    }
                }
            }
        }
    }
}
