#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    /// Mapped nodes and weights on [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
        self.x.iter().zip(&self.w).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum of the rule over consecutive pieces of `cuts`.
    pub fn pieces(&self, f: impl Fn(f64) -> f64, cuts: &[f64]) -> f64 {
        cuts.windows(2).map(|p| self.integrate(&f, p[0], p[1])).sum()
    }
}

#[test]
fn rule_is_exact_for_polynomials() {
    let r = Rule::new(10);
    let v = r.integrate(|x| x.powi(19) + x.powi(18), -1.0, 1.0);
    assert!((v - 2.0 / 19.0).abs() < 1e-14);
    let v = r.integrate(|x| x.powi(4), 0.0, 2.0);
    assert!((v - 32.0 / 5.0).abs() < 1e-13);
}
