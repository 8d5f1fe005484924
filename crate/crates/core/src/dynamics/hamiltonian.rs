use std::collections::BTreeMap;

use super::ode::OdeSystem;
use crate::error::Result;

/// Autonomous Hamiltonian system on `R^(2n)` with an analytic gradient.
pub trait HamiltonianSystem: Sync {
    fn dof(&self) -> usize;

    /// Short tag such as `H2`.
    fn label(&self) -> String;

    fn params(&self) -> BTreeMap<String, f64>;

    fn energy(&self, q: &[f64], p: &[f64]) -> f64;

    /// Writes `dH/dq` and `dH/dp`.
    fn gradient(&self, q: &[f64], p: &[f64], dh_dq: &mut [f64], dh_dp: &mut [f64]);

    /// Open set on which `H` is defined.
    fn in_domain(&self, _q: &[f64], _p: &[f64]) -> bool {
        true
    }

    /// Stops the integration (guard band, blow-up).
    fn check_state(&self, _t: f64, _q: &[f64], _p: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// Hamilton's equations `q' = dH/dp`, `p' = -dH/dq` on `y = (q, p)`.
pub struct HamiltonianFlow<'a>(pub &'a dyn HamiltonianSystem);

impl OdeSystem for HamiltonianFlow<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dof()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.0.dof();
        let (q, p) = y.split_at(n);
        let (dq, dp) = dy.split_at_mut(n);
        self.0.gradient(q, p, dp, dq);
        for v in dp.iter_mut() {
            *v = -*v;
        }
    }

    fn admissible(&self, y: &[f64]) -> bool {
        let (q, p) = y.split_at(self.0.dof());
        self.0.in_domain(q, p)
    }

    fn check_state(&self, t: f64, y: &[f64]) -> Result<()> {
        let (q, p) = y.split_at(self.0.dof());
        self.0.check_state(t, q, p)
    }
}

/// Largest norm-wise relative discrepancy `max|g - g_fd| / |g|_inf` between
/// the analytic gradient and Richardson-extrapolated central differences,
/// over the given `(q, p)` points.
pub fn gradient_check(system: &dyn HamiltonianSystem, points: &[(Vec<f64>, Vec<f64>)]) -> f64 {
    let n = system.dof();
    let mut worst = 0.0f64;
    for (q, p) in points {
        let mut gq = vec![0.0; n];
        let mut gp = vec![0.0; n];
        system.gradient(q, p, &mut gq, &mut gp);
        let mut z: Vec<f64> = q.iter().chain(p).copied().collect();
        let analytic: Vec<f64> = gq.iter().chain(&gp).copied().collect();
        let numeric = richardson_gradient(|z| system.energy(&z[..n], &z[n..]), &mut z);
        let scale = analytic
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-8 * (1.0 + system.energy(q, p).abs()));
        let err = analytic
            .iter()
            .zip(&numeric)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / scale);
    }
    worst
}

/// Central differences at steps `h` and `h/2` combined to fourth order.
pub(crate) fn richardson_gradient(f: impl Fn(&[f64]) -> f64, z: &mut [f64]) -> Vec<f64> {
    let central = |z: &mut [f64], i: usize, h: f64| {
        let x = z[i];
        z[i] = x + h;
        let fp = f(z);
        z[i] = x - h;
        let fm = f(z);
        z[i] = x;
        (fp - fm) / (2.0 * h)
    };
    (0..z.len())
        .map(|i| {
            let h = 1e-3 * z[i].abs().max(0.1);
            let d1 = central(z, i, h);
            let d2 = central(z, i, 0.5 * h);
            (4.0 * d2 - d1) / 3.0
        })
        .collect()
}
