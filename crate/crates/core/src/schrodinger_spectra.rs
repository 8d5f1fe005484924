//! Ground states of the Weyl-quantized oscillators on a finite-difference
//! grid.
//!
//! The kinetic term `g(q) p^2 / 2` is quantized with the exact ordering rule
//! from [`crate::weyl_algebra::ordered_kinetic_coefficients`], evaluated at a
//! numeric hbar, with `p -> -i hbar d/dx`. The result
//! `a2(x) u'' + a1(x) u' + a0(x) u + V(x) u` is discretized with central
//! differences on the interior nodes of a uniform grid with Dirichlet ends.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{build_oscillator, Oscillator, OscillatorKind};
use crate::error::{Error, Result};
use crate::io::fmt_float;
use crate::poly_algebra::Symbol;
use crate::weyl_algebra::ordered_kinetic_coefficients;

pub const MIN_GRID_POINTS: usize = 64;
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Largest tolerated pre-symmetrization asymmetry, relative to `|M|`.
/// Boundary treatment, echoed in every spectral report.
pub const BOUNDARY: &str = "Dirichlet on a truncated interval inside the singular domain";

pub const ASYMMETRY_LIMIT: f64 = 1e-6;

pub fn default_interval(which: OscillatorKind) -> (f64, f64) {
    match which {
        OscillatorKind::H2 => (0.05, 20.0),
        OscillatorKind::H3 | OscillatorKind::H4 => (0.02, FRAC_PI_2 - 0.02),
        OscillatorKind::Harmonic => (-10.0, 10.0),
    }
}

/// `grid_points` is the number of grid intervals; the matrix acts on the
/// `grid_points - 1` interior nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralProblem {
    pub which: OscillatorKind,
    pub c: f64,
    pub hbar: f64,
    pub interval: (f64, f64),
    pub grid_points: usize,
}

impl SpectralProblem {
    pub fn new(which: OscillatorKind, c: f64, hbar: f64, grid_points: usize) -> Result<Self> {
        let prob = SpectralProblem {
            which,
            c,
            hbar,
            interval: default_interval(which),
            grid_points,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Result<Self> {
        self.interval = (lo, hi);
        self.validate()?;
        Ok(self)
    }

    pub fn with_grid(&self, grid_points: usize) -> Self {
        SpectralProblem {
            grid_points,
            ..self.clone()
        }
    }

    pub fn oscillator(&self) -> Result<Oscillator> {
        build_oscillator(self.which, self.c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::invalid(format!(
                "hbar must be positive, got {}",
                self.hbar
            )));
        }
        if self.which != OscillatorKind::Harmonic && !(self.c > 0.0) {
            return Err(Error::invalid(format!(
                "spectral runs need c > 0, got {}",
                self.c
            )));
        }
        self.oscillator()?;
        if self.grid_points < MIN_GRID_POINTS {
            return Err(Error::invalid(format!(
                "grid_points must be at least {MIN_GRID_POINTS}"
            )));
        }
        let (lo, hi) = self.interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("bad interval ({lo}, {hi})")));
        }
        let (dlo, dhi) = self.oscillator()?.domain();
        if lo <= dlo || hi >= dhi {
            return Err(Error::invalid(format!(
                "interval ({lo}, {hi}) must lie strictly inside the domain ({dlo}, {dhi})"
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.interval.1 - self.interval.0) / self.grid_points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.grid_points)
            .map(|i| self.interval.0 + i as f64 * h)
            .collect()
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    /// Largest `|M_ij - M_ji|` before symmetrization.
    pub asymmetry: f64,
    /// Max-row-sum norm.
    pub norm: f64,
}

impl QuantumOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// One-based coordinate format, upper triangle only.
    pub fn write_coordinate<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "% symmetric tridiagonal, upper triangle, 1-based")?;
        writeln!(
            w,
            "{} {} {}",
            self.dim(),
            self.dim(),
            self.dim() + self.off.len()
        )?;
        for (i, d) in self.diag.iter().enumerate() {
            writeln!(w, "{} {} {}", i + 1, i + 1, fmt_float(*d))?;
            if let Some(o) = self.off.get(i) {
                writeln!(w, "{} {} {}", i + 1, i + 2, fmt_float(*o))?;
            }
        }
        Ok(())
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.dim() {
            let o2 = if i == 0 {
                0.0
            } else {
                self.off[i - 1] * self.off[i - 1]
            };
            d = self.diag[i] - x - if i == 0 { 0.0 } else { o2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.norm + x.abs());
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + self.off.get(i).map_or(0.0, |o| o.abs());
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `j`-th smallest eigenvalue (zero-based) by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an isolated eigenvalue by inverse iteration, with unit
    /// Euclidean norm and positive sum. Returns the vector and the residual
    /// `|M v - lambda v|`.
    pub fn eigenvector(&self, lambda: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        let shift = lambda + 4.0 * f64::EPSILON * self.norm.max(1.0);
        let lu = TridiagonalLu::factor(self, shift);
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        let mut residual = f64::INFINITY;
        for _ in 0..8 {
            let mut y = lu.solve(&v);
            let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            y.iter_mut().for_each(|x| *x /= norm);
            if y.iter().sum::<f64>() < 0.0 {
                y.iter_mut().for_each(|x| *x = -*x);
            }
            v = y;
            let mv = self.mul_vec(&v);
            residual = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= 1e-9 * self.norm.max(1.0) {
                return Ok((v, residual));
            }
        }
        Err(Error::NonConvergence {
            residual,
            detail: "inverse iteration".into(),
        })
    }
}

/// LU with partial pivoting of `T - shift I`.
struct TridiagonalLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &QuantumOperator, shift: f64) -> Self {
        let n = t.dim();
        let tiny = f64::EPSILON * t.norm.max(f64::MIN_POSITIVE);
        let mut u0: Vec<f64> = t.diag.iter().map(|d| d - shift).collect();
        let mut u1: Vec<f64> = t.off.clone();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let mut sub = t.off.clone();
        for i in 0..n.saturating_sub(1) {
            if sub[i].abs() > u0[i].abs() {
                swapped[i] = true;
                let f = u0[i] / sub[i];
                u0[i] = sub[i];
                let next_diag = u0[i + 1];
                u0[i + 1] = u1[i] - f * next_diag;
                u1[i] = next_diag;
                if i + 1 < n - 1 {
                    u2[i] = u1[i + 1];
                    u1[i + 1] = -f * u2[i];
                }
                l[i] = f;
            } else {
                let f = if u0[i] == 0.0 { 0.0 } else { sub[i] / u0[i] };
                l[i] = f;
                u0[i + 1] -= f * u1[i];
            }
            sub[i] = 0.0;
        }
        for d in u0.iter_mut() {
            if d.abs() < tiny {
                *d = tiny;
            }
        }
        TridiagonalLu {
            l,
            u0,
            u1,
            u2,
            swapped,
        }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                y.swap(i, i + 1);
                y[i + 1] -= self.l[i] * y[i];
            } else {
                y[i + 1] -= self.l[i] * y[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            if i + 1 < n {
                s -= self.u1[i] * y[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * y[i + 2];
            }
            y[i] = s / self.u0[i];
        }
        y
    }
}

fn eval_symbol(s: &Symbol, hbar: f64) -> Complex64 {
    s.terms()
        .map(|(mono, c)| {
            let re = c.re.to_f64().unwrap_or(f64::NAN);
            let im = c.im.to_f64().unwrap_or(f64::NAN);
            Complex64::new(re, im) * hbar.powi(mono.hbar() as i32)
        })
        .sum()
}

/// Real coefficients `(a2, a1, a0)` of `W(g p^2) / 2 = a2 d^2 + a1 d + a0`.
fn kinetic_coefficients(
    osc: &Oscillator,
    hbar: f64,
    x: f64,
    rule: &[Complex64; 3],
) -> Result<(f64, f64, f64)> {
    let (g, g1, g2) = osc.kinetic(x);
    let minus_i_hbar = Complex64::new(0.0, -hbar);
    // W(g p^2) = c0 g P^2 + c1 g' P + c2 g'' with P = -i hbar d.
    let a2 = 0.5 * rule[0] * g * minus_i_hbar * minus_i_hbar;
    let a1 = 0.5 * rule[1] * g1 * minus_i_hbar;
    let a0 = 0.5 * rule[2] * g2;
    let scale = a2.norm() + a1.norm() + a0.norm();
    let imag = a2.im.abs() + a1.im.abs() + a0.im.abs();
    if imag > 1e-12 * scale.max(1.0) {
        return Err(Error::InvariantViolation(format!(
            "non-Hermitian ordering at x = {x}"
        )));
    }
    Ok((a2.re, a1.re, a0.re))
}

pub fn build_quantum_operator(prob: &SpectralProblem) -> Result<QuantumOperator> {
    prob.validate()?;
    let osc = prob.oscillator()?;
    let coeffs = ordered_kinetic_coefficients(2);
    let rule = [
        eval_symbol(&coeffs[0], prob.hbar),
        eval_symbol(&coeffs[1], prob.hbar),
        eval_symbol(&coeffs[2], prob.hbar),
    ];
    let x = prob.nodes();
    let n = x.len();
    let h = prob.spacing();
    let mut diag = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut lower = Vec::with_capacity(n);
    for &xi in &x {
        if osc.kinetic(xi).0 <= 0.0 {
            return Err(Error::invalid(format!(
                "kinetic coefficient is not positive at x = {xi}"
            )));
        }
        let (a2, a1, a0) = kinetic_coefficients(&osc, prob.hbar, xi, &rule)?;
        diag.push(-2.0 * a2 / (h * h) + a0 + osc.potential(xi).0);
        upper.push(a2 / (h * h) + a1 / (2.0 * h));
        lower.push(a2 / (h * h) - a1 / (2.0 * h));
    }
    // Row i couples to i+1 through upper[i] and row i+1 to i through lower[i+1].
    let mut asymmetry: f64 = 0.0;
    let off: Vec<f64> = (0..n - 1)
        .map(|i| {
            asymmetry = asymmetry.max((upper[i] - lower[i + 1]).abs());
            0.5 * (upper[i] + lower[i + 1])
        })
        .collect();
    let norm = (0..n)
        .map(|i| {
            diag[i].abs()
                + if i > 0 { lower[i].abs() } else { 0.0 }
                + if i + 1 < n { upper[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max);
    if !diag.iter().chain(&off).all(|v| v.is_finite()) {
        return Err(Error::invalid("operator has non-finite entries"));
    }
    if asymmetry > ASYMMETRY_LIMIT * norm {
        return Err(Error::InvariantViolation(format!(
            "asymmetry {asymmetry:e} exceeds {ASYMMETRY_LIMIT:e} * |M| = {:e}",
            ASYMMETRY_LIMIT * norm
        )));
    }
    Ok(QuantumOperator {
        diag,
        off,
        asymmetry,
        norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumResult {
    pub problem: SpectralProblem,
    /// Lowest eigenvalues on the problem's own grid, ascending.
    pub eigenvalues: Vec<f64>,
    /// Interior nodes and the ground state on them, `sum u^2 h = 1`.
    pub nodes: Vec<f64>,
    pub ground_state: Vec<f64>,
    pub nodeless: bool,
    /// Raw E0 on `M`, `2M` and `4M` intervals.
    pub e0_by_grid: Vec<(usize, f64)>,
    /// Second-order Richardson extrapolation from the two finest grids.
    pub e0: f64,
    /// Size of the extrapolation correction.
    pub e0_error: f64,
    pub observed_order: Option<f64>,
    pub asymmetry: f64,
    /// E0 change when the interval margins are widened at fixed spacing.
    pub truncation_shift: f64,
    pub residual: f64,
}

impl SpectrumResult {
    pub fn truncation_within_error(&self) -> bool {
        self.truncation_shift <= self.e0_error
    }
}

fn ground_energy(prob: &SpectralProblem) -> Result<f64> {
    Ok(build_quantum_operator(prob)?.eigenvalue(0))
}

/// Doubles both margins to the singular ends (or the half-width for the
/// harmonic test problem) keeping the grid spacing.
fn widened(prob: &SpectralProblem) -> Result<SpectralProblem> {
    let (lo, hi) = prob.interval;
    let (new_lo, new_hi) = match prob.which {
        OscillatorKind::H2 => (0.5 * lo, 1.5 * hi),
        OscillatorKind::H3 | OscillatorKind::H4 => (0.5 * lo, FRAC_PI_2 - 0.5 * (FRAC_PI_2 - hi)),
        OscillatorKind::Harmonic => (lo - 0.5 * (hi - lo), hi + 0.5 * (hi - lo)),
    };
    let grid = ((new_hi - new_lo) / prob.spacing()).round() as usize;
    SpectralProblem {
        interval: (new_lo, new_hi),
        grid_points: grid,
        ..prob.clone()
    }
    .with_interval(new_lo, new_hi)
}

/// Sign changes among entries above `1e-10` of the peak.
fn is_nodeless(u: &[f64]) -> bool {
    let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    u.iter()
        .filter(|x| x.abs() > 1e-10 * peak)
        .all(|&x| x > 0.0)
}

pub fn ground_state(prob: &SpectralProblem, k: usize) -> Result<SpectrumResult> {
    prob.validate()?;
    if k == 0 || k > prob.grid_points / 16 {
        return Err(Error::invalid(format!(
            "k must be in 1..={}",
            prob.grid_points / 16
        )));
    }
    let op = build_quantum_operator(prob)?;
    let eigenvalues: Vec<f64> = (0..k).map(|j| op.eigenvalue(j)).collect();
    let (mut v, residual) = op.eigenvector(eigenvalues[0])?;
    let h = prob.spacing();
    let scale = 1.0 / (v.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);

    let m = prob.grid_points;
    let e = [
        eigenvalues[0],
        ground_energy(&prob.with_grid(2 * m))?,
        ground_energy(&prob.with_grid(4 * m))?,
    ];
    let correction = (e[2] - e[1]) / 3.0;
    let observed_order = {
        let ratio = (e[0] - e[1]) / (e[1] - e[2]);
        (ratio.is_finite() && ratio > 0.0).then(|| ratio.log2())
    };
    let truncation_shift = (ground_energy(&widened(prob)?)? - eigenvalues[0]).abs();
    Ok(SpectrumResult {
        problem: prob.clone(),
        nodes: prob.nodes(),
        nodeless: is_nodeless(&v),
        ground_state: v,
        eigenvalues,
        e0_by_grid: vec![(m, e[0]), (2 * m, e[1]), (4 * m, e[2])],
        e0: e[2] + correction,
        e0_error: correction.abs(),
        observed_order,
        asymmetry: op.asymmetry,
        truncation_shift,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub c: f64,
    pub e0: Option<f64>,
    pub e0_error: Option<f64>,
    pub grid: usize,
    pub interval: (f64, f64),
    pub hbar: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub which: OscillatorKind,
    pub rows: Vec<ScanRow>,
    /// `max E0 - min E0` over the successful rows, if there are two.
    pub spread: Option<f64>,
}

impl ScanResult {
    pub fn csv_header() -> &'static str {
        "c,E0,E0_error,grid,interval_lo,interval_hi,hbar"
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::csv_header())?;
        let opt = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), fmt_float);
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_float(r.c),
                opt(r.e0),
                opt(r.e0_error),
                r.grid,
                fmt_float(r.interval.0),
                fmt_float(r.interval.1),
                fmt_float(r.hbar)
            )?;
        }
        Ok(())
    }

    /// True iff every pair of successful rows differs by more than `factor`
    /// times their summed error estimates.
    pub fn pairwise_separated(&self, factor: f64) -> bool {
        let ok: Vec<_> = self
            .rows
            .iter()
            .filter_map(|r| Some((r.e0?, r.e0_error?)))
            .collect();
        ok.iter().enumerate().all(|(i, a)| {
            ok[i + 1..]
                .iter()
                .all(|b| (a.0 - b.0).abs() > factor * (a.1 + b.1))
        })
    }
}

/// Ground-state energy for each `c`, in input order. Rows that fail carry
/// the error message instead of a value.
pub fn e0_scan(
    which: OscillatorKind,
    c_values: &[f64],
    hbar: f64,
    grid_points: usize,
    interval: Option<(f64, f64)>,
) -> Result<ScanResult> {
    if c_values.is_empty() {
        return Err(Error::invalid("no c values"));
    }
    let interval = interval.unwrap_or_else(|| default_interval(which));
    let rows: Vec<ScanRow> = c_values
        .par_iter()
        .map(|&c| {
            let prob = SpectralProblem {
                which,
                c,
                hbar,
                interval,
                grid_points,
            };
            let mut row = ScanRow {
                c,
                e0: None,
                e0_error: None,
                grid: grid_points,
                interval,
                hbar,
                failure: None,
            };
            match ground_state(&prob, 1) {
                Ok(res) => {
                    row.e0 = Some(res.e0);
                    row.e0_error = Some(res.e0_error);
                }
                Err(e) => row.failure = Some(e.to_string()),
            }
            row
        })
        .collect();
    let values: Vec<f64> = rows.iter().filter_map(|r| r.e0).collect();
    let spread = (values.len() >= 2).then(|| {
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    });
    Ok(ScanResult {
        which,
        rows,
        spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(grid: usize) -> SpectralProblem {
        SpectralProblem::new(OscillatorKind::Harmonic, 1.0, 1.0, grid).unwrap()
    }

    #[test]
    fn harmonic_levels() {
        let res = ground_state(&harmonic(1024), 3).unwrap();
        for (n, e) in res.eigenvalues.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-3, "E{n} = {e}");
        }
        assert!((res.eigenvalues[0] - 0.5).abs() < 1e-4);
        assert!((res.e0 - 0.5).abs() < 1e-8);
        let order = res.observed_order.unwrap();
        assert!((1.8..=2.2).contains(&order), "{order}");
        assert!(res.nodeless);
        let h = res.problem.spacing();
        assert!((res.ground_state.iter().map(|x| x * x).sum::<f64>() * h - 1.0).abs() < 1e-10);
        assert_eq!(res.asymmetry, 0.0);
    }

    /// Dense symmetric eigensolver as an independent check of bisection.
    #[test]
    fn bisection_matches_dense_solver() {
        for which in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
            let prob = SpectralProblem::new(which, 1.5, 0.7, 200).unwrap();
            let op = build_quantum_operator(&prob).unwrap();
            let mut dense: Vec<f64> = op
                .to_dense()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            dense.sort_by(f64::total_cmp);
            for j in 0..4 {
                let e = op.eigenvalue(j);
                assert!(
                    (e - dense[j]).abs() <= 1e-9 * op.norm,
                    "{which} {j}: {e} vs {}",
                    dense[j]
                );
            }
        }
    }

    /// Interior rows written out by hand for H2:
    /// `-hbar^2/2 (g u'' + g' u') - hbar^2 g''/8 + V` with `g = x^3/c`.
    #[test]
    fn h2_stencil_by_hand() {
        let (c, hbar) = (2.0, 0.5);
        let prob = SpectralProblem::new(OscillatorKind::H2, c, hbar, 128).unwrap();
        let op = build_quantum_operator(&prob).unwrap();
        let h = prob.spacing();
        let x = prob.nodes();
        for i in [3usize, 40, 100] {
            let xi = x[i];
            let (g, g1, g2) = (xi.powi(3) / c, 3.0 * xi * xi / c, 6.0 * xi / c);
            let diag =
                hbar * hbar * g / (h * h) - hbar * hbar * g2 / 8.0 + 0.5 * c * (xi + 1.0 / xi);
            assert!((op.diag[i] - diag).abs() <= 1e-12 * diag.abs());
            let xj = x[i + 1];
            let up = -0.5 * hbar * hbar * (g / (h * h) + g1 / (2.0 * h));
            let low =
                -0.5 * hbar * hbar * (xj.powi(3) / c / (h * h) - 3.0 * xj * xj / c / (2.0 * h));
            assert!((op.off[i] - 0.5 * (up + low)).abs() <= 1e-12 * up.abs());
        }
        assert!(op.asymmetry > 0.0 && op.asymmetry <= ASYMMETRY_LIMIT * op.norm);
    }

    #[test]
    fn second_order_for_all_oscillators() {
        for which in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
            let res =
                ground_state(&SpectralProblem::new(which, 1.0, 1.0, 512).unwrap(), 1).unwrap();
            let order = res.observed_order.unwrap();
            assert!((1.8..=2.2).contains(&order), "{which}: {order}");
            assert!(res.nodeless, "{which}");
        }
    }

    #[test]
    fn refinement_stays_within_error() {
        let a = ground_state(
            &SpectralProblem::new(OscillatorKind::H2, 1.0, 1.0, 1024).unwrap(),
            1,
        )
        .unwrap();
        let b = ground_state(
            &SpectralProblem::new(OscillatorKind::H2, 1.0, 1.0, 2048).unwrap(),
            1,
        )
        .unwrap();
        assert!((a.e0 - b.e0).abs() <= a.e0_error);
        // Same discretization solved with a dense LAPACK eigensolver; the
        // operator norm is ~1e8 here, so agreement is limited by round-off.
        assert!((b.e0_by_grid[0].1 - 1.2418273881965551).abs() < 1e-7);
        assert!((a.e0_by_grid[0].1 - 1.2416886601204937).abs() < 1e-7);
    }

    #[test]
    fn rejects_bad_problems() {
        let base = harmonic(128);
        assert!(SpectralProblem::new(OscillatorKind::H2, -1.0, 1.0, 128).is_err());
        assert!(SpectralProblem::new(OscillatorKind::H3, 1.0, 1.0, 32).is_err());
        assert!(SpectralProblem::new(OscillatorKind::H2, 1.0, 0.0, 128).is_err());
        assert!(SpectralProblem::new(OscillatorKind::H3, 1.0, 1.0, 128)
            .unwrap()
            .with_interval(0.0, 1.0)
            .is_err());
        assert!(SpectralProblem::new(OscillatorKind::H4, 1.0, 1.0, 128)
            .unwrap()
            .with_interval(0.1, 1.6)
            .is_err());
        assert!(base.with_interval(1.0, -1.0).is_err());
        assert!(ground_state(&harmonic(128), 0).is_err());
    }

    #[test]
    fn scan_keeps_order_and_reports_failures() {
        let scan = e0_scan(OscillatorKind::H2, &[2.0, -1.0, 1.0], 1.0, 256, None).unwrap();
        assert_eq!(
            scan.rows.iter().map(|r| r.c).collect::<Vec<_>>(),
            vec![2.0, -1.0, 1.0]
        );
        assert!(scan.rows[1].failure.is_some() && scan.rows[1].e0.is_none());
        assert!(scan.spread.unwrap() > 1.0);
        let single = e0_scan(OscillatorKind::H2, &[1.0], 1.0, 256, None).unwrap();
        assert_eq!(single.rows.len(), 1);
        assert!(single.spread.is_none());
        let mut csv = Vec::new();
        scan.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("c,E0,E0_error,grid,interval_lo,interval_hi,hbar\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
