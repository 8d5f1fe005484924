//! Quartic many-body oscillator in 3-vectors `r_nm`, pseudoscalars
//! `rho_nm` and their momenta `p_nm`, `pi_nm`:
//!
//! ```text
//! H = 1/2 sum_ij [p_ij . p_ji - pi_ij pi_ji]
//!   - 1/2 sum_ijk a_ij [r_jk . r_ki - rho_jk rho_ki]
//!   - b/4 sum_ijkl { 2 [rho_ij rho_kl (r_jk . r_li) + rho_ij rho_li (r_jk . r_kl)
//!                       + rho_ij rho_jk (r_kl . r_li)]
//!                    - rho_ij rho_jk rho_kl rho_ki
//!                    + 2 [X - X - X]
//!                    - (r_kl ^ r_li) . (rho_ij r_jk + rho_jk r_ij) }
//! ```
//!
//! with `X = (r_ij . r_kl)(r_jk . r_li)`. The bracket `2 [X - X - X]` is
//! kept term for term, so it contributes `-2 X`.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_with, HamiltonianSystem, SolverOptions, Trajectory};
use crate::error::{Error, Result};
use crate::io::write_csv_row;

type V3 = [f64; 3];

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn axpy(acc: &mut V3, s: f64, x: &V3) {
    for d in 0..3 {
        acc[d] += s * x[d];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateJson {
    r: Vec<Vec<V3>>,
    rho: Vec<Vec<f64>>,
    p: Vec<Vec<V3>>,
    pi: Vec<Vec<f64>>,
}

/// Canonical state; entry `(n, m)` of each array is stored at `n * N + m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct ManyBodyState {
    n: usize,
    pub r: Vec<V3>,
    pub rho: Vec<f64>,
    pub p: Vec<V3>,
    pub pi: Vec<f64>,
}

fn square<T: Clone>(name: &str, rows: Vec<Vec<T>>, n: usize) -> Result<Vec<T>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::invalid(format!("{name} must be {n} x {n}")));
    }
    Ok(rows.into_iter().flatten().collect())
}

impl TryFrom<StateJson> for ManyBodyState {
    type Error = Error;

    fn try_from(s: StateJson) -> Result<Self> {
        let n = s.r.len();
        let state = ManyBodyState {
            n,
            r: square("r", s.r, n)?,
            rho: square("rho", s.rho, n)?,
            p: square("p", s.p, n)?,
            pi: square("pi", s.pi, n)?,
        };
        state.validate()?;
        Ok(state)
    }
}

impl From<ManyBodyState> for StateJson {
    fn from(s: ManyBodyState) -> Self {
        let n = s.n;
        let rows = |v: &[V3]| v.chunks(n).map(|c| c.to_vec()).collect();
        let rows_s = |v: &[f64]| v.chunks(n).map(|c| c.to_vec()).collect();
        StateJson {
            r: rows(&s.r),
            rho: rows_s(&s.rho),
            p: rows(&s.p),
            pi: rows_s(&s.pi),
        }
    }
}

impl ManyBodyState {
    pub fn zeros(n: usize) -> Self {
        ManyBodyState {
            n,
            r: vec![[0.0; 3]; n * n],
            rho: vec![0.0; n * n],
            p: vec![[0.0; 3]; n * n],
            pi: vec![0.0; n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.n * self.n;
        if self.n == 0
            || self.r.len() != m
            || self.rho.len() != m
            || self.p.len() != m
            || self.pi.len() != m
        {
            return Err(Error::invalid("inconsistent many-body state shapes"));
        }
        let finite = self
            .r
            .iter()
            .chain(&self.p)
            .flatten()
            .chain(&self.rho)
            .chain(&self.pi)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::invalid("many-body state has non-finite entries"));
        }
        Ok(())
    }

    /// Seeded state with entries uniform in `[-scale, scale]`.
    pub fn random(n: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut s = ManyBodyState::zeros(n);
        let mut draw = || rng.random_range(-scale..=scale);
        for v in s.r.iter_mut().chain(s.p.iter_mut()) {
            *v = [draw(), draw(), draw()];
        }
        for x in s.rho.iter_mut().chain(s.pi.iter_mut()) {
            *x = draw();
        }
        s
    }

    /// Canonical coordinates `(r, rho)` then momenta `(p, pi)`, flattened.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(8 * self.n * self.n);
        out.extend(self.r.iter().flatten());
        out.extend(&self.rho);
        out.extend(self.p.iter().flatten());
        out.extend(&self.pi);
        out
    }

    pub fn from_flat(n: usize, z: &[f64]) -> Self {
        let m = n * n;
        let vecs = |s: &[f64]| s.chunks(3).map(|c| [c[0], c[1], c[2]]).collect::<Vec<V3>>();
        ManyBodyState {
            n,
            r: vecs(&z[..3 * m]),
            rho: z[3 * m..4 * m].to_vec(),
            p: vecs(&z[4 * m..7 * m]),
            pi: z[7 * m..8 * m].to_vec(),
        }
    }

    /// Applies `R` to every 3-vector; pseudoscalars are unchanged.
    pub fn rotated(&self, rot: &Matrix3<f64>) -> Self {
        let apply = |v: &V3| {
            let w = rot * nalgebra::Vector3::new(v[0], v[1], v[2]);
            [w[0], w[1], w[2]]
        };
        ManyBodyState {
            n: self.n,
            r: self.r.iter().map(apply).collect(),
            rho: self.rho.clone(),
            p: self.p.iter().map(apply).collect(),
            pi: self.pi.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarticParams {
    /// Coupling matrix `a_ij`, row-major.
    pub a: Vec<Vec<f64>>,
    pub b: f64,
}

impl QuarticParams {
    pub fn new(a: Vec<Vec<f64>>, b: f64) -> Result<Self> {
        let params = QuarticParams { a, b };
        params.validate(params.a.len())?;
        Ok(params)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.a.len() != n || self.a.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                left: self.a.len(),
                right: n,
            });
        }
        if !self.b.is_finite() || self.a.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("couplings must be finite"));
        }
        Ok(())
    }
}

/// Gradient of `H` in the layout of [`ManyBodyState`]: `r`/`rho` hold
/// `dH/dr`, `dH/drho`; `p`/`pi` hold `dH/dp`, `dH/dpi`.
pub type Gradient = ManyBodyState;

/// The three blocks of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBlocks {
    pub kinetic: f64,
    pub quadratic: f64,
    pub quartic: f64,
}

impl EnergyBlocks {
    pub fn total(&self) -> f64 {
        self.kinetic + self.quadratic + self.quartic
    }
}

fn check(s: &ManyBodyState, params: &QuarticParams) -> Result<()> {
    s.validate()?;
    params.validate(s.n)
}

pub fn energy_blocks(s: &ManyBodyState, params: &QuarticParams) -> Result<EnergyBlocks> {
    check(s, params)?;
    Ok(blocks_unchecked(s, params))
}

#[allow(non_snake_case)]
pub fn evaluate_H(s: &ManyBodyState, params: &QuarticParams) -> Result<f64> {
    Ok(energy_blocks(s, params)?.total())
}

fn blocks_unchecked(s: &ManyBodyState, params: &QuarticParams) -> EnergyBlocks {
    let n = s.n;
    let ix = |i: usize, j: usize| i * n + j;
    let (r, rho) = (&s.r, &s.rho);
    let mut kinetic = 0.0;
    for i in 0..n {
        for j in 0..n {
            kinetic += dot(&s.p[ix(i, j)], &s.p[ix(j, i)]) - s.pi[ix(i, j)] * s.pi[ix(j, i)];
        }
    }
    let mut quadratic = 0.0;
    for i in 0..n {
        for j in 0..n {
            let a = params.a[i][j];
            for k in 0..n {
                quadratic += a * (dot(&r[ix(j, k)], &r[ix(k, i)]) - rho[ix(j, k)] * rho[ix(k, i)]);
            }
        }
    }
    let mut quartic = 0.0;
    // The three-term bracket is kept as written; it nets to -x.
    #[allow(clippy::eq_op)]
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let (ij, jk, kl, li, ki) = (ix(i, j), ix(j, k), ix(k, l), ix(l, i), ix(k, i));
                    let x = dot(&r[ij], &r[kl]) * dot(&r[jk], &r[li]);
                    let mut w = [0.0; 3];
                    axpy(&mut w, rho[ij], &r[jk]);
                    axpy(&mut w, rho[jk], &r[ij]);
                    quartic += 2.0
                        * (rho[ij] * rho[kl] * dot(&r[jk], &r[li])
                            + rho[ij] * rho[li] * dot(&r[jk], &r[kl])
                            + rho[ij] * rho[jk] * dot(&r[kl], &r[li]))
                        - rho[ij] * rho[jk] * rho[kl] * rho[ki]
                        + 2.0 * (x - x - x)
                        - dot(&cross(&r[kl], &r[li]), &w);
                }
            }
        }
    }
    EnergyBlocks {
        kinetic: 0.5 * kinetic,
        quadratic: -0.5 * quadratic,
        quartic: -0.25 * params.b * quartic,
    }
}

/// Analytic gradient, each displayed term differentiated by the product
/// rule.
pub fn gradient(s: &ManyBodyState, params: &QuarticParams) -> Result<Gradient> {
    check(s, params)?;
    Ok(gradient_unchecked(s, params))
}

fn gradient_unchecked(s: &ManyBodyState, params: &QuarticParams) -> Gradient {
    let n = s.n;
    let ix = |i: usize, j: usize| i * n + j;
    let (r, rho) = (&s.r, &s.rho);
    let mut g = ManyBodyState::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g.p[ix(i, j)] = s.p[ix(j, i)];
            g.pi[ix(i, j)] = -s.pi[ix(j, i)];
        }
    }
    // -1/2 sum a_ij [r_jk . r_ki - rho_jk rho_ki]
    for i in 0..n {
        for j in 0..n {
            let a = -0.5 * params.a[i][j];
            for k in 0..n {
                let (jk, ki) = (ix(j, k), ix(k, i));
                axpy(&mut g.r[jk], a, &r[ki]);
                axpy(&mut g.r[ki], a, &r[jk]);
                g.rho[jk] -= a * rho[ki];
                g.rho[ki] -= a * rho[jk];
            }
        }
    }
    let f = -0.25 * params.b;
    if f == 0.0 {
        return g;
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let (ij, jk, kl, li, ki) = (ix(i, j), ix(j, k), ix(k, l), ix(l, i), ix(k, i));
                    // 2 rho_ij rho_kl (r_jk . r_li)
                    let d = dot(&r[jk], &r[li]);
                    g.rho[ij] += f * 2.0 * rho[kl] * d;
                    g.rho[kl] += f * 2.0 * rho[ij] * d;
                    axpy(&mut g.r[jk], f * 2.0 * rho[ij] * rho[kl], &r[li]);
                    axpy(&mut g.r[li], f * 2.0 * rho[ij] * rho[kl], &r[jk]);
                    // 2 rho_ij rho_li (r_jk . r_kl)
                    let d = dot(&r[jk], &r[kl]);
                    g.rho[ij] += f * 2.0 * rho[li] * d;
                    g.rho[li] += f * 2.0 * rho[ij] * d;
                    axpy(&mut g.r[jk], f * 2.0 * rho[ij] * rho[li], &r[kl]);
                    axpy(&mut g.r[kl], f * 2.0 * rho[ij] * rho[li], &r[jk]);
                    // 2 rho_ij rho_jk (r_kl . r_li)
                    let d = dot(&r[kl], &r[li]);
                    g.rho[ij] += f * 2.0 * rho[jk] * d;
                    g.rho[jk] += f * 2.0 * rho[ij] * d;
                    axpy(&mut g.r[kl], f * 2.0 * rho[ij] * rho[jk], &r[li]);
                    axpy(&mut g.r[li], f * 2.0 * rho[ij] * rho[jk], &r[kl]);
                    // -rho_ij rho_jk rho_kl rho_ki
                    g.rho[ij] -= f * rho[jk] * rho[kl] * rho[ki];
                    g.rho[jk] -= f * rho[ij] * rho[kl] * rho[ki];
                    g.rho[kl] -= f * rho[ij] * rho[jk] * rho[ki];
                    g.rho[ki] -= f * rho[ij] * rho[jk] * rho[kl];
                    // 2 [X - X - X] = -2 (r_ij . r_kl)(r_jk . r_li)
                    let (d1, d2) = (dot(&r[ij], &r[kl]), dot(&r[jk], &r[li]));
                    axpy(&mut g.r[ij], -2.0 * f * d2, &r[kl]);
                    axpy(&mut g.r[kl], -2.0 * f * d2, &r[ij]);
                    axpy(&mut g.r[jk], -2.0 * f * d1, &r[li]);
                    axpy(&mut g.r[li], -2.0 * f * d1, &r[jk]);
                    // -(r_kl ^ r_li) . w,  w = rho_ij r_jk + rho_jk r_ij
                    let mut w = [0.0; 3];
                    axpy(&mut w, rho[ij], &r[jk]);
                    axpy(&mut w, rho[jk], &r[ij]);
                    let c = cross(&r[kl], &r[li]);
                    axpy(&mut g.r[kl], -f, &cross(&r[li], &w));
                    axpy(&mut g.r[li], -f, &cross(&w, &r[kl]));
                    axpy(&mut g.r[jk], -f * rho[ij], &c);
                    axpy(&mut g.r[ij], -f * rho[jk], &c);
                    g.rho[ij] -= f * dot(&c, &r[jk]);
                    g.rho[jk] -= f * dot(&c, &r[ij]);
                }
            }
        }
    }
    g
}

/// Hamilton's equations: `(dr/dt, drho/dt) = (dH/dp, dH/dpi)`,
/// `(dp/dt, dpi/dt) = -(dH/dr, dH/drho)`.
pub fn equations_of_motion(s: &ManyBodyState, params: &QuarticParams) -> Result<ManyBodyState> {
    let g = gradient(s, params)?;
    Ok(ManyBodyState {
        n: s.n,
        r: g.p,
        rho: g.pi,
        p: g.r.iter().map(|v| [-v[0], -v[1], -v[2]]).collect(),
        pi: g.rho.iter().map(|x| -x).collect(),
    })
}

/// [`HamiltonianSystem`] view with `q = (r, rho)` and `p = (p, pi)`.
#[derive(Debug, Clone)]
pub struct ManyBodySystem {
    n: usize,
    params: QuarticParams,
}

impl ManyBodySystem {
    pub fn new(n: usize, params: QuarticParams) -> Result<Self> {
        params.validate(n)?;
        Ok(ManyBodySystem { n, params })
    }

    fn state(&self, q: &[f64], p: &[f64]) -> ManyBodyState {
        let z: Vec<f64> = q.iter().chain(p).copied().collect();
        ManyBodyState::from_flat(self.n, &z)
    }
}

impl HamiltonianSystem for ManyBodySystem {
    fn dof(&self) -> usize {
        4 * self.n * self.n
    }

    fn label(&self) -> String {
        "quartic".into()
    }

    fn params(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::from([
            ("N".to_string(), self.n as f64),
            ("b".to_string(), self.params.b),
        ]);
        for (i, row) in self.params.a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.insert(format!("a_{}_{}", i + 1, j + 1), *v);
            }
        }
        out
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> f64 {
        blocks_unchecked(&self.state(q, p), &self.params).total()
    }

    fn gradient(&self, q: &[f64], p: &[f64], dh_dq: &mut [f64], dh_dp: &mut [f64]) {
        let g = gradient_unchecked(&self.state(q, p), &self.params).to_flat();
        let m = self.dof();
        dh_dq.copy_from_slice(&g[..m]);
        dh_dp.copy_from_slice(&g[m..]);
    }
}

pub fn integrate_manybody(
    s0: &ManyBodyState,
    params: &QuarticParams,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    check(s0, params)?;
    let system = ManyBodySystem::new(s0.n, params.clone())?;
    integrate_with(
        &system,
        &s0.to_flat(),
        t_end,
        &SolverOptions::new(tol).keep_dense(false),
    )
}

/// Column names matching [`ManyBodyState::to_flat`].
pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (1..=n).map(move |j| (i, j))).collect();
    for (vec_name, scalar_name) in [("r", "rho"), ("p", "pi")] {
        for &(i, j) in &pairs {
            for axis in ["x", "y", "z"] {
                cols.push(format!("{vec_name}_{i}_{j}_{axis}"));
            }
        }
        cols.extend(pairs.iter().map(|(i, j)| format!("{scalar_name}_{i}_{j}")));
    }
    cols.push("H".into());
    cols.join(",")
}

pub fn write_trajectory_csv<W: Write>(
    traj: &Trajectory,
    n: usize,
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(w, "{}", csv_header(n))?;
    for ((t, z), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        write_csv_row(
            w,
            std::iter::once(*t)
                .chain(z.iter().copied())
                .chain(std::iter::once(*e)),
        )?;
    }
    Ok(())
}

/// Rejects anything that is not a proper rotation to within `1e-12`.
pub fn validate_rotation(rot: &Matrix3<f64>) -> Result<()> {
    let ortho = (rot.transpose() * rot - Matrix3::identity()).amax();
    let det = rot.determinant();
    if ortho > 1e-12 || (det - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "not a rotation: |R^T R - I| = {ortho:e}, det R = {det}"
        )));
    }
    Ok(())
}

/// `|H(R s) - H(s)|`.
pub fn rotation_invariance_check(
    s: &ManyBodyState,
    params: &QuarticParams,
    rot: &Matrix3<f64>,
) -> Result<f64> {
    validate_rotation(rot)?;
    Ok((evaluate_H(&s.rotated(rot), params)? - evaluate_H(s, params)?).abs())
}

/// Uniformly distributed rotation from a random unit quaternion.
pub fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let q = loop {
        let v = nalgebra::Vector4::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            break v;
        }
    };
    let uq = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
        q[0], q[1], q[2], q[3],
    ));
    *uq.to_rotation_matrix().matrix()
}

/// Seeded generator shared by the checks and the command line.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
