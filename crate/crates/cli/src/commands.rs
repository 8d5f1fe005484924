use std::f64::consts::TAU;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use oscq::dynamics::{
    build_oscillator, c_scaling_check, detect_period, integrate_velocity_form, integrate_with,
    newton_residual, Method, Oscillator, OscillatorKind, Sampling, SolverOptions, Trajectory,
};
use oscq::matrix_oscillator::{integrate_matrix, MatrixState};
use oscq::poly_algebra::{
    classify_subalgebra, moyal_bracket, parse_observable, poisson_bracket, PolyObservable,
};
use oscq::quartic_manybody::{self as quartic, ManyBodyState, QuarticParams};
use oscq::schrodinger_spectra::{
    build_quantum_operator, e0_scan, ground_state, SpectralProblem, BOUNDARY, DEFAULT_GRID_POINTS,
};
use oscq::selftest::run_selftest;
use oscq::weyl_algebra::{
    dirac_defect, gvh_contradiction, verify_quantization_conditions, weyl_quantize, weyl_symbol,
    ORDERING,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::json_arg;
use crate::error::{CliError, CliResult};

/// Row-major matrix. The alias keeps clap from reading it as a list of
/// values.
pub type Rows = Vec<Vec<f64>>;

pub struct Ctx {
    pub seed: u64,
    pub tol: Option<f64>,
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub enum Primary {
    Json(Value),
    Csv(Vec<u8>),
}

pub struct Outcome {
    pub primary: Primary,
    pub summary: String,
    pub meta: Value,
    /// Set when the run completed but an invariant it checks failed.
    pub failed: bool,
}

impl Outcome {
    fn json(primary: Value, summary: String) -> Self {
        Outcome {
            primary: Primary::Json(primary),
            summary,
            meta: Value::Null,
            failed: false,
        }
    }

    fn csv(bytes: Vec<u8>, summary: String, meta: Value) -> Self {
        Outcome {
            primary: Primary::Csv(bytes),
            summary,
            meta,
            failed: false,
        }
    }
}

fn req<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::usage(format!("missing parameter --{}", name.replace('_', "-"))))
}

fn system(name: Option<String>) -> CliResult<OscillatorKind> {
    Ok(req(name, "system")?.parse()?)
}

fn csv_bytes(
    f: impl FnOnce(&mut BufWriter<&mut Vec<u8>>) -> std::io::Result<()>,
) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = BufWriter::new(&mut buf);
        f(&mut w).map_err(|e| CliError::io("formatting CSV", e))?;
    }
    Ok(buf)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairParams {
    /// First polynomial, e.g. "q^3"
    #[arg(long)]
    pub f: Option<String>,
    /// Second polynomial
    #[arg(long)]
    pub g: Option<String>,
    #[arg(long)]
    pub num_dof: Option<usize>,
}

fn parse_pair(p: &PairParams) -> CliResult<(PolyObservable, PolyObservable)> {
    let (fs, gs) = (req(p.f.as_deref(), "f")?, req(p.g.as_deref(), "g")?);
    let n = match p.num_dof {
        Some(n) => n,
        None => parse_observable(fs, None)?
            .num_dof()
            .max(parse_observable(gs, None)?.num_dof()),
    };
    Ok((
        parse_observable(fs, Some(n))?,
        parse_observable(gs, Some(n))?,
    ))
}

pub fn bracket(p: PairParams) -> CliResult<Outcome> {
    let (f, g) = parse_pair(&p)?;
    let b = poisson_bracket(&f, &g)?;
    Ok(Outcome::json(
        json!({"f": f.to_string(), "g": g.to_string(), "bracket": b.to_string()}),
        b.to_string(),
    ))
}

pub fn moyal(p: PairParams) -> CliResult<Outcome> {
    let (f, g) = parse_pair(&p)?;
    let m = moyal_bracket(&f, &g)?;
    Ok(Outcome::json(
        json!({"f": f.to_string(), "g": g.to_string(), "moyal": m.to_string()}),
        m.to_string(),
    ))
}

pub fn dirac(p: PairParams) -> CliResult<Outcome> {
    let (f, g) = parse_pair(&p)?;
    let d = dirac_defect(&f, &g)?;
    let symbol = weyl_symbol(&d).into_real()?;
    Ok(Outcome::json(
        json!({"f": f.to_string(), "g": g.to_string(), "defect": d.to_string(),
               "defect_symbol": symbol.to_string(), "vanishes": d.is_zero(), "ordering": ORDERING}),
        symbol.to_string(),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleParams {
    /// Polynomial, e.g. "q^2 * p"
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub num_dof: Option<usize>,
}

pub fn classify(p: SingleParams) -> CliResult<Outcome> {
    let f = parse_observable(req(p.f.as_deref(), "f")?, p.num_dof)?;
    let tag = classify_subalgebra(&f)?;
    Ok(Outcome::json(
        json!({"f": f.to_string(), "subalgebra": tag.as_str()}),
        tag.to_string(),
    ))
}

pub fn quantize(p: SingleParams) -> CliResult<Outcome> {
    let f = parse_observable(req(p.f.as_deref(), "f")?, p.num_dof)?;
    let op = weyl_quantize(&f)?;
    let symbol = weyl_symbol(&op);
    Ok(Outcome::json(
        json!({"f": f.to_string(), "operator": op.to_string(), "symbol": symbol.to_string(),
               "ordering": ORDERING}),
        op.to_string(),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoParams {}

pub fn gvh(_: NoParams) -> CliResult<Outcome> {
    let r = gvh_contradiction()?;
    let symbol = weyl_symbol(&r.difference).into_real()?;
    Ok(Outcome::json(
        json!({
            "candidate_a": r.candidate_a.to_string(),
            "candidate_b": r.candidate_b.to_string(),
            "difference": r.difference.to_string(),
            "difference_symbol": symbol.to_string(),
            "ordering": ORDERING,
        }),
        format!("difference = {symbol}"),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConditionsParams {
    /// Basis polynomials separated by ';' [default: 1;q;p;q^2;q*p;p^2]
    #[arg(long, value_delimiter = ';')]
    pub basis: Option<Vec<String>>,
    #[arg(long)]
    pub num_dof: Option<usize>,
}

pub fn verify_conditions(p: ConditionsParams, ctx: &Ctx) -> CliResult<Outcome> {
    let basis = p.basis.unwrap_or_else(|| {
        ["1", "q", "p", "q^2", "q*p", "p^2"]
            .map(String::from)
            .to_vec()
    });
    let n = match p.num_dof {
        Some(n) => n,
        None => basis
            .iter()
            .map(|s| parse_observable(s, None).map(|f| f.num_dof()))
            .try_fold(1, |m, d| d.map(|d| m.max(d)))?,
    };
    let basis: Vec<PolyObservable> = basis
        .iter()
        .map(|s| parse_observable(s, Some(n)))
        .collect::<Result<_, _>>()?;
    let report = verify_quantization_conditions(&basis, ctx.seed)?;
    let summary = format!("testable conditions pass: {}", report.testable_pass());
    Ok(Outcome::json(to_json(&report), summary))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    /// H2, H3, H4 or harmonic
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// [default: 4 pi]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// dop853 or midpoint [default: dop853]
    #[arg(long)]
    pub method: Option<String>,
    /// Fixed step of the midpoint rule [default: 1e-3]
    #[arg(long)]
    pub step: Option<f64>,
    /// Output on `samples + 1` uniformly spaced times (dop853 only)
    #[arg(long)]
    pub samples: Option<usize>,
    /// auto, canonical or velocity [default: auto]
    #[arg(long)]
    pub chart: Option<String>,
}

fn oscillator(system_name: Option<String>, c: Option<f64>) -> CliResult<Oscillator> {
    Ok(build_oscillator(system(system_name)?, c.unwrap_or(1.0))?)
}

fn run_chart(
    osc: &Oscillator,
    chart: &str,
    q0: f64,
    p0: f64,
    t_end: f64,
    opts: &SolverOptions,
) -> CliResult<Trajectory> {
    let velocity = match chart {
        "auto" => osc.kind.needs_velocity_chart(),
        "canonical" => false,
        "velocity" => true,
        other => return Err(CliError::usage(format!("unknown chart {other:?}"))),
    };
    Ok(if velocity {
        integrate_velocity_form(osc, q0, p0, t_end, opts)?
    } else {
        integrate_with(osc, &[q0, p0], t_end, opts)?
    })
}

pub fn simulate(p: SimulateParams, ctx: &Ctx) -> CliResult<Outcome> {
    let osc = oscillator(p.system, p.c)?;
    let (q0, p0) = (req(p.q0, "q0")?, p.p0.unwrap_or(0.0));
    let t_end = p.t_end.unwrap_or(2.0 * TAU);
    let mut opts = SolverOptions::new(ctx.tol(1e-10));
    match p.method.as_deref().unwrap_or("dop853") {
        "dop853" => {}
        "midpoint" => {
            opts = opts.method(Method::ImplicitMidpoint {
                step: p.step.unwrap_or(1e-3),
            })
        }
        other => return Err(CliError::usage(format!("unknown method {other:?}"))),
    }
    if let Some(n) = p.samples {
        opts = opts.sampling(Sampling::Uniform(n));
    }
    let traj = run_chart(
        &osc,
        p.chart.as_deref().unwrap_or("auto"),
        q0,
        p0,
        t_end,
        &opts,
    )?;
    let bytes = csv_bytes(|w| traj.write_csv(w))?;
    let summary = format!(
        "{} samples, energy drift {:e}",
        traj.len(),
        traj.energy_drift()
    );
    Ok(Outcome::csv(
        bytes,
        summary,
        to_json(&traj.metadata(Some(ctx.seed))),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodParams {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// Integration window in units of 2 pi [default: 1.5]
    #[arg(long)]
    pub periods: Option<f64>,
    /// Largest accepted return distance [default: 1e-6]
    #[arg(long)]
    pub return_tol: Option<f64>,
}

pub fn period(p: PeriodParams, ctx: &Ctx) -> CliResult<Outcome> {
    let osc = oscillator(p.system, p.c)?;
    let (q0, p0) = (req(p.q0, "q0")?, p.p0.unwrap_or(0.0));
    let t_end = p.periods.unwrap_or(1.5) * TAU;
    let traj = run_chart(
        &osc,
        "auto",
        q0,
        p0,
        t_end,
        &SolverOptions::new(ctx.tol(1e-11)),
    )?;
    let est = detect_period(&traj, p.return_tol.unwrap_or(1e-6))?;
    Ok(Outcome::json(
        json!({"system": osc.kind.as_str(), "c": osc.c, "q0": q0, "p0": p0, "period": est.period,
               "residual": est.residual, "deviation_from_2pi": est.period - TAU,
               "exploratory": osc.c < 0.0}),
        format!(
            "period = {:.10}{}",
            est.period,
            if osc.c < 0.0 {
                " (negative c, exploratory)"
            } else {
                ""
            }
        ),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonParams {
    #[arg(long)]
    pub c: Option<f64>,
    /// [default: 2]
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub p0: Option<f64>,
    /// [default: 2]
    #[arg(long)]
    pub periods: Option<f64>,
}

pub fn newton_check(p: NewtonParams, ctx: &Ctx) -> CliResult<Outcome> {
    let osc = build_oscillator(OscillatorKind::H2, p.c.unwrap_or(1.0))?;
    let (q0, p0) = (p.q0.unwrap_or(2.0), p.p0.unwrap_or(0.0));
    let t_end = p.periods.unwrap_or(2.0) * TAU;
    let traj = integrate_with(&osc, &[q0, p0], t_end, &SolverOptions::new(ctx.tol(1e-12)))?;
    let residual = newton_residual(&traj)?;
    Ok(Outcome::json(
        json!({"c": osc.c, "q0": q0, "p0": p0, "t_end": t_end, "max_residual": residual}),
        format!("max residual = {residual:e}"),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CScalingParams {
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub q0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

pub fn c_scaling(p: CScalingParams, ctx: &Ctx) -> CliResult<Outcome> {
    let r = c_scaling_check(
        p.c1.unwrap_or(1.0),
        p.c2.unwrap_or(2.0),
        p.q0.unwrap_or(2.0),
        p.t_end.unwrap_or(2.0 * TAU),
        ctx.tol(1e-11),
    )?;
    let summary = format!(
        "max q deviation {:e}, max p deviation {:e}",
        r.max_q_deviation, r.max_p_deviation
    );
    Ok(Outcome::json(to_json(&r), summary))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatrixParams {
    /// Matrix size [default: 2]
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling matrix as JSON rows [default: -I]
    #[arg(long, value_parser = json_arg::<Rows>)]
    pub a: Option<Rows>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Initial U as JSON rows [default: seeded random]
    #[arg(long, value_parser = json_arg::<Rows>)]
    pub u0: Option<Rows>,
    #[arg(long, value_parser = json_arg::<Rows>)]
    pub v0: Option<Rows>,
    /// [default: 20]
    #[arg(long)]
    pub t_end: Option<f64>,
}

fn dmatrix(rows: &[Vec<f64>], n: usize, name: &str) -> CliResult<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::usage(format!("{name} must be {n} x {n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn minus_identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { -1.0 } else { 0.0 }).collect())
        .collect()
}

fn size_of(n: Option<usize>, a: &Option<Vec<Vec<f64>>>) -> CliResult<usize> {
    let n = n.or(a.as_ref().map(|a| a.len())).unwrap_or(2);
    if n == 0 {
        return Err(CliError::usage("n must be positive"));
    }
    Ok(n)
}

pub fn matrix(p: MatrixParams, ctx: &Ctx) -> CliResult<Outcome> {
    let n = size_of(p.n, &p.a)?;
    let a = dmatrix(&p.a.unwrap_or_else(|| minus_identity(n)), n, "a")?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut random = || DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.5..0.5));
    let u0 = match &p.u0 {
        Some(r) => dmatrix(r, n, "u0")?,
        None => random(),
    };
    let v0 = match &p.v0 {
        Some(r) => dmatrix(r, n, "v0")?,
        None => random(),
    };
    let s0 = MatrixState::new(u0, v0)?;
    let traj = integrate_matrix(
        &a,
        p.b.unwrap_or(0.0),
        &s0,
        p.t_end.unwrap_or(20.0),
        ctx.tol(1e-12),
    )?;
    let bytes = csv_bytes(|w| traj.write_csv(w))?;
    let summary = format!(
        "{} samples, energy drift {:e}",
        traj.times.len(),
        traj.energy_drift()
    );
    let meta = json!({"run": to_json(&traj.metadata(Some(ctx.seed))), "u0": rows(&s0.u), "v0": rows(&s0.v)});
    Ok(Outcome::csv(bytes, summary, meta))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManyBodyParams {
    /// Number of bodies [default: 2]
    #[arg(long)]
    pub n: Option<usize>,
    /// Coupling matrix as JSON rows [default: -I]
    #[arg(long, value_parser = json_arg::<Rows>)]
    pub a: Option<Rows>,
    /// [default: 0.1]
    #[arg(long)]
    pub b: Option<f64>,
    /// Initial state as JSON {"r", "rho", "p", "pi"} [default: seeded random]
    #[arg(long, value_parser = json_arg::<ManyBodyState>)]
    pub state: Option<ManyBodyState>,
    /// Entry range of the random initial state [default: 0.3]
    #[arg(long)]
    pub scale: Option<f64>,
    /// [default: 10]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Random rotations tried by rotation-check [default: 100]
    #[arg(long)]
    pub rotations: Option<usize>,
}

fn manybody_setup(
    p: &ManyBodyParams,
    rng: &mut ChaCha8Rng,
) -> CliResult<(ManyBodyState, QuarticParams)> {
    let n = match &p.state {
        Some(s) => s.size(),
        None => size_of(p.n, &p.a)?,
    };
    let params = QuarticParams::new(
        p.a.clone().unwrap_or_else(|| minus_identity(n)),
        p.b.unwrap_or(0.1),
    )?;
    let state = match &p.state {
        Some(s) => s.clone(),
        None => ManyBodyState::random(n, p.scale.unwrap_or(0.3), rng),
    };
    Ok((state, params))
}

pub fn manybody(p: ManyBodyParams, ctx: &Ctx) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (s0, params) = manybody_setup(&p, &mut rng)?;
    let tol = ctx.tol(1e-12);
    let traj = quartic::integrate_manybody(&s0, &params, p.t_end.unwrap_or(10.0), tol)?;
    let bytes = csv_bytes(|w| quartic::write_trajectory_csv(&traj, s0.size(), w))?;
    let summary = format!(
        "{} samples, energy drift {:e}",
        traj.len(),
        traj.energy_drift()
    );
    let meta =
        json!({"run": to_json(&traj.metadata(Some(ctx.seed))), "initial_state": to_json(&s0)});
    Ok(Outcome::csv(bytes, summary, meta))
}

pub fn rotation_check(p: ManyBodyParams, ctx: &Ctx) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (s, params) = manybody_setup(&p, &mut rng)?;
    let h = quartic::evaluate_H(&s, &params)?;
    let count = p.rotations.unwrap_or(100);
    let mut max_abs: f64 = 0.0;
    for _ in 0..count {
        let rot = quartic::random_rotation(&mut rng);
        max_abs = max_abs.max(quartic::rotation_invariance_check(&s, &params, &rot)?);
    }
    let max_relative = max_abs / h.abs().max(f64::MIN_POSITIVE);
    Ok(Outcome::json(
        json!({"H": h, "rotations": count, "max_abs_deviation": max_abs, "max_relative_deviation": max_relative}),
        format!("max relative deviation {max_relative:e} over {count} rotations"),
    ))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub c: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub interval_lo: Option<f64>,
    #[arg(long)]
    pub interval_hi: Option<f64>,
    /// Number of grid intervals [default: 2048]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of eigenvalues [default: 3]
    #[arg(long)]
    pub k: Option<usize>,
    /// Also write the operator in coordinate format here
    #[arg(long)]
    pub operator_dump: Option<PathBuf>,
}

fn problem(which: OscillatorKind, c: f64, p: &SpectrumParams) -> CliResult<SpectralProblem> {
    let prob = SpectralProblem::new(
        which,
        c,
        p.hbar.unwrap_or(1.0),
        p.grid.unwrap_or(DEFAULT_GRID_POINTS),
    )?;
    Ok(match (p.interval_lo, p.interval_hi) {
        (None, None) => prob,
        (lo, hi) => {
            let (dlo, dhi) = prob.interval;
            prob.with_interval(lo.unwrap_or(dlo), hi.unwrap_or(dhi))?
        }
    })
}

pub fn spectrum(p: SpectrumParams) -> CliResult<Outcome> {
    let prob = problem(system(p.system.clone())?, p.c.unwrap_or(1.0), &p)?;
    if let Some(path) = &p.operator_dump {
        let op = build_quantum_operator(&prob)?;
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
        op.write_coordinate(&mut BufWriter::new(file))
            .map_err(|e| CliError::io("writing operator", e))?;
    }
    let res = ground_state(&prob, p.k.unwrap_or(3))?;
    let summary = format!(
        "E0 = {} +/- {:e}, eigenvalues {:?}",
        res.e0, res.e0_error, res.eigenvalues
    );
    let mut out = to_json(&res);
    out["truncation_within_error"] = json!(res.truncation_within_error());
    out["ordering"] = json!(ORDERING);
    out["boundary"] = json!(BOUNDARY);
    Ok(Outcome::json(out, summary))
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanParams {
    #[arg(long)]
    pub system: Option<String>,
    /// Comma-separated values of c
    #[arg(long, value_delimiter = ',')]
    pub c_values: Option<Vec<f64>>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub interval_lo: Option<f64>,
    #[arg(long)]
    pub interval_hi: Option<f64>,
    /// Number of grid intervals [default: 2048]
    #[arg(long)]
    pub grid: Option<usize>,
    /// Initial q of the classical cross-check (H2 only) [default: 2]
    #[arg(long)]
    pub q0: Option<f64>,
}

pub fn scan(p: ScanParams, ctx: &Ctx) -> CliResult<Outcome> {
    let which = system(p.system)?;
    let cs = req(p.c_values, "c_values")?;
    let interval = match (p.interval_lo, p.interval_hi) {
        (None, None) => None,
        (lo, hi) => {
            let (dlo, dhi) = oscq::schrodinger_spectra::default_interval(which);
            Some((lo.unwrap_or(dlo), hi.unwrap_or(dhi)))
        }
    };
    let result = e0_scan(
        which,
        &cs,
        p.hbar.unwrap_or(1.0),
        p.grid.unwrap_or(DEFAULT_GRID_POINTS),
        interval,
    )?;
    let bytes = csv_bytes(|w| result.write_csv(w))?;
    let mut classical = Vec::new();
    if which == OscillatorKind::H2 {
        for &c in cs.iter().skip(1) {
            let r = c_scaling_check(cs[0], c, p.q0.unwrap_or(2.0), TAU, ctx.tol(1e-11))?;
            classical.push(
                json!({"c1": cs[0], "c2": c, "max_q_deviation": r.max_q_deviation,
                                  "max_p_deviation": r.max_p_deviation}),
            );
        }
    }
    let separated = result.pairwise_separated(10.0);
    let summary = match result.spread {
        Some(s) => {
            format!("E0 spread over c: {s}, pairwise separated beyond 10x error: {separated}")
        }
        None => "single row, no variation statistic".into(),
    };
    let meta = json!({"rows": to_json(&result.rows), "spread": result.spread,
                      "pairwise_separated_10x": separated, "classical_cross_check": classical,
                      "ordering": ORDERING, "boundary": BOUNDARY});
    Ok(Outcome::csv(bytes, summary, meta))
}

pub fn selftest(_: NoParams, ctx: &Ctx) -> CliResult<Outcome> {
    let report = run_selftest(ctx.seed);
    let lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )
        })
        .collect();
    let mut out = Outcome::json(to_json(&report), lines.join("\n"));
    out.failed = !report.passed();
    Ok(out)
}
