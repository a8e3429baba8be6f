//! Scenario runner behind the `ppslab` binary.
//!
//! Every scenario produces a [`Table`] through library calls only; the table
//! is then written as CSV (17 significant digits) or JSON. Grids run on the
//! rayon pool, rows are collected in grid order.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connection::{classify, connection_state, norm_bound_check, weak_value, CLASSIFY_TOL};
use crate::dynamics::{connection_state_at, evolve_connection_ode, HamiltonianSchedule};
use crate::dynamics::csv_err;
use crate::error::{Error, Result};
use crate::measurement::connection_variance;
use crate::meter::{pointer_expectation_pps, MeterConfig, Profile};
use crate::qmcore::{kets, min_eigenvalue, operator_norm, pauli, ComplexMatrix, DensityMatrix, Observable, PovmElement};
use crate::random;
use crate::tomography::{
    detector_tomography, detector_weak_values, reconstruct_connection, simulate_weak_value_data,
    weak_values_from_strong_pps, OperatorBasis,
};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    UncertaintyScan,
    AmplificationScan,
    DynamicsTrace,
    TomographyRoundtrip,
    DetectorTomography,
    MeterSweep,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::UncertaintyScan,
        ScenarioName::AmplificationScan,
        ScenarioName::DynamicsTrace,
        ScenarioName::TomographyRoundtrip,
        ScenarioName::DetectorTomography,
        ScenarioName::MeterSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::UncertaintyScan => "uncertainty-scan",
            ScenarioName::AmplificationScan => "amplification-scan",
            ScenarioName::DynamicsTrace => "dynamics-trace",
            ScenarioName::TomographyRoundtrip => "tomography-roundtrip",
            ScenarioName::DetectorTomography => "detector-tomography",
            ScenarioName::MeterSweep => "meter-sweep",
        }
    }
}

impl std::str::FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// A scenario with its parameters (the JSON config object) and seed.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    pub params: serde_json::Value,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioName) -> Self {
        ScenarioConfig { scenario, params: serde_json::Value::Object(Default::default()), seed: 0 }
    }

    pub fn with_params(mut self, params: serde_json::Value) -> Self {
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Int(n) => write!(f, "{n}"),
            Cell::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Column headers plus rows of cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write<W: Write>(&self, out: W, format: OutputFormat) -> Result<()> {
        match format {
            OutputFormat::Csv => {
                let mut wtr = csv::Writer::from_writer(out);
                wtr.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    wtr.write_record(row.iter().map(|c| c.to_string())).map_err(csv_err)?;
                }
                wtr.flush()?;
            }
            OutputFormat::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, self)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

fn parse<T: for<'de> Deserialize<'de>>(params: &serde_json::Value) -> Result<T> {
    serde_json::from_value(params.clone()).map_err(|e| Error::Parse(e.to_string()))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Table> {
    match cfg.scenario {
        ScenarioName::UncertaintyScan => {
            let p: UncertaintyParams = parse(&cfg.params)?;
            uncertainty_table(p.grid_n)
        }
        ScenarioName::AmplificationScan => {
            let p: AmplificationParams = parse(&cfg.params)?;
            amplification_table(&p.overlaps)
        }
        ScenarioName::DynamicsTrace => dynamics_trace(&parse(&cfg.params)?),
        ScenarioName::TomographyRoundtrip => tomography_roundtrip(&parse(&cfg.params)?, cfg.seed),
        ScenarioName::DetectorTomography => detector_scenario(&parse(&cfg.params)?, cfg.seed),
        ScenarioName::MeterSweep => meter_sweep(&parse(&cfg.params)?),
    }
}

// ---------------------------------------------------------------- uncertainty

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UncertaintyParams {
    #[serde(default = "default_grid")]
    grid_n: usize,
}

fn default_grid() -> usize {
    101
}

/// `ρ = (I + λ₁σ₁)/2` and `E = (I + λ₂σ₂)/2`.
pub fn qubit_ensemble(lambda1: f64, lambda2: f64) -> Result<(DensityMatrix, PovmElement)> {
    let id = ComplexMatrix::identity(2);
    let rho = DensityMatrix::new((&id + &pauli::x().scale_real(lambda1)).scale_real(0.5))?;
    let e = PovmElement::new((&id + &pauli::y().scale_real(lambda2)).scale_real(0.5))?;
    Ok((rho, e))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyRow {
    pub lambda1: f64,
    pub lambda2: f64,
    pub var_sum: f64,
    pub wprime_min_eig: f64,
    pub violates: bool,
    pub w_unusual: bool,
}

/// The `grid_n × grid_n` scan over `[-1, 1]²`, λ₁ outer, λ₂ inner.
pub fn uncertainty_scan(grid_n: usize) -> Result<Vec<UncertaintyRow>> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument("grid_n must be at least 2".into()));
    }
    let s1 = Observable::new(pauli::x())?;
    let s2 = Observable::new(pauli::y())?;
    let axis: Vec<f64> = (0..grid_n).map(|k| -1.0 + 2.0 * k as f64 / (grid_n - 1) as f64).collect();
    (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let (lambda1, lambda2) = (axis[idx / grid_n], axis[idx % grid_n]);
            let (rho, e) = qubit_ensemble(lambda1, lambda2)?;
            let w = connection_state(&rho, &e)?;
            let var_sum = connection_variance(&s1, &w)? + connection_variance(&s2, &w)?;
            Ok(UncertaintyRow {
                lambda1,
                lambda2,
                var_sum,
                wprime_min_eig: min_eigenvalue(w.hermitian_part()),
                violates: var_sum < 1.0 - 1e-12,
                w_unusual: !classify(&w, CLASSIFY_TOL).is_usual(),
            })
        })
        .collect()
}

fn uncertainty_table(grid_n: usize) -> Result<Table> {
    let mut t = Table::new(&["lambda1", "lambda2", "var_sum", "wprime_min_eig", "violates", "w_unusual"]);
    for r in uncertainty_scan(grid_n)? {
        t.rows.push(vec![
            Cell::Float(r.lambda1),
            Cell::Float(r.lambda2),
            Cell::Float(r.var_sum),
            Cell::Float(r.wprime_min_eig),
            Cell::Bool(r.violates),
            Cell::Bool(r.w_unusual),
        ]);
    }
    Ok(t)
}

// -------------------------------------------------------------- amplification

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplificationParams {
    #[serde(default = "default_overlaps")]
    overlaps: Vec<f64>,
}

fn default_overlaps() -> Vec<f64> {
    vec![1.0, std::f64::consts::FRAC_1_SQRT_2, 0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplificationRow {
    pub overlap: f64,
    pub norm: f64,
    pub c_herm: f64,
    pub c_antiherm: f64,
    pub bound_holds: bool,
}

/// `|ψ> = |0>`, `|φ> = cos θ|0> + sin θ|1>` with `cos θ = overlap`.
pub fn amplification_scan(overlaps: &[f64]) -> Result<Vec<AmplificationRow>> {
    let rho = DensityMatrix::pure(&kets::zero())?;
    overlaps
        .iter()
        .map(|&overlap| {
            if !(overlap > 0.0 && overlap <= 1.0) {
                return Err(Error::InvalidArgument(format!("overlap {overlap} not in (0, 1]")));
            }
            let sin = (1.0 - overlap * overlap).max(0.0).sqrt();
            let e = PovmElement::pure(&[C64::new(overlap, 0.0), C64::new(sin, 0.0)])?;
            let nb = norm_bound_check(&connection_state(&rho, &e)?);
            Ok(AmplificationRow {
                overlap,
                norm: nb.norm,
                c_herm: nb.c_herm,
                c_antiherm: nb.c_antiherm,
                bound_holds: nb.holds,
            })
        })
        .collect()
}

fn amplification_table(overlaps: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["overlap", "norm", "c_herm", "c_antiherm", "bound_holds"]);
    for r in amplification_scan(overlaps)? {
        t.rows.push(vec![
            Cell::Float(r.overlap),
            Cell::Float(r.norm),
            Cell::Float(r.c_herm),
            Cell::Float(r.c_antiherm),
            Cell::Bool(r.bound_holds),
        ]);
    }
    Ok(t)
}

// ------------------------------------------------------------------- dynamics

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    #[default]
    Exact,
    Ode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DynamicsParams {
    rho: Option<ComplexMatrix>,
    effect: Option<ComplexMatrix>,
    schedule: Option<HamiltonianSchedule>,
    #[serde(default = "default_dt")]
    dt: f64,
    #[serde(default)]
    method: Method,
}

fn default_dt() -> f64 {
    0.05
}

fn dynamics_trace(p: &DynamicsParams) -> Result<Table> {
    let rho = match &p.rho {
        Some(m) => DensityMatrix::new(m.clone())?,
        None => DensityMatrix::pure(&kets::zero())?,
    };
    let e = match &p.effect {
        Some(m) => PovmElement::new(m.clone())?,
        None => PovmElement::pure(&kets::plus())?,
    };
    let sched = match &p.schedule {
        Some(s) => s.clone(),
        None => HamiltonianSchedule::constant(pauli::z().scale_real(0.5), 0.0, 1.0)?,
    };
    if !(p.dt > 0.0) {
        return Err(Error::InvalidArgument("dt must be positive".into()));
    }
    let (t0, t1) = (sched.start(), sched.end());
    let points: Vec<(f64, ComplexMatrix)> = match p.method {
        Method::Exact => {
            let n = ((t1 - t0) / p.dt).ceil().max(1.0) as usize;
            (0..=n)
                .map(|k| {
                    let t = if k == n { t1 } else { t0 + k as f64 * p.dt };
                    Ok((t, connection_state_at(&rho, &e, &sched, t0, t, t1)?.matrix().clone()))
                })
                .collect::<Result<_>>()?
        }
        Method::Ode => {
            let w0 = connection_state_at(&rho, &e, &sched, t0, t0, t1)?;
            evolve_connection_ode(&w0, &sched, t0, t1, p.dt)?.into_iter().map(|pt| (pt.t, pt.w.matrix().clone())).collect()
        }
    };
    let d = rho.dim();
    let mut cols = vec!["t".to_string()];
    for i in 0..d {
        for j in 0..d {
            cols.push(format!("w_{i}_{j}_re"));
            cols.push(format!("w_{i}_{j}_im"));
        }
    }
    let mut t = Table { columns: cols, rows: Vec::new() };
    for (time, w) in points {
        let mut row = vec![Cell::Float(time)];
        for z in w.row_major() {
            row.push(Cell::Float(z.re));
            row.push(Cell::Float(z.im));
        }
        t.rows.push(row);
    }
    Ok(t)
}

// ----------------------------------------------------------------- tomography

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomographyParams {
    #[serde(default = "default_dims")]
    dims: Vec<usize>,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default)]
    sigma: f64,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3, 4]
}

fn default_trials() -> usize {
    10
}

fn trial_seed(seed: u64, a: u64, b: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (a << 32) ^ b
}

fn tomography_roundtrip(p: &TomographyParams, seed: u64) -> Result<Table> {
    let cases: Vec<(usize, usize)> = p.dims.iter().flat_map(|&d| (0..p.trials).map(move |k| (d, k))).collect();
    let rows = cases
        .par_iter()
        .map(|&(d, k)| {
            let s = trial_seed(seed, d as u64, k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let w = connection_state(&random::density(&mut rng, d), &random::effect(&mut rng, d))?;
            let basis = OperatorBasis::standard(d)?;
            let probes = basis.as_probes()?;
            let data = simulate_weak_value_data(&w, &probes, p.sigma, s)?;
            let rec = reconstruct_connection(&data, &probes, &basis)?;
            Ok(vec![
                Cell::Int(d as u64),
                Cell::Int(k as u64),
                Cell::Float(p.sigma),
                Cell::Float(operator_norm(&(rec.w.matrix() - w.matrix()))),
                Cell::Float(rec.residual_norm),
                Cell::Float(rec.trace_deviation),
                Cell::Bool(rec.renormalized),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["dim", "trial", "sigma", "error_op", "residual_norm", "trace_deviation", "renormalized"]);
    t.rows = rows;
    Ok(t)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DataPath {
    #[default]
    Weak,
    Strong,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorParams {
    effect: Option<ComplexMatrix>,
    #[serde(default)]
    sigma: f64,
    #[serde(default = "one")]
    trials: usize,
    #[serde(default)]
    data_path: DataPath,
}

fn one() -> usize {
    1
}

fn detector_scenario(p: &DetectorParams, seed: u64) -> Result<Table> {
    let e = match &p.effect {
        Some(m) => PovmElement::new(m.clone())?,
        None => PovmElement::new(ComplexMatrix::diag(&[0.9, 0.1]))?,
    };
    let d = e.dim();
    let basis = OperatorBasis::standard(d)?;
    let probes = basis.as_probes()?;
    let exact = match p.data_path {
        DataPath::Weak => detector_weak_values(&e, &probes)?,
        DataPath::Strong => weak_values_from_strong_pps(&e, &probes)?,
    };
    let prob = e.matrix().trace().re / d as f64;
    let normal = rand_distr::Normal::new(0.0, p.sigma).map_err(|err| Error::InvalidArgument(err.to_string()))?;
    let mut t = Table::new(&["trial", "sigma", "post_selection_prob", "error_op", "trace_effect", "min_eigenvalue"]);
    for k in 0..p.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, d as u64, k as u64));
        let data: Vec<C64> = exact
            .iter()
            .map(|z| *z + C64::new(rand_distr::Distribution::sample(&normal, &mut rng), rand_distr::Distribution::sample(&normal, &mut rng)))
            .collect();
        let rec = detector_tomography(&data, &probes, &basis, prob, p.sigma)?;
        t.rows.push(vec![
            Cell::Int(k as u64),
            Cell::Float(p.sigma),
            Cell::Float(prob),
            Cell::Float(operator_norm(&(rec.matrix() - e.matrix()))),
            Cell::Float(rec.matrix().trace().re),
            Cell::Float(min_eigenvalue(rec.matrix())),
        ]);
    }
    Ok(t)
}

// ---------------------------------------------------------------------- meter

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeterSweepParams {
    rho: Option<ComplexMatrix>,
    effect: Option<ComplexMatrix>,
    observable: Option<ComplexMatrix>,
    #[serde(default = "default_couplings")]
    couplings: Vec<f64>,
    #[serde(rename = "dim_M", default = "default_dim_m")]
    dim_m: usize,
    #[serde(rename = "L", default = "default_half_length")]
    half_length: f64,
    #[serde(default = "default_width")]
    width: f64,
    #[serde(default)]
    momentum: f64,
}

fn default_couplings() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 5.0]
}

fn default_dim_m() -> usize {
    32
}

fn default_half_length() -> f64 {
    8.0
}

fn default_width() -> f64 {
    1.0
}

fn meter_sweep(p: &MeterSweepParams) -> Result<Table> {
    let rho = match &p.rho {
        Some(m) => DensityMatrix::new(m.clone())?,
        None => DensityMatrix::pure(&kets::zero())?,
    };
    let e = match &p.effect {
        Some(m) => PovmElement::new(m.clone())?,
        None => PovmElement::pure(&kets::real_angle(0.4 * std::f64::consts::PI))?,
    };
    let a = Observable::new(p.observable.clone().unwrap_or_else(pauli::z))?;
    let aw = weak_value(&a, &connection_state(&rho, &e)?)?;
    let base_cfg = MeterConfig {
        dim_m: p.dim_m,
        half_length: p.half_length,
        width: p.width,
        g: 0.0,
        profile: Profile::Gaussian,
        momentum: p.momentum,
    };
    let base = base_cfg.build()?.initial_pointer();
    let rows = p
        .couplings
        .par_iter()
        .map(|&g| {
            let meter = base_cfg.with_coupling(g).build()?;
            let r = pointer_expectation_pps(&rho, &e, &a, &meter)?;
            let slope = if g == 0.0 { f64::NAN } else { (r - base) / g };
            Ok(vec![Cell::Float(g), Cell::Float(r), Cell::Float(slope), Cell::Float(aw.re), Cell::Float(aw.im)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["g", "pointer_pps", "shift_over_g", "re_weak_value", "im_weak_value"]);
    t.rows = rows;
    Ok(t)
}
