//! Tabular reports written by the command-line tool.
//!
//! Every report is a header plus rows of scalar cells, written either as CSV
//! or as JSON of the form `{"meta": {command, parameters, version}, "rows":
//! [{header: value, ...}]}`. Floats use the shortest representation that
//! round-trips.

use crate::dressed::{build_dressed_basis, populations_general, CouplingRatios, PopulationSample};
use crate::leakage::leakage_scan;
use crate::propagator::{
    compare_analytic_numeric, compare_trace, integrate, propagate_kick, IntegratorConfig,
    LevelEnergies, PropagatorError,
};
use crate::pulses::{harmonic_for_condition, Pulse};
use crate::transfer::{
    classify_cases, condition_from_odd_pair, enumerate_conditions, validate_condition,
    ConditionError, OddPair, TransferCondition,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use thiserror::Error;

/// `|1 − P₂(t₀)|`, `P₁` and `P₃` allowed by `verify`.
pub const VERIFY_ANALYTIC_TOL: f64 = 1e-12;
/// Largest RK4-vs-analytic deviation allowed by `verify`.
pub const VERIFY_RK4_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error("bad grid spec `{spec}`: {reason}")]
    Grid { spec: String, reason: String },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:?}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

impl From<&Cell> for Value {
    fn from(c: &Cell) -> Self {
        match c {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &str, header: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            parameters: Map::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.clone(), Value::from(c)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "meta": {
                "command": self.command,
                "parameters": self.parameters,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "rows": rows,
        })
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<(), ReportError> {
        serde_json::to_writer_pretty(&mut writer, &self.to_json())?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn write<W: Write>(&self, format: Format, writer: W) -> Result<(), ReportError> {
        match format {
            Format::Csv => self.write_csv(writer),
            Format::Json => self.write_json(writer),
        }
    }
}

/// One row per `(n₁, n₂)` with `n₁n₂ ≤ max_product` (the `r > 0` member,
/// `β = +1`), sorted by `n₁n₂` then `n₁`.
pub fn table_report(max_product: i64) -> Report {
    let mut report = Report::new(
        "table",
        &[
            "n1",
            "n2",
            "n_e",
            "n_o",
            "n_op",
            "k_case_i",
            "kp_case_i",
            "k_case_ii",
            "kp_case_ii",
            "k_case_iii",
            "kp_case_iii",
            "A_t0",
            "alpha",
        ],
    )
    .param("max_product", max_product)
    .param("beta", 1);
    for c in enumerate_conditions(max_product)
        .iter()
        .filter(|c| c.sign == 1)
    {
        let k = classify_cases(c);
        report.push(vec![
            c.n1.into(),
            c.n2.into(),
            c.pair.n_e().into(),
            c.pair.n_o().into(),
            c.pair.n_op().into(),
            k.case_i.0.into(),
            k.case_i.1.into(),
            k.case_ii.0.into(),
            k.case_ii.1.into(),
            k.case_iii.0.into(),
            k.case_iii.1.into(),
            c.action_t0.into(),
            c.alpha.into(),
        ]);
    }
    report
}

/// Harmonic drive with `ω = 1` and `V₀ = action_t0`, analytic and RK4
/// populations side by side; `t` in units of the period.
pub fn trace_report(
    alpha: f64,
    beta: f64,
    action_t0: f64,
    periods: f64,
    config: &IntegratorConfig,
) -> Result<Report, ReportError> {
    if !(periods > 0.0 && periods.is_finite()) {
        return Err(ReportError::InvalidArgument(format!(
            "periods must be positive, got {periods}"
        )));
    }
    let pulse = Pulse::harmonic(action_t0, 1.0).map_err(PropagatorError::from)?;
    let period = 2.0 * PI;
    let cmp = compare_trace(
        &CouplingRatios::new(alpha, beta),
        &pulse,
        periods * period,
        config,
    )?;
    let mut report = Report::new(
        "trace",
        &["t", "p1", "p2", "p3", "p1_num", "p2_num", "p3_num"],
    )
    .param("alpha", alpha)
    .param("beta", beta)
    .param("area", action_t0)
    .param("periods", periods)
    .param("omega", 1.0)
    .param("steps_per_period", config.steps_per_period as u64)
    .param("max_deviation", cmp.max_deviation)
    .param("norm_drift", cmp.trace.norm_drift);
    for ((t, a), n) in cmp
        .trace
        .times
        .iter()
        .zip(&cmp.analytic)
        .zip(&cmp.trace.samples)
    {
        report.push(vec![
            (t / period).into(),
            a.p1.into(),
            a.p2.into(),
            a.p3.into(),
            n.p1.into(),
            n.p2.into(),
            n.p3.into(),
        ]);
    }
    Ok(report)
}

/// Outcome of `verify` for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub condition: TransferCondition,
    pub alpha_used: f64,
    pub analytic: PopulationSample,
    pub analytic_error: f64,
    pub rk4_deviation: f64,
    pub identities: bool,
    pub pass: bool,
}

/// Check one condition, optionally with `α` shifted by `perturb_alpha`.
pub fn verify_condition(
    cond: &TransferCondition,
    perturb_alpha: f64,
    config: &IntegratorConfig,
) -> Result<VerifyOutcome, ReportError> {
    let alpha = cond.alpha + perturb_alpha;
    let ratios = CouplingRatios::new(alpha, cond.beta);
    let basis = build_dressed_basis(&ratios).map_err(PropagatorError::from)?;
    let analytic = populations_general(&basis, cond.action_t0);
    let level = cond.target.level();
    let analytic_error = (1..=3)
        .map(|k| {
            let want = if k == level { 1.0 } else { 0.0 };
            (analytic.level(k) - want).abs()
        })
        .fold(0.0, f64::max);
    let pulse = harmonic_for_condition(cond, 1.0).map_err(PropagatorError::from)?;
    let rk4_deviation = compare_analytic_numeric(&ratios, &pulse, 2.0 * PI, config)?;
    let identities = cond.integer_identities_hold();
    let pass =
        analytic_error <= VERIFY_ANALYTIC_TOL && rk4_deviation < VERIFY_RK4_TOL && identities;
    Ok(VerifyOutcome {
        condition: *cond,
        alpha_used: alpha,
        analytic,
        analytic_error,
        rk4_deviation,
        identities,
        pass,
    })
}

/// Pass/fail per sign-resolved condition with `n₁n₂ ≤ max_product`.
pub fn verify_report(
    max_product: i64,
    perturb_alpha: f64,
    config: &IntegratorConfig,
) -> Result<(Report, bool), ReportError> {
    let outcomes: Vec<VerifyOutcome> = enumerate_conditions(max_product)
        .par_iter()
        .map(|c| verify_condition(c, perturb_alpha, config))
        .collect::<Result<_, _>>()?;
    let all_pass = outcomes.iter().all(|o| o.pass);
    let mut report = Report::new(
        "verify",
        &[
            "n1",
            "n2",
            "sign",
            "alpha",
            "A_t0",
            "p2_analytic",
            "analytic_error",
            "rk4_deviation",
            "identities",
            "pass",
        ],
    )
    .param("max_product", max_product)
    .param("perturb_alpha", perturb_alpha)
    .param("steps_per_period", config.steps_per_period as u64)
    .param("all_pass", all_pass);
    for o in &outcomes {
        let c = &o.condition;
        report.push(vec![
            c.n1.into(),
            c.n2.into(),
            c.sign.into(),
            o.alpha_used.into(),
            c.action_t0.into(),
            o.analytic.p2.into(),
            o.analytic_error.into(),
            o.rk4_deviation.into(),
            o.identities.into(),
            o.pass.into(),
        ]);
    }
    Ok((report, all_pass))
}

/// Parse `name:v` or `name:start:stop:count` axes separated by commas, e.g.
/// `omega12:0:0.1:5,omega13:0`. Axes are `omega12` and `omega13`; a missing
/// axis is 0. Returns the Cartesian product, `omega12` outermost.
pub fn parse_grid(spec: &str) -> Result<Vec<(f64, f64)>, ReportError> {
    let err = |reason: String| ReportError::Grid {
        spec: spec.to_string(),
        reason,
    };
    let mut axes: [Option<Vec<f64>>; 2] = [None, None];
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let fields: Vec<&str> = part.split(':').map(str::trim).collect();
        let slot = match fields[0] {
            "omega12" => 0,
            "omega13" => 1,
            other => return Err(err(format!("unknown axis `{other}`"))),
        };
        if axes[slot].is_some() {
            return Err(err(format!("axis `{}` given twice", fields[0])));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("`{s}` is not a finite number")))
        };
        let values = match fields.len() {
            2 => vec![num(fields[1])?],
            4 => {
                let (start, stop) = (num(fields[1])?, num(fields[2])?);
                let count: usize = fields[3]
                    .parse()
                    .map_err(|_| err(format!("`{}` is not a count", fields[3])))?;
                match count {
                    0 => return Err(err("count must be >= 1".into())),
                    1 => vec![start],
                    n => (0..n)
                        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                        .collect(),
                }
            }
            _ => {
                return Err(err(format!(
                    "`{part}` must be name:value or name:start:stop:count"
                )))
            }
        };
        axes[slot] = Some(values);
    }
    let [w12, w13] = axes.map(|a| a.unwrap_or_else(|| vec![0.0]));
    Ok(w12
        .iter()
        .flat_map(|&a| w13.iter().map(move |&b| (a, b)))
        .collect())
}

/// Deficit `1 − P₂(t₀)` over a grid of absolute splittings at drive
/// frequency `omega`, next to the perturbative estimate at `t₀`.
pub fn leakage_report(
    pair: OddPair,
    grid: &str,
    omega: f64,
    config: &IntegratorConfig,
) -> Result<Report, ReportError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(ReportError::InvalidArgument(format!(
            "omega must be positive, got {omega}"
        )));
    }
    let cond = condition_from_odd_pair(pair, 1, 1)?;
    let ratios: Vec<(f64, f64)> = parse_grid(grid)?
        .into_iter()
        .map(|(a, b)| (a / omega, b / omega))
        .collect();
    let rows = leakage_scan(&cond, omega, &ratios, config)?;
    let mut report = Report::new(
        "leakage",
        &["omega12_ratio", "omega13_ratio", "deficit", "estimate"],
    )
    .param("n_o", pair.n_o())
    .param("n_op", pair.n_op())
    .param("n1", cond.n1)
    .param("n2", cond.n2)
    .param("grid", grid)
    .param("omega", omega)
    .param("steps_per_period", config.steps_per_period as u64);
    if cond.n1 == cond.n2 {
        report = report.param(
            "caveat",
            "n1 = n2: the leading-order estimate vanishes identically; measured deficit is higher order",
        );
    }
    for r in rows {
        report.push(vec![
            r.omega12_ratio.into(),
            r.omega13_ratio.into(),
            r.deficit.into(),
            r.estimate.delta_p2.into(),
        ]);
    }
    Ok(report)
}

/// Populations after a kick of area `kick_area`: the spectral ideal kick
/// (`width = 0`) followed by RK4 runs of Gaussian kicks of each width, with
/// levels split by `splittings = (ω₁₂, ω₁₃)`.
pub fn kick_report(
    alpha: f64,
    beta: f64,
    kick_area: f64,
    widths: &[f64],
    splittings: (f64, f64),
    config: &IntegratorConfig,
) -> Result<Report, ReportError> {
    if let Some(w) = widths.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(ReportError::InvalidArgument(format!(
            "widths must be positive, got {w}"
        )));
    }
    let ratios = CouplingRatios::new(alpha, beta);
    let basis = build_dressed_basis(&ratios).map_err(PropagatorError::from)?;
    let ideal = propagate_kick(&basis, kick_area).populations();
    let energies = LevelEnergies::from_splittings(splittings.0, splittings.1);

    let gaussian: Vec<PopulationSample> = widths
        .par_iter()
        .map(|&w| {
            let center = 8.0 * w + 0.5;
            let pulse =
                Pulse::gaussian_kick(kick_area, center, w).map_err(PropagatorError::from)?;
            let nominal = 2.0 * PI / config.steps_per_period.max(1) as f64;
            let cfg = IntegratorConfig {
                dt: Some(config.dt.unwrap_or(nominal).min(w / 40.0)),
                ..*config
            };
            let trace = integrate(&ratios, &energies, &pulse, center + 8.0 * w, &cfg)?;
            Ok(trace.last().expect("non-empty").1)
        })
        .collect::<Result<_, ReportError>>()?;

    let mut report = Report::new("kick", &["width", "p1", "p2", "p3", "deviation"])
        .param("alpha", alpha)
        .param("beta", beta)
        .param("area", kick_area)
        .param("widths", widths.to_vec())
        .param("omega12", splittings.0)
        .param("omega13", splittings.1);
    report.push(vec![
        0.0.into(),
        ideal.p1.into(),
        ideal.p2.into(),
        ideal.p3.into(),
        0.0.into(),
    ]);
    for (w, p) in widths.iter().zip(&gaussian) {
        report.push(vec![
            (*w).into(),
            p.p1.into(),
            p.p2.into(),
            p.p3.into(),
            p.max_abs_diff(&ideal).into(),
        ]);
    }
    Ok(report)
}

/// Family lookup for `(α, β, A(t₀))`; one row, `matched = false` if none.
pub fn conditions_report(alpha: f64, beta: f64, action_t0: f64, tol: f64) -> Report {
    let mut report = Report::new(
        "conditions",
        &[
            "matched", "n1", "n2", "n_o", "n_op", "sign", "alpha", "beta", "A_t0", "p3_max",
        ],
    )
    .param("alpha", alpha)
    .param("beta", beta)
    .param("area", action_t0)
    .param("tol", tol);
    match validate_condition(alpha, beta, action_t0, tol) {
        Some(c) => report.push(vec![
            true.into(),
            c.n1.into(),
            c.n2.into(),
            c.pair.n_o().into(),
            c.pair.n_op().into(),
            c.sign.into(),
            c.alpha.into(),
            c.beta.into(),
            c.action_t0.into(),
            crate::transfer::p3_max(&c).into(),
        ]),
        None => report.push(vec![
            false.into(),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            alpha.into(),
            beta.into(),
            action_t0.into(),
            Cell::Text(String::new()),
        ]),
    }
    report
}
