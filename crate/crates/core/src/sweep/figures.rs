//! Datasets behind the published figure panels.
//!
//! Each panel is a set of curves over one x axis. Curves are labelled `m=1`,
//! `m=2`, ... for catalyzed inputs, `svs` for the uncatalyzed reference
//! (η = 1, m = 0), and `sql` / `hl` for the photon-number benchmarks.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalysis::SystemParams;
use crate::engine::{ClosedForm, PhaseEngine};
use crate::error::{Error, Result};
use crate::ideal::benchmarks;
use crate::lossy::LossChannel;
use crate::oracle::FockOracle;
use crate::sweep::format::format_float;
use crate::sweep::optimize::{EtaOptimizer, EtaSearch};
use crate::sweep::runner::solve_alpha;

pub const FIGURE_IDS: [&str; 28] = [
    "2a", "2b", "3a", "3b", "4a", "4b", "5a", "5b", "5c", "5d", "6a", "6b", "7a", "7b", "8", "9a", "9b", "11a",
    "11b", "12a", "12b", "14a", "14b", "15a", "15b", "15c", "16a", "16b",
];

/// Largest number of rows re-evaluated by the oracle in a cross-check.
pub const CROSSCHECK_POINTS: usize = 25;
pub const CROSSCHECK_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XAxis {
    Eta,
    R,
    Alpha,
    Phi,
    Nbar,
    T,
}

impl XAxis {
    pub fn name(self) -> &'static str {
        match self {
            XAxis::Eta => "eta",
            XAxis::R => "r",
            XAxis::Alpha => "alpha",
            XAxis::Phi => "phi",
            XAxis::Nbar => "nbar",
            XAxis::T => "t",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    MeanPhotonB,
    Parity,
    Sensitivity,
    /// Δφ at the optimal η for the curve's (α, r, m).
    SensitivityAtEtaOpt,
    EtaOpt,
    Qfi,
    Qcrb,
    FQl,
    QcrbL,
    SensitivityLossy { channel: LossChannel },
    Sql,
    Hl,
}

/// Parameters of one curve before the x coordinate is applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveParams {
    pub alpha: f64,
    pub r: f64,
    pub eta: f64,
    pub m: u32,
    pub phi: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub quantity: Quantity,
    #[serde(flatten)]
    pub params: CurveParams,
    /// Uncatalyzed reference: η and m stay at 1 and 0 whatever the x axis.
    pub svs: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    /// `start + k·step` up to `stop`, rounded to 12 decimals.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

const PHI_FULL: AxisRange = AxisRange::new(-PI, PI, 0.01);
const PHI_UNIT: AxisRange = AxisRange::new(-1.0, 1.0, 0.01);
const ETA_RANGE: AxisRange = AxisRange::new(0.01, 1.0, 0.01);
const R_RANGE: AxisRange = AxisRange::new(0.01, 1.2, 0.01);
const ALPHA_RANGE: AxisRange = AxisRange::new(0.0, 2.0, 0.01);
const NBAR_RANGE: AxisRange = AxisRange::new(0.02, 4.0, 0.02);
const T_RANGE: AxisRange = AxisRange::new(0.01, 1.0, 0.01);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureDef {
    pub id: String,
    pub x: XAxis,
    pub y: &'static str,
    pub x_range: AxisRange,
    pub curves: Vec<Curve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_search: Option<EtaSearch>,
}

fn base(alpha: f64, r: f64, eta: f64, phi: f64, t: f64) -> CurveParams {
    CurveParams { alpha, r, eta, m: 0, phi, t }
}

fn catalyzed(p: CurveParams, q: Quantity) -> Vec<Curve> {
    (1..=3)
        .map(|m| Curve {
            label: format!("m={m}"),
            quantity: q,
            params: CurveParams { m, ..p },
            svs: false,
        })
        .collect()
}

fn svs(p: CurveParams, q: Quantity) -> Curve {
    Curve {
        label: "svs".to_string(),
        quantity: q,
        params: CurveParams { eta: 1.0, m: 0, ..p },
        svs: true,
    }
}

fn with_svs(p: CurveParams, q: Quantity) -> Vec<Curve> {
    let mut c = catalyzed(p, q);
    c.push(svs(p, q));
    c
}

fn benchmark_curves(p: CurveParams) -> [Curve; 2] {
    [("sql", Quantity::Sql), ("hl", Quantity::Hl)].map(|(label, quantity)| Curve {
        label: label.to_string(),
        quantity,
        params: p,
        svs: false,
    })
}

fn lossy_curves(p: CurveParams) -> Vec<Curve> {
    let mut curves = Vec::new();
    for channel in [LossChannel::External, LossChannel::Internal] {
        for mut c in with_svs(p, Quantity::SensitivityLossy { channel }) {
            c.label = format!("{} {}", c.label, channel.name());
            curves.push(c);
        }
    }
    curves
}

/// Panel definition for a figure id.
pub fn definition(id: &str) -> Result<FigureDef> {
    use Quantity::*;
    let nan = f64::NAN;
    let def = |x: XAxis, y: &'static str, x_range: AxisRange, curves: Vec<Curve>| FigureDef {
        id: id.to_string(),
        x,
        y,
        x_range,
        curves,
        eta_search: None,
    };
    let fig = match id {
        "2a" => def(XAxis::Eta, "nbar_b", ETA_RANGE, catalyzed(base(0.0, 0.9, nan, nan, nan), MeanPhotonB)),
        "2b" => def(XAxis::R, "nbar_b", R_RANGE, with_svs(base(0.0, nan, 0.2, nan, nan), MeanPhotonB)),
        "3a" => def(XAxis::Phi, "parity", PHI_FULL, with_svs(base(1.0, 0.9, 0.2, nan, nan), Parity)),
        "3b" => {
            let p = base(1.0, 0.9, nan, nan, nan);
            let mut curves: Vec<Curve> = [0.1, 0.2, 0.3]
                .iter()
                .map(|&eta| Curve {
                    label: format!("eta={eta}"),
                    quantity: Parity,
                    params: CurveParams { eta, m: 2, ..p },
                    svs: false,
                })
                .collect();
            curves.push(svs(p, Parity));
            def(XAxis::Phi, "parity", PHI_FULL, curves)
        }
        "4a" | "4b" => {
            let p = base(1.0, 0.9, nan, nan, nan);
            let (y, curves) = if id == "4a" {
                let mut c = catalyzed(p, SensitivityAtEtaOpt);
                c.push(svs(p, Sensitivity));
                ("delta_phi", c)
            } else {
                ("eta_opt", catalyzed(p, EtaOpt))
            };
            FigureDef {
                eta_search: Some(EtaSearch::default()),
                ..def(XAxis::Phi, y, PHI_UNIT, curves)
            }
        }
        "5a" | "5b" | "5c" | "5d" => {
            let alpha = match id {
                "5a" => 0.0,
                "5b" => 0.25,
                "5c" => 0.35,
                _ => 0.45,
            };
            def(XAxis::R, "delta_phi", R_RANGE, with_svs(base(alpha, nan, 0.1, 1e-4, nan), Sensitivity))
        }
        "6a" => def(XAxis::Alpha, "delta_phi", ALPHA_RANGE, with_svs(base(nan, 0.4, 0.1, 1e-4, nan), Sensitivity)),
        "6b" => {
            let p = base(nan, 0.4, 0.1, 1e-4, nan);
            let mut c = with_svs(p, Sensitivity);
            c.extend(benchmark_curves(p));
            def(XAxis::Nbar, "delta_phi", NBAR_RANGE, c)
        }
        "7a" => def(XAxis::Eta, "qfi", ETA_RANGE, with_svs(base(1.0, 0.9, nan, nan, nan), Qfi)),
        "7b" => def(XAxis::R, "qfi", R_RANGE, with_svs(base(1.0, nan, 0.2, nan, nan), Qfi)),
        "8" => def(XAxis::Alpha, "qfi", ALPHA_RANGE, with_svs(base(nan, 0.4, 0.1, nan, nan), Qfi)),
        "9a" => def(XAxis::Nbar, "qfi", NBAR_RANGE, with_svs(base(nan, 0.4, 0.1, nan, nan), Qfi)),
        "9b" => {
            let p = base(nan, 0.4, 0.1, nan, nan);
            let mut c = with_svs(p, Qcrb);
            c.extend(benchmark_curves(p));
            def(XAxis::Nbar, "qcrb", NBAR_RANGE, c)
        }
        "11a" => def(XAxis::T, "delta_phi_l", T_RANGE, lossy_curves(base(0.2, 0.4, 0.1, 0.5, nan))),
        "11b" => def(XAxis::Phi, "delta_phi_l", PHI_FULL, lossy_curves(base(0.2, 0.4, 0.1, nan, 0.95))),
        "12a" => def(XAxis::R, "delta_phi_l", R_RANGE, lossy_curves(base(0.2, nan, 0.1, 0.5, 0.95))),
        "12b" => def(XAxis::Alpha, "delta_phi_l", ALPHA_RANGE, lossy_curves(base(nan, 0.9, 0.1, 0.5, 0.95))),
        "14a" => def(XAxis::T, "f_ql", T_RANGE, with_svs(base(1.0, 0.9, 0.2, nan, nan), FQl)),
        "14b" => def(XAxis::Eta, "f_ql", ETA_RANGE, with_svs(base(1.0, 0.9, nan, nan, 0.9), FQl)),
        "15a" => def(XAxis::R, "f_ql", R_RANGE, with_svs(base(1.0, nan, 0.2, nan, 0.9), FQl)),
        "15b" => def(XAxis::Alpha, "f_ql", ALPHA_RANGE, with_svs(base(nan, 0.4, 0.1, nan, 0.9), FQl)),
        "15c" => def(XAxis::Nbar, "f_ql", NBAR_RANGE, with_svs(base(nan, 0.4, 0.1, nan, 0.9), FQl)),
        "16a" | "16b" => {
            let t = if id == "16a" { 0.9 } else { 0.5 };
            let p = base(nan, 0.4, 0.1, nan, t);
            let mut c = with_svs(p, QcrbL);
            c.extend(benchmark_curves(p));
            def(XAxis::Nbar, "qcrb_l", NBAR_RANGE, c)
        }
        other => {
            return Err(Error::config(format!(
                "unknown figure `{other}` (known: {})",
                FIGURE_IDS.join(", ")
            )))
        }
    };
    Ok(fig)
}

/// A curve's parameters at one x coordinate, with α solved for `nbar` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedPoint {
    pub params: SystemParams,
    pub phi: f64,
    pub t: f64,
    pub nbar: Option<f64>,
}

pub fn resolve(x_axis: XAxis, curve: &Curve, x: f64) -> Result<ResolvedPoint> {
    let mut c = curve.params;
    let mut nbar = None;
    match x_axis {
        XAxis::Eta => c.eta = x,
        XAxis::R => c.r = x,
        XAxis::Alpha => c.alpha = x,
        XAxis::Phi => c.phi = x,
        XAxis::T => c.t = x,
        XAxis::Nbar => nbar = Some(x),
    }
    if curve.svs {
        c.eta = 1.0;
        c.m = 0;
    }
    if let Some(n) = nbar {
        c.alpha = match curve.quantity {
            Quantity::Sql | Quantity::Hl => 0.0,
            _ => solve_alpha(c.r, c.eta, c.m, n)?,
        };
    }
    let params = match curve.quantity {
        Quantity::EtaOpt | Quantity::SensitivityAtEtaOpt => SystemParams::new(c.alpha, c.r, 1.0, c.m)?,
        Quantity::Sql | Quantity::Hl if nbar.is_some() => SystemParams::new(0.0, 0.0, 1.0, 0)?,
        _ => SystemParams::new(c.alpha, c.r, c.eta, c.m)?,
    };
    Ok(ResolvedPoint {
        params,
        phi: c.phi,
        t: c.t,
        nbar,
    })
}

fn evaluate(engine: &dyn PhaseEngine, q: Quantity, pt: &ResolvedPoint) -> Result<f64> {
    let p = &pt.params;
    let nbar = || match pt.nbar {
        Some(n) => Ok(n),
        None => engine.nbar(p),
    };
    match q {
        Quantity::MeanPhotonB => engine.mean_photon_b(p),
        Quantity::Parity => engine.parity(p, pt.phi),
        Quantity::Sensitivity => engine.sensitivity(p, pt.phi),
        Quantity::Qfi => engine.qfi(p),
        Quantity::Qcrb => engine.qcrb(p),
        Quantity::FQl => engine.qfi_lossy(p, pt.t),
        Quantity::QcrbL => engine.qcrb_lossy(p, pt.t),
        Quantity::SensitivityLossy { channel } => engine.sensitivity_lossy(p, pt.phi, channel, pt.t),
        Quantity::Sql => Ok(benchmarks(nbar()?)?.0),
        Quantity::Hl => Ok(benchmarks(nbar()?)?.1),
        Quantity::EtaOpt | Quantity::SensitivityAtEtaOpt => {
            Err(Error::domain("eta optimization needs an optimizer"))
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureRow {
    pub x: f64,
    pub curve: usize,
    pub value: Result<f64, String>,
    /// η at which an optimized value was attained.
    pub eta_opt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckPoint {
    pub x: f64,
    pub curve: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub tolerance: f64,
    pub max_rel: f64,
    pub passed: bool,
    pub points: Vec<CheckPoint>,
    /// Sampled rows the oracle could not evaluate, with the error code.
    pub failures: Vec<(f64, String, String)>,
}

#[derive(Debug, Clone)]
pub struct FigureData {
    pub def: FigureDef,
    pub rows: Vec<FigureRow>,
    pub crosscheck: Option<CrossCheck>,
}

struct Optimizers(HashMap<usize, EtaOptimizer>);

impl Optimizers {
    fn build(def: &FigureDef) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, c) in def.curves.iter().enumerate() {
            if matches!(c.quantity, Quantity::EtaOpt | Quantity::SensitivityAtEtaOpt) {
                let p = SystemParams::new(c.params.alpha, c.params.r, 1.0, c.params.m)?;
                map.insert(i, EtaOptimizer::new(&p, def.eta_search.unwrap_or_default())?);
            }
        }
        Ok(Self(map))
    }
}

fn closed_form_row(def: &FigureDef, opt: &Optimizers, curve: usize, x: f64) -> FigureRow {
    let c = &def.curves[curve];
    let (value, eta_opt) = match resolve(def.x, c, x) {
        Err(e) => (Err(e), None),
        Ok(pt) => match c.quantity {
            Quantity::EtaOpt | Quantity::SensitivityAtEtaOpt => match opt.0[&curve].optimize(pt.phi) {
                Ok(r) if c.quantity == Quantity::EtaOpt => (Ok(r.eta_opt), Some(r.eta_opt)),
                Ok(r) => (Ok(r.sensitivity_at_opt), Some(r.eta_opt)),
                Err(e) => (Err(e), None),
            },
            q => (evaluate(&ClosedForm, q, &pt), None),
        },
    };
    FigureRow {
        x,
        curve,
        value: value.map_err(|e| e.code().to_string()),
        eta_opt,
    }
}

/// Closed-form and oracle values of the quantity compared in a cross-check.
/// For optimized rows this is Δφ at the optimal η.
fn check_pair(def: &FigureDef, row: &FigureRow, oracle: &FockOracle) -> Result<(f64, f64)> {
    let c = &def.curves[row.curve];
    let pt = resolve(def.x, c, row.x)?;
    match (c.quantity, row.eta_opt) {
        (Quantity::EtaOpt | Quantity::SensitivityAtEtaOpt, Some(eta)) => {
            let p = pt.params.with_eta(eta);
            Ok((ClosedForm.sensitivity(&p, pt.phi)?, oracle.sensitivity(&p, pt.phi)?))
        }
        (q, _) => Ok((evaluate(&ClosedForm, q, &pt)?, evaluate(oracle, q, &pt)?)),
    }
}

fn crosscheck(def: &FigureDef, rows: &[FigureRow]) -> CrossCheck {
    let ok: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].value.is_ok()).collect();
    let mut picks: Vec<usize> = if ok.len() <= CROSSCHECK_POINTS {
        ok.clone()
    } else {
        (0..CROSSCHECK_POINTS).map(|k| ok[k * (ok.len() - 1) / (CROSSCHECK_POINTS - 1)]).collect()
    };
    picks.dedup();
    let oracle = FockOracle::default();
    let results: Vec<(usize, Result<(f64, f64)>)> = picks
        .par_iter()
        .map(|&i| (i, check_pair(def, &rows[i], &oracle)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut max_rel = 0.0f64;
    for (i, r) in results {
        let row = &rows[i];
        let label = def.curves[row.curve].label.clone();
        match r {
            Ok((cf, or)) => {
                let rel = (cf - or).abs() / cf.abs().max(f64::MIN_POSITIVE);
                max_rel = max_rel.max(if rel.is_nan() { f64::INFINITY } else { rel });
                points.push(CheckPoint {
                    x: row.x,
                    curve: label,
                    closed_form: cf,
                    oracle: or,
                    rel,
                });
            }
            Err(e) => failures.push((row.x, label, e.code().to_string())),
        }
    }
    CrossCheck {
        tolerance: CROSSCHECK_TOLERANCE,
        max_rel,
        passed: failures.is_empty() && max_rel <= CROSSCHECK_TOLERANCE,
        points,
        failures,
    }
}

/// Evaluate a figure panel with the closed form, optionally followed by an
/// oracle pass over at most [`CROSSCHECK_POINTS`] rows.
pub fn figure(id: &str, with_crosscheck: bool) -> Result<FigureData> {
    let def = definition(id)?;
    let opt = Optimizers::build(&def)?;
    let xs = def.x_range.values();
    let jobs: Vec<(usize, f64)> = (0..def.curves.len()).flat_map(|c| xs.iter().map(move |&x| (c, x))).collect();
    let rows: Vec<FigureRow> = jobs.par_iter().map(|&(c, x)| closed_form_row(&def, &opt, c, x)).collect();
    let crosscheck = with_crosscheck.then(|| crosscheck(&def, &rows));
    Ok(FigureData { def, rows, crosscheck })
}

impl FigureData {
    /// Tidy table: `<x>,curve,<y>,status`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},curve,{},status\n", self.def.x.name(), self.def.y);
        for row in &self.rows {
            let (value, status) = match &row.value {
                Ok(v) => (format_float(*v), "ok"),
                Err(code) => ("nan".to_string(), code.as_str()),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                format_float(row.x),
                self.def.curves[row.curve].label,
                value,
                status
            ));
        }
        out
    }

    /// Parameters used for the panel, plus the cross-check when one was run.
    pub fn sidecar(&self) -> Value {
        let d = &self.def;
        let mut v = json!({
            "figure": d.id,
            "x": {
                "name": d.x.name(),
                "start": d.x_range.start,
                "stop": d.x_range.stop,
                "step": d.x_range.step,
                "count": d.x_range.values().len(),
            },
            "y": d.y,
            "curves": d.curves.iter().map(curve_json).collect::<Vec<_>>(),
            "engine": "closed_form",
        });
        if let Some(s) = &d.eta_search {
            v["eta_search"] = serde_json::to_value(s).expect("plain struct");
        }
        if let Some(c) = &self.crosscheck {
            v["crosscheck"] = serde_json::to_value(c).expect("plain struct");
        }
        v
    }

    pub fn values(&self, curve_label: &str) -> Vec<(f64, Result<f64, String>)> {
        self.rows
            .iter()
            .filter(|r| self.def.curves[r.curve].label == curve_label)
            .map(|r| (r.x, r.value.clone()))
            .collect()
    }
}

fn curve_json(c: &Curve) -> Value {
    let mut v = serde_json::Map::new();
    v.insert("label".into(), json!(c.label));
    v.insert("quantity".into(), serde_json::to_value(c.quantity).expect("plain enum"));
    v.insert("svs".into(), json!(c.svs));
    let p = &c.params;
    for (name, x) in [("alpha", p.alpha), ("r", p.r), ("eta", p.eta), ("phi", p.phi), ("t", p.t)] {
        if x.is_finite() {
            v.insert(name.into(), json!(x));
        }
    }
    v.insert("m".into(), json!(p.m));
    Value::Object(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_has_a_definition() {
        for id in FIGURE_IDS {
            let d = definition(id).unwrap();
            assert!(!d.curves.is_empty(), "{id}");
        }
        assert!(matches!(definition("10"), Err(Error::Config(_))));
    }

    #[test]
    fn axis_values() {
        let v = PHI_UNIT.values();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[100], 0.0);
        assert_eq!(v[200], 1.0);
        assert_eq!(ETA_RANGE.values().len(), 100);
        assert_eq!(PHI_FULL.values().len(), 629);
    }

    #[test]
    fn figure_2a_rows() {
        let f = figure("2a", false).unwrap();
        assert_eq!(f.rows.len(), 300);
        let csv = f.to_csv();
        assert!(csv.starts_with("eta,curve,nbar_b,status\n"));
        let unit: Vec<_> = f.values("m=2").into_iter().filter(|(x, _)| *x == 1.0).collect();
        let sinh2 = 0.9f64.sinh().powi(2);
        assert!((unit[0].1.clone().unwrap() - sinh2).abs() < 1e-10);
    }

    #[test]
    fn svs_curve_ignores_eta_axis() {
        let d = definition("7a").unwrap();
        let svs = d.curves.iter().find(|c| c.svs).unwrap();
        let a = resolve(d.x, svs, 0.3).unwrap();
        assert_eq!((a.params.eta, a.params.m), (1.0, 0));
    }

    #[test]
    fn nbar_rows_mark_infeasible_points() {
        let f = figure("9b", false).unwrap();
        let m3 = f.values("m=3");
        assert!(m3.iter().any(|(_, v)| v.as_ref().err().map(String::as_str) == Some("infeasible")));
        let sql = f.values("sql");
        assert!(sql.iter().all(|(x, v)| (v.clone().unwrap() - 1.0 / x.sqrt()).abs() < 1e-15));
    }
}
