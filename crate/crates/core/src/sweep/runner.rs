//! Evaluation of a [`SweepSpec`] over its grid.

use rayon::prelude::*;

use crate::catalysis::{mean_photon_b, SystemParams};
use crate::engine::{ClosedForm, EngineKind, PhaseEngine};
use crate::error::{Error, Result};
use crate::ideal::benchmarks;
use crate::lossy::LossChannel;
use crate::oracle::FockOracle;
use crate::sweep::format::{Cell, Table};
use crate::sweep::spec::{AxisName, GridPoint, Output, SweepSpec};

/// Delta measure for paired engine columns: `|cf − oracle| / max(1, |cf|)`.
pub fn scaled_delta(cf: f64, oracle: f64) -> f64 {
    (cf - oracle).abs() / cf.abs().max(1.0)
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub table: Table,
    /// Largest scaled delta between engines; zero unless the engine is `both`.
    pub max_scaled_delta: f64,
    /// True when no grid point produced any finite output.
    pub all_degenerate: bool,
}

/// Resolve α for an `nbar` target from the closed-form n̄_b of (r, η, m).
pub fn solve_alpha(r: f64, eta: f64, m: u32, nbar: f64) -> Result<f64> {
    let nb = mean_photon_b(&SystemParams::new(0.0, r, eta, m)?)?;
    if !(nbar >= nb) {
        return Err(Error::Infeasible(format!("total photon number {nbar} is below n_b = {nb}")));
    }
    Ok((nbar - nb).sqrt())
}

fn resolve(pt: &GridPoint) -> Result<SystemParams> {
    let mut pt = *pt;
    if let Some(target) = pt.nbar_target {
        pt.alpha = solve_alpha(pt.r, pt.eta, pt.m, target)?;
    }
    pt.params()
}

fn phase(pt: &GridPoint) -> Result<f64> {
    pt.phi.ok_or_else(|| Error::config("phase required but not set"))
}

/// One output at one grid point.
pub fn evaluate_output(engine: &dyn PhaseEngine, pt: &GridPoint, out: Output) -> Result<f64> {
    let p = resolve(pt)?;
    let loss = &pt.loss;
    match out {
        Output::Parity => engine.parity(&p, phase(pt)?),
        Output::Sensitivity => engine.sensitivity(&p, phase(pt)?),
        Output::Qfi => engine.qfi(&p),
        Output::Qcrb => engine.qcrb(&p),
        Output::Sql => Ok(benchmarks(engine.nbar(&p)?)?.0),
        Output::Hl => Ok(benchmarks(engine.nbar(&p)?)?.1),
        Output::Nbar => engine.nbar(&p),
        Output::Pm => engine.success_probability(&p),
        Output::FQl => engine.qfi_lossy(&p, loss.t),
        Output::QcrbL => engine.qcrb_lossy(&p, loss.t),
        Output::ParityExt => engine.parity_lossy(&p, phase(pt)?, LossChannel::External, loss.t1),
        Output::ParityInt => engine.parity_lossy(&p, phase(pt)?, LossChannel::Internal, loss.t2),
        Output::SensitivityExt => engine.sensitivity_lossy(&p, phase(pt)?, LossChannel::External, loss.t1),
        Output::SensitivityInt => engine.sensitivity_lossy(&p, phase(pt)?, LossChannel::Internal, loss.t2),
    }
}

fn columns(spec: &SweepSpec) -> Vec<String> {
    let mut cols: Vec<String> = spec.swept.iter().map(|a| a.name.name().to_string()).collect();
    if spec.swept.iter().any(|a| a.name == AxisName::Nbar) {
        cols.push("alpha".to_string());
    }
    for o in &spec.outputs {
        let name = o.name();
        match spec.engine {
            EngineKind::Both => {
                for suffix in ["cf", "oracle", "absdelta", "reldelta"] {
                    cols.push(format!("{name}_{suffix}"));
                }
            }
            _ => cols.push(name.to_string()),
        }
    }
    cols.push("error".to_string());
    cols
}

struct RowResult {
    cells: Vec<Cell>,
    delta: f64,
    any_finite: bool,
}

fn value_cell(r: &Result<f64>) -> Cell {
    Cell::Num(*r.as_ref().unwrap_or(&f64::NAN))
}

fn note(errors: &mut Vec<String>, out: Output, tag: &str, e: &Error) {
    let entry = if tag.is_empty() {
        format!("{}={}", out.name(), e.code())
    } else {
        format!("{}[{tag}]={}", out.name(), e.code())
    };
    errors.push(entry);
}

fn evaluate_row(spec: &SweepSpec, coords: &[f64], pt: &GridPoint, oracle: &FockOracle) -> RowResult {
    let mut cells: Vec<Cell> = coords.iter().map(|&v| Cell::Num(v)).collect();
    let mut errors = Vec::new();
    let mut delta = 0.0f64;
    let mut any_finite = false;

    if let Some(target) = pt.nbar_target {
        match solve_alpha(pt.r, pt.eta, pt.m, target) {
            Ok(a) => cells.push(Cell::Num(a)),
            Err(_) => {
                cells.push(Cell::Num(f64::NAN));
                let width = match spec.engine {
                    EngineKind::Both => 4 * spec.outputs.len(),
                    _ => spec.outputs.len(),
                };
                cells.extend(std::iter::repeat(Cell::Num(f64::NAN)).take(width));
                cells.push(Cell::from("infeasible"));
                return RowResult { cells, delta, any_finite };
            }
        }
    }

    for &out in &spec.outputs {
        match spec.engine {
            EngineKind::ClosedForm | EngineKind::Oracle => {
                let engine: &dyn PhaseEngine = if spec.engine == EngineKind::Oracle { oracle } else { &ClosedForm };
                let r = evaluate_output(engine, pt, out);
                match &r {
                    Ok(v) => any_finite |= v.is_finite(),
                    Err(e) => note(&mut errors, out, "", e),
                }
                cells.push(value_cell(&r));
            }
            EngineKind::Both => {
                let cf = evaluate_output(&ClosedForm, pt, out);
                let or = evaluate_output(oracle, pt, out);
                let (abs, rel) = match (&cf, &or) {
                    (Ok(a), Ok(b)) => {
                        any_finite |= a.is_finite();
                        let d = scaled_delta(*a, *b);
                        delta = delta.max(if d.is_nan() { f64::INFINITY } else { d });
                        ((a - b).abs(), (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
                    }
                    (Err(e1), Err(e2)) if e1.code() == e2.code() => {
                        note(&mut errors, out, "", e1);
                        (f64::NAN, f64::NAN)
                    }
                    _ => {
                        if let Err(e) = &cf {
                            note(&mut errors, out, "cf", e);
                        }
                        if let Err(e) = &or {
                            note(&mut errors, out, "oracle", e);
                        }
                        delta = f64::INFINITY;
                        (f64::NAN, f64::NAN)
                    }
                };
                cells.extend([value_cell(&cf), value_cell(&or), Cell::Num(abs), Cell::Num(rel)]);
            }
        }
    }
    cells.push(Cell::Text(errors.join(";")));
    RowResult { cells, delta, any_finite }
}

/// Evaluate every grid point. Points run in parallel; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let oracle = FockOracle::new(spec.n_max);
    let grid = spec.grid();
    let rows: Vec<RowResult> = grid
        .par_iter()
        .map(|(coords, pt)| evaluate_row(spec, coords, pt, &oracle))
        .collect();

    let mut table = Table::new(columns(spec));
    let mut max_scaled_delta = 0.0f64;
    let mut any_finite = false;
    for row in rows {
        max_scaled_delta = max_scaled_delta.max(row.delta);
        any_finite |= row.any_finite;
        table.rows.push(row.cells);
    }
    Ok(SweepReport {
        table,
        max_scaled_delta,
        all_degenerate: !any_finite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::phase_sensitivity;

    #[test]
    fn closed_form_sweep_matches_direct_calls() {
        let spec = SweepSpec::from_json(
            r#"{"fixed": {"alpha": 1.0, "r": 0.9, "m": 2, "phi": 0.3},
                "swept": [{"name": "eta", "start": 0.1, "stop": 0.5, "steps": 3}],
                "outputs": ["parity", "sensitivity", "nbar"]}"#,
        )
        .unwrap();
        let rep = run_sweep(&spec).unwrap();
        assert_eq!(rep.table.columns, ["eta", "parity", "sensitivity", "nbar", "error"]);
        let eta = rep.table.rows[1][0].as_f64().unwrap();
        let s = rep.table.rows[1][2].as_f64().unwrap();
        let p = SystemParams::new(1.0, 0.9, eta, 2).unwrap();
        assert_eq!(s, phase_sensitivity(&p, 0.3).unwrap());
        assert!(!rep.all_degenerate);
        assert_eq!(rep.max_scaled_delta, 0.0);
    }

    #[test]
    fn degenerate_points_are_recorded() {
        let spec = SweepSpec::from_json(
            r#"{"fixed": {"alpha": 1.0, "r": 0.9, "m": 1, "eta": 0.2},
                "swept": [{"name": "phi", "start": 0.0, "stop": 0.0, "steps": 2}],
                "outputs": ["sensitivity"]}"#,
        )
        .unwrap();
        let rep = run_sweep(&spec).unwrap();
        assert!(rep.all_degenerate);
        assert_eq!(rep.table.rows[0][2], Cell::from("sensitivity=degenerate"));
    }

    #[test]
    fn nbar_axis_solves_alpha() {
        let spec = SweepSpec::from_json(
            r#"{"fixed": {"r": 0.4, "eta": 0.1, "m": 2},
                "swept": [{"name": "nbar", "start": 0.01, "stop": 3.0, "steps": 5}],
                "outputs": ["nbar", "qcrb"]}"#,
        )
        .unwrap();
        let rep = run_sweep(&spec).unwrap();
        let t = &rep.table;
        assert_eq!(t.rows[0][t.columns.len() - 1], Cell::from("infeasible"));
        let nb = mean_photon_b(&SystemParams::new(0.0, 0.4, 0.1, 2).unwrap()).unwrap();
        let feasible: Vec<_> = t.rows.iter().filter(|r| r[4] == Cell::from("")).collect();
        assert!(feasible.len() >= 3);
        for row in feasible {
            let (target, alpha) = (row[0].as_f64().unwrap(), row[1].as_f64().unwrap());
            assert!((alpha * alpha + nb - target).abs() < 1e-10);
            assert!((row[2].as_f64().unwrap() - target).abs() < 1e-10);
        }
    }

    #[test]
    fn both_engines_agree_at_a_point() {
        let spec = SweepSpec::from_json(
            r#"{"engine": "both", "fixed": {"alpha": 1.0, "r": 0.9, "m": 2, "phi": 0.3},
                "swept": [{"name": "eta", "start": 0.2, "stop": 0.5, "steps": 2}],
                "outputs": ["parity", "qfi", "pm"]}"#,
        )
        .unwrap();
        let rep = run_sweep(&spec).unwrap();
        assert!(rep.max_scaled_delta < 1e-8, "{}", rep.max_scaled_delta);
        assert_eq!(rep.table.columns.len(), 1 + 12 + 1);
    }
}
