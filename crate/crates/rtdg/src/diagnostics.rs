//! Error norms, convergence tables and their CSV form.

use rayon::prelude::*;

use crate::basis::gauss_legendre;
use crate::mesh::CartesianMesh;
use crate::scenarios::Scenario;
use crate::solver::{Simulation, TimeControls};
use crate::space::{FieldState, RtElement};
use crate::{Error, Result};

/// L2 norm of the difference between the discrete field and an exact field,
/// integrated with the (k+2)-point Gauss rule used everywhere else in the
/// scheme.
pub fn l2_field_error<F>(mesh: &CartesianMesh, state: &FieldState, exact: F) -> f64
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let element = RtElement::new(state.k).expect("state degree");
    let tab = element.tabulate(&gauss_legendre(state.k + 2).expect("rule"));
    let nq = tab.points.len();
    let cell_sums: Vec<f64> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let mut local = vec![0.0; element.dof_count()];
            state.gather_cell(mesh, cell, &mut local);
            let (x0, y0) = mesh.cell_origin(cell);
            let mut sum = 0.0;
            for qx in 0..nq {
                for qy in 0..nq {
                    let (bx, by) = element.eval_tab(&local, &tab, qx, qy);
                    let (ex, ey) =
                        exact(x0 + tab.points[qx] * mesh.dx, y0 + tab.points[qy] * mesh.dy);
                    let w = tab.weights[qx] * tab.weights[qy];
                    sum += w * ((bx - ex) * (bx - ex) + (by - ey) * (by - ey));
                }
            }
            sum * mesh.dx * mesh.dy
        })
        .collect();
    cell_sums.iter().sum::<f64>().sqrt()
}

/// L2 norm of the discrete divergence. The integrand is a polynomial of
/// degree 2k per direction, so the (k+1)-point rule is exact.
pub fn l2_div_norm(mesh: &CartesianMesh, state: &FieldState) -> f64 {
    let element = RtElement::new(state.k).expect("state degree");
    let tab = element.tabulate(&gauss_legendre(state.k + 1).expect("rule"));
    let nq = tab.points.len();
    let cell_sums: Vec<f64> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let mut local = vec![0.0; element.dof_count()];
            state.gather_cell(mesh, cell, &mut local);
            let mut sum = 0.0;
            for qx in 0..nq {
                for qy in 0..nq {
                    let d = element.div_tab(&local, &tab, qx, qy, mesh.dx, mesh.dy);
                    sum += tab.weights[qx] * tab.weights[qy] * d * d;
                }
            }
            sum * mesh.dx * mesh.dy
        })
        .collect();
    cell_sums.iter().sum::<f64>().sqrt()
}

/// L2 norm of `div(B_h) - exact_div`. The divergence error carries one more
/// quadrature point than the field error; the exact divergence of the smooth
/// test fields varies faster than the fields themselves.
pub fn l2_div_error<F>(mesh: &CartesianMesh, state: &FieldState, exact_div: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let element = RtElement::new(state.k).expect("state degree");
    let tab = element.tabulate(&gauss_legendre(state.k + 3).expect("rule"));
    let nq = tab.points.len();
    let cell_sums: Vec<f64> = (0..mesh.cell_count())
        .into_par_iter()
        .map(|cell| {
            let mut local = vec![0.0; element.dof_count()];
            state.gather_cell(mesh, cell, &mut local);
            let (x0, y0) = mesh.cell_origin(cell);
            let mut sum = 0.0;
            for qx in 0..nq {
                for qy in 0..nq {
                    let d = element.div_tab(&local, &tab, qx, qy, mesh.dx, mesh.dy);
                    let e = exact_div(x0 + tab.points[qx] * mesh.dx, y0 + tab.points[qy] * mesh.dy);
                    sum += tab.weights[qx] * tab.weights[qy] * (d - e) * (d - e);
                }
            }
            sum * mesh.dx * mesh.dy
        })
        .collect();
    cell_sums.iter().sum::<f64>().sqrt()
}

/// One mesh level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub h: f64,
    pub error: f64,
    pub rate: Option<f64>,
    pub div_norm: f64,
    pub div_error: Option<f64>,
    pub div_rate: Option<f64>,
}

/// Convergence table over a refinement sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    /// Append a level and fill the observed rates against the previous row:
    /// rate = log(e_prev / e) / log(h_prev / h).
    pub fn push(&mut self, h: f64, error: f64, div_norm: f64, div_error: Option<f64>) {
        let (rate, div_rate) = match self.rows.last() {
            Some(prev) => {
                let denom = (prev.h / h).ln();
                let rate = (prev.error / error).ln() / denom;
                let div_rate = match (prev.div_error, div_error) {
                    (Some(p), Some(c)) => Some((p / c).ln() / denom),
                    _ => None,
                };
                (Some(rate), div_rate)
            }
            None => (None, None),
        };
        self.rows.push(ErrorRow {
            h,
            error,
            rate,
            div_norm,
            div_error,
            div_rate,
        });
    }

    pub fn has_div_error(&self) -> bool {
        self.rows.iter().any(|r| r.div_error.is_some())
    }

    /// Console table mirroring the usual h / error / rate / div columns.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.has_div_error() {
            out.push_str("       h        error   rate     div_error  div_rate      div_norm\n");
            for r in &self.rows {
                out.push_str(&format!(
                    "{:8.4}   {:10.4e}  {}   {:10.4e}    {}    {:10.4e}\n",
                    r.h,
                    r.error,
                    fmt_rate(r.rate),
                    r.div_error.unwrap_or(f64::NAN),
                    fmt_rate(r.div_rate),
                    r.div_norm,
                ));
            }
        } else {
            out.push_str("       h        error   rate      div_norm\n");
            for r in &self.rows {
                out.push_str(&format!(
                    "{:8.4}   {:10.4e}  {}    {:10.4e}\n",
                    r.h,
                    r.error,
                    fmt_rate(r.rate),
                    r.div_norm,
                ));
            }
        }
        out
    }

    /// CSV with columns h, error, rate, div_norm and, when an exact
    /// divergence is available, div_error, div_rate.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.has_div_error() {
            out.push_str("h,error,rate,div_norm,div_error,div_rate\n");
        } else {
            out.push_str("h,error,rate,div_norm\n");
        }
        for r in &self.rows {
            out.push_str(&format!(
                "{:.16e},{:.16e},{}",
                r.h,
                r.error,
                r.rate.map_or(String::new(), |v| format!("{v:.16e}"))
            ));
            out.push_str(&format!(",{:.16e}", r.div_norm));
            if self.has_div_error() {
                out.push_str(&format!(
                    ",{},{}",
                    r.div_error.map_or(String::new(), |v| format!("{v:.16e}")),
                    r.div_rate.map_or(String::new(), |v| format!("{v:.16e}"))
                ));
            }
            out.push('\n');
        }
        out
    }

    /// Parse a table emitted by `to_csv`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Config("empty CSV table".into()))?;
        let with_div_error = header.split(',').count() == 6;
        let mut report = ErrorReport::default();
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let expected = if with_div_error { 6 } else { 4 };
            if fields.len() != expected {
                return Err(Error::Config(format!(
                    "CSV row has {} fields, expected {expected}: {line}",
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::Config(format!("bad CSV number {s:?}")))
            };
            let opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    parse(s).map(Some)
                }
            };
            report.rows.push(ErrorRow {
                h: parse(fields[0])?,
                error: parse(fields[1])?,
                rate: opt(fields[2])?,
                div_norm: parse(fields[3])?,
                div_error: if with_div_error {
                    opt(fields[4])?
                } else {
                    None
                },
                div_rate: if with_div_error {
                    opt(fields[5])?
                } else {
                    None
                },
            });
        }
        Ok(report)
    }
}

fn fmt_rate(r: Option<f64>) -> String {
    match r {
        Some(v) => format!("{v:5.2}"),
        None => "    -".into(),
    }
}

/// Outcome of one mesh level of a study.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub cells: usize,
    pub h: f64,
    pub error: f64,
    pub div_norm: f64,
    pub div_error: Option<f64>,
    pub steps: usize,
    pub max_div_norm: f64,
}

/// Project (and, for evolution scenarios, advance) one mesh level and
/// measure its errors. `t_final` overrides the scenario's final time.
pub fn run_level(
    sc: &Scenario,
    k: usize,
    cells: usize,
    cfl: f64,
    t_final: Option<f64>,
) -> Result<LevelResult> {
    let mesh = sc.mesh(cells)?;
    let state = sc.initial_state(&mesh, k)?;
    let t_end = t_final.or(sc.t_final);
    let (state, steps, max_div) = match t_end {
        Some(t_end) if t_end > 0.0 => {
            let sim = Simulation::new(&mesh, k, sc)?;
            let mut controls = TimeControls::new(t_end);
            controls.cfl = cfl;
            let result = sim.run(state, &controls)?;
            let max_div = result.max_div_norm();
            (result.state, result.steps, max_div)
        }
        _ => {
            let max_div = l2_div_norm(&mesh, &state);
            (state, 0, max_div)
        }
    };
    let t_measure = t_end.unwrap_or(0.0);
    let error = match sc.exact_at(t_measure) {
        Some(exact) => l2_field_error(&mesh, &state, exact),
        None => f64::NAN,
    };
    let div_norm = l2_div_norm(&mesh, &state);
    let div_error = sc
        .exact_div_at(t_measure)
        .map(|div| l2_div_error(&mesh, &state, div));
    Ok(LevelResult {
        cells,
        h: mesh.dx,
        error,
        div_norm,
        div_error,
        steps,
        max_div_norm: max_div,
    })
}

/// Refinement study: run `refinements` levels starting from `base_cells`,
/// doubling the resolution each time. `progress` sees every finished level;
/// on failure the caller keeps whatever levels `progress` already saw.
pub fn convergence_study<F>(
    sc: &Scenario,
    k: usize,
    base_cells: usize,
    refinements: usize,
    cfl: f64,
    t_final: Option<f64>,
    mut progress: F,
) -> Result<ErrorReport>
where
    F: FnMut(&LevelResult, &ErrorReport),
{
    let mut report = ErrorReport::default();
    for level in 0..refinements.max(1) {
        let cells = base_cells << level;
        let result = run_level(sc, k, cells, cfl, t_final)?;
        report.push(result.h, result.error, result.div_norm, result.div_error);
        progress(&result, &report);
    }
    Ok(report)
}

/// Run configuration assembled from a key=value file and CLI overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub degree: usize,
    pub cells: usize,
    pub refinements: usize,
    pub cfl: f64,
    pub t_final: Option<f64>,
    pub out: Option<std::path::PathBuf>,
    pub vtk_every: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: String::new(),
            degree: 1,
            cells: 32,
            refinements: 1,
            cfl: 0.8,
            t_final: None,
            out: None,
            vtk_every: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.degree > 2 {
            return Err(Error::UnsupportedDegree(self.degree));
        }
        if self.cells == 0 {
            return Err(Error::Config("cells must be positive".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!(
                "cfl must lie in (0, 1], got {}",
                self.cfl
            )));
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected key=value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::Config(format!("line {}: bad {what} value {value:?}", lineno + 1))
            };
            match key {
                "scenario" => self.scenario = value.to_string(),
                "degree" => self.degree = value.parse().map_err(|_| bad("degree"))?,
                "cells" => self.cells = value.parse().map_err(|_| bad("cells"))?,
                "refinements" => {
                    self.refinements = value.parse().map_err(|_| bad("refinements"))?
                }
                "cfl" => self.cfl = value.parse().map_err(|_| bad("cfl"))?,
                "tfinal" => self.t_final = Some(value.parse().map_err(|_| bad("tfinal"))?),
                "out" => self.out = Some(value.into()),
                "vtk_every" => self.vtk_every = Some(value.parse().map_err(|_| bad("vtk_every"))?),
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_has_zero_norms() {
        let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        let state = FieldState::zeros(&mesh, 1);
        assert_eq!(l2_div_norm(&mesh, &state), 0.0);
        let e = l2_field_error(&mesh, &state, |_, _| (0.0, 0.0));
        assert_eq!(e, 0.0);
        // against B = (2, 0) on the unit square the error is exactly 2
        let e = l2_field_error(&mesh, &state, |_, _| (2.0, 0.0));
        assert!((e - 2.0).abs() < 1e-14);
    }

    #[test]
    fn norms_are_additive_over_cell_splits() {
        // computing the integral on two horizontal strips and combining
        // matches the single-mesh value
        let top = CartesianMesh::new(0.0, 0.5, 1.0, 1.0, 4, 2).unwrap();
        let bottom = CartesianMesh::new(0.0, 0.0, 1.0, 0.5, 4, 2).unwrap();
        let whole = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
        let f = |x: f64, y: f64| ((x + 2.0 * y).sin(), (x * y).cos());
        let zero_top = FieldState::zeros(&top, 1);
        let zero_bottom = FieldState::zeros(&bottom, 1);
        let zero_whole = FieldState::zeros(&whole, 1);
        let et = l2_field_error(&top, &zero_top, f);
        let eb = l2_field_error(&bottom, &zero_bottom, f);
        let ew = l2_field_error(&whole, &zero_whole, f);
        assert!(((et * et + eb * eb).sqrt() - ew).abs() < 1e-13);
    }

    #[test]
    fn rate_formula_recovers_synthetic_order() {
        let mut report = ErrorReport::default();
        let c = 3.7;
        let p = 2.5;
        for lvl in 0..4 {
            let h = 0.1 / f64::powi(2.0, lvl);
            report.push(h, c * h.powf(p), 1e-14, Some(10.0 * h.powf(p)));
        }
        for row in &report.rows[1..] {
            assert!((row.rate.unwrap() - p).abs() < 1e-12);
            assert!((row.div_rate.unwrap() - p).abs() < 1e-12);
        }
        assert!(report.rows[0].rate.is_none());
    }

    #[test]
    fn config_file_parsing_and_overrides() {
        let mut cfg = RunConfig::default();
        cfg.apply_file(
            "# study setup\nscenario = test2b\n degree=2\ncells = 16\nrefinements=4\ncfl = 0.75\nout = results/run1 # relative\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, "test2b");
        assert_eq!(cfg.degree, 2);
        assert_eq!(cfg.cells, 16);
        assert_eq!(cfg.refinements, 4);
        assert!((cfg.cfl - 0.75).abs() < 1e-15);
        assert_eq!(
            cfg.out.as_deref(),
            Some(std::path::Path::new("results/run1"))
        );
        assert!(cfg.validate().is_ok());

        assert!(RunConfig::default().apply_file("nonsense line").is_err());
        assert!(RunConfig::default().apply_file("speed = 3").is_err());
        assert!(RunConfig::default().apply_file("degree = fast").is_err());
        let mut bad = RunConfig::default();
        bad.cfl = 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn projection_level_reports_errors() {
        let sc = crate::scenarios::scenario("test1a").unwrap();
        let level = run_level(&sc, 1, 8, 0.8, None).unwrap();
        assert_eq!(level.steps, 0);
        assert!((level.h - 0.125).abs() < 1e-15);
        assert!((level.error - 1.0189e-1).abs() / 1.0189e-1 < 0.01);
        assert!(level.div_norm < 1e-11);
    }

    #[test]
    fn csv_round_trip() {
        let mut report = ErrorReport::default();
        report.push(0.125, 1.0189e-1, 3.7e-14, None);
        report.push(0.0625, 2.5519e-2, 9.5e-14, None);
        let parsed = ErrorReport::from_csv(&report.to_csv()).unwrap();
        assert_eq!(parsed, report);

        let mut with_div = ErrorReport::default();
        with_div.push(0.0625, 9.093e-4, 1e-13, Some(2.7438e-2));
        with_div.push(0.03125, 2.2445e-4, 2e-13, Some(6.9076e-3));
        let parsed = ErrorReport::from_csv(&with_div.to_csv()).unwrap();
        assert_eq!(parsed, with_div);

        // single mesh: empty rate column
        let mut single = ErrorReport::default();
        single.push(0.1, 1e-3, 0.0, None);
        let text = single.to_csv();
        assert!(text.lines().nth(1).unwrap().contains(",,"));
        assert_eq!(ErrorReport::from_csv(&text).unwrap(), single);
    }
}
