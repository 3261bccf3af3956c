use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rtdg::diagnostics::{convergence_study, l2_div_error, l2_div_norm, l2_field_error, RunConfig};
use rtdg::scenarios::{scenario, Scenario, NAMES};
use rtdg::solver::{Simulation, TimeControls};
use rtdg::vtk::write_vtk;

/// Divergence-conforming DG solver for the 2-D induction equation.
#[derive(Parser)]
#[command(name = "rtdg", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario on one mesh and report final errors.
    Solve(RunArgs),
    /// Refinement study: errors and observed convergence rates.
    Converge(RunArgs),
    /// Project the initial field only (no time evolution).
    Project(RunArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// key=value configuration file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name (test1a, test1b, test2a, test2b, test3, test4).
    #[arg(long)]
    scenario: Option<String>,
    /// Polynomial degree k (0, 1 or 2).
    #[arg(long)]
    degree: Option<usize>,
    /// Cells per direction of the (coarsest) mesh.
    #[arg(long)]
    cells: Option<usize>,
    /// Number of meshes in a convergence study (each halves h).
    #[arg(long)]
    refinements: Option<usize>,
    /// CFL number in (0, 1].
    #[arg(long)]
    cfl: Option<f64>,
    /// Override the scenario's final time.
    #[arg(long)]
    tfinal: Option<f64>,
    /// Output directory for CSV tables, run logs and VTK files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a VTK snapshot every N steps (and at the final time).
    #[arg(long = "vtk-every")]
    vtk_every: Option<usize>,
}

impl RunArgs {
    fn into_config(self, default_refinements: usize) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            refinements: default_refinements,
            ..RunConfig::default()
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_file(&text)?;
        }
        if let Some(v) = self.scenario {
            cfg.scenario = v;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = self.cells {
            cfg.cells = v;
        }
        if let Some(v) = self.refinements {
            cfg.refinements = v;
        }
        if let Some(v) = self.cfl {
            cfg.cfl = v;
        }
        if let Some(v) = self.tfinal {
            cfg.t_final = Some(v);
        }
        if let Some(v) = self.out {
            cfg.out = Some(v);
        }
        if let Some(v) = self.vtk_every {
            cfg.vtk_every = Some(v);
        }
        if cfg.scenario.is_empty() {
            let listing: Vec<String> = NAMES
                .iter()
                .map(|n| format!("  {n:8} {}", scenario(n).expect("built-in").describe))
                .collect();
            bail!("no scenario given; available:\n{}", listing.join("\n"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => solve(args.into_config(1)?),
        Command::Converge(args) => converge(args.into_config(3)?),
        Command::Project(args) => project(args.into_config(1)?),
        Command::Selftest => selftest(),
    }
}

fn prepare_out(dir: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        return Ok(Some(dir.clone()));
    }
    Ok(None)
}

fn load_scenario(cfg: &RunConfig) -> Result<Scenario> {
    Ok(scenario(&cfg.scenario)?)
}

fn solve(cfg: RunConfig) -> Result<()> {
    let sc = load_scenario(&cfg)?;
    let Some(t_final) = cfg.t_final.or(sc.t_final) else {
        bail!(
            "scenario {} is projection-only; use `rtdg project` (or pass --tfinal)",
            sc.name
        );
    };
    let out = prepare_out(&cfg.out)?;
    let mesh = sc.mesh(cfg.cells)?;
    let k = cfg.degree;
    println!(
        "solve {}: k={k}, {}x{} cells, h={:.6}, t_final={t_final:.6}, cfl={}",
        sc.name, mesh.nx, mesh.ny, mesh.dx, cfg.cfl
    );
    let sim = Simulation::new(&mesh, k, &sc)?;
    let mut state = sc.initial_state(&mesh, k)?;
    println!("initial div norm {:.4e}", l2_div_norm(&mesh, &state));

    let mut controls = TimeControls::new(t_final);
    controls.cfl = cfg.cfl;
    let mut t = 0.0;
    let mut step = 0usize;
    let mut log = String::from("step,t,dt,div_norm\n");
    let report_every = cfg.vtk_every.unwrap_or(0);
    while t < t_final - 1e-12 * t_final.max(1.0) {
        let mut dt = sim.cfl_dt(controls.cfl, t, controls.dt_max);
        if !dt.is_finite() {
            dt = t_final - t;
        }
        dt = dt.min(t_final - t);
        state = sim.step(&state, t, dt);
        step += 1;
        t += dt;
        if !state.is_finite() {
            bail!("solver diverged at step {step}, t = {t}");
        }
        let div = l2_div_norm(&mesh, &state);
        log.push_str(&format!("{step},{t:.12e},{dt:.12e},{div:.12e}\n"));
        if report_every > 0 && step.is_multiple_of(report_every) {
            if let Some(dir) = &out {
                write_vtk(
                    &mesh,
                    &state,
                    &dir.join(format!("{}_{step:06}.vtk", sc.name)),
                    t,
                )?;
            }
            let err = sc
                .exact_at(t)
                .map(|exact| format!(", error = {:.3e}", l2_field_error(&mesh, &state, exact)))
                .unwrap_or_default();
            println!("step {step:6}: t = {t:.6}, dt = {dt:.3e}, div = {div:.3e}{err}");
        }
    }
    println!("finished after {step} steps at t = {t:.6}");
    println!("final div norm {:.4e}", l2_div_norm(&mesh, &state));
    if let Some(exact) = sc.exact_at(t) {
        println!(
            "L2 error vs exact {:.4e}",
            l2_field_error(&mesh, &state, exact)
        );
    }
    if let Some(div) = sc.exact_div_at(t) {
        println!(
            "L2 divergence error {:.4e}",
            l2_div_error(&mesh, &state, div)
        );
    }
    if let Some(dir) = &out {
        fs::write(dir.join(format!("{}_runlog.csv", sc.name)), log)
            .with_context(|| "writing run log")?;
        write_vtk(
            &mesh,
            &state,
            &dir.join(format!("{}_final.vtk", sc.name)),
            t,
        )?;
        println!("wrote run log and final VTK to {}", dir.display());
    }
    Ok(())
}

fn converge(cfg: RunConfig) -> Result<()> {
    let sc = load_scenario(&cfg)?;
    let out = prepare_out(&cfg.out)?;
    let k = cfg.degree;
    println!(
        "convergence study {}: k={k}, meshes {}..{} cells/side, cfl={}",
        sc.name,
        cfg.cells,
        cfg.cells << (cfg.refinements.max(1) - 1),
        cfg.cfl
    );
    let csv_path = out
        .as_ref()
        .map(|d| d.join(format!("{}_k{k}_convergence.csv", sc.name)));
    let study = convergence_study(
        &sc,
        k,
        cfg.cells,
        cfg.refinements,
        cfg.cfl,
        cfg.t_final,
        |level, partial| {
            let last = partial.rows.last().expect("row just pushed");
            println!(
                "  {} cells (h = {:.4}): error {:.4e}{}, div_norm {:.4e}, {} steps",
                level.cells,
                level.h,
                level.error,
                last.rate
                    .map_or(String::new(), |r| format!(" (rate {r:.2})")),
                level.div_norm,
                level.steps
            );
            // flush partial tables so an aborted study still leaves data
            if let Some(path) = &csv_path {
                let _ = fs::write(path, partial.to_csv());
            }
        },
    )?;
    println!("\n{}", study.render());
    if let Some(path) = &csv_path {
        fs::write(path, study.to_csv()).with_context(|| "writing CSV table")?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn project(cfg: RunConfig) -> Result<()> {
    let sc = load_scenario(&cfg)?;
    let out = prepare_out(&cfg.out)?;
    let k = cfg.degree;
    let mesh = sc.mesh(cfg.cells)?;
    println!(
        "project {}: k={k}, {}x{} cells, h={:.6}",
        sc.name, mesh.nx, mesh.ny, mesh.dx
    );
    let state = sc.initial_state(&mesh, k)?;
    if let Some(exact) = sc.exact_at(0.0) {
        println!("L2 error {:.4e}", l2_field_error(&mesh, &state, exact));
    }
    println!("div norm {:.4e}", l2_div_norm(&mesh, &state));
    if let Some(div) = sc.exact_div_at(0.0) {
        println!(
            "L2 divergence error {:.4e}",
            l2_div_error(&mesh, &state, div)
        );
    }
    if let Some(dir) = &out {
        let path = dir.join(format!("{}_projection.vtk", sc.name));
        write_vtk(&mesh, &state, &path, 0.0)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn selftest() -> Result<()> {
    use rtdg::basis::{gauss_legendre, modal, qkk_basis};
    use rtdg::mass::{assemble_blocks, reference_moments};
    use rtdg::mesh::CartesianMesh;
    use rtdg::projection::{divergence_moment, project, project_divfree};
    use rtdg::space::{FieldState, RtElement};

    let mut failures = 0usize;
    let mut check = |name: &str, pass: bool| {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    // quadrature exactness
    let mut ok = true;
    for n in 1..=5 {
        let rule = gauss_legendre(n).unwrap();
        for d in 0..=(2 * n - 1) {
            let approx: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(d as i32))
                .sum();
            ok &= (approx - 1.0 / (d as f64 + 1.0)).abs() < 1e-13;
        }
    }
    check("gauss-legendre rules integrate monomials exactly", ok);

    // mass blocks against the dense moment oracle
    let mut ok = true;
    for k in 0..=2 {
        let element = RtElement::new(k).unwrap();
        let full = assemble_blocks(k).unwrap().full_matrix();
        for d in 0..element.dof_count() {
            let mut unit = vec![0.0; element.dof_count()];
            unit[d] = 1.0;
            for (r, m) in reference_moments(&element, &unit)
                .unwrap()
                .iter()
                .enumerate()
            {
                ok &= (full.get(r, d) - m).abs() < 1e-13;
            }
        }
    }
    check("mass blocks match dense moment oracle (k = 0, 1, 2)", ok);

    // vertex flux forms agree
    let mut ok = true;
    let mut c = 0.17_f64;
    let mut rng = move || {
        c = (c * 127.3).fract();
        4.0 * c - 2.0
    };
    for _ in 0..1000 {
        let (u, d, l, r) = (rng(), rng(), rng(), rng());
        let v = (rng(), rng());
        let s = rtdg::flux::VertexStates {
            down_left: (d, l),
            down_right: (d, r),
            up_left: (u, l),
            up_right: (u, r),
        };
        let a = rtdg::flux::vertex_flux(v, s);
        let b = rtdg::flux::vertex_flux_compact(v, u, d, l, r);
        let cs = rtdg::flux::vertex_flux_cases(v, s);
        ok &= (a - b).abs() <= 1e-14 && (a - cs).abs() <= 1e-14;
    }
    check("vertex flux forms agree on 1000 random states", ok);

    // projection idempotency and divergence-free exactness
    let mesh = CartesianMesh::new(0.0, 0.0, 1.0, 1.0, 8, 8).unwrap();
    let state = project_divfree(
        &|x: f64, y: f64| {
            (2.0 * std::f64::consts::PI * x).sin() * (2.0 * std::f64::consts::PI * y).sin()
        },
        &mesh,
        2,
    )
    .unwrap();
    check(
        "stream-function projection is divergence-free to roundoff",
        l2_div_norm(&mesh, &state) < 1e-11,
    );
    let element = RtElement::new(1).unwrap();
    let source = project(&|x: f64, y: f64| ((x + y).sin(), (x * y).cos()), &mesh, 1).unwrap();
    let eval = |x: f64, y: f64| source.eval_at(&mesh, &element, x, y);
    let again = project(&eval, &mesh, 1).unwrap();
    let drift = source
        .vface
        .iter()
        .zip(&again.vface)
        .chain(source.hface.iter().zip(&again.hface))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check("projection is idempotent on RT data", drift < 1e-12);

    // semi-discrete divergence preservation on a random state
    struct Swirl;
    impl rtdg::solver::Problem for Swirl {
        fn velocity(&self, x: f64, y: f64, _t: f64) -> (f64, f64) {
            (0.4 + y, 0.3 - x)
        }
        fn boundary(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
            ((x - y + t).sin(), (x + y).cos())
        }
    }
    let mut ok = true;
    for k in 0..=2usize {
        let sim = Simulation::new(&mesh, k, &Swirl).unwrap();
        let mut state = FieldState::zeros(&mesh, k);
        let mut c = 0.31_f64;
        for v in state
            .vface
            .iter_mut()
            .chain(state.hface.iter_mut())
            .chain(state.bx_int.iter_mut())
            .chain(state.by_int.iter_mut())
        {
            c = (c * 113.7).fract();
            *v = 2.0 * c - 1.0;
        }
        let rates = sim.rates(&state, 0.1);
        for cell in [0usize, 27, 63] {
            for (a, b) in qkk_basis(k) {
                let m =
                    divergence_moment(&mesh, &rates, cell, |xi, eta| modal(a, xi) * modal(b, eta));
                ok &= m.abs() <= 1e-12;
            }
        }
    }
    check(
        "semi-discrete divergence moments vanish for random states",
        ok,
    );

    // SSP-RK3 order on a scalar decay problem
    let mut errs = Vec::new();
    for &n in &[16usize, 32, 64] {
        let dt = 1.0 / n as f64;
        let mut u = 1.0;
        let mut t = 0.0;
        for _ in 0..n {
            u = rtdg::solver::ssp_rk3_step(&u, t, dt, |v: &f64, _| -v);
            t += dt;
        }
        errs.push((u - (-1.0_f64).exp()).abs());
    }
    let order = (errs[0] / errs[2]).log2() / 2.0;
    check(
        "ssp-rk3 integrates u' = -u at third order",
        (order - 3.0).abs() < 0.1,
    );

    if failures > 0 {
        bail!("{failures} selftest check(s) failed");
    }
    println!("all selftest checks passed");
    Ok(())
}
