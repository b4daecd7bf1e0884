//! Batch pipeline: regime-appropriate cell solve -> effective tensor ->
//! macroscopic pressure -> reconstruction, with CSV/JSON outputs and a
//! machine-readable run report.
//!
//! All floating-point CSV output is printed with 17 significant digits and
//! every solve is deterministic, so two runs of the same configuration
//! produce byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::cell_crit::{self, CriticalCellSolution};
use crate::cell_sub::{self, SubcriticalCellSolution};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::params::{MacroGrid, PhysicalParams, RoughnessProfile};
use crate::profile::flow_factor;
use crate::reconstruct::{self, SubcriticalReconstructor};
use crate::reynolds::{self, MacroForcing, MacroPressure, MobilityField};
use crate::tensor::{EffectiveTensor, Regime};

/// How far to take the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    /// Cell solve and tensor only.
    Cell,
    /// Plus macroscopic pressure and average velocity.
    Macro,
    /// Plus temperature reconstruction and optional slices.
    Full,
}

/// One named invariant verdict in the run report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportCheck {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ReportCheck {
    fn le(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn positive(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            threshold: 0.0,
            pass: value > 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TensorSummary {
    pub regime: Regime,
    pub m: f64,
    pub a: [[f64; 2]; 2],
    pub asymmetry: f64,
    pub profile: RoughnessProfile,
    /// Per-direction residuals of the cell solves (meaning depends on the
    /// regime: corrector flux divergence or fluid-cell divergence).
    pub residuals: [f64; 2],
    pub momentum_residuals: Option<[f64; 2]>,
}

/// Summary of one pipeline run; serialized as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub regime: Regime,
    pub tensor: TensorSummary,
    pub pressure_iterations: usize,
    pub pressure_residual: f64,
    pub checks: Vec<ReportCheck>,
    pub outputs: Vec<String>,
    pub failed: bool,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_deterministic(dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::write(dir.join(name), contents.as_bytes())?;
    Ok(name.to_string())
}

fn macro_field_csv(grid: &MacroGrid, header: &str, columns: &[&[f64]]) -> String {
    let mut s = String::with_capacity(grid.n_cells() * 64);
    s.push_str(header);
    s.push('\n');
    for j in 0..grid.m2 {
        for i in 0..grid.m1 {
            let c = grid.idx(i, j);
            let _ = write!(s, "{},{}", fmt17(grid.x_center(i)), fmt17(grid.y_center(j)));
            for col in columns {
                let _ = write!(s, ",{}", fmt17(col[c]));
            }
            s.push('\n');
        }
    }
    s
}

struct CellStage {
    tensor: EffectiveTensor,
    residuals: [f64; 2],
    momentum: Option<[f64; 2]>,
    sub: Option<SubcriticalCellSolution>,
    crit: Option<CriticalCellSolution>,
    checks: Vec<ReportCheck>,
}

fn run_cell_stage(
    cfg: &RunConfig,
    params: &PhysicalParams,
    profile: &RoughnessProfile,
) -> Result<CellStage> {
    match cfg.regime {
        Regime::Subcritical => {
            let sol = SubcriticalCellSolution::solve(
                profile,
                params,
                &cfg.cell_grid,
                cfg.solver.cell_tol,
            )?;
            let tensor = cell_sub::assemble_tensor(&sol, params, profile)?;
            let mut checks = vec![
                ReportCheck::le(
                    "cell_flux_divergence",
                    sol.max_flux_divergence(),
                    10.0 * cfg.solver.cell_tol,
                ),
                ReportCheck::le("tensor_asymmetry", tensor.asymmetry(), 1e-8),
                ReportCheck::positive("tensor_min_eigenvalue", tensor.eigenvalues().0),
            ];
            for d in 0..2 {
                let mean = sol.pi[d].iter().sum::<f64>() / sol.pi[d].len() as f64;
                checks.push(ReportCheck::le(
                    &format!("corrector_{}_mean", d + 1),
                    mean.abs(),
                    1e-10,
                ));
            }
            Ok(CellStage {
                residuals: sol.residual_inf,
                momentum: None,
                tensor,
                sub: Some(sol),
                crit: None,
                checks,
            })
        }
        Regime::Critical => {
            let sol = CriticalCellSolution::solve(
                profile,
                params,
                &cfg.cell_grid,
                cfg.solver.crit_tol,
            )?;
            let tensor = cell_crit::assemble_tensor(&sol, params, profile)?;
            let gap = cell_crit::energy_identity_gap(&sol, params);
            let checks = vec![
                ReportCheck::le(
                    "cell_divergence_fluid",
                    sol.fields[0].div_inf_fluid.max(sol.fields[1].div_inf_fluid),
                    cfg.solver.crit_tol,
                ),
                ReportCheck::le("solid_leakage", sol.solid_leakage(), 1e-6),
                ReportCheck::le("energy_identity_gap", gap, 1e-4),
                ReportCheck::le("tensor_asymmetry", tensor.asymmetry(), 0.01),
                ReportCheck::positive(
                    "tensor_min_eigenvalue",
                    tensor.symmetrized().eigenvalues().0,
                ),
            ];
            Ok(CellStage {
                residuals: [sol.fields[0].div_inf_fluid, sol.fields[1].div_inf_fluid],
                momentum: Some([
                    sol.fields[0].momentum_residual_inf,
                    sol.fields[1].momentum_residual_inf,
                ]),
                tensor,
                sub: None,
                crit: Some(sol),
                checks,
            })
        }
        Regime::Smooth => {
            // the smooth regime has no cell problem: the reduction replaces
            // the rough film by the channel of height h_min, so the recorded
            // tensor is phi(h_min) I (the solver itself uses the pointwise
            // mobility unless use_h_min is set)
            let phi = flow_factor(params.m(), profile.h_min())?;
            let tensor =
                EffectiveTensor::isotropic(phi, Regime::Smooth, params.m(), profile.clone());
            Ok(CellStage {
                residuals: [0.0, 0.0],
                momentum: None,
                checks: vec![ReportCheck::positive("tensor_min_eigenvalue", phi)],
                tensor,
                sub: None,
                crit: None,
            })
        }
    }
}

/// Driving force `g = f' - grad p` at every macro cell.
fn driving_force(
    forcing: &MacroForcing,
    pressure: &MacroPressure,
    grid: &MacroGrid,
) -> Vec<[f64; 2]> {
    let grad = reynolds::pressure_gradient(&pressure.p, grid);
    (0..grid.n_cells())
        .map(|c| [forcing.f1[c] - grad[c][0], forcing.f2[c] - grad[c][1]])
        .collect()
}

/// Run the pipeline described by `cfg` up to `stage`, writing outputs into
/// `out_dir` (created if missing). Returns the run report (also written as
/// `report.json`).
pub fn run_pipeline(cfg: &RunConfig, out_dir: &Path, stage: Stage) -> Result<RunReport> {
    cfg.validate()?;
    match cfg.threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config {
                    path: "threads".into(),
                    message: e.to_string(),
                })?;
            pool.install(|| run_pipeline_inner(cfg, out_dir, stage))
        }
        _ => run_pipeline_inner(cfg, out_dir, stage),
    }
}

fn run_pipeline_inner(cfg: &RunConfig, out_dir: &Path, stage: Stage) -> Result<RunReport> {
    std::fs::create_dir_all(out_dir)?;
    let params = cfg.params.build()?;
    let profile = cfg.profile.clone();
    let grid = cfg.macro_grid;
    let mut outputs = Vec::new();

    // 1. cell problems and effective tensor
    let mut cell = run_cell_stage(cfg, &params, &profile)?;
    let tensor_summary = TensorSummary {
        regime: cfg.regime,
        m: params.m(),
        a: cell.tensor.entries(),
        asymmetry: cell.tensor.asymmetry(),
        profile: profile.clone(),
        residuals: cell.residuals,
        momentum_residuals: cell.momentum,
    };
    outputs.push(write_deterministic(
        out_dir,
        "tensor.json",
        &format!("{}\n", serde_json::to_string_pretty(&tensor_summary)?),
    )?);

    let mut checks = std::mem::take(&mut cell.checks);
    let mut pressure_iterations = 0;
    let mut pressure_residual = 0.0;

    if stage >= Stage::Macro {
        // 2. macroscopic Reynolds problem
        let mobility = match cfg.regime {
            Regime::Smooth => MobilityField::smooth(&profile, &params, &grid, cfg.use_h_min)?,
            _ => MobilityField::from_tensor(&cell.tensor, &params)?,
        };
        let forcing = cfg.forcing.build(&grid)?;
        forcing.validate(&grid)?;
        let pressure = reynolds::solve_pressure(&mobility, &forcing, &grid, cfg.solver.macro_tol)?;
        pressure_iterations = pressure.iterations;
        pressure_residual = pressure.residual_inf;

        let p_scale = pressure.p.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let p_mean = pressure.p.iter().sum::<f64>() / pressure.p.len() as f64;
        checks.push(ReportCheck::le(
            "pressure_mean_zero",
            p_mean.abs(),
            1e-10 * p_scale.max(1e-30),
        ));
        let div = reynolds::flux_divergence_inf(&pressure, &mobility, &forcing, &grid);
        let rhs_scale = {
            let f_inf = forcing
                .f1
                .iter()
                .chain(&forcing.f2)
                .fold(0.0f64, |m, &v| m.max(v.abs()));
            f_inf.max(1e-30)
        };
        checks.push(ReportCheck::le(
            "flux_conservation",
            div,
            10.0 * cfg.solver.macro_tol * rhs_scale.max(1.0),
        ));
        checks.push(ReportCheck::le(
            "boundary_flux",
            pressure.boundary_flux.abs(),
            0.0,
        ));

        let (v1, v2) = reynolds::average_velocity(&pressure, &mobility, &forcing, &grid);
        outputs.push(write_deterministic(
            out_dir,
            "pressure.csv",
            &macro_field_csv(&grid, "x1,x2,p", &[&pressure.p]),
        )?);
        outputs.push(write_deterministic(
            out_dir,
            "velocity_avg.csv",
            &macro_field_csv(&grid, "x1,x2,v1,v2", &[&v1, &v2]),
        )?);

        if stage >= Stage::Full {
            // 3. temperature reconstruction (and velocity consistency)
            let g_field = driving_force(&forcing, &pressure, &grid);
            let quad_n = cfg.solver.quad_n;
            let nq = cfg.solver.cell_quad;
            let mut t_av = vec![0.0; grid.n_cells()];

            match cfg.regime {
                Regime::Subcritical => {
                    let sub = cell.sub.as_ref().expect("subcritical cell solution");
                    let rec = SubcriticalReconstructor {
                        profile: &profile,
                        params: &params,
                        cell: sub,
                    };
                    let results: Vec<([f64; 2], f64)> = g_field
                        .par_iter()
                        .map(|g| rec.averages(*g, nq, quad_n))
                        .collect::<Result<Vec<_>>>()?;
                    let mut worst = 0.0f64;
                    let v_scale = v1
                        .iter()
                        .chain(&v2)
                        .fold(0.0f64, |m, &v| m.max(v.abs()))
                        .max(1e-30);
                    for (c, (v_rec, t)) in results.into_iter().enumerate() {
                        t_av[c] = t;
                        worst = worst
                            .max((v_rec[0] - v1[c]).abs())
                            .max((v_rec[1] - v2[c]).abs());
                    }
                    checks.push(ReportCheck::le(
                        "velocity_average_consistency",
                        worst / v_scale,
                        5e-3,
                    ));
                }
                Regime::Critical => {
                    let crit = cell.crit.as_ref().expect("critical cell solution");
                    let [q11, q12, q22] = cell_crit::pairwise_dissipation_sources(crit, &params);
                    let zero = vec![0.0; q11.len()];
                    let t_flux = cell_crit::solve_temperature_with_source(
                        crit,
                        &params,
                        &zero,
                        params.heat_flux(),
                        cfg.solver.temp_tol,
                    )?;
                    let basis: Vec<f64> = [&q11, &q12, &q22]
                        .into_iter()
                        .map(|q| {
                            cell_crit::solve_temperature_with_source(
                                crit,
                                &params,
                                q,
                                0.0,
                                cfg.solver.temp_tol,
                            )
                            .map(|t| cell_crit::temperature_average(crit, &t.t))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let avg_flux = cell_crit::temperature_average(crit, &t_flux.t);
                    for (c, g) in g_field.iter().enumerate() {
                        t_av[c] = avg_flux
                            + g[0] * g[0] * basis[0]
                            + 2.0 * g[0] * g[1] * basis[1]
                            + g[1] * g[1] * basis[2];
                    }
                    checks.push(ReportCheck::le(
                        "temperature_bottom_flux_error",
                        (t_flux.bottom_flux - params.heat_flux()).abs(),
                        1e-2 * params.heat_flux().abs().max(1.0),
                    ));
                }
                Regime::Smooth => {
                    let results: Vec<([f64; 2], f64)> = (0..grid.n_cells())
                        .into_par_iter()
                        .map(|c| {
                            let i = c % grid.m1;
                            let j = c / grid.m1;
                            let h_x = if cfg.use_h_min {
                                profile.h_min()
                            } else {
                                profile.eval(grid.x_center(i), grid.y_center(j))
                            };
                            reconstruct::smooth_averages(&params, h_x, g_field[c], quad_n)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let mut worst = 0.0f64;
                    let v_scale = v1
                        .iter()
                        .chain(&v2)
                        .fold(0.0f64, |m, &v| m.max(v.abs()))
                        .max(1e-30);
                    for (c, (v_rec, t)) in results.into_iter().enumerate() {
                        t_av[c] = t;
                        worst = worst
                            .max((v_rec[0] - v1[c]).abs())
                            .max((v_rec[1] - v2[c]).abs());
                    }
                    checks.push(ReportCheck::le(
                        "velocity_average_consistency",
                        worst / v_scale,
                        5e-3,
                    ));
                }
            }

            outputs.push(write_deterministic(
                out_dir,
                "temperature_avg.csv",
                &macro_field_csv(&grid, "x1,x2,t_av", &[&t_av]),
            )?);

            if cfg.write_slices {
                let name = write_profile_slice(cfg, &params, &profile, &cell, &g_field, out_dir)?;
                outputs.push(name);
            }
        }
    }

    let failed = checks.iter().any(|c| !c.pass);
    let report = RunReport {
        regime: cfg.regime,
        tensor: tensor_summary,
        pressure_iterations,
        pressure_residual,
        checks,
        outputs,
        failed,
    };
    write_deterministic(
        out_dir,
        "report.json",
        &format!("{}\n", serde_json::to_string_pretty(&report)?),
    )?;
    Ok(report)
}

/// Vertical profile slice at the center macro node and cell point
/// `z' = (0, 0)`: columns `z3, u1, u2, t`.
fn write_profile_slice(
    cfg: &RunConfig,
    params: &PhysicalParams,
    profile: &RoughnessProfile,
    cell: &CellStage,
    g_field: &[[f64; 2]],
    out_dir: &Path,
) -> Result<String> {
    let grid = cfg.macro_grid;
    let c = grid.idx(grid.m1 / 2, grid.m2 / 2);
    let g = g_field[c];
    let quad_n = cfg.solver.quad_n;
    let mut s = String::from("z3,u1,u2,t\n");
    match cfg.regime {
        Regime::Subcritical => {
            let sub = cell.sub.as_ref().expect("subcritical cell solution");
            let rec = SubcriticalReconstructor {
                profile,
                params,
                cell: sub,
            };
            let h = profile.eval(0.0, 0.0);
            let prof = rec.temperature_profile(g, 0.0, 0.0, quad_n)?;
            let n = 128;
            for i in 0..=n {
                let z3 = h * i as f64 / n as f64;
                let v = rec.velocity(g, 0.0, 0.0, z3);
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt17(z3),
                    fmt17(v[0]),
                    fmt17(v[1]),
                    fmt17(prof.interp(z3))
                );
            }
        }
        Regime::Critical => {
            let crit = cell.crit.as_ref().expect("critical cell solution");
            let t = cell_crit::solve_cell_temperature(crit, params, g, cfg.solver.temp_tol)?;
            let lines = critical_layer_profile(crit, params, g, &t.t);
            for (z3, u1, u2, tv) in lines {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    fmt17(z3),
                    fmt17(u1),
                    fmt17(u2),
                    fmt17(tv)
                );
            }
        }
        Regime::Smooth => {
            let h_x = if cfg.use_h_min {
                profile.h_min()
            } else {
                profile.eval(grid.x_center(grid.m1 / 2), grid.y_center(grid.m2 / 2))
            };
            let n = 128;
            for i in 0..=n {
                let z3 = h_x * i as f64 / n as f64;
                let v = reconstruct::smooth_velocity(params, h_x, g, z3)?;
                let t = reconstruct::smooth_temperature(params, h_x, g, z3, quad_n)?;
                let _ = writeln!(s, "{},{},{},{}", fmt17(z3), fmt17(v[0]), fmt17(v[1]), fmt17(t));
            }
        }
    }
    write_deterministic(out_dir, "profile_center.csv", &s)
}

/// Layer averages of the driven critical velocity and temperature over the
/// periodicity cell per vertical level.
fn critical_layer_profile(
    crit: &CriticalCellSolution,
    params: &PhysicalParams,
    g: [f64; 2],
    t: &[f64],
) -> Vec<(f64, f64, f64, f64)> {
    let grid = &crit.grid;
    let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
    let dz = crit.box_height / n3 as f64;
    let s = params.mobility_scale();
    let mut out = Vec::with_capacity(n3);
    let layer = n1 * n2;
    for k in 0..n3 {
        let mut u1 = 0.0;
        let mut u2 = 0.0;
        let mut tv = 0.0;
        for c in k * layer..(k + 1) * layer {
            u1 += s * (g[0] * crit.fields[0].u[c] + g[1] * crit.fields[1].u[c]);
            u2 += s * (g[0] * crit.fields[0].v[c] + g[1] * crit.fields[1].v[c]);
            tv += t[c];
        }
        out.push((
            (k as f64 + 0.5) * dz,
            u1 / layer as f64,
            u2 / layer as f64,
            tv / layer as f64,
        ));
    }
    out
}

/// Paths of the files a full run writes (used by the reproducibility check).
pub fn expected_outputs(cfg: &RunConfig) -> Vec<PathBuf> {
    let mut names = vec![
        PathBuf::from("tensor.json"),
        PathBuf::from("pressure.csv"),
        PathBuf::from("velocity_avg.csv"),
        PathBuf::from("temperature_avg.csv"),
        PathBuf::from("report.json"),
    ];
    if cfg.write_slices {
        names.push(PathBuf::from("profile_center.csv"));
    }
    names
}
