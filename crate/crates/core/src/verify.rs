//! Named check suites that compare the solvers and closed forms against the
//! independent oracle layer. Each suite yields rows `(name, measured,
//! target, tolerance, verdict)`; the CLI prints them as CSV and the
//! acceptance tests assert them. Report-only rows (the literal-formula
//! comparison harness) carry an infinite tolerance: they document the size
//! of the deviation between printed formulas and the oracle-validated
//! quantities rather than gate anything.

use crate::cell_crit::{self, CriticalCellSolution};
use crate::cell_sub::{self, SubcriticalCellSolution};
use crate::config::{ForcingConfig, ParamsConfig, RunConfig, SolverConfig};
use crate::error::{Error, Result};
use crate::linsolve::norm_inf;
use crate::oracle;
use crate::params::{CellGrid, MacroGrid, PhysicalParams, RoughnessProfile};
use crate::pipeline::{self, Stage};
use crate::profile::{flow_factor, profile_coeffs, shape, shape_dz3};
use crate::reconstruct;
use crate::reynolds::{self, MacroForcing, MobilityField};
use crate::tensor::Regime;

/// One verification check.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn within(suite: &'static str, name: &str, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            suite,
            name: name.to_string(),
            measured,
            target,
            tolerance,
            pass: (measured - target).abs() <= tolerance && measured.is_finite(),
        }
    }

    fn at_least(suite: &'static str, name: &str, measured: f64, target: f64) -> Self {
        Self {
            suite,
            name: name.to_string(),
            measured,
            target,
            tolerance: f64::INFINITY,
            pass: measured >= target && measured.is_finite(),
        }
    }

    fn report_only(suite: &'static str, name: &str, measured: f64) -> Self {
        Self {
            suite,
            name: name.to_string(),
            measured,
            target: 0.0,
            tolerance: f64::INFINITY,
            pass: measured.is_finite(),
        }
    }
}

pub const SUITES: &[&str] = &[
    "flowfactor",
    "subcell",
    "macro",
    "temperature",
    "critcell",
    "regimes",
    "discrepancy",
    "repro",
];

/// Run one suite by name; `all` (or empty) runs every suite in order.
pub fn run_suite(name: &str) -> Result<Vec<CheckRow>> {
    match name {
        "" | "all" => {
            let mut rows = Vec::new();
            for s in SUITES {
                rows.extend(run_suite(s)?);
            }
            Ok(rows)
        }
        "flowfactor" => suite_flowfactor(),
        "subcell" => suite_subcell(),
        "macro" => suite_macro(),
        "temperature" => suite_temperature(),
        "critcell" => suite_critcell(),
        "regimes" => suite_regimes(),
        "discrepancy" => suite_discrepancy(),
        "repro" => suite_repro(),
        other => Err(Error::UnknownSuite {
            name: other.to_string(),
            available: SUITES.join(", "),
        }),
    }
}

/// CSV rendering with one row per check.
pub fn rows_to_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("suite,check,measured,target,tolerance,verdict\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.16e},{:.16e},{},{}\n",
            r.suite,
            r.name,
            r.measured,
            r.target,
            if r.tolerance.is_finite() {
                format!("{:.16e}", r.tolerance)
            } else {
                "inf".to_string()
            },
            if r.pass { "pass" } else { "FAIL" }
        ));
    }
    s
}

fn trapezoid_shape_quadrature(m: f64, h: f64, n: usize) -> f64 {
    let dz = h / n as f64;
    let mut q = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        q += w * shape(m, h, i as f64 * dz);
    }
    q * dz
}

// --- criterion 1 & 2: flow factor against quadrature and its limits ------

fn suite_flowfactor() -> Result<Vec<CheckRow>> {
    const S: &str = "flowfactor";
    let mut rows = Vec::new();

    let mut worst = 0.0f64;
    for i in 0..7 {
        let m = 10f64.powf(-2.0 + 4.0 * i as f64 / 6.0);
        for j in 0..7 {
            let h = 0.25 * (16f64).powf(j as f64 / 6.0);
            let phi = flow_factor(m, h)?;
            let quad = trapezoid_shape_quadrature(m, h, 100_000);
            worst = worst.max(((phi - quad) / phi).abs());
        }
    }
    rows.push(CheckRow::within(
        S,
        "phi_vs_shape_quadrature_max_rel_7x7",
        worst,
        0.0,
        1e-8,
    ));

    // Poiseuille limit at M h = 1e-2 in the scaled form (K/mu) phi vs
    // h^3 / (12 mu_eff)
    let p = PhysicalParams::new(1.0, 1.0, 1e4, 1.0, 0.0)?;
    let h = 1.0;
    let lhs = p.mobility_scale() * flow_factor(p.m(), h)?;
    let rhs = h * h * h / (12.0 * p.mu_eff());
    rows.push(CheckRow::within(
        S,
        "poiseuille_limit_mh_1e-2",
        ((lhs - rhs) / rhs).abs(),
        0.0,
        1e-3,
    ));

    // Darcy limit at M h = 100
    let (m, h) = (100.0, 1.0);
    let phi = flow_factor(m, h)?;
    let darcy = h - 2.0 / m;
    rows.push(CheckRow::within(
        S,
        "darcy_limit_mh_100",
        ((phi - darcy) / darcy).abs(),
        0.0,
        1e-4,
    ));
    Ok(rows)
}

// --- criterion 3: subcritical cell problems ------------------------------

fn suite_subcell() -> Result<Vec<CheckRow>> {
    const S: &str = "subcell";
    let mut rows = Vec::new();
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?;

    // constant height: correctors vanish, tensor is phi I
    {
        let profile = RoughnessProfile::constant(1.0)?;
        let grid = CellGrid::new(64, 64, 1)?;
        let sol = SubcriticalCellSolution::solve(&profile, &params, &grid, 1e-12)?;
        let grad_inf = sol
            .grad_pi
            .iter()
            .flat_map(|g| g.iter())
            .fold(0.0f64, |m, g| m.max(g[0].abs()).max(g[1].abs()));
        rows.push(CheckRow::within(S, "constant_h_corrector_gradient", grad_inf, 0.0, 1e-8));
        let t = cell_sub::assemble_tensor(&sol, &params, &profile)?;
        let phi = flow_factor(params.m(), 1.0)?;
        let dev = (t.a11 - phi)
            .abs()
            .max((t.a22 - phi).abs())
            .max(t.a12.abs())
            .max(t.a21.abs());
        rows.push(CheckRow::within(S, "constant_h_tensor_vs_phi", dev, 0.0, 1e-8 * phi));
    }

    // separable laminate at 128^2 against the 1D reduction
    {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0)?;
        let grid = CellGrid::new(128, 128, 1)?;
        let sol = SubcriticalCellSolution::solve(&profile, &params, &grid, 1e-12)?;
        let t = cell_sub::assemble_tensor(&sol, &params, &profile)?;
        let h = |z1: f64, z2: f64| profile.eval(z1, z2);
        let lam = oracle::laminate_tensor_1d(&h, 0, params.m(), 100_000)?;
        rows.push(CheckRow::within(
            S,
            "laminate_a11_vs_harmonic_mean",
            ((t.a11 - lam[0][0]) / lam[0][0]).abs(),
            0.0,
            5e-3,
        ));
        rows.push(CheckRow::within(
            S,
            "laminate_a22_vs_arithmetic_mean",
            ((t.a22 - lam[1][1]) / lam[1][1]).abs(),
            0.0,
            5e-3,
        ));
    }

    // symmetry and positive definiteness across the profile families
    {
        let profiles = [
            RoughnessProfile::constant(0.8)?,
            RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0)?,
            RoughnessProfile::sinusoidal(1.0, 0.25, 1, 1)?,
            RoughnessProfile::sampled(
                4,
                4,
                vec![
                    1.0, 1.3, 1.1, 0.9, 1.2, 1.25, 0.85, 1.0, 1.1, 0.95, 1.2, 1.05, 1.0, 1.15,
                    0.9, 1.2,
                ],
            )?,
        ];
        let grid = CellGrid::new(64, 64, 1)?;
        let mut max_asym = 0.0f64;
        let mut min_eig = f64::INFINITY;
        for profile in &profiles {
            let sol = SubcriticalCellSolution::solve(profile, &params, &grid, 1e-11)?;
            let t = cell_sub::assemble_tensor(&sol, &params, profile)?;
            max_asym = max_asym.max(t.asymmetry());
            min_eig = min_eig.min(t.eigenvalues().0);
        }
        rows.push(CheckRow::within(S, "tensor_asymmetry_max", max_asym, 0.0, 1e-8));
        rows.push(CheckRow::at_least(S, "tensor_min_eigenvalue", min_eig, f64::MIN_POSITIVE));
    }
    Ok(rows)
}

// --- criterion 4: macroscopic Reynolds problem ---------------------------

fn suite_macro() -> Result<Vec<CheckRow>> {
    const S: &str = "macro";
    let mut rows = Vec::new();
    let pi = std::f64::consts::PI;

    // manufactured solution ladder 16 / 32 / 64
    {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [16usize, 32, 64] {
            let grid = MacroGrid::new(0.0, 1.0, 0.0, 1.0, n, n)?;
            let p_exact = |x: f64, y: f64| (pi * x).cos() * (pi * y).cos();
            let forcing = MacroForcing::from_fn(&grid, |x, y| {
                [
                    -pi * (pi * x).sin() * (pi * y).cos(),
                    -pi * (pi * x).cos() * (pi * y).sin(),
                ]
            });
            let mob = MobilityField::Constant {
                b: [[1.0, 0.0], [0.0, 1.0]],
            };
            let sol = reynolds::solve_pressure(&mob, &forcing, &grid, 1e-12)?;
            let mut mean = 0.0;
            for j in 0..grid.m2 {
                for i in 0..grid.m1 {
                    mean += p_exact(grid.x_center(i), grid.y_center(j));
                }
            }
            mean /= grid.n_cells() as f64;
            let mut err2 = 0.0;
            for j in 0..grid.m2 {
                for i in 0..grid.m1 {
                    let d = sol.p[grid.idx(i, j)]
                        - (p_exact(grid.x_center(i), grid.y_center(j)) - mean);
                    err2 += d * d * grid.dx() * grid.dy();
                }
            }
            errs.push(err2.sqrt());
            hs.push(grid.dx());
        }
        let order = oracle::convergence_order(&hs, &errs)?;
        rows.push(CheckRow::at_least(S, "manufactured_convergence_order", order, 1.8));
    }

    // constant forcing with constant mobility: gradient recovered, V = 0
    {
        let grid = MacroGrid::new(0.0, 2.0, 0.0, 1.0, 20, 12)?;
        let forcing = MacroForcing::from_fn(&grid, |_, _| [0.4, -0.9]);
        let mob = MobilityField::Constant {
            b: [[1.3, 0.2], [0.2, 0.7]],
        };
        let sol = reynolds::solve_pressure(&mob, &forcing, &grid, 1e-13)?;
        let grad = reynolds::pressure_gradient(&sol.p, &grid);
        let mut worst = 0.0f64;
        for g in &grad {
            worst = worst.max((g[0] - 0.4).abs()).max((g[1] + 0.9).abs());
        }
        rows.push(CheckRow::within(S, "constant_forcing_gradient", worst, 0.0, 1e-10));
        let (v1, v2) = reynolds::average_velocity(&sol, &mob, &forcing, &grid);
        rows.push(CheckRow::within(
            S,
            "constant_forcing_velocity_zero",
            norm_inf(&v1).max(norm_inf(&v2)),
            0.0,
            1e-10,
        ));
    }

    // discrete conservation under rotational forcing
    {
        let grid = MacroGrid::new(0.0, 1.0, 0.0, 1.0, 32, 32)?;
        let forcing = MacroForcing::from_fn(&grid, |x, y| {
            [
                -pi * (pi * x).sin() * (pi * y).cos(),
                pi * (pi * x).cos() * (pi * y).sin(),
            ]
        });
        let mob = MobilityField::Constant {
            b: [[0.9, 0.0], [0.0, 0.9]],
        };
        let sol = reynolds::solve_pressure(&mob, &forcing, &grid, 1e-11)?;
        let div = reynolds::flux_divergence_inf(&sol, &mob, &forcing, &grid);
        rows.push(CheckRow::within(S, "flux_divergence", div, 0.0, 1e-8));
        rows.push(CheckRow::within(S, "boundary_flux_total", sol.boundary_flux, 0.0, 0.0));
    }
    Ok(rows)
}

// --- criterion 5: temperature reconstruction -----------------------------

fn suite_temperature() -> Result<Vec<CheckRow>> {
    const S: &str = "temperature";
    let mut rows = Vec::new();

    // pure flux: linear profile with T(0) = b h / k exactly
    {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0)?;
        let prof = reconstruct::temperature_profile(&p, 1.0, 0.0, 128)?;
        rows.push(CheckRow::within(S, "pure_flux_t0_exact", prof.t[0], 1.0, 0.0));
    }

    // unit forcing, constant h, M = 1: quadrature vs the BVP oracle
    {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.7)?;
        let quad_n = 1024;
        let h = 1.0;
        let prof = reconstruct::temperature_profile(&p, h, 1.0, quad_n)?;
        let n = 8192;
        let src: Vec<f64> = (0..=n)
            .map(|i| {
                let z3 = h * i as f64 / n as f64;
                let s = shape(p.m(), h, z3);
                let sd = shape_dz3(p.m(), h, z3);
                p.mobility_scale() * (s * s + sd * sd / (p.m() * p.m()))
            })
            .collect();
        let bvp = oracle::heat_bvp_1d(&src, p.heat_flux(), p.conductivity(), h)?;
        let mut worst = 0.0f64;
        for (i, &z) in prof.z.iter().enumerate() {
            worst = worst.max((prof.t[i] - bvp.interp(z)).abs());
        }
        rows.push(CheckRow::within(S, "quadrature_vs_heat_bvp_8192", worst, 0.0, 1e-6));
        rows.push(CheckRow::within(
            S,
            "top_boundary_exact",
            prof.t[prof.t.len() - 1].abs(),
            0.0,
            0.0,
        ));
        let dz = h / quad_n as f64;
        let flux =
            -p.conductivity() * (-3.0 * prof.t[0] + 4.0 * prof.t[1] - prof.t[2]) / (2.0 * dz);
        rows.push(CheckRow::within(
            S,
            "bottom_flux_error",
            (flux - p.heat_flux()).abs(),
            0.0,
            1e-4,
        ));
    }
    Ok(rows)
}

// --- criterion 6: critical 3D cell problems ------------------------------

fn suite_critcell() -> Result<Vec<CheckRow>> {
    const S: &str = "critcell";
    let mut rows = Vec::new();
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0)?;

    // constant height at the pinned 32x32x64 resolution
    {
        let profile = RoughnessProfile::constant(1.0)?;
        let grid = CellGrid::new(32, 32, 64)?;
        let tol = 1e-8;
        let sol = CriticalCellSolution::solve(&profile, &params, &grid, tol)?;

        // horizontal velocity against the closed 1D profile
        let m = params.m();
        let dz = 1.0 / grid.n3 as f64;
        let mut worst = 0.0f64;
        let smax = (0..grid.n3)
            .map(|k| shape(m, 1.0, (k as f64 + 0.5) * dz))
            .fold(0.0f64, f64::max);
        for k in 0..grid.n3 {
            let z3 = (k as f64 + 0.5) * dz;
            let got = sol.fields[0].u[(k * grid.n2) * grid.n1];
            worst = worst.max((got - shape(m, 1.0, z3)).abs() / smax);
        }
        rows.push(CheckRow::within(S, "constant_h_profile_vs_1d", worst, 0.0, 0.02));

        let t = cell_crit::assemble_tensor(&sol, &params, &profile)?;
        let phi = flow_factor(m, 1.0)?;
        let dev = ((t.a11 - phi) / phi)
            .abs()
            .max(((t.a22 - phi) / phi).abs())
            .max((t.a12 / phi).abs())
            .max((t.a21 / phi).abs());
        rows.push(CheckRow::within(S, "constant_h_tensor_vs_phi", dev, 0.0, 0.03));
        rows.push(CheckRow::within(
            S,
            "constant_h_divergence_fluid",
            sol.fields[0].div_inf_fluid.max(sol.fields[1].div_inf_fluid),
            0.0,
            1e-7,
        ));
        rows.push(CheckRow::within(
            S,
            "constant_h_energy_identity",
            cell_crit::energy_identity_gap(&sol, &params),
            0.0,
            1e-4,
        ));
    }

    // sinusoidal profile: energy identity and Voigt-Reuss bounds
    {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 1)?;
        let grid = CellGrid::new(24, 24, 40)?;
        let sol = CriticalCellSolution::solve(&profile, &params, &grid, 1e-8)?;
        rows.push(CheckRow::within(
            S,
            "sinusoidal_energy_identity",
            cell_crit::energy_identity_gap(&sol, &params),
            0.0,
            1e-4,
        ));
        let t = cell_crit::assemble_tensor(&sol, &params, &profile)?.symmetrized();
        let (lo, hi) = t.eigenvalues();
        // Voigt-Reuss bounds of the flow factor over the cell
        let nq = 512;
        let mut harm = 0.0;
        let mut arith = 0.0;
        for a in 0..nq {
            let z1 = -0.5 + (a as f64 + 0.5) / nq as f64;
            for b in 0..nq {
                let z2 = -0.5 + (b as f64 + 0.5) / nq as f64;
                let phi = flow_factor(params.m(), profile.eval(z1, z2))?;
                harm += 1.0 / phi;
                arith += phi;
            }
        }
        let n2 = (nq * nq) as f64;
        harm = n2 / harm;
        arith /= n2;
        rows.push(CheckRow::at_least(S, "sinusoidal_min_eig_above_harmonic", lo / harm, 1.0));
        rows.push(CheckRow::at_least(S, "sinusoidal_max_eig_below_arithmetic", arith / hi, 1.0));
        rows.push(CheckRow::within(
            S,
            "sinusoidal_divergence_fluid",
            sol.fields[0].div_inf_fluid.max(sol.fields[1].div_inf_fluid),
            0.0,
            1e-7,
        ));
    }
    Ok(rows)
}

// --- criterion 7: regime consistency for vanishing roughness -------------

fn suite_regimes() -> Result<Vec<CheckRow>> {
    const S: &str = "regimes";
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.3)?;
    let profile = RoughnessProfile::sinusoidal(1.0, 0.005, 1, 1)?;
    let grid = MacroGrid::new(0.0, 1.0, 0.0, 1.0, 12, 12)?;
    let pi = std::f64::consts::PI;
    let forcing = MacroForcing::from_fn(&grid, |x, y| {
        [
            -pi * (pi * x).sin() * (pi * y).cos(),
            pi * (pi * x).cos() * (pi * y).sin(),
        ]
    });

    let velocity_for = |mob: &MobilityField| -> Result<(Vec<f64>, Vec<f64>)> {
        let sol = reynolds::solve_pressure(mob, &forcing, &grid, 1e-12)?;
        Ok(reynolds::average_velocity(&sol, mob, &forcing, &grid))
    };

    // subcritical
    let sub = {
        let cg = CellGrid::new(64, 64, 1)?;
        let sol = SubcriticalCellSolution::solve(&profile, &params, &cg, 1e-11)?;
        let t = cell_sub::assemble_tensor(&sol, &params, &profile)?;
        velocity_for(&MobilityField::from_tensor(&t, &params)?)?
    };
    // critical
    let crit = {
        let cg = CellGrid::new(24, 24, 40)?;
        let sol = CriticalCellSolution::solve(&profile, &params, &cg, 1e-8)?;
        let t = cell_crit::assemble_tensor(&sol, &params, &profile)?;
        velocity_for(&MobilityField::from_tensor(&t.symmetrized(), &params)?)?
    };
    // smooth with the h_min reduction
    let smooth = {
        let mob = MobilityField::smooth(&profile, &params, &grid, true)?;
        velocity_for(&mob)?
    };

    let rel_diff = |a: &(Vec<f64>, Vec<f64>), b: &(Vec<f64>, Vec<f64>)| -> f64 {
        let scale = a
            .0
            .iter()
            .chain(&a.1)
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(1e-300);
        let mut worst = 0.0f64;
        for c in 0..a.0.len() {
            worst = worst.max((a.0[c] - b.0[c]).abs()).max((a.1[c] - b.1[c]).abs());
        }
        worst / scale
    };

    Ok(vec![
        CheckRow::within(S, "subcritical_vs_critical", rel_diff(&sub, &crit), 0.0, 0.03),
        CheckRow::within(S, "subcritical_vs_smooth", rel_diff(&sub, &smooth), 0.0, 0.03),
        CheckRow::within(S, "critical_vs_smooth", rel_diff(&crit, &smooth), 0.0, 0.03),
    ])
}

// --- criterion 8: literal-formula comparison harness ----------------------

/// Flow factor as literally printed (the `- 2` sinh-numerator variant),
/// sign-normalized to the implemented SPD convention.
fn flow_factor_literal_minus2(m: f64, h: f64) -> f64 {
    let ep = (m * h).exp();
    let em = (-m * h).exp();
    h - (2.0 / m) * (ep - em - 2.0) / (ep - em)
}

fn suite_discrepancy() -> Result<Vec<CheckRow>> {
    const S: &str = "discrepancy";
    let mut rows = Vec::new();

    // (a) the sinh-numerator flow factor against the shape quadrature
    {
        let (m, h) = (1.0, 1.0);
        let lit = flow_factor_literal_minus2(m, h);
        let quad = trapezoid_shape_quadrature(m, h, 100_000);
        rows.push(CheckRow::report_only(
            S,
            "flow_factor_minus2_vs_quadrature_rel",
            ((lit - quad) / quad).abs(),
        ));
    }

    // (b) vertical temperature with literal fixed upper limit 1 and constant
    // -b/k term, on a channel of height h = 0.8 where the difference shows
    {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.7)?;
        let (m, h) = (p.m(), 0.8);
        let k = p.conductivity();
        let b = p.heat_flux();
        let s2 = |t: f64| {
            if t <= h {
                let s = shape(m, h, t);
                s * s
            } else {
                0.0
            }
        };
        let sd2 = |t: f64| {
            if t <= h {
                let sd = shape_dz3(m, h, t);
                sd * sd
            } else {
                0.0
            }
        };
        // W(F)(z) = int_z^1 int_xi^1 F - z int_0^1 F, by nested Simpson
        let w_of = |f: &dyn Fn(f64) -> f64, z: f64| -> f64 {
            let inner = |xi: f64| oracle::simpson(f, xi, 1.0, 512);
            oracle::simpson(&inner, z, 1.0, 256) - z * oracle::simpson(f, 0.0, 1.0, 512)
        };
        let reference = reconstruct::temperature_profile(&p, h, 1.0, 2048)?;
        let mut worst = 0.0f64;
        for i in 0..=32 {
            let z = h * i as f64 / 32.0;
            let lit = -b / k - w_of(&s2, z) / k - w_of(&sd2, z) / k;
            worst = worst.max((lit - reference.interp(z)).abs());
        }
        rows.push(CheckRow::report_only(
            S,
            "temperature_literal_upper_limit_1_max_dev",
            worst,
        ));
    }

    // (c) smooth-regime temperature from the literal printed V1*/V2* forms
    // (including the repeated e^{M z3}-1 factor and the heat-flux term
    // multiplied by |g|^2) against the quadrature route
    {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.5)?;
        let (m, h) = (p.m(), 0.8);
        let c = profile_coeffs(m, h)?;
        let (a1, a2) = (c.a1, c.a2);
        let k = p.conductivity();
        let g2 = 1.0;
        let v1 = |z: f64| {
            (a1 * a1 * ((2.0 * m * z).exp() - 1.0) + a2 * a2 * ((-2.0 * m * z).exp() - 1.0))
                / (4.0 * m * m)
                + (2.0 / (m * m)) * (a1 * ((m * z).exp() - 1.0) + a2 * ((m * z).exp() - 1.0))
                + (0.5 + a1 * a2) * z * z
                - (a1 * a1 - a2 * a2) * z / (2.0 * m)
                - 2.0 * (a1 - a2) * z / m
        };
        let v2 = |z: f64| {
            0.5 * (a1 * a1 * ((2.0 * m * h).exp() - (2.0 * m * z).exp())
                - a2 * a2 * ((-2.0 * m * h).exp() - (-2.0 * m * z).exp()))
                + a1 * a2 * (h - z) * (h - z)
        };
        let kk = p.permeability();
        let mu = p.mu();
        let mut worst = 0.0f64;
        for i in 0..=32 {
            let z = h * i as f64 / 32.0;
            let lit = -(kk / (k * mu)) * (v1(z) - v1(h)) * g2
                - (p.mu_eff() * kk * kk * m * m / (k * mu * mu)) * (v2(z) - v2(h)) * g2
                - (p.heat_flux() / k) * (z - h) * g2;
            let reference = reconstruct::smooth_temperature(&p, h, [1.0, 0.0], z, 2048)?;
            worst = worst.max((lit - reference).abs());
        }
        rows.push(CheckRow::report_only(
            S,
            "smooth_temperature_literal_v1star_max_dev",
            worst,
        ));
    }
    Ok(rows)
}

// --- criterion 9: byte-identical reruns ----------------------------------

fn suite_repro() -> Result<Vec<CheckRow>> {
    const S: &str = "repro";
    let cfg = RunConfig {
        regime: Regime::Subcritical,
        params: ParamsConfig {
            mu: 1.0,
            mu_eff: 1.0,
            permeability: 1.0,
            conductivity: 1.0,
            heat_flux: 0.5,
        },
        profile: RoughnessProfile::sinusoidal(1.0, 0.25, 1, 1)?,
        cell_grid: CellGrid::new(24, 24, 8)?,
        macro_grid: MacroGrid::new(0.0, 1.0, 0.0, 1.0, 8, 8)?,
        forcing: ForcingConfig::Vortex { amplitude: 0.7 },
        solver: SolverConfig::default(),
        use_h_min: false,
        write_slices: true,
        threads: Some(2),
    };
    let base = std::env::temp_dir().join(format!("brinkfilm-verify-{}", std::process::id()));
    let d1 = base.join("run-a");
    let d2 = base.join("run-b");
    let _ = std::fs::remove_dir_all(&base);
    pipeline::run_pipeline(&cfg, &d1, Stage::Full)?;
    pipeline::run_pipeline(&cfg, &d2, Stage::Full)?;
    let mut differing = 0.0;
    for name in pipeline::expected_outputs(&cfg) {
        let a = std::fs::read(d1.join(&name))?;
        let b = std::fs::read(d2.join(&name))?;
        if a != b {
            differing += 1.0;
        }
    }
    let _ = std::fs::remove_dir_all(&base);
    Ok(vec![CheckRow::within(
        S,
        "rerun_byte_identical_files_differing",
        differing,
        0.0,
        0.0,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_lists_available() {
        let err = run_suite("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope") && msg.contains("flowfactor"));
    }

    #[test]
    fn flowfactor_suite_passes() {
        let rows = suite_flowfactor().unwrap();
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn discrepancy_rows_are_report_only_but_nonzero() {
        let rows = suite_discrepancy().unwrap();
        assert!(rows.iter().all(|r| r.pass));
        // the literal formulas genuinely deviate from the validated route
        assert!(rows.iter().all(|r| r.measured > 1e-6), "{rows:?}");
    }

    #[test]
    fn csv_rendering_has_header_and_rows() {
        let rows = vec![CheckRow::within("x", "a", 0.0, 0.0, 1.0)];
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with("suite,check,measured"));
        assert!(csv.contains("pass"));
    }
}
