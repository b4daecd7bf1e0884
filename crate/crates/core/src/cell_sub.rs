//! Periodic scalar cell problems on `Z'` for the subcritical roughness
//! regime: solve `-div( phi_M(h(z')) (e_i + grad pi^i) ) = 0` for the
//! correctors `pi^i` and assemble the effective mobility
//! `(A_M)_ij = int_{Z'} phi (e_i + grad pi^i) . (e_j + grad pi^j) dz'`.
//!
//! Discretization: cell-centered finite volumes on the unit square with
//! harmonic averaging of `phi` at faces, which reproduces the classical 1D
//! laminate limits exactly. The singular periodic system keeps its constant
//! null vector out of the Krylov space by mean projection instead of pinning
//! a node, so the discrete operator stays symmetric.

use rayon::join;

use crate::error::{Error, Result};
use crate::linsolve::{self, SolveStats};
use crate::params::{CellGrid, PhysicalParams, RoughnessProfile};
use crate::profile::flow_factor;
use crate::tensor::{EffectiveTensor, Regime};

/// Zero-mean periodic correctors for both directions plus solver
/// diagnostics and the sampled flow factor they were solved against.
#[derive(Debug, Clone)]
pub struct SubcriticalCellSolution {
    pub grid: CellGrid,
    /// Cell-centered corrector fields, mean zero over `Z'`.
    pub pi: [Vec<f64>; 2],
    /// Cell-centered corrector gradients (centered differences).
    pub grad_pi: [Vec<[f64; 2]>; 2],
    /// Flow factor `phi_M(h)` at cell centers.
    pub phi: Vec<f64>,
    pub residual_inf: [f64; 2],
    pub iterations: [usize; 2],
}

struct FaceCoeffs {
    n1: usize,
    n2: usize,
    /// West-face coefficient of each cell (periodic), harmonic average.
    cx: Vec<f64>,
    /// South-face coefficient of each cell (periodic), harmonic average.
    cy: Vec<f64>,
}

fn sample_phi(profile: &RoughnessProfile, params: &PhysicalParams, grid: &CellGrid) -> Result<Vec<f64>> {
    let m = params.m();
    let mut phi = Vec::with_capacity(grid.cells_2d());
    for j in 0..grid.n2 {
        for i in 0..grid.n1 {
            let h = profile.eval(grid.z1_center(i), grid.z2_center(j));
            let p = flow_factor(m, h)?;
            if !(p > 0.0) {
                return Err(Error::NonPositive {
                    name: "phi_M(h)",
                    value: p,
                });
            }
            phi.push(p);
        }
    }
    Ok(phi)
}

fn face_coeffs(phi: &[f64], grid: &CellGrid) -> FaceCoeffs {
    let (n1, n2) = (grid.n1, grid.n2);
    let harm = |a: f64, b: f64| 2.0 * a * b / (a + b);
    let mut cx = vec![0.0; n1 * n2];
    let mut cy = vec![0.0; n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            let c = phi[j * n1 + i];
            let w = phi[j * n1 + (i + n1 - 1) % n1];
            let s = phi[((j + n2 - 1) % n2) * n1 + i];
            cx[j * n1 + i] = harm(w, c);
            cy[j * n1 + i] = harm(s, c);
        }
    }
    FaceCoeffs { n1, n2, cx, cy }
}

impl FaceCoeffs {
    /// `out = -div(c grad x)` on the periodic grid.
    fn apply(&self, dx: f64, dy: f64, x: &[f64], out: &mut [f64]) {
        let (n1, n2) = (self.n1, self.n2);
        let rx = 1.0 / (dx * dx);
        let ry = 1.0 / (dy * dy);
        for j in 0..n2 {
            let jn = (j + 1) % n2;
            for i in 0..n1 {
                let ie = (i + 1) % n1;
                let iw = (i + n1 - 1) % n1;
                let js = (j + n2 - 1) % n2;
                let c = j * n1 + i;
                let fe = self.cx[j * n1 + ie] * (x[j * n1 + ie] - x[c]);
                let fw = self.cx[c] * (x[c] - x[j * n1 + iw]);
                let fn_ = self.cy[jn * n1 + i] * (x[jn * n1 + i] - x[c]);
                let fs = self.cy[c] * (x[c] - x[js * n1 + i]);
                out[c] = -((fe - fw) * rx + (fn_ - fs) * ry);
            }
        }
    }

    /// `div(c e_dir)` (the corrector right-hand side).
    fn rhs(&self, dx: f64, dy: f64, dir: usize) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let mut b = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let c = j * n1 + i;
                b[c] = if dir == 0 {
                    (self.cx[j * n1 + (i + 1) % n1] - self.cx[c]) / dx
                } else {
                    (self.cy[((j + 1) % n2) * n1 + i] - self.cy[c]) / dy
                };
            }
        }
        b
    }

    fn inv_diag(&self, dx: f64, dy: f64) -> Vec<f64> {
        let (n1, n2) = (self.n1, self.n2);
        let rx = 1.0 / (dx * dx);
        let ry = 1.0 / (dy * dy);
        let mut d = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let c = j * n1 + i;
                let s = (self.cx[c] + self.cx[j * n1 + (i + 1) % n1]) * rx
                    + (self.cy[c] + self.cy[((j + 1) % n2) * n1 + i]) * ry;
                d[c] = 1.0 / s;
            }
        }
        d
    }
}

/// Solve the periodic corrector problem in one direction. Returns the
/// zero-mean field and solver statistics. The residual equals the discrete
/// divergence of `phi (e_i + grad pi^i)`, so a converged solve is a
/// conservative flux field.
pub fn solve_corrector(
    profile: &RoughnessProfile,
    params: &PhysicalParams,
    grid: &CellGrid,
    direction: usize,
    tol: f64,
) -> Result<(Vec<f64>, SolveStats)> {
    if tol <= 0.0 {
        return Err(Error::NonPositive {
            name: "tol",
            value: tol,
        });
    }
    assert!(direction < 2, "direction must be 0 or 1");
    let phi = sample_phi(profile, params, grid)?;
    let faces = face_coeffs(&phi, grid);
    solve_with_faces(&faces, grid, direction, tol)
}

fn solve_with_faces(
    faces: &FaceCoeffs,
    grid: &CellGrid,
    direction: usize,
    tol: f64,
) -> Result<(Vec<f64>, SolveStats)> {
    let (dx, dy) = (grid.dx(), grid.dy());
    let b = faces.rhs(dx, dy, direction);
    let scale = linsolve::norm_inf(&b);
    let mut x = vec![0.0; b.len()];
    if scale == 0.0 {
        // constant coefficient: e_i is already divergence free
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                residual_inf: 0.0,
                converged: true,
            },
        ));
    }
    let inv_diag = faces.inv_diag(dx, dy);
    let proj: &dyn Fn(&mut [f64]) = &linsolve::project_zero_mean;
    let max_iter = 40 * (grid.n1 + grid.n2).max(100);
    let stats = linsolve::cg(
        |v, out| faces.apply(dx, dy, v, out),
        Some(&inv_diag),
        &b,
        &mut x,
        tol * scale,
        max_iter,
        Some(proj),
    );
    if !stats.converged {
        return Err(Error::NoConvergence {
            solver: "subcritical cell corrector",
            residual: stats.residual_inf,
            iterations: stats.iterations,
            tol: tol * scale,
        });
    }
    Ok((x, stats))
}

impl SubcriticalCellSolution {
    /// Solve both corrector problems (concurrently) on one grid.
    pub fn solve(
        profile: &RoughnessProfile,
        params: &PhysicalParams,
        grid: &CellGrid,
        tol: f64,
    ) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::NonPositive {
                name: "tol",
                value: tol,
            });
        }
        let phi = sample_phi(profile, params, grid)?;
        let faces = face_coeffs(&phi, grid);
        let (r1, r2) = join(
            || solve_with_faces(&faces, grid, 0, tol),
            || solve_with_faces(&faces, grid, 1, tol),
        );
        let (pi1, s1) = r1?;
        let (pi2, s2) = r2?;
        let grad_pi = [center_gradient(&pi1, grid), center_gradient(&pi2, grid)];
        Ok(Self {
            grid: *grid,
            pi: [pi1, pi2],
            grad_pi,
            phi,
            residual_inf: [s1.residual_inf, s2.residual_inf],
            iterations: [s1.iterations, s2.iterations],
        })
    }

    /// Max-norm of the discrete divergence of `phi (e_i + grad pi^i)`;
    /// equals the final solver residual.
    pub fn max_flux_divergence(&self) -> f64 {
        self.residual_inf[0].max(self.residual_inf[1])
    }

    /// Bilinear periodic interpolation of the corrector gradient at an
    /// arbitrary cell point.
    pub fn grad_pi_at(&self, direction: usize, z1: f64, z2: f64) -> [f64; 2] {
        let g = &self.grad_pi[direction];
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        [
            crate::params::bilinear_cell_centered(&|c| g[c][0], n1, n2, z1, z2),
            crate::params::bilinear_cell_centered(&|c| g[c][1], n1, n2, z1, z2),
        ]
    }
}

fn center_gradient(pi: &[f64], grid: &CellGrid) -> Vec<[f64; 2]> {
    let (n1, n2) = (grid.n1, grid.n2);
    let (dx, dy) = (grid.dx(), grid.dy());
    let mut g = vec![[0.0; 2]; n1 * n2];
    for j in 0..n2 {
        for i in 0..n1 {
            let ie = (i + 1) % n1;
            let iw = (i + n1 - 1) % n1;
            let jn = (j + 1) % n2;
            let js = (j + n2 - 1) % n2;
            g[j * n1 + i] = [
                (pi[j * n1 + ie] - pi[j * n1 + iw]) / (2.0 * dx),
                (pi[jn * n1 + i] - pi[js * n1 + i]) / (2.0 * dy),
            ];
        }
    }
    g
}

/// Assemble the effective mobility from the solved correctors in the
/// discrete energy form
/// `(A_M)_ij = sum_faces c_face (e_i + grad pi^i)_f (e_j + grad pi^j)_f dV`,
/// which is symmetric positive definite by construction and agrees with the
/// flux form `int phi (e_i + grad pi^i) . e_j` up to the solver residual.
pub fn assemble_tensor(
    solution: &SubcriticalCellSolution,
    params: &PhysicalParams,
    profile: &RoughnessProfile,
) -> Result<EffectiveTensor> {
    let grid = &solution.grid;
    let (n1, n2) = (grid.n1, grid.n2);
    let (dx, dy) = (grid.dx(), grid.dy());
    let faces = face_coeffs(&solution.phi, grid);
    let vol = dx * dy;

    let mut a = [[0.0f64; 2]; 2];
    // face gradients of both correctors
    for j in 0..n2 {
        for i in 0..n1 {
            let c = j * n1 + i;
            let iw = (i + n1 - 1) % n1;
            let js = (j + n2 - 1) % n2;
            // x-face (west of cell c): component along e1
            let gx = [
                (solution.pi[0][c] - solution.pi[0][j * n1 + iw]) / dx + 1.0,
                (solution.pi[1][c] - solution.pi[1][j * n1 + iw]) / dx,
            ];
            // y-face (south of cell c): component along e2
            let gy = [
                (solution.pi[0][c] - solution.pi[0][js * n1 + i]) / dy,
                (solution.pi[1][c] - solution.pi[1][js * n1 + i]) / dy + 1.0,
            ];
            for p in 0..2 {
                for q in 0..2 {
                    a[p][q] += vol * (faces.cx[c] * gx[p] * gx[q] + faces.cy[c] * gy[p] * gy[q]);
                }
            }
        }
    }

    let tensor = EffectiveTensor {
        a11: a[0][0],
        a12: a[0][1],
        a21: a[1][0],
        a22: a[1][1],
        regime: Regime::Subcritical,
        m: params.m(),
        profile: profile.clone(),
    };
    tensor.check_spd()?;
    Ok(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn constant_height_gives_zero_corrector_and_isotropic_tensor() {
        let profile = RoughnessProfile::constant(1.0).unwrap();
        let grid = CellGrid::new(32, 32, 1).unwrap();
        let p = params();
        let sol = SubcriticalCellSolution::solve(&profile, &p, &grid, 1e-10).unwrap();
        assert!(linsolve::norm_inf(&sol.pi[0]) <= 1e-12);
        assert!(linsolve::norm_inf(&sol.pi[1]) <= 1e-12);
        let t = assemble_tensor(&sol, &p, &profile).unwrap();
        let phi = flow_factor(1.0, 1.0).unwrap();
        assert!((t.a11 - phi).abs() <= 1e-10 * phi);
        assert!((t.a22 - phi).abs() <= 1e-10 * phi);
        assert!(t.a12.abs() <= 1e-12 && t.a21.abs() <= 1e-12);
    }

    #[test]
    fn transverse_corrector_vanishes_for_laminate() {
        // h varies only in z1 => pi^2 == 0
        let profile = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0).unwrap();
        let grid = CellGrid::new(48, 48, 1).unwrap();
        let sol = SubcriticalCellSolution::solve(&profile, &params(), &grid, 1e-11).unwrap();
        assert!(linsolve::norm_inf(&sol.pi[1]) <= 1e-12);
        assert!(linsolve::norm_inf(&sol.pi[0]) > 1e-3);
    }

    #[test]
    fn correctors_have_zero_mean_and_conservative_flux() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.25, 1, 1).unwrap();
        let grid = CellGrid::new(32, 32, 1).unwrap();
        let tol = 1e-10;
        let sol = SubcriticalCellSolution::solve(&profile, &params(), &grid, tol).unwrap();
        for d in 0..2 {
            let mean = sol.pi[d].iter().sum::<f64>() / sol.pi[d].len() as f64;
            assert!(mean.abs() <= 1e-10);
        }
        assert!(sol.max_flux_divergence() <= 10.0 * tol);
    }

    #[test]
    fn laminate_tensor_matches_1d_reduction() {
        // h = 1 + 0.3 cos(2 pi z1): a11 = harmonic mean of phi along z1,
        // a22 = arithmetic mean, off-diagonals zero
        let profile = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0).unwrap();
        let grid = CellGrid::new(128, 128, 1).unwrap();
        let p = params();
        let sol = SubcriticalCellSolution::solve(&profile, &p, &grid, 1e-12).unwrap();
        let t = assemble_tensor(&sol, &p, &profile).unwrap();
        let h = |z1: f64, z2: f64| profile.eval(z1, z2);
        let reference = oracle::laminate_tensor_1d(&h, 0, p.m(), 100_000).unwrap();
        assert!(
            ((t.a11 - reference[0][0]) / reference[0][0]).abs() < 5e-3,
            "a11 {} vs harmonic {}",
            t.a11,
            reference[0][0]
        );
        assert!(
            ((t.a22 - reference[1][1]) / reference[1][1]).abs() < 5e-3,
            "a22 {} vs arithmetic {}",
            t.a22,
            reference[1][1]
        );
        assert!(t.a12.abs() < 1e-10 && t.a21.abs() < 1e-10);
    }

    #[test]
    fn one_dimensional_corrector_gives_constant_flux() {
        // for the laminate the discrete flux phi (1 + d pi/d z1) is the
        // harmonic mean in every cell
        let profile = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0).unwrap();
        let grid = CellGrid::new(64, 8, 1).unwrap();
        let p = params();
        let (pi, _) = solve_corrector(&profile, &p, &grid, 0, 1e-12).unwrap();
        let phi = sample_phi(&profile, &p, &grid).unwrap();
        let faces = face_coeffs(&phi, &grid);
        let dx = grid.dx();
        let j = 0;
        let flux: Vec<f64> = (0..grid.n1)
            .map(|i| {
                let iw = (i + grid.n1 - 1) % grid.n1;
                faces.cx[j * grid.n1 + i] * ((pi[j * grid.n1 + i] - pi[j * grid.n1 + iw]) / dx + 1.0)
            })
            .collect();
        let mean = flux.iter().sum::<f64>() / flux.len() as f64;
        for f in &flux {
            assert!((f - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn tensor_spd_and_within_mean_bounds() {
        let profiles = [
            RoughnessProfile::sinusoidal(1.0, 0.25, 1, 1).unwrap(),
            RoughnessProfile::sinusoidal(1.2, 0.35, 2, 1).unwrap(),
            RoughnessProfile::sampled(4, 4, vec![1.0, 1.4, 1.1, 0.9, 1.2, 1.3, 0.8, 1.0, 1.1, 0.95, 1.25, 1.05, 1.0, 1.15, 0.85, 1.2]).unwrap(),
        ];
        let p = params();
        let grid = CellGrid::new(48, 48, 1).unwrap();
        for profile in &profiles {
            let sol = SubcriticalCellSolution::solve(profile, &p, &grid, 1e-10).unwrap();
            let t = assemble_tensor(&sol, &p, profile).unwrap();
            assert!(t.asymmetry() <= 1e-8);
            let (lo, hi) = t.eigenvalues();
            assert!(lo > 0.0);
            assert!(t.a11 * t.a22 - t.a12 * t.a12 > 0.0);
            // Voigt-Reuss: harmonic mean <= eigenvalues <= arithmetic mean
            let harm = 1.0
                / (sol.phi.iter().map(|p| 1.0 / p).sum::<f64>() / sol.phi.len() as f64);
            let arith = sol.phi.iter().sum::<f64>() / sol.phi.len() as f64;
            assert!(lo >= harm * (1.0 - 1e-6), "lo {lo} < harmonic {harm}");
            assert!(hi <= arith * (1.0 + 1e-6), "hi {hi} > arithmetic {arith}");
        }
    }

    #[test]
    fn rotating_profile_swaps_diagonal_entries() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 0).unwrap();
        let rotated = profile.rotated();
        let p = params();
        let grid = CellGrid::new(48, 48, 1).unwrap();
        let t1 = {
            let s = SubcriticalCellSolution::solve(&profile, &p, &grid, 1e-12).unwrap();
            assemble_tensor(&s, &p, &profile).unwrap()
        };
        let t2 = {
            let s = SubcriticalCellSolution::solve(&rotated, &p, &grid, 1e-12).unwrap();
            assemble_tensor(&s, &p, &rotated).unwrap()
        };
        assert!((t1.a11 - t2.a22).abs() <= 1e-8 * t1.a11);
        assert!((t1.a22 - t2.a11).abs() <= 1e-8 * t1.a22);
    }

    #[test]
    fn tensor_entries_converge_under_refinement() {
        // genuinely two-dimensional smooth profile
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 2).unwrap();
        let p = params();
        let mut entries = Vec::new();
        for n in [32usize, 64, 128] {
            let grid = CellGrid::new(n, n, 1).unwrap();
            let s = SubcriticalCellSolution::solve(&profile, &p, &grid, 1e-12).unwrap();
            let t = assemble_tensor(&s, &p, &profile).unwrap();
            entries.push([t.a11, t.a22]);
        }
        for c in 0..2 {
            let d1 = (entries[1][c] - entries[0][c]).abs();
            let d2 = (entries[2][c] - entries[1][c]).abs();
            assert!(d2 < d1, "not Cauchy: {d1} then {d2}");
            let order = (d1 / d2).log2();
            assert!(order >= 1.5, "observed order {order}");
        }
    }
}
