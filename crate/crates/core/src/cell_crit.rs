//! 3D Darcy-Brinkman cell problems of the critical roughness regime on the
//! rough cell `Z = { (z', z3) : z' in Z', 0 < z3 < h(z') }`:
//!
//! `-(2/M^2) div(D[w^i]) + grad pi^i + w^i = e_i`, `div w^i = 0`,
//! no slip on the bottom and on the rough surface, `Z'`-periodic laterally.
//!
//! The rough geometry is handled by fictitious-domain Brinkman penalization:
//! the cell box is `Z' x (0, h_max)` on a regular staggered (MAC) grid and
//! the drag coefficient jumps to `1e8` above `z3 = h(z')`, which pins the
//! solid-region velocity at the documented leakage level (<= 1e-6 of the
//! flow scale). Since `div w = 0` is enforced everywhere, the viscous term
//! reduces to `-(1/M^2) laplacian`, and the components decouple in the inner
//! solves. The saddle point is solved Uzawa-style: conjugate gradients on
//! the pressure Schur complement with inner line-preconditioned CG velocity
//! solves, the constant pressure null vector removed by mean projection.

use rayon::join;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linsolve::{self, norm_inf, project_zero_mean};
use crate::params::{CellGrid, PhysicalParams, RoughnessProfile};
use crate::tensor::{EffectiveTensor, Regime};

/// Penalization drag above the rough surface, relative to the unit
/// zero-order drag of the scaled cell problem.
pub const PENALIZATION: f64 = 1e8;

#[derive(Debug, Clone)]
pub(crate) struct Geom {
    n1: usize,
    n2: usize,
    n3: usize,
    dx: f64,
    dy: f64,
    dz: f64,
    box_height: f64,
    inv_m2: f64,
    sigma_u: Vec<f64>,
    sigma_v: Vec<f64>,
    /// interior w levels k = 1..n3-1, index `((k-1) n2 + j) n1 + i`
    sigma_w: Vec<f64>,
    sigma_center: Vec<f64>,
    fluid_center: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Comp {
    U,
    V,
    W,
}

impl Geom {
    fn build(
        profile: &RoughnessProfile,
        params: &PhysicalParams,
        grid: &CellGrid,
        box_height: f64,
    ) -> Result<Self> {
        let (n1, n2, n3) = (grid.n1, grid.n2, grid.n3);
        if n1 < 8 || n2 < 8 || n3 < 8 {
            return Err(Error::GridTooCoarse {
                what: format!("critical cell grid {n1}x{n2}x{n3} (need >= 8 per direction)"),
            });
        }
        let h_max = profile.h_max();
        if box_height < h_max * (1.0 - 1e-12) {
            return Err(Error::BoxTooSmall {
                h_max,
                box_height,
            });
        }
        let (dx, dy) = (grid.dx(), grid.dy());
        let dz = box_height / n3 as f64;
        let m = params.m();
        let inv_m2 = 1.0 / (m * m);

        let mut sigma_u = vec![0.0; n1 * n2 * n3];
        let mut sigma_v = vec![0.0; n1 * n2 * n3];
        let mut sigma_w = vec![0.0; n1 * n2 * (n3 - 1)];
        let mut sigma_center = vec![0.0; n1 * n2 * n3];
        let mut fluid_center = vec![true; n1 * n2 * n3];

        // heights along the three families of columns
        let mut h_u = vec![0.0; n1 * n2];
        let mut h_v = vec![0.0; n1 * n2];
        let mut h_c = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                let x_face = -0.5 + i as f64 * dx;
                let y_face = -0.5 + j as f64 * dy;
                let xc = grid.z1_center(i);
                let yc = grid.z2_center(j);
                h_u[j * n1 + i] = profile.eval(x_face, yc);
                h_v[j * n1 + i] = profile.eval(xc, y_face);
                h_c[j * n1 + i] = profile.eval(xc, yc);
            }
        }
        for k in 0..n3 {
            let zc = (k as f64 + 0.5) * dz;
            for j in 0..n2 {
                for i in 0..n1 {
                    let c = (k * n2 + j) * n1 + i;
                    if zc > h_u[j * n1 + i] {
                        sigma_u[c] = PENALIZATION;
                    }
                    if zc > h_v[j * n1 + i] {
                        sigma_v[c] = PENALIZATION;
                    }
                    if zc > h_c[j * n1 + i] {
                        sigma_center[c] = PENALIZATION;
                        fluid_center[c] = false;
                    }
                }
            }
        }
        for k in 1..n3 {
            let zf = k as f64 * dz;
            for j in 0..n2 {
                for i in 0..n1 {
                    if zf > h_c[j * n1 + i] {
                        sigma_w[((k - 1) * n2 + j) * n1 + i] = PENALIZATION;
                    }
                }
            }
        }
        Ok(Self {
            n1,
            n2,
            n3,
            dx,
            dy,
            dz,
            box_height,
            inv_m2,
            sigma_u,
            sigma_v,
            sigma_w,
            sigma_center,
            fluid_center,
        })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n2 + j) * self.n1 + i
    }

    fn n_cells(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    fn n_w(&self) -> usize {
        self.n1 * self.n2 * (self.n3 - 1)
    }

    fn sigma(&self, comp: Comp) -> &[f64] {
        match comp {
            Comp::U => &self.sigma_u,
            Comp::V => &self.sigma_v,
            Comp::W => &self.sigma_w,
        }
    }

    /// Diagonal of the component operator at a DOF.
    fn op_diag(&self, comp: Comp, k: usize, sigma: f64) -> f64 {
        let rz = 1.0 / (self.dz * self.dz);
        let zdiag = match comp {
            Comp::W => 2.0 * rz,
            _ => {
                if k == 0 || k == self.n3 - 1 {
                    3.0 * rz
                } else {
                    2.0 * rz
                }
            }
        };
        1.0 + sigma
            + self.inv_m2 * (2.0 / (self.dx * self.dx) + 2.0 / (self.dy * self.dy) + zdiag)
    }

    /// `out = (1 + sigma) x - (1/M^2) laplacian(x)` for a horizontal
    /// component (ghost reflection across the walls) or the vertical
    /// component (Dirichlet zero on the walls).
    fn apply_velocity(&self, comp: Comp, x: &[f64], out: &mut [f64]) {
        let (n1, n2) = (self.n1, self.n2);
        let nz = if comp == Comp::W { self.n3 - 1 } else { self.n3 };
        let rx = self.inv_m2 / (self.dx * self.dx);
        let ry = self.inv_m2 / (self.dy * self.dy);
        let rz = self.inv_m2 / (self.dz * self.dz);
        let sigma = self.sigma(comp);
        for k in 0..nz {
            for j in 0..n2 {
                let jp = (j + 1) % n2;
                let jm = (j + n2 - 1) % n2;
                for i in 0..n1 {
                    let ip = (i + 1) % n1;
                    let im = (i + n1 - 1) % n1;
                    let c = (k * n2 + j) * n1 + i;
                    let xc = x[c];
                    let mut acc = (1.0 + sigma[c]) * xc;
                    acc += rx * (2.0 * xc - x[(k * n2 + j) * n1 + ip] - x[(k * n2 + j) * n1 + im]);
                    acc += ry * (2.0 * xc - x[(k * n2 + jp) * n1 + i] - x[(k * n2 + jm) * n1 + i]);
                    let (zm, zp) = match comp {
                        Comp::W => (
                            if k == 0 { 0.0 } else { x[((k - 1) * n2 + j) * n1 + i] },
                            if k == nz - 1 { 0.0 } else { x[((k + 1) * n2 + j) * n1 + i] },
                        ),
                        _ => (
                            if k == 0 { -xc } else { x[((k - 1) * n2 + j) * n1 + i] },
                            if k == nz - 1 { -xc } else { x[((k + 1) * n2 + j) * n1 + i] },
                        ),
                    };
                    acc += rz * (2.0 * xc - zm - zp);
                    out[c] = acc;
                }
            }
        }
    }

    /// Vertical-line (tridiagonal in z) preconditioner: exact inverse of the
    /// operator restricted to each column, which captures both the stiff
    /// vertical coupling and the penalization jump.
    fn line_precondition(&self, comp: Comp, r: &[f64], z: &mut [f64]) {
        let (n1, n2) = (self.n1, self.n2);
        let nz = if comp == Comp::W { self.n3 - 1 } else { self.n3 };
        let rz = self.inv_m2 / (self.dz * self.dz);
        let sigma = self.sigma(comp);
        let mut c_buf = vec![0.0; nz];
        let mut d_buf = vec![0.0; nz];
        for j in 0..n2 {
            for i in 0..n1 {
                // Thomas sweep down the column
                let at = |k: usize| (k * n2 + j) * n1 + i;
                let diag =
                    |k: usize| self.op_diag(comp, if comp == Comp::W { k + 1 } else { k }, sigma[at(k)]);
                let mut m = diag(0);
                c_buf[0] = -rz / m;
                d_buf[0] = r[at(0)] / m;
                for k in 1..nz {
                    m = diag(k) + rz * c_buf[k - 1];
                    c_buf[k] = -rz / m;
                    d_buf[k] = (r[at(k)] + rz * d_buf[k - 1]) / m;
                }
                z[at(nz - 1)] = d_buf[nz - 1];
                for k in (0..nz - 1).rev() {
                    z[at(k)] = d_buf[k] - c_buf[k] * z[at(k + 1)];
                }
            }
        }
    }

    /// Gradient of a cell-centered field at the component DOFs.
    fn grad_component(&self, comp: Comp, p: &[f64], out: &mut [f64]) {
        let (n1, n2) = (self.n1, self.n2);
        match comp {
            Comp::U => {
                for k in 0..self.n3 {
                    for j in 0..n2 {
                        for i in 0..n1 {
                            let im = (i + n1 - 1) % n1;
                            out[self.idx(i, j, k)] =
                                (p[self.idx(i, j, k)] - p[self.idx(im, j, k)]) / self.dx;
                        }
                    }
                }
            }
            Comp::V => {
                for k in 0..self.n3 {
                    for j in 0..n2 {
                        let jm = (j + n2 - 1) % n2;
                        for i in 0..n1 {
                            out[self.idx(i, j, k)] =
                                (p[self.idx(i, j, k)] - p[self.idx(i, jm, k)]) / self.dy;
                        }
                    }
                }
            }
            Comp::W => {
                for k in 1..self.n3 {
                    for j in 0..n2 {
                        for i in 0..n1 {
                            out[((k - 1) * n2 + j) * n1 + i] =
                                (p[self.idx(i, j, k)] - p[self.idx(i, j, k - 1)]) / self.dz;
                        }
                    }
                }
            }
        }
    }

    /// Discrete divergence of a staggered field at cell centers; `w` holds
    /// only the interior levels (the wall fluxes vanish).
    fn divergence(&self, u: &[f64], v: &[f64], w: &[f64], out: &mut [f64]) {
        let (n1, n2, n3) = (self.n1, self.n2, self.n3);
        for k in 0..n3 {
            for j in 0..n2 {
                let jp = (j + 1) % n2;
                for i in 0..n1 {
                    let ip = (i + 1) % n1;
                    let c = self.idx(i, j, k);
                    let du = (u[self.idx(ip, j, k)] - u[c]) / self.dx;
                    let dv = (v[self.idx(i, jp, k)] - v[c]) / self.dy;
                    let wm = if k == 0 { 0.0 } else { w[((k - 1) * n2 + j) * n1 + i] };
                    let wp = if k == n3 - 1 { 0.0 } else { w[(k * n2 + j) * n1 + i] };
                    out[c] = du + dv + (wp - wm) / self.dz;
                }
            }
        }
    }

    /// Jacobi-type diagonal for the pressure Schur complement,
    /// `d_c ~ sum_faces (1 / a_face) / spacing^2`.
    fn schur_diag(&self) -> Vec<f64> {
        let (n1, n2, n3) = (self.n1, self.n2, self.n3);
        let mut d = vec![0.0; self.n_cells()];
        let rx = 1.0 / (self.dx * self.dx);
        let ry = 1.0 / (self.dy * self.dy);
        let rz = 1.0 / (self.dz * self.dz);
        for k in 0..n3 {
            for j in 0..n2 {
                let jp = (j + 1) % n2;
                for i in 0..n1 {
                    let ip = (i + 1) % n1;
                    let c = self.idx(i, j, k);
                    let mut s = 0.0;
                    s += rx / self.op_diag(Comp::U, k, self.sigma_u[c]);
                    s += rx / self.op_diag(Comp::U, k, self.sigma_u[self.idx(ip, j, k)]);
                    s += ry / self.op_diag(Comp::V, k, self.sigma_v[c]);
                    s += ry / self.op_diag(Comp::V, k, self.sigma_v[self.idx(i, jp, k)]);
                    if k > 0 {
                        s += rz / self.op_diag(Comp::W, k, self.sigma_w[((k - 1) * n2 + j) * n1 + i]);
                    }
                    if k < n3 - 1 {
                        s += rz / self.op_diag(Comp::W, k + 1, self.sigma_w[(k * n2 + j) * n1 + i]);
                    }
                    d[c] = s;
                }
            }
        }
        d
    }

    /// Solve the component system `A x = rhs` with line-preconditioned CG.
    fn solve_component(
        &self,
        comp: Comp,
        rhs: &[f64],
        x: &mut [f64],
        rel_tol: f64,
    ) -> Result<linsolve::SolveStats> {
        let scale = norm_inf(rhs);
        if scale == 0.0 {
            x.fill(0.0);
            return Ok(linsolve::SolveStats {
                iterations: 0,
                residual_inf: 0.0,
                converged: true,
            });
        }
        let stats = linsolve::pcg(
            |v, out| self.apply_velocity(comp, v, out),
            |r, z| self.line_precondition(comp, r, z),
            rhs,
            x,
            rel_tol * scale,
            60_000,
            None,
        );
        if !stats.converged {
            return Err(Error::NoConvergence {
                solver: "critical cell velocity component",
                residual: stats.residual_inf,
                iterations: stats.iterations,
                tol: rel_tol * scale,
            });
        }
        Ok(stats)
    }
}

/// One direction of the critical cell solve: staggered velocity components
/// (`w` includes the zero wall levels), cell-centered pressure, residuals.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionField {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Vertical component on all `n3 + 1` face levels; the wall levels are
    /// identically zero.
    pub w: Vec<f64>,
    pub pressure: Vec<f64>,
    /// Max-norm of the discrete divergence over fluid cells.
    pub div_inf_fluid: f64,
    /// Max-norm of the discrete divergence over all cells.
    pub div_inf: f64,
    pub momentum_residual_inf: f64,
    pub outer_iterations: usize,
}

/// Both direction solves plus the geometry they were computed on.
#[derive(Debug, Clone)]
pub struct CriticalCellSolution {
    pub grid: CellGrid,
    pub box_height: f64,
    pub fields: [DirectionField; 2],
    pub(crate) geom: Geom,
}

const INNER_REL_TOL: f64 = 1e-11;

/// Uzawa / Schur-complement solve; `force_dir = None` runs the homogeneous
/// problem (zero forcing), used by the invariant tests.
fn schur_solve(geom: &Geom, force_dir: Option<usize>, tol: f64) -> Result<DirectionField> {
    let nc = geom.n_cells();
    let nw = geom.n_w();
    let comps = [Comp::U, Comp::V, Comp::W];
    let sizes = [nc, nc, nw];

    // forcing per component
    let mut force: [Vec<f64>; 3] = [vec![0.0; nc], vec![0.0; nc], vec![0.0; nw]];
    if let Some(dir) = force_dir {
        assert!(dir < 2, "direction must be 0 or 1");
        force[dir].fill(1.0);
    }

    let mut vel: [Vec<f64>; 3] = [vec![0.0; nc], vec![0.0; nc], vec![0.0; nw]];
    let mut grad: [Vec<f64>; 3] = [vec![0.0; nc], vec![0.0; nc], vec![0.0; nw]];
    let mut rhs: [Vec<f64>; 3] = [vec![0.0; nc], vec![0.0; nc], vec![0.0; nw]];

    // g = div(A^{-1} F)
    let mut g = vec![0.0; nc];
    for (ci, comp) in comps.iter().enumerate() {
        if norm_inf(&force[ci]) > 0.0 {
            geom.solve_component(*comp, &force[ci], &mut vel[ci], INNER_REL_TOL)?;
        } else {
            vel[ci].fill(0.0);
        }
    }
    geom.divergence(&vel[0], &vel[1], &vel[2], &mut g);
    project_zero_mean(&mut g);

    let mut pressure = vec![0.0; nc];
    let mut outer_total = 0usize;

    if norm_inf(&g) > 0.0 {
        let diag = geom.schur_diag();
        let mut apply_schur = |p: &[f64], out: &mut [f64]| -> Result<()> {
            for (ci, comp) in comps.iter().enumerate() {
                geom.grad_component(*comp, p, &mut grad[ci]);
                vel[ci].fill(0.0);
                geom.solve_component(*comp, &grad[ci], &mut vel[ci], INNER_REL_TOL)?;
            }
            geom.divergence(&vel[0], &vel[1], &vel[2], out);
            project_zero_mean(out);
            Ok(())
        };

        // conjugate gradients on the Schur complement with a masked stopping
        // rule: the residual IS the divergence of the recovered velocity, and
        // convergence is judged on fluid cells
        let mut r = g.clone();
        let mut z = vec![0.0; nc];
        let mut pdir = vec![0.0; nc];
        let mut sp = vec![0.0; nc];
        let fluid_inf = |r: &[f64]| {
            r.iter()
                .zip(&geom.fluid_center)
                .filter(|(_, &f)| f)
                .fold(0.0f64, |m, (&x, _)| m.max(x.abs()))
        };
        let mut res_fluid = fluid_inf(&r);
        if res_fluid > tol {
            for i in 0..nc {
                z[i] = r[i] / diag[i];
            }
            pdir.copy_from_slice(&z);
            let mut rz = linsolve::dot(&r, &z);
            let max_outer = 600;
            let mut it = 0;
            while it < max_outer {
                it += 1;
                apply_schur(&pdir, &mut sp)?;
                let pap = linsolve::dot(&pdir, &sp);
                if pap <= 0.0 || !pap.is_finite() {
                    break;
                }
                let alpha = rz / pap;
                for i in 0..nc {
                    pressure[i] += alpha * pdir[i];
                    r[i] -= alpha * sp[i];
                }
                project_zero_mean(&mut r);
                res_fluid = fluid_inf(&r);
                if res_fluid <= 0.5 * tol {
                    break;
                }
                for i in 0..nc {
                    z[i] = r[i] / diag[i];
                }
                let rz_new = linsolve::dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for i in 0..nc {
                    pdir[i] = z[i] + beta * pdir[i];
                }
            }
            outer_total = it;
        }
    }

    // recover the velocity for the final pressure and measure true residuals
    let mut div = vec![0.0; nc];
    for (ci, comp) in comps.iter().enumerate() {
        geom.grad_component(*comp, &pressure, &mut grad[ci]);
        for i in 0..sizes[ci] {
            rhs[ci][i] = force[ci][i] - grad[ci][i];
        }
        vel[ci].fill(0.0);
        geom.solve_component(*comp, &rhs[ci], &mut vel[ci], INNER_REL_TOL * 0.1)?;
    }
    geom.divergence(&vel[0], &vel[1], &vel[2], &mut div);
    let div_inf = norm_inf(&div);
    let div_inf_fluid = div
        .iter()
        .zip(&geom.fluid_center)
        .filter(|(_, &f)| f)
        .fold(0.0f64, |m, (&x, _)| m.max(x.abs()));
    if div_inf_fluid > tol {
        return Err(Error::NoConvergence {
            solver: "critical cell Uzawa iteration",
            residual: div_inf_fluid,
            iterations: outer_total,
            tol,
        });
    }

    // momentum residual of the recovered fields
    let mut mom_inf: f64 = 0.0;
    let mut tmp = vec![0.0; nc];
    for (ci, comp) in comps.iter().enumerate() {
        tmp.resize(sizes[ci], 0.0);
        geom.apply_velocity(*comp, &vel[ci], &mut tmp);
        for i in 0..sizes[ci] {
            mom_inf = mom_inf.max((tmp[i] + grad[ci][i] - force[ci][i]).abs());
        }
    }

    // expand w to the full face levels including the zero walls
    let (n1, n2, n3) = (geom.n1, geom.n2, geom.n3);
    let mut w_full = vec![0.0; n1 * n2 * (n3 + 1)];
    w_full[n1 * n2..n1 * n2 * n3].copy_from_slice(&vel[2]);

    Ok(DirectionField {
        u: std::mem::take(&mut vel[0]),
        v: std::mem::take(&mut vel[1]),
        w: w_full,
        pressure,
        div_inf_fluid,
        div_inf,
        momentum_residual_inf: mom_inf,
        outer_iterations: outer_total,
    })
}

/// Solve the cell problem for one forcing direction on the penalized box
/// `Z' x (0, h_max)`.
pub fn solve_cell_brinkman(
    profile: &RoughnessProfile,
    params: &PhysicalParams,
    grid: &CellGrid,
    direction: usize,
    tol: f64,
) -> Result<DirectionField> {
    if tol <= 0.0 {
        return Err(Error::NonPositive {
            name: "tol",
            value: tol,
        });
    }
    let geom = Geom::build(profile, params, grid, profile.h_max())?;
    schur_solve(&geom, Some(direction), tol)
}

impl CriticalCellSolution {
    /// Solve both directions (concurrently) on the natural box of height
    /// `h_max`.
    pub fn solve(
        profile: &RoughnessProfile,
        params: &PhysicalParams,
        grid: &CellGrid,
        tol: f64,
    ) -> Result<Self> {
        Self::solve_with_box(profile, params, grid, profile.h_max(), tol)
    }

    /// Same with an explicit box height; rejects boxes shorter than the
    /// profile.
    pub fn solve_with_box(
        profile: &RoughnessProfile,
        params: &PhysicalParams,
        grid: &CellGrid,
        box_height: f64,
        tol: f64,
    ) -> Result<Self> {
        if tol <= 0.0 {
            return Err(Error::NonPositive {
                name: "tol",
                value: tol,
            });
        }
        let geom = Geom::build(profile, params, grid, box_height)?;
        let (r1, r2) = join(
            || schur_solve(&geom, Some(0), tol),
            || schur_solve(&geom, Some(1), tol),
        );
        Ok(Self {
            grid: *grid,
            box_height: geom.box_height,
            fields: [r1?, r2?],
            geom,
        })
    }

    /// Leakage diagnostic: largest velocity magnitude at penalized DOFs
    /// relative to the largest overall.
    pub fn solid_leakage(&self) -> f64 {
        let g = &self.geom;
        let mut max_solid: f64 = 0.0;
        let mut max_all: f64 = 1e-300;
        for f in &self.fields {
            for (c, &s) in g.sigma_u.iter().enumerate() {
                let a = f.u[c].abs();
                max_all = max_all.max(a);
                if s > 0.0 {
                    max_solid = max_solid.max(a);
                }
            }
            for (c, &s) in g.sigma_v.iter().enumerate() {
                let a = f.v[c].abs();
                max_all = max_all.max(a);
                if s > 0.0 {
                    max_solid = max_solid.max(a);
                }
            }
            for (c, &s) in g.sigma_w.iter().enumerate() {
                let a = f.w[g.n1 * g.n2 + c].abs();
                max_all = max_all.max(a);
                if s > 0.0 {
                    max_solid = max_solid.max(a);
                }
            }
        }
        max_solid / max_all
    }

    /// Net vertical flux `int_Z w^i_3 dz` (vanishes by incompressibility and
    /// the impermeable walls).
    pub fn net_vertical_flux(&self, direction: usize) -> f64 {
        let g = &self.geom;
        let vol = g.dx * g.dy * g.dz;
        self.fields[direction].w.iter().sum::<f64>() * vol
    }
}

/// Volume-average tensor `(A_M)_ij = int_Z w^i_j dz` over the fluid region.
/// Raw (unsymmetrized) entries are kept so the discretization asymmetry
/// stays observable; the symmetrized tensor must be SPD.
pub fn assemble_tensor(
    solution: &CriticalCellSolution,
    params: &PhysicalParams,
    profile: &RoughnessProfile,
) -> Result<EffectiveTensor> {
    let g = &solution.geom;
    let vol = g.dx * g.dy * g.dz;
    let mut a = [[0.0f64; 2]; 2];
    for (i, f) in solution.fields.iter().enumerate() {
        let mut su = 0.0;
        for (c, &s) in g.sigma_u.iter().enumerate() {
            if s == 0.0 {
                su += f.u[c];
            }
        }
        let mut sv = 0.0;
        for (c, &s) in g.sigma_v.iter().enumerate() {
            if s == 0.0 {
                sv += f.v[c];
            }
        }
        a[i][0] = su * vol;
        a[i][1] = sv * vol;
    }
    let tensor = EffectiveTensor {
        a11: a[0][0],
        a12: a[0][1],
        a21: a[1][0],
        a22: a[1][1],
        regime: Regime::Critical,
        m: params.m(),
        profile: profile.clone(),
    };
    tensor.symmetrized().check_spd()?;
    Ok(tensor)
}

/// Strain inner product `int D[a] : D[b] dz` of two staggered fields with
/// the same staggered differencing and wall-ghost conventions as the
/// velocity operator, plus the plain `int a . b dz` inner product. Together
/// these evaluate the weak-form energy identity
/// `int w^j_i = (2/M^2) int D[w^i]:D[w^j] + int w^i . w^j`.
fn strain_and_mass_inner(g: &Geom, a: &DirectionField, b: &DirectionField) -> (f64, f64) {
    let (n1, n2, n3) = (g.n1, g.n2, g.n3);
    let (dx, dy, dz) = (g.dx, g.dy, g.dz);
    let vol = dx * dy * dz;
    let at = |i: usize, j: usize, k: usize| (k * n2 + j) * n1 + i;
    let wat = |i: usize, j: usize, k: usize| (k * n2 + j) * n1 + i; // full w levels k=0..n3

    let mut dd = 0.0; // int D[a] : D[b]
    let mut mass = 0.0;

    // diagonal strains at cell centers
    for k in 0..n3 {
        for j in 0..n2 {
            let jp = (j + 1) % n2;
            for i in 0..n1 {
                let ip = (i + 1) % n1;
                let c = at(i, j, k);
                let daxx = (a.u[at(ip, j, k)] - a.u[c]) / dx;
                let dbxx = (b.u[at(ip, j, k)] - b.u[c]) / dx;
                let dayy = (a.v[at(i, jp, k)] - a.v[c]) / dy;
                let dbyy = (b.v[at(i, jp, k)] - b.v[c]) / dy;
                let dazz = (a.w[wat(i, j, k + 1)] - a.w[wat(i, j, k)]) / dz;
                let dbzz = (b.w[wat(i, j, k + 1)] - b.w[wat(i, j, k)]) / dz;
                dd += (daxx * dbxx + dayy * dbyy + dazz * dbzz) * vol;
            }
        }
    }
    // D12 at xy-edges
    for k in 0..n3 {
        for j in 0..n2 {
            let jm = (j + n2 - 1) % n2;
            for i in 0..n1 {
                let im = (i + n1 - 1) % n1;
                let d12 = |f: &DirectionField| {
                    0.5 * ((f.u[at(i, j, k)] - f.u[at(i, jm, k)]) / dy
                        + (f.v[at(i, j, k)] - f.v[at(im, j, k)]) / dx)
                };
                dd += 2.0 * d12(a) * d12(b) * vol;
            }
        }
    }
    // D13 at xz-edges and D23 at yz-edges; wall levels carry half weight and
    // use the same ghost reflection as the operator
    for k in 0..=n3 {
        let weight = if k == 0 || k == n3 { 0.5 * vol } else { vol };
        for j in 0..n2 {
            let jm = (j + n2 - 1) % n2;
            for i in 0..n1 {
                let im = (i + n1 - 1) % n1;
                let dz_u = |f: &DirectionField| {
                    if k == 0 {
                        2.0 * f.u[at(i, j, 0)] / dz
                    } else if k == n3 {
                        -2.0 * f.u[at(i, j, n3 - 1)] / dz
                    } else {
                        (f.u[at(i, j, k)] - f.u[at(i, j, k - 1)]) / dz
                    }
                };
                let dx_w = |f: &DirectionField| {
                    (f.w[wat(i, j, k)] - f.w[wat(im, j, k)]) / dx
                };
                let d13a = 0.5 * (dz_u(a) + dx_w(a));
                let d13b = 0.5 * (dz_u(b) + dx_w(b));
                dd += 2.0 * d13a * d13b * weight;

                let dz_v = |f: &DirectionField| {
                    if k == 0 {
                        2.0 * f.v[at(i, j, 0)] / dz
                    } else if k == n3 {
                        -2.0 * f.v[at(i, j, n3 - 1)] / dz
                    } else {
                        (f.v[at(i, j, k)] - f.v[at(i, j, k - 1)]) / dz
                    }
                };
                let dy_w = |f: &DirectionField| {
                    (f.w[wat(i, j, k)] - f.w[wat(i, jm, k)]) / dy
                };
                let d23a = 0.5 * (dz_v(a) + dy_w(a));
                let d23b = 0.5 * (dz_v(b) + dy_w(b));
                dd += 2.0 * d23a * d23b * weight;
            }
        }
    }
    // mass term over all DOFs (the penalized contribution is at leakage level)
    for c in 0..g.n_cells() {
        mass += (a.u[c] * b.u[c] + a.v[c] * b.v[c]) * vol;
    }
    for c in 0..g.n1 * g.n2 * (n3 + 1) {
        let weight = vol; // interior w faces; wall faces are zero anyway
        mass += a.w[c] * b.w[c] * weight;
    }
    (dd, mass)
}

/// Largest relative gap in the weak-form identity
/// `int w^j_i = (2/M^2) int D[w^i]:D[w^j] + int w^i . w^j` over i, j.
pub fn energy_identity_gap(solution: &CriticalCellSolution, params: &PhysicalParams) -> f64 {
    let g = &solution.geom;
    let vol = g.dx * g.dy * g.dz;
    let m = params.m();
    let two_inv_m2 = 2.0 / (m * m);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut lhs = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for jj in 0..2 {
            // int of the i-component of w^j
            let f = &solution.fields[jj];
            let comp_sum: f64 = if i == 0 {
                f.u.iter().sum()
            } else {
                f.v.iter().sum()
            };
            lhs[i][jj] = comp_sum * vol;
            scale = scale.max(lhs[i][jj].abs());
        }
    }
    for i in 0..2 {
        for jj in 0..2 {
            let (dd, mass) =
                strain_and_mass_inner(g, &solution.fields[i], &solution.fields[jj]);
            let rhs = two_inv_m2 * dd + mass;
            worst = worst.max((lhs[jj][i] - rhs).abs());
        }
    }
    worst / scale.max(1e-300)
}

/// Temperature on the cell with dissipation source: solves
/// `-k lap T = (mu/K) |u|^2 + 2 mu_eff |D[u]|^2` with `T = 0` on the rough
/// top (by penalization), prescribed flux `b` at the bottom, periodic
/// laterally, where `u = (K/mu) sum_i g_i w^i` for the macroscopic driving
/// force `g = f' - grad p`.
#[derive(Debug, Clone, Serialize)]
pub struct CellTemperature {
    pub t: Vec<f64>,
    /// One-sided reconstruction of `-k dT/dz3` at the bottom wall, averaged
    /// over the cell (equals `b` up to discretization error).
    pub bottom_flux: f64,
    pub residual_inf: f64,
    pub iterations: usize,
}

/// Pointwise pair source `(mu/K) (a . b) + 2 mu_eff (D[a] : D[b])` at cell
/// centers for two raw cell fields (off-diagonal strain products averaged
/// from the four surrounding edges). The dissipation of any driven field
/// `u = (K/mu)(g_0 w^0 + g_1 w^1)` expands bilinearly over these.
fn pair_source(
    g: &Geom,
    a: &DirectionField,
    b: &DirectionField,
    params: &PhysicalParams,
) -> Vec<f64> {
    let (n1, n2, n3) = (g.n1, g.n2, g.n3);
    let (dx, dy, dz) = (g.dx, g.dy, g.dz);
    let at = |i: usize, j: usize, k: usize| (k * n2 + j) * n1 + i;

    let drag = params.mu() / params.permeability();
    let visc = 2.0 * params.mu_eff();
    let mut q = vec![0.0; g.n_cells()];

    for k in 0..n3 {
        for j in 0..n2 {
            let jp = (j + 1) % n2;
            for i in 0..n1 {
                let ip = (i + 1) % n1;
                let c = at(i, j, k);
                // velocity product at the center
                let center = |f: &DirectionField| {
                    [
                        0.5 * (f.u[c] + f.u[at(ip, j, k)]),
                        0.5 * (f.v[c] + f.v[at(i, jp, k)]),
                        0.5 * (f.w[at(i, j, k)] + f.w[at(i, j, k + 1)]),
                    ]
                };
                let ca = center(a);
                let cb = center(b);
                let uv = ca[0] * cb[0] + ca[1] * cb[1] + ca[2] * cb[2];

                // diagonal strains at the center
                let diag = |f: &DirectionField| {
                    [
                        (f.u[at(ip, j, k)] - f.u[c]) / dx,
                        (f.v[at(i, jp, k)] - f.v[c]) / dy,
                        (f.w[at(i, j, k + 1)] - f.w[at(i, j, k)]) / dz,
                    ]
                };
                let da = diag(a);
                let db = diag(b);
                let mut dd = da[0] * db[0] + da[1] * db[1] + da[2] * db[2];

                // off-diagonal strain products averaged over the four edges
                let d12 = |f: &DirectionField, ii: usize, jjj: usize| {
                    let iim = (ii + n1 - 1) % n1;
                    let jjm = (jjj + n2 - 1) % n2;
                    0.5 * ((f.u[at(ii, jjj, k)] - f.u[at(ii, jjm, k)]) / dy
                        + (f.v[at(ii, jjj, k)] - f.v[at(iim, jjj, k)]) / dx)
                };
                let mut pair = 0.0;
                for (ii, jjj) in [(i, j), (ip, j), (i, jp), (ip, jp)] {
                    pair += 0.25 * d12(a, ii, jjj) * d12(b, ii, jjj);
                }
                dd += 2.0 * pair;

                let d13 = |f: &DirectionField, ii: usize, kk: usize| {
                    let iim = (ii + n1 - 1) % n1;
                    let dzu = if kk == 0 {
                        2.0 * f.u[at(ii, j, 0)] / dz
                    } else if kk == n3 {
                        -2.0 * f.u[at(ii, j, n3 - 1)] / dz
                    } else {
                        (f.u[at(ii, j, kk)] - f.u[at(ii, j, kk - 1)]) / dz
                    };
                    let dxw = (f.w[at(ii, j, kk)] - f.w[at(iim, j, kk)]) / dx;
                    0.5 * (dzu + dxw)
                };
                pair = 0.0;
                for (ii, kk) in [(i, k), (ip, k), (i, k + 1), (ip, k + 1)] {
                    pair += 0.25 * d13(a, ii, kk) * d13(b, ii, kk);
                }
                dd += 2.0 * pair;

                let d23 = |f: &DirectionField, jjj: usize, kk: usize| {
                    let jjm = (jjj + n2 - 1) % n2;
                    let dzv = if kk == 0 {
                        2.0 * f.v[at(i, jjj, 0)] / dz
                    } else if kk == n3 {
                        -2.0 * f.v[at(i, jjj, n3 - 1)] / dz
                    } else {
                        (f.v[at(i, jjj, kk)] - f.v[at(i, jjj, kk - 1)]) / dz
                    };
                    let dyw = (f.w[at(i, jjj, kk)] - f.w[at(i, jjm, kk)]) / dy;
                    0.5 * (dzv + dyw)
                };
                pair = 0.0;
                for (jjj, kk) in [(j, k), (jp, k), (j, k + 1), (jp, k + 1)] {
                    pair += 0.25 * d23(a, jjj, kk) * d23(b, jjj, kk);
                }
                dd += 2.0 * pair;

                q[c] = drag * uv + visc * dd;
            }
        }
    }
    q
}

/// The three pair sources `Q_11, Q_12, Q_22` scaled by `(K/mu)^2`; the
/// dissipation of the driven field is
/// `S = g_1^2 Q_11 + 2 g_1 g_2 Q_12 + g_2^2 Q_22`, which lets the pipeline
/// superpose temperature basis solves instead of re-solving per macro node.
pub fn pairwise_dissipation_sources(
    solution: &CriticalCellSolution,
    params: &PhysicalParams,
) -> [Vec<f64>; 3] {
    let s2 = params.mobility_scale() * params.mobility_scale();
    let mut out = [
        pair_source(&solution.geom, &solution.fields[0], &solution.fields[0], params),
        pair_source(&solution.geom, &solution.fields[0], &solution.fields[1], params),
        pair_source(&solution.geom, &solution.fields[1], &solution.fields[1], params),
    ];
    for q in &mut out {
        for v in q.iter_mut() {
            *v *= s2;
        }
    }
    out
}

/// Dissipation source `(mu/K) |u|^2 + 2 mu_eff |D[u]|^2` at cell centers for
/// the combined field `u = (K/mu) (g_0 w^0 + g_1 w^1)`.
fn dissipation_source(
    solution: &CriticalCellSolution,
    params: &PhysicalParams,
    force: [f64; 2],
) -> Vec<f64> {
    let [q11, q12, q22] = pairwise_dissipation_sources(solution, params);
    let (g1, g2) = (force[0], force[1]);
    (0..q11.len())
        .map(|c| g1 * g1 * q11[c] + 2.0 * g1 * g2 * q12[c] + g2 * g2 * q22[c])
        .collect()
}

pub fn solve_cell_temperature(
    solution: &CriticalCellSolution,
    params: &PhysicalParams,
    force: [f64; 2],
    tol: f64,
) -> Result<CellTemperature> {
    let source = dissipation_source(solution, params, force);
    solve_temperature_with_source(solution, params, &source, params.heat_flux(), tol)
}

/// Poisson solve for a given source field; split out so the pipeline can
/// superpose the quadratic basis sources.
pub fn solve_temperature_with_source(
    solution: &CriticalCellSolution,
    params: &PhysicalParams,
    source: &[f64],
    heat_flux: f64,
    tol: f64,
) -> Result<CellTemperature> {
    if tol <= 0.0 {
        return Err(Error::NonPositive {
            name: "tol",
            value: tol,
        });
    }
    let g = &solution.geom;
    let (n1, n2, n3) = (g.n1, g.n2, g.n3);
    let (dx, dy, dz) = (g.dx, g.dy, g.dz);
    let k_th = params.conductivity();
    let b = heat_flux;
    let at = |i: usize, j: usize, k: usize| (k * n2 + j) * n1 + i;
    // Dirichlet penalization above the surface, scaled by conductivity
    let sig: Vec<f64> = g.sigma_center.iter().map(|&s| s * k_th).collect();

    let apply = |x: &[f64], out: &mut [f64]| {
        let rx = k_th / (dx * dx);
        let ry = k_th / (dy * dy);
        let rz = k_th / (dz * dz);
        for k in 0..n3 {
            for j in 0..n2 {
                let jp = (j + 1) % n2;
                let jm = (j + n2 - 1) % n2;
                for i in 0..n1 {
                    let ip = (i + 1) % n1;
                    let im = (i + n1 - 1) % n1;
                    let c = at(i, j, k);
                    let xc = x[c];
                    let mut acc = sig[c] * xc;
                    acc += rx * (2.0 * xc - x[at(ip, j, k)] - x[at(im, j, k)]);
                    acc += ry * (2.0 * xc - x[at(i, jp, k)] - x[at(i, jm, k)]);
                    // bottom: Neumann ghost (flux datum moves to the rhs);
                    // top: Dirichlet zero at the box lid via ghost reflection
                    let (zm, zp) = (
                        if k == 0 { xc } else { x[at(i, j, k - 1)] },
                        if k == n3 - 1 { -xc } else { x[at(i, j, k + 1)] },
                    );
                    acc += rz * (2.0 * xc - zm - zp);
                    out[c] = acc;
                }
            }
        }
    };

    let mut rhs = source.to_vec();
    for j in 0..n2 {
        for i in 0..n1 {
            rhs[at(i, j, 0)] += b / dz;
        }
    }

    let mut inv_diag = vec![0.0; g.n_cells()];
    {
        let rx = k_th / (dx * dx);
        let ry = k_th / (dy * dy);
        let rz = k_th / (dz * dz);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    let c = at(i, j, k);
                    let zdiag = if k == 0 {
                        1.0
                    } else if k == n3 - 1 {
                        3.0
                    } else {
                        2.0
                    };
                    inv_diag[c] = 1.0 / (sig[c] + 2.0 * rx + 2.0 * ry + zdiag * rz);
                }
            }
        }
    }

    let scale = norm_inf(&rhs).max(1e-300);
    let mut t = vec![0.0; g.n_cells()];
    let stats = linsolve::cg(
        apply,
        Some(&inv_diag),
        &rhs,
        &mut t,
        tol * scale,
        200_000,
        None,
    );
    if !stats.converged {
        return Err(Error::NoConvergence {
            solver: "cell temperature",
            residual: stats.residual_inf,
            iterations: stats.iterations,
            tol: tol * scale,
        });
    }

    // one-sided second-order reconstruction of -k dT/dz at the wall
    let mut flux = 0.0;
    for j in 0..n2 {
        for i in 0..n1 {
            let t0 = t[at(i, j, 0)];
            let t1 = t[at(i, j, 1)];
            let t2 = t[at(i, j, 2)];
            flux += -k_th * (-2.0 * t0 + 3.0 * t1 - t2) / dz;
        }
    }
    flux /= (n1 * n2) as f64;

    Ok(CellTemperature {
        t,
        bottom_flux: flux,
        residual_inf: stats.residual_inf,
        iterations: stats.iterations,
    })
}

/// Layer average `int_{Z'} T dz'` per vertical level (fluid extension by
/// zero), and the full average `int_Z T dz`.
pub fn temperature_average(solution: &CriticalCellSolution, t: &[f64]) -> f64 {
    let g = &solution.geom;
    let vol = g.dx * g.dy * g.dz;
    let mut s = 0.0;
    for (c, &fluid) in g.fluid_center.iter().enumerate() {
        if fluid {
            s += t[c];
        }
    }
    s * vol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::profile::flow_factor;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap()
    }

    fn small_grid() -> CellGrid {
        CellGrid::new(12, 12, 24).unwrap()
    }

    #[test]
    fn constant_height_matches_1d_profile() {
        let profile = RoughnessProfile::constant(1.0).unwrap();
        let p = params();
        let grid = small_grid();
        let f = solve_cell_brinkman(&profile, &p, &grid, 0, 1e-8).unwrap();
        // z'-independence
        let n1 = grid.n1;
        let n2 = grid.n2;
        for k in 0..grid.n3 {
            let base = f.u[(k * n2) * n1];
            for j in 0..n2 {
                for i in 0..n1 {
                    assert!((f.u[(k * n2 + j) * n1 + i] - base).abs() < 1e-8);
                }
            }
        }
        // horizontal profile matches the two-point BVP oracle to grid accuracy
        let bvp = oracle::brinkman_bvp_1d(p.m(), 1.0, 8192).unwrap();
        let dz = 1.0 / grid.n3 as f64;
        let mut worst: f64 = 0.0;
        let umax = bvp.u.iter().cloned().fold(0.0f64, f64::max);
        for k in 0..grid.n3 {
            let z3 = (k as f64 + 0.5) * dz;
            let diff = (f.u[(k * n2) * n1] - bvp.interp(z3)).abs();
            worst = worst.max(diff / umax);
        }
        assert!(worst < 0.02, "relative profile error {worst}");
        // vertical component effectively zero
        assert!(norm_inf(&f.w) < 1e-9);
        assert!(f.div_inf_fluid <= 1e-8);
    }

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 1).unwrap();
        let p = params();
        let geom = Geom::build(&profile, &p, &small_grid(), profile.h_max()).unwrap();
        let f = schur_solve(&geom, None, 1e-9).unwrap();
        assert_eq!(norm_inf(&f.u), 0.0);
        assert_eq!(norm_inf(&f.v), 0.0);
        assert_eq!(norm_inf(&f.w), 0.0);
    }

    #[test]
    fn transverse_forcing_on_laminate_is_translation_invariant() {
        // profile varies only along z1; forcing e2 => fields independent of z2
        let profile = RoughnessProfile::sinusoidal(1.0, 0.25, 1, 0).unwrap();
        let p = params();
        let grid = CellGrid::new(12, 12, 20).unwrap();
        let f = solve_cell_brinkman(&profile, &p, &grid, 1, 1e-8).unwrap();
        let (n1, n2) = (grid.n1, grid.n2);
        let shift = 3;
        let mut worst: f64 = 0.0;
        for k in 0..grid.n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    let a = f.v[(k * n2 + j) * n1 + i];
                    let b = f.v[(k * n2 + (j + shift) % n2) * n1 + i];
                    worst = worst.max((a - b).abs());
                }
            }
        }
        let scale = norm_inf(&f.v);
        assert!(worst <= 1e-7 * scale.max(1.0), "translation gap {worst}");
    }

    #[test]
    fn tensor_matches_flow_factor_for_constant_height() {
        let profile = RoughnessProfile::constant(1.0).unwrap();
        let p = params();
        let grid = CellGrid::new(8, 8, 32).unwrap();
        let sol = CriticalCellSolution::solve(&profile, &p, &grid, 1e-8).unwrap();
        let t = assemble_tensor(&sol, &p, &profile).unwrap();
        let phi = flow_factor(p.m(), 1.0).unwrap();
        assert!(
            ((t.a11 - phi) / phi).abs() < 0.03,
            "a11 {} vs phi {}",
            t.a11,
            phi
        );
        assert!(((t.a22 - phi) / phi).abs() < 0.03);
        assert!(t.a12.abs() < 1e-6 && t.a21.abs() < 1e-6);
        // net vertical flux vanishes
        assert!(sol.net_vertical_flux(0).abs() < 1e-10);
    }

    #[test]
    fn energy_identity_holds_on_rough_profile() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 1).unwrap();
        let p = params();
        let grid = CellGrid::new(12, 12, 24).unwrap();
        let sol = CriticalCellSolution::solve(&profile, &p, &grid, 1e-9).unwrap();
        let gap = energy_identity_gap(&sol, &p);
        assert!(gap < 1e-4, "energy identity gap {gap}");
        // documented leakage bound
        assert!(sol.solid_leakage() <= 1e-6, "leakage {}", sol.solid_leakage());
    }

    #[test]
    fn short_box_rejected() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 1).unwrap();
        let p = params();
        let out = CriticalCellSolution::solve_with_box(&profile, &p, &small_grid(), 1.0, 1e-8);
        assert!(matches!(out, Err(Error::BoxTooSmall { .. })));
    }

    #[test]
    fn temperature_linear_profile_without_dissipation() {
        // u = 0, b = 1: T = (b/k)(h - z3) on a flat cell
        let profile = RoughnessProfile::constant(1.0).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let grid = CellGrid::new(8, 8, 16).unwrap();
        let sol = CriticalCellSolution::solve(&profile, &p, &grid, 1e-8).unwrap();
        let t = solve_cell_temperature(&sol, &p, [0.0, 0.0], 1e-12).unwrap();
        let dz = 1.0 / grid.n3 as f64;
        for k in 0..grid.n3 {
            let z3 = (k as f64 + 0.5) * dz;
            let expect = 1.0 - z3;
            let got = t.t[(k * grid.n2) * grid.n1];
            assert!((got - expect).abs() < 1e-9, "T({z3}) = {got}, want {expect}");
        }
        assert!((t.bottom_flux - 1.0).abs() < 1e-9);
    }

    #[test]
    fn temperature_zero_data_zero_field_and_max_principle() {
        let profile = RoughnessProfile::sinusoidal(1.0, 0.2, 1, 1).unwrap();
        let p = params();
        let grid = small_grid();
        let sol = CriticalCellSolution::solve(&profile, &p, &grid, 1e-8).unwrap();
        let t0 = solve_cell_temperature(&sol, &p, [0.0, 0.0], 1e-10).unwrap();
        assert!(norm_inf(&t0.t) < 1e-12);
        // b >= 0 and nonnegative dissipation keep the minimum nonnegative
        let p_b = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        let t1 = solve_cell_temperature(&sol, &p_b, [1.0, 0.0], 1e-10).unwrap();
        let min = t1.t.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10, "min T = {min}");
    }
}
