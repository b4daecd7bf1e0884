//! Reconstruction of the limit fields from the macro solution and the cell
//! data: the subcritical velocity
//! `u'(x', z) = (K/mu) sum_i g_i(x') s(z3; h(z')) (e_i + grad pi^i(z'))`
//! with `g = f' - grad p`, the vertical temperature profiles obtained by
//! integrating the reduced heat equation, their cell averages, and the
//! smooth-regime closed forms (which are the same expressions with the
//! corrector gradients dropped and `h = h(x')`).
//!
//! Temperature is built from the two-point boundary value problem
//! `-k T'' = S`, `T(h) = 0`, `-k T'(0) = b` by composite quadrature,
//! `T(z3) = (b/k)(h - z3) + (1/k) int_{z3}^h int_0^xi S(tau) dtau dxi`,
//! with the dissipation source `S = (mu/K) |u'|^2 + mu_eff |d_z3 u'|^2`.

use crate::cell_sub::SubcriticalCellSolution;
use crate::error::{Error, Result};
use crate::params::{PhysicalParams, RoughnessProfile};
use crate::profile::{flow_factor, shape, shape_dz3};

/// Vertical temperature profile on uniform nodes over `[0, h]`.
#[derive(Debug, Clone)]
pub struct TemperatureProfile {
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    pub h: f64,
}

impl TemperatureProfile {
    pub fn interp(&self, z3: f64) -> f64 {
        let n = self.z.len() - 1;
        let t = (z3 / self.h * n as f64).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        self.t[i] * (1.0 - s) + self.t[i + 1] * s
    }

    /// `int_0^h T dz3` by the trapezoid rule on the stored nodes.
    pub fn integral(&self) -> f64 {
        let dz = self.h / (self.z.len() - 1) as f64;
        let mut s = 0.5 * (self.t[0] + self.t[self.t.len() - 1]);
        for v in &self.t[1..self.t.len() - 1] {
            s += v;
        }
        s * dz
    }
}

/// Solve the reduced vertical heat problem for a channel of height `h` with
/// dissipation amplitude `g2 = |G|^2` (the squared magnitude of the driven
/// cell velocity direction): the source is
/// `S(tau) = (K/mu) g2 (s(tau)^2 + s'(tau)^2 / M^2)`.
pub fn temperature_profile(
    params: &PhysicalParams,
    h: f64,
    g2: f64,
    quad_n: usize,
) -> Result<TemperatureProfile> {
    if quad_n < 64 {
        return Err(Error::GridTooCoarse {
            what: format!("temperature quadrature needs quad_n >= 64, got {quad_n}"),
        });
    }
    let m = params.m();
    let k = params.conductivity();
    let b = params.heat_flux();
    let scale = params.mobility_scale() * g2;
    let inv_m2 = 1.0 / (m * m);
    let n = quad_n;
    let dz = h / n as f64;

    let mut source = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z3 = i as f64 * dz;
        let s = shape(m, h, z3);
        let sd = shape_dz3(m, h, z3);
        source.push(scale * (s * s + inv_m2 * sd * sd));
    }
    // cumulative C(xi) = int_0^xi S
    let mut cum = vec![0.0; n + 1];
    for i in 1..=n {
        cum[i] = cum[i - 1] + 0.5 * (source[i - 1] + source[i]) * dz;
    }
    // I(z) = int_z^h C; build the reverse cumulative so T(h) = 0 exactly
    let mut outer = vec![0.0; n + 1];
    for i in (0..n).rev() {
        outer[i] = outer[i + 1] + 0.5 * (cum[i] + cum[i + 1]) * dz;
    }
    let mut z = Vec::with_capacity(n + 1);
    let mut t = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z3 = i as f64 * dz;
        z.push(z3);
        t.push((b / k) * (h - z3) + outer[i] / k);
    }
    Ok(TemperatureProfile { z, t, h })
}

/// Point evaluators of the subcritical limit fields for one macroscopic
/// driving force `g = f'(x') - grad p(x')`.
pub struct SubcriticalReconstructor<'a> {
    pub profile: &'a RoughnessProfile,
    pub params: &'a PhysicalParams,
    pub cell: &'a SubcriticalCellSolution,
}

impl<'a> SubcriticalReconstructor<'a> {
    /// `G(z') = sum_i g_i (e_i + grad pi^i(z'))`, the driven in-cell
    /// direction of the horizontal velocity.
    pub fn driven_direction(&self, g: [f64; 2], z1: f64, z2: f64) -> [f64; 2] {
        let g0 = self.cell.grad_pi_at(0, z1, z2);
        let g1 = self.cell.grad_pi_at(1, z1, z2);
        [
            g[0] * (1.0 + g0[0]) + g[1] * g1[0],
            g[0] * g0[1] + g[1] * (1.0 + g1[1]),
        ]
    }

    /// Horizontal limit velocity `u'(x', z)`; zero above the rough surface
    /// (extension by zero) and exactly zero on both walls.
    pub fn velocity(&self, g: [f64; 2], z1: f64, z2: f64, z3: f64) -> [f64; 2] {
        let h = self.profile.eval(z1, z2);
        if z3 < 0.0 || z3 > h {
            return [0.0, 0.0];
        }
        let s = shape(self.params.m(), h, z3) * self.params.mobility_scale();
        let dir = self.driven_direction(g, z1, z2);
        [s * dir[0], s * dir[1]]
    }

    /// Vertical temperature profile at a cell point `z'`.
    pub fn temperature_profile(
        &self,
        g: [f64; 2],
        z1: f64,
        z2: f64,
        quad_n: usize,
    ) -> Result<TemperatureProfile> {
        let h = self.profile.eval(z1, z2);
        let dir = self.driven_direction(g, z1, z2);
        let g2 = dir[0] * dir[0] + dir[1] * dir[1];
        temperature_profile(self.params, h, g2, quad_n)
    }

    /// `T(x', z)` by quadrature; zero above the surface.
    pub fn temperature(&self, g: [f64; 2], z1: f64, z2: f64, z3: f64, quad_n: usize) -> Result<f64> {
        let h = self.profile.eval(z1, z2);
        if z3 < 0.0 || z3 > h {
            return Ok(0.0);
        }
        Ok(self.temperature_profile(g, z1, z2, quad_n)?.interp(z3))
    }

    /// Cell averages at one macro point: the average velocity
    /// `V(x') = (K/mu) int_{Z'} phi(h) G dz'` and the average temperature
    /// `T_av(x') = int_Z T dz`. `nq` is the number of quadrature points per
    /// cell direction (midpoint rule; spectrally accurate for the smooth
    /// periodic integrands), `quad_n` the vertical quadrature resolution.
    pub fn averages(&self, g: [f64; 2], nq: usize, quad_n: usize) -> Result<([f64; 2], f64)> {
        let m = self.params.m();
        let scale = self.params.mobility_scale();
        let mut v = [0.0; 2];
        let mut t_av = 0.0;
        let wq = 1.0 / (nq * nq) as f64;
        for a in 0..nq {
            let z1 = -0.5 + (a as f64 + 0.5) / nq as f64;
            for bq in 0..nq {
                let z2 = -0.5 + (bq as f64 + 0.5) / nq as f64;
                let h = self.profile.eval(z1, z2);
                let phi = flow_factor(m, h)?;
                let dir = self.driven_direction(g, z1, z2);
                v[0] += wq * scale * phi * dir[0];
                v[1] += wq * scale * phi * dir[1];
                let g2 = dir[0] * dir[0] + dir[1] * dir[1];
                t_av += wq * temperature_profile(self.params, h, g2, quad_n)?.integral();
            }
        }
        Ok((v, t_av))
    }
}

/// Smooth-regime (`l > 1`) closed-form velocity
/// `u*(x', z3) = (K/mu) s(z3; h(x')) g`; rejects `z3` outside `[0, h]`.
pub fn smooth_velocity(
    params: &PhysicalParams,
    h_x: f64,
    g: [f64; 2],
    z3: f64,
) -> Result<[f64; 2]> {
    if z3 < 0.0 || z3 > h_x {
        return Err(Error::OutOfRange {
            what: "z3",
            value: z3,
            lo: 0.0,
            hi: h_x,
        });
    }
    let s = shape(params.m(), h_x, z3) * params.mobility_scale();
    Ok([s * g[0], s * g[1]])
}

/// Smooth-regime temperature by the same verified quadrature route as the
/// subcritical case (the in-cell direction is just `g`).
pub fn smooth_temperature(
    params: &PhysicalParams,
    h_x: f64,
    g: [f64; 2],
    z3: f64,
    quad_n: usize,
) -> Result<f64> {
    if z3 < 0.0 || z3 > h_x {
        return Err(Error::OutOfRange {
            what: "z3",
            value: z3,
            lo: 0.0,
            hi: h_x,
        });
    }
    let g2 = g[0] * g[0] + g[1] * g[1];
    Ok(temperature_profile(params, h_x, g2, quad_n)?.interp(z3))
}

/// Smooth-regime averages at one macro point: `V = (K/mu) phi(h) g` and the
/// integrated temperature profile.
pub fn smooth_averages(
    params: &PhysicalParams,
    h_x: f64,
    g: [f64; 2],
    quad_n: usize,
) -> Result<([f64; 2], f64)> {
    let phi = flow_factor(params.m(), h_x)?;
    let s = params.mobility_scale() * phi;
    let g2 = g[0] * g[0] + g[1] * g[1];
    let t_av = temperature_profile(params, h_x, g2, quad_n)?.integral();
    Ok(([s * g[0], s * g[1]], t_av))
}
