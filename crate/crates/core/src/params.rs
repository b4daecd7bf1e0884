//! Physical constants, the periodic roughness profile, and the grids on the
//! periodicity cell and the macroscopic domain.
//!
//! Heights live on the unit periodicity cell `Z' = (-1/2, 1/2)^2`; all
//! evaluations wrap their argument into the cell, so profiles are exactly
//! periodic by construction.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};

/// Fluid, porous-medium and thermal constants together with the derived
/// Brinkman parameter `M = sqrt(mu / (K * mu_eff))`.
///
/// `M` is recomputed from the stored constants on construction and is never
/// set by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    mu: f64,
    mu_eff: f64,
    permeability: f64,
    conductivity: f64,
    heat_flux: f64,
    m: f64,
}

impl PhysicalParams {
    /// `mu`, `mu_eff`, `permeability` (the scaled K) and `conductivity` must
    /// be strictly positive; the bottom heat-flux datum may have any sign.
    pub fn new(
        mu: f64,
        mu_eff: f64,
        permeability: f64,
        conductivity: f64,
        heat_flux: f64,
    ) -> Result<Self> {
        check_positive("mu", mu)?;
        check_positive("mu_eff", mu_eff)?;
        check_positive("K", permeability)?;
        check_positive("k", conductivity)?;
        if !heat_flux.is_finite() {
            return Err(Error::OutOfRange {
                what: "b",
                value: heat_flux,
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            });
        }
        let m = (mu / (permeability * mu_eff)).sqrt();
        Ok(Self {
            mu,
            mu_eff,
            permeability,
            conductivity,
            heat_flux,
            m,
        })
    }

    /// Dynamic viscosity.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Effective Brinkman viscosity.
    pub fn mu_eff(&self) -> f64 {
        self.mu_eff
    }

    /// Scaled permeability K (order one by assumption).
    pub fn permeability(&self) -> f64 {
        self.permeability
    }

    /// Thermal conductivity k.
    pub fn conductivity(&self) -> f64 {
        self.conductivity
    }

    /// Bottom heat-flux datum b.
    pub fn heat_flux(&self) -> f64 {
        self.heat_flux
    }

    /// Brinkman parameter `M = sqrt(mu / (K * mu_eff))`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// `K / mu`, the scalar factor in front of every mobility expression.
    /// Equals `1 / (M^2 * mu_eff)`.
    pub fn mobility_scale(&self) -> f64 {
        self.permeability / self.mu
    }
}

/// Wrap a coordinate into the periodicity cell `[-1/2, 1/2)`.
pub fn wrap_cell(t: f64) -> f64 {
    t - (t + 0.5).floor()
}

/// Periodic roughness height `h(z')` on the unit cell `Z' = (-1/2,1/2)^2`.
///
/// Three families: a constant, a product sinusoid
/// `h = mean + amplitude * cos(2 pi k1 z1) * cos(2 pi k2 z2)`
/// (a zero wavenumber drops the corresponding factor to 1, which gives the
/// laminate profiles varying in one direction only), and a raw sampled grid
/// interpolated bilinearly with periodic wrapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoughnessProfile {
    Constant {
        height: f64,
    },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        k1: u32,
        k2: u32,
    },
    /// `heights[j * n1 + i]` sampled at cell centers
    /// `z1 = -1/2 + (i + 1/2)/n1`, `z2 = -1/2 + (j + 1/2)/n2`.
    Sampled {
        n1: usize,
        n2: usize,
        heights: Vec<f64>,
    },
}

impl RoughnessProfile {
    pub fn constant(height: f64) -> Result<Self> {
        let p = RoughnessProfile::Constant { height };
        p.validate()?;
        Ok(p)
    }

    pub fn sinusoidal(mean: f64, amplitude: f64, k1: u32, k2: u32) -> Result<Self> {
        let p = RoughnessProfile::Sinusoidal {
            mean,
            amplitude,
            k1,
            k2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(n1: usize, n2: usize, heights: Vec<f64>) -> Result<Self> {
        let p = RoughnessProfile::Sampled { n1, n2, heights };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RoughnessProfile::Constant { .. } | RoughnessProfile::Sinusoidal { .. } => {}
            RoughnessProfile::Sampled { n1, n2, heights } => {
                if *n1 == 0 || *n2 == 0 || heights.is_empty() {
                    return Err(Error::BadSampledGrid {
                        reason: "empty grid".into(),
                    });
                }
                if heights.len() != n1 * n2 {
                    return Err(Error::BadSampledGrid {
                        reason: format!(
                            "expected {} samples for {}x{}, got {}",
                            n1 * n2,
                            n1,
                            n2,
                            heights.len()
                        ),
                    });
                }
                if heights.iter().any(|h| !h.is_finite()) {
                    return Err(Error::BadSampledGrid {
                        reason: "non-finite sample".into(),
                    });
                }
            }
        }
        let h_min = self.h_min();
        if !(h_min > 0.0) {
            return Err(Error::NonPositiveHeight { h_min });
        }
        Ok(())
    }

    /// Minimum height over the cell. Exact for constant and sinusoidal
    /// profiles; the grid minimum for sampled profiles (bilinear
    /// interpolation cannot undershoot it).
    pub fn h_min(&self) -> f64 {
        match self {
            RoughnessProfile::Constant { height } => *height,
            RoughnessProfile::Sinusoidal {
                mean,
                amplitude,
                k1,
                k2,
            } => {
                if *k1 == 0 && *k2 == 0 {
                    mean + amplitude
                } else {
                    mean - amplitude.abs()
                }
            }
            RoughnessProfile::Sampled { heights, .. } => {
                heights.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Maximum height over the cell; see [`RoughnessProfile::h_min`].
    pub fn h_max(&self) -> f64 {
        match self {
            RoughnessProfile::Constant { height } => *height,
            RoughnessProfile::Sinusoidal {
                mean,
                amplitude,
                k1,
                k2,
            } => {
                if *k1 == 0 && *k2 == 0 {
                    mean + amplitude
                } else {
                    mean + amplitude.abs()
                }
            }
            RoughnessProfile::Sampled { heights, .. } => {
                heights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Evaluate `h(z')` with periodic wrapping into `Z'`.
    pub fn eval(&self, z1: f64, z2: f64) -> f64 {
        match self {
            RoughnessProfile::Constant { height } => *height,
            RoughnessProfile::Sinusoidal {
                mean,
                amplitude,
                k1,
                k2,
            } => {
                let c1 = cos_wave(*k1, z1);
                let c2 = cos_wave(*k2, z2);
                mean + amplitude * c1 * c2
            }
            RoughnessProfile::Sampled { n1, n2, heights } => {
                let (i0, i1, tx) = sample_index(z1, *n1);
                let (j0, j1, ty) = sample_index(z2, *n2);
                let v00 = heights[j0 * n1 + i0];
                let v10 = heights[j0 * n1 + i1];
                let v01 = heights[j1 * n1 + i0];
                let v11 = heights[j1 * n1 + i1];
                let a = v00 * (1.0 - tx) + v10 * tx;
                let b = v01 * (1.0 - tx) + v11 * tx;
                a * (1.0 - ty) + b * ty
            }
        }
    }

    /// Gradient of `h`; analytic for the closed-form families, centered
    /// differences of the sample grid (bilinearly interpolated) otherwise.
    pub fn grad(&self, z1: f64, z2: f64) -> [f64; 2] {
        match self {
            RoughnessProfile::Constant { .. } => [0.0, 0.0],
            RoughnessProfile::Sinusoidal {
                amplitude, k1, k2, ..
            } => {
                let w1 = 2.0 * std::f64::consts::PI * f64::from(*k1);
                let w2 = 2.0 * std::f64::consts::PI * f64::from(*k2);
                let s1 = if *k1 == 0 { 0.0 } else { -(w1 * z1).sin() * w1 };
                let s2 = if *k2 == 0 { 0.0 } else { -(w2 * z2).sin() * w2 };
                let c1 = cos_wave(*k1, z1);
                let c2 = cos_wave(*k2, z2);
                [amplitude * s1 * c2, amplitude * c1 * s2]
            }
            RoughnessProfile::Sampled { n1, n2, heights } => {
                let (i0, i1, tx) = sample_index(z1, *n1);
                let (j0, j1, ty) = sample_index(z2, *n2);
                let gx = |i: usize, j: usize| {
                    let ip = (i + 1) % n1;
                    let im = (i + n1 - 1) % n1;
                    (heights[j * n1 + ip] - heights[j * n1 + im]) * 0.5 * (*n1 as f64)
                };
                let gy = |i: usize, j: usize| {
                    let jp = (j + 1) % n2;
                    let jm = (j + n2 - 1) % n2;
                    (heights[jp * n1 + i] - heights[jm * n1 + i]) * 0.5 * (*n2 as f64)
                };
                let bil = |f: &dyn Fn(usize, usize) -> f64| {
                    let a = f(i0, j0) * (1.0 - tx) + f(i1, j0) * tx;
                    let b = f(i0, j1) * (1.0 - tx) + f(i1, j1) * tx;
                    a * (1.0 - ty) + b * ty
                };
                [bil(&gx), bil(&gy)]
            }
        }
    }

    /// Same profile with the roles of `z1` and `z2` exchanged (a 90-degree
    /// rotation of the microstructure).
    pub fn rotated(&self) -> Self {
        match self {
            RoughnessProfile::Constant { height } => RoughnessProfile::Constant { height: *height },
            RoughnessProfile::Sinusoidal {
                mean,
                amplitude,
                k1,
                k2,
            } => RoughnessProfile::Sinusoidal {
                mean: *mean,
                amplitude: *amplitude,
                k1: *k2,
                k2: *k1,
            },
            RoughnessProfile::Sampled { n1, n2, heights } => {
                let mut t = vec![0.0; heights.len()];
                for j in 0..*n2 {
                    for i in 0..*n1 {
                        t[i * n2 + j] = heights[j * n1 + i];
                    }
                }
                RoughnessProfile::Sampled {
                    n1: *n2,
                    n2: *n1,
                    heights: t,
                }
            }
        }
    }

    /// Short description used in reports and exported tensors.
    pub fn describe(&self) -> String {
        match self {
            RoughnessProfile::Constant { height } => format!("constant h={height}"),
            RoughnessProfile::Sinusoidal {
                mean,
                amplitude,
                k1,
                k2,
            } => format!("sinusoidal mean={mean} amp={amplitude} k=({k1},{k2})"),
            RoughnessProfile::Sampled { n1, n2, .. } => format!("sampled {n1}x{n2}"),
        }
    }
}

fn cos_wave(k: u32, z: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        (2.0 * std::f64::consts::PI * f64::from(k) * wrap_cell(z)).cos()
    }
}

/// Bilinear periodic interpolation of a cell-centered field on `Z'`;
/// `value(j * n1 + i)` addresses the sample at cell `(i, j)`.
pub(crate) fn bilinear_cell_centered(
    value: &dyn Fn(usize) -> f64,
    n1: usize,
    n2: usize,
    z1: f64,
    z2: f64,
) -> f64 {
    let (i0, i1, tx) = sample_index(z1, n1);
    let (j0, j1, ty) = sample_index(z2, n2);
    let a = value(j0 * n1 + i0) * (1.0 - tx) + value(j0 * n1 + i1) * tx;
    let b = value(j1 * n1 + i0) * (1.0 - tx) + value(j1 * n1 + i1) * tx;
    a * (1.0 - ty) + b * ty
}

/// Map a cell coordinate to bracketing sample indices and the interpolation
/// weight, with periodic wrapping. Samples sit at cell centers.
fn sample_index(z: f64, n: usize) -> (usize, usize, f64) {
    let u = (wrap_cell(z) + 0.5) * n as f64 - 0.5;
    let f = u.floor();
    let t = u - f;
    let i0 = f.rem_euclid(n as f64) as usize % n;
    let i1 = (i0 + 1) % n;
    (i0, i1, t)
}

/// Discretization of the periodicity cell: `n1 x n2` cells over `Z'` and
/// `n3` vertical cells for the 3D problems on `Z' x (0, h_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellGrid {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl CellGrid {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 < 4 || n2 < 4 || n1 % 2 != 0 || n2 % 2 != 0 {
            return Err(Error::GridTooCoarse {
                what: format!("cell grid {n1}x{n2} (need n1, n2 >= 4 and even)"),
            });
        }
        if n3 == 0 {
            return Err(Error::GridTooCoarse {
                what: "cell grid needs n3 >= 1".into(),
            });
        }
        Ok(Self { n1, n2, n3 })
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n1 as f64
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.n2 as f64
    }

    /// Cell-center coordinate in `Z'`, first direction.
    pub fn z1_center(&self, i: usize) -> f64 {
        -0.5 + (i as f64 + 0.5) * self.dx()
    }

    /// Cell-center coordinate in `Z'`, second direction.
    pub fn z2_center(&self, j: usize) -> f64 {
        -0.5 + (j as f64 + 0.5) * self.dy()
    }

    /// Vertical spacing for a box of the given height.
    pub fn dz(&self, box_height: f64) -> f64 {
        box_height / self.n3 as f64
    }

    pub fn cells_2d(&self) -> usize {
        self.n1 * self.n2
    }
}

/// Axis-aligned rectangular macroscopic domain with an `m1 x m2`
/// cell-centered grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroGrid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub m1: usize,
    pub m2: usize,
}

impl MacroGrid {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64, m1: usize, m2: usize) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || !(x0.is_finite() && x1.is_finite() && y0.is_finite() && y1.is_finite()) {
            return Err(Error::Config {
                path: "macro_grid".into(),
                message: format!("domain ({x0},{x1})x({y0},{y1}) must have positive area"),
            });
        }
        if m1 < 3 || m2 < 3 {
            return Err(Error::GridTooCoarse {
                what: format!("macro grid {m1}x{m2} (need m1, m2 >= 3)"),
            });
        }
        Ok(Self {
            x0,
            x1,
            y0,
            y1,
            m1,
            m2,
        })
    }

    pub fn lx(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn ly(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn dx(&self) -> f64 {
        self.lx() / self.m1 as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly() / self.m2 as f64
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx()
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy()
    }

    /// Row-major index with the first coordinate fastest.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.m1 + i
    }

    pub fn n_cells(&self) -> usize {
        self.m1 * self.m2
    }

    /// True for cells touching the domain boundary.
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.m1 - 1 || j == self.m2 - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brinkman_parameter_from_constants() {
        // all-ones case
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.m(), 1.0);
        // perfect square
        let p = PhysicalParams::new(4.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.m(), 2.0);
        // sqrt(1e-3 / (0.5 * 2e-3)) = sqrt(1) = 1
        let p = PhysicalParams::new(1e-3, 2e-3, 0.5, 0.6, 10.0).unwrap();
        assert!((p.m() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_constants_rejected_by_name() {
        let err = PhysicalParams::new(-1.0, 1.0, 1.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("mu"));
        let err = PhysicalParams::new(1.0, 1.0, 0.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains('K'));
        let err = PhysicalParams::new(1.0, 1.0, 1.0, -2.0, 0.0).unwrap_err();
        assert!(err.to_string().contains('k'));
    }

    #[test]
    fn m_consistency_bit_for_bit() {
        let p = PhysicalParams::new(3.7, 0.9, 2.3, 1.1, -4.0).unwrap();
        let rebuilt = (p.mu() / (p.permeability() * p.mu_eff())).sqrt();
        assert_eq!(p.m().to_bits(), rebuilt.to_bits());
    }

    #[test]
    fn constant_profile_everywhere() {
        let p = RoughnessProfile::constant(1.0).unwrap();
        assert_eq!(p.eval(0.3, -7.2), 1.0);
        assert_eq!(p.h_min(), 1.0);
        assert_eq!(p.h_max(), 1.0);
    }

    #[test]
    fn sinusoidal_product_values() {
        let p = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 1).unwrap();
        assert!((p.eval(0.0, 0.0) - 1.3).abs() < 1e-15);
        // periodicity: value at (1, 0) equals value at (0, 0)
        assert!((p.eval(1.0, 0.0) - 1.3).abs() < 1e-12);
        assert!((p.h_min() - 0.7).abs() < 1e-15);
        assert!((p.h_max() - 1.3).abs() < 1e-15);
    }

    #[test]
    fn periodicity_under_integer_shifts() {
        let p = RoughnessProfile::sinusoidal(1.0, 0.25, 2, 1).unwrap();
        for &(z1, z2) in &[(0.13, -0.41), (0.49, 0.02), (-0.27, 0.33)] {
            for &(m1, m2) in &[(1.0, 0.0), (-3.0, 2.0), (5.0, -7.0)] {
                let d = (p.eval(z1 + m1, z2 + m2) - p.eval(z1, z2)).abs();
                assert!(d <= 1e-12, "shift by ({m1},{m2}) moved h by {d}");
            }
        }
    }

    #[test]
    fn sampled_grid_wraps_and_bounds() {
        let heights = vec![1.0, 2.0, 3.0, 4.0];
        let p = RoughnessProfile::sampled(2, 2, heights).unwrap();
        assert_eq!(p.h_min(), 1.0);
        assert_eq!(p.h_max(), 4.0);
        // interpolated values stay inside [min, max]
        for i in 0..50 {
            let z1 = -1.2 + 0.05 * i as f64;
            for j in 0..50 {
                let z2 = -1.3 + 0.05 * j as f64;
                let h = p.eval(z1, z2);
                assert!((1.0..=4.0).contains(&h));
            }
        }
        // sample points reproduce grid values
        assert!((p.eval(-0.25, -0.25) - 1.0).abs() < 1e-14);
        assert!((p.eval(0.25, -0.25) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn empty_sampled_grid_rejected() {
        assert!(RoughnessProfile::sampled(0, 0, vec![]).is_err());
        assert!(RoughnessProfile::sampled(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn nonpositive_height_rejected() {
        assert!(RoughnessProfile::constant(0.0).is_err());
        assert!(RoughnessProfile::sinusoidal(1.0, 1.0, 1, 0).is_err());
        assert!(RoughnessProfile::sampled(2, 2, vec![1.0, 1.0, -0.1, 1.0]).is_err());
    }

    #[test]
    fn sinusoidal_gradient_matches_differences() {
        let p = RoughnessProfile::sinusoidal(1.0, 0.3, 1, 2).unwrap();
        let d = 1e-6;
        for &(z1, z2) in &[(0.1, 0.2), (-0.3, 0.05)] {
            let g = p.grad(z1, z2);
            let fd1 = (p.eval(z1 + d, z2) - p.eval(z1 - d, z2)) / (2.0 * d);
            let fd2 = (p.eval(z1, z2 + d) - p.eval(z1, z2 - d)) / (2.0 * d);
            assert!((g[0] - fd1).abs() < 1e-6);
            assert!((g[1] - fd2).abs() < 1e-6);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(CellGrid::new(3, 4, 8).is_err());
        assert!(CellGrid::new(6, 5, 8).is_err());
        assert!(CellGrid::new(4, 4, 8).is_ok());
        assert!(MacroGrid::new(0.0, 1.0, 0.0, 1.0, 2, 3).is_err());
        assert!(MacroGrid::new(0.0, 0.0, 0.0, 1.0, 4, 4).is_err());
        assert!(MacroGrid::new(0.0, 2.0, -1.0, 1.0, 8, 4).is_ok());
    }
}
