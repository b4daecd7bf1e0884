//! JSON run configuration for the batch pipeline: regime, physical
//! constants, roughness profile, grids, forcing, solver tolerances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{CellGrid, MacroGrid, PhysicalParams, RoughnessProfile};
use crate::reynolds::MacroForcing;
use crate::tensor::Regime;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsConfig {
    pub mu: f64,
    pub mu_eff: f64,
    pub permeability: f64,
    pub conductivity: f64,
    pub heat_flux: f64,
}

impl ParamsConfig {
    pub fn build(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(
            self.mu,
            self.mu_eff,
            self.permeability,
            self.conductivity,
            self.heat_flux,
        )
    }
}

/// Forcing families: constant, the gradient of a cosine-product potential
/// (boundary compatible, used for manufactured solutions), a rotational
/// field, or samples read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingConfig {
    Constant { fx: f64, fy: f64 },
    /// `f = grad( amplitude cos(pi x^) cos(pi y^) )` in normalized domain
    /// coordinates.
    GradientCosine { amplitude: f64 },
    /// `f = amplitude (-d_y psi, d_x psi)` with
    /// `psi = sin(pi x^) sin(pi y^)`.
    Vortex { amplitude: f64 },
    /// CSV with rows `x1,x2,f1,f2` in row-major node order (first
    /// coordinate fastest); an optional header line is skipped.
    Sampled { path: String },
}

impl ForcingConfig {
    pub fn build(&self, grid: &MacroGrid) -> Result<MacroForcing> {
        let pi = std::f64::consts::PI;
        let (lx, ly) = (grid.lx(), grid.ly());
        match self {
            ForcingConfig::Constant { fx, fy } => {
                Ok(MacroForcing::from_fn(grid, |_, _| [*fx, *fy]))
            }
            ForcingConfig::GradientCosine { amplitude } => {
                let a = *amplitude;
                Ok(MacroForcing::from_fn(grid, |x, y| {
                    let xh = (x - grid.x0) / lx;
                    let yh = (y - grid.y0) / ly;
                    [
                        -a * pi / lx * (pi * xh).sin() * (pi * yh).cos(),
                        -a * pi / ly * (pi * xh).cos() * (pi * yh).sin(),
                    ]
                }))
            }
            ForcingConfig::Vortex { amplitude } => {
                let a = *amplitude;
                Ok(MacroForcing::from_fn(grid, |x, y| {
                    let xh = (x - grid.x0) / lx;
                    let yh = (y - grid.y0) / ly;
                    [
                        -a * pi / ly * (pi * xh).sin() * (pi * yh).cos(),
                        a * pi / lx * (pi * xh).cos() * (pi * yh).sin(),
                    ]
                }))
            }
            ForcingConfig::Sampled { path } => read_forcing_csv(path, grid),
        }
    }
}

fn read_forcing_csv(path: &str, grid: &MacroGrid) -> Result<MacroForcing> {
    let text = std::fs::read_to_string(path)?;
    let mut f1 = Vec::with_capacity(grid.n_cells());
    let mut f2 = Vec::with_capacity(grid.n_cells());
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && cols.iter().any(|c| c.parse::<f64>().is_err()) {
            continue; // header
        }
        if cols.len() != 4 {
            return Err(Error::Config {
                path: format!("forcing.path:{}", lineno + 1),
                message: format!("expected 4 columns x1,x2,f1,f2, got {}", cols.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Config {
                path: format!("forcing.path:{}", lineno + 1),
                message: format!("bad number `{s}`"),
            })
        };
        let _x1 = parse(cols[0])?;
        let _x2 = parse(cols[1])?;
        f1.push(parse(cols[2])?);
        f2.push(parse(cols[3])?);
    }
    if f1.len() != grid.n_cells() {
        return Err(Error::Config {
            path: "forcing.path".into(),
            message: format!(
                "{} data rows, grid needs {} (row-major, first coordinate fastest)",
                f1.len(),
                grid.n_cells()
            ),
        });
    }
    Ok(MacroForcing { f1, f2 })
}

fn default_cell_tol() -> f64 {
    1e-10
}
fn default_macro_tol() -> f64 {
    1e-11
}
fn default_crit_tol() -> f64 {
    1e-8
}
fn default_temp_tol() -> f64 {
    1e-10
}
fn default_quad_n() -> usize {
    1024
}
fn default_cell_quad() -> usize {
    16
}

/// Solver tolerances and quadrature resolutions, all with usable defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Relative residual target of the 2D periodic corrector solves.
    #[serde(default = "default_cell_tol")]
    pub cell_tol: f64,
    /// Relative residual target of the macroscopic pressure solve.
    #[serde(default = "default_macro_tol")]
    pub macro_tol: f64,
    /// Divergence target of the 3D critical cell solves.
    #[serde(default = "default_crit_tol")]
    pub crit_tol: f64,
    /// Relative residual target of the cell temperature solves.
    #[serde(default = "default_temp_tol")]
    pub temp_tol: f64,
    /// Vertical quadrature resolution of the temperature reconstruction.
    #[serde(default = "default_quad_n")]
    pub quad_n: usize,
    /// Horizontal quadrature points per direction for cell averages.
    #[serde(default = "default_cell_quad")]
    pub cell_quad: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cell_tol: default_cell_tol(),
            macro_tol: default_macro_tol(),
            crit_tol: default_crit_tol(),
            temp_tol: default_temp_tol(),
            quad_n: default_quad_n(),
            cell_quad: default_cell_quad(),
        }
    }
}

/// One batch run: everything the pipeline needs, loadable from a single
/// JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub regime: Regime,
    pub params: ParamsConfig,
    pub profile: RoughnessProfile,
    pub cell_grid: CellGrid,
    pub macro_grid: MacroGrid,
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Smooth regime only: substitute `h_min` for the height map.
    #[serde(default)]
    pub use_h_min: bool,
    /// Write vertical profile slices next to the field outputs.
    #[serde(default)]
    pub write_slices: bool,
    /// Worker threads for the independent solves (default: all cores).
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.build()?;
        self.profile.validate().map_err(|e| Error::Config {
            path: "profile".into(),
            message: e.to_string(),
        })?;
        CellGrid::new(self.cell_grid.n1, self.cell_grid.n2, self.cell_grid.n3).map_err(|e| {
            Error::Config {
                path: "cell_grid".into(),
                message: e.to_string(),
            }
        })?;
        MacroGrid::new(
            self.macro_grid.x0,
            self.macro_grid.x1,
            self.macro_grid.y0,
            self.macro_grid.y1,
            self.macro_grid.m1,
            self.macro_grid.m2,
        )
        .map_err(|e| Error::Config {
            path: "macro_grid".into(),
            message: e.to_string(),
        })?;
        for (name, tol) in [
            ("solver.cell_tol", self.solver.cell_tol),
            ("solver.macro_tol", self.solver.macro_tol),
            ("solver.crit_tol", self.solver.crit_tol),
            ("solver.temp_tol", self.solver.temp_tol),
        ] {
            if !(tol > 0.0) {
                return Err(Error::Config {
                    path: name.into(),
                    message: format!("tolerance must be positive, got {tol}"),
                });
            }
        }
        if self.solver.quad_n < 64 {
            return Err(Error::Config {
                path: "solver.quad_n".into(),
                message: format!("needs >= 64, got {}", self.solver.quad_n),
            });
        }
        if self.solver.cell_quad < 2 {
            return Err(Error::Config {
                path: "solver.cell_quad".into(),
                message: "needs >= 2".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> String {
        r#"{
            "regime": "subcritical",
            "params": {"mu": 1.0, "mu_eff": 1.0, "permeability": 1.0, "conductivity": 1.0, "heat_flux": 0.5},
            "profile": {"kind": "sinusoidal", "mean": 1.0, "amplitude": 0.3, "k1": 1, "k2": 0},
            "cell_grid": {"n1": 32, "n2": 32, "n3": 16},
            "macro_grid": {"x0": 0.0, "x1": 1.0, "y0": 0.0, "y1": 1.0, "m1": 16, "m2": 16},
            "forcing": {"kind": "constant", "fx": 1.0, "fy": 0.0}
        }"#
        .to_string()
    }

    #[test]
    fn parse_and_roundtrip_idempotent() {
        let cfg = RunConfig::from_json(&sample_json()).unwrap();
        assert_eq!(cfg.regime, Regime::Subcritical);
        assert_eq!(cfg.solver.quad_n, 1024);
        let once = cfg.to_json();
        let twice = RunConfig::from_json(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }

    #[test]
    fn invalid_fields_rejected_with_paths() {
        let bad = sample_json().replace("\"mu\": 1.0", "\"mu\": -1.0");
        assert!(RunConfig::from_json(&bad).is_err());
        let bad = sample_json().replace("\"n1\": 32", "\"n1\": 3");
        let err = RunConfig::from_json(&bad).unwrap_err();
        assert!(err.to_string().contains("cell_grid"));
    }

    #[test]
    fn forcing_families_evaluate() {
        let grid = MacroGrid::new(0.0, 2.0, 0.0, 1.0, 8, 8).unwrap();
        let f = ForcingConfig::Constant { fx: 0.5, fy: -1.0 }
            .build(&grid)
            .unwrap();
        assert!(f.f1.iter().all(|&v| v == 0.5));
        let f = ForcingConfig::Vortex { amplitude: 1.0 }.build(&grid).unwrap();
        f.validate(&grid).unwrap();
        let f = ForcingConfig::GradientCosine { amplitude: 2.0 }
            .build(&grid)
            .unwrap();
        f.validate(&grid).unwrap();
    }

    #[test]
    fn sampled_forcing_roundtrip() {
        let grid = MacroGrid::new(0.0, 1.0, 0.0, 1.0, 4, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let mut text = String::from("x1,x2,f1,f2\n");
        for j in 0..3 {
            for i in 0..4 {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    grid.x_center(i),
                    grid.y_center(j),
                    (i + j) as f64,
                    1.0
                ));
            }
        }
        std::fs::write(&path, text).unwrap();
        let f = ForcingConfig::Sampled {
            path: path.to_string_lossy().into_owned(),
        }
        .build(&grid)
        .unwrap();
        assert_eq!(f.f1.len(), 12);
        assert_eq!(f.f1[grid.idx(2, 1)], 3.0);
        // wrong row count rejected
        std::fs::write(&path, "0,0,1,1\n").unwrap();
        assert!(ForcingConfig::Sampled {
            path: path.to_string_lossy().into_owned(),
        }
        .build(&grid)
        .is_err());
    }
}
