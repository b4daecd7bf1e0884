//! The homogenized 2x2 mobility tensor and the roughness-regime tag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::RoughnessProfile;

/// Relative scaling of the roughness period against the film thickness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Roughness period much larger than the thickness (0 < l < 1).
    Subcritical,
    /// Period comparable to the thickness (l = 1).
    Critical,
    /// Period much smaller than the thickness (l > 1); the oscillating part
    /// stagnates and the model reduces to a smooth thin film.
    Smooth,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "subcritical"),
            Regime::Critical => write!(f, "critical"),
            Regime::Smooth => write!(f, "smooth"),
        }
    }
}

/// Effective mobility `A_M`: the average horizontal velocity is
/// `(K/mu) A_M (f' - grad p)`. Symmetric positive definite for every
/// admissible profile.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveTensor {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub regime: Regime,
    pub m: f64,
    pub profile: RoughnessProfile,
}

impl EffectiveTensor {
    pub fn isotropic(value: f64, regime: Regime, m: f64, profile: RoughnessProfile) -> Self {
        Self {
            a11: value,
            a12: 0.0,
            a21: 0.0,
            a22: value,
            regime,
            m,
            profile,
        }
    }

    /// `|a12 - a21|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self
            .a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.a12 - self.a21).abs() / scale
        }
    }

    /// Average the tensor with its transpose.
    pub fn symmetrized(&self) -> Self {
        let off = 0.5 * (self.a12 + self.a21);
        Self {
            a12: off,
            a21: off,
            ..self.clone()
        }
    }

    /// Eigenvalues of the symmetric part, smaller first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let off = 0.5 * (self.a12 + self.a21);
        let tr = 0.5 * (self.a11 + self.a22);
        let d = (0.25 * (self.a11 - self.a22) * (self.a11 - self.a22) + off * off).sqrt();
        (tr - d, tr + d)
    }

    pub fn check_spd(&self) -> Result<()> {
        let (lo, _) = self.eigenvalues();
        if lo > 0.0 && self.asymmetry() <= 1e-8 {
            Ok(())
        } else {
            Err(Error::NotSpd {
                a11: self.a11,
                a12: self.a12,
                a21: self.a21,
                a22: self.a22,
            })
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> RoughnessProfile {
        RoughnessProfile::constant(1.0).unwrap()
    }

    #[test]
    fn eigenvalues_of_diagonal_tensor() {
        let t = EffectiveTensor {
            a11: 2.0,
            a12: 0.0,
            a21: 0.0,
            a22: 5.0,
            regime: Regime::Subcritical,
            m: 1.0,
            profile: profile(),
        };
        assert_eq!(t.eigenvalues(), (2.0, 5.0));
        assert!(t.check_spd().is_ok());
    }

    #[test]
    fn spd_rejects_indefinite_and_asymmetric() {
        let t = EffectiveTensor {
            a11: 1.0,
            a12: 3.0,
            a21: 3.0,
            a22: 1.0,
            regime: Regime::Critical,
            m: 1.0,
            profile: profile(),
        };
        assert!(t.check_spd().is_err());
        let t = EffectiveTensor {
            a11: 1.0,
            a12: 0.5,
            a21: 0.0,
            a22: 1.0,
            regime: Regime::Critical,
            m: 1.0,
            profile: profile(),
        };
        assert!(t.check_spd().is_err());
        assert!(t.symmetrized().check_spd().is_ok());
    }
}
