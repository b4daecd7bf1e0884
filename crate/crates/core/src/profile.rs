//! Closed-form vertical Brinkman profile of a flat channel of height `h`:
//! the wall coefficients, the dimensionless velocity shape, its vertical
//! derivative, and the height-integrated flow factor.
//!
//! The shape solves `-(1/M^2) s'' + s = 1` with `s(0) = s(h) = 0` and is
//! evaluated in a shifted-exponential form that stays finite for arbitrarily
//! large `M h` (the naive `e^{M h}` form overflows near `M h ~ 700`).

use crate::error::{check_positive, Error, Result};

/// Coefficients of the two exponentials in the vertical profile
/// `s(z3) = a1 e^{M z3} + a2 e^{-M z3} + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub h: f64,
    pub m: f64,
}

/// Wall coefficients for channel height `h` and Brinkman parameter `M`:
/// `a1 = -(1 - e^{-Mh}) / (e^{Mh} - e^{-Mh})`,
/// `a2 =  (1 - e^{ Mh}) / (e^{Mh} - e^{-Mh})`,
/// evaluated as `a1 = -e^{-Mh}/(1 + e^{-Mh})`, `a2 = -1/(1 + e^{-Mh})`.
pub fn profile_coeffs(m: f64, h: f64) -> Result<ProfileCoefficients> {
    check_positive("M", m)?;
    check_positive("h", h)?;
    let e = (-m * h).exp();
    let d = 1.0 + e;
    Ok(ProfileCoefficients {
        a1: -e / d,
        a2: -1.0 / d,
        h,
        m,
    })
}

/// Dimensionless velocity shape `s(z3)`, zero at both walls. The physical
/// horizontal velocity is `(K/mu) (f' - grad p) s(z3)`.
pub fn profile_velocity(c: &ProfileCoefficients, z3: f64) -> Result<f64> {
    check_range(c, z3)?;
    Ok(shape(c.m, c.h, z3))
}

/// `d s / d z3`, needed by the dissipation source of the reduced heat
/// equation.
pub fn profile_dz3(c: &ProfileCoefficients, z3: f64) -> Result<f64> {
    check_range(c, z3)?;
    Ok(shape_dz3(c.m, c.h, z3))
}

/// Flow factor `phi_M(h) = int_0^h s(z3) dz3 = h - (2/M) tanh(M h / 2)`:
/// the scalar mobility of a flat channel. Strictly positive, increasing in
/// `h`, with the Poiseuille limit `M^2 h^3 / 12` as `M h -> 0` and the
/// Darcy limit `h - 2/M` as `M h -> infinity`.
pub fn flow_factor(m: f64, h: f64) -> Result<f64> {
    check_positive("M", m)?;
    check_positive("h", h)?;
    Ok(h - (2.0 / m) * (0.5 * m * h).tanh())
}

/// Overflow-free evaluation of the shape; exact zeros at both walls.
pub(crate) fn shape(m: f64, h: f64, z3: f64) -> f64 {
    let d = 1.0 + (-m * h).exp();
    1.0 - ((-m * (h - z3)).exp() + (-m * z3).exp()) / d
}

pub(crate) fn shape_dz3(m: f64, h: f64, z3: f64) -> f64 {
    let d = 1.0 + (-m * h).exp();
    m * ((-m * z3).exp() - (-m * (h - z3)).exp()) / d
}

fn check_range(c: &ProfileCoefficients, z3: f64) -> Result<()> {
    if z3 < 0.0 || z3 > c.h || !z3.is_finite() {
        return Err(Error::OutOfRange {
            what: "z3",
            value: z3,
            lo: 0.0,
            hi: c.h,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    #[test]
    fn wall_identities_at_unit_parameters() {
        let c = profile_coeffs(1.0, 1.0).unwrap();
        let e = std::f64::consts::E;
        assert!((c.a1 + c.a2 + 1.0).abs() < 1e-12);
        assert!((c.a1 * e + c.a2 / e + 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_m_limits_of_coefficients() {
        let m = 50.0;
        let c = profile_coeffs(m, 1.0).unwrap();
        // a1 -> -e^{-M} -> 0, a2 -> -1
        assert!((c.a1 + (-m).exp()).abs() < 1e-12);
        assert!((c.a2 + 1.0).abs() < 1e-12);
        // and the shape still matches the brute-force ODE solve
        let bvp = oracle::brinkman_bvp_1d(m, 1.0, 8192).unwrap();
        let s_mid = profile_velocity(&c, 0.5).unwrap();
        assert!((s_mid - bvp.interp(0.5)).abs() < 1e-7);
    }

    #[test]
    fn shape_matches_bvp_oracle() {
        // (M, h) = (2, 0.5) against the fine-grid two-point BVP solve
        let m = 2.0;
        let h = 0.5;
        let c = profile_coeffs(m, h).unwrap();
        let bvp = oracle::brinkman_bvp_1d(m, h, 16384).unwrap();
        for &frac in &[0.25, 0.5, 0.75] {
            let z3 = frac * h;
            let s = profile_velocity(&c, z3).unwrap();
            assert!(
                (s - bvp.interp(z3)).abs() < 1e-8,
                "shape deviates from oracle by {}",
                (s - bvp.interp(z3)).abs()
            );
        }
    }

    #[test]
    fn no_slip_and_positivity_over_parameter_grid() {
        // log-spaced grid M in [1e-3, 1e3], h in [0.1, 10]
        for i in 0..=12 {
            let m = 10f64.powf(-3.0 + 0.5 * i as f64);
            for j in 0..=8 {
                let h = 10f64.powf(-1.0 + 0.25 * j as f64);
                let c = profile_coeffs(m, h).unwrap();
                assert!(profile_velocity(&c, 0.0).unwrap().abs() <= 1e-12);
                assert!(profile_velocity(&c, h).unwrap().abs() <= 1e-12);
                for t in 1..8 {
                    let s = profile_velocity(&c, h * t as f64 / 8.0).unwrap();
                    assert!(s > 0.0, "shape not positive at M={m}, h={h}");
                }
                assert!(flow_factor(m, h).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn flow_factor_matches_shape_quadrature() {
        let m = 1.0;
        let h = 1.0;
        let phi = flow_factor(m, h).unwrap();
        // trapezoid quadrature of the shape on 1e5 points
        let n = 100_000;
        let dz = h / n as f64;
        let mut q = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            q += w * shape(m, h, i as f64 * dz);
        }
        q *= dz;
        assert!(((phi - q) / phi).abs() < 1e-8);
    }

    #[test]
    fn poiseuille_and_darcy_limits() {
        // M h = 1e-2: phi -> M^2 h^3 / 12
        let (m, h) = (1e-2, 1.0);
        let phi = flow_factor(m, h).unwrap();
        let poiseuille = m * m * h * h * h / 12.0;
        assert!(((phi - poiseuille) / poiseuille).abs() < 1e-4);
        // M h = 100: phi -> h - 2/M
        let (m, h) = (100.0, 1.0);
        let phi = flow_factor(m, h).unwrap();
        assert!((phi - (1.0 - 0.02)).abs() < 1e-6);
    }

    #[test]
    fn flow_factor_monotone_in_height() {
        for i in 0..=6 {
            let m = 10f64.powf(-2.0 + i as f64 * 4.0 / 6.0);
            let mut prev = 0.0;
            for j in 1..=20 {
                let h = 0.1 + 0.5 * j as f64;
                let phi = flow_factor(m, h).unwrap();
                assert!(phi > prev);
                prev = phi;
            }
        }
    }

    #[test]
    fn stable_for_extreme_exponents() {
        // M h up to 1e4 must stay finite in every exported quantity
        let m = 1e3;
        let h = 10.0;
        let c = profile_coeffs(m, h).unwrap();
        assert!(c.a1.is_finite() && c.a2.is_finite());
        for t in 0..=10 {
            let z3 = h * t as f64 / 10.0;
            assert!(profile_velocity(&c, z3).unwrap().is_finite());
            assert!(profile_dz3(&c, z3).unwrap().is_finite());
        }
        assert!(flow_factor(m, h).unwrap().is_finite());
    }

    #[test]
    fn derivative_matches_central_differences() {
        let c = profile_coeffs(1.0, 1.0).unwrap();
        let delta = 1e-4;
        for &z3 in &[0.2, 0.5, 0.8] {
            let fd = (shape(1.0, 1.0, z3 + delta) - shape(1.0, 1.0, z3 - delta)) / (2.0 * delta);
            let d = profile_dz3(&c, z3).unwrap();
            assert!((fd - d).abs() <= 1.0 * delta * delta, "fd gap {}", (fd - d).abs());
        }
        // wall derivative is M (a1 - a2) > 0
        let d0 = profile_dz3(&c, 0.0).unwrap();
        assert!((d0 - 1.0 * (c.a1 - c.a2)).abs() < 1e-12);
        assert!(d0 > 0.0);
    }

    #[test]
    fn interior_extremum_has_zero_slope() {
        // symmetric channel: the maximum sits at h/2
        let c = profile_coeffs(3.0, 2.0).unwrap();
        assert!(profile_dz3(&c, 1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn out_of_range_rejected() {
        let c = profile_coeffs(1.0, 1.0).unwrap();
        assert!(profile_velocity(&c, -0.1).is_err());
        assert!(profile_velocity(&c, 1.1).is_err());
        assert!(profile_dz3(&c, 2.0).is_err());
    }
}
