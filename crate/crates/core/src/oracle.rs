//! Brute-force reference solvers used to validate the closed forms and the
//! cell/macro solvers: finite-difference two-point BVPs, composite Simpson
//! quadrature, the 1D laminate reduction, and observed-order estimation.
//!
//! Nothing here calls into the solver modules; the whole point of this module
//! is to provide an independent route to the same numbers.

use crate::error::{Error, Result};

/// Grid, solution values and the maximum discrete residual of a 1D
/// finite-difference solve.
#[derive(Debug, Clone)]
pub struct BvpResult {
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub max_residual: f64,
}

impl BvpResult {
    /// Linear interpolation of the stored solution.
    pub fn interp(&self, z: f64) -> f64 {
        let n = self.z.len() - 1;
        let h = self.z[n] - self.z[0];
        let t = ((z - self.z[0]) / h * n as f64).clamp(0.0, n as f64);
        let i = (t.floor() as usize).min(n - 1);
        let s = t - i as f64;
        self.u[i] * (1.0 - s) + self.u[i + 1] * s
    }
}

/// Solve `-(1/M^2) u'' + u = 1` on `(0, h)` with `u(0) = u(h) = 0` by
/// second-order central differences on `n` intervals (Thomas algorithm).
pub fn brinkman_bvp_1d(m: f64, h: f64, n: usize) -> Result<BvpResult> {
    if n < 128 {
        return Err(Error::GridTooCoarse {
            what: format!("brinkman_bvp_1d needs n >= 128, got {n}"),
        });
    }
    let dz = h / n as f64;
    let c = 1.0 / (m * m * dz * dz);
    // interior unknowns u_1 .. u_{n-1}
    let nn = n - 1;
    let diag = vec![2.0 * c + 1.0; nn];
    let off = vec![-c; nn];
    let rhs = vec![1.0; nn];
    let inner = thomas(&off, &diag, &off, &rhs);

    let mut u = vec![0.0; n + 1];
    u[1..n].copy_from_slice(&inner);
    let z: Vec<f64> = (0..=n).map(|i| i as f64 * dz).collect();

    let mut max_residual: f64 = 0.0;
    for i in 1..n {
        let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (dz * dz);
        max_residual = max_residual.max((-lap / (m * m) + u[i] - 1.0).abs());
    }
    Ok(BvpResult { z, u, max_residual })
}

/// Solve `-k T'' = S(z)` on `(0, h)` with `T(h) = 0` and `-k T'(0) = b`.
///
/// `source` holds `S` sampled at the `n + 1` uniform nodes including both
/// ends; the Neumann end uses a second-order ghost closure.
pub fn heat_bvp_1d(source: &[f64], b: f64, k: f64, h: f64) -> Result<BvpResult> {
    let n = source.len().saturating_sub(1);
    if n < 128 {
        return Err(Error::GridTooCoarse {
            what: format!("heat_bvp_1d needs >= 129 source samples, got {}", source.len()),
        });
    }
    let dz = h / n as f64;
    let c = k / (dz * dz);
    // unknowns T_0 .. T_{n-1}; T_n = 0
    let mut diag = vec![2.0 * c; n];
    let mut lower = vec![-c; n];
    let mut upper = vec![-c; n];
    let mut rhs = source[..n].to_vec();
    // ghost closure at z = 0: T_{-1} = T_1 + 2 dz b / k
    diag[0] = 2.0 * c;
    upper[0] = -2.0 * c;
    rhs[0] += 2.0 * b / dz;
    lower[0] = 0.0;
    let t_inner = thomas(&lower[1..], &diag, &upper[..n - 1], &rhs);

    let mut u = vec![0.0; n + 1];
    u[..n].copy_from_slice(&t_inner);
    let z: Vec<f64> = (0..=n).map(|i| i as f64 * dz).collect();

    let mut max_residual: f64 = 0.0;
    for i in 1..n {
        let lap = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (dz * dz);
        max_residual = max_residual.max((-k * lap - source[i]).abs());
    }
    Ok(BvpResult { z, u, max_residual })
}

/// Tridiagonal solve; `lower` couples row i to i-1, `upper` row i to i+1.
/// `lower.len() == n - 1`, `upper.len() == n - 1` (or longer slices whose
/// first n-1 entries are used).
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Composite Simpson quadrature on `[a, b]`; `n` is forced even.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Local flow-factor reference `h - (2/M) tanh(M h / 2)`; kept private to the
/// oracle so the laminate reduction needs no imports from the profile layer.
fn flow_factor_ref(m: f64, h: f64) -> f64 {
    h - (2.0 / m) * (0.5 * m * h).tanh()
}

/// Classical laminate reduction of the periodic cell problem for a profile
/// varying along one coordinate only: the tensor is diagonal with the
/// harmonic mean of the flow factor along the varying axis and the
/// arithmetic mean along the other.
///
/// `h` is the height over `Z'`, `varies_along` is 0 or 1, means are computed
/// by composite Simpson quadrature at `n` points (forced even). Rejects
/// profiles that are not separable in the stated direction.
pub fn laminate_tensor_1d(
    h: &dyn Fn(f64, f64) -> f64,
    varies_along: usize,
    m: f64,
    n: usize,
) -> Result<[[f64; 2]; 2]> {
    let line = |t: f64| -> f64 {
        if varies_along == 0 {
            h(t, 0.0)
        } else {
            h(0.0, t)
        }
    };
    // separability check: h must not move along the frozen coordinate
    for &t in &[-0.37, 0.0, 0.18, 0.45] {
        for &s in &[-0.5, -0.21, 0.08, 0.33] {
            let v = if varies_along == 0 { h(t, s) } else { h(s, t) };
            if (v - line(t)).abs() > 1e-12 * (1.0 + v.abs()) {
                return Err(Error::NotSeparable {
                    direction: varies_along,
                });
            }
        }
    }
    let harmonic = 1.0
        / simpson(
            &|t: f64| 1.0 / flow_factor_ref(m, line(t)),
            -0.5,
            0.5,
            n,
        );
    let arithmetic = simpson(&|t: f64| flow_factor_ref(m, line(t)), -0.5, 0.5, n);
    if varies_along == 0 {
        Ok([[harmonic, 0.0], [0.0, arithmetic]])
    } else {
        Ok([[arithmetic, 0.0], [0.0, harmonic]])
    }
}

/// Least-squares slope of `log(error)` against `log(spacing)` over a grid
/// ladder. Needs at least three points; non-monotone error sequences are
/// reported as order zero.
pub fn convergence_order(spacings: &[f64], errors: &[f64]) -> Result<f64> {
    if spacings.len() < 3 || spacings.len() != errors.len() {
        return Err(Error::GridTooCoarse {
            what: format!(
                "convergence_order needs >= 3 ladder points, got {}",
                spacings.len().min(errors.len())
            ),
        });
    }
    // sort by decreasing spacing and demand strictly decreasing errors
    let mut idx: Vec<usize> = (0..spacings.len()).collect();
    idx.sort_by(|&a, &b| spacings[b].total_cmp(&spacings[a]));
    for w in idx.windows(2) {
        if errors[w[1]] >= errors[w[0]] {
            return Ok(0.0);
        }
    }
    let lx: Vec<f64> = idx.iter().map(|&i| spacings[i].ln()).collect();
    let ly: Vec<f64> = idx.iter().map(|&i| errors[i].ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brinkman_bvp_richardson_self_consistency() {
        // interior value converges at second order: Richardson across
        // n = 1024 / 2048 / 4096 agrees with the finest solve to ~1e-10
        let coarse = brinkman_bvp_1d(1.0, 1.0, 1024).unwrap();
        let mid = brinkman_bvp_1d(1.0, 1.0, 2048).unwrap();
        let fine = brinkman_bvp_1d(1.0, 1.0, 4096).unwrap();
        let u_c = coarse.u[512];
        let u_m = mid.u[1024];
        let u_f = fine.u[2048];
        let extrap = u_m + (u_m - u_c) / 3.0;
        assert!((extrap - u_f).abs() < 1e-8);
        // residual of the discrete equations is at rounding level
        assert!(fine.max_residual < 1e-10);
    }

    #[test]
    fn brinkman_bvp_maximum_principle() {
        for &m in &[0.01, 1.0, 50.0] {
            let r = brinkman_bvp_1d(m, 2.0, 256).unwrap();
            assert!(r.u.iter().all(|&u| u <= 1.0 + 1e-12 && u >= -1e-12));
        }
    }

    #[test]
    fn brinkman_bvp_small_mh_parabolic_limit() {
        // u -> (M^2/2) z (h - z) as M h -> 0
        let m = 0.01;
        let h = 1.0;
        let r = brinkman_bvp_1d(m, h, 512).unwrap();
        let mid = r.u[256];
        let limit = 0.5 * m * m * (h / 2.0) * (h / 2.0);
        assert!(
            ((mid - limit) / limit).abs() < 1e-3,
            "relative deviation {}",
            ((mid - limit) / limit).abs()
        );
    }

    #[test]
    fn brinkman_bvp_rejects_coarse_grid() {
        assert!(brinkman_bvp_1d(1.0, 1.0, 64).is_err());
    }

    #[test]
    fn heat_bvp_linear_profile_for_pure_flux() {
        // S = 0, b = 1, k = 1, h = 1: T = (b/k)(h - z)
        let n = 256;
        let src = vec![0.0; n + 1];
        let r = heat_bvp_1d(&src, 1.0, 1.0, 1.0).unwrap();
        for (i, &z) in r.z.iter().enumerate() {
            assert!((r.u[i] - (1.0 - z)).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_bvp_zero_data_zero_solution() {
        let src = vec![0.0; 129];
        let r = heat_bvp_1d(&src, 0.0, 1.0, 1.0).unwrap();
        assert!(r.u.iter().all(|&t| t.abs() < 1e-14));
    }

    #[test]
    fn heat_bvp_quadratic_source_exact() {
        // S = 2k on (0,1), b = 0: T = ... solves -kT'' = 2k, T' (0)=0, T(1)=0
        // => T = 1 - z^2, exactly representable by the second-order scheme
        let n = 200;
        let k = 3.0;
        let src = vec![2.0 * k; n + 1];
        let r = heat_bvp_1d(&src, 0.0, k, 1.0).unwrap();
        for (i, &z) in r.z.iter().enumerate() {
            assert!((r.u[i] - (1.0 - z * z)).abs() < 1e-10);
        }
    }

    #[test]
    fn simpson_exact_for_cubics() {
        let v = simpson(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 16);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn laminate_constant_profile_both_means_equal() {
        let t = laminate_tensor_1d(&|_, _| 1.0, 0, 1.0, 1000).unwrap();
        let phi = flow_factor_ref(1.0, 1.0);
        assert!((t[0][0] - phi).abs() < 1e-12);
        assert!((t[1][1] - phi).abs() < 1e-12);
    }

    #[test]
    fn laminate_harmonic_below_arithmetic() {
        let h = |z1: f64, _z2: f64| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * z1).cos();
        let t = laminate_tensor_1d(&h, 0, 1.0, 100_000).unwrap();
        assert!(t[0][0] > 0.0 && t[1][1] > 0.0);
        assert!(t[0][0] < t[1][1], "harmonic {} vs arithmetic {}", t[0][0], t[1][1]);
        // swapped axes when the variation is along z2
        let h2 = |_z1: f64, z2: f64| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * z2).cos();
        let t2 = laminate_tensor_1d(&h2, 1, 1.0, 100_000).unwrap();
        assert!((t2[1][1] - t[0][0]).abs() < 1e-12);
        assert!((t2[0][0] - t[1][1]).abs() < 1e-12);
    }

    #[test]
    fn laminate_small_amplitude_perturbation() {
        let phi0 = flow_factor_ref(1.0, 1.0);
        for &amp in &[1e-2, 1e-3] {
            let h = move |z1: f64, _: f64| 1.0 + amp * (2.0 * std::f64::consts::PI * z1).cos();
            let t = laminate_tensor_1d(&h, 0, 1.0, 20_000).unwrap();
            // both means deviate from phi(1) by O(amp^2)
            assert!((t[0][0] - phi0).abs() < 10.0 * amp * amp + 1e-12);
            assert!((t[1][1] - phi0).abs() < 10.0 * amp * amp + 1e-12);
        }
    }

    #[test]
    fn laminate_rejects_nonseparable() {
        let h = |z1: f64, z2: f64| {
            1.0 + 0.2
                * (2.0 * std::f64::consts::PI * z1).cos()
                * (2.0 * std::f64::consts::PI * z2).cos()
        };
        assert!(matches!(
            laminate_tensor_1d(&h, 0, 1.0, 1000),
            Err(Error::NotSeparable { .. })
        ));
    }

    #[test]
    fn convergence_order_recovers_slope() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        let p = convergence_order(&hs, &errs).unwrap();
        assert!((p - 2.0).abs() < 1e-10);
    }

    #[test]
    fn convergence_order_flags_non_monotone_and_short_ladders() {
        assert_eq!(convergence_order(&[0.1, 0.05, 0.025], &[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!(convergence_order(&[0.1, 0.05], &[1.0, 0.5]).is_err());
    }
}
