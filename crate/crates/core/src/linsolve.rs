//! Matrix-free Krylov solvers on structured grids: preconditioned conjugate
//! gradients for the symmetric systems and BiCGSTAB for the mildly
//! nonsymmetric full-tensor Reynolds operator. Singular pure-Neumann /
//! periodic systems are handled by projecting the constant null vector out
//! of the residual at every iteration.

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual_inf: f64,
    pub converged: bool,
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Subtract the mean so constants stay out of the Krylov space.
pub fn project_zero_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

/// Preconditioned conjugate gradients for `A x = b` with SPD `apply` and a
/// general SPD preconditioner application `z = M^{-1} r`.
///
/// * `project`: optional null-space projection applied to residuals and
///   iterates (mean-zero for singular Neumann/periodic systems).
/// * Stops when `||r||_inf <= tol_inf` (absolute) or `max_iter` is reached;
///   a stagnation guard exits once the residual stops improving near
///   rounding level.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol_inf: f64,
    max_iter: usize,
    project: Option<&dyn Fn(&mut [f64])>,
) -> SolveStats {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    if let Some(proj) = project {
        proj(x);
    }
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    if let Some(proj) = project {
        proj(&mut r);
    }

    let mut res_inf = norm_inf(&r);
    if res_inf <= tol_inf {
        return SolveStats {
            iterations: 0,
            residual_inf: res_inf,
            converged: true,
        };
    }

    precond(&r, &mut z);
    p.copy_from_slice(&z);
    let mut rz = dot(&r, &z);
    let mut best = res_inf;
    let mut stall = 0usize;

    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return SolveStats {
                iterations: it,
                residual_inf: res_inf,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if let Some(proj) = project {
            proj(&mut r);
        }
        res_inf = norm_inf(&r);
        if res_inf <= tol_inf {
            if let Some(proj) = project {
                proj(x);
            }
            return SolveStats {
                iterations: it,
                residual_inf: res_inf,
                converged: true,
            };
        }
        if res_inf < best * (1.0 - 1e-6) {
            best = res_inf;
            stall = 0;
        } else {
            stall += 1;
            if stall > 400 {
                break;
            }
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if let Some(proj) = project {
        proj(x);
    }
    SolveStats {
        iterations: max_iter,
        residual_inf: res_inf,
        converged: res_inf <= tol_inf,
    }
}

/// Conjugate gradients with an optional Jacobi (inverse-diagonal)
/// preconditioner; see [`pcg`].
pub fn cg(
    apply: impl FnMut(&[f64], &mut [f64]),
    inv_diag: Option<&[f64]>,
    b: &[f64],
    x: &mut [f64],
    tol_inf: f64,
    max_iter: usize,
    project: Option<&dyn Fn(&mut [f64])>,
) -> SolveStats {
    pcg(
        apply,
        |r: &[f64], z: &mut [f64]| precondition(z, r, inv_diag),
        b,
        x,
        tol_inf,
        max_iter,
        project,
    )
}

/// BiCGSTAB for `A x = b`; same conventions as [`cg`]. Used where one-sided
/// boundary closures of the cross-derivative flux break exact symmetry.
pub fn bicgstab(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    inv_diag: Option<&[f64]>,
    b: &[f64],
    x: &mut [f64],
    tol_inf: f64,
    max_iter: usize,
    project: Option<&dyn Fn(&mut [f64])>,
) -> SolveStats {
    let n = b.len();
    let mut r = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    if let Some(proj) = project {
        proj(x);
    }
    apply(x, &mut tmp);
    for i in 0..n {
        r[i] = b[i] - tmp[i];
    }
    if let Some(proj) = project {
        proj(&mut r);
    }
    let r0 = r.clone();
    let mut res_inf = norm_inf(&r);
    if res_inf <= tol_inf {
        return SolveStats {
            iterations: 0,
            residual_inf: res_inf,
            converged: true,
        };
    }

    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut t = vec![0.0; n];

    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < 1e-300 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precondition(&mut ph, &p, inv_diag);
        apply(&ph, &mut v);
        if let Some(proj) = project {
            proj(&mut v);
        }
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm_inf(&s) <= tol_inf {
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            if let Some(proj) = project {
                proj(x);
            }
            return SolveStats {
                iterations: it,
                residual_inf: norm_inf(&s),
                converged: true,
            };
        }
        precondition(&mut sh, &s, inv_diag);
        apply(&sh, &mut t);
        if let Some(proj) = project {
            proj(&mut t);
        }
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if let Some(proj) = project {
            proj(&mut r);
        }
        res_inf = norm_inf(&r);
        if res_inf <= tol_inf {
            if let Some(proj) = project {
                proj(x);
            }
            return SolveStats {
                iterations: it,
                residual_inf: res_inf,
                converged: true,
            };
        }
        if omega.abs() < 1e-300 {
            break;
        }
    }
    if let Some(proj) = project {
        proj(x);
    }
    SolveStats {
        iterations: max_iter,
        residual_inf: res_inf,
        converged: res_inf <= tol_inf,
    }
}

fn precondition(z: &mut [f64], r: &[f64], inv_diag: Option<&[f64]>) {
    match inv_diag {
        Some(d) => {
            for i in 0..z.len() {
                z[i] = d[i] * r[i];
            }
        }
        None => z.copy_from_slice(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D periodic Laplacian plus identity: SPD, nonsingular.
    fn apply_shifted_laplacian(x: &[f64], out: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = x[(i + n - 1) % n];
            let r = x[(i + 1) % n];
            out[i] = x[i] + (2.0 * x[i] - l - r) * (n * n) as f64;
        }
    }

    #[test]
    fn cg_solves_spd_system() {
        let n = 64;
        let b: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let mut x = vec![0.0; n];
        let stats = cg(apply_shifted_laplacian, None, &b, &mut x, 1e-12, 10_000, None);
        assert!(stats.converged, "residual {}", stats.residual_inf);
        let mut ax = vec![0.0; n];
        apply_shifted_laplacian(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn cg_handles_singular_periodic_system() {
        // pure periodic Laplacian: null space of constants
        let n = 32;
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let l = x[(i + n - 1) % n];
                let r = x[(i + 1) % n];
                out[i] = (2.0 * x[i] - l - r) * (n * n) as f64;
            }
        };
        let mut b: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect();
        project_zero_mean(&mut b);
        let mut x = vec![0.0; n];
        let proj: &dyn Fn(&mut [f64]) = &|v: &mut [f64]| project_zero_mean(v);
        let stats = cg(apply, None, &b, &mut x, 1e-13, 10_000, Some(proj));
        assert!(stats.converged);
        assert!(x.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn bicgstab_matches_cg_on_symmetric_problem() {
        let n = 64;
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        cg(apply_shifted_laplacian, None, &b, &mut x1, 1e-12, 10_000, None);
        bicgstab(apply_shifted_laplacian, None, &b, &mut x2, 1e-12, 10_000, None);
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-9);
        }
    }
}
