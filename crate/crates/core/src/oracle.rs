//! One-dimensional reference for a single charge at the centre of a spherical
//! molecule, where the harmonic component is constant and the regular
//! component depends on the radius only.

use crate::model::{Coefficients, Nonlinearity};
use crate::solvers::NewtonConfig;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("radial grid with {0} intervals is too coarse")]
    GridTooCoarse(usize),
    #[error("invalid radial problem: {0}")]
    InvalidInput(String),
    #[error("radial Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonFailure { iterations: usize, residual: f64 },
}

/// Radial profile of the regular component and the goal value.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSolution {
    pub radii: Vec<f64>,
    /// Regular component at each radius.
    pub regular: Vec<f64>,
    /// Constant harmonic component inside the molecule.
    pub harmonic: f64,
    /// `q * (u_h + u_r)(0)`.
    pub qoi: f64,
}

/// Conservative finite-volume discretisation of
/// `-(1/r^2)(eps r^2 u')' + kappa_sq N(u) = 0` on `[0, r_outer]` with the
/// interface flux jump at `r_m`, symmetry at the origin and screened
/// Coulomb data at `r_outer`. The grid places a node exactly at `r_m`.
pub fn solve_radial(
    r_m: f64,
    r_outer: f64,
    coeffs: &Coefficients,
    q: f64,
    intervals: usize,
    nonlinearity: Nonlinearity,
) -> Result<RadialSolution, OracleError> {
    if !(r_m > 0.0) || !(r_outer > r_m) {
        return Err(OracleError::InvalidInput("need 0 < r_m < r_outer".into()));
    }
    coeffs.validate().map_err(|e| OracleError::InvalidInput(e.to_string()))?;
    if intervals < 16 {
        return Err(OracleError::GridTooCoarse(intervals));
    }
    let n_in = ((intervals as f64 * r_m / r_outer).round() as usize).clamp(2, intervals - 2);
    let n_out = intervals - n_in;
    let mut radii: Vec<f64> = (0..=n_in).map(|i| r_m * i as f64 / n_in as f64).collect();
    radii[n_in] = r_m;
    radii.extend((1..=n_out).map(|i| r_m + (r_outer - r_m) * i as f64 / n_out as f64));
    radii[intervals] = r_outer;

    let c = coeffs.charge_scale;
    let k = coeffs.screening_length_inverse();
    let g_outer = c * q * (-k * r_outer).exp() / (coeffs.eps_s * r_outer);
    let n = intervals + 1;

    // Per-interval diffusion weights eps * int r^2 dr / h^2.
    let diff: Vec<f64> = (0..intervals)
        .map(|e| {
            let (a, b) = (radii[e], radii[e + 1]);
            let eps = if e < n_in { coeffs.eps_m } else { coeffs.eps_s };
            eps * (b.powi(3) - a.powi(3)) / (3.0 * (b - a).powi(2))
        })
        .collect();
    let gauss = [
        (0.5 - 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + 0.5 * (0.6f64).sqrt(), 5.0 / 18.0),
    ];
    let clamp = NewtonConfig::default().clamp_bound;
    let nl = |u: f64| match nonlinearity {
        Nonlinearity::Linearized => (u, 1.0),
        Nonlinearity::Nonlinear => {
            let v = u.clamp(-clamp, clamp);
            (v.sinh(), v.cosh())
        }
    };

    // Residual and tridiagonal Jacobian (sub, diag, sup) of the free rows.
    let assemble = |u: &[f64]| {
        let mut f = vec![0.0; n];
        let (mut lo, mut di, mut up) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for e in 0..intervals {
            let (i, j) = (e, e + 1);
            let d = diff[e];
            f[i] += d * (u[i] - u[j]);
            f[j] += d * (u[j] - u[i]);
            di[i] += d;
            di[j] += d;
            up[i] -= d;
            lo[j] -= d;
            if e >= n_in && coeffs.kappa_sq > 0.0 {
                let (a, b) = (radii[i], radii[j]);
                let h = b - a;
                for (t, w) in gauss {
                    let r = a + t * h;
                    let phi = [1.0 - t, t];
                    let (val, der) = nl(phi[0] * u[i] + phi[1] * u[j]);
                    let s = coeffs.kappa_sq * w * h * r * r;
                    f[i] += s * val * phi[0];
                    f[j] += s * val * phi[1];
                    di[i] += s * der * phi[0] * phi[0];
                    di[j] += s * der * phi[1] * phi[1];
                    up[i] += s * der * phi[0] * phi[1];
                    lo[j] += s * der * phi[0] * phi[1];
                }
            }
        }
        f[n_in] -= c * q;
        f[n - 1] = 0.0;
        di[n - 1] = 1.0;
        lo[n - 1] = 0.0;
        up[n - 2] = 0.0;
        (f, lo, di, up)
    };

    let mut u = vec![0.0; n];
    u[n - 1] = g_outer;
    let cfg = NewtonConfig::default();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (mut f, mut lo, mut di, mut up) = assemble(&u);
    let mut fnorm = norm(&f);
    // Iterate to round-off; the Newton tolerance is the acceptance floor.
    let target = 1e-14 * fnorm;
    let floor = cfg.rel_tolerance * fnorm;
    let mut it = 0;
    while fnorm > target {
        if it == cfg.max_iterations {
            return Err(OracleError::NewtonFailure { iterations: it, residual: fnorm });
        }
        it += 1;
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = thomas(&lo, &di, &up, &rhs);
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let next = assemble(&trial);
            let tn = norm(&next.0);
            if tn < fnorm {
                u = trial;
                (f, lo, di, up) = next;
                fnorm = tn;
                break;
            }
            step *= 0.5;
            if step < cfg.min_step {
                if fnorm <= floor {
                    return Ok(finish(radii, u, c, q, coeffs, r_m));
                }
                return Err(OracleError::NewtonFailure { iterations: it, residual: fnorm });
            }
        }
    }
    Ok(finish(radii, u, c, q, coeffs, r_m))
}

fn finish(radii: Vec<f64>, u: Vec<f64>, c: f64, q: f64, coeffs: &Coefficients, r_m: f64) -> RadialSolution {
    let harmonic = -c * q / (coeffs.eps_m * r_m);
    let qoi = q * (harmonic + u[0]);
    RadialSolution { radii, regular: u, harmonic, qoi }
}

fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = up[0] / di[0];
    d[0] = rhs[0] / di[0];
    for i in 1..n {
        let m = di[i] - lo[i] * c[i - 1];
        c[i] = if i + 1 < n { up[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lo[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Exact goal value of the linearised single-ion problem on the truncated
/// domain: constant regular component inside, `(B e^{-kr} + D e^{kr}) / r`
/// in the solvent with `k = sqrt(kappa_sq / eps_s)`.
pub fn born_linear_closed_form(r_m: f64, coeffs: &Coefficients, q: f64, r_outer: f64) -> f64 {
    let c = coeffs.charge_scale;
    let k = coeffs.screening_length_inverse();
    let cq = c * q;
    let inside = if k * r_outer < 1e-12 {
        cq / (coeffs.eps_s * r_m)
    } else {
        // Unknowns B, D from the outer Dirichlet value and the interface flux
        // u'(r_m+) = -C q / (eps_s r_m^2).
        let (em, ep) = ((-k * r_outer).exp(), (k * r_outer).exp());
        let (am, ap) = ((-k * r_m).exp(), (k * r_m).exp());
        let a11 = em;
        let a12 = ep;
        let b1 = cq * em / coeffs.eps_s;
        let a21 = (-k * am) / r_m - am / (r_m * r_m);
        let a22 = (k * ap) / r_m - ap / (r_m * r_m);
        let b2 = -cq / (coeffs.eps_s * r_m * r_m);
        let det = a11 * a22 - a12 * a21;
        let bb = (b1 * a22 - a12 * b2) / det;
        let dd = (a11 * b2 - a21 * b1) / det;
        (bb * am + dd * ap) / r_m
    };
    q * (inside - cq / (coeffs.eps_m * r_m))
}

/// Infinite-domain, salt-free limit `q^2 C (1/eps_s - 1/eps_m) / r_m`.
pub fn born_energy_limit(r_m: f64, coeffs: &Coefficients, q: f64) -> f64 {
    q * q * coeffs.charge_scale * (1.0 / coeffs.eps_s - 1.0 / coeffs.eps_m) / r_m
}
