use super::SolverError;
use crate::fem::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
    SymmetricGaussSeidel,
}

impl Preconditioner {
    pub fn name(self) -> &'static str {
        match self {
            Preconditioner::None => "none",
            Preconditioner::Jacobi => "jacobi",
            Preconditioner::SymmetricGaussSeidel => "sgs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Preconditioner::None),
            "jacobi" => Some(Preconditioner::Jacobi),
            "sgs" | "symmetric_gauss_seidel" => Some(Preconditioner::SymmetricGaussSeidel),
            _ => None,
        }
    }
}

/// Stopping rule and preconditioner of the conjugate gradient solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Residual target relative to the right-hand side norm.
    pub rel_tolerance: f64,
    /// Absolute residual floor.
    pub abs_tolerance: f64,
    /// Iteration cap; ten times the system size when absent.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rel_tolerance: 1e-10,
            abs_tolerance: 1e-14,
            max_iterations: None,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    pub residual_norm: f64,
    pub target: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Precond<'a> {
    kind: Preconditioner,
    a: &'a SparseMatrix,
    inv_diag: Vec<f64>,
}

impl<'a> Precond<'a> {
    fn new(a: &'a SparseMatrix, kind: Preconditioner) -> Result<Self, SolverError> {
        let inv_diag = match kind {
            Preconditioner::None => Vec::new(),
            _ => a
                .diagonal()
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    if *d > 0.0 {
                        Ok(1.0 / d)
                    } else {
                        Err(SolverError::Breakdown(format!("non-positive diagonal {d:e} at row {i}")))
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(Precond { kind, a, inv_diag })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self.kind {
            Preconditioner::None => z.copy_from_slice(r),
            Preconditioner::Jacobi => {
                for i in 0..r.len() {
                    z[i] = r[i] * self.inv_diag[i];
                }
            }
            Preconditioner::SymmetricGaussSeidel => {
                let n = r.len();
                for i in 0..n {
                    let (cols, vals) = self.a.row(i);
                    let mut s = r[i];
                    for (c, v) in cols.iter().zip(vals) {
                        let j = *c as usize;
                        if j < i {
                            s -= v * z[j];
                        }
                    }
                    z[i] = s * self.inv_diag[i];
                }
                for i in (0..n).rev() {
                    let (cols, vals) = self.a.row(i);
                    let mut s = 0.0;
                    for (c, v) in cols.iter().zip(vals) {
                        let j = *c as usize;
                        if j > i {
                            s += v * z[j];
                        }
                    }
                    z[i] -= s * self.inv_diag[i];
                }
            }
        }
    }
}

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, CgReport), SolverError> {
    cg_solve_from(a, b, vec![0.0; b.len()], cfg)
}

/// Preconditioned conjugate gradients; stops when the true residual satisfies
/// `|b - A x| <= max(rel |b|, abs)`.
pub fn cg_solve_from(
    a: &SparseMatrix,
    b: &[f64],
    mut x: Vec<f64>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, CgReport), SolverError> {
    let n = b.len();
    assert_eq!(a.nrows(), n, "matrix and right-hand side sizes differ");
    assert_eq!(x.len(), n, "initial guess size differs");
    if b.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite("right-hand side".into()));
    }
    let target = (cfg.rel_tolerance * norm(b)).max(cfg.abs_tolerance);
    let max_it = cfg.max_iterations.unwrap_or(10 * n.max(1));
    let pc = Precond::new(a, cfg.preconditioner)?;

    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    a.mul_vec(&x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i];
    }
    let mut rnorm = norm(&r);
    if rnorm <= target {
        return Ok((x, CgReport { iterations: 0, residual_norm: rnorm, target }));
    }
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut it = 0;
    while it < max_it {
        it += 1;
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            if rz == 0.0 {
                break;
            }
            return Err(SolverError::Breakdown(format!("p^T A p = {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm(&r);
        if !rnorm.is_finite() {
            return Err(SolverError::NonFinite("residual".into()));
        }
        if rnorm <= target {
            // Confirm against the true residual; restart from it on drift.
            a.mul_vec(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
            rnorm = norm(&r);
            if rnorm <= target {
                return Ok((x, CgReport { iterations: it, residual_norm: rnorm, target }));
            }
            pc.apply(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    a.mul_vec(&x, &mut ap);
    let true_res = norm(&b.iter().zip(&ap).map(|(u, v)| u - v).collect::<Vec<_>>());
    if true_res <= target {
        return Ok((x, CgReport { iterations: it, residual_norm: true_res, target }));
    }
    Err(SolverError::NonConvergence { iterations: it, residual: true_res, target })
}
