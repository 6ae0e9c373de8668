//! Jacobi-preconditioned conjugate gradient on sparse symmetric matrices.

use crate::error::SolverError;

/// Symmetric matrix in CSR form, both triangles stored.
#[derive(Clone, Debug)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from per-row `(column, value)` lists. Entries on the diagonal
    /// are summed into the diagonal.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = vec![0.0; n];
        row_ptr.push(0);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row {
                if i == j {
                    diag[i] += v;
                }
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseSymmetric {
            n,
            row_ptr,
            cols,
            vals,
            diag,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// `b − A·x`.
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut ax = vec![0.0; self.n];
        self.matvec(x, &mut ax);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }

    /// `max_i |r_i| / A_ii`.
    pub fn scaled_residual_norm(&self, r: &[f64]) -> f64 {
        r.iter()
            .zip(&self.diag)
            .map(|(ri, di)| ri.abs() / di)
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Stop once `max_i |r_i| / A_ii` falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Recompute the true residual every this many iterations.
    pub replace_every: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            tolerance: 1e-12,
            max_iterations: 100_000,
            replace_every: 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Jacobi-scaled max-norm of the true final residual.
    pub scaled_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`.
pub fn pcg_jacobi(a: &SparseSymmetric, b: &[f64], options: CgOptions) -> Result<CgOutcome, SolverError> {
    let n = a.dim();
    if let Some(i) = a.diagonal().iter().position(|&d| !(d > 0.0)) {
        return Err(SolverError::NonPositiveDiagonal(i));
    }
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| d.recip()).collect();
    // Jacobi initial guess
    let mut x: Vec<f64> = b.iter().zip(&inv_diag).map(|(bi, di)| bi * di).collect();
    let mut r = a.residual(&x, b);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let scaled = a.scaled_residual_norm(&r);
        if scaled <= options.tolerance || rz == 0.0 {
            let true_scaled = a.scaled_residual_norm(&a.residual(&x, b));
            if true_scaled <= options.tolerance {
                return Ok(CgOutcome {
                    solution: x,
                    iterations,
                    scaled_residual: true_scaled,
                });
            }
        }
        if iterations >= options.max_iterations {
            return Err(SolverError::NotConverged {
                iterations,
                residual: a.scaled_residual_norm(&a.residual(&x, b)),
            });
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolverError::NotConverged {
                iterations,
                residual: scaled,
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        iterations += 1;
        if iterations % options.replace_every == 0 {
            r = a.residual(&x, b);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_tridiagonal() {
        // 2u0 − u1 = 1, −u0 + 3u1 = 1
        let a = SparseSymmetric::from_rows(vec![vec![(0, 2.0), (1, -1.0)], vec![(0, -1.0), (1, 3.0)]]);
        let out = pcg_jacobi(&a, &[1.0, 1.0], CgOptions::default()).unwrap();
        assert!((out.solution[0] - 0.8).abs() < 1e-14);
        assert!((out.solution[1] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_diagonal() {
        let a = SparseSymmetric::from_rows(vec![vec![(0, 0.0)]]);
        assert_eq!(
            pcg_jacobi(&a, &[1.0], CgOptions::default()).unwrap_err(),
            SolverError::NonPositiveDiagonal(0)
        );
    }

    #[test]
    fn reports_non_convergence() {
        let n = 200;
        let rows = (0..n)
            .map(|i| {
                let mut row = vec![(i, 2.0 + 1e-6)];
                if i > 0 {
                    row.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    row.push((i + 1, -1.0));
                }
                row
            })
            .collect();
        let a = SparseSymmetric::from_rows(rows);
        let opts = CgOptions {
            max_iterations: 3,
            ..CgOptions::default()
        };
        assert!(matches!(
            pcg_jacobi(&a, &vec![1.0; n], opts),
            Err(SolverError::NotConverged { iterations: 3, .. })
        ));
    }
}
