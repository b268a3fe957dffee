//! Linear solves for the Dirichlet systems `(D - W) x = b` that show up in
//! absorbing-chain computations. The matrices are symmetric and, whenever
//! every component can leak mass, positive definite.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Systems up to this size are solved by dense LU, larger ones by
/// Jacobi-preconditioned conjugate gradients.
pub const DENSE_LIMIT: usize = 500;
const CG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SparseSymmetric {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSymmetric {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![Vec::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds `value` at `(r, c)`; callers add the mirrored entry themselves.
    pub fn add(&mut self, r: usize, c: usize, value: f64) {
        match self.rows[r].iter_mut().find(|(k, _)| *k == c) {
            Some(entry) => entry.1 += value,
            None => self.rows[r].push((c, value)),
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, row) in self.rows.iter().enumerate() {
            out[r] = row.iter().map(|&(c, a)| a * x[c]).sum();
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| row.iter().filter(|(c, _)| *c == r).map(|(_, a)| a).sum())
            .collect()
    }

    fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, a) in row {
                m[(r, c)] += a;
            }
        }
        m
    }

    /// Solves `A x = b` for every right-hand side in `rhs`.
    pub fn solve(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        if self.is_empty() {
            return Ok(rhs.iter().map(|_| Vec::new()).collect());
        }
        if self.len() <= DENSE_LIMIT {
            self.solve_dense(rhs)
        } else {
            rhs.iter().map(|b| self.solve_cg(b)).collect()
        }
    }

    fn solve_dense(&self, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let lu = self.dense().lu();
        let scale = self
            .rows
            .iter()
            .flatten()
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max);
        let det_ok = lu
            .u()
            .diagonal()
            .iter()
            .all(|d| d.abs() > 1e-13 * scale.max(1.0));
        if !det_ok {
            return Err(Error::SingularSystem(
                "matrix is numerically singular".into(),
            ));
        }
        rhs.iter()
            .map(|b| {
                lu.solve(&DVector::from_column_slice(b))
                    .map(|x| x.iter().copied().collect())
                    .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))
            })
            .collect()
    }

    fn solve_cg(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let diag = self.diagonal();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::SingularSystem("non-positive diagonal".into()));
        }
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let max_iter = 20 * n + 1000;
        for _ in 0..max_iter {
            self.mul(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(Error::SingularSystem(
                    "matrix is not positive definite".into(),
                ));
            }
            let alpha = rz / pap;
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= CG_TOLERANCE * b_norm {
                return Ok(x);
            }
            for k in 0..n {
                z[k] = r[k] / diag[k];
            }
            let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_next / rz;
            rz = rz_next;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
        }
        Err(Error::NonConvergence {
            what: "conjugate gradient",
            iterations: max_iter,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseSymmetric {
        // Dirichlet Laplacian of a path with both ends tied to ground.
        let mut a = SparseSymmetric::new(n);
        for k in 0..n {
            a.add(k, k, 2.0);
            if k + 1 < n {
                a.add(k, k + 1, -1.0);
                a.add(k + 1, k, -1.0);
            }
        }
        a
    }

    #[test]
    fn dense_and_iterative_agree() {
        let n = DENSE_LIMIT + 20;
        let a = path_laplacian(n);
        let b: Vec<f64> = (0..n).map(|k| ((k * 7) % 5) as f64 - 2.0).collect();
        let cg = a.solve_cg(&b).unwrap();
        let dense = a.solve_dense(std::slice::from_ref(&b)).unwrap().remove(0);
        let err = cg
            .iter()
            .zip(&dense)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "max deviation {err}");
    }

    #[test]
    fn singular_is_rejected() {
        let mut a = SparseSymmetric::new(2);
        a.add(0, 0, 1.0);
        a.add(0, 1, -1.0);
        a.add(1, 0, -1.0);
        a.add(1, 1, 1.0);
        assert!(matches!(
            a.solve(&[vec![1.0, 0.0]]),
            Err(Error::SingularSystem(_))
        ));
    }
}
