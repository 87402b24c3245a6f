//! Small dense linear-algebra helpers shared by the solver modules.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // f64 math via the trait in no_std builds
use num_traits::Float;

use crate::error::{Error, Result};

/// Eigendecomposition of a symmetric matrix with eigenvalues ascending and
/// a deterministic sign convention (largest-magnitude component of each
/// eigenvector is positive).
pub fn sym_eigen_ascending(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("finite eigenvalues")
    });
    let mut values = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        values.push(eig.eigenvalues[idx]);
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        let lead = v
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.abs().partial_cmp(&y.abs()).expect("finite"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

/// Thomas algorithm for a scalar tridiagonal system. `sub` and `sup` have
/// length `n - 1`. No pivoting; intended for the diagonally dominant
/// radial systems of the annulus solver.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < 1e-300 {
        return Err(Error::Unsupported("singular tridiagonal system".into()));
    }
    c[0] = if n > 1 { sup[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if denom.abs() < 1e-300 {
            return Err(Error::Unsupported("singular tridiagonal system".into()));
        }
        if i < n - 1 {
            c[i] = sup[i] / denom;
        }
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Factorization of a symmetric block-tridiagonal matrix
/// `[D_0 E_0; E_0ᵀ D_1 E_1; ...]` by block elimination. The lower blocks
/// are the transposes of the upper blocks, as produced by a symmetric
/// Hessian.
pub struct BlockTridiag {
    pivots: Vec<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    uppers: Vec<DMatrix<f64>>,
    /// Reciprocal-condition estimate `σ_min / σ_max` from a short inverse
    /// power iteration; used to flag conjugate points. The raw block
    /// pivots alone miss near-singular directions, the smallest
    /// eigenvalue spreads multiplicatively across them.
    pub rcond_estimate: f64,
    block_size: usize,
}

impl BlockTridiag {
    /// Factor the matrix given its diagonal and upper blocks. Fails only
    /// if an exactly singular pivot block is met.
    pub fn factor(diag: Vec<DMatrix<f64>>, uppers: Vec<DMatrix<f64>>) -> Result<BlockTridiag> {
        let nb = diag.len();
        assert_eq!(uppers.len() + 1, nb.max(1), "block count mismatch");
        let block_size = diag[0].nrows();
        let mut pivots = Vec::with_capacity(nb);
        let mut gains = Vec::with_capacity(uppers.len());
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        let mut s = diag[0].clone();
        for k in 0..nb {
            if k > 0 {
                // S_k = D_k - E_{k-1}ᵀ S_{k-1}^{-1} E_{k-1}
                let g = &gains[k - 1];
                s = &diag[k] - uppers[k - 1].transpose() * g;
            }
            let lu = s.clone().lu();
            for i in 0..block_size {
                let p = lu.u()[(i, i)].abs();
                min_pivot = min_pivot.min(p);
                max_pivot = max_pivot.max(p);
            }
            if k < uppers.len() {
                let g = lu
                    .solve(&uppers[k])
                    .ok_or(Error::ConjugatePoint { rcond: 0.0 })?;
                gains.push(g);
            }
            pivots.push(lu);
        }
        let _ = min_pivot;
        let mut bt = BlockTridiag {
            pivots,
            uppers,
            rcond_estimate: 0.0,
            block_size,
        };
        // σ_max is bounded below by the largest pivot; σ_min is estimated
        // by two steps of inverse power iteration from a fixed
        // deterministic start vector.
        let mut v: Vec<DVector<f64>> = (0..nb)
            .map(|k| {
                DVector::from_iterator(
                    block_size,
                    (0..block_size).map(|i| ((k * block_size + i + 1) as f64).sin()),
                )
            })
            .collect();
        let mut sigma_min_inv = 0.0f64;
        for _ in 0..2 {
            let norm: f64 = v.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
            if norm == 0.0 {
                break;
            }
            for b in v.iter_mut() {
                *b /= norm;
            }
            match bt.solve_vec(&v) {
                Ok(y) => {
                    sigma_min_inv = y.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
                    v = y;
                }
                Err(_) => {
                    sigma_min_inv = f64::INFINITY;
                    break;
                }
            }
        }
        bt.rcond_estimate = if sigma_min_inv > 0.0 && max_pivot > 0.0 {
            1.0 / (sigma_min_inv * max_pivot)
        } else {
            0.0
        };
        Ok(bt)
    }

    pub fn n_blocks(&self) -> usize {
        self.pivots.len()
    }

    /// Solve for a block vector right-hand side.
    pub fn solve_vec(&self, rhs: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
        let nb = self.n_blocks();
        let mut y: Vec<DVector<f64>> = Vec::with_capacity(nb);
        for k in 0..nb {
            let mut b = rhs[k].clone();
            if k > 0 {
                let z = self.pivots[k - 1]
                    .solve(&y[k - 1])
                    .ok_or(Error::ConjugatePoint { rcond: 0.0 })?;
                b -= self.uppers[k - 1].transpose() * z;
            }
            y.push(b);
        }
        let mut x = vec![DVector::zeros(self.block_size); nb];
        for k in (0..nb).rev() {
            let mut b = y[k].clone();
            if k + 1 < nb {
                b -= &self.uppers[k] * &x[k + 1];
            }
            x[k] = self.pivots[k]
                .solve(&b)
                .ok_or(Error::ConjugatePoint { rcond: 0.0 })?;
        }
        Ok(x)
    }

    /// Block `(0, nb-1)` of the inverse: solve with the identity placed in
    /// the last block row of the right-hand side and read the first block.
    pub fn first_block_of_inverse_last_column(&self) -> Result<DMatrix<f64>> {
        let nb = self.n_blocks();
        let m = self.block_size;
        let mut y: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for k in 0..nb {
            let mut b = if k == nb - 1 {
                DMatrix::identity(m, m)
            } else {
                DMatrix::zeros(m, m)
            };
            if k > 0 {
                let z = self.pivots[k - 1]
                    .solve(&y[k - 1])
                    .ok_or(Error::ConjugatePoint { rcond: 0.0 })?;
                b -= self.uppers[k - 1].transpose() * z;
            }
            y.push(b);
        }
        let mut x = vec![DMatrix::zeros(m, m); nb];
        for k in (0..nb).rev() {
            let mut b = y[k].clone();
            if k + 1 < nb {
                b -= &self.uppers[k] * &x[k + 1];
            }
            x[k] = self.pivots[k]
                .solve(&b)
                .ok_or(Error::ConjugatePoint { rcond: 0.0 })?;
        }
        Ok(x.swap_remove(0))
    }
}
