//! `sigma_k` as a function of a symmetric matrix.
//!
//! `F(A) = sigma_k(eigenvalues(A))` is a polynomial in the entries of `A`
//! (trace, the 2x2 principal minor sum, ..., determinant), so its gradient
//! is smooth everywhere, including at repeated eigenvalues. In an eigenbasis
//! `A = U diag(lambda) U^T` the gradient is
//!
//! ```text
//! dF = U diag( sigma_{k-1}(lambda | p) ) U^T
//! ```
//!
//! and the second derivative contracted twice against a symmetric direction
//! `B` (with `Bt = U^T B U`) is
//!
//! ```text
//! d2F[B, B] = sum_{p != q} sigma_{k-2}(lambda | pq) (Bt_pp Bt_qq - Bt_pq^2)
//! ```
//!
//! Both formulas stay finite at eigenvalue collisions; the only hazard is an
//! ill-conditioned eigenbasis, which the gradient path sidesteps with a
//! symmetric perturbation stencil when the spectrum is nearly degenerate.

use nalgebra::DMatrix;

use crate::{Error, Result};

use super::{elementary_all, sigma_raw_minor};

/// Per-entry asymmetry tolerance for accepting a matrix as symmetric,
/// relative to `max(1, max |a_ij|)`.
pub const SYMMETRY_TOL: f64 = 1e-14;

/// Relative eigenvalue gap below which the gradient switches to the
/// perturbation-stencil evaluation.
const EIGEN_GAP_FLOOR: f64 = 1e-8;

/// Size of the symmetric eigenvalue perturbation used on nearly degenerate
/// spectra, relative to the matrix scale.
const GAP_STENCIL_STEP: f64 = 1e-7;

/// Symmetric matrix argument, validated and exactly symmetrized on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() < 2 {
            return Err(Error::Domain(format!(
                "symmetric matrix needs square dimension >= 2, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite matrix entry".into()));
        }
        let scale = m.iter().fold(0.0_f64, |a, &v| a.max(v.abs())).max(1.0);
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Domain(format!(
                        "matrix not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        // Kill the sub-tolerance asymmetry so downstream algebra sees an
        // exactly symmetric operand.
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { m: sym })
    }

    /// Builds from a row-major slice of length `n * n`.
    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }
}

/// Eigenvalues sorted descending with matching eigenvector columns.
fn sorted_eigen(a: &SymMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let eig = a.m.clone().symmetric_eigen();
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `sigma_{k-1}` minors of `values` in slot order, the eigenbasis gradient
/// diagonal.
fn grad_diag(values: &[f64], k: usize) -> Vec<f64> {
    let n = values.len();
    let mut g = vec![0.0; n];
    if k >= 1 {
        for p in 0..n {
            g[p] = sigma_raw_minor(values, k - 1, p);
        }
    }
    g
}

/// Gradient of `A -> sigma_k(eigenvalues(A))` with respect to the matrix
/// entries, returned as a symmetric matrix in the ambient basis.
///
/// When the smallest eigenvalue gap falls below `1e-8` times the matrix
/// scale, the diagonal is evaluated at `lambda +- step * stencil` for a
/// fixed decreasing stencil and the two rotated gradients are averaged;
/// the result is then independent of how the eigensolver resolved the
/// degenerate subspace.
pub fn sigma_grad_matrix(a: &SymMatrix, k: usize) -> Result<SymMatrix> {
    let n = a.dim();
    if k > n {
        return Err(Error::Domain(format!("sigma_{k} undefined for dimension {n}")));
    }
    let (values, vectors) = sorted_eigen(a);
    let scale = values.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs())).max(1.0);
    let min_gap = values
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(f64::INFINITY, f64::min);

    let diag = if min_gap < EIGEN_GAP_FLOOR * scale {
        let step = GAP_STENCIL_STEP * scale;
        let plus: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| v + step * (n - i) as f64)
            .collect();
        let minus: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| v - step * (n - i) as f64)
            .collect();
        let gp = grad_diag(&plus, k);
        let gm = grad_diag(&minus, k);
        gp.iter().zip(&gm).map(|(a, b)| 0.5 * (a + b)).collect()
    } else {
        grad_diag(&values, k)
    };

    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
    let grad = &vectors * d * vectors.transpose();
    // Roundoff in the rotation can leave ~1e-16 asymmetry; symmetrize before
    // revalidating.
    SymMatrix::new((&grad + grad.transpose()) * 0.5)
}

/// Second derivative of `A -> sigma_k(eigenvalues(A))` contracted twice
/// against the symmetric direction `B`, i.e. `d^2/dt^2 sigma_k(A + tB)` at
/// `t = 0`.
pub fn sigma_hessian_form(a: &SymMatrix, k: usize, b: &SymMatrix) -> Result<f64> {
    let n = a.dim();
    if k > n {
        return Err(Error::Domain(format!("sigma_{k} undefined for dimension {n}")));
    }
    if b.dim() != n {
        return Err(Error::Domain(format!(
            "direction dimension {} does not match matrix dimension {n}",
            b.dim()
        )));
    }
    if k < 2 {
        return Ok(0.0);
    }
    let (values, vectors) = sorted_eigen(a);
    let bt = vectors.transpose() * b.as_matrix() * &vectors;
    let mut total = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let minor: Vec<f64> = values
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != p && *i != q)
                .map(|(_, &v)| v)
                .collect();
            let m = elementary_all(&minor, k - 2)[k - 2];
            total += 2.0 * m * (bt[(p, p)] * bt[(q, q)] - bt[(p, q)] * bt[(q, p)]);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(SymMatrix::new(m).is_err());
    }

    #[test]
    fn gradient_of_trace_is_identity() {
        let a = SymMatrix::from_row_slice(3, &[2.0, 1.0, 0.0, 1.0, -1.0, 0.5, 0.0, 0.5, 3.0])
            .unwrap();
        let g = sigma_grad_matrix(&a, 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-12, "({i}, {j})");
            }
        }
    }

    #[test]
    fn gradient_of_determinant_is_adjugate() {
        // 2x2: d det / dA = [[d, -c], [-b, a]] for A = [[a, b], [c, d]].
        let a = SymMatrix::from_row_slice(2, &[3.0, 1.0, 1.0, 2.0]).unwrap();
        let g = sigma_grad_matrix(&a, 2).unwrap();
        assert!((g.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((g.get(1, 1) - 3.0).abs() < 1e-12);
        assert!((g.get(0, 1) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_takes_stencil_path_and_stays_exact() {
        // The identity has a fully degenerate spectrum; the gradient of
        // sigma_2 at diag(1, 1, 1) is 2 * I regardless of the eigenbasis.
        let a = SymMatrix::from_row_slice(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
            .unwrap();
        let g = sigma_grad_matrix(&a, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-9, "({i}, {j}): {}", g.get(i, j));
            }
        }
    }

    #[test]
    fn hessian_form_vanishes_for_k_below_two() {
        let a = SymMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let b = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(sigma_hessian_form(&a, 1, &b).unwrap(), 0.0);
    }

    #[test]
    fn hessian_form_matches_hand_value() {
        // A = diag(3, 2, 1), k = 2, B = I: d2/dt2 sigma_2(A + tI) = 2 * sigma_0-pairs
        // = 2 * 3 = 6 (three unordered pairs, each contributing 2).
        let a = SymMatrix::from_row_slice(3, &[3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0])
            .unwrap();
        let b = SymMatrix::from_row_slice(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])
            .unwrap();
        assert!((sigma_hessian_form(&a, 2, &b).unwrap() - 6.0).abs() < 1e-12);
    }
}
