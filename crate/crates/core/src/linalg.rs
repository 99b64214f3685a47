//! Dense linear algebra for small symmetric systems.
//!
//! Everything here operates on row-major `Vec<f64>` buffers. Sizes are tiny
//! (Krylov subspaces of a few dozen, Gaussian-process Gram matrices of a few
//! hundred), so simplicity and determinism beat asymptotics.

/// Eigendecomposition of a real symmetric matrix.
pub struct SymEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, row-major `n×n`; column `j` belongs to `values[j]`.
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi eigensolver for a real symmetric `n×n` matrix (row-major).
///
/// Rotations are applied in a fixed sweep order, so the result is bit-stable
/// across runs. Panics if `a` is not `n×n`.
pub fn jacobi_eigh(a: &[f64], n: usize) -> SymEigen {
    assert_eq!(a.len(), n * n, "matrix size mismatch");
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new_col] = v[k * n + old_col];
        }
    }
    SymEigen { values, vectors }
}

/// Cholesky factorization `A = L·Lᵀ` of a symmetric positive-definite matrix.
///
/// Returns the lower factor (row-major), or `None` when a pivot is not
/// strictly positive — the caller is expected to add jitter and retry.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n, "matrix size mismatch");
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve `L·Lᵀ·x = b` given the lower Cholesky factor.
pub fn cho_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    assert_eq!(b.len(), n, "rhs size mismatch");
    // Forward substitution: L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    // Back substitution: Lᵀ x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

/// Solve `L·y = b` (forward substitution only), for log-determinant-free
/// whitening in the GP predictive variance.
pub fn solve_lower(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reproduces_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let e = jacobi_eigh(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_orthonormal_and_reconstructs() {
        // Deterministic symmetric test matrix.
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let x = ((i * 7 + j * 3) % 11) as f64 / 11.0;
                a[i * n + j] += x;
                a[j * n + i] += x;
            }
        }
        let e = jacobi_eigh(&a, n);
        // Check A·v = λ·v columnwise.
        for c in 0..n {
            for r in 0..n {
                let av: f64 = (0..n).map(|k| a[r * n + k] * e.vectors[k * n + c]).sum();
                assert!(
                    (av - e.values[c] * e.vectors[r * n + c]).abs() < 1e-9,
                    "eigenpair {c} violated at row {r}"
                );
            }
        }
    }

    #[test]
    fn cholesky_solves() {
        // A = Bᵀ·B + I is SPD for any B.
        let n = 4;
        let b = [
            1.0, 2.0, 0.5, -1.0, 0.0, 1.0, 3.0, 0.2, -0.5, 0.7, 1.0, 0.0, 2.0, -0.3, 0.1, 1.0,
        ];
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[k * n + i] * b[k * n + j]).sum::<f64>();
            }
            a[i * n + i] += 1.0;
        }
        let l = cholesky(&a, n).expect("SPD");
        let rhs = [1.0, -2.0, 0.5, 3.0];
        let x = cho_solve(&l, n, &rhs);
        for i in 0..n {
            let ax: f64 = (0..n).map(|k| a[i * n + k] * x[k]).sum();
            assert!((ax - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
