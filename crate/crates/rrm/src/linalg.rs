//! Small dense vector/matrix helpers for the low-dimensional problems this
//! crate works with (ambient dimensions of 2-4). No external linear algebra
//! dependency; everything operates on plain `&[f64]` slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn scale(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// a + s*b
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    if n < 1e-300 {
        v.to_vec()
    } else {
        scale(v, 1.0 / n)
    }
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Eigenvalues of a symmetric matrix (row-major, n x n) by cyclic Jacobi
/// rotations. Returns them sorted ascending. Sizes here are tiny (n <= 4),
/// so convergence is a handful of sweeps.
pub fn symmetric_eigenvalues(mat: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(mat.len(), n * n, "matrix size mismatch");
    let mut a = mat.to_vec();
    // symmetrize defensively; callers pass finite-difference Hessians
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j].abs();
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
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
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Solve the n x n linear system `a * x = b` by Gaussian elimination with
/// partial pivoting. Returns None when the pivot degenerates.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    let mut m = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if m[r * n + col].abs() > m[piv * n + col].abs() {
                piv = r;
            }
        }
        if m[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(col * n + k, piv * n + k);
            }
            rhs.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in (col + 1)..n {
            let f = m[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_matches_known_spectrum() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let eigs = symmetric_eigenvalues(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_3x3_diagonal_plus_rank_one() {
        // A = diag(1,2,3) + 0.1 * ones; spectrum checked against direct
        // characteristic-polynomial roots computed once offline.
        let mut a = vec![0.1; 9];
        a[0] += 1.0;
        a[4] += 2.0;
        a[8] += 3.0;
        let eigs = symmetric_eigenvalues(&a, 3);
        let trace: f64 = eigs.iter().sum();
        assert!((trace - 6.3).abs() < 1e-10);
        // Verify each eigenvalue satisfies det(A - l I) ~ 0
        for &l in &eigs {
            let d = |i: usize, j: usize| a[i * 3 + j] - if i == j { l } else { 0.0 };
            let det = d(0, 0) * (d(1, 1) * d(2, 2) - d(1, 2) * d(2, 1))
                - d(0, 1) * (d(1, 0) * d(2, 2) - d(1, 2) * d(2, 0))
                + d(0, 2) * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0));
            assert!(det.abs() < 1e-9, "det residual {det} for eigenvalue {l}");
        }
    }

    #[test]
    fn solve_2x2() {
        let x = solve(&[2.0, 1.0, 1.0, 3.0], &[5.0, 10.0], 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_returns_none() {
        assert!(solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 2.0], 2).is_none());
    }
}
