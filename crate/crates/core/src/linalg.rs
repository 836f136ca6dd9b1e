//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Determinant and inverse from one LU factorization. `None` when the matrix
/// is exactly singular.
pub fn det_inverse(a: &Mat) -> (f64, Option<Mat>) {
    let lu = a.clone().lu();
    let det = lu.determinant();
    (det, lu.try_inverse())
}

pub fn bilinear(g: &Mat, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        if u[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            s += u[i] * g[(i, j)] * v[j];
        }
    }
    s
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let r = norm(a);
    a.iter().map(|x| x / r).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| alpha * a + b).collect()
}

pub fn max_abs(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending.
/// Eigenvector signs are fixed so the largest-magnitude entry is positive,
/// which keeps frames reproducible.
pub fn sym_eigen_sorted(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut vecs = Mat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (col, &k) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[k]);
        let mut v = eig.eigenvectors.column(k).clone_owned();
        let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if big < 0.0 {
            v = -v;
        }
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

/// Counts (negative, positive) eigenvalues of a symmetric matrix.
pub fn inertia(a: &Mat) -> (usize, usize) {
    let (vals, _) = sym_eigen_sorted(a);
    let neg = vals.iter().filter(|&&x| x < 0.0).count();
    let pos = vals.iter().filter(|&&x| x > 0.0).count();
    (neg, pos)
}

/// Singular values of the matrix whose columns are `cols`.
pub fn singular_values(rows: usize, cols: &[Vec<f64>]) -> Vec<f64> {
    if cols.is_empty() {
        return Vec::new();
    }
    let m = Mat::from_fn(rows, cols.len(), |i, j| cols[j][i]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn rank(rows: usize, cols: &[Vec<f64>], tol: f64) -> usize {
    singular_values(rows, cols).iter().filter(|&&s| s > tol).count()
}

/// Euclidean orthonormal basis of the span of `vecs` (modified Gram-Schmidt
/// with one reorthogonalization pass; vectors below `tol` after projection
/// are dropped).
pub fn orthonormal_basis(vecs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let r = norm(&w);
        if r > tol * norm(v).max(1.0) {
            out.push(w.iter().map(|x| x / r).collect());
        }
    }
    out
}

/// Euclidean unit normal of the hyperplane spanned by the n-1 columns of
/// `t` (an n x (n-1) matrix), via cofactors. The sign varies smoothly with
/// `t`.
pub fn cross_normal(t: &Mat) -> Vec<f64> {
    let n = t.nrows();
    debug_assert_eq!(t.ncols() + 1, n);
    let mut nu = vec![0.0; n];
    for (i, slot) in nu.iter_mut().enumerate() {
        let minor = Mat::from_fn(n - 1, n - 1, |r, c| {
            let rr = if r < i { r } else { r + 1 };
            t[(rr, c)]
        });
        let sign = if (i + n - 1) % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * minor.determinant();
    }
    normalized(&nu)
}

pub fn solve(a: &Mat, b: &Vector) -> Option<Vector> {
    a.clone().lu().solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_normal_is_orthogonal() {
        let t = Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 2.0, -1.0]);
        let nu = cross_normal(&t);
        for c in 0..2 {
            let col: Vec<f64> = t.column(c).iter().copied().collect();
            assert!(dot(&nu, &col).abs() < 1e-14);
        }
        assert!((norm(&nu) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inertia_of_lorentz_form() {
        let g = Mat::from_diagonal(&Vector::from_vec(vec![-1.0, 2.0, 3.0]));
        assert_eq!(inertia(&g), (1, 2));
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let b = orthonormal_basis(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]], 1e-10);
        assert_eq!(b.len(), 2);
    }
}
