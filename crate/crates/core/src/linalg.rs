//! Dense factorizations. Matrices are stored as nalgebra `DMatrix`; the SVD
//! and the nonsymmetric eigenvalue solve go through faer, whose SVD stays
//! accurate on nearly rank-deficient input where nalgebra 0.35's does not.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

/// Thin SVD with singular values sorted in decreasing order.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        return Svd {
            u: DMatrix::zeros(m, 0),
            s: DVector::zeros(0),
            v: DMatrix::zeros(n, 0),
        };
    }
    let d = to_faer(a).thin_svd().expect("SVD converges");
    let (u, v, s) = (d.U(), d.V(), d.S().column_vector());
    Svd {
        u: DMatrix::from_fn(m, k, |i, j| u[(i, j)]),
        s: DVector::from_fn(k, |i, _| s[i]),
        v: DMatrix::from_fn(n, k, |i, j| v[(i, j)]),
    }
}

impl Svd {
    /// Number of singular values above `rtol · σ_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let top = self.s.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&s| s > rtol * top).count()
    }

    /// Minimum-norm least-squares solution restricted to the numerical range.
    pub fn solve(&self, b: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
        let k = self.rank(rtol);
        let mut x = DMatrix::zeros(self.v.nrows(), b.ncols());
        for i in 0..k {
            let ui = self.u.column(i);
            let vi = self.v.column(i);
            for c in 0..b.ncols() {
                let coef = ui.dot(&b.column(c)) / self.s[i];
                x.column_mut(c).axpy(coef, &vi, 1.0);
            }
        }
        x
    }
}

/// Truncated-SVD least squares for a single right-hand side.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rtol: f64) -> (DVector<f64>, usize) {
    let d = svd(a);
    let x = d.solve(&DMatrix::from_column_slice(b.len(), 1, b.as_slice()), rtol);
    (x.column(0).into_owned(), d.rank(rtol))
}

/// Truncated Moore–Penrose pseudo-inverse.
pub(crate) fn pinv(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let d = svd(a);
    let k = d.rank(rtol);
    let mut p = DMatrix::zeros(a.ncols(), a.nrows());
    for i in 0..k {
        p += d.v.column(i) * d.u.column(i).transpose() / d.s[i];
    }
    p
}

/// Eigenvalues (re, im) of a square real matrix.
pub(crate) fn eigenvalues(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    to_faer(a)
        .eigenvalues()
        .expect("eigenvalue iteration converges")
        .into_iter()
        .map(|z| (z.re, z.im))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 2.0, 4.0]);
        let (x, rank) = lstsq(&a, &b, 1e-12);
        assert_eq!(rank, 2);
        let normal = (a.transpose() * &a).lu().solve(&(a.transpose() * &b)).unwrap();
        assert!((x - normal).norm() < 1e-12);
    }

    #[test]
    fn pinv_of_rank_deficient() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let p = pinv(&a, 1e-12);
        assert!((&a * &p * &a - &a).norm() < 1e-12);
        assert!((p[(0, 0)] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_nearly_singular() {
        for (m, n) in [(41, 2), (5, 5), (168, 48), (7, 3), (3, 7)] {
            let a = DMatrix::from_fn(m, n, |i, j| {
                ((i * 7 + j * 13) as f64 * 0.37).sin() + if j == 1 { 1e-11 * i as f64 } else { 0.0 }
            });
            let d = svd(&a);
            let rec = &d.u * DMatrix::from_diagonal(&d.s) * d.v.transpose();
            assert!((rec - &a).amax() < 1e-12, "{m}x{n}");
            assert!(d.s.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eigenvalues_of_rotation_and_diagonal() {
        let r = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let mut ev = eigenvalues(&r);
        ev.sort_by(|a, b| a.1.total_cmp(&b.1));
        assert!((ev[0].1 + 1.0).abs() < 1e-14 && ev[0].0.abs() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -2.0]));
        let mut ev: Vec<f64> = eigenvalues(&d).into_iter().map(|z| z.0).collect();
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, vec![-2.0, 3.0]);
    }
}
