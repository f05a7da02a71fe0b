//! Dense numeric linear algebra for the tiny matrices this crate works with
//! (up to 2n x 2n with n <= 4): solve, invert, determinant, and real
//! eigendecomposition via the characteristic polynomial.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinError {
    #[error("matrix is singular or nearly singular (pivot ratio {pivot_ratio:.3e})")]
    Singular { pivot_ratio: f64 },
    #[error("matrix has complex eigenvalues (characteristic discriminant {discriminant:.3e})")]
    ComplexEigenvalues { discriminant: f64 },
    #[error("matrix is defective: no full eigenbasis within tolerance (residual {residual:.3e})")]
    Defective { residual: f64 },
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Mat::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diag(entries: &[f64]) -> Mat {
        let n = entries.len();
        Mat::from_fn(n, n, |i, j| if i == j { entries[i] } else { 0.0 })
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| s * self[(i, j)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Solve `A X = B` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &Mat) -> Result<Mat, LinError> {
        let n = self.rows;
        if !self.is_square() || b.rows != n {
            return Err(LinError::Shape(format!(
                "solve expects square A and matching B, got {}x{} and {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let scale = 1.0 + self.max_abs();
        let mut a = self.clone();
        let mut x = b.clone();
        let mut max_piv: f64 = 0.0;
        let mut min_piv = f64::INFINITY;
        for col in 0..n {
            let (mut piv_row, mut piv_val) = (col, a[(col, col)].abs());
            for r in col + 1..n {
                if a[(r, col)].abs() > piv_val {
                    piv_row = r;
                    piv_val = a[(r, col)].abs();
                }
            }
            if piv_val <= 1e-12 * scale {
                let ratio = if min_piv.is_finite() && piv_val > 0.0 {
                    max_piv / piv_val
                } else {
                    f64::INFINITY
                };
                return Err(LinError::Singular { pivot_ratio: ratio });
            }
            if piv_row != col {
                a.swap_rows(col, piv_row);
                x.swap_rows(col, piv_row);
            }
            max_piv = max_piv.max(piv_val);
            min_piv = min_piv.min(piv_val);
            let d = a[(col, col)];
            for r in col + 1..n {
                let factor = a[(r, col)] / d;
                if factor == 0.0 {
                    continue;
                }
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= factor * v;
                }
                for c in 0..x.cols {
                    let v = x[(col, c)];
                    x[(r, c)] -= factor * v;
                }
            }
        }
        // back substitution
        for col in (0..n).rev() {
            let d = a[(col, col)];
            for c in 0..x.cols {
                let mut s = x[(col, c)];
                for k in col + 1..n {
                    s -= a[(col, k)] * x[(k, c)];
                }
                x[(col, c)] = s / d;
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Mat, LinError> {
        self.solve(&Mat::identity(self.rows))
    }

    /// Determinant via LU with partial pivoting; returns 0 for a matrix that
    /// eliminates to a vanishing pivot.
    pub fn det(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut sign = 1.0;
        let mut det = 1.0;
        for col in 0..n {
            let (mut piv_row, mut piv_val) = (col, a[(col, col)].abs());
            for r in col + 1..n {
                if a[(r, col)].abs() > piv_val {
                    piv_row = r;
                    piv_val = a[(r, col)].abs();
                }
            }
            if piv_val == 0.0 {
                return 0.0;
            }
            if piv_row != col {
                a.swap_rows(col, piv_row);
                sign = -sign;
            }
            det *= a[(col, col)];
            let d = a[(col, col)];
            for r in col + 1..n {
                let factor = a[(r, col)] / d;
                for c in col..n {
                    let v = a[(col, c)];
                    a[(r, c)] -= factor * v;
                }
            }
        }
        sign * det
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Coefficients of the characteristic polynomial
    /// `lambda^n + c[0] lambda^(n-1) + ... + c[n-1]`
    /// via the Faddeev-LeVerrier recursion.
    pub fn char_poly(&self) -> Vec<f64> {
        assert!(self.is_square());
        let n = self.rows;
        let mut coeffs = Vec::with_capacity(n);
        let mut m = self.clone();
        let mut c_prev;
        for k in 1..=n {
            c_prev = -m.trace() / k as f64;
            coeffs.push(c_prev);
            if k < n {
                let mut shifted = m.clone();
                for i in 0..n {
                    shifted[(i, i)] += c_prev;
                }
                m = self.mul(&shifted);
            }
        }
        coeffs
    }

    /// Real eigendecomposition for n <= 4.
    ///
    /// Eigenpairs come back sorted ascending by eigenvalue; eigenvectors have
    /// unit Euclidean length with the first nonzero component positive.
    /// `distinct` is false when two eigenvalues agree within a scale-aware
    /// 1e-9, in which case eigenvectors are a basis of the clustered
    /// eigenspace.
    pub fn eig_real(&self) -> Result<EigenDecomp, LinError> {
        assert!(self.is_square());
        let n = self.rows;
        assert!((1..=4).contains(&n), "eig_real supports 1 <= n <= 4");
        let scale = 1.0 + self.max_abs();
        let coeffs = self.char_poly();
        let mut roots = real_roots(&coeffs, scale)?;
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Newton polish on the characteristic polynomial.
        for r in roots.iter_mut() {
            for _ in 0..8 {
                let (p, dp) = horner(&coeffs, *r);
                if dp.abs() <= 1e-12 * scale.powi(n as i32 - 1) {
                    break;
                }
                let step = p / dp;
                if !step.is_finite() || step.abs() > scale {
                    break;
                }
                *r -= step;
                if step.abs() <= 1e-16 * (1.0 + r.abs()) {
                    break;
                }
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());

        // A numerically multiple root of the characteristic polynomial can
        // only be located to about sqrt(machine eps), so ties are clustered
        // well above that noise floor; the cluster mean recovers the root.
        let tie_tol = 1e-7 * scale;
        let mut distinct = true;
        let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && (roots[j] - roots[j - 1]).abs() <= tie_tol {
                j += 1;
            }
            let mult = j - i;
            if mult > 1 {
                distinct = false;
            }
            let lambda = roots[i..j].iter().sum::<f64>() / mult as f64;
            let mut shifted = self.clone();
            for d in 0..n {
                shifted[(d, d)] -= lambda;
            }
            let basis = nullspace(&shifted, 1e-7 * scale);
            if basis.len() < mult {
                let residual = basis.len() as f64;
                let _ = residual;
                return Err(LinError::Defective {
                    residual: shifted.max_abs(),
                });
            }
            for vec in basis.into_iter().take(mult) {
                pairs.push((lambda, vec));
            }
            i = j;
        }

        // Residual acceptance per returned pair.
        let mut worst = 0.0f64;
        for (lambda, v) in &pairs {
            let av = self.mul_vec(v);
            let res = av
                .iter()
                .zip(v.iter())
                .fold(0.0f64, |m, (a, x)| m.max((a - lambda * x).abs()));
            worst = worst.max(res);
        }
        if worst > 1e-8 * scale {
            return Err(LinError::Defective { residual: worst });
        }
        Ok(EigenDecomp { pairs, distinct })
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// `(eigenvalue, unit eigenvector)` sorted ascending by eigenvalue.
    pub pairs: Vec<(f64, Vec<f64>)>,
    /// False when some eigenvalues coincide within tolerance.
    pub distinct: bool,
}

impl EigenDecomp {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|(l, _)| *l).collect()
    }
}

fn horner(coeffs: &[f64], x: f64) -> (f64, f64) {
    // monic polynomial x^n + coeffs[0] x^(n-1) + ... + coeffs[n-1]
    let mut p = 1.0;
    let mut dp = 0.0;
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

fn real_roots(coeffs: &[f64], scale: f64) -> Result<Vec<f64>, LinError> {
    match coeffs.len() {
        1 => Ok(vec![-coeffs[0]]),
        2 => roots_quadratic(coeffs[0], coeffs[1], scale),
        3 => roots_cubic(coeffs[0], coeffs[1], coeffs[2], scale),
        4 => roots_quartic(coeffs[0], coeffs[1], coeffs[2], coeffs[3], scale),
        _ => unreachable!(),
    }
}

fn roots_quadratic(b: f64, c: f64, scale: f64) -> Result<Vec<f64>, LinError> {
    let disc = b * b - 4.0 * c;
    let tol = 1e-10 * scale * scale;
    if disc < -tol {
        return Err(LinError::ComplexEigenvalues { discriminant: disc });
    }
    let s = disc.max(0.0).sqrt();
    // Citardauq-style split avoids cancellation for the small root.
    if b >= 0.0 {
        let r1 = (-b - s) / 2.0;
        let r2 = if r1 != 0.0 { c / r1 } else { (-b + s) / 2.0 };
        Ok(vec![r1, r2])
    } else {
        let r1 = (-b + s) / 2.0;
        let r2 = if r1 != 0.0 { c / r1 } else { (-b - s) / 2.0 };
        Ok(vec![r1, r2])
    }
}

fn roots_cubic(a: f64, b: f64, c: f64, scale: f64) -> Result<Vec<f64>, LinError> {
    // depress: x = t - a/3  =>  t^3 + p t + q
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    let tol = 1e-9 * (1.0 + p.abs().powi(3) + q * q) * (1.0 + scale);
    if disc < -tol {
        return Err(LinError::ComplexEigenvalues { discriminant: disc });
    }
    let shift = -a / 3.0;
    if p >= -1e-300 {
        // disc >= -tol forces p ~ 0 and q ~ 0 here: (near) triple root
        return Ok(vec![shift, shift, shift]);
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let t = m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
        out.push(t + shift);
    }
    Ok(out)
}

fn roots_quartic(a: f64, b: f64, c: f64, d: f64, scale: f64) -> Result<Vec<f64>, LinError> {
    // depress: x = t - a/4  =>  t^4 + p t^2 + q t + r
    let p = b - 3.0 * a * a / 8.0;
    let q = c - a * b / 2.0 + a * a * a / 8.0;
    let r = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a.powi(4) / 256.0;
    let shift = -a / 4.0;
    let qtol = 1e-12 * (1.0 + scale.powi(3));
    if q.abs() <= qtol {
        // biquadratic: y^2 + p y + r with y = t^2
        let ys = roots_quadratic(p, r, scale)?;
        let mut out = Vec::with_capacity(4);
        let ytol = 1e-10 * (1.0 + scale * scale);
        for y in ys {
            if y < -ytol {
                return Err(LinError::ComplexEigenvalues { discriminant: y });
            }
            let s = y.max(0.0).sqrt();
            out.push(shift + s);
            out.push(shift - s);
        }
        return Ok(out);
    }
    // resolvent 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0
    let ra = p;
    let rb = (2.0 * p * p - 8.0 * r) / 8.0;
    let rc = -q * q / 8.0;
    let m = largest_real_cubic_root(ra, rb, rc);
    if !m.is_finite() || m <= 0.0 {
        return Err(LinError::ComplexEigenvalues { discriminant: m });
    }
    let s = (2.0 * m).sqrt();
    let t1 = p / 2.0 + m + q / (2.0 * s);
    let t0 = p / 2.0 + m - q / (2.0 * s);
    let mut out = Vec::with_capacity(4);
    for (lin, cst) in [(-s, t1), (s, t0)] {
        let disc = lin * lin - 4.0 * cst;
        let tol = 1e-9 * (1.0 + scale * scale);
        if disc < -tol {
            return Err(LinError::ComplexEigenvalues { discriminant: disc });
        }
        let sq = disc.max(0.0).sqrt();
        out.push(shift + (-lin + sq) / 2.0);
        out.push(shift + (-lin - sq) / 2.0);
    }
    Ok(out)
}

/// Largest real root of `x^3 + a x^2 + b x + c` (a cubic always has one).
fn largest_real_cubic_root(a: f64, b: f64, c: f64) -> f64 {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = -4.0 * p * p * p - 27.0 * q * q;
    if disc >= 0.0 && p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        // single real root via Cardano
        let half_q = q / 2.0;
        let inner = half_q * half_q + p * p * p / 27.0;
        let sq = inner.max(0.0).sqrt();
        let u = (-half_q + sq).cbrt();
        let v = (-half_q - sq).cbrt();
        u + v + shift
    }
}

/// Orthonormal basis of the (numerical) nullspace of `m`.
fn nullspace(m: &Mat, thresh: f64) -> Vec<Vec<f64>> {
    let n = m.rows;
    let mut a = m.clone();
    let mut pivot_cols: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut row = 0;
    for col in 0..n {
        let (mut piv_row, mut piv_val) = (row, 0.0f64);
        for r in row..n {
            if a[(r, col)].abs() > piv_val {
                piv_row = r;
                piv_val = a[(r, col)].abs();
            }
        }
        if piv_val <= thresh {
            continue;
        }
        a.swap_rows(row, piv_row);
        let d = a[(row, col)];
        for c in 0..n {
            a[(row, c)] /= d;
        }
        for r in 0..n {
            if r != row {
                let factor = a[(r, col)];
                if factor != 0.0 {
                    for c in 0..n {
                        let v = a[(row, c)];
                        a[(r, c)] -= factor * v;
                    }
                }
            }
        }
        pivot_cols.push((row, col));
        row += 1;
        if row == n {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.iter().any(|&(_, c)| c == free) {
            continue;
        }
        let mut v = vec![0.0; n];
        v[free] = 1.0;
        for &(r, c) in &pivot_cols {
            v[c] = -a[(r, free)];
        }
        basis.push(v);
    }
    // Gram-Schmidt within the basis, then fix normalization and sign.
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for mut v in basis {
        for w in &ortho {
            let d: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(w.iter()) {
                *x -= d * y;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= thresh {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in v.iter_mut() {
                    *x = -*x;
                }
            }
        }
        ortho.push(v);
    }
    ortho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn solve_identity_and_diag() {
        let b = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let x = Mat::identity(2).solve(&b).unwrap();
        assert_eq!(x, b);

        let a = Mat::diag(&[2.0, 4.0]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv[(0, 0)], 0.5);
        assert_eq!(inv[(1, 1)], 0.25);
    }

    #[test]
    fn solve_random_well_conditioned() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..20 {
            let n = 6;
            let mut a = Mat::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
            for i in 0..n {
                a[(i, i)] += 4.0; // diagonally dominant
            }
            let x = a.solve(&Mat::identity(n)).unwrap();
            let residual = a.mul(&x).sub(&Mat::identity(n)).max_abs();
            assert!(residual < 1e-10, "residual {residual}");
            let dd = a.det() * x.det();
            assert!((dd - 1.0).abs() <= 1e-8 * (1.0 + dd.abs()));
        }
    }

    #[test]
    fn singular_reports_condition() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        match a.solve(&Mat::identity(2)) {
            Err(LinError::Singular { .. }) => {}
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn eig_diag() {
        let e = Mat::diag(&[3.0, 2.0]).eig_real().unwrap();
        assert!(e.distinct);
        assert_eq!(e.values(), vec![2.0, 3.0]);
        assert_eq!(e.pairs[0].1, vec![0.0, 1.0]);
        assert_eq!(e.pairs[1].1, vec![1.0, 0.0]);
    }

    #[test]
    fn eig_two_by_two() {
        let e = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]])
            .eig_real()
            .unwrap();
        assert_eq!(e.values(), vec![1.0, 2.0]);
    }

    #[test]
    fn eig_rotation_is_complex() {
        let r = Mat::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).eig_real();
        match r {
            Err(LinError::ComplexEigenvalues { .. }) => {}
            other => panic!("expected complex-eigenvalue error, got {other:?}"),
        }
    }

    #[test]
    fn eig_repeated_eigenvalue_has_full_basis() {
        let e = Mat::diag(&[1.0, 1.0, 2.0]).eig_real().unwrap();
        assert!(!e.distinct);
        assert_eq!(e.pairs.len(), 3);
        let vals = e.values();
        assert_eq!(vals[0], vals[1], "clustered eigenvalues share the mean");
        assert!((vals[0] - 1.0).abs() < 1e-8);
        assert!((vals[2] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn eig_residuals_random_symmetric() {
        let mut rng = SplitMix64::new(11);
        for n in 2..=4usize {
            for _ in 0..20 {
                let mut a = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..=i {
                        let v = rng.uniform(-2.0, 2.0);
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                match a.eig_real() {
                    Ok(e) => {
                        let scale = 1.0 + a.max_abs();
                        for (lambda, v) in &e.pairs {
                            let av = a.mul_vec(v);
                            let res = av
                                .iter()
                                .zip(v)
                                .fold(0.0f64, |m, (x, y)| m.max((x - lambda * y).abs()));
                            assert!(res <= 1e-8 * scale, "residual {res} for n={n}");
                            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>();
                            assert!((norm - 1.0).abs() < 1e-10);
                        }
                        let mut vals = e.values();
                        let sorted = {
                            let mut s = vals.clone();
                            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                            s
                        };
                        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        assert_eq!(vals, sorted);
                    }
                    Err(LinError::Defective { .. }) => {
                        // near-degenerate draw; acceptable for random input
                    }
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }

    #[test]
    fn eig_nonsymmetric_real() {
        // similarity transform of diag(1,2,3) by an integer matrix
        let s = Mat::from_rows(&[
            vec![1.0, 1.0, 0.0],
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
        ]);
        let d = Mat::diag(&[1.0, 2.0, 3.0]);
        let a = s.mul(&d).mul(&s.inverse().unwrap());
        let e = a.eig_real().unwrap();
        let vals = e.values();
        for (got, want) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}
