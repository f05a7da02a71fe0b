//! Small helpers for matrices of symbolic expressions (n <= 4 throughout).

use crate::expr::{Expr, Point};
use crate::smalllin::Mat;

pub type EMat = Vec<Vec<Expr>>;

pub fn zero(n: usize) -> EMat {
    vec![vec![Expr::zero(); n]; n]
}

pub fn identity(n: usize) -> EMat {
    let mut m = zero(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Expr::one();
    }
    m
}

pub fn mul(a: &EMat, b: &EMat) -> EMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Expr::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = Expr::zero();
            for l in 0..k {
                s = s + a[i][l].clone() * b[l][j].clone();
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn add(a: &EMat, b: &EMat) -> EMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x.clone() + y.clone())
                .collect()
        })
        .collect()
}

pub fn sub(a: &EMat, b: &EMat) -> EMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| {
            ra.iter()
                .zip(rb)
                .map(|(x, y)| x.clone() - y.clone())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &EMat) -> EMat {
    let n = a.len();
    let m = a[0].len();
    (0..m)
        .map(|j| (0..n).map(|i| a[i][j].clone()).collect())
        .collect()
}

pub fn apply(a: &EMat, v: &[Expr]) -> Vec<Expr> {
    a.iter()
        .map(|row| {
            let mut s = Expr::zero();
            for (x, y) in row.iter().zip(v) {
                s = s + x.clone() * y.clone();
            }
            s
        })
        .collect()
}

pub fn trace(a: &EMat) -> Expr {
    let mut s = Expr::zero();
    for (i, row) in a.iter().enumerate() {
        s = s + row[i].clone();
    }
    s
}

/// Determinant by Laplace expansion (symbolic, sizes <= 4).
pub fn det(a: &EMat) -> Expr {
    let n = a.len();
    match n {
        0 => Expr::one(),
        1 => a[0][0].clone(),
        _ => {
            let mut s = Expr::zero();
            for j in 0..n {
                let m = minor(a, 0, j);
                let term = a[0][j].clone() * det(&m);
                s = if j % 2 == 0 { s + term } else { s - term };
            }
            s
        }
    }
}

fn minor(a: &EMat, row: usize, col: usize) -> EMat {
    let n = a.len();
    let mut out = Vec::with_capacity(n - 1);
    for i in 0..n {
        if i == row {
            continue;
        }
        let mut r = Vec::with_capacity(n - 1);
        for j in 0..n {
            if j == col {
                continue;
            }
            r.push(a[i][j].clone());
        }
        out.push(r);
    }
    out
}

/// Adjugate: `a * adjugate(a) = det(a) * I`.
pub fn adjugate(a: &EMat) -> EMat {
    let n = a.len();
    if n == 1 {
        return vec![vec![Expr::one()]];
    }
    let mut adj = zero(n);
    for i in 0..n {
        for j in 0..n {
            let c = det(&minor(a, j, i));
            adj[i][j] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}

/// Symbolic inverse as adjugate over determinant.
pub fn inverse(a: &EMat) -> EMat {
    let d = det(a);
    let adj = adjugate(a);
    adj.iter()
        .map(|row| row.iter().map(|e| e.clone() / d.clone()).collect())
        .collect()
}

pub fn eval_mat(a: &EMat, p: &Point) -> Result<Mat, crate::expr::EvalError> {
    let rows = a.len();
    let cols = a[0].len();
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = a[i][j].eval(p)?;
        }
    }
    Ok(m)
}

pub fn eval_vec(v: &[Expr], p: &Point) -> Result<Vec<f64>, crate::expr::EvalError> {
    v.iter().map(|e| e.eval(p)).collect()
}
