//! Lifted objects on TQ: the vertical endomorphism S, complete and vertical
//! lifts, the Poincare-Cartan forms theta_L / omega_L, the second two-form
//! omega_1, the recursion tensor R they determine, its closed coordinate
//! forms, and the Legendre-transform cross-check.

use thiserror::Error;

use crate::expr::{Expr, Point, Var};
use crate::geometry::Scenario;
use crate::smalllin::{LinError, Mat};
use crate::sode::ConnectionData;
use crate::symmat::{self, EMat};
use crate::tensor_calc::{ext_deriv, i_a_oneform, Chart, Form};

#[derive(Debug, Error)]
pub enum LiftsError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("degenerate two-form: {0}")]
    Singular(#[from] LinError),
}

/// The vertical endomorphism S = V_i (x) dq^i as a 2n x 2n matrix in the
/// coordinate basis ordered (q, u).
pub fn vertical_endomorphism(n: usize) -> EMat {
    let mut s = symmat::zero(2 * n);
    for i in 0..n {
        s[n + i][i] = Expr::one();
    }
    s
}

/// Complete lift of a vector field on Q:
/// `X^c = X^i d/dq^i + u^j (dX^i/dq^j) d/du^i`.
pub fn complete_lift_vec(n: usize, x: &[Expr]) -> Vec<Expr> {
    let mut out = x.to_vec();
    for xi in x.iter() {
        let mut s = Expr::zero();
        for j in 0..n {
            s = s + Expr::u(j) * xi.diff(Var::q(j));
        }
        out.push(s);
    }
    out
}

/// Vertical lift of a vector field on Q: `X^V = X^i d/du^i`.
pub fn vertical_lift_vec(n: usize, x: &[Expr]) -> Vec<Expr> {
    let mut out = vec![Expr::zero(); n];
    out.extend_from_slice(x);
    out
}

/// Complete lift of a (1,1) tensor with base-only components: block
/// structure [[A, 0], [u.dA, A]] in the coordinate basis.
pub fn complete_lift_11(n: usize, a: &EMat) -> EMat {
    let mut out = symmat::zero(2 * n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[i][j].clone();
            out[n + i][n + j] = a[i][j].clone();
            let mut s = Expr::zero();
            for k in 0..n {
                s = s + Expr::u(k) * a[i][j].diff(Var::q(k));
            }
            out[n + i][j] = s;
        }
    }
    out
}

/// The Liouville field Delta = u^i d/du^i.
pub fn liouville(n: usize) -> Vec<Expr> {
    let mut v = vec![Expr::zero(); n];
    v.extend((0..n).map(Expr::u));
    v
}

/// Symbolic lift data for one scenario.
#[derive(Debug, Clone)]
pub struct Lifts {
    pub n: usize,
    /// Vertical endomorphism on TQ.
    pub s_endo: EMat,
    /// Complete lift of J.
    pub jc: EMat,
    /// theta_L as a 1-form on TQ (semi-basic: du-components vanish).
    pub theta_l: Form,
    /// J^c theta_L (the potential of omega_1).
    pub jc_theta: Form,
    /// omega_L = d theta_L.
    pub omega_l: Form,
    /// omega_1 = d(J^c theta_L).
    pub omega_1: Form,
    /// Transpose of J with respect to g, as a field along the projection.
    pub jbar: EMat,
    /// The tensor U along the projection, g(UX,Y) = d^h(J theta_L)(X,Y).
    pub u_field: EMat,
    /// Closed-form R: the adapted-frame coordinate expression in riemannian
    /// mode, the Legendre pullback closed form otherwise.
    pub r_closed: EMat,
}

impl Lifts {
    pub fn build(s: &Scenario, conn: &ConnectionData) -> Lifts {
        let n = s.n;
        let chart = Chart::tangent(n);
        let s_endo = vertical_endomorphism(n);
        let jc = complete_lift_11(n, &s.j);

        let mut theta_comps = vec![Expr::zero(); 2 * n];
        theta_comps[..n].clone_from_slice(&conn.theta);
        let theta_l = Form::one_form(2 * n, theta_comps);
        let jc_theta = i_a_oneform(&jc, &theta_l);
        let omega_l = ext_deriv(&chart, &theta_l);
        let omega_1 = ext_deriv(&chart, &jc_theta);

        let jbar = transpose_wrt_g(&s.j, &conn.g, &conn.g_inv);
        let u_field = if conn.riemannian {
            compute_u_riemannian(conn, &s.j)
        } else {
            compute_u_general(conn, &s.j)
        };
        let r_closed = if conn.riemannian {
            closed_form_r(conn, &s.j, &jbar, &u_field)
        } else {
            legendre_closed_form(conn, &s.j)
        };

        Lifts {
            n,
            s_endo,
            jc,
            theta_l,
            jc_theta,
            omega_l,
            omega_1,
            jbar,
            u_field,
            r_closed,
        }
    }

    /// Pointwise R from the defining relation: R = Omega^-1 Omega_1.
    pub fn solve_r_at(&self, p: &Point) -> Result<Mat, LiftsError> {
        let omega = eval_form_matrix(&self.omega_l, p)?;
        let omega1 = eval_form_matrix(&self.omega_1, p)?;
        Ok(omega.solve(&omega1)?)
    }

    /// Pointwise Legendre pullback of the cotangent lift of J.
    ///
    /// Computes p = dL/du, the Jacobian D of (q,u) -> (q,p), the lift matrix
    /// at (q,p), and D^-1 (Jtilde D).
    pub fn legendre_pullback_at(
        &self,
        s: &Scenario,
        conn: &ConnectionData,
        pt: &Point,
    ) -> Result<Mat, LiftsError> {
        let n = self.n;
        let p_vals: Vec<f64> = conn
            .theta
            .iter()
            .map(|e| e.eval(pt))
            .collect::<Result<_, _>>()?;
        // Jacobian blocks: dp/dq and dp/du (the Hessian).
        let mut d = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            d[(i, i)] = 1.0;
            for j in 0..n {
                d[(n + i, j)] = conn.theta[i].diff(Var::q(j)).eval(pt)?;
                d[(n + i, n + j)] = conn.hessian[i][j].eval(pt)?;
            }
        }
        // Cotangent lift at (q, p): [[J, 0], [C, J^T]] with
        // C_ij = p_k (dJ^k_i/dq^j - dJ^k_j/dq^i).
        let mut jt = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let jv = s.j[i][j].eval(pt)?;
                jt[(i, j)] = jv;
                jt[(n + j, n + i)] = jv;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let mut c = 0.0;
                for k in 0..n {
                    c += p_vals[k]
                        * (s.j[k][i].diff(Var::q(j)).eval(pt)?
                            - s.j[k][j].diff(Var::q(i)).eval(pt)?);
                }
                jt[(n + i, j)] = c;
            }
        }
        Ok(d.solve(&jt.mul(&d))?)
    }

    /// Change-of-basis matrices between the coordinate frame and the adapted
    /// frame (H_i, V_i): columns of P are the frame vectors.
    pub fn adapted_frame_at(
        &self,
        conn: &ConnectionData,
        p: &Point,
    ) -> Result<(Mat, Mat), LiftsError> {
        let n = self.n;
        let gamma = symmat::eval_mat(&conn.conn, p)?;
        let mut pm = Mat::identity(2 * n);
        let mut pinv = Mat::identity(2 * n);
        for i in 0..n {
            for j in 0..n {
                pm[(n + i, j)] = -gamma[(i, j)];
                pinv[(n + i, j)] = gamma[(i, j)];
            }
        }
        Ok((pm, pinv))
    }
}

/// `Jbar = g^-1 J^T g`, the transpose of J with respect to g.
pub fn transpose_wrt_g(j: &EMat, g: &EMat, g_inv: &EMat) -> EMat {
    symmat::mul(g_inv, &symmat::mul(&symmat::transpose(j), g))
}

/// U via the defining relation in the general case: g(UX,Y) = d^h(J theta)(X,Y)
/// evaluated on coordinate directions, then the metric index raised.
pub fn compute_u_general(conn: &ConnectionData, j: &EMat) -> EMat {
    let n = conn.n;
    let alpha: Vec<Expr> = (0..n)
        .map(|jj| {
            let mut s = Expr::zero();
            for m in 0..n {
                s = s + conn.theta[m].clone() * j[m][jj].clone();
            }
            s
        })
        .collect();
    let w = conn.dh_one_form(&alpha);
    // U^m_i = W_ij g^(jm)
    let mut u = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for m in 0..n {
        for i in 0..n {
            let mut s = Expr::zero();
            for jj in 0..n {
                s = s + w[i][jj].clone() * conn.g_inv[jj][m].clone();
            }
            u[m][i] = s;
        }
    }
    u
}

/// U in riemannian mode: `U^i_j = g^ik (J^m_k|j - J^m_j|k) g_ml u^l`.
pub fn compute_u_riemannian(conn: &ConnectionData, j: &EMat) -> EMat {
    let n = conn.n;
    let covd = conn.classical_covd_11(j); // covd[m][k][j] = J^m_{k|j}
    let mut u = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            let mut s = Expr::zero();
            for k in 0..n {
                for m in 0..n {
                    for l in 0..n {
                        s = s + conn.g_inv[i][k].clone()
                            * (covd[m][k][jj].clone() - covd[m][jj][k].clone())
                            * conn.g[m][l].clone()
                            * Expr::u(l);
                    }
                }
            }
            u[i][jj] = s;
        }
    }
    u
}

/// Coordinate-basis closed form of R (riemannian route):
/// blocks [[J, 0], [U + Jbar Gamma - Gamma J, Jbar]].
pub fn closed_form_r(conn: &ConnectionData, j: &EMat, jbar: &EMat, u: &EMat) -> EMat {
    let n = conn.n;
    let jbar_gamma = symmat::mul(jbar, &conn.conn);
    let gamma_j = symmat::mul(&conn.conn, j);
    let mut r = symmat::zero(2 * n);
    for i in 0..n {
        for jj in 0..n {
            r[i][jj] = j[i][jj].clone();
            r[n + i][n + jj] = jbar[i][jj].clone();
            r[n + i][jj] = u[i][jj].clone() + jbar_gamma[i][jj].clone() - gamma_j[i][jj].clone();
        }
    }
    r
}

/// Symbolic Legendre-pullback closed form (general route):
/// [[J, 0], [g^-1 (C + J^T B - B J), g^-1 J^T g]] with B = dp/dq and
/// C the momentum contraction of the antisymmetrized dJ/dq.
pub fn legendre_closed_form(conn: &ConnectionData, j: &EMat) -> EMat {
    let n = conn.n;
    let b: EMat = (0..n)
        .map(|i| (0..n).map(|jj| conn.theta[i].diff(Var::q(jj))).collect())
        .collect();
    let mut c = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            let mut s = Expr::zero();
            for k in 0..n {
                s = s + conn.theta[k].clone()
                    * (j[k][i].diff(Var::q(jj)) - j[k][jj].diff(Var::q(i)));
            }
            c[i][jj] = s;
        }
    }
    let jt = symmat::transpose(j);
    let inner = symmat::add(&c, &symmat::sub(&symmat::mul(&jt, &b), &symmat::mul(&b, j)));
    let lower_left = symmat::mul(&conn.g_inv, &inner);
    let lower_right = symmat::mul(&conn.g_inv, &symmat::mul(&jt, &conn.g));
    let mut r = symmat::zero(2 * n);
    for i in 0..n {
        for jj in 0..n {
            r[i][jj] = j[i][jj].clone();
            r[n + i][jj] = lower_left[i][jj].clone();
            r[n + i][n + jj] = lower_right[i][jj].clone();
        }
    }
    r
}

/// Full antisymmetric matrix of a 2-form evaluated at a point.
pub fn eval_form_matrix(form: &Form, p: &Point) -> Result<Mat, crate::expr::EvalError> {
    let m = form.dim;
    let mut out = Mat::zeros(m, m);
    for a in 0..m {
        for b in (a + 1)..m {
            let v = form.get(&[a, b]).eval(p)?;
            out[(a, b)] = v;
            out[(b, a)] = -v;
        }
    }
    Ok(out)
}
