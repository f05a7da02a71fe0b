//! Special conformal Killing tensor diagnostics in riemannian mode: the
//! defining condition in coordinate and intrinsic form, the derived
//! identities around it, the gauged invariance law for R, the cofactor
//! Killing tensor, and the parallel-J commutation results.

use crate::expr::{Expr, Var};
use crate::sode::{ConnectionData, TauField};
use crate::symmat::{self, EMat};
use crate::tensor_calc::{ext_deriv, wedge_one_one, Chart, Form};

/// The function f the diagnostics run against: the declared one when the
/// scenario has it, otherwise the trace of J (its unique candidate up to a
/// constant).
pub fn effective_f(j: &EMat, declared: Option<&Expr>) -> (Expr, bool) {
    match declared {
        Some(f) => (f.clone(), true),
        None => (symmat::trace(j), false),
    }
}

/// `X_f` defined by `X_f . g = -d^h f`, i.e. `X_f = -g^-1 (df/dq)`.
pub fn xf_field(conn: &ConnectionData, f: &Expr) -> Vec<Expr> {
    let n = conn.n;
    (0..n)
        .map(|i| {
            let mut s = Expr::zero();
            for j in 0..n {
                s = s - conn.g_inv[i][j].clone() * f.diff(Var::q(j));
            }
            s
        })
        .collect()
}

/// Residual of g-symmetry of J: `g J - (g J)^T`.
pub fn gsym_residual(conn: &ConnectionData, j: &EMat) -> EMat {
    let gj = symmat::mul(&conn.g, j);
    symmat::sub(&gj, &symmat::transpose(&gj))
}

/// Coordinate form of the defining condition, lowered indices:
/// `J_lj|k - 1/2 (g_lk df/dq^j + g_jk df/dq^l)`, flattened over (l,j,k).
pub fn sck_coord_residual(conn: &ConnectionData, j: &EMat, f: &Expr) -> Vec<Expr> {
    let n = conn.n;
    let lowered = symmat::mul(&conn.g, j);
    let t = TauField::from_fn(n, 0, 2, |idx| lowered[idx[0]][idx[1]].clone());
    let dt = conn.dh_t(&t); // [k_deriv][l][j]
    let mut out = Vec::with_capacity(n * n * n);
    for l in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let covd = dt.get(&[k, l, jj]).clone();
                let rhs = Expr::rat(1, 2)
                    * (conn.g[l][k].clone() * f.diff(Var::q(jj))
                        + conn.g[jj][k].clone() * f.diff(Var::q(l)));
                out.push(covd - rhs);
            }
        }
    }
    out
}

/// Intrinsic form of the defining condition:
/// `nabla J - 1/2 (T (x) d^h f - X_f (x) theta_L)`.
pub fn sck_intrinsic_residual(conn: &ConnectionData, j: &EMat, f: &Expr) -> EMat {
    let n = conn.n;
    let nj = conn.nabla_t(&TauField::mat11(n, j)).to_mat();
    let xf = xf_field(conn, f);
    let mut out = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            let rhs = Expr::rat(1, 2)
                * (Expr::u(i) * f.diff(Var::q(jj)) - xf[i].clone() * conn.theta[jj].clone());
            out[i][jj] = nj[i][jj].clone() - rhs;
        }
    }
    out
}

/// `U + 1/2 (T (x) d^h f + X_f (x) theta_L)`.
pub fn sck_u_residual(conn: &ConnectionData, u: &EMat, f: &Expr) -> EMat {
    let n = conn.n;
    let xf = xf_field(conn, f);
    let mut out = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            let rhs = Expr::rat(-1, 2)
                * (Expr::u(i) * f.diff(Var::q(jj)) + xf[i].clone() * conn.theta[jj].clone());
            out[i][jj] = u[i][jj].clone() - rhs;
        }
    }
    out
}

/// `Phi J - J Phi - 1/2 (T (x) nabla d^h f + nabla X_f (x) theta_L)`.
pub fn phi_j_residual(conn: &ConnectionData, j: &EMat, f: &Expr) -> EMat {
    let n = conn.n;
    let comm = symmat::sub(&symmat::mul(&conn.phi, j), &symmat::mul(j, &conn.phi));
    let dhf: Vec<Expr> = (0..n).map(|k| f.diff(Var::q(k))).collect();
    let nabla_dhf = conn.nabla_t(&TauField::one_form(n, dhf));
    let nabla_xf = conn.nabla_t(&TauField::vector(n, xf_field(conn, f)));
    let mut out = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            let rhs = Expr::rat(1, 2)
                * (Expr::u(i) * nabla_dhf.get(&[jj]).clone()
                    + nabla_xf.get(&[i]).clone() * conn.theta[jj].clone());
            out[i][jj] = comm[i][jj].clone() - rhs;
        }
    }
    out
}

/// `d^h J + 1/2 d^h f ^ I`, indexed [i][j][k].
pub fn dhj_residual(conn: &ConnectionData, j: &EMat, f: &Expr) -> Vec<Vec<Vec<Expr>>> {
    let n = conn.n;
    let dhj = conn.dh_of_11(&TauField::mat11(n, j));
    let mut out = vec![vec![vec![Expr::zero(); n]; n]; n];
    #[allow(clippy::needless_range_loop)]
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let wedge = f.diff(Var::q(jj)) * kron(i, k) - f.diff(Var::q(k)) * kron(i, jj);
                out[i][jj][k] = dhj[i][jj][k].clone() + Expr::rat(1, 2) * wedge;
            }
        }
    }
    out
}

fn kron(a: usize, b: usize) -> Expr {
    if a == b {
        Expr::one()
    } else {
        Expr::zero()
    }
}

/// `g(UX,Y) + 1/2 (d^h f ^ theta_L)(X,Y)`.
pub fn ubis_residual(conn: &ConnectionData, u: &EMat, f: &Expr) -> EMat {
    let n = conn.n;
    let lowered = symmat::mul(&conn.g, u); // g_mk U^m_j -> row k? build directly
    let mut out = symmat::zero(n);
    #[allow(clippy::needless_range_loop)]
    for jj in 0..n {
        for k in 0..n {
            // g(U d_j, d_k) = U^m_j g_mk = (g U)_{k jj}
            let lhs = lowered[k][jj].clone();
            let wedge = f.diff(Var::q(jj)) * conn.theta[k].clone()
                - f.diff(Var::q(k)) * conn.theta[jj].clone();
            out[jj][k] = lhs + Expr::rat(1, 2) * wedge;
        }
    }
    out
}

/// `R - (J^c - Delta (x) df)` needs the pointwise R; this returns the
/// symbolic right-hand side on TQ.
pub fn sck_r_closed(n: usize, jc: &EMat, f: &Expr) -> EMat {
    let mut out = jc.clone();
    for i in 0..n {
        for jj in 0..n {
            out[n + i][jj] = out[n + i][jj].clone() - Expr::u(i) * f.diff(Var::q(jj));
        }
    }
    out
}

/// Cofactor tensor `A = adj(J)`, so that `J A = (det J) I`.
pub fn cofactor(j: &EMat) -> EMat {
    symmat::adjugate(j)
}

/// Cyclic Killing residual of the lowered cofactor: for
/// `Atilde_ij = g_im A^m_j`, the cyclic sum of `Atilde_jk|i`.
pub fn killing_residual(conn: &ConnectionData, a: &EMat) -> Vec<Expr> {
    let n = conn.n;
    let lowered = symmat::mul(&conn.g, a);
    let t = TauField::from_fn(n, 0, 2, |idx| lowered[idx[0]][idx[1]].clone());
    let dt = conn.dh_t(&t); // [deriv][a][b]
    let mut out = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                out.push(
                    dt.get(&[i, jj, k]).clone()
                        + dt.get(&[jj, k, i]).clone()
                        + dt.get(&[k, i, jj]).clone(),
                );
            }
        }
    }
    out
}

/// `X^H(det J) - (AX)^H(f)` on coordinate directions.
pub fn djdetj_residual(conn: &ConnectionData, j: &EMat, a: &EMat, f: &Expr) -> Vec<Expr> {
    let n = conn.n;
    let det = symmat::det(j);
    (0..n)
        .map(|jj| {
            let mut rhs = Expr::zero();
            for m in 0..n {
                rhs = rhs + a[m][jj].clone() * f.diff(Var::q(m));
            }
            det.diff(Var::q(jj)) - rhs
        })
        .collect()
}

/// `d_J(det J) - (det J) d(tr J)` on coordinate directions.
pub fn dj_det_chain_residual(conn: &ConnectionData, j: &EMat) -> Vec<Expr> {
    let n = conn.n;
    let det = symmat::det(j);
    let tr = symmat::trace(j);
    (0..n)
        .map(|a| {
            let mut lhs = Expr::zero();
            for b in 0..n {
                lhs = lhs + j[b][a].clone() * det.diff(Var::q(b));
            }
            lhs - det.clone() * tr.diff(Var::q(a))
        })
        .collect()
}

/// Trace law residuals: `Gamma(tr J - f)` and the components of `d(tr J - f)`.
pub fn trace_law_residuals(conn: &ConnectionData, j: &EMat, f: &Expr) -> Vec<Expr> {
    let n = conn.n;
    let diff_fn = symmat::trace(j) - f.clone();
    let mut out = vec![conn.gamma_apply(&diff_fn)];
    for k in 0..n {
        out.push(diff_fn.diff(Var::q(k)));
    }
    out
}

/// `i_{xi_f} omega_L + df` as a 1-form on TQ (xi_f is the vertical lift of X_f).
pub fn xf_hamiltonian_residual(conn: &ConnectionData, omega_l: &Form, f: &Expr) -> Vec<Expr> {
    let n = conn.n;
    let xf = xf_field(conn, f);
    let mut xi = vec![Expr::zero(); 2 * n];
    xi[n..(n + n)].clone_from_slice(&xf);
    let mut out = Vec::with_capacity(2 * n);
    for b in 0..2 * n {
        let mut s = Expr::zero();
        for (a, xa) in xi.iter().enumerate() {
            if a != b {
                s = s + xa.clone() * omega_l.get(&[a, b]);
            }
        }
        let dfb = if b < n {
            f.diff(Var::q(b))
        } else {
            Expr::zero()
        };
        out.push(s + dfb);
    }
    out
}

/// `L_Gamma R - (Gamma (x) df - xi_f (x) dE_L)` on TQ.
pub fn gauging2_residual(conn: &ConnectionData, lgam_r: &EMat, f: &Expr) -> EMat {
    let n = conn.n;
    let gamma_field = conn.gamma_field();
    let xf = xf_field(conn, f);
    let mut xi = vec![Expr::zero(); 2 * n];
    xi[n..(n + n)].clone_from_slice(&xf);
    let mut out = symmat::zero(2 * n);
    let de: Vec<Expr> = {
        let chart = Chart::tangent(n);
        (0..2 * n).map(|a| chart.diff(&conn.energy, a)).collect()
    };
    for a in 0..2 * n {
        for b in 0..2 * n {
            let dfb = if b < n {
                f.diff(Var::q(b))
            } else {
                Expr::zero()
            };
            let rhs = gamma_field[a].clone() * dfb - xi[a].clone() * de[b].clone();
            out[a][b] = lgam_r[a][b].clone() - rhs;
        }
    }
    out
}

/// `d d_R E_L` as a 2-form on TQ, for a symbolic R.
pub fn dd_r_energy(conn: &ConnectionData, r_sym: &EMat) -> Form {
    let n = conn.n;
    let chart = Chart::tangent(n);
    let de = ext_deriv(&chart, &Form::function(2 * n, conn.energy.clone()));
    let d_r_e = crate::tensor_calc::i_a_oneform(r_sym, &de);
    ext_deriv(&chart, &d_r_e)
}

/// `d d_R E_L - df ^ dE_L` as a 2-form on TQ.
pub fn gauging_residual(conn: &ConnectionData, r_sym: &EMat, f: &Expr) -> Form {
    let n = conn.n;
    let chart = Chart::tangent(n);
    let lhs = dd_r_energy(conn, r_sym);
    let de = ext_deriv(&chart, &Form::function(2 * n, conn.energy.clone()));
    let mut df = vec![Expr::zero(); 2 * n];
    for (k, slot) in df.iter_mut().enumerate().take(n) {
        *slot = f.diff(Var::q(k));
    }
    let rhs = wedge_one_one(&Form::one_form(2 * n, df), &de);
    let mut out = Form::zero(2 * n, 2);
    for a in 0..2 * n {
        for b in (a + 1)..2 * n {
            out.set(&[a, b], lhs.get(&[a, b]) - rhs.get(&[a, b]));
        }
    }
    out
}

/// Ricci-identity consequence of a parallel J:
/// `J^i_j R^j_kml - R^i_jml J^j_k` over (i,k,m,l).
pub fn ricci_identity_residual(conn: &ConnectionData, j: &EMat) -> Vec<Expr> {
    let riemann = conn.riemann.as_ref().expect("riemannian mode");
    let n = conn.n;
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                for l in 0..n {
                    let mut s = Expr::zero();
                    for jj in 0..n {
                        s = s + j[i][jj].clone() * riemann[jj][k][m][l].clone()
                            - riemann[i][jj][m][l].clone() * j[jj][k].clone();
                    }
                    out.push(s);
                }
            }
        }
    }
    out
}

/// Commutation identity of a parallel J with the Jacobi endomorphism in
/// Riemann-tensor form:
/// `J^i_j (R^j_kml + R^j_lmk) - (R^i_kjl + R^i_ljk) J^j_m` over (i,k,m,l).
pub fn commutation_identity_residual(conn: &ConnectionData, j: &EMat) -> Vec<Expr> {
    let riemann = conn.riemann.as_ref().expect("riemannian mode");
    let n = conn.n;
    let mut out = Vec::new();
    for i in 0..n {
        for k in 0..n {
            for m in 0..n {
                for l in 0..n {
                    let mut s = Expr::zero();
                    for jj in 0..n {
                        s = s + j[i][jj].clone()
                            * (riemann[jj][k][m][l].clone() + riemann[jj][l][m][k].clone())
                            - (riemann[i][k][jj][l].clone() + riemann[i][l][jj][k].clone())
                                * j[jj][m].clone();
                    }
                    out.push(s);
                }
            }
        }
    }
    out
}

/// The derivation identity behind the parallel-J commutation result:
/// `A(X,Y) = -D^V_JY Phi(X) - curv(X,JY) + J(D^V_Y Phi(X)) + J(curv(X,Y))`
/// over coordinate X, Y; zero when J is parallel.
pub fn aux_commutator_residual(conn: &ConnectionData, j: &EMat) -> Vec<Expr> {
    let n = conn.n;
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for i in 0..n {
                let mut s = Expr::zero();
                for m in 0..n {
                    s = s
                        - j[m][y].clone() * conn.phi[i][x].diff(Var::u(m))
                        - conn.curvature[i][x][m].clone() * j[m][y].clone()
                        + j[i][m].clone() * conn.phi[m][x].diff(Var::u(y))
                        + j[i][m].clone() * conn.curvature[m][x][y].clone();
                }
                out.push(s);
            }
        }
    }
    out
}

/// Commutator of two horizontal covariant derivatives on a basic coordinate
/// field against the classical curvature:
/// `(D^H_i D^H_j - D^H_j D^H_i) d_m - Rie(d_i, d_j) d_m` componentwise.
pub fn dhdh_commutator_residual(conn: &ConnectionData) -> Vec<Expr> {
    let riemann = conn.riemann.as_ref().expect("riemannian mode");
    let n = conn.n;
    let mut out = Vec::new();
    for m in 0..n {
        let mut z = vec![Expr::zero(); n];
        z[m] = Expr::one();
        let zt = TauField::vector(n, z);
        let d1 = conn.dh_t(&zt); // [k][deriv]
        let d2 = conn.dh_t(&d1); // [k][deriv_outer][deriv_inner]
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let comm = d2.get(&[k, i, jj]).clone() - d2.get(&[k, jj, i]).clone();
                    out.push(comm - riemann[k][m][i][jj].clone());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Point};
    use crate::geometry::{load_builtin, probe_point};
    use crate::lifts::Lifts;

    fn setup(name: &str) -> (crate::geometry::Scenario, ConnectionData, Lifts, Vec<Point>) {
        let s = load_builtin(name);
        let conn = ConnectionData::build(&s).unwrap();
        let lifts = Lifts::build(&s, &conn);
        let pts = s.sample().unwrap().points;
        (s, conn, lifts, pts)
    }

    fn max_abs(exprs: &[Expr], pts: &[Point]) -> f64 {
        let mut m = 0.0f64;
        for p in pts {
            for e in exprs {
                m = m.max(e.eval(p).unwrap().abs());
            }
        }
        m
    }

    fn flatten(m: &EMat) -> Vec<Expr> {
        m.iter().flat_map(|r| r.iter().cloned()).collect()
    }

    #[test]
    fn e3_is_special_conformal_killing() {
        let (s, conn, _lifts, pts) = setup("E3");
        let (f, declared) = effective_f(&s.j, s.f.as_ref());
        assert!(declared);
        let coord = sck_coord_residual(&conn, &s.j, &f);
        assert!(max_abs(&coord, &pts) < 1e-9);
        let intrinsic = sck_intrinsic_residual(&conn, &s.j, &f);
        assert!(max_abs(&flatten(&intrinsic), &pts) < 1e-9);
    }

    #[test]
    fn e2_sck_with_constant_f() {
        let (s, conn, _lifts, pts) = setup("E2");
        let (f, declared) = effective_f(&s.j, s.f.as_ref());
        assert!(!declared); // recovered f = tr J = 5
        let coord = sck_coord_residual(&conn, &s.j, &f);
        assert!(max_abs(&coord, &pts) < 1e-12);
    }

    #[test]
    fn e4_with_wrong_f_fails_cleanly() {
        let (s, conn, _lifts, _pts) = setup("E4");
        let f = parse("q1", 3).unwrap();
        let coord = sck_coord_residual(&conn, &s.j, &f);
        let probe = probe_point(3);
        let mut worst = 0.0f64;
        for e in &coord {
            worst = worst.max(e.eval(&probe).unwrap().abs());
        }
        assert!(
            worst > 0.1,
            "declared f = q1 must violate the condition, got {worst}"
        );
    }

    #[test]
    fn xf_values() {
        let (s, conn, _lifts, pts) = setup("E3");
        let (f, _) = effective_f(&s.j, s.f.as_ref());
        let xf = xf_field(&conn, &f);
        for p in &pts {
            for i in 0..2 {
                let got = xf[i].eval(p).unwrap();
                assert!((got - (-2.0 * p.q[i])).abs() < 1e-12);
            }
        }
        // flat metric with f = q1: X_f = (-1, 0)
        let (s1, conn1, _l1, _p1) = setup("E1");
        let _ = s1;
        let f = parse("q1", 2).unwrap();
        let xf = xf_field(&conn1, &f);
        let p = probe_point(2);
        assert_eq!(xf[0].eval(&p).unwrap(), -1.0);
        assert_eq!(xf[1].eval(&p).unwrap(), 0.0);
    }

    #[test]
    fn theorem1_identities_on_e3() {
        let (s, conn, lifts, pts) = setup("E3");
        let (f, _) = effective_f(&s.j, s.f.as_ref());
        assert!(max_abs(&flatten(&sck_u_residual(&conn, &lifts.u_field, &f)), &pts) < 1e-8);
        assert!(max_abs(&flatten(&phi_j_residual(&conn, &s.j, &f)), &pts) < 1e-8);
        let dhj = dhj_residual(&conn, &s.j, &f);
        let flat: Vec<Expr> = dhj.into_iter().flatten().flatten().collect();
        assert!(max_abs(&flat, &pts) < 1e-8);
        assert!(max_abs(&flatten(&ubis_residual(&conn, &lifts.u_field, &f)), &pts) < 1e-8);

        // R = J^c - Delta (x) df, against the pointwise solve
        let rhs = sck_r_closed(s.n, &lifts.jc, &f);
        for p in &pts {
            let r = lifts.solve_r_at(p).unwrap();
            let want = symmat::eval_mat(&rhs, p).unwrap();
            assert!(r.sub(&want).max_abs() < 1e-8);
        }
    }

    #[test]
    fn trace_law_and_cofactor_on_e3() {
        let (s, conn, _lifts, pts) = setup("E3");
        let (f, _) = effective_f(&s.j, s.f.as_ref());
        assert!(max_abs(&trace_law_residuals(&conn, &s.j, &f), &pts) < 1e-10);

        let a = cofactor(&s.j);
        // n = 2: A = (tr J) I - J
        for p in &pts {
            let am = symmat::eval_mat(&a, p).unwrap();
            let q2 = p.q[0] * p.q[0] + p.q[1] * p.q[1];
            for i in 0..2 {
                for jj in 0..2 {
                    let want = (q2 + 1.0) * if i == jj { 1.0 } else { 0.0 } - p.q[i] * p.q[jj];
                    assert!((am[(i, jj)] - want).abs() < 1e-12);
                }
            }
        }
        assert!(max_abs(&killing_residual(&conn, &a), &pts) < 1e-8);
        assert!(max_abs(&djdetj_residual(&conn, &s.j, &a, &f), &pts) < 1e-8);
        assert!(max_abs(&dj_det_chain_residual(&conn, &s.j), &pts) < 1e-8);
    }

    #[test]
    fn cofactor_trivial_cases() {
        let (s, conn, _lifts, pts) = setup("E2");
        let a = cofactor(&s.j);
        let p = &pts[0];
        let am = symmat::eval_mat(&a, p).unwrap();
        assert_eq!(am[(0, 0)], 3.0);
        assert_eq!(am[(1, 1)], 2.0);
        assert!(max_abs(&killing_residual(&conn, &a), &pts) < 1e-14);

        let (s1, conn1, _l, pts1) = setup("E1");
        let a1 = cofactor(&s1.j);
        assert!(max_abs(&killing_residual(&conn1, &a1), &pts1) < 1e-14);
    }

    #[test]
    fn xi_f_is_hamiltonian_field_of_f() {
        let (s, conn, lifts, pts) = setup("E3");
        let (f, _) = effective_f(&s.j, s.f.as_ref());
        let res = xf_hamiltonian_residual(&conn, &lifts.omega_l, &f);
        assert!(max_abs(&res, &pts) < 1e-10);
    }

    #[test]
    fn appendix_a_identities_on_e4() {
        let (s, conn, _lifts, pts) = setup("E4");
        // parallel symmetric J on a curved metric
        assert!(max_abs(&ricci_identity_residual(&conn, &s.j), &pts) < 1e-8);
        assert!(max_abs(&commutation_identity_residual(&conn, &s.j), &pts) < 1e-8);
        assert!(max_abs(&aux_commutator_residual(&conn, &s.j), &pts) < 1e-8);
        assert!(max_abs(&dhdh_commutator_residual(&conn), &pts) < 1e-8);
        // Phi J = J Phi, with a curvature that is genuinely nonzero
        let comm = symmat::sub(&symmat::mul(&conn.phi, &s.j), &symmat::mul(&s.j, &conn.phi));
        assert!(max_abs(&flatten(&comm), &pts) < 1e-8);
        let probe = probe_point(3);
        let phi_norm = symmat::eval_mat(&conn.phi, &probe).unwrap().max_abs();
        assert!(phi_norm > 0.01, "Phi must be nonzero for the check to bite");
    }

    #[test]
    fn gauging_chain_on_e3() {
        let (s, conn, lifts, pts) = setup("E3");
        let (f, _) = effective_f(&s.j, s.f.as_ref());
        let chart = Chart::tangent(s.n);
        let lgam_r =
            crate::tensor_calc::lie_derivative_11(&chart, &conn.gamma_field(), &lifts.r_closed);
        let g2 = gauging2_residual(&conn, &lgam_r, &f);
        assert!(max_abs(&flatten(&g2), &pts) < 1e-8);
        let g1 = gauging_residual(&conn, &lifts.r_closed, &f);
        assert!(max_abs(g1.components(), &pts) < 1e-8);
    }
}
