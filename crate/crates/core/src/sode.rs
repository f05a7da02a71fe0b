//! The second-order field of a regular Lagrangian and everything its
//! nonlinear connection carries: connection and Berwald coefficients,
//! curvature, Jacobi endomorphism, the classical Riemann tensor in
//! riemannian mode, and the covariant derivative operators of the calculus
//! along the projection (nabla, D^H, D^V).

use thiserror::Error;

use crate::expr::{Expr, Point, Var};
use crate::geometry::{probe_point, Mode, Scenario};
use crate::symmat::{self, EMat};
use crate::tensor_calc::{bracket, Chart};

#[derive(Debug, Error)]
pub enum SodeError {
    #[error("singular Hessian: det g = {det:.3e} at probe point")]
    SingularHessian { det: f64 },
    #[error("evaluation failed while building the connection: {0}")]
    Eval(#[from] crate::expr::EvalError),
}

/// A tensor field along the tangent-bundle projection: base-space index
/// structure with components depending on both q and u. Contravariant
/// indices come first in the flat component layout.
#[derive(Debug, Clone)]
pub struct TauField {
    pub n: usize,
    pub up: usize,
    pub down: usize,
    pub comps: Vec<Expr>,
}

fn decode(mut flat: usize, n: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in (0..rank).rev() {
        idx[slot] = flat % n;
        flat /= n;
    }
    idx
}

impl TauField {
    pub fn from_fn(n: usize, up: usize, down: usize, mut f: impl FnMut(&[usize]) -> Expr) -> Self {
        let rank = up + down;
        let len = n.pow(rank as u32);
        let comps = (0..len).map(|flat| f(&decode(flat, n, rank))).collect();
        TauField { n, up, down, comps }
    }

    pub fn rank(&self) -> usize {
        self.up + self.down
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        debug_assert_eq!(idx.len(), self.rank());
        let mut flat = 0;
        for &i in idx {
            flat = flat * self.n + i;
        }
        &self.comps[flat]
    }

    pub fn vector(n: usize, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), n);
        TauField {
            n,
            up: 1,
            down: 0,
            comps,
        }
    }

    pub fn one_form(n: usize, comps: Vec<Expr>) -> Self {
        assert_eq!(comps.len(), n);
        TauField {
            n,
            up: 0,
            down: 1,
            comps,
        }
    }

    pub fn mat11(n: usize, m: &EMat) -> Self {
        TauField::from_fn(n, 1, 1, |idx| m[idx[0]][idx[1]].clone())
    }

    pub fn to_mat(&self) -> EMat {
        assert_eq!((self.up, self.down), (1, 1));
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(&[i, j]).clone()).collect())
            .collect()
    }

    /// The canonical field T = u^i d/dq^i along the projection.
    pub fn canonical(n: usize) -> Self {
        TauField::vector(n, (0..n).map(Expr::u).collect())
    }

    pub fn max_abs_at(&self, p: &Point) -> Result<f64, crate::expr::EvalError> {
        let mut m = 0.0f64;
        for c in &self.comps {
            m = m.max(c.eval(p)?.abs());
        }
        Ok(m)
    }
}

/// Connection data of the Euler-Lagrange field of a regular Lagrangian.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    pub n: usize,
    pub riemannian: bool,
    pub lagrangian: Expr,
    /// Energy E_L = Delta(L) - L.
    pub energy: Expr,
    /// Hessian g_ij = d^2 L / du^i du^j.
    pub hessian: EMat,
    /// Metric the geometry runs on (declared metric in riemannian mode,
    /// the Hessian otherwise).
    pub g: EMat,
    pub g_inv: EMat,
    /// theta_i = dL/du^i, the Poincare-Cartan form seen along the projection.
    pub theta: Vec<Expr>,
    /// Forces f^i of the second-order field.
    pub forces: Vec<Expr>,
    /// Connection coefficients Gamma^i_j = -1/2 df^i/du^j.
    pub conn: EMat,
    /// Berwald coefficients Gamma^i_jk = dGamma^i_j/du^k, indexed [i][j][k].
    pub berwald: Vec<Vec<Vec<Expr>>>,
    /// Classical Christoffel symbols (riemannian mode), indexed [i][j][k].
    pub christoffel: Option<Vec<Vec<Vec<Expr>>>>,
    /// Curvature of the nonlinear connection, indexed [k][i][j] for
    /// the vertical part of [H_i, H_j].
    pub curvature: Vec<Vec<Vec<Expr>>>,
    /// Jacobi endomorphism Phi^i_j from the bracket [Gamma, H_j].
    pub phi: EMat,
    /// Classical Riemann tensor R^i_ljk (riemannian mode), indexed
    /// [i][l][j][k]; skew-symmetric in (j,k) and calibrated so that
    /// Phi^i_j = R^i_ljk u^k u^l.
    pub riemann: Option<Vec<Vec<Vec<Vec<Expr>>>>>,
}

impl ConnectionData {
    pub fn build(s: &Scenario) -> Result<ConnectionData, SodeError> {
        let n = s.n;
        let lagrangian = s.lagrangian.clone();
        let hessian_field = s.hessian_metric();
        let hessian = hessian_field.to_mat();
        let probe = probe_point(n);
        let det_h = symmat::det(&hessian).eval(&probe)?;
        if det_h.abs() <= 1e-12 {
            return Err(SodeError::SingularHessian { det: det_h });
        }

        let theta: Vec<Expr> = (0..n).map(|i| lagrangian.diff(Var::u(i))).collect();
        let mut energy = -lagrangian.clone();
        for (i, th) in theta.iter().enumerate() {
            energy = energy + Expr::u(i) * th.clone();
        }

        // g_ij f^j = dL/dq^i - (d^2 L / du^i dq^k) u^k, solved symbolically
        // through the adjugate of the Hessian.
        let rhs: Vec<Expr> = (0..n)
            .map(|i| {
                let mut b = lagrangian.diff(Var::q(i));
                for k in 0..n {
                    b = b - theta[i].diff(Var::q(k)) * Expr::u(k);
                }
                b
            })
            .collect();
        let adj = symmat::adjugate(&hessian);
        let det = symmat::det(&hessian);
        let forces: Vec<Expr> = (0..n)
            .map(|i| {
                let mut s = Expr::zero();
                for (j, r) in rhs.iter().enumerate() {
                    s = s + adj[i][j].clone() * r.clone();
                }
                s / det.clone()
            })
            .collect();

        let conn: EMat = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Expr::rat(-1, 2) * forces[i].diff(Var::u(j)))
                    .collect()
            })
            .collect();

        let berwald: Vec<Vec<Vec<Expr>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| conn[i][j].diff(Var::u(k))).collect())
                    .collect()
            })
            .collect();

        let (g, christoffel) = match (s.mode, &s.metric) {
            (Mode::Riemannian, Some(metric)) => {
                let g = metric.clone();
                let g_inv = symmat::inverse(&g);
                let mut gamma = vec![vec![vec![Expr::zero(); n]; n]; n];
                for i in 0..n {
                    #[allow(clippy::needless_range_loop)]
                    for j in 0..n {
                        for k in 0..n {
                            let mut s = Expr::zero();
                            for l in 0..n {
                                s = s + Expr::rat(1, 2)
                                    * g_inv[i][l].clone()
                                    * (g[l][j].diff(Var::q(k)).clone() + g[l][k].diff(Var::q(j))
                                        - g[j][k].diff(Var::q(l)));
                            }
                            gamma[i][j][k] = s;
                        }
                    }
                }
                (g, Some(gamma))
            }
            _ => (hessian.clone(), None),
        };
        let g_inv = symmat::inverse(&g);

        let mut data = ConnectionData {
            n,
            riemannian: s.mode == Mode::Riemannian,
            lagrangian,
            energy,
            hessian,
            g,
            g_inv,
            theta,
            forces,
            conn,
            berwald,
            christoffel,
            curvature: Vec::new(),
            phi: Vec::new(),
            riemann: None,
        };

        // Curvature: vertical part of [H_i, H_j].
        let mut curvature = vec![vec![vec![Expr::zero(); n]; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let e = data.h_apply(j, &data.conn[k][i]) - data.h_apply(i, &data.conn[k][j]);
                    curvature[k][i][j] = e.clone();
                    curvature[k][j][i] = -e;
                }
            }
        }
        data.curvature = curvature;

        // Jacobi endomorphism by decomposing [Gamma, H_j] in the adapted
        // frame; the horizontal part reproduces nabla on basic fields.
        let chart = Chart::tangent(n);
        let gamma_field = data.gamma_field();
        let mut phi = symmat::zero(n);
        for j in 0..n {
            let hj = data.h_field(j);
            let br = bracket(&chart, &gamma_field, &hj);
            for k in 0..n {
                let mut vertical = br[n + k].clone();
                for m in 0..n {
                    vertical = vertical + data.conn[k][m].clone() * br[m].clone();
                }
                phi[k][j] = vertical;
            }
        }
        data.phi = phi;

        if let Some(gamma) = &data.christoffel {
            // R^i_ljk = d_j Gamma^i_kl - d_k Gamma^i_jl
            //           + Gamma^i_jm Gamma^m_kl - Gamma^i_km Gamma^m_jl
            let mut riemann = vec![vec![vec![vec![Expr::zero(); n]; n]; n]; n];
            for i in 0..n {
                for l in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let mut e =
                                gamma[i][k][l].diff(Var::q(j)) - gamma[i][j][l].diff(Var::q(k));
                            for m in 0..n {
                                e = e + gamma[i][j][m].clone() * gamma[m][k][l].clone()
                                    - gamma[i][k][m].clone() * gamma[m][j][l].clone();
                            }
                            riemann[i][l][j][k] = e;
                        }
                    }
                }
            }
            data.riemann = Some(riemann);
        }

        Ok(data)
    }

    /// Horizontal frame derivative H_k = d/dq^k - Gamma^m_k d/du^m.
    pub fn h_apply(&self, k: usize, e: &Expr) -> Expr {
        let mut out = e.diff(Var::q(k));
        for m in 0..self.n {
            out = out - self.conn[m][k].clone() * e.diff(Var::u(m));
        }
        out
    }

    /// Apply the second-order field Gamma = u^i d/dq^i + f^i d/du^i.
    pub fn gamma_apply(&self, e: &Expr) -> Expr {
        let mut out = Expr::zero();
        for i in 0..self.n {
            out = out + Expr::u(i) * e.diff(Var::q(i)) + self.forces[i].clone() * e.diff(Var::u(i));
        }
        out
    }

    /// Gamma as a vector field on TQ (coordinate components).
    pub fn gamma_field(&self) -> Vec<Expr> {
        let mut v: Vec<Expr> = (0..self.n).map(Expr::u).collect();
        v.extend(self.forces.iter().cloned());
        v
    }

    /// H_j as a vector field on TQ.
    pub fn h_field(&self, j: usize) -> Vec<Expr> {
        let n = self.n;
        let mut v = vec![Expr::zero(); 2 * n];
        v[j] = Expr::one();
        for m in 0..n {
            v[n + m] = -self.conn[m][j].clone();
        }
        v
    }

    /// Horizontal covariant differential: adds one covariant slot in front
    /// of the existing covariant indices (the derivative direction).
    pub fn dh_t(&self, t: &TauField) -> TauField {
        let n = self.n;
        TauField::from_fn(n, t.up, t.down + 1, |idx| {
            let ups = &idx[..t.up];
            let k = idx[t.up];
            let downs = &idx[t.up + 1..];
            let mut orig: Vec<usize> = ups.to_vec();
            orig.extend_from_slice(downs);
            let mut e = self.h_apply(k, t.get(&orig));
            for (slot, &ia) in ups.iter().enumerate() {
                for m in 0..n {
                    let mut mi = orig.clone();
                    mi[slot] = m;
                    e = e + self.berwald[ia][k][m].clone() * t.get(&mi).clone();
                }
            }
            for (slot, &jb) in downs.iter().enumerate() {
                for m in 0..n {
                    let mut mi = orig.clone();
                    mi[t.up + slot] = m;
                    e = e - self.berwald[m][k][jb].clone() * t.get(&mi).clone();
                }
            }
            e
        })
    }

    /// Vertical covariant differential (trivial vertical coefficients).
    pub fn dv_t(&self, t: &TauField) -> TauField {
        let n = self.n;
        TauField::from_fn(n, t.up, t.down + 1, |idx| {
            let ups = &idx[..t.up];
            let k = idx[t.up];
            let downs = &idx[t.up + 1..];
            let mut orig: Vec<usize> = ups.to_vec();
            orig.extend_from_slice(downs);
            t.get(&orig).diff(Var::u(k))
        })
    }

    /// Dynamical covariant derivative nabla (acts like Gamma on functions).
    pub fn nabla_t(&self, t: &TauField) -> TauField {
        let n = self.n;
        TauField::from_fn(n, t.up, t.down, |idx| {
            let mut e = self.gamma_apply(t.get(idx));
            for (slot, &ia) in idx[..t.up].iter().enumerate() {
                for m in 0..n {
                    let mut mi = idx.to_vec();
                    mi[slot] = m;
                    e = e + self.conn[ia][m].clone() * t.get(&mi).clone();
                }
            }
            for (slot, &jb) in idx[t.up..].iter().enumerate() {
                for m in 0..n {
                    let mut mi = idx.to_vec();
                    mi[t.up + slot] = m;
                    e = e - t.get(&mi).clone() * self.conn[m][jb].clone();
                }
            }
            e
        })
    }

    /// Horizontal exterior derivative of a 1-form along the projection:
    /// `(d^h alpha)_jk = H_j(alpha_k) - H_k(alpha_j)` (Berwald terms cancel).
    pub fn dh_one_form(&self, alpha: &[Expr]) -> EMat {
        let n = self.n;
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| self.h_apply(j, &alpha[k]) - self.h_apply(k, &alpha[j]))
                    .collect()
            })
            .collect()
    }

    /// `d^h` of a (1,1) field: `(d^h A)^i_jk = (D^H_j A)^i_k - (D^H_k A)^i_j`.
    pub fn dh_of_11(&self, a: &TauField) -> Vec<Vec<Vec<Expr>>> {
        assert_eq!((a.up, a.down), (1, 1));
        let n = self.n;
        let da = self.dh_t(a); // [i][deriv][col]
        let mut out = vec![vec![vec![Expr::zero(); n]; n]; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i][j][k] = da.get(&[i, j, k]).clone() - da.get(&[i, k, j]).clone();
                }
            }
        }
        out
    }

    /// `d^v` of a (1,1) field.
    pub fn dv_of_11(&self, a: &TauField) -> Vec<Vec<Vec<Expr>>> {
        assert_eq!((a.up, a.down), (1, 1));
        let n = self.n;
        let da = self.dv_t(a);
        let mut out = vec![vec![vec![Expr::zero(); n]; n]; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i][j][k] = da.get(&[i, j, k]).clone() - da.get(&[i, k, j]).clone();
                }
            }
        }
        out
    }

    /// Classical covariant derivative index convention for basic (1,1)
    /// fields: `J^i_{j|k}` = component `[i][k][j]` of `dh_t` (derivative
    /// slot first among the covariant indices).
    pub fn classical_covd_11(&self, j_mat: &EMat) -> Vec<Vec<Vec<Expr>>> {
        let n = self.n;
        let t = TauField::mat11(n, j_mat);
        let d = self.dh_t(&t);
        let mut out = vec![vec![vec![Expr::zero(); n]; n]; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    // out[i][jj][k] = J^i_{jj|k}
                    out[i][jj][k] = d.get(&[i, k, jj]).clone();
                }
            }
        }
        out
    }
}
