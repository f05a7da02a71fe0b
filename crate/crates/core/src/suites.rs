//! The named verification suites: `connection`, `lifts`, `torsion`, `sck`,
//! `eigen`, and `all`. Each check evaluates one identity over the sample
//! set plus the fixed probe point and reports its maximal residual; checks
//! whose hypotheses a scenario does not meet come back not-applicable, and
//! scenarios may declare expected-nonzero checks whose verdict is judged at
//! the probe point instead.

use std::cell::OnceCell;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{Expr, Point, Var};
use crate::geometry::{probe_point, SampleError, Scenario};
use crate::lifts::{self, Lifts};
use crate::report::{CheckResult, Verdict, WorstPoint};
use crate::sck;
use crate::smalllin::{LinError, Mat};
use crate::sode::{ConnectionData, SodeError, TauField};
use crate::symmat::{self, EMat};
use crate::tensor_calc::{self, Chart, Ten3};

/// Residual above which an expected-nonzero check counts as genuinely
/// violated (the gap up to the pass tolerance guards against classifying
/// rounding noise either way).
pub const NEGATIVE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum SetupError {
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Sode(#[from] SodeError),
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("numeric failure in check {check}: {message}")]
    Numeric { check: String, message: String },
}

fn numeric(check: &str, e: impl std::fmt::Display) -> SuiteError {
    SuiteError::Numeric {
        check: check.to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Connection,
    Lifts,
    Torsion,
    Sck,
    Eigen,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Suite, String> {
        match s {
            "connection" => Ok(Suite::Connection),
            "lifts" => Ok(Suite::Lifts),
            "torsion" => Ok(Suite::Torsion),
            "sck" => Ok(Suite::Sck),
            "eigen" => Ok(Suite::Eigen),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected connection|lifts|torsion|sck|eigen|all)"
            )),
        }
    }
}

/// Everything a suite run needs, built once per scenario. The expensive
/// symbolic tensors are shared lazily between checks.
pub struct Workspace {
    pub scenario: Scenario,
    pub conn: ConnectionData,
    pub lifts: Lifts,
    pub samples: Vec<Point>,
    pub probe: Point,
    lgam_r: OnceCell<EMat>,
    n_j: OnceCell<Ten3>,
    n_r: OnceCell<Ten3>,
    nabla_j: OnceCell<EMat>,
}

struct Scan {
    max: f64,
    worst: Point,
    probe: f64,
}

impl Workspace {
    pub fn new(scenario: Scenario) -> Result<Workspace, SetupError> {
        let samples = scenario.sample()?.points;
        let conn = ConnectionData::build(&scenario)?;
        let lifts = Lifts::build(&scenario, &conn);
        let probe = probe_point(scenario.n);
        Ok(Workspace {
            scenario,
            conn,
            lifts,
            samples,
            probe,
            lgam_r: OnceCell::new(),
            n_j: OnceCell::new(),
            n_r: OnceCell::new(),
            nabla_j: OnceCell::new(),
        })
    }

    fn points(&self) -> Vec<&Point> {
        let mut pts: Vec<&Point> = self.samples.iter().collect();
        pts.push(&self.probe);
        pts
    }

    pub fn lgam_r(&self) -> &EMat {
        self.lgam_r.get_or_init(|| {
            let chart = Chart::tangent(self.scenario.n);
            tensor_calc::lie_derivative_11(&chart, &self.conn.gamma_field(), &self.lifts.r_closed)
        })
    }

    pub fn n_j(&self) -> &Ten3 {
        self.n_j
            .get_or_init(|| tensor_calc::nijenhuis(&Chart::base(self.scenario.n), &self.scenario.j))
    }

    pub fn n_r(&self) -> &Ten3 {
        self.n_r.get_or_init(|| {
            tensor_calc::nijenhuis(&Chart::tangent(self.scenario.n), &self.lifts.r_closed)
        })
    }

    pub fn nabla_j(&self) -> &EMat {
        self.nabla_j.get_or_init(|| {
            self.conn
                .nabla_t(&TauField::mat11(self.scenario.n, &self.scenario.j))
                .to_mat()
        })
    }

    fn tol(&self) -> f64 {
        self.scenario.tolerance()
    }

    /// Max |expr| over samples + probe, with worst point and probe value.
    fn scan_exprs(&self, check: &str, exprs: &[Expr]) -> Result<Scan, SuiteError> {
        let refs: Vec<&Expr> = exprs.iter().collect();
        let mut max = 0.0f64;
        let mut worst = self.probe.clone();
        let mut probe_val = 0.0f64;
        for p in self.points() {
            let vals = Expr::eval_many(&refs, p).map_err(|e| numeric(check, e))?;
            let here = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if here > max {
                max = here;
                worst = p.clone();
            }
            if std::ptr::eq(p, &self.probe) {
                probe_val = here;
            }
        }
        Ok(Scan {
            max,
            worst,
            probe: probe_val,
        })
    }

    fn scan_pointwise(
        &self,
        mut f: impl FnMut(&Point) -> Result<f64, SuiteError>,
    ) -> Result<Scan, SuiteError> {
        let mut max = 0.0f64;
        let mut worst = self.probe.clone();
        let mut probe_val = 0.0f64;
        for p in self.points() {
            let here = f(p)?;
            if here > max {
                max = here;
                worst = p.clone();
            }
            if std::ptr::eq(p, &self.probe) {
                probe_val = here;
            }
        }
        Ok(Scan {
            max,
            worst,
            probe: probe_val,
        })
    }

    fn residual_check(&self, id: &str, anchor: &str, tol: f64, scan: Scan) -> CheckResult {
        if self.scenario.expect_nonzero.iter().any(|e| e == id) {
            let pass = scan.probe > NEGATIVE_THRESHOLD;
            return CheckResult {
                id: id.to_string(),
                anchor: anchor.to_string(),
                residual: scan.probe,
                tol,
                verdict: if pass { Verdict::Pass } else { Verdict::Fail },
                worst_point: WorstPoint::from(&self.probe),
                expect: Some("nonzero".to_string()),
                reason: None,
            };
        }
        CheckResult {
            id: id.to_string(),
            anchor: anchor.to_string(),
            residual: scan.max,
            tol,
            verdict: if scan.max <= tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            worst_point: WorstPoint::from(&scan.worst),
            expect: None,
            reason: None,
        }
    }

    /// Two-sided equivalence: passes when both sides vanish within `tol` or
    /// both exceed the negative threshold; the reported residual is zero in
    /// the agreeing-nonzero case.
    fn equivalence_check(
        &self,
        id: &str,
        anchor: &str,
        tol: f64,
        lhs: Scan,
        rhs: Scan,
    ) -> CheckResult {
        let (residual, worst) = if lhs.max > NEGATIVE_THRESHOLD && rhs.max > NEGATIVE_THRESHOLD {
            (0.0, self.probe.clone())
        } else {
            (
                lhs.max.max(rhs.max),
                if lhs.max >= rhs.max {
                    lhs.worst
                } else {
                    rhs.worst
                },
            )
        };
        CheckResult {
            id: id.to_string(),
            anchor: anchor.to_string(),
            residual,
            tol,
            verdict: if residual <= tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            worst_point: WorstPoint::from(&worst),
            expect: None,
            reason: None,
        }
    }

    fn na(&self, id: &str, anchor: &str, reason: &str) -> CheckResult {
        CheckResult {
            id: id.to_string(),
            anchor: anchor.to_string(),
            residual: -1.0,
            tol: self.tol(),
            verdict: Verdict::NotApplicable,
            worst_point: WorstPoint::from(&self.probe),
            expect: None,
            reason: Some(reason.to_string()),
        }
    }

    fn flatten_mat(m: &EMat) -> Vec<Expr> {
        m.iter().flat_map(|r| r.iter().cloned()).collect()
    }

    fn flatten_ten3(t: &Ten3) -> Vec<Expr> {
        t.iter()
            .flat_map(|a| a.iter().flat_map(|b| b.iter().cloned()))
            .collect()
    }

    fn solve_r(&self, check: &str, p: &Point) -> Result<Mat, SuiteError> {
        self.lifts.solve_r_at(p).map_err(|e| numeric(check, e))
    }
}

fn mat_diff_exprs(a: &EMat, b: &EMat) -> Vec<Expr> {
    let mut out = Vec::new();
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            out.push(x.clone() - y.clone());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// connection suite
// ---------------------------------------------------------------------------

pub fn run_connection(ws: &Workspace) -> Result<Vec<CheckResult>, SuiteError> {
    let n = ws.scenario.n;
    let conn = &ws.conn;
    let mut out = Vec::new();

    // energy conservation Gamma(E_L) = 0
    let scan = ws.scan_exprs("connection.energy", &[conn.gamma_apply(&conn.energy)])?;
    out.push(ws.residual_check("connection.energy", "defgamma", 1e-9, scan));

    // covariant derivatives of the canonical field T
    {
        let t = TauField::canonical(n);
        let mut exprs = Vec::new();
        let dv = conn.dv_t(&t);
        let dh = conn.dh_t(&t);
        for i in 0..n {
            for k in 0..n {
                let delta = if i == k { Expr::one() } else { Expr::zero() };
                exprs.push(dv.get(&[i, k]).clone() - delta);
            }
        }
        if conn.riemannian {
            let nab = conn.nabla_t(&t);
            for i in 0..n {
                exprs.push(nab.get(&[i]).clone());
                for k in 0..n {
                    exprs.push(dh.get(&[i, k]).clone());
                }
            }
        }
        let scan = ws.scan_exprs("connection.covT", &exprs)?;
        out.push(ws.residual_check("connection.covT", "covT", ws.tol(), scan));
    }

    // commutator [nabla, D^V_X] = D^V_{nabla X} - D^H_X on F = L
    {
        let mut exprs = Vec::new();
        for j in 0..n {
            let dv_l = conn.lagrangian.diff(Var::u(j));
            let term1 = conn.gamma_apply(&dv_l);
            let term2 = conn.gamma_apply(&conn.lagrangian).diff(Var::u(j));
            let mut term3 = Expr::zero();
            for i in 0..n {
                term3 = term3 + conn.conn[i][j].clone() * conn.lagrangian.diff(Var::u(i));
            }
            let term4 = conn.h_apply(j, &conn.lagrangian);
            exprs.push(term1 - term2 - term3 + term4);
        }
        let scan = ws.scan_exprs("connection.deldv", &exprs)?;
        out.push(ws.residual_check("connection.deldv", "deldv", ws.tol(), scan));
    }

    // Hessian symmetry
    {
        let h = &conn.hessian;
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                exprs.push(h[i][j].clone() - h[j][i].clone());
            }
        }
        let scan = ws.scan_exprs("connection.hessian_sym", &exprs)?;
        out.push(ws.residual_check("connection.hessian_sym", "dvdvL", 1e-12, scan));
    }

    if conn.riemannian {
        // Hessian reproduces the declared metric
        let scan = ws.scan_exprs(
            "connection.hessian_metric",
            &mat_diff_exprs(&conn.hessian, &conn.g),
        )?;
        out.push(ws.residual_check("connection.hessian_metric", "dvdvL:riemannian", 1e-10, scan));

        // Gamma^i_j = Gamma^i_jk u^k and Berwald = Christoffel
        let gamma = conn.christoffel.as_ref().unwrap();
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut s = conn.conn[i][j].clone();
                for k in 0..n {
                    s = s - gamma[i][j][k].clone() * Expr::u(k);
                }
                exprs.push(s);
                for k in 0..n {
                    exprs.push(conn.berwald[i][j][k].clone() - gamma[i][j][k].clone());
                }
            }
        }
        let scan = ws.scan_exprs("connection.lcconn", &exprs)?;
        out.push(ws.residual_check("connection.lcconn", "LCconn", 1e-10, scan));

        // metric compatibility D^H g = 0
        let g_field = TauField::from_fn(n, 0, 2, |idx| conn.g[idx[0]][idx[1]].clone());
        let dg = conn.dh_t(&g_field);
        let scan = ws.scan_exprs("connection.metric_compat", &dg.comps)?;
        out.push(ws.residual_check("connection.metric_compat", "covder:DHg", 1e-9, scan));

        // Bianchi: cyclic sum of g(curv(X,Y),Z)
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = Expr::zero();
                    for m in 0..n {
                        s = s
                            + conn.curvature[m][i][j].clone() * conn.g[m][k].clone()
                            + conn.curvature[m][j][k].clone() * conn.g[m][i].clone()
                            + conn.curvature[m][k][i].clone() * conn.g[m][j].clone();
                    }
                    exprs.push(s);
                }
            }
        }
        let scan = ws.scan_exprs("connection.bianchi", &exprs)?;
        out.push(ws.residual_check("connection.bianchi", "Bianchi", 1e-8, scan));
    }

    // d^v Phi = 3 curv (all modes), plus Phi(T) = 0 and the Riemann-tensor
    // contractions in riemannian mode
    {
        let mut exprs = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let dv = conn.phi[k][j].diff(Var::u(i)) - conn.phi[k][i].diff(Var::u(j));
                    exprs.push(dv - Expr::int(3) * conn.curvature[k][i][j].clone());
                }
            }
        }
        if conn.riemannian {
            for k in 0..n {
                let mut s = Expr::zero();
                for j in 0..n {
                    s = s + conn.phi[k][j].clone() * Expr::u(j);
                }
                exprs.push(s);
            }
        }
        let scan = ws.scan_exprs("connection.phiR", &exprs)?;
        out.push(ws.residual_check("connection.phiR", "PhiR", 1e-8, scan));
    }

    if conn.riemannian {
        let riemann = conn.riemann.as_ref().unwrap();
        // Phi^i_j = R^i_ljk u^k u^l and curv^k_ij = u^l R^k_lji
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let mut s = conn.phi[i][j].clone();
                for k in 0..n {
                    for l in 0..n {
                        s = s - riemann[i][l][j][k].clone() * Expr::u(k) * Expr::u(l);
                    }
                }
                exprs.push(s);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = conn.curvature[k][i][j].clone();
                    for l in 0..n {
                        s = s - Expr::u(l) * riemann[k][l][j][i].clone();
                    }
                    exprs.push(s);
                }
            }
        }
        let scan = ws.scan_exprs("connection.coordPhi", &exprs)?;
        out.push(ws.residual_check("connection.coordPhi", "coordPhi", 1e-9, scan));

        // g-symmetry of Phi
        let gphi = symmat::mul(&conn.g, &conn.phi);
        let scan = ws.scan_exprs(
            "connection.phi_gsym",
            &mat_diff_exprs(&gphi, &symmat::transpose(&gphi)),
        )?;
        out.push(ws.residual_check("connection.phi_gsym", "AppA:PhiSym", 1e-8, scan));

        // commutator of horizontal covariant derivatives vs the Riemann tensor
        let scan = ws.scan_exprs("connection.dhdh", &sck::dhdh_commutator_residual(conn))?;
        out.push(ws.residual_check("connection.dhdh", "dhdh", 1e-8, scan));
    }

    // curvature antisymmetry
    {
        let mut exprs = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    exprs.push(conn.curvature[k][i][j].clone() + conn.curvature[k][j][i].clone());
                }
            }
        }
        let scan = ws.scan_exprs("connection.curv_antisym", &exprs)?;
        out.push(ws.residual_check("connection.curv_antisym", "[hh]", 1e-12, scan));
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// lifts suite
// ---------------------------------------------------------------------------

pub fn run_lifts(ws: &Workspace) -> Result<Vec<CheckResult>, SuiteError> {
    let n = ws.scenario.n;
    let conn = &ws.conn;
    let l = &ws.lifts;
    let tq = Chart::tangent(n);
    let mut out = Vec::new();

    let jcs = symmat::mul(&l.jc, &l.s_endo);

    // Lemma 1: (J^c S)^2 = 0 and N_{J^c S} = 0
    let scan = ws.scan_exprs(
        "lifts.lemma1_sq",
        &Workspace::flatten_mat(&symmat::mul(&jcs, &jcs)),
    )?;
    out.push(ws.residual_check("lifts.lemma1_sq", "Lemma1:(JcS)^2", ws.tol(), scan));
    let scan = ws.scan_exprs(
        "lifts.lemma1_torsion",
        &Workspace::flatten_ten3(&tensor_calc::nijenhuis(&tq, &jcs)),
    )?;
    out.push(ws.residual_check("lifts.lemma1_torsion", "Lemma1:N_JcS", ws.tol(), scan));

    // [J^c, S] = 0 in the Frolicher-Nijenhuis sense
    let scan = ws.scan_exprs(
        "lifts.fn_jc_s",
        &Workspace::flatten_ten3(&tensor_calc::fn_bracket(&tq, &l.jc, &l.s_endo)),
    )?;
    out.push(ws.residual_check("lifts.fn_jc_s", "JcS", ws.tol(), scan));

    // d_S d_{J^c} L = -d_{J^c} d_S L
    {
        let a = tensor_calc::d_a_oneform(
            &tq,
            &l.s_endo,
            &tensor_calc::d_a_function(&tq, &l.jc, &conn.lagrangian),
        );
        let b = tensor_calc::d_a_oneform(
            &tq,
            &l.jc,
            &tensor_calc::d_a_function(&tq, &l.s_endo, &conn.lagrangian),
        );
        let exprs: Vec<Expr> = a
            .components()
            .iter()
            .zip(b.components())
            .map(|(x, y)| x.clone() + y.clone())
            .collect();
        let scan = ws.scan_exprs("lifts.dSdJc", &exprs)?;
        out.push(ws.residual_check("lifts.dSdJc", "dSdJc", ws.tol(), scan));
    }

    // defining relations of the complete lift
    {
        let mut exprs = Vec::new();
        let mut fields: Vec<Vec<Expr>> = Vec::new();
        for j in 0..n {
            let mut e = vec![Expr::zero(); n];
            e[j] = Expr::one();
            fields.push(e);
        }
        fields.push((0..n).map(|i| Expr::q((i + 1) % n)).collect());
        for x in &fields {
            let jx = symmat::apply(&ws.scenario.j, x);
            let lhs_c = symmat::apply(&l.jc, &lifts::complete_lift_vec(n, x));
            let rhs_c = lifts::complete_lift_vec(n, &jx);
            let lhs_v = symmat::apply(&l.jc, &lifts::vertical_lift_vec(n, x));
            let rhs_v = lifts::vertical_lift_vec(n, &jx);
            for a in 0..2 * n {
                exprs.push(lhs_c[a].clone() - rhs_c[a].clone());
                exprs.push(lhs_v[a].clone() - rhs_v[a].clone());
            }
        }
        let scan = ws.scan_exprs("lifts.defJc", &exprs)?;
        out.push(ws.residual_check("lifts.defJc", "defJc", ws.tol(), scan));
    }

    // J^c(X^H) = (JX)^H + (nabla J X)^V in the adapted frame
    {
        let nabla_j = ws.nabla_j();
        let mut exprs = Vec::new();
        for j in 0..n {
            let hj = conn.h_field(j);
            let lhs = symmat::apply(&l.jc, &hj);
            // rhs: (J e_j)^H + (nabla J e_j)^V
            let jx: Vec<Expr> = (0..n).map(|i| ws.scenario.j[i][j].clone()).collect();
            let mut rhs = vec![Expr::zero(); 2 * n];
            for i in 0..n {
                rhs[i] = jx[i].clone();
                let mut v = nabla_j[i][j].clone();
                for m in 0..n {
                    v = v - conn.conn[i][m].clone() * jx[m].clone();
                }
                rhs[n + i] = v;
            }
            for a in 0..2 * n {
                exprs.push(lhs[a].clone() - rhs[a].clone());
            }
        }
        let scan = ws.scan_exprs("lifts.jc_adapted", &exprs)?;
        out.push(ws.residual_check("lifts.jc_adapted", "Jcxh", ws.tol(), scan));
    }

    // L_{X^c} J^c = (L_X J)^c for coordinate X
    {
        let q_chart = Chart::base(n);
        let mut exprs = Vec::new();
        for j in 0..n {
            let mut x = vec![Expr::zero(); n];
            x[j] = Expr::one();
            let xc = lifts::complete_lift_vec(n, &x);
            let lhs = tensor_calc::lie_derivative_11(&tq, &xc, &l.jc);
            let lie_q = tensor_calc::lie_derivative_11(&q_chart, &x, &ws.scenario.j);
            let rhs = lifts::complete_lift_11(n, &lie_q);
            exprs.extend(mat_diff_exprs(&lhs, &rhs));
        }
        let scan = ws.scan_exprs("lifts.lieJc", &exprs)?;
        out.push(ws.residual_check("lifts.lieJc", "lieJc", ws.tol(), scan));
    }

    // Kahler-lift pairings of omega_L and omega_1 against g and gJ
    {
        let om = l.omega_l.to_matrix();
        let om1 = l.omega_1.to_matrix();
        let gj = symmat::mul(&conn.g, &ws.scenario.j);
        let mut exprs = Vec::new();
        let pair_vh = |w: &EMat, i: usize, j: usize| -> Expr {
            // w(V_i, H_j) = w[n+i][j] - sum_m Gamma^m_j w[n+i][n+m]
            let mut s = w[n + i][j].clone();
            for m in 0..n {
                s = s - conn.conn[m][j].clone() * w[n + i][n + m].clone();
            }
            s
        };
        let pair_hh = |w: &EMat, i: usize, j: usize| -> Expr {
            let mut s = w[i][j].clone();
            for m in 0..n {
                s = s
                    - conn.conn[m][j].clone() * w[i][n + m].clone()
                    - conn.conn[m][i].clone() * w[n + m][j].clone();
                for mm in 0..n {
                    s = s + conn.conn[m][i].clone()
                        * conn.conn[mm][j].clone()
                        * w[n + m][n + mm].clone();
                }
            }
            s
        };
        for i in 0..n {
            for j in 0..n {
                exprs.push(pair_vh(&om, i, j) - conn.g[i][j].clone());
                exprs.push(pair_vh(&om1, i, j) - gj[i][j].clone());
                exprs.push(pair_hh(&om, i, j));
                exprs.push(om[n + i][n + j].clone());
                exprs.push(om1[n + i][n + j].clone());
            }
        }
        let scan = ws.scan_exprs("lifts.kahler", &exprs)?;
        out.push(ws.residual_check("lifts.kahler", "gk1gk2+omega1vh", ws.tol(), scan));

        // omega_1(H_i, H_j) = d^h(J theta_L)(X_i, X_j)
        let alpha: Vec<Expr> = (0..n)
            .map(|jj| {
                let mut s = Expr::zero();
                for m in 0..n {
                    s = s + conn.theta[m].clone() * ws.scenario.j[m][jj].clone();
                }
                s
            })
            .collect();
        let w = conn.dh_one_form(&alpha);
        let mut exprs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                exprs.push(pair_hh(&om1, i, j) - w[i][j].clone());
            }
        }
        let scan = ws.scan_exprs("lifts.omega1_hh", &exprs)?;
        out.push(ws.residual_check("lifts.omega1_hh", "omega1hh", ws.tol(), scan));
    }

    // closedness of both two-forms
    {
        let d1 = tensor_calc::ext_deriv(&tq, &l.omega_l);
        let d2 = tensor_calc::ext_deriv(&tq, &l.omega_1);
        let mut exprs = d1.components().to_vec();
        exprs.extend_from_slice(d2.components());
        let scan = ws.scan_exprs("lifts.closed", &exprs)?;
        out.push(ws.residual_check("lifts.closed", "omega1:closed", 1e-9, scan));
    }

    // symmetry of R with respect to omega_L
    {
        let scan = ws.scan_pointwise(|p| {
            let omega =
                lifts::eval_form_matrix(&l.omega_l, p).map_err(|e| numeric("lifts.rsym", e))?;
            let r = ws.solve_r("lifts.rsym", p)?;
            Ok(r.transpose().mul(&omega).sub(&omega.mul(&r)).max_abs())
        })?;
        out.push(ws.residual_check("lifts.rsym", "Rsymmetry", ws.tol(), scan));
    }

    // Proposition 1 frame structure of R
    {
        let scan = ws.scan_pointwise(|p| {
            let r = ws.solve_r("lifts.prop1", p)?;
            let (pm, pinv) = l
                .adapted_frame_at(conn, p)
                .map_err(|e| numeric("lifts.prop1", e))?;
            let rad = pinv.mul(&r).mul(&pm);
            let jm = symmat::eval_mat(&ws.scenario.j, p).map_err(|e| numeric("lifts.prop1", e))?;
            let jb = symmat::eval_mat(&l.jbar, p).map_err(|e| numeric("lifts.prop1", e))?;
            let um = symmat::eval_mat(&l.u_field, p).map_err(|e| numeric("lifts.prop1", e))?;
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((rad[(i, j)] - jm[(i, j)]).abs());
                    worst = worst.max(rad[(i, n + j)].abs());
                    worst = worst.max((rad[(n + i, j)] - um[(i, j)]).abs());
                    worst = worst.max((rad[(n + i, n + j)] - jb[(i, j)]).abs());
                }
            }
            Ok(worst)
        })?;
        out.push(ws.residual_check("lifts.prop1", "Prop1:Rvx+Rhx", ws.tol(), scan));
    }

    // skew-symmetry of U: its g-transpose is -U
    {
        let ubar = lifts::transpose_wrt_g(&l.u_field, &conn.g, &conn.g_inv);
        let scan = ws.scan_exprs(
            "lifts.ubar",
            &Workspace::flatten_mat(&symmat::add(&ubar, &l.u_field)),
        )?;
        out.push(ws.residual_check("lifts.ubar", "Prop1:Ubar=-U", ws.tol(), scan));
    }

    // closed-form R against the generic two-form solve
    {
        let scan = ws.scan_pointwise(|p| {
            let generic = ws.solve_r("lifts.closed_form", p)?;
            let closed =
                symmat::eval_mat(&l.r_closed, p).map_err(|e| numeric("lifts.closed_form", e))?;
            Ok(generic.sub(&closed).max_abs())
        })?;
        let anchor = if conn.riemannian {
            "Rcoord1"
        } else {
            "Rcoord2:pullback-form"
        };
        out.push(ws.residual_check("lifts.closed_form", anchor, 1e-9, scan));
    }

    // Proposition 6: Legendre pullback of the cotangent lift equals R
    {
        let scan = ws.scan_pointwise(|p| {
            let generic = ws.solve_r("lifts.legendre", p)?;
            let pulled = l
                .legendre_pullback_at(&ws.scenario, conn, p)
                .map_err(|e| numeric("lifts.legendre", e))?;
            Ok(generic.sub(&pulled).max_abs())
        })?;
        out.push(ws.residual_check("lifts.legendre", "Prop6:Leg-pullback", ws.tol(), scan));
    }

    if conn.riemannian {
        // theta_L = T . g, nabla theta_L = 0, d^h L = 0
        let mut exprs = Vec::new();
        for i in 0..n {
            let mut s = conn.theta[i].clone();
            for k in 0..n {
                s = s - Expr::u(k) * conn.g[k][i].clone();
            }
            exprs.push(s);
        }
        let nab_theta = conn.nabla_t(&TauField::one_form(n, conn.theta.clone()));
        exprs.extend(nab_theta.comps.iter().cloned());
        for j in 0..n {
            exprs.push(conn.h_apply(j, &conn.lagrangian));
        }
        let scan = ws.scan_exprs("lifts.theta_riem", &exprs)?;
        out.push(ws.residual_check("lifts.theta_riem", "newthetaL+dhLzero", ws.tol(), scan));
    }

    // Proposition 2: R = J^c iff J = Jbar and U = nabla J
    {
        let lhs = ws.scan_pointwise(|p| {
            let r = ws.solve_r("lifts.prop2", p)?;
            let jc = symmat::eval_mat(&l.jc, p).map_err(|e| numeric("lifts.prop2", e))?;
            Ok(r.sub(&jc).max_abs())
        })?;
        let mut rhs_exprs = mat_diff_exprs(&ws.scenario.j, &l.jbar);
        rhs_exprs.extend(mat_diff_exprs(&l.u_field, ws.nabla_j()));
        let rhs = ws.scan_exprs("lifts.prop2", &rhs_exprs)?;
        out.push(ws.equivalence_check("lifts.prop2", "Prop2", ws.tol(), lhs, rhs));
    }

    // Proposition 3: RS = SR iff J = Jbar
    {
        let s_num = Mat::from_fn(
            2 * n,
            2 * n,
            |r, c| if r == c + n && c < n { 1.0 } else { 0.0 },
        );
        let lhs = ws.scan_pointwise(|p| {
            let r = ws.solve_r("lifts.prop3", p)?;
            Ok(r.mul(&s_num).sub(&s_num.mul(&r)).max_abs())
        })?;
        let rhs = ws.scan_exprs("lifts.prop3", &mat_diff_exprs(&ws.scenario.j, &l.jbar))?;
        out.push(ws.equivalence_check("lifts.prop3", "Prop3", ws.tol(), lhs, rhs));
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// torsion suite
// ---------------------------------------------------------------------------

pub fn run_torsion(ws: &Workspace) -> Result<Vec<CheckResult>, SuiteError> {
    let n = ws.scenario.n;
    let conn = &ws.conn;
    let l = &ws.lifts;
    let tq = Chart::tangent(n);
    let mut out = Vec::new();

    let nj_scan = ws.scan_exprs("torsion.nijenhuis_J", &Workspace::flatten_ten3(ws.n_j()))?;
    out.push(ws.residual_check("torsion.nijenhuis_J", "NJ", ws.tol(), nj_scan));

    let nr_scan = ws.scan_exprs("torsion.nijenhuis_R", &Workspace::flatten_ten3(ws.n_r()))?;
    out.push(ws.residual_check("torsion.nijenhuis_R", "Prop7:NR", ws.tol(), nr_scan));

    // Proposition 7: N_R = 0 iff N_J = 0
    {
        let lhs = ws.scan_exprs("torsion.prop7", &Workspace::flatten_ten3(ws.n_r()))?;
        let rhs = ws.scan_exprs("torsion.prop7", &Workspace::flatten_ten3(ws.n_j()))?;
        out.push(ws.equivalence_check("torsion.prop7", "Prop7", ws.tol(), lhs, rhs));
    }

    // cross-check: [R, R] = 2 N_R
    {
        let fnrr = tensor_calc::fn_bracket(&tq, &l.r_closed, &l.r_closed);
        let nr = ws.n_r();
        let mut exprs = Vec::new();
        for k in 0..2 * n {
            for i in 0..2 * n {
                for j in 0..2 * n {
                    exprs.push(fnrr[k][i][j].clone() - Expr::int(2) * nr[k][i][j].clone());
                }
            }
        }
        let scan = ws.scan_exprs("torsion.fn_rr", &exprs)?;
        out.push(ws.residual_check("torsion.fn_rr", "FN:[R,R]=2NR", ws.tol(), scan));
    }

    // Lemma 2: the antisymmetrized D^H torsion expression vanishes exactly
    // when N_J does
    {
        let dhj = conn.dh_t(&TauField::mat11(n, &ws.scenario.j)); // [i][deriv][col]
        let mut b = vec![vec![vec![Expr::zero(); n]; n]; n];
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let mut s = Expr::zero();
                    for m in 0..n {
                        s = s + ws.scenario.j[m][x].clone() * dhj.get(&[i, m, y]).clone()
                            - ws.scenario.j[i][m].clone() * dhj.get(&[m, x, y]).clone();
                    }
                    b[i][x][y] = s;
                }
            }
        }
        let mut exprs = Vec::new();
        for i in 0..n {
            for x in 0..n {
                for y in 0..n {
                    exprs.push(b[i][x][y].clone() - b[i][y][x].clone());
                }
            }
        }
        let lhs = ws.scan_exprs("torsion.lemma2", &exprs)?;
        let rhs = ws.scan_exprs("torsion.lemma2", &Workspace::flatten_ten3(ws.n_j()))?;
        out.push(ws.equivalence_check("torsion.lemma2", "NJzero", ws.tol(), lhs, rhs));
    }

    // Proposition 4 (requires J = Jbar): [R,S] = 0 iff d^v U = d^h J
    {
        let jsym = ws.scan_exprs("torsion.prop4", &mat_diff_exprs(&ws.scenario.j, &l.jbar))?;
        if jsym.max > ws.tol() {
            out.push(ws.na(
                "torsion.prop4",
                "Prop4",
                "J is not symmetric with respect to g",
            ));
        } else {
            let rs = tensor_calc::fn_bracket(&tq, &l.r_closed, &l.s_endo);
            let lhs = ws.scan_exprs("torsion.prop4", &Workspace::flatten_ten3(&rs))?;
            let dvu = conn.dv_of_11(&TauField::mat11(n, &l.u_field));
            let dhj = conn.dh_of_11(&TauField::mat11(n, &ws.scenario.j));
            let mut exprs = Vec::new();
            for i in 0..n {
                for x in 0..n {
                    for y in 0..n {
                        exprs.push(dvu[i][x][y].clone() - dhj[i][x][y].clone());
                    }
                }
            }
            let rhs = ws.scan_exprs("torsion.prop4", &exprs)?;
            out.push(ws.equivalence_check("torsion.prop4", "Prop4", ws.tol(), lhs, rhs));
        }
    }

    // Proposition 5 decomposition of L_Gamma R on the adapted frame
    {
        let lgam = ws.lgam_r();
        let nabla_jbar = conn.nabla_t(&TauField::mat11(n, &l.jbar)).to_mat();
        let nabla_u = conn.nabla_t(&TauField::mat11(n, &l.u_field)).to_mat();
        let phij = symmat::mul(&conn.phi, &ws.scenario.j);
        let jbarphi = symmat::mul(&l.jbar, &conn.phi);
        let scan = ws.scan_pointwise(|p| {
            let m = symmat::eval_mat(lgam, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let gamma =
                symmat::eval_mat(&conn.conn, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let jm = symmat::eval_mat(&ws.scenario.j, p)
                .map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let jb =
                symmat::eval_mat(&l.jbar, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let um =
                symmat::eval_mat(&l.u_field, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let njb =
                symmat::eval_mat(&nabla_jbar, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let nj = symmat::eval_mat(ws.nabla_j(), p)
                .map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let nu =
                symmat::eval_mat(&nabla_u, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let pj = symmat::eval_mat(&phij, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let jp =
                symmat::eval_mat(&jbarphi, p).map_err(|e| numeric("torsion.prop5_decomp", e))?;
            let mut worst = 0.0f64;
            for j in 0..n {
                // vertical frame argument V_j
                let mut v = vec![0.0; 2 * n];
                v[n + j] = 1.0;
                let w = m.mul_vec(&v);
                for i in 0..n {
                    let hor = w[i];
                    let ver = w[n + i] + (0..n).map(|k| gamma[(i, k)] * w[k]).sum::<f64>();
                    let want_hor = jm[(i, j)] - jb[(i, j)];
                    let want_ver = um[(i, j)] + njb[(i, j)];
                    worst = worst
                        .max((hor - want_hor).abs())
                        .max((ver - want_ver).abs());
                }
                // horizontal frame argument H_j
                let mut v = vec![0.0; 2 * n];
                v[j] = 1.0;
                for k in 0..n {
                    v[n + k] = -gamma[(k, j)];
                }
                let w = m.mul_vec(&v);
                for i in 0..n {
                    let hor = w[i];
                    let ver = w[n + i] + (0..n).map(|k| gamma[(i, k)] * w[k]).sum::<f64>();
                    let want_hor = nj[(i, j)] - um[(i, j)];
                    let want_ver = nu[(i, j)] + pj[(i, j)] - jp[(i, j)];
                    worst = worst
                        .max((hor - want_hor).abs())
                        .max((ver - want_ver).abs());
                }
            }
            Ok(worst)
        })?;
        out.push(ws.residual_check("torsion.prop5_decomp", "lgamR1+lgamR2", ws.tol(), scan));
    }

    // Proposition 5 equivalence: L_Gamma R = 0 iff J = Jbar, U = nabla J = 0,
    // Phi J = J Phi
    {
        let lhs = ws.scan_exprs("torsion.prop5", &Workspace::flatten_mat(ws.lgam_r()))?;
        let mut rhs_exprs = mat_diff_exprs(&ws.scenario.j, &l.jbar);
        rhs_exprs.extend(Workspace::flatten_mat(&l.u_field));
        rhs_exprs.extend(Workspace::flatten_mat(ws.nabla_j()));
        let phij = symmat::mul(&conn.phi, &ws.scenario.j);
        let jphi = symmat::mul(&ws.scenario.j, &conn.phi);
        rhs_exprs.extend(mat_diff_exprs(&phij, &jphi));
        let rhs = ws.scan_exprs("torsion.prop5", &rhs_exprs)?;
        out.push(ws.equivalence_check("torsion.prop5", "Prop5", ws.tol(), lhs, rhs));
    }

    // i_{L_Gamma R} omega_L = -2 d d_R E_L (equivalent to omega_1 closed)
    {
        let om = l.omega_l.to_matrix();
        let lgam = ws.lgam_r();
        // i_A omega as a full matrix: A^T Omega + Omega A
        let ia = symmat::add(
            &symmat::mul(&symmat::transpose(lgam), &om),
            &symmat::mul(&om, lgam),
        );
        let dd = sck::dd_r_energy(conn, &l.r_closed);
        let mut exprs = Vec::new();
        for a in 0..2 * n {
            for b in (a + 1)..2 * n {
                exprs.push(ia[a][b].clone() + Expr::int(2) * dd.get(&[a, b]));
            }
        }
        let scan = ws.scan_exprs("torsion.propCST", &exprs)?;
        out.push(ws.residual_check("torsion.propCST", "propCST", ws.tol(), scan));
    }

    // gauged invariance laws (riemannian, and only when J is special
    // conformal Killing for the scenario's f)
    if conn.riemannian {
        let (f, _) = sck::effective_f(&ws.scenario.j, ws.scenario.f.as_ref());
        let coord = sck::sck_coord_residual(conn, &ws.scenario.j, &f);
        let gate = ws.scan_exprs("torsion.gauging", &coord)?;
        if gate.max <= ws.tol() {
            let g1 = sck::gauging_residual(conn, &l.r_closed, &f);
            let scan = ws.scan_exprs("torsion.gauging", g1.components())?;
            out.push(ws.residual_check("torsion.gauging", "gauging", ws.tol(), scan));
            let g2 = sck::gauging2_residual(conn, ws.lgam_r(), &f);
            let scan = ws.scan_exprs("torsion.gauging2", &Workspace::flatten_mat(&g2))?;
            out.push(ws.residual_check("torsion.gauging2", "gauging2", ws.tol(), scan));
        } else {
            out.push(ws.na(
                "torsion.gauging",
                "gauging",
                "J is not a special conformal Killing tensor for f",
            ));
            out.push(ws.na(
                "torsion.gauging2",
                "gauging2",
                "J is not a special conformal Killing tensor for f",
            ));
        }
    } else {
        out.push(ws.na("torsion.gauging", "gauging", "riemannian mode only"));
        out.push(ws.na("torsion.gauging2", "gauging2", "riemannian mode only"));
    }

    // covariant derivatives of U against the derivative of J (riemannian)
    if conn.riemannian {
        let u_t = TauField::mat11(n, &l.u_field);
        let j_t = TauField::mat11(n, &ws.scenario.j);
        let dv_u = conn.dv_t(&u_t); // [m][z][x]
        let dh_j = conn.dh_t(&j_t); // [m][deriv][col]
        let mut exprs = Vec::new();
        for z in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let mut lhs = Expr::zero();
                    let mut rhs = Expr::zero();
                    for m in 0..n {
                        lhs = lhs + dv_u.get(&[m, z, x]).clone() * conn.g[m][y].clone();
                        rhs = rhs
                            + conn.g[z][m].clone()
                                * (dh_j.get(&[m, x, y]).clone() - dh_j.get(&[m, y, x]).clone());
                    }
                    exprs.push(lhs - rhs);
                }
            }
        }
        let scan = ws.scan_exprs("torsion.dvU", &exprs)?;
        out.push(ws.residual_check("torsion.dvU", "dvU", 1e-7, scan));

        let dh_u = conn.dh_t(&u_t); // [m][z][x]
        let ddj = conn.dh_t(&dh_j); // [m][z][x][y] with x the inner slot
        let mut exprs = Vec::new();
        for z in 0..n {
            for x in 0..n {
                for y in 0..n {
                    let mut lhs = Expr::zero();
                    let mut rhs = Expr::zero();
                    for m in 0..n {
                        lhs = lhs + dh_u.get(&[m, z, x]).clone() * conn.g[m][y].clone();
                        rhs = rhs
                            + conn.theta[m].clone()
                                * (ddj.get(&[m, z, x, y]).clone() - ddj.get(&[m, z, y, x]).clone());
                    }
                    exprs.push(lhs - rhs);
                }
            }
        }
        let scan = ws.scan_exprs("torsion.dhU", &exprs)?;
        out.push(ws.residual_check("torsion.dhU", "dhU", 1e-7, scan));
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// sck suite
// ---------------------------------------------------------------------------

pub fn run_sck(ws: &Workspace) -> Result<Vec<CheckResult>, SuiteError> {
    let n = ws.scenario.n;
    let conn = &ws.conn;
    let l = &ws.lifts;
    let mut out = Vec::new();

    if !conn.riemannian {
        for (id, anchor) in [
            ("sck.gsym", "Thm1:J=Jbar"),
            ("sck.residual_coord", "scKcoord2"),
            ("sck.residual_intrinsic", "scK"),
        ] {
            out.push(ws.na(id, anchor, "riemannian mode only"));
        }
        return Ok(out);
    }

    let j = &ws.scenario.j;
    let (f, _declared) = sck::effective_f(j, ws.scenario.f.as_ref());

    // precondition: J symmetric with respect to g
    let gsym = ws.scan_exprs(
        "sck.gsym",
        &Workspace::flatten_mat(&sck::gsym_residual(conn, j)),
    )?;
    let symmetric = gsym.max <= ws.tol();
    out.push(ws.residual_check("sck.gsym", "Thm1:J=Jbar", ws.tol(), gsym));
    if !symmetric {
        out.push(ws.na(
            "sck.residual_coord",
            "scKcoord2",
            "J is not symmetric with respect to g",
        ));
        out.push(ws.na(
            "sck.residual_intrinsic",
            "scK",
            "J is not symmetric with respect to g",
        ));
        return Ok(out);
    }

    let coord_scan = ws.scan_exprs("sck.residual_coord", &sck::sck_coord_residual(conn, j, &f))?;
    let intrinsic_scan = ws.scan_exprs(
        "sck.residual_intrinsic",
        &Workspace::flatten_mat(&sck::sck_intrinsic_residual(conn, j, &f)),
    )?;
    let coord_pass = coord_scan.max <= ws.tol();
    let intrinsic_pass = intrinsic_scan.max <= ws.tol();
    let coord_max = coord_scan.max;
    let intrinsic_max = intrinsic_scan.max;
    out.push(ws.residual_check("sck.residual_coord", "scKcoord2", 1e-9, coord_scan));
    out.push(ws.residual_check("sck.residual_intrinsic", "scK", ws.tol(), intrinsic_scan));

    // verdict consistency between the two formulations
    {
        let agree = coord_pass == intrinsic_pass
            || (coord_max > NEGATIVE_THRESHOLD) == (intrinsic_max > NEGATIVE_THRESHOLD);
        out.push(CheckResult {
            id: "sck.verdict_consistency".to_string(),
            anchor: "scK<=>scKcoord2".to_string(),
            residual: if agree {
                0.0
            } else {
                (coord_max - intrinsic_max).abs()
            },
            tol: ws.tol(),
            verdict: if agree { Verdict::Pass } else { Verdict::Fail },
            worst_point: WorstPoint::from(&ws.probe),
            expect: None,
            reason: None,
        });
    }

    let is_sck = coord_pass;
    let gate = |id: &str, anchor: &str| -> Option<CheckResult> {
        if is_sck {
            None
        } else {
            Some(ws.na(
                id,
                anchor,
                "defining condition fails; Theorem 1 does not apply",
            ))
        }
    };

    // Theorem 1 identities
    if let Some(na) = gate("sck.scKU", "scKU") {
        out.push(na);
        out.push(ws.na("sck.PhiJ", "PhiJ", "defining condition fails"));
        out.push(ws.na("sck.scKR", "scKR", "defining condition fails"));
        out.push(ws.na("sck.dhJ", "dhJ", "defining condition fails"));
        out.push(ws.na("sck.Ubis", "Ubis", "defining condition fails"));
        out.push(ws.na("sck.gauging2", "gauging2", "defining condition fails"));
        out.push(ws.na("sck.xf_vertical", "Xf", "defining condition fails"));
        out.push(ws.na("sck.trace", "Thm2:f=trJ", "defining condition fails"));
        out.push(ws.na("sck.nj", "Thm2:NJ", "defining condition fails"));
        out.push(ws.na("sck.killing", "killing2", "defining condition fails"));
        out.push(ws.na("sck.dJdetJ", "dJdetJ", "defining condition fails"));
        out.push(ws.na(
            "sck.dj_chain",
            "Thm2:dJdetJ-chain",
            "defining condition fails",
        ));
    } else {
        let scan = ws.scan_exprs(
            "sck.scKU",
            &Workspace::flatten_mat(&sck::sck_u_residual(conn, &l.u_field, &f)),
        )?;
        out.push(ws.residual_check("sck.scKU", "scKU", ws.tol(), scan));

        let scan = ws.scan_exprs(
            "sck.PhiJ",
            &Workspace::flatten_mat(&sck::phi_j_residual(conn, j, &f)),
        )?;
        out.push(ws.residual_check("sck.PhiJ", "PhiJ", ws.tol(), scan));

        let rhs = sck::sck_r_closed(n, &l.jc, &f);
        let scan = ws.scan_pointwise(|p| {
            let r = ws.solve_r("sck.scKR", p)?;
            let want = symmat::eval_mat(&rhs, p).map_err(|e| numeric("sck.scKR", e))?;
            Ok(r.sub(&want).max_abs())
        })?;
        out.push(ws.residual_check("sck.scKR", "scKR", ws.tol(), scan));

        let dhj = sck::dhj_residual(conn, j, &f);
        let flat: Vec<Expr> = dhj.into_iter().flatten().flatten().collect();
        let scan = ws.scan_exprs("sck.dhJ", &flat)?;
        out.push(ws.residual_check("sck.dhJ", "dhJ", ws.tol(), scan));

        let scan = ws.scan_exprs(
            "sck.Ubis",
            &Workspace::flatten_mat(&sck::ubis_residual(conn, &l.u_field, &f)),
        )?;
        out.push(ws.residual_check("sck.Ubis", "Ubis", ws.tol(), scan));

        let g2 = sck::gauging2_residual(conn, ws.lgam_r(), &f);
        let scan = ws.scan_exprs("sck.gauging2", &Workspace::flatten_mat(&g2))?;
        out.push(ws.residual_check("sck.gauging2", "gauging2", ws.tol(), scan));

        let scan = ws.scan_exprs(
            "sck.xf_vertical",
            &sck::xf_hamiltonian_residual(conn, &l.omega_l, &f),
        )?;
        out.push(ws.residual_check("sck.xf_vertical", "Xf", ws.tol(), scan));

        // Theorem 2
        let scan = ws.scan_exprs("sck.trace", &sck::trace_law_residuals(conn, j, &f))?;
        out.push(ws.residual_check("sck.trace", "Thm2:f=trJ", ws.tol(), scan));

        let scan = ws.scan_exprs("sck.nj", &Workspace::flatten_ten3(ws.n_j()))?;
        out.push(ws.residual_check("sck.nj", "Thm2:NJ", ws.tol(), scan));

        // cofactor Killing tensor (J must stay nonsingular on the sample set)
        let det_j = symmat::det(j);
        let mut min_det = f64::INFINITY;
        for p in ws.points() {
            let d = det_j.eval(p).map_err(|e| numeric("sck.killing", e))?;
            min_det = min_det.min(d.abs());
        }
        if min_det <= 1e-9 {
            out.push(ws.na("sck.killing", "killing2", "J is singular on the sample set"));
            out.push(ws.na("sck.dJdetJ", "dJdetJ", "J is singular on the sample set"));
            out.push(ws.na(
                "sck.dj_chain",
                "Thm2:dJdetJ-chain",
                "J is singular on the sample set",
            ));
        } else {
            let a = sck::cofactor(j);
            let scan = ws.scan_exprs("sck.killing", &sck::killing_residual(conn, &a))?;
            out.push(ws.residual_check("sck.killing", "killing2", ws.tol(), scan));
            let scan = ws.scan_exprs("sck.dJdetJ", &sck::djdetj_residual(conn, j, &a, &f))?;
            out.push(ws.residual_check("sck.dJdetJ", "dJdetJ", ws.tol(), scan));
            let scan = ws.scan_exprs("sck.dj_chain", &sck::dj_det_chain_residual(conn, j))?;
            out.push(ws.residual_check("sck.dj_chain", "Thm2:dJdetJ-chain", ws.tol(), scan));
        }
    }

    // Appendix A block: applies to parallel symmetric J
    {
        let nabla_j_scan = ws.scan_exprs("sck.appA", &Workspace::flatten_mat(ws.nabla_j()))?;
        if nabla_j_scan.max > 1e-9 {
            out.push(ws.na("sck.appA_phiJ", "[PhiJ]", "J is not parallel"));
            out.push(ws.na("sck.appA_ricci", "AppA:Ricci", "J is not parallel"));
            out.push(ws.na("sck.appA_comm", "AppA:comm", "J is not parallel"));
            out.push(ws.na("sck.appA_aux", "AppA:aux", "J is not parallel"));
        } else {
            let comm = symmat::sub(&symmat::mul(&conn.phi, j), &symmat::mul(j, &conn.phi));
            let scan = ws.scan_exprs("sck.appA_phiJ", &Workspace::flatten_mat(&comm))?;
            out.push(ws.residual_check("sck.appA_phiJ", "[PhiJ]", ws.tol(), scan));
            let scan = ws.scan_exprs("sck.appA_ricci", &sck::ricci_identity_residual(conn, j))?;
            out.push(ws.residual_check("sck.appA_ricci", "AppA:Ricci", ws.tol(), scan));
            let scan = ws.scan_exprs(
                "sck.appA_comm",
                &sck::commutation_identity_residual(conn, j),
            )?;
            out.push(ws.residual_check("sck.appA_comm", "AppA:comm", ws.tol(), scan));
            let scan = ws.scan_exprs("sck.appA_aux", &sck::aux_commutator_residual(conn, j))?;
            out.push(ws.residual_check("sck.appA_aux", "AppA:aux", ws.tol(), scan));
        }
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// eigen suite
// ---------------------------------------------------------------------------

pub fn run_eigen(ws: &Workspace) -> Result<Vec<CheckResult>, SuiteError> {
    let conn = &ws.conn;
    let l = &ws.lifts;
    let mut out = Vec::new();

    let mut spectra = Scan {
        max: 0.0,
        worst: ws.probe.clone(),
        probe: 0.0,
    };
    let mut eigenform = Scan {
        max: 0.0,
        worst: ws.probe.clone(),
        probe: 0.0,
    };
    let mut prop8 = Scan {
        max: 0.0,
        worst: ws.probe.clone(),
        probe: 0.0,
    };
    let mut min_det = f64::INFINITY;
    let mut min_det_point = ws.probe.clone();
    let mut ran_full = 0usize;
    let mut skip_reason: Option<String> = None;
    let mut complex_failure: Option<String> = None;

    for p in ws.points() {
        let is_probe = std::ptr::eq(p, &ws.probe);
        match crate::eigen_dn::point_eigen(conn, l, &l.u_field, p) {
            Ok(entry) => {
                if entry.spectrum_gap > spectra.max {
                    spectra.max = entry.spectrum_gap;
                    spectra.worst = p.clone();
                }
                if entry.eigenform_residual > eigenform.max {
                    eigenform.max = entry.eigenform_residual;
                    eigenform.worst = p.clone();
                }
                if is_probe {
                    spectra.probe = entry.spectrum_gap;
                    eigenform.probe = entry.eigenform_residual;
                    prop8.probe = entry.r_eigen_residual;
                }
                if let Some(reason) = entry.skipped {
                    skip_reason = Some(reason);
                    continue;
                }
                ran_full += 1;
                if entry.r_eigen_residual > prop8.max {
                    prop8.max = entry.r_eigen_residual;
                    prop8.worst = p.clone();
                }
                if entry.completeness_det < min_det {
                    min_det = entry.completeness_det;
                    min_det_point = p.clone();
                }
            }
            Err(crate::eigen_dn::EigenError::Lin(LinError::ComplexEigenvalues {
                discriminant,
            })) => {
                complex_failure = Some(format!(
                    "complex eigenvalues at a sample point (discriminant {discriminant:.3e})"
                ));
                break;
            }
            Err(e) => return Err(numeric("eigen.point", e)),
        }
    }

    if let Some(reason) = complex_failure {
        for (id, anchor) in [
            ("eigen.spectra", "LemmaB4:spectra"),
            ("eigen.eigenform", "LemmaB4:eigenform"),
            ("eigen.prop8", "PropB8"),
            ("eigen.completeness", "PropB8:independence"),
        ] {
            out.push(ws.na(id, anchor, &reason));
        }
    } else {
        out.push(ws.residual_check("eigen.spectra", "LemmaB4:spectra", 1e-9, spectra));
        out.push(ws.residual_check("eigen.eigenform", "LemmaB4:eigenform", 1e-8, eigenform));
        if ran_full == 0 {
            let reason = skip_reason.unwrap_or_else(|| "no usable points".to_string());
            out.push(ws.na("eigen.prop8", "PropB8", &reason));
            out.push(ws.na("eigen.completeness", "PropB8:independence", &reason));
        } else {
            out.push(ws.residual_check("eigen.prop8", "PropB8", 1e-8, prop8));
            let hinge = (1e-6 - min_det).max(0.0);
            out.push(ws.residual_check(
                "eigen.completeness",
                "PropB8:independence",
                0.0,
                Scan {
                    max: hinge,
                    worst: min_det_point,
                    probe: hinge,
                },
            ));
        }
    }

    // separability of eigenvalues along transverse eigendirections
    {
        let mut scan = Scan {
            max: 0.0,
            worst: ws.probe.clone(),
            probe: 0.0,
        };
        let mut g_orth = Scan {
            max: 0.0,
            worst: ws.probe.clone(),
            probe: 0.0,
        };
        let mut any = false;
        let mut any_orth = false;
        let mut reason: Option<String> = None;
        for p in ws.points() {
            match crate::eigen_dn::separability_at(conn, &ws.scenario.j, p) {
                Ok(entry) => {
                    if let Some(r) = entry.skipped {
                        reason = Some(r);
                        continue;
                    }
                    any = true;
                    if entry.separability_residual > scan.max {
                        scan.max = entry.separability_residual;
                        scan.worst = p.clone();
                    }
                    if std::ptr::eq(p, &ws.probe) {
                        scan.probe = entry.separability_residual;
                    }
                    if let Some(o) = entry.g_orthogonality {
                        any_orth = true;
                        if o > g_orth.max {
                            g_orth.max = o;
                            g_orth.worst = p.clone();
                        }
                    }
                }
                Err(crate::eigen_dn::EigenError::MatchingFailure { gap }) => {
                    reason = Some(format!("eigenvalue matching failed (gap {gap:.3e})"));
                }
                Err(e) => return Err(numeric("eigen.separability", e)),
            }
        }
        if any {
            out.push(ws.residual_check("eigen.separability", "AppB:separability", 1e-4, scan));
        } else {
            out.push(ws.na(
                "eigen.separability",
                "AppB:separability",
                reason.as_deref().unwrap_or("no usable points"),
            ));
        }
        if any_orth {
            out.push(ws.residual_check("eigen.g_orth", "AppB:gdiag", 1e-9, g_orth));
        } else {
            out.push(ws.na(
                "eigen.g_orth",
                "AppB:gdiag",
                "J is not symmetric or has repeated eigenvalues",
            ));
        }
    }

    // Haantjes tensor of J
    {
        let h = tensor_calc::haantjes(&Chart::base(ws.scenario.n), &ws.scenario.j);
        let scan = ws.scan_exprs("eigen.haantjes", &Workspace::flatten_ten3(&h))?;
        out.push(ws.residual_check("eigen.haantjes", "haantjes", ws.tol(), scan));
    }

    Ok(out)
}

pub fn run_suite(ws: &Workspace, suite: Suite) -> Result<Vec<CheckResult>, SuiteError> {
    match suite {
        Suite::Connection => run_connection(ws),
        Suite::Lifts => run_lifts(ws),
        Suite::Torsion => run_torsion(ws),
        Suite::Sck => run_sck(ws),
        Suite::Eigen => run_eigen(ws),
        Suite::All => {
            let mut out = run_connection(ws)?;
            out.extend(run_lifts(ws)?);
            out.extend(run_torsion(ws)?);
            out.extend(run_sck(ws)?);
            out.extend(run_eigen(ws)?);
            Ok(out)
        }
    }
}
