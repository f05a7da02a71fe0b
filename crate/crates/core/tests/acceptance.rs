//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use pn_tangent::expr::{Expr, Point, Var, VarKind};
use pn_tangent::geometry::{load_builtin, probe_point};
use pn_tangent::rng::SplitMix64;
use pn_tangent::sode::TauField;
use pn_tangent::suites::{run_suite, Suite, Workspace};
use pn_tangent::symmat;
use pn_tangent::tensor_calc::{self, Chart};
use pn_tangent::{sck, Scenario};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn ws(name: &str) -> Workspace {
    Workspace::new(load_builtin(name)).expect("workspace builds")
}

fn all_vars(n: usize) -> Vec<Var> {
    let mut v: Vec<Var> = (0..n).map(Var::q).collect();
    v.extend((0..n).map(Var::u));
    v
}

fn random_point(rng: &mut SplitMix64, n: usize) -> Point {
    Point::new(
        (0..n).map(|_| rng.uniform(0.3, 1.2)).collect(),
        (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
}

/// Expression corpus of a fixture: declared data plus the derived
/// connection-level expressions.
fn corpus(s: &Scenario) -> Vec<Expr> {
    let conn = pn_tangent::sode::ConnectionData::build(s).unwrap();
    let mut out: Vec<Expr> = Vec::new();
    if let Some(g) = &s.metric {
        out.extend(g.iter().flatten().cloned());
    }
    out.push(s.lagrangian.clone());
    out.extend(s.j.iter().flatten().cloned());
    if let Some(f) = &s.f {
        out.push(f.clone());
    }
    out.extend(conn.forces.iter().cloned());
    out.extend(conn.conn.iter().flatten().cloned());
    out.extend(conn.theta.iter().cloned());
    out.push(conn.energy.clone());
    out.extend(conn.phi.iter().flatten().cloned());
    out.retain(|e| !e.is_zero());
    out
}

#[test]
fn criterion_01_derivative_oracle() {
    let mut total = 0usize;
    let mut failures = 0usize;
    let mut mixed_worst = 0.0f64;
    let mut rng = SplitMix64::new(0xC0FFEE);
    for name in ["E1", "E2", "E3", "E4", "E5", "E6"] {
        let s = load_builtin(name);
        let n = s.n;
        for e in corpus(&s) {
            for v in all_vars(n) {
                let d_sym = e.diff(v);
                let mut compared = 0usize;
                let mut attempts = 0usize;
                while compared < 200 && attempts < 2000 {
                    attempts += 1;
                    let p = random_point(&mut rng, n);
                    let x = p.var(v);
                    let h = 1e-5 * (1.0 + x.abs());
                    let mut p_plus = p.clone();
                    let mut p_minus = p.clone();
                    match v.kind {
                        VarKind::Base => {
                            p_plus.q[v.index] += h;
                            p_minus.q[v.index] -= h;
                        }
                        VarKind::Fiber => {
                            p_plus.u[v.index] += h;
                            p_minus.u[v.index] -= h;
                        }
                    }
                    let (fp, fm, ds) = match (e.eval(&p_plus), e.eval(&p_minus), d_sym.eval(&p)) {
                        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
                        _ => continue, // singular point; draw another
                    };
                    compared += 1;
                    total += 1;
                    let fd = (fp - fm) / (2.0 * h);
                    if (ds - fd).abs() > 1e-5 * (1.0 + ds.abs().max(fd.abs())) {
                        failures += 1;
                    }
                }
                assert!(compared >= 100, "not enough regular sample points");
            }
            // mixed partials commute
            let p = random_point(&mut rng, n);
            for a in all_vars(n) {
                for b in all_vars(n) {
                    let ab = e.diff(a).diff(b);
                    let ba = e.diff(b).diff(a);
                    if let (Ok(x), Ok(y)) = (ab.eval(&p), ba.eval(&p)) {
                        let r = (x - y).abs() / (1.0 + x.abs().max(y.abs()));
                        mixed_worst = mixed_worst.max(r);
                    }
                }
            }
        }
    }
    let rate = failures as f64 / total as f64;
    report(
        "1 derivative-oracle",
        rate <= 0.01 && mixed_worst <= 1e-10,
        &format!("{failures}/{total} FD mismatches, mixed-partial worst {mixed_worst:.3e}"),
    );
}

#[test]
fn criterion_02_connection_suite() {
    let mut worst = 0.0f64;
    for name in ["E1", "E2", "E3", "E4", "E5", "E6"] {
        let w = ws(name);
        let conn = &w.conn;
        let n = conn.n;
        let pts = &w.samples;
        let mut exprs: Vec<Expr> = Vec::new();
        // energy conservation
        exprs.push(conn.gamma_apply(&conn.energy));
        // covariant derivatives of T (all three identities, every fixture)
        let t = TauField::canonical(n);
        exprs.extend(conn.nabla_t(&t).comps.iter().cloned());
        let dv = conn.dv_t(&t);
        for i in 0..n {
            for k in 0..n {
                let delta = if i == k { Expr::one() } else { Expr::zero() };
                exprs.push(dv.get(&[i, k]).clone() - delta);
            }
        }
        exprs.extend(conn.dh_t(&t).comps.iter().cloned());
        // d^v Phi = 3 curv and Phi(T) = 0
        for k in 0..n {
            let mut phi_t = Expr::zero();
            for j in 0..n {
                phi_t = phi_t + conn.phi[k][j].clone() * Expr::u(j);
                for i in 0..n {
                    let dvphi = conn.phi[k][j].diff(Var::u(i)) - conn.phi[k][i].diff(Var::u(j));
                    exprs.push(dvphi - Expr::int(3) * conn.curvature[k][i][j].clone());
                }
            }
            exprs.push(phi_t);
        }
        // Bianchi cyclic sum (with the Hessian metric in lagrangian mode)
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
        let refs: Vec<&Expr> = exprs.iter().collect();
        for p in pts {
            for v in Expr::eval_many(&refs, p).unwrap() {
                worst = worst.max(v.abs());
            }
        }
    }
    report(
        "2 connection-suite",
        worst <= 1e-8,
        &format!("max residual {worst:.3e}"),
    );
}

#[test]
fn criterion_03_lifts_suite() {
    let mut worst = 0.0f64;
    for name in ["E1", "E2", "E3", "E4", "E5", "E6"] {
        let w = ws(name);
        for c in run_suite(&w, Suite::Lifts).unwrap() {
            for id in [
                "lifts.lemma1_sq",
                "lifts.lemma1_torsion",
                "lifts.fn_jc_s",
                "lifts.kahler",
                "lifts.rsym",
                "lifts.prop1",
                "lifts.ubar",
            ] {
                if c.id == id {
                    assert!(c.residual >= 0.0, "{id} not applicable on {name}");
                    worst = worst.max(c.residual);
                }
            }
        }
    }
    report(
        "3 lifts-suite",
        worst <= 1e-8,
        &format!("max residual {worst:.3e}"),
    );
}

#[test]
fn criterion_04_legendre_cross_validation() {
    let mut worst = 0.0f64;
    for name in ["E1", "E3", "E4", "E6"] {
        let w = ws(name);
        assert!(w.samples.len() >= 50, "need at least 50 sample points");
        for p in w.samples.iter().take(50) {
            let generic = w.lifts.solve_r_at(p).unwrap();
            let pulled = w
                .lifts
                .legendre_pullback_at(&w.scenario, &w.conn, p)
                .unwrap();
            worst = worst.max(generic.sub(&pulled).max_abs());
        }
    }
    report(
        "4 Prop6-Legendre",
        worst <= 1e-8,
        &format!("max deviation {worst:.3e}"),
    );
}

#[test]
fn criterion_05_torsion_both_directions() {
    let mut worst_zero = 0.0f64;
    for name in ["E2", "E3", "E4"] {
        let w = ws(name);
        let flat: Vec<Expr> = w
            .n_r()
            .iter()
            .flat_map(|a| a.iter().flat_map(|b| b.iter().cloned()))
            .collect();
        let refs: Vec<&Expr> = flat.iter().collect();
        for p in &w.samples {
            for v in Expr::eval_many(&refs, p).unwrap() {
                worst_zero = worst_zero.max(v.abs());
            }
        }
    }
    let w5 = ws("E5");
    let probe = probe_point(2);
    let mut probe_max = 0.0f64;
    for a in w5.n_r() {
        for b in a {
            for e in b {
                probe_max = probe_max.max(e.eval(&probe).unwrap().abs());
            }
        }
    }
    report(
        "5 Prop7-torsion",
        worst_zero <= 1e-8 && probe_max >= 0.01,
        &format!("N_R zero-side {worst_zero:.3e}, probe-side {probe_max:.3e}"),
    );
}

#[test]
fn criterion_06_theorem1_on_e3() {
    let w = ws("E3");
    let checks = run_suite(&w, Suite::Sck).unwrap();
    let get = |id: &str| -> f64 {
        checks
            .iter()
            .find(|c| c.id == id)
            .unwrap_or_else(|| panic!("check {id} missing"))
            .residual
    };
    let coord = get("sck.residual_coord");
    let mut worst = 0.0f64;
    for id in [
        "sck.residual_intrinsic",
        "sck.scKU",
        "sck.PhiJ",
        "sck.scKR",
        "sck.gauging2",
    ] {
        worst = worst.max(get(id));
    }
    // gauging comes from the torsion suite
    let torsion = run_suite(&w, Suite::Torsion).unwrap();
    let gauging = torsion
        .iter()
        .find(|c| c.id == "torsion.gauging")
        .expect("gauging check present")
        .residual;
    worst = worst.max(gauging);
    report(
        "6 Theorem1-E3",
        coord <= 1e-9 && worst <= 1e-8,
        &format!("coordinate {coord:.3e}, identities {worst:.3e}"),
    );
}

#[test]
fn criterion_07_theorem2_on_e3() {
    let w = ws("E3");
    let checks = run_suite(&w, Suite::Sck).unwrap();
    let get = |id: &str| -> f64 { checks.iter().find(|c| c.id == id).unwrap().residual };
    let worst = [
        get("sck.nj"),
        get("sck.trace"),
        get("sck.killing"),
        get("sck.dJdetJ"),
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    report(
        "7 Theorem2-E3",
        worst <= 1e-8,
        &format!("max residual {worst:.3e}"),
    );
}

#[test]
fn criterion_08_appendix_a_on_e4() {
    let w = ws("E4");
    let conn = &w.conn;
    let j = &w.scenario.j;
    let comm = symmat::sub(&symmat::mul(&conn.phi, j), &symmat::mul(j, &conn.phi));
    let mut worst = 0.0f64;
    let mut exprs: Vec<Expr> = comm.iter().flatten().cloned().collect();
    exprs.extend(sck::ricci_identity_residual(conn, j));
    exprs.extend(sck::commutation_identity_residual(conn, j));
    let refs: Vec<&Expr> = exprs.iter().collect();
    for p in &w.samples {
        for v in Expr::eval_many(&refs, p).unwrap() {
            worst = worst.max(v.abs());
        }
    }
    let probe = probe_point(3);
    let phi_norm = symmat::eval_mat(&conn.phi, &probe).unwrap().max_abs();
    report(
        "8 AppendixA-E4",
        worst <= 1e-8 && phi_norm > 0.01,
        &format!("max residual {worst:.3e}, |Phi| at probe {phi_norm:.3e}"),
    );
}

#[test]
fn criterion_09_appendix_b_on_e2_e3() {
    let mut prop8 = 0.0f64;
    let mut spectra = 0.0f64;
    let mut separability = 0.0f64;
    let mut haantjes = 0.0f64;
    for name in ["E2", "E3"] {
        let w = ws(name);
        for p in &w.samples {
            let entry =
                pn_tangent::eigen_dn::point_eigen(&w.conn, &w.lifts, &w.lifts.u_field, p).unwrap();
            assert!(entry.skipped.is_none());
            prop8 = prop8.max(entry.r_eigen_residual);
            spectra = spectra.max(entry.spectrum_gap);
            let sep = pn_tangent::eigen_dn::separability_at(&w.conn, &w.scenario.j, p).unwrap();
            separability = separability.max(sep.separability_residual);
        }
        let h = tensor_calc::haantjes(&Chart::base(w.scenario.n), &w.scenario.j);
        for a in &h {
            for b in a {
                for e in b {
                    for p in &w.samples {
                        haantjes = haantjes.max(e.eval(p).unwrap().abs());
                    }
                }
            }
        }
    }
    report(
        "9 AppendixB-E2-E3",
        prop8 <= 1e-8 && spectra <= 1e-9 && separability <= 1e-4 && haantjes <= 1e-8,
        &format!(
            "prop8 {prop8:.3e}, spectra {spectra:.3e}, separability {separability:.3e}, haantjes {haantjes:.3e}"
        ),
    );
}

#[test]
fn criterion_10_deterministic_reports() {
    let exe = env!("CARGO_BIN_EXE_check");
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/E3.json");
    let dir = std::env::temp_dir();
    let out1 = dir.join("pn_tangent_det_1.json");
    let out2 = dir.join("pn_tangent_det_2.json");
    for out in [&out1, &out2] {
        let status = std::process::Command::new(exe)
            .args([
                "--scenario",
                fixture,
                "--suite",
                "all",
                "--seed",
                "7",
                "--quiet",
                "--json",
            ])
            .arg(out)
            .status()
            .expect("binary runs");
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    report(
        "10 determinism",
        !a.is_empty() && a == b,
        &format!("{} bytes, byte-identical", a.len()),
    );
}
