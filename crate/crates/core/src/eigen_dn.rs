//! Eigenstructure of J, Jbar and R at points: construction of the R
//! eigenvectors from the base eigendata, eigenform and spectrum coincidence
//! checks, and the pointwise Darboux-Nijenhuis diagnostics (eigenvalue
//! separability, Haantjes vanishing, g-orthogonality).

use thiserror::Error;

use crate::expr::Point;
use crate::lifts::Lifts;
use crate::smalllin::{LinError, Mat};
use crate::sode::ConnectionData;
use crate::symmat::{self, EMat};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("evaluation failed: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("linear algebra failed: {0}")]
    Lin(#[from] LinError),
    #[error("eigenvalue matching failed: gap {gap:.3e} is below 10x the step scale")]
    MatchingFailure { gap: f64 },
}

/// Per-point eigen diagnostics.
#[derive(Debug, Clone)]
pub struct EigenEntry {
    pub point: Point,
    /// None when the full construction ran; otherwise why it was skipped.
    pub skipped: Option<String>,
    /// Hypothesis warnings that do not stop the computation.
    pub warnings: Vec<String>,
    pub lambda: Vec<f64>,
    /// Eigenvectors X_i of J.
    pub x_vecs: Vec<Vec<f64>>,
    /// Eigenvectors Z_i of Jbar.
    pub z_vecs: Vec<Vec<f64>>,
    /// The solved Y_i (gauge: g(Y_i, Z_i) = 0), when constructed.
    pub y_vecs: Vec<Vec<f64>>,
    /// max_i |lambda_i(J) - lambda_i(Jbar)| over sorted spectra.
    pub spectrum_gap: f64,
    /// max_i ||(g X_i)^T (Jbar - lambda_i)||.
    pub eigenform_residual: f64,
    /// max over both eigenvector families of ||R v - lambda v||.
    pub r_eigen_residual: f64,
    /// |det| of the 2n x 2n stack of constructed eigenvectors.
    pub completeness_det: f64,
}

/// Eigen-diagnostics for one point: eigenvectors X_i of J and Z_i of Jbar,
/// the solved Y_i, and the residuals of the R eigenvector equations.
pub fn point_eigen(
    conn: &ConnectionData,
    lifts: &Lifts,
    u_field: &EMat,
    p: &Point,
) -> Result<EigenEntry, EigenError> {
    let n = conn.n;
    let j = symmat::eval_mat(&lifts_j(lifts), p)?;
    let jbar = symmat::eval_mat(&lifts.jbar, p)?;
    let g = symmat::eval_mat(&conn.g, p)?;
    let scale = 1.0 + j.max_abs();

    let ej = j.eig_real()?;
    let ejbar = jbar.eig_real()?;
    let lambda = ej.values();
    let spectrum_gap = lambda
        .iter()
        .zip(ejbar.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    // Lemma: X_i . g is an eigenform of Jbar with the same eigenvalue.
    let mut eigenform_residual = 0.0f64;
    for (l, x) in &ej.pairs {
        let gx = g.mul_vec(x);
        for col in 0..n {
            let mut s = 0.0;
            for (row, gxr) in gx.iter().enumerate() {
                s += gxr * (jbar[(row, col)] - if row == col { *l } else { 0.0 });
            }
            eigenform_residual = eigenform_residual.max(s.abs());
        }
    }

    let mut entry = EigenEntry {
        point: p.clone(),
        skipped: None,
        warnings: Vec::new(),
        lambda: lambda.clone(),
        x_vecs: ej.pairs.iter().map(|(_, v)| v.clone()).collect(),
        z_vecs: ejbar.pairs.iter().map(|(_, v)| v.clone()).collect(),
        y_vecs: Vec::new(),
        spectrum_gap,
        eigenform_residual,
        r_eigen_residual: 0.0,
        completeness_det: 0.0,
    };

    if !ej.distinct {
        entry.skipped = Some("non-distinct eigenvalues".to_string());
        return Ok(entry);
    }
    for l in &lambda {
        if l.abs() <= 1e-9 * scale {
            entry.warnings.push(format!(
                "zero eigenvalue {l:.3e}: the non-degeneracy hypothesis fails"
            ));
        }
    }

    let u = symmat::eval_mat(u_field, p)?;
    let r = lifts.solve_r_at(p).map_err(|e| match e {
        crate::lifts::LiftsError::Eval(e) => EigenError::Eval(e),
        crate::lifts::LiftsError::Singular(e) => EigenError::Lin(e),
    })?;
    let gamma = symmat::eval_mat(&conn.conn, p)?;
    let r_scale = 1.0 + r.max_abs();

    // Solve (Jbar - lambda) Y = -U X with the gauge g(Y, Z) = 0, through the
    // normal equations of the constraint-augmented system.
    let mut stack = Mat::zeros(2 * n, 2 * n);
    let mut worst_r = 0.0f64;
    for (i, (l, x)) in ej.pairs.iter().enumerate() {
        let z = &ejbar.pairs[i].1;

        let mut aug = Mat::zeros(n + 1, n);
        for row in 0..n {
            for col in 0..n {
                aug[(row, col)] = jbar[(row, col)] - if row == col { *l } else { 0.0 };
            }
        }
        let gz = g.mul_vec(z);
        for col in 0..n {
            aug[(n, col)] = gz[col];
        }
        let ux = u.mul_vec(x);
        let mut rhs = Mat::zeros(n + 1, 1);
        for row in 0..n {
            rhs[(row, 0)] = -ux[row];
        }
        let at = aug.transpose();
        let y = match at.mul(&aug).solve(&at.mul(&rhs)) {
            Ok(sol) => sol.column(0),
            Err(LinError::Singular { .. }) => {
                entry
                    .warnings
                    .push(format!("singular reduced system for lambda = {l:.6}"));
                vec![0.0; n]
            }
            Err(e) => return Err(e.into()),
        };
        entry.y_vecs.push(y.clone());

        // Z^V and X^H + Y^V in coordinate components.
        let mut zv = vec![0.0; 2 * n];
        zv[n..(n + n)].copy_from_slice(z);
        let mut xhyv = vec![0.0; 2 * n];
        xhyv[..n].copy_from_slice(x);
        for m in 0..n {
            let mut s = y[m];
            for k in 0..n {
                s -= gamma[(m, k)] * x[k];
            }
            xhyv[n + m] = s;
        }
        for (col, v) in [(i, &zv), (n + i, &xhyv)] {
            let rv = r.mul_vec(v);
            for row in 0..2 * n {
                worst_r = worst_r.max((rv[row] - l * v[row]).abs() / r_scale);
                stack[(row, col)] = v[row];
            }
        }
    }
    entry.r_eigen_residual = worst_r;
    entry.completeness_det = stack.det().abs();
    Ok(entry)
}

fn lifts_j(lifts: &Lifts) -> EMat {
    let n = lifts.n;
    (0..n)
        .map(|i| (0..n).map(|j| lifts.jc[i][j].clone()).collect())
        .collect()
}

/// Separability diagnostics at one point.
#[derive(Debug, Clone)]
pub struct SeparabilityEntry {
    pub point: Point,
    pub skipped: Option<String>,
    /// max over i != j of |directional derivative of lambda_i along X_j|.
    pub separability_residual: f64,
    /// max |g(X_i, X_j)| for i != j (g-symmetric J only, else None).
    pub g_orthogonality: Option<f64>,
}

const FD_STEP: f64 = 1e-6;

/// Directional derivatives of eigenvalues along the other eigendirections by
/// matched central differences of the point spectrum.
pub fn separability_at(
    conn: &ConnectionData,
    j_sym: &EMat,
    p: &Point,
) -> Result<SeparabilityEntry, EigenError> {
    let n = conn.n;
    let j = symmat::eval_mat(j_sym, p)?;
    let scale = 1.0 + j.max_abs();
    let ej = match j.eig_real() {
        Ok(e) => e,
        Err(LinError::ComplexEigenvalues { .. }) => {
            return Ok(SeparabilityEntry {
                point: p.clone(),
                skipped: Some("complex eigenvalues".to_string()),
                separability_residual: 0.0,
                g_orthogonality: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    if !ej.distinct {
        return Ok(SeparabilityEntry {
            point: p.clone(),
            skipped: Some("non-distinct eigenvalues".to_string()),
            separability_residual: 0.0,
            g_orthogonality: None,
        });
    }
    let lambda = ej.values();
    let mut min_gap = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_gap = min_gap.min((lambda[i] - lambda[j]).abs());
        }
    }
    if n > 1 && min_gap <= 10.0 * FD_STEP * scale {
        return Err(EigenError::MatchingFailure { gap: min_gap });
    }

    let eig_at = |q: &[f64]| -> Result<Vec<f64>, EigenError> {
        let pq = Point::new(q.to_vec(), p.u.clone());
        let m = symmat::eval_mat(j_sym, &pq)?;
        Ok(m.eig_real()?.values())
    };
    let nearest = |vals: &[f64], target: f64| -> f64 {
        vals.iter()
            .copied()
            .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
            .unwrap()
    };

    let mut residual = 0.0f64;
    for (jdx, (_, xj)) in ej.pairs.iter().enumerate() {
        let mut q_plus = p.q.clone();
        let mut q_minus = p.q.clone();
        for k in 0..n {
            q_plus[k] += FD_STEP * xj[k];
            q_minus[k] -= FD_STEP * xj[k];
        }
        let vp = eig_at(&q_plus)?;
        let vm = eig_at(&q_minus)?;
        for (idx, l) in lambda.iter().enumerate() {
            if idx == jdx {
                continue;
            }
            let d = (nearest(&vp, *l) - nearest(&vm, *l)) / (2.0 * FD_STEP);
            residual = residual.max(d.abs());
        }
    }

    // g-orthogonality of eigenvectors when J is symmetric with respect to g.
    let g = symmat::eval_mat(&conn.g, p)?;
    let gj = g.mul(&j);
    let g_orth = if gj.sub(&gj.transpose()).max_abs() <= 1e-9 * scale {
        let mut worst = 0.0f64;
        for (i, (_, xi)) in ej.pairs.iter().enumerate() {
            for (jdx, (_, xj)) in ej.pairs.iter().enumerate() {
                if i != jdx {
                    let gxj = g.mul_vec(xj);
                    let dot: f64 = xi.iter().zip(&gxj).map(|(a, b)| a * b).sum();
                    worst = worst.max(dot.abs());
                }
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(SeparabilityEntry {
        point: p.clone(),
        skipped: None,
        separability_residual: residual,
        g_orthogonality: g_orth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{load_builtin, probe_point};
    use crate::lifts::Lifts;
    use crate::sode::ConnectionData;

    fn setup(name: &str) -> (crate::geometry::Scenario, ConnectionData, Lifts, Vec<Point>) {
        let s = load_builtin(name);
        let conn = ConnectionData::build(&s).unwrap();
        let lifts = Lifts::build(&s, &conn);
        let pts = s.sample().unwrap().points;
        (s, conn, lifts, pts)
    }

    #[test]
    fn e2_constant_diagonal_case() {
        let (_s, conn, lifts, pts) = setup("E2");
        for p in pts.iter().take(10) {
            let e = point_eigen(&conn, &lifts, &lifts.u_field, p).unwrap();
            assert!(e.skipped.is_none());
            assert_eq!(e.lambda, vec![2.0, 3.0]);
            assert!(e.spectrum_gap < 1e-12);
            assert!(e.eigenform_residual < 1e-12);
            assert!(e.r_eigen_residual <= 1e-10);
            assert!(e.completeness_det > 1e-6);
        }
    }

    #[test]
    fn e3_reference_point() {
        let (_s, conn, lifts, _pts) = setup("E3");
        let p = Point::new(vec![1.0, 0.0], vec![0.0, 1.0]);
        let e = point_eigen(&conn, &lifts, &lifts.u_field, &p).unwrap();
        assert!(e.skipped.is_none());
        assert!((e.lambda[0] - 1.0).abs() < 1e-10);
        assert!((e.lambda[1] - 2.0).abs() < 1e-10);
        // at q = (1,0): J = diag(2,1), so X_1 = e2 and X_2 = e1
        assert!((e.x_vecs[0][0]).abs() < 1e-10 && (e.x_vecs[0][1] - 1.0).abs() < 1e-10);
        assert!((e.x_vecs[1][0] - 1.0).abs() < 1e-10 && (e.x_vecs[1][1]).abs() < 1e-10);
        // the gauge keeps each Y_i g-orthogonal to its Z_i
        for (y, z) in e.y_vecs.iter().zip(&e.z_vecs) {
            let dot: f64 = y.iter().zip(z).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-10);
        }
        assert!(
            e.r_eigen_residual <= 1e-8,
            "residual {}",
            e.r_eigen_residual
        );
        assert!(e.completeness_det > 1e-6);
    }

    #[test]
    fn e3_sampled_points() {
        let (_s, conn, lifts, pts) = setup("E3");
        for p in &pts {
            let e = point_eigen(&conn, &lifts, &lifts.u_field, p).unwrap();
            assert!(e.skipped.is_none());
            assert!(e.spectrum_gap <= 1e-9, "spectra differ: {}", e.spectrum_gap);
            assert!(e.eigenform_residual <= 1e-8);
            assert!(e.r_eigen_residual <= 1e-8);
            assert!(e.completeness_det > 1e-6);
        }
    }

    #[test]
    fn e4_skips_on_multiplicity_but_checks_eigenforms() {
        let (_s, conn, lifts, pts) = setup("E4");
        for p in pts.iter().take(10) {
            let e = point_eigen(&conn, &lifts, &lifts.u_field, p).unwrap();
            assert_eq!(e.skipped.as_deref(), Some("non-distinct eigenvalues"));
            assert!(e.spectrum_gap <= 1e-9);
            assert!(e.eigenform_residual <= 1e-8);
        }
    }

    #[test]
    fn e5_zero_eigenvalue_warning() {
        let (_s, conn, lifts, _pts) = setup("E5");
        let p = probe_point(2);
        let e = point_eigen(&conn, &lifts, &lifts.u_field, &p).unwrap();
        assert!(e.skipped.is_none());
        assert!((e.lambda[0] - 0.0).abs() < 1e-12);
        assert!((e.lambda[1] - 0.9).abs() < 1e-12);
        assert!(!e.warnings.is_empty(), "zero eigenvalue must be flagged");
    }

    #[test]
    fn separability_on_fixtures() {
        // E3: torsion-free, eigenvalues 1 and 1 + |q|^2 constant along the
        // transverse eigendirections
        let (s, conn, _lifts, pts) = setup("E3");
        for p in pts.iter().take(20) {
            let e = separability_at(&conn, &s.j, p).unwrap();
            assert!(e.skipped.is_none());
            assert!(
                e.separability_residual <= 1e-4,
                "{}",
                e.separability_residual
            );
            assert!(e.g_orthogonality.unwrap() <= 1e-9);
        }

        // E2: constant eigenvalues
        let (s, conn, _lifts, pts) = setup("E2");
        let e = separability_at(&conn, &s.j, &pts[0]).unwrap();
        assert!(e.separability_residual < 1e-12);

        // E5: lambda_2 = q2 varies along its transverse direction e2
        let (s, conn, _lifts, _pts) = setup("E5");
        let p = probe_point(2);
        let e = separability_at(&conn, &s.j, &p).unwrap();
        assert!(e.skipped.is_none());
        assert!(
            (e.separability_residual - 1.0).abs() < 1e-4,
            "expected derivative 1, got {}",
            e.separability_residual
        );
    }
}
