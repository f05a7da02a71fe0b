//! Coordinate tensor calculus on an m-dimensional chart: exterior
//! derivatives, Lie derivatives of (1,1) tensors, vector-field brackets,
//! Nijenhuis torsion, the Frolicher-Nijenhuis bracket of two (1,1) tensors,
//! and the Haantjes tensor.
//!
//! Used with m = n on the base chart and m = 2n on the tangent-bundle chart.
//! Everything is evaluated on coordinate vector fields, which suffices by
//! tensoriality.

use crate::expr::{Expr, Var};
use crate::symmat::EMat;

/// A chart is an ordered list of the variables it differentiates against.
#[derive(Debug, Clone)]
pub struct Chart {
    pub vars: Vec<Var>,
}

impl Chart {
    /// Base chart q1..qn.
    pub fn base(n: usize) -> Chart {
        Chart {
            vars: (0..n).map(Var::q).collect(),
        }
    }

    /// Tangent-bundle chart q1..qn, u1..un.
    pub fn tangent(n: usize) -> Chart {
        let mut vars: Vec<Var> = (0..n).map(Var::q).collect();
        vars.extend((0..n).map(Var::u));
        Chart { vars }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn diff(&self, e: &Expr, a: usize) -> Expr {
        e.diff(self.vars[a])
    }
}

/// Components of a (1,2) tensor, indexed `[k][i][j]` for `T(e_i, e_j)^k`.
pub type Ten3 = Vec<Vec<Vec<Expr>>>;

pub fn ten3_zero(m: usize) -> Ten3 {
    vec![vec![vec![Expr::zero(); m]; m]; m]
}

/// Lie bracket `[a, b]` of two vector fields given by chart components.
pub fn bracket(chart: &Chart, a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    let m = chart.dim();
    (0..m)
        .map(|c| {
            let mut s = Expr::zero();
            for d in 0..m {
                s = s + a[d].clone() * chart.diff(&b[c], d) - b[d].clone() * chart.diff(&a[c], d);
            }
            s
        })
        .collect()
}

/// Table of all first derivatives of a matrix of components:
/// `table[i][j][a] = d_a A^i_j`. Shared subtrees keep the result compact.
fn deriv_table(chart: &Chart, a: &EMat) -> Vec<Vec<Vec<Expr>>> {
    let m = chart.dim();
    a.iter()
        .map(|row| {
            row.iter()
                .map(|e| (0..m).map(|v| chart.diff(e, v)).collect())
                .collect()
        })
        .collect()
}

/// Nijenhuis torsion of a (1,1) tensor:
/// `N^k_ij = A^m_i d_m A^k_j - A^m_j d_m A^k_i - A^k_m (d_i A^m_j - d_j A^m_i)`.
pub fn nijenhuis(chart: &Chart, a: &EMat) -> Ten3 {
    let m = chart.dim();
    let da = deriv_table(chart, a);
    let mut out = ten3_zero(m);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                let mut s = Expr::zero();
                for l in 0..m {
                    s = s + a[l][i].clone() * da[k][j][l].clone()
                        - a[l][j].clone() * da[k][i][l].clone()
                        - a[k][l].clone() * (da[l][j][i].clone() - da[l][i][j].clone());
                }
                out[k][i][j] = s.clone();
                out[k][j][i] = -s;
            }
        }
    }
    out
}

/// Frolicher-Nijenhuis bracket `[A, B]` of two (1,1) tensors, evaluated on
/// coordinate fields; `fn_bracket(A, A) = 2 N_A`.
pub fn fn_bracket(chart: &Chart, a: &EMat, b: &EMat) -> Ten3 {
    let m = chart.dim();
    let da = deriv_table(chart, a);
    let db = deriv_table(chart, b);
    let mut out = ten3_zero(m);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                let mut s = Expr::zero();
                for l in 0..m {
                    s = s + a[l][i].clone() * db[k][j][l].clone()
                        - a[l][j].clone() * db[k][i][l].clone()
                        + b[l][i].clone() * da[k][j][l].clone()
                        - b[l][j].clone() * da[k][i][l].clone()
                        - a[k][l].clone() * (db[l][j][i].clone() - db[l][i][j].clone())
                        - b[k][l].clone() * (da[l][j][i].clone() - da[l][i][j].clone());
                }
                out[k][i][j] = s.clone();
                out[k][j][i] = -s;
            }
        }
    }
    out
}

/// Haantjes tensor built from the torsion:
/// `H(X,Y) = A^2 N(X,Y) + N(AX,AY) - A N(AX,Y) - A N(X,AY)`.
pub fn haantjes(chart: &Chart, a: &EMat) -> Ten3 {
    let m = chart.dim();
    let n_a = nijenhuis(chart, a);
    let a2 = crate::symmat::mul(a, a);
    let mut out = ten3_zero(m);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in 0..m {
                let mut s = Expr::zero();
                for p in 0..m {
                    s = s + a2[k][p].clone() * n_a[p][i][j].clone();
                    for l in 0..m {
                        s = s + n_a[k][p][l].clone() * a[p][i].clone() * a[l][j].clone()
                            - a[k][p].clone() * n_a[p][l][j].clone() * a[l][i].clone()
                            - a[k][p].clone() * n_a[p][i][l].clone() * a[l][j].clone();
                    }
                }
                out[k][i][j] = s.clone();
                out[k][j][i] = -s;
            }
        }
    }
    out
}

/// Lie derivative of a (1,1) tensor along a vector field:
/// `(L_V A)^i_j = V^m d_m A^i_j - A^m_j d_m V^i + A^i_m d_j V^m`.
pub fn lie_derivative_11(chart: &Chart, v: &[Expr], a: &EMat) -> EMat {
    let m = chart.dim();
    let da = deriv_table(chart, a);
    let dv: Vec<Vec<Expr>> = v
        .iter()
        .map(|e| (0..m).map(|x| chart.diff(e, x)).collect())
        .collect();
    let mut out = vec![vec![Expr::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut s = Expr::zero();
            for l in 0..m {
                s = s + v[l].clone() * da[i][j][l].clone() - a[l][j].clone() * dv[i][l].clone()
                    + a[i][l].clone() * dv[l][j].clone();
            }
            out[i][j] = s;
        }
    }
    out
}

/// A differential form of degree <= 3, stored on independent index
/// combinations (strictly increasing index tuples).
#[derive(Debug, Clone)]
pub struct Form {
    pub dim: usize,
    pub degree: usize,
    comps: Vec<Expr>,
}

fn combos(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    match degree {
        0 => vec![vec![]],
        1 => (0..dim).map(|a| vec![a]).collect(),
        2 => {
            let mut v = Vec::new();
            for a in 0..dim {
                for b in (a + 1)..dim {
                    v.push(vec![a, b]);
                }
            }
            v
        }
        3 => {
            let mut v = Vec::new();
            for a in 0..dim {
                for b in (a + 1)..dim {
                    for c in (b + 1)..dim {
                        v.push(vec![a, b, c]);
                    }
                }
            }
            v
        }
        _ => panic!("forms of degree > 3 are not needed here"),
    }
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Form {
        let len = combos(dim, degree).len();
        Form {
            dim,
            degree,
            comps: vec![Expr::zero(); len],
        }
    }

    pub fn function(dim: usize, e: Expr) -> Form {
        Form {
            dim,
            degree: 0,
            comps: vec![e],
        }
    }

    pub fn one_form(dim: usize, comps: Vec<Expr>) -> Form {
        assert_eq!(comps.len(), dim);
        Form {
            dim,
            degree: 1,
            comps,
        }
    }

    fn flat(&self, idx: &[usize]) -> (usize, i64) {
        // returns packed position and sign of the permutation sorting idx
        let mut sorted: Vec<usize> = idx.to_vec();
        let mut sign = 1i64;
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                if sorted[i] > sorted[j] {
                    sorted.swap(i, j);
                    sign = -sign;
                }
            }
        }
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return (usize::MAX, 0);
            }
        }
        let pos = combos(self.dim, self.degree)
            .iter()
            .position(|c| c == &sorted)
            .expect("index in range");
        (pos, sign)
    }

    /// Component with antisymmetry applied; zero on repeated indices.
    pub fn get(&self, idx: &[usize]) -> Expr {
        assert_eq!(idx.len(), self.degree);
        let (pos, sign) = self.flat(idx);
        match sign {
            0 => Expr::zero(),
            1 => self.comps[pos].clone(),
            _ => -self.comps[pos].clone(),
        }
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        let (pos, sign) = self.flat(idx);
        assert!(sign != 0, "repeated index");
        self.comps[pos] = if sign == 1 { e } else { -e };
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// Full antisymmetric matrix view of a 2-form.
    pub fn to_matrix(&self) -> EMat {
        assert_eq!(self.degree, 2);
        let mut m = crate::symmat::zero(self.dim);
        for a in 0..self.dim {
            for b in 0..self.dim {
                if a != b {
                    m[a][b] = self.get(&[a, b]);
                }
            }
        }
        m
    }
}

/// Standard antisymmetrized coordinate exterior derivative, degree <= 2 in.
pub fn ext_deriv(chart: &Chart, form: &Form) -> Form {
    let m = chart.dim();
    assert_eq!(form.dim, m);
    let mut out = Form::zero(m, form.degree + 1);
    match form.degree {
        0 => {
            let f = &form.comps[0];
            for a in 0..m {
                out.set(&[a], chart.diff(f, a));
            }
        }
        1 => {
            for a in 0..m {
                for b in (a + 1)..m {
                    let e = chart.diff(&form.get(&[b]), a) - chart.diff(&form.get(&[a]), b);
                    out.set(&[a, b], e);
                }
            }
        }
        2 => {
            for a in 0..m {
                for b in (a + 1)..m {
                    for c in (b + 1)..m {
                        let e = chart.diff(&form.get(&[b, c]), a)
                            - chart.diff(&form.get(&[a, c]), b)
                            + chart.diff(&form.get(&[a, b]), c);
                        out.set(&[a, b, c], e);
                    }
                }
            }
        }
        _ => panic!("ext_deriv input degree must be <= 2"),
    }
    out
}

/// `i_A alpha` for a 1-form: `(alpha . A)_a = alpha_b A^b_a`.
pub fn i_a_oneform(a: &EMat, alpha: &Form) -> Form {
    assert_eq!(alpha.degree, 1);
    let m = alpha.dim;
    let comps = (0..m)
        .map(|x| {
            let mut s = Expr::zero();
            for b in 0..m {
                s = s + alpha.get(&[b]) * a[b][x].clone();
            }
            s
        })
        .collect();
    Form::one_form(m, comps)
}

/// `i_A omega` for a 2-form: `(i_A w)(X,Y) = w(AX,Y) + w(X,AY)`.
pub fn i_a_twoform(a: &EMat, omega: &Form) -> Form {
    assert_eq!(omega.degree, 2);
    let m = omega.dim;
    let mut out = Form::zero(m, 2);
    for x in 0..m {
        for y in (x + 1)..m {
            let mut s = Expr::zero();
            for c in 0..m {
                s = s + a[c][x].clone() * omega.get(&[c, y]) + a[c][y].clone() * omega.get(&[x, c]);
            }
            out.set(&[x, y], s);
        }
    }
    out
}

/// Derivation `d_A = i_A d - d i_A` applied to a function (1-form result).
pub fn d_a_function(chart: &Chart, a: &EMat, f: &Expr) -> Form {
    let m = chart.dim();
    let df = ext_deriv(chart, &Form::function(m, f.clone()));
    i_a_oneform(a, &df)
}

/// `d_A` applied to a 1-form (2-form result): `i_A d(alpha) - d(alpha . A)`.
pub fn d_a_oneform(chart: &Chart, a: &EMat, alpha: &Form) -> Form {
    let d_alpha = ext_deriv(chart, alpha);
    let lhs = i_a_twoform(a, &d_alpha);
    let rhs = ext_deriv(chart, &i_a_oneform(a, alpha));
    let m = alpha.dim;
    let mut out = Form::zero(m, 2);
    for x in 0..m {
        for y in (x + 1)..m {
            out.set(&[x, y], lhs.get(&[x, y]) - rhs.get(&[x, y]));
        }
    }
    out
}

/// Wedge of two 1-forms.
pub fn wedge_one_one(alpha: &Form, beta: &Form) -> Form {
    assert_eq!(alpha.degree, 1);
    assert_eq!(beta.degree, 1);
    let m = alpha.dim;
    let mut out = Form::zero(m, 2);
    for x in 0..m {
        for y in (x + 1)..m {
            out.set(
                &[x, y],
                alpha.get(&[x]) * beta.get(&[y]) - alpha.get(&[y]) * beta.get(&[x]),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Point};
    use crate::symmat;

    fn probe() -> Point {
        Point::new(vec![0.7, 0.9], vec![0.4, -0.6])
    }

    #[test]
    fn nijenhuis_of_identity_vanishes() {
        let chart = Chart::base(2);
        let n = nijenhuis(&chart, &symmat::identity(2));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    assert!(n[k][i][j].is_zero());
                }
            }
        }
    }

    #[test]
    fn nijenhuis_matches_bracket_oracle() {
        // J with J^1_1 = q2, everything else zero. Direct oracle:
        // N(X,Y) = [JX,JY] + J^2[X,Y] - J[JX,Y] - J[X,JY] on coordinate fields.
        let chart = Chart::base(2);
        let j = vec![
            vec![parse("q2", 2).unwrap(), Expr::zero()],
            vec![Expr::zero(), Expr::zero()],
        ];
        let n = nijenhuis(&chart, &j);
        let p = probe();

        let e1 = vec![Expr::one(), Expr::zero()];
        let e2 = vec![Expr::zero(), Expr::one()];
        let j_apply = |v: &[Expr]| symmat::apply(&j, v);
        let lhs = bracket(&chart, &j_apply(&e1), &j_apply(&e2));
        let t2 = bracket(&chart, &e1, &e2); // zero
        let t3 = bracket(&chart, &j_apply(&e1), &e2);
        let t4 = bracket(&chart, &e1, &j_apply(&e2));
        for k in 0..2 {
            let oracle = lhs[k].clone() + symmat::apply(&symmat::mul(&j, &j), &t2)[k].clone()
                - j_apply(&t3)[k].clone()
                - j_apply(&t4)[k].clone();
            let want = oracle.eval(&p).unwrap();
            let got = n[k][0][1].eval(&p).unwrap();
            assert!((want - got).abs() < 1e-12, "component {k}: {want} vs {got}");
        }
        // and the closed form: N^1_12 = q2
        assert!((n[0][0][1].eval(&p).unwrap() - 0.9).abs() < 1e-14);
    }

    #[test]
    fn fn_bracket_self_is_twice_nijenhuis() {
        let chart = Chart::base(2);
        let a = vec![
            vec![parse("q1^2 + 1", 2).unwrap(), parse("q1*q2", 2).unwrap()],
            vec![parse("q1*q2", 2).unwrap(), parse("q2^2 + 1", 2).unwrap()],
        ];
        let n = nijenhuis(&chart, &a);
        let f = fn_bracket(&chart, &a, &a);
        let p = probe();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let lhs = f[k][i][j].eval(&p).unwrap();
                    let rhs = 2.0 * n[k][i][j].eval(&p).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn haantjes_vanishes_for_torsion_free() {
        let chart = Chart::base(2);
        let a = vec![
            vec![parse("q1^2 + 1", 2).unwrap(), parse("q1*q2", 2).unwrap()],
            vec![parse("q1*q2", 2).unwrap(), parse("q2^2 + 1", 2).unwrap()],
        ];
        let h = haantjes(&chart, &a);
        let p = probe();
        for k in 0..2 {
            assert!(h[k][0][1].eval(&p).unwrap().abs() < 1e-12);
        }
        // identity too
        let h = haantjes(&chart, &symmat::identity(2));
        for k in 0..2 {
            assert!(h[k][0][1].is_zero());
        }
    }

    #[test]
    fn lie_derivative_of_identity_vanishes() {
        let chart = Chart::base(2);
        let v = vec![parse("q1*q2", 2).unwrap(), parse("sin(q1)", 2).unwrap()];
        let l = lie_derivative_11(&chart, &v, &symmat::identity(2));
        let p = probe();
        for i in 0..2 {
            for j in 0..2 {
                assert!(l[i][j].eval(&p).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn d_squared_is_zero() {
        let chart = Chart::tangent(2);
        let f = parse("sin(q1*q2) + u1^2*q2 - u2", 2).unwrap();
        let df = ext_deriv(&chart, &Form::function(4, f));
        let ddf = ext_deriv(&chart, &df);
        let p = probe();
        for c in ddf.components() {
            assert!(c.eval(&p).unwrap().abs() < 1e-15);
        }
        let dddf = ext_deriv(&chart, &ddf);
        for c in dddf.components() {
            assert!(c.eval(&p).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn form_sign_bookkeeping() {
        let mut w = Form::zero(3, 2);
        w.set(&[0, 1], Expr::one());
        assert!(w.get(&[1, 0]).eval(&probe()).unwrap() == -1.0);
        assert!(w.get(&[1, 1]).is_zero());
    }
}
