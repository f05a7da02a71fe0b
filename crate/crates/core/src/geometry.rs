//! Scenario data model: base chart dimension, Lagrangian or metric, the
//! tensor `J` on the base, an optional basic function `f`, and the sampling
//! configuration; plus the generic tensor-field container shared by the
//! geometric modules.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{self, Expr, Point, Var};
use crate::rng::SplitMix64;
use crate::smalllin::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Riemannian,
    Lagrangian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// Base manifold chart, dimension n.
    Q,
    /// Tangent-bundle chart, dimension 2n.
    TQ,
}

/// Component array of expressions with a declared variance and space.
///
/// Components are stored row-major over the index tuple, contravariant
/// indices first. A `(1,1)` field on Q of dimension n therefore stores
/// `n*n` entries with `comps[i*n + j] = T^i_j`.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub space: Space,
    pub contra: usize,
    pub co: usize,
    pub dim: usize,
    pub comps: Vec<Expr>,
}

impl TensorField {
    pub fn new(space: Space, contra: usize, co: usize, dim: usize, comps: Vec<Expr>) -> Self {
        assert_eq!(
            comps.len(),
            dim.pow((contra + co) as u32),
            "component count"
        );
        TensorField {
            space,
            contra,
            co,
            dim,
            comps,
        }
    }

    pub fn rank(&self) -> usize {
        self.contra + self.co
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        assert_eq!(idx.len(), self.rank());
        let mut flat = 0;
        for &i in idx {
            flat = flat * self.dim + i;
        }
        &self.comps[flat]
    }

    pub fn from_mat(space: Space, contra: usize, co: usize, m: &[Vec<Expr>]) -> Self {
        let dim = m.len();
        let comps = m.iter().flat_map(|row| row.iter().cloned()).collect();
        TensorField::new(space, contra, co, dim, comps)
    }

    /// View a rank-2 field as a nested matrix.
    pub fn to_mat(&self) -> Vec<Vec<Expr>> {
        assert_eq!(self.rank(), 2);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.comps[i * self.dim + j].clone())
                    .collect()
            })
            .collect()
    }

    pub fn eval_mat(&self, p: &Point) -> Result<Mat, expr::EvalError> {
        assert_eq!(self.rank(), 2);
        let mut m = Mat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = self.comps[i * self.dim + j].eval(p)?;
            }
        }
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
    pub q_box: Vec<(f64, f64)>,
    pub u_box: Vec<(f64, f64)>,
    pub tolerance: f64,
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub mode: Mode,
    /// Declared metric components (riemannian mode only), functions of q.
    pub metric: Option<Vec<Vec<Expr>>>,
    /// The Lagrangian; synthesized as (1/2) g_ij u^i u^j in riemannian mode.
    pub lagrangian: Expr,
    /// J^i_j components, functions of q only.
    pub j: Vec<Vec<Expr>>,
    /// Optional basic function f(q).
    pub f: Option<Expr>,
    pub sampling: Sampling,
    /// Check ids whose verdict the runner must invert ("nonzero" expected).
    pub expect_nonzero: Vec<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("invalid scenario document: {0}")]
    Json(String),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dimension mismatch at {path}: expected {expected}, got {got}")]
    Dimension {
        path: String,
        expected: String,
        got: String,
    },
    #[error("expression error at {path}: {source}")]
    Expr {
        path: String,
        source: expr::ParseError,
    },
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(
        "sampling exhausted: accepted {accepted} of {requested} points after {attempts} attempts"
    )]
    Exhausted {
        accepted: usize,
        requested: usize,
        attempts: usize,
    },
}

/// Reproducible set of accepted sample points.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub seed: u64,
}

#[derive(Deserialize)]
struct RawSampling {
    count: Option<usize>,
    seed: Option<u64>,
    q_box: Option<Vec<Vec<f64>>>,
    u_box: Option<Vec<Vec<f64>>>,
    tolerance: Option<f64>,
}

#[derive(Deserialize)]
struct RawScenario {
    name: String,
    dim: usize,
    mode: String,
    metric: Option<Vec<Vec<String>>>,
    lagrangian: Option<String>,
    #[serde(rename = "J")]
    j: Vec<Vec<String>>,
    f: Option<String>,
    sampling: Option<RawSampling>,
    expect: Option<BTreeMap<String, String>>,
}

pub const DEFAULT_COUNT: usize = 50;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_Q_RANGE: (f64, f64) = (0.3, 1.2);
pub const DEFAULT_U_RANGE: (f64, f64) = (-1.0, 1.0);
/// Metric-regularity rejection threshold for sampled points.
pub const DET_G_MIN: f64 = 1e-6;

/// Fixed probe point used by expected-negative checks so that failures are
/// reproducible; coordinates cycle through a fixed pattern per dimension.
pub fn probe_point(n: usize) -> Point {
    let qs = [0.7, 0.9, 0.5, 1.1];
    let us = [0.4, -0.6, 0.8, -0.3];
    Point::new(
        (0..n).map(|i| qs[i % 4]).collect(),
        (0..n).map(|i| us[i % 4]).collect(),
    )
}

fn parse_expr_at(text: &str, n: usize, path: &str) -> Result<Expr, LoadError> {
    expr::parse(text, n).map_err(|e| LoadError::Expr {
        path: path.to_string(),
        source: e,
    })
}

fn parse_matrix(
    raw: &[Vec<String>],
    n: usize,
    path: &str,
    base_only: bool,
) -> Result<Vec<Vec<Expr>>, LoadError> {
    if raw.len() != n {
        return Err(LoadError::Dimension {
            path: path.to_string(),
            expected: format!("{n} rows"),
            got: format!("{} rows", raw.len()),
        });
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(LoadError::Dimension {
                path: format!("{path}[{i}]"),
                expected: format!("{n} columns"),
                got: format!("{} columns", row.len()),
            });
        }
        let mut exprs = Vec::with_capacity(n);
        for (j, text) in row.iter().enumerate() {
            let cell = format!("{path}[{i}][{j}]");
            let e = parse_expr_at(text, n, &cell)?;
            if base_only && e.depends_on_fiber() {
                return Err(LoadError::Schema {
                    path: cell,
                    message: "component must depend on base coordinates only".to_string(),
                });
            }
            exprs.push(e);
        }
        out.push(exprs);
    }
    Ok(out)
}

fn convert_box(
    raw: Option<Vec<Vec<f64>>>,
    n: usize,
    default: (f64, f64),
    path: &str,
) -> Result<Vec<(f64, f64)>, LoadError> {
    match raw {
        None => Ok(vec![default; n]),
        Some(rows) => {
            if rows.len() != n {
                return Err(LoadError::Dimension {
                    path: path.to_string(),
                    expected: format!("{n} intervals"),
                    got: format!("{}", rows.len()),
                });
            }
            let mut out = Vec::with_capacity(n);
            for (i, r) in rows.iter().enumerate() {
                if r.len() != 2 || r[0] >= r[1] {
                    return Err(LoadError::Schema {
                        path: format!("{path}[{i}]"),
                        message: "interval must be [lo, hi] with lo < hi".to_string(),
                    });
                }
                out.push((r[0], r[1]));
            }
            Ok(out)
        }
    }
}

/// Parse and validate a scenario document (a single JSON object).
pub fn load_scenario(document: &str) -> Result<Scenario, LoadError> {
    let raw: RawScenario =
        serde_json::from_str(document).map_err(|e| LoadError::Json(e.to_string()))?;
    let n = raw.dim;
    if !(1..=4).contains(&n) {
        return Err(LoadError::Schema {
            path: "dim".to_string(),
            message: format!("dimension must be in 1..=4, got {n}"),
        });
    }
    let mode = match raw.mode.as_str() {
        "riemannian" => Mode::Riemannian,
        "lagrangian" => Mode::Lagrangian,
        other => {
            return Err(LoadError::Schema {
                path: "mode".to_string(),
                message: format!("mode must be \"riemannian\" or \"lagrangian\", got \"{other}\""),
            })
        }
    };

    let (metric, lagrangian) = match mode {
        Mode::Riemannian => {
            let m = raw.metric.as_ref().ok_or_else(|| LoadError::Schema {
                path: "metric".to_string(),
                message: "riemannian mode requires a metric".to_string(),
            })?;
            if raw.lagrangian.is_some() {
                return Err(LoadError::Schema {
                    path: "lagrangian".to_string(),
                    message: "riemannian mode synthesizes the Lagrangian; omit the field"
                        .to_string(),
                });
            }
            let g = parse_matrix(m, n, "metric", true)?;
            let mut l = Expr::zero();
            for i in 0..n {
                for j in 0..n {
                    l = l + Expr::rat(1, 2) * g[i][j].clone() * Expr::u(i) * Expr::u(j);
                }
            }
            (Some(g), l)
        }
        Mode::Lagrangian => {
            if raw.metric.is_some() {
                return Err(LoadError::Schema {
                    path: "metric".to_string(),
                    message: "lagrangian mode takes no metric".to_string(),
                });
            }
            let text = raw.lagrangian.as_ref().ok_or_else(|| LoadError::Schema {
                path: "lagrangian".to_string(),
                message: "lagrangian mode requires a lagrangian".to_string(),
            })?;
            (None, parse_expr_at(text, n, "lagrangian")?)
        }
    };

    let j = parse_matrix(&raw.j, n, "J", true)?;
    let f = match &raw.f {
        None => None,
        Some(text) => {
            let e = parse_expr_at(text, n, "f")?;
            if e.depends_on_fiber() {
                return Err(LoadError::Schema {
                    path: "f".to_string(),
                    message: "f must be a function of the base coordinates".to_string(),
                });
            }
            Some(e)
        }
    };

    let raw_sampling = raw.sampling.unwrap_or(RawSampling {
        count: None,
        seed: None,
        q_box: None,
        u_box: None,
        tolerance: None,
    });
    let sampling = Sampling {
        count: raw_sampling.count.unwrap_or(DEFAULT_COUNT),
        seed: raw_sampling.seed.unwrap_or(DEFAULT_SEED),
        q_box: convert_box(raw_sampling.q_box, n, DEFAULT_Q_RANGE, "sampling.q_box")?,
        u_box: convert_box(raw_sampling.u_box, n, DEFAULT_U_RANGE, "sampling.u_box")?,
        tolerance: raw_sampling.tolerance.unwrap_or(DEFAULT_TOLERANCE),
    };

    let mut expect_nonzero = Vec::new();
    if let Some(map) = raw.expect {
        for (id, want) in map {
            if want != "nonzero" {
                return Err(LoadError::Schema {
                    path: format!("expect.{id}"),
                    message: format!("unsupported expectation \"{want}\" (only \"nonzero\")"),
                });
            }
            expect_nonzero.push(id);
        }
    }

    Ok(Scenario {
        name: raw.name,
        n,
        mode,
        metric,
        lagrangian,
        j,
        f,
        sampling,
        expect_nonzero,
    })
}

impl Scenario {
    pub fn from_file(path: &std::path::Path) -> Result<Scenario, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LoadError::Json(format!("cannot read {}: {e}", path.display())))?;
        load_scenario(&text)
    }

    pub fn tolerance(&self) -> f64 {
        self.sampling.tolerance
    }

    /// Hessian g_ij = d^2 L / du^i du^j as expressions.
    pub fn hessian_metric(&self) -> TensorField {
        let n = self.n;
        let mut comps = Vec::with_capacity(n * n);
        let du: Vec<Expr> = (0..n).map(|i| self.lagrangian.diff(Var::u(i))).collect();
        for du_i in du.iter() {
            for j in 0..n {
                comps.push(du_i.diff(Var::u(j)));
            }
        }
        TensorField::new(Space::Q, 0, 2, n, comps)
    }

    /// The metric the geometry runs on: the declared one in riemannian mode,
    /// the Hessian of L otherwise.
    pub fn effective_metric(&self) -> Vec<Vec<Expr>> {
        match (&self.metric, self.mode) {
            (Some(g), Mode::Riemannian) => g.clone(),
            _ => self.hessian_metric().to_mat(),
        }
    }

    pub fn j_field(&self) -> TensorField {
        TensorField::from_mat(Space::Q, 1, 1, &self.j)
    }

    /// Draw `count` points from the boxes, rejecting points where the metric
    /// (or Hessian) degenerates. Redraw cap: 100 * count attempts.
    pub fn sample(&self) -> Result<SampleSet, SampleError> {
        let n = self.n;
        let g = self.effective_metric();
        let mut rng = SplitMix64::new(self.sampling.seed);
        let mut points = Vec::with_capacity(self.sampling.count);
        let cap = 100 * self.sampling.count;
        let mut attempts = 0;
        while points.len() < self.sampling.count && attempts < cap {
            attempts += 1;
            let q: Vec<f64> = self
                .sampling
                .q_box
                .iter()
                .map(|&(lo, hi)| rng.uniform(lo, hi))
                .collect();
            let u: Vec<f64> = self
                .sampling
                .u_box
                .iter()
                .map(|&(lo, hi)| rng.uniform(lo, hi))
                .collect();
            let p = Point::new(q, u);
            let mut m = Mat::zeros(n, n);
            let mut ok = true;
            'fill: for i in 0..n {
                for j in 0..n {
                    match g[i][j].eval(&p) {
                        Ok(v) => m[(i, j)] = v,
                        Err(_) => {
                            ok = false;
                            break 'fill;
                        }
                    }
                }
            }
            if ok && m.det().abs() > DET_G_MIN {
                points.push(p);
            }
        }
        if points.len() < self.sampling.count {
            return Err(SampleError::Exhausted {
                accepted: points.len(),
                requested: self.sampling.count,
                attempts,
            });
        }
        Ok(SampleSet {
            points,
            seed: self.sampling.seed,
        })
    }
}

/// Bundled scenario fixtures, keyed by short name (E1..E6).
pub fn builtin_fixture(name: &str) -> Option<&'static str> {
    match name {
        "E1" => Some(include_str!("../fixtures/E1.json")),
        "E2" => Some(include_str!("../fixtures/E2.json")),
        "E3" => Some(include_str!("../fixtures/E3.json")),
        "E4" => Some(include_str!("../fixtures/E4.json")),
        "E5" => Some(include_str!("../fixtures/E5.json")),
        "E6" => Some(include_str!("../fixtures/E6.json")),
        _ => None,
    }
}

pub fn load_builtin(name: &str) -> Scenario {
    load_scenario(builtin_fixture(name).expect("known fixture")).expect("fixture loads")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_synthesizes_flat_lagrangian() {
        let s = load_builtin("E1");
        assert_eq!(s.n, 2);
        assert_eq!(s.mode, Mode::Riemannian);
        let p = Point::new(vec![0.0, 0.0], vec![3.0, 4.0]);
        assert_eq!(s.lagrangian.eval(&p).unwrap(), 12.5);
    }

    #[test]
    fn e3_loads_with_symmetric_j() {
        let s = load_builtin("E3");
        let p = probe_point(2);
        for i in 0..2 {
            for j in 0..2 {
                let a = s.j[i][j].eval(&p).unwrap();
                let b = s.j[j][i].eval(&p).unwrap();
                assert_eq!(a, b);
            }
        }
        assert!(s.f.is_some());
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let doc = r#"{"name":"bad","dim":2,"mode":"riemannian",
            "metric":[["1","0"],["0","1"]],
            "J":[["1","0","0"],["0","1","0"]]}"#;
        match load_scenario(doc) {
            Err(LoadError::Dimension { path, .. }) => assert!(path.starts_with("J")),
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn expression_error_carries_field_path() {
        let doc = r#"{"name":"bad","dim":2,"mode":"riemannian",
            "metric":[["1","0"],["0","sin(q3)"]],
            "J":[["1","0"],["0","1"]]}"#;
        match load_scenario(doc) {
            Err(LoadError::Expr { path, .. }) => assert_eq!(path, "metric[1][1]"),
            other => panic!("expected expr error, got {other:?}"),
        }
    }

    #[test]
    fn fiber_dependent_j_is_rejected() {
        let doc = r#"{"name":"bad","dim":2,"mode":"riemannian",
            "metric":[["1","0"],["0","1"]],
            "J":[["u1","0"],["0","1"]]}"#;
        assert!(matches!(load_scenario(doc), Err(LoadError::Schema { .. })));
    }

    #[test]
    fn hessian_of_e6() {
        let s = load_builtin("E6");
        let h = s.hessian_metric();
        let p = Point::new(vec![0.5, 0.5], vec![0.7, -0.2]);
        let m = h.eval_mat(&p).unwrap();
        assert!((m[(0, 0)] - (1.0 + 3.0 * 0.7 * 0.7)).abs() < 1e-14);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(1, 0)], 0.0);
        assert_eq!(m[(1, 1)], 1.0);
    }

    #[test]
    fn riemannian_hessian_matches_declared_metric() {
        let s = load_builtin("E4");
        let h = s.hessian_metric();
        let sample = s.sample().unwrap();
        for p in &sample.points {
            let hm = h.eval_mat(p).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let declared = s.metric.as_ref().unwrap()[i][j].eval(p).unwrap();
                    let got = hm[(i, j)];
                    assert!(
                        (got - declared).abs() <= 1e-10 * (1.0 + declared.abs().max(got.abs()))
                    );
                }
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_filters() {
        let s = load_builtin("E1");
        let a = s.sample().unwrap();
        let b = s.sample().unwrap();
        assert_eq!(a.points.len(), s.sampling.count);
        assert_eq!(a.points, b.points);

        // E4 with a q-box that includes the metric degeneracy at q1 = 0
        // still completes by rejecting points near the pole.
        let mut s4 = load_builtin("E4");
        s4.sampling.q_box[0] = (0.0, 1.2);
        s4.sampling.count = 30;
        let set = s4.sample().unwrap();
        assert_eq!(set.points.len(), 30);
        for p in &set.points {
            assert!(p.q[0].sin().powi(2) > DET_G_MIN);
        }
    }

    #[test]
    fn degenerate_metric_exhausts_sampling() {
        let doc = r#"{"name":"degenerate","dim":2,"mode":"riemannian",
            "metric":[["1","0"],["0","0"]],
            "J":[["1","0"],["0","1"]],
            "sampling":{"count":5,"seed":1}}"#;
        let s = load_scenario(doc).unwrap();
        assert!(matches!(s.sample(), Err(SampleError::Exhausted { .. })));
    }
}
