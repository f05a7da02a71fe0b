//! Machine- and human-readable check reports.
//!
//! The JSON layout is fixed: `{"scenario", "seed", "checks": [...], "passed"}`
//! with one object per check. A not-applicable check serializes its residual
//! as -1.0 and carries a `reason`; an inverted (expected-nonzero) check
//! carries `"expect": "nonzero"`.

use serde::Serialize;

use crate::expr::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "not-applicable")]
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorstPoint {
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl From<&Point> for WorstPoint {
    fn from(p: &Point) -> WorstPoint {
        WorstPoint {
            q: p.q.clone(),
            u: p.u.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub anchor: String,
    pub residual: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub worst_point: WorstPoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl Report {
    pub fn new(scenario: String, seed: u64, checks: Vec<CheckResult>) -> Report {
        let passed = checks.iter().all(|c| c.verdict != Verdict::Fail);
        Report {
            scenario,
            seed,
            checks,
            passed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per check, aligned for terminal reading. The runtime goes
    /// to the text report only; the JSON stays byte-deterministic.
    pub fn render_text(&self, runtime: Option<std::time::Duration>) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scenario {}  (seed {})\n",
            self.scenario, self.seed
        ));
        for c in &self.checks {
            let verdict = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::NotApplicable => "N/A ",
            };
            let expect = match &c.expect {
                Some(e) => format!("  [expect {e}]"),
                None => String::new(),
            };
            match c.verdict {
                Verdict::NotApplicable => {
                    out.push_str(&format!(
                        "  {verdict}  {:<28} ({}): {}\n",
                        c.id,
                        c.anchor,
                        c.reason.as_deref().unwrap_or("not applicable")
                    ));
                }
                _ => {
                    out.push_str(&format!(
                        "  {verdict}  {:<28} ({}): residual {:.3e}  tol {:.1e}{}\n",
                        c.id, c.anchor, c.residual, c.tol, expect
                    ));
                }
            }
        }
        if let Some(rt) = runtime {
            out.push_str(&format!("runtime: {:.1} ms\n", rt.as_secs_f64() * 1e3));
        }
        out.push_str(&format!(
            "result: {}\n",
            if self.passed {
                "all checks passed"
            } else {
                "FAILURES present"
            }
        ));
        out
    }
}
