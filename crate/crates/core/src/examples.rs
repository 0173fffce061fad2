//! Canonical example walks with PASS/FAIL reports against their known
//! direction sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{
    self, band_spec, default_scale, drift_alpha, one_sided_cone, rad_alpha, two_point_estimator, Check, Overrides,
    Scale, ACCEPTANCE_SEED,
};
use crate::direction_estimator::{combine_runs, CapVisitAccumulator, DirectionSetEstimate, EstimatorConfig, Verdict};
use crate::error::{Error, Result};
use crate::samplers::{make_increment_sampler, IncrementSpec};
use crate::sphere_geom::{chord_to_angle, s_hull, UnitVec};
use crate::walk_engine::{run_walk_stream, RunOptions};

pub const EXAMPLES: [&str; 5] = ["ex-10.1", "ex-10.2", "ex-10.3", "ex-10.4", "heavytails-demo"];

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExampleOverrides {
    pub scale: Overrides,
    pub alpha: Option<f64>,
    pub dimension: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExampleReport {
    pub name: String,
    pub spec: IncrementSpec,
    pub expected: String,
    pub checks: Vec<NamedCheck>,
    pub passed: bool,
}

impl ExampleReport {
    fn new(name: &str, spec: IncrementSpec, expected: impl Into<String>, checks: Vec<(&str, Check)>) -> Self {
        let checks: Vec<NamedCheck> = checks
            .into_iter()
            .map(|(n, c)| NamedCheck {
                name: n.to_string(),
                passed: c.passed,
                detail: c.detail,
            })
            .collect();
        ExampleReport {
            name: name.to_string(),
            spec,
            expected: expected.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} (expected direction set: {})\n", self.name, self.expected);
        for c in &self.checks {
            out += &format!("  {}: {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        out += if self.passed { "PASS\n" } else { "FAIL\n" };
        out
    }
}

fn scale(id: u32, o: &Overrides) -> Scale {
    let s = default_scale(id);
    Scale {
        runs: o.runs.unwrap_or(s.runs),
        steps: o.steps.unwrap_or(s.steps),
        seed: o.seed.unwrap_or(s.seed),
    }
}

fn bad_alpha(reason: String) -> Error {
    Error::InvalidParameter { name: "alpha", reason }
}

pub fn reproduce_example(name: &str, o: &ExampleOverrides) -> Result<ExampleReport> {
    let so = &o.scale;
    if so.runs == Some(0) {
        return Err(Error::InvalidParameter {
            name: "runs",
            reason: "must be at least 1".into(),
        });
    }
    if so.steps.is_some_and(|n| n < 8) {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "must be at least 8".into(),
        });
    }
    match name {
        "ex-10.1" => {
            let alpha = o.alpha.unwrap_or(0.5);
            let spec = drift_alpha(alpha);
            if alpha > 0.0 && alpha < 1.0 {
                let c = criteria::two_point_check(&spec, scale(4, so))?;
                Ok(ExampleReport::new(name, spec, "{+e2, -e2}", vec![("two-point set", c)]))
            } else if alpha > 1.0 {
                let c = criteria::drift_check(&spec, &[1.0, 0.0], scale(5, so))?;
                Ok(ExampleReport::new(name, spec, "{e1}", vec![("limiting direction", c)]))
            } else {
                Err(bad_alpha(format!("needs 0 < alpha < 1 or alpha > 1, got {alpha}")))
            }
        }
        "ex-10.2" => {
            let alpha = o.alpha.unwrap_or(1.5);
            let spec = rad_alpha(alpha);
            if alpha > 1.0 {
                let c = criteria::full_circle_check(&spec, scale(6, so))?;
                Ok(ExampleReport::new(name, spec, "full circle", vec![("coverage", c)]))
            } else if alpha > 0.0 && alpha < 1.0 {
                let c = criteria::two_point_check(&spec, scale(4, so))?;
                Ok(ExampleReport::new(name, spec, "{+e2, -e2}", vec![("two-point set", c)]))
            } else {
                Err(bad_alpha(format!("needs 0 < alpha < 1 or alpha > 1, got {alpha}")))
            }
        }
        "ex-10.3" => {
            let d = o.dimension.unwrap_or(4);
            let alpha = o.alpha.unwrap_or(1.1);
            let upper = 2.0 * (d as f64 - 1.0) / (d as f64 + 1.0);
            if d < 4 {
                return Err(Error::InvalidParameter {
                    name: "dimension",
                    reason: format!("needs d >= 4, got {d}"),
                });
            }
            if !(alpha > 1.0 && alpha < upper) {
                return Err(bad_alpha(format!("needs 1 < alpha < {upper:.4} for d = {d}, got {alpha}")));
            }
            let c = criteria::band_check(d, alpha, scale(8, so))?;
            Ok(ExampleReport::new(
                name,
                band_spec(d, alpha),
                format!("equator orthogonal to e{d}"),
                vec![("band concentration", c)],
            ))
        }
        "ex-10.4" => {
            let alpha = o.alpha.unwrap_or(0.5);
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(bad_alpha(format!("needs 0 < alpha < 1, got {alpha}")));
            }
            let vectors = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            let s = Scale {
                runs: so.runs.unwrap_or(10),
                steps: so.steps.unwrap_or(100_000),
                seed: so.seed.unwrap_or(ACCEPTANCE_SEED + 14_000),
            };
            let spec = one_sided_cone(vectors.clone(), alpha);
            let c = cone_check(&spec, &vectors, s)?;
            Ok(ExampleReport::new(name, spec, "closed first-quadrant arc", vec![("cone", c)]))
        }
        "heavytails-demo" => {
            let bound = criteria::bound_check_runs(scale(3, so))?;
            let atoms = criteria::log_tail_atoms(scale(7, so))?;
            Ok(ExampleReport::new(
                name,
                criteria::log_tail_triangle(),
                "the three atoms",
                vec![("biggest-jump bound", bound), ("atom directions", atoms)],
            ))
        }
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

/// Consensus IN points must lie within the cap radius of the planar s-hull of
/// `vectors`; at least one point must be IN.
pub fn cone_check(spec: &IncrementSpec, vectors: &[Vec<f64>], s: Scale) -> Result<Check> {
    if spec.dimension != 2 {
        return Err(Error::UnsupportedDimension {
            dimension: spec.dimension,
            reason: "cone check compares against planar arcs".into(),
        });
    }
    let gens = vectors.iter().map(|v| UnitVec::new(v.clone())).collect::<Result<Vec<_>>>()?;
    let hull = s_hull(&gens)?;
    let arcs = hull.arcs().ok_or_else(|| Error::InvalidState("planar hull without arcs".into()))?.clone();
    let sampler = make_increment_sampler(spec)?;
    let est = EstimatorConfig {
        levels: 48,
        ..two_point_estimator()
    };
    let estimates: Vec<DirectionSetEstimate> = (0..s.runs)
        .into_par_iter()
        .map(|i| {
            let mut acc = CapVisitAccumulator::new(2, &est)?;
            run_walk_stream(&sampler, s.steps, s.seed, i as u64, &mut [&mut acc], &RunOptions::default())?;
            acc.finalize()
        })
        .collect::<Result<_>>()?;
    let ins = if estimates.len() == 1 {
        estimates[0].in_points()
    } else {
        let c = combine_runs(&estimates)?;
        (0..c.points.len()).filter(|&i| c.points[i].verdict == Verdict::In).collect()
    };
    let tol = chord_to_angle(est.cap_radius);
    let grid = &estimates[0].grid;
    let outside = ins.iter().filter(|&&i| !arcs.contains_angle(grid[i].angle(), tol)).count();
    Ok(Check {
        passed: !ins.is_empty() && outside == 0,
        detail: format!(
            "consensus IN {} points, {outside} farther than the cap radius from the s-hull arc",
            ins.len()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name() {
        let e = reproduce_example("ex-9.9", &ExampleOverrides::default()).unwrap_err();
        assert!(matches!(e, Error::UnknownExample(_)));
    }

    #[test]
    fn alpha_window_enforced() {
        let o = ExampleOverrides {
            alpha: Some(1.5),
            ..Default::default()
        };
        assert!(reproduce_example("ex-10.3", &o).is_err());
        let o = ExampleOverrides {
            alpha: Some(1.0),
            ..Default::default()
        };
        assert!(reproduce_example("ex-10.1", &o).is_err());
    }

    #[test]
    fn small_cone_report() {
        let o = ExampleOverrides {
            scale: Overrides {
                runs: Some(3),
                steps: Some(20_000),
                seed: None,
            },
            ..Default::default()
        };
        let r = reproduce_example("ex-10.4", &o).unwrap();
        assert!(r.passed, "{}", r.to_text());
        assert!(r.to_text().ends_with("PASS\n"));
    }
}
