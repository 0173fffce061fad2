//! Dyadic hazard ratios `u_k = P(2^k < xi <= 2^(k+1)) / P(xi > 2^k)` of a
//! tail function and a trend test for `sum u_k^2 < inf`, the condition under
//! which the largest summand dominates the sum of i.i.d. copies of `xi`.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt;

pub const DEFAULT_K: usize = 64;

/// Tail `T(r) = P(xi > r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailFunction {
    /// `r^-alpha` for `r >= 1`.
    Poly { alpha: f64 },
    /// `1 / ln r` for `r >= e`.
    LogTail,
    /// `exp(-(ln r)^beta)` for `r >= 1`.
    StretchedExp { beta: f64 },
    /// Right-continuous step function through `(r, T(r))` pairs sorted by `r`;
    /// `T = 1` left of the first point.
    Custom { table: Vec<(f64, f64)> },
}

impl TailFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            TailFunction::Poly { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be positive, got {alpha}"),
            }),
            TailFunction::StretchedExp { beta } if !(*beta > 0.0 && beta.is_finite()) => {
                Err(Error::InvalidParameter {
                    name: "beta",
                    reason: format!("must be positive, got {beta}"),
                })
            }
            TailFunction::Custom { table } => {
                if table.is_empty() {
                    return Err(Error::InvalidInput("custom tail table is empty".into()));
                }
                for (i, &(r, p)) in table.iter().enumerate() {
                    if !(0.0..=1.0).contains(&p) || !r.is_finite() {
                        return Err(Error::InvalidInput(format!("table[{i}]: need finite r and T in [0, 1]")));
                    }
                    if i > 0 && (r <= table[i - 1].0 || p > table[i - 1].1) {
                        return Err(Error::InvalidInput(format!(
                            "table[{i}]: r must increase and T must not increase"
                        )));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `ln T(2^k)`.
    pub fn ln_tail_dyadic(&self, k: usize) -> f64 {
        let lr = k as f64 * LN_2;
        match self {
            TailFunction::Poly { alpha } => -alpha * lr,
            TailFunction::LogTail => {
                if lr >= 1.0 {
                    -lr.ln()
                } else {
                    0.0
                }
            }
            TailFunction::StretchedExp { beta } => -lr.powf(*beta),
            TailFunction::Custom { table } => {
                let r = 2f64.powi(k as i32);
                match table.iter().rposition(|&(x, _)| x <= r) {
                    Some(i) => table[i].1.ln(),
                    None => 0.0,
                }
            }
        }
    }

    pub fn tail_dyadic(&self, k: usize) -> f64 {
        self.ln_tail_dyadic(k).exp()
    }

    /// `ln T(2^(k+1)) - ln T(2^k)`, in closed form where one exists.
    fn ln_ratio(&self, k: usize) -> f64 {
        match self {
            TailFunction::Poly { alpha } => -alpha * LN_2,
            TailFunction::LogTail if k as f64 * LN_2 >= 1.0 => -(1.0 / k as f64).ln_1p(),
            _ => self.ln_tail_dyadic(k + 1) - self.ln_tail_dyadic(k),
        }
    }
}

impl FromStr for TailFunction {
    type Err = Error;

    /// `poly:<alpha>`, `log_tail`, `stretched_exp:<beta>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |what: &'static str| -> Result<f64> {
            arg.ok_or_else(|| Error::InvalidInput(format!("`{name}` needs a parameter, e.g. {name}:0.5")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter {
                    name: what,
                    reason: e.to_string(),
                })
        };
        let t = match name.replace('-', "_").as_str() {
            "poly" => TailFunction::Poly { alpha: num("alpha")? },
            "log_tail" => TailFunction::LogTail,
            "stretched_exp" => TailFunction::StretchedExp { beta: num("beta")? },
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown tail `{s}`; expected poly:<alpha>, log_tail or stretched_exp:<beta>"
                )))
            }
        };
        t.validate()?;
        Ok(t)
    }
}

/// `u_0, ..., u_K`.
pub fn u_sequence(tail: &TailFunction, k_max: usize) -> Result<Vec<f64>> {
    tail.validate()?;
    (0..=k_max)
        .map(|k| {
            if tail.ln_tail_dyadic(k) == f64::NEG_INFINITY {
                return Err(Error::TailExhausted(k));
            }
            let r = tail.ln_ratio(k);
            Ok(if r == f64::NEG_INFINITY { 1.0 } else { (-r.exp_m1()).clamp(0.0, 1.0) })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PruittVerdict {
    ConvergentTrend,
    DivergentTrend,
    Inconclusive,
}

impl PruittVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            PruittVerdict::ConvergentTrend => "CONVERGENT_TREND",
            PruittVerdict::DivergentTrend => "DIVERGENT_TREND",
            PruittVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PruittDiagnostic {
    pub partial_sums: Vec<f64>,
    pub verdict: PruittVerdict,
    /// Least-squares slope of `ln u_k^2` against `ln k` on the last half.
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
}

pub const MIN_TERMS: usize = 17;
const SLOPE_LIMIT: f64 = -1.0;
const MIN_R2: f64 = 0.9;
const FLOOR_FRACTION: f64 = 0.5;

fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Heuristic trend verdict on finitely many terms. CONVERGENT_TREND: `u_k^2`
/// decays like `k^s` with fitted `s < -1` over the last half. DIVERGENT_TREND:
/// every `u_k^2` there stays above half their mean. Needs at least 17 terms.
pub fn pruitt_diagnostic(u: &[f64]) -> PruittDiagnostic {
    let mut acc = 0.0;
    let partial_sums: Vec<f64> = u
        .iter()
        .map(|x| {
            acc += x * x;
            acc
        })
        .collect();
    let mut out = PruittDiagnostic {
        partial_sums,
        verdict: PruittVerdict::Inconclusive,
        slope: None,
        r_squared: None,
    };
    if u.len() < MIN_TERMS {
        return out;
    }
    let start = (u.len() / 2).max(1);
    let sq: Vec<f64> = u[start..].iter().map(|x| x * x).collect();
    if sq.iter().all(|&s| s == 0.0) {
        out.verdict = PruittVerdict::ConvergentTrend;
        return out;
    }
    if sq.iter().all(|&s| s > 0.0) {
        let xs: Vec<f64> = (start..u.len()).map(|k| (k as f64).ln()).collect();
        let ys: Vec<f64> = sq.iter().map(|s| s.ln()).collect();
        let (slope, r2) = fit(&xs, &ys);
        out.slope = Some(slope);
        out.r_squared = Some(r2);
        if slope < SLOPE_LIMIT && r2 >= MIN_R2 {
            out.verdict = PruittVerdict::ConvergentTrend;
            return out;
        }
    }
    let mean = sq.iter().sum::<f64>() / sq.len() as f64;
    if mean > 0.0 && sq.iter().all(|&s| s >= FLOOR_FRACTION * mean) {
        out.verdict = PruittVerdict::DivergentTrend;
    }
    out
}

/// `k, T(2^k), u_k, sum_{j <= k} u_j^2`.
pub fn pruitt_csv(tail: &TailFunction, u: &[f64], diag: &PruittDiagnostic) -> String {
    let mut out = String::from("k,tail,u_k,partial_sum\n");
    for (k, (x, s)) in u.iter().zip(&diag.partial_sums).enumerate() {
        writeln!(
            out,
            "{k},{},{},{}",
            numfmt::ext(1.0, tail.ln_tail_dyadic(k)),
            numfmt::float(*x),
            numfmt::float(*s)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_tail_closed_form() {
        let u = u_sequence(&TailFunction::LogTail, 64).unwrap();
        for (k, x) in u.iter().enumerate().skip(2) {
            // 1 - k/(k+1) computed independently
            let expect = 1.0 - k as f64 / (k as f64 + 1.0);
            assert!((x - expect).abs() < 1e-12, "k = {k}");
        }
        assert_eq!(u[0], 0.0);
    }

    #[test]
    fn poly_closed_form() {
        for alpha in [0.5, 1.0, 1.5, 3.0] {
            let u = u_sequence(&TailFunction::Poly { alpha }, 64).unwrap();
            let expect = 1.0 - 2f64.powf(-alpha);
            assert!(u.iter().all(|x| (x - expect).abs() < 1e-12));
        }
    }

    #[test]
    fn constant_table_gives_zero() {
        let t = TailFunction::Custom { table: vec![(0.0, 1.0)] };
        assert!(u_sequence(&t, 20).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn exhausted_tail() {
        let t = TailFunction::Custom {
            table: vec![(1.0, 1.0), (8.0, 0.5), (100.0, 0.0)],
        };
        assert!(matches!(u_sequence(&t, 10), Err(Error::TailExhausted(7))));
        let u = u_sequence(&t, 6).unwrap();
        assert_eq!(u[2], 0.5);
        assert_eq!(u[6], 1.0);
    }

    #[test]
    fn verdicts() {
        let harmonic: Vec<f64> = (0..65).map(|k| 1.0 / (k as f64 + 1.0)).collect();
        assert_eq!(pruitt_diagnostic(&harmonic).verdict, PruittVerdict::ConvergentTrend);
        assert_eq!(pruitt_diagnostic(&[0.5; 65]).verdict, PruittVerdict::DivergentTrend);
        let alt: Vec<f64> = (0..65).map(|k| (k % 2) as f64).collect();
        assert_eq!(pruitt_diagnostic(&alt).verdict, PruittVerdict::Inconclusive);
        assert_eq!(pruitt_diagnostic(&harmonic[..10]).verdict, PruittVerdict::Inconclusive);
    }

    #[test]
    fn stretched_exp_small_beta_converges() {
        let u = u_sequence(&TailFunction::StretchedExp { beta: 0.3 }, 64).unwrap();
        assert!(u.iter().all(|x| (0.0..=1.0).contains(x)));
        assert_eq!(pruitt_diagnostic(&u).verdict, PruittVerdict::ConvergentTrend);
    }

    #[test]
    fn partial_sums_and_csv() {
        let u = vec![0.5, 0.5];
        let d = pruitt_diagnostic(&u);
        assert_eq!(d.partial_sums, vec![0.25, 0.5]);
        let csv = pruitt_csv(&TailFunction::Poly { alpha: 1.0 }, &u, &d);
        assert_eq!(csv, "k,tail,u_k,partial_sum\n0,1,0.5,0.25\n1,0.5,0.5,0.5\n");
    }

    #[test]
    fn parse_names() {
        assert_eq!("log_tail".parse::<TailFunction>().unwrap(), TailFunction::LogTail);
        assert_eq!("poly:1.5".parse::<TailFunction>().unwrap(), TailFunction::Poly { alpha: 1.5 });
        assert!("poly:-1".parse::<TailFunction>().is_err());
        assert!("gauss".parse::<TailFunction>().is_err());
    }
}
