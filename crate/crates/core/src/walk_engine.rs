//! The walk `S_0 = 0`, `S_n = X_1 + ... + X_n`, its radial trace `S_n / ||S_n||`
//! and, for radial products `X = Q xi`, the biggest-jump decomposition
//! `T_n = M_n + B_n` with `M_n = max xi_i` attained at index `k(n)`.
//!
//! Heavy-tailed magnitudes overflow `f64` after a handful of steps, so walks
//! with such laws keep their position as `(ln ||S_n||, S_n / ||S_n||)` and the
//! jump statistics as logarithms.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numfmt;
use crate::rng::{self, WalkRng};
use crate::samplers::{make_increment_sampler, Draw, IncrementSampler, IncrementSpec, PositionMode};

/// Tolerance for the biggest-jump inequality.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Position {
    Lattice(Vec<i64>),
    Real(Vec<f64>),
    /// `exp(ln_norm) * dir`, `dir` a unit vector (zero when the walk is at 0).
    Scaled { ln_norm: f64, dir: Vec<f64> },
}

/// `ln(exp(a) + exp(b))`.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Running biggest-jump record of a radial product walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpStats {
    /// `ln M_n`.
    pub ln_max: f64,
    /// `ln B_n`, `-inf` while `B_n = 0`.
    pub ln_rest: f64,
    /// `k(n)`, 1-based step index of the current maximum.
    pub k: u64,
    /// Index of the direction atom drawn at step `k(n)`.
    pub atom: usize,
    pub atom_vector: Vec<f64>,
}

impl JumpStats {
    pub fn max_jump(&self) -> f64 {
        self.ln_max.exp()
    }

    pub fn rest(&self) -> f64 {
        self.ln_rest.exp()
    }

    /// `ln T_n` with `T_n = M_n + B_n`.
    pub fn ln_total(&self) -> f64 {
        ln_add(self.ln_max, self.ln_rest)
    }

    /// `B_n / M_n`.
    pub fn ratio(&self) -> f64 {
        (self.ln_rest - self.ln_max).exp()
    }
}

#[derive(Clone, Debug)]
pub struct WalkState {
    position: Position,
    n: u64,
    jumps: Option<JumpStats>,
    atoms: Vec<Vec<f64>>,
    saturation_events: u64,
    overflowed: bool,
    // derived views, refreshed after every step
    point: Vec<f64>,
    unit: Vec<f64>,
    ln_norm: f64,
    norm: f64,
}

/// Borrowed view of the walk after a step.
#[derive(Clone, Copy, Debug)]
pub struct StepView<'a> {
    pub n: u64,
    /// `S_n` as floats; components may be infinite for heavy-tailed walks.
    pub point: &'a [f64],
    /// `S_n / ||S_n||`, zero at the origin.
    pub unit: &'a [f64],
    /// `||S_n||` (possibly `+inf`).
    pub norm: f64,
    /// `ln ||S_n||` (always finite unless `S_n = 0`).
    pub ln_norm: f64,
    pub jumps: Option<&'a JumpStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced,
    /// A lattice coordinate left the `i64` range; the position is unchanged
    /// and the walk must halt.
    Overflow,
}

impl WalkState {
    pub fn new(sampler: &IncrementSampler) -> Self {
        let d = sampler.dimension();
        let position = match sampler.mode() {
            PositionMode::Lattice => Position::Lattice(vec![0; d]),
            PositionMode::Real => Position::Real(vec![0.0; d]),
            PositionMode::Scaled => Position::Scaled {
                ln_norm: f64::NEG_INFINITY,
                dir: vec![0.0; d],
            },
        };
        WalkState {
            position,
            n: 0,
            jumps: None,
            atoms: sampler.spec().atoms.iter().map(|a| a.vector.clone()).collect(),
            saturation_events: 0,
            overflowed: false,
            point: vec![0.0; d],
            unit: vec![0.0; d],
            ln_norm: f64::NEG_INFINITY,
            norm: 0.0,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn position(&self) -> &Position {
        &self.position
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn ln_norm(&self) -> f64 {
        self.ln_norm
    }

    pub fn jumps(&self) -> Option<&JumpStats> {
        self.jumps.as_ref()
    }

    pub fn saturation_events(&self) -> u64 {
        self.saturation_events
    }

    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn view(&self) -> StepView<'_> {
        StepView {
            n: self.n,
            point: &self.point,
            unit: &self.unit,
            norm: self.norm,
            ln_norm: self.ln_norm,
            jumps: self.jumps.as_ref(),
        }
    }

    /// Advances the walk by one drawn increment.
    pub fn step(&mut self, draw: &Draw) -> StepOutcome {
        if self.overflowed {
            return StepOutcome::Overflow;
        }
        match &mut self.position {
            Position::Lattice(x) => {
                let mut next = x.clone();
                for (xi, &dx) in next.iter_mut().zip(&draw.lattice) {
                    match xi.checked_add(dx) {
                        Some(v) => *xi = v,
                        None => {
                            self.overflowed = true;
                            return StepOutcome::Overflow;
                        }
                    }
                }
                *x = next;
            }
            Position::Real(x) => {
                x.iter_mut().zip(&draw.coords).for_each(|(a, b)| *a += b);
            }
            Position::Scaled { ln_norm, dir } => {
                let a = *ln_norm;
                let b = draw.log_scale;
                let top = a.max(b);
                let wa = if a == f64::NEG_INFINITY { 0.0 } else { (a - top).exp() };
                let wb = (b - top).exp();
                dir.iter_mut()
                    .zip(&draw.coords)
                    .for_each(|(v, q)| *v = wa * *v + wb * q);
                let nw = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if nw == 0.0 || !nw.is_finite() {
                    dir.iter_mut().for_each(|v| *v = 0.0);
                    *ln_norm = f64::NEG_INFINITY;
                } else {
                    dir.iter_mut().for_each(|v| *v /= nw);
                    *ln_norm = top + nw.ln();
                }
            }
        }
        self.n += 1;
        self.saturation_events += draw.saturated as u64;
        if let Some(r) = draw.radial {
            self.record_jump(r.ln_xi, r.atom);
        }
        self.refresh();
        StepOutcome::Advanced
    }

    fn record_jump(&mut self, ln_xi: f64, atom: usize) {
        match &mut self.jumps {
            None => {
                self.jumps = Some(JumpStats {
                    ln_max: ln_xi,
                    ln_rest: f64::NEG_INFINITY,
                    k: self.n,
                    atom,
                    atom_vector: self.atoms[atom].clone(),
                });
            }
            Some(j) => {
                // strict comparison: a tie keeps the earlier index
                if ln_xi > j.ln_max {
                    j.ln_rest = ln_add(j.ln_rest, j.ln_max);
                    j.ln_max = ln_xi;
                    j.k = self.n;
                    if j.atom != atom {
                        j.atom = atom;
                        j.atom_vector.clone_from(&self.atoms[atom]);
                    }
                } else {
                    j.ln_rest = ln_add(j.ln_rest, ln_xi);
                }
            }
        }
    }

    fn refresh(&mut self) {
        match &self.position {
            Position::Lattice(x) => {
                self.point.iter_mut().zip(x).for_each(|(p, &v)| *p = v as f64);
                self.set_from_point();
            }
            Position::Real(x) => {
                self.point.copy_from_slice(x);
                self.set_from_point();
            }
            Position::Scaled { ln_norm, dir } => {
                self.ln_norm = *ln_norm;
                self.unit.copy_from_slice(dir);
                self.norm = ln_norm.exp();
                let n = self.norm;
                self.point.iter_mut().zip(dir).for_each(|(p, &u)| *p = n * u);
            }
        }
    }

    fn set_from_point(&mut self) {
        let n = self.point.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.norm = n;
        if n == 0.0 {
            self.unit.iter_mut().for_each(|u| *u = 0.0);
            self.ln_norm = f64::NEG_INFINITY;
        } else {
            self.unit.iter_mut().zip(&self.point).for_each(|(u, p)| *u = p / n);
            self.ln_norm = n.ln();
        }
    }
}

/// Outcome of the biggest-jump inequality
/// `||S_n^ - Q_k(n)|| <= 2 rho / (1 - rho)` with `rho = B_n / M_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub rho: f64,
    /// `None` when `rho >= 1` (the inequality is vacuous).
    pub bound: Option<f64>,
    pub actual: f64,
    pub ok: bool,
}

impl BoundCheck {
    pub fn applicable(&self) -> bool {
        self.bound.is_some()
    }
}

pub fn biggest_jump_bound_check(state: &WalkState) -> Result<BoundCheck> {
    bound_check_view(&state.view())
}

/// Same check from an observer's view of the walk.
pub fn bound_check_view(view: &StepView<'_>) -> Result<BoundCheck> {
    let j = view
        .jumps
        .ok_or_else(|| Error::UnsupportedSpec("biggest-jump bound needs a radial product walk".into()))?;
    if view.ln_norm == f64::NEG_INFINITY || j.ln_max == f64::NEG_INFINITY {
        return Err(Error::InvalidState("bound check needs S_n != 0 and M_n > 0".into()));
    }
    let rho = j.ratio();
    let actual = view
        .unit
        .iter()
        .zip(&j.atom_vector)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if rho < 1.0 {
        let bound = 2.0 * rho / (1.0 - rho);
        Ok(BoundCheck {
            rho,
            bound: Some(bound),
            actual,
            ok: actual <= bound + BOUND_TOL,
        })
    } else {
        Ok(BoundCheck {
            rho,
            bound: None,
            actual,
            ok: true,
        })
    }
}

// ---------------------------------------------------------------------------
// observers and runs

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cadence {
    EveryStep,
    Checkpoints,
}

/// Hook receiving the walk as it runs. `S_0 = 0` is never delivered; observers
/// that need it account for it themselves.
pub trait Observer {
    fn name(&self) -> &str;

    fn cadence(&self) -> Cadence {
        Cadence::EveryStep
    }

    fn observe(&mut self, view: &StepView<'_>) -> std::result::Result<(), String>;

    /// Called after `observe` at every checkpoint.
    fn checkpoint(&mut self, _view: &StepView<'_>) -> std::result::Result<(), String> {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub n: u64,
    /// Exact coordinates for lattice walks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<Vec<i64>>,
    pub point: Vec<f64>,
    pub ln_norm: f64,
    pub unit: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_max_jump: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ln_rest: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

impl CheckpointRow {
    fn capture(state: &WalkState) -> Self {
        let lattice = match &state.position {
            Position::Lattice(x) => Some(x.clone()),
            _ => None,
        };
        let j = state.jumps();
        CheckpointRow {
            n: state.n,
            lattice,
            point: state.point.clone(),
            ln_norm: state.ln_norm,
            unit: state.unit.clone(),
            ln_max_jump: j.map(|j| j.ln_max),
            ln_rest: j.map(|j| j.ln_rest),
            k: j.map(|j| j.k),
        }
    }

    pub fn norm(&self) -> f64 {
        self.ln_norm.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub dimension: usize,
    pub mode: PositionMode,
    pub seed: String,
    pub n_steps: u64,
    pub checkpoints: Vec<CheckpointRow>,
    /// Every step up to the configured dense cap.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub dense: Vec<CheckpointRow>,
    pub overflowed: bool,
    pub saturation_events: u64,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Record every step with `n <= dense_cap`.
    pub dense_cap: u64,
}

/// Dyadic checkpoints `1, 2, 4, ...` below `n_steps`, plus `n_steps` itself.
pub fn dyadic_checkpoints(n_steps: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut c = 1u64;
    while c < n_steps {
        out.push(c);
        c = c.saturating_mul(2);
    }
    out.push(n_steps);
    out
}

/// Runs `n_steps` of the walk with random stream `stream_index` of `seed`.
pub fn run_walk(
    spec: &IncrementSpec,
    n_steps: u64,
    seed: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<TrajectoryRecord> {
    let sampler = make_increment_sampler(spec)?;
    run_walk_stream(&sampler, n_steps, seed, 0, observers, &RunOptions::default())
}

pub fn run_walk_stream(
    sampler: &IncrementSampler,
    n_steps: u64,
    base_seed: u64,
    stream_index: u64,
    observers: &mut [&mut dyn Observer],
    options: &RunOptions,
) -> Result<TrajectoryRecord> {
    let mut rng = rng::stream(base_seed, stream_index);
    let mut record = run_walk_with_rng(sampler, n_steps, &mut rng, observers, options)?;
    record.seed = rng::split_label(base_seed, stream_index);
    Ok(record)
}

pub fn run_walk_with_rng(
    sampler: &IncrementSampler,
    n_steps: u64,
    rng: &mut WalkRng,
    observers: &mut [&mut dyn Observer],
    options: &RunOptions,
) -> Result<TrajectoryRecord> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    let schedule = dyadic_checkpoints(n_steps);
    let mut next_cp = 0usize;
    let mut state = WalkState::new(sampler);
    let mut draw = sampler.new_draw();
    let mut record = TrajectoryRecord {
        dimension: sampler.dimension(),
        mode: sampler.mode(),
        seed: String::new(),
        n_steps,
        checkpoints: Vec::with_capacity(schedule.len()),
        dense: Vec::new(),
        overflowed: false,
        saturation_events: 0,
    };
    let fail = |o: &dyn Observer, step: u64, reason: String| Error::Observer {
        observer: o.name().to_string(),
        step,
        reason,
    };
    for _ in 0..n_steps {
        sampler.sample_into(rng, &mut draw);
        if state.step(&draw) == StepOutcome::Overflow {
            break;
        }
        let n = state.n;
        let is_cp = schedule[next_cp] == n;
        let view = state.view();
        for o in observers.iter_mut() {
            if is_cp || o.cadence() == Cadence::EveryStep {
                o.observe(&view).map_err(|e| fail(&**o, n, e))?;
            }
        }
        if n <= options.dense_cap {
            record.dense.push(CheckpointRow::capture(&state));
        }
        if is_cp {
            for o in observers.iter_mut() {
                o.checkpoint(&view).map_err(|e| fail(&**o, n, e))?;
            }
            record.checkpoints.push(CheckpointRow::capture(&state));
            next_cp += 1;
        }
    }
    if state.overflowed {
        record.overflowed = true;
        // partial record ends with the last good position
        if record.checkpoints.last().map(|r| r.n) != Some(state.n) && state.n > 0 {
            record.checkpoints.push(CheckpointRow::capture(&state));
        }
    }
    record.saturation_events = state.saturation_events;
    Ok(record)
}

impl TrajectoryRecord {
    pub fn final_row(&self) -> Option<&CheckpointRow> {
        self.checkpoints.last()
    }

    pub fn csv_header(&self) -> String {
        let d = self.dimension;
        let mut h = String::from("n");
        (0..d).for_each(|i| write!(h, ",s{i}").unwrap());
        h.push_str(",norm");
        (0..d).for_each(|i| write!(h, ",u{i}").unwrap());
        h.push_str(",max_jump,rest,k");
        h
    }

    fn row_csv(&self, r: &CheckpointRow, out: &mut String) {
        write!(out, "{}", r.n).unwrap();
        match (&r.lattice, self.mode) {
            (Some(x), _) => x.iter().for_each(|v| write!(out, ",{v}").unwrap()),
            (None, PositionMode::Scaled) => r.unit.iter().for_each(|u| {
                let s = numfmt::ext(u.signum(), r.ln_norm + u.abs().ln());
                write!(out, ",{s}").unwrap()
            }),
            (None, _) => r.point.iter().for_each(|v| write!(out, ",{}", numfmt::float(*v)).unwrap()),
        }
        let norm = if self.mode == PositionMode::Scaled {
            numfmt::ext(1.0, r.ln_norm)
        } else {
            numfmt::float(r.point.iter().map(|v| v * v).sum::<f64>().sqrt())
        };
        write!(out, ",{norm}").unwrap();
        r.unit.iter().for_each(|u| write!(out, ",{}", numfmt::float(*u)).unwrap());
        match (r.ln_max_jump, r.ln_rest, r.k) {
            (Some(m), Some(b), Some(k)) => {
                write!(out, ",{},{},{k}", numfmt::ext(1.0, m), numfmt::ext(1.0, b)).unwrap()
            }
            _ => out.push_str(",,,"),
        }
        out.push('\n');
    }

    /// One row per checkpoint: `n, S_n, ||S_n||, S_n^, M_n, B_n, k(n)`.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.checkpoints {
            self.row_csv(r, &mut out);
        }
        out
    }

    pub fn dense_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for r in &self.dense {
            self.row_csv(r, &mut out);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }

    /// SHA-256 of the checkpoint CSV.
    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_csv().as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{RadialDraw, ScalarLaw};
    use approx::assert_abs_diff_eq;

    fn radial_spec(dirs: Vec<Vec<f64>>, law: ScalarLaw) -> IncrementSampler {
        make_increment_sampler(&IncrementSpec::radial_product(dirs, None, law)).unwrap()
    }

    fn radial_draw(s: &IncrementSampler, xi: f64, atom: usize) -> Draw {
        let mut d = s.new_draw();
        d.coords.copy_from_slice(s.atom_vector(atom));
        d.log_scale = xi.ln();
        d.radial = Some(RadialDraw { ln_xi: xi.ln(), atom });
        d
    }

    #[test]
    fn lattice_step_adds() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher; 2]);
        let s = make_increment_sampler(&spec).unwrap();
        let mut st = WalkState::new(&s);
        let mut d = s.new_draw();
        for inc in [[1, 0], [1, 1], [0, 0], [1, -1]] {
            d.lattice.copy_from_slice(&inc);
            assert_eq!(st.step(&d), StepOutcome::Advanced);
        }
        // S_3 = (2, 1), plus (1, -1)
        assert_eq!(st.position(), &Position::Lattice(vec![3, 0]));
        assert_eq!(st.unit(), &[1.0, 0.0]);
    }

    #[test]
    fn lattice_overflow_halts() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher]);
        let s = make_increment_sampler(&spec).unwrap();
        let mut st = WalkState::new(&s);
        let mut d = s.new_draw();
        d.lattice[0] = i64::MAX;
        assert_eq!(st.step(&d), StepOutcome::Advanced);
        assert_eq!(st.step(&d), StepOutcome::Overflow);
        assert!(st.overflowed());
        assert_eq!(st.n(), 1);
        assert_eq!(st.position(), &Position::Lattice(vec![i64::MAX]));
    }

    #[test]
    fn biggest_jump_recursion() {
        let s = radial_spec(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ScalarLaw::LogTail);
        let mut st = WalkState::new(&s);
        st.step(&radial_draw(&s, 5.0, 0));
        st.step(&radial_draw(&s, 3.0, 1));
        let j = st.jumps().unwrap();
        assert_abs_diff_eq!(j.max_jump(), 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.rest(), 3.0, epsilon = 1e-12);
        assert_eq!(j.k, 1);

        let mut st = WalkState::new(&s);
        st.step(&radial_draw(&s, 5.0, 0));
        st.step(&radial_draw(&s, 9.0, 1));
        let j = st.jumps().unwrap();
        assert_abs_diff_eq!(j.max_jump(), 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j.rest(), 5.0, epsilon = 1e-12);
        assert_eq!(j.k, 2);
        assert_abs_diff_eq!(j.ln_total().exp(), 14.0, epsilon = 1e-12);

        // a tie keeps the old index
        st.step(&radial_draw(&s, 9.0, 0));
        assert_eq!(st.jumps().unwrap().k, 2);
        assert_eq!(st.jumps().unwrap().atom, 1);
    }

    #[test]
    fn bound_check_examples() {
        let s = radial_spec(vec![vec![1.0, 0.0], vec![0.0, 1.0]], ScalarLaw::LogTail);
        let mut st = WalkState::new(&s);
        st.step(&radial_draw(&s, 7.0, 1));
        let c = biggest_jump_bound_check(&st).unwrap();
        assert_eq!(c.rho, 0.0);
        assert!(c.actual < 1e-15 && c.ok);

        let mut st = WalkState::new(&s);
        st.step(&radial_draw(&s, 10.0, 0));
        st.step(&radial_draw(&s, 1.0, 1));
        let c = biggest_jump_bound_check(&st).unwrap();
        assert_abs_diff_eq!(c.rho, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(c.bound.unwrap(), 2.0 / 9.0, epsilon = 1e-12);
        // ||(10, 1)/sqrt(101) - e1||
        let expect = ((10.0 / 101f64.sqrt() - 1.0).powi(2) + 1.0 / 101.0).sqrt();
        assert_abs_diff_eq!(c.actual, expect, epsilon = 1e-12);
        assert!(c.ok);
    }

    #[test]
    fn bound_check_needs_radial() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Rademacher]);
        let s = make_increment_sampler(&spec).unwrap();
        let mut st = WalkState::new(&s);
        let mut d = s.new_draw();
        d.lattice[0] = 1;
        st.step(&d);
        assert!(matches!(biggest_jump_bound_check(&st), Err(Error::UnsupportedSpec(_))));
    }

    #[test]
    fn deterministic_drift_walk() {
        let spec = IncrementSpec::coordinate_product(vec![ScalarLaw::Constant { value: 1.0 }]);
        let rec = run_walk(&spec, 10, 0, &mut []).unwrap();
        let last = rec.final_row().unwrap();
        assert_eq!(last.n, 10);
        assert_eq!(last.lattice.as_deref(), Some(&[10i64][..]));
        assert_eq!(
            rec.checkpoints.iter().map(|r| r.n).collect::<Vec<_>>(),
            vec![1, 2, 4, 8, 10]
        );
    }

    #[test]
    fn same_seed_same_hash() {
        let spec = IncrementSpec::coordinate_product(vec![
            ScalarLaw::Rademacher,
            ScalarLaw::STwoSided { alpha: 0.8 },
        ]);
        let a = run_walk(&spec, 5000, 11, &mut []).unwrap();
        let b = run_walk(&spec, 5000, 11, &mut []).unwrap();
        let c = run_walk(&spec, 5000, 12, &mut []).unwrap();
        assert_eq!(a.content_hash(), b.content_hash());
        assert_ne!(a.content_hash(), c.content_hash());
    }

    #[test]
    fn csv_layout() {
        let spec = IncrementSpec::radial_product(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            None,
            ScalarLaw::LogTail,
        );
        let rec = run_walk(&spec, 3, 1, &mut []).unwrap();
        let csv = rec.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,s0,s1,norm,u0,u1,max_jump,rest,k");
        assert_eq!(lines.count(), 3);
        let json = rec.to_json();
        assert!(json.contains("\"checkpoints\""));
    }

    #[test]
    fn scaled_positions_reconstruct() {
        let spec = IncrementSpec::radial_product(
            vec![vec![1.0, 0.0], vec![-0.5, 0.75f64.sqrt()], vec![-0.5, -0.75f64.sqrt()]],
            None,
            ScalarLaw::StretchedExp { beta: 0.4 },
        );
        let rec = run_walk(&spec, 200, 3, &mut []).unwrap();
        for r in &rec.checkpoints {
            let un: f64 = r.unit.iter().map(|u| u * u).sum::<f64>().sqrt();
            assert_abs_diff_eq!(un, 1.0, epsilon = 1e-12);
            if r.ln_norm < 700.0 {
                let n = r.norm();
                for (p, u) in r.point.iter().zip(&r.unit) {
                    assert!((p - n * u).abs() <= 1e-9 * n);
                }
            }
        }
    }

    #[test]
    fn ln_add_matches_direct_sum() {
        assert_abs_diff_eq!(ln_add(2f64.ln(), 3f64.ln()).exp(), 5.0, epsilon = 1e-12);
        assert_eq!(ln_add(1.0, f64::NEG_INFINITY), 1.0);
    }
}
