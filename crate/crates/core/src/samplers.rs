//! Inverse-transform samplers for the lattice and heavy-tailed scalar laws,
//! and their composition into d-dimensional increment laws.
//!
//! Scalar laws:
//!
//! * `Rademacher`: +1 or -1 with probability 1/2 each.
//! * `STwoSided(alpha)`: integer `z` with `P(z >= r) = P(z <= -r) = r^-alpha / 2`.
//! * `SOneSided(alpha)`: positive integer `z` with `P(z >= r) = r^-alpha`.
//! * `LogTail`: `P(xi > r) = 1 / ln r` for `r >= e`.
//! * `StretchedExp(beta)`: `P(xi > r) = exp(-(ln r)^beta)` for `r >= 1`.
//! * `Constant(c)`.
//!
//! Uniform variates are drawn from the open interval (0, 1), so
//! `U^(-1/alpha)` is always finite and strictly greater than 1.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Integer draws saturate at this value; the event is counted by the walk.
pub const LATTICE_CAP: i64 = 1 << 62;

/// Largest integer for which `f64` arithmetic is still exact.
const EXACT_INT: f64 = 9_007_199_254_740_992.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarLaw {
    Rademacher,
    STwoSided { alpha: f64 },
    SOneSided { alpha: f64 },
    LogTail,
    StretchedExp { beta: f64 },
    Constant { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// Independent scalar law per coordinate, plus an optional drift vector.
    CoordinateProduct,
    /// `X = Q xi`, with `Q` drawn from the atoms and `xi >= 0` from the single law.
    RadialProduct,
    /// `X = sum_j u_j z_j`, with `u_j` the atom vectors and `z_j` the laws.
    LinearCombination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub vector: Vec<f64>,
    /// Probability of this direction; only used by `RadialProduct`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// Declarative description of an increment law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementSpec {
    pub dimension: usize,
    pub form: Form,
    pub laws: Vec<ScalarLaw>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub drift: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeavyTail {
    LogTail,
    StretchedExp { beta: f64 },
}

// ---------------------------------------------------------------------------
// scalar samplers

pub fn sample_rademacher<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("must be positive and finite, got {alpha}"),
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("must lie in (0, 1/2), got {beta}"),
        })
    }
}

/// `floor(u^(-1/alpha))` for `u` in (0, 1), saturating at [`LATTICE_CAP`].
/// The flag reports saturation.
pub fn s_magnitude(u: f64, alpha: f64) -> (i64, bool) {
    let x = u.powf(-1.0 / alpha).floor();
    if x >= LATTICE_CAP as f64 {
        (LATTICE_CAP, true)
    } else {
        (x.max(1.0) as i64, false)
    }
}

pub fn sample_s_two_sided<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> Result<i64> {
    check_alpha(alpha)?;
    let u: f64 = rng.sample(Open01);
    let sign = sample_rademacher(rng);
    Ok(sign * s_magnitude(u, alpha).0)
}

pub fn sample_s_one_sided<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> Result<i64> {
    check_alpha(alpha)?;
    let u: f64 = rng.sample(Open01);
    Ok(s_magnitude(u, alpha).0)
}

/// `ln xi` for the log tail: `xi = exp(1/u)`.
pub fn log_tail_ln_from_uniform(u: f64) -> f64 {
    1.0 / u
}

/// `ln xi` for the stretched-exponential tail: `xi = exp(e^(1/beta))` with
/// `e` a unit exponential.
pub fn stretched_exp_ln_from_exponential(e: f64, beta: f64) -> f64 {
    e.powf(1.0 / beta)
}

/// Natural log of a heavy-tail draw. Magnitudes routinely exceed `f64::MAX`,
/// so walks carry them in log form.
pub fn sample_heavy_tail_ln<R: Rng + ?Sized>(rng: &mut R, family: HeavyTail) -> Result<f64> {
    match family {
        HeavyTail::LogTail => {
            let u: f64 = rng.sample(Open01);
            Ok(log_tail_ln_from_uniform(u))
        }
        HeavyTail::StretchedExp { beta } => {
            check_beta(beta)?;
            let e: f64 = rng.sample(Exp1);
            Ok(stretched_exp_ln_from_exponential(e, beta))
        }
    }
}

/// Heavy-tail draw as a plain float; `+inf` when the value overflows.
pub fn sample_heavy_tail<R: Rng + ?Sized>(rng: &mut R, family: HeavyTail) -> Result<f64> {
    sample_heavy_tail_ln(rng, family).map(f64::exp)
}

// ---------------------------------------------------------------------------
// scalar laws as components of an increment

/// One scalar draw in whichever representation the walk uses.
#[derive(Clone, Copy, Debug, PartialEq)]
enum ScalarDraw {
    Int(i64),
    /// `sign * exp(ln_abs)`.
    Log { sign: f64, ln_abs: f64 },
}

impl ScalarDraw {
    fn sign_ln(self) -> (f64, f64) {
        match self {
            ScalarDraw::Int(0) => (0.0, f64::NEG_INFINITY),
            ScalarDraw::Int(v) => ((v.signum()) as f64, (v.unsigned_abs() as f64).ln()),
            ScalarDraw::Log { sign, ln_abs } => (sign, ln_abs),
        }
    }

    fn as_f64(self) -> f64 {
        match self {
            ScalarDraw::Int(v) => v as f64,
            ScalarDraw::Log { sign, ln_abs } => sign * ln_abs.exp(),
        }
    }
}

impl ScalarLaw {
    pub fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            ScalarLaw::STwoSided { alpha } | ScalarLaw::SOneSided { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(format!("alpha must be positive, got {alpha}"));
                }
            }
            ScalarLaw::StretchedExp { beta } => {
                if !(beta > 0.0 && beta < 0.5) {
                    return Err(format!("beta must lie in (0, 1/2), got {beta}"));
                }
            }
            ScalarLaw::Constant { value } => {
                if !value.is_finite() {
                    return Err(format!("constant must be finite, got {value}"));
                }
            }
            ScalarLaw::Rademacher | ScalarLaw::LogTail => {}
        }
        Ok(())
    }

    /// Integer-valued laws keep lattice walks exact.
    pub fn is_integer_valued(&self) -> bool {
        match *self {
            ScalarLaw::Rademacher | ScalarLaw::STwoSided { .. } | ScalarLaw::SOneSided { .. } => true,
            ScalarLaw::Constant { value } => is_exact_int(value),
            ScalarLaw::LogTail | ScalarLaw::StretchedExp { .. } => false,
        }
    }

    pub fn is_heavy(&self) -> bool {
        matches!(self, ScalarLaw::LogTail | ScalarLaw::StretchedExp { .. })
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ScalarLaw::Constant { .. })
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            ScalarLaw::Rademacher | ScalarLaw::STwoSided { .. } => false,
            ScalarLaw::Constant { value } => value >= 0.0,
            _ => true,
        }
    }

    /// A point of the support, used for the dimension check.
    fn support_point(&self) -> f64 {
        match *self {
            ScalarLaw::Rademacher | ScalarLaw::STwoSided { .. } | ScalarLaw::SOneSided { .. } => 1.0,
            ScalarLaw::LogTail | ScalarLaw::StretchedExp { .. } => std::f64::consts::E,
            ScalarLaw::Constant { value } => value,
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, saturated: &mut u32) -> ScalarDraw {
        match *self {
            ScalarLaw::Rademacher => ScalarDraw::Int(sample_rademacher(rng)),
            ScalarLaw::STwoSided { alpha } => {
                let u: f64 = rng.sample(Open01);
                let sign = sample_rademacher(rng);
                let (m, sat) = s_magnitude(u, alpha);
                *saturated += sat as u32;
                ScalarDraw::Int(sign * m)
            }
            ScalarLaw::SOneSided { alpha } => {
                let u: f64 = rng.sample(Open01);
                let (m, sat) = s_magnitude(u, alpha);
                *saturated += sat as u32;
                ScalarDraw::Int(m)
            }
            ScalarLaw::LogTail => {
                let u: f64 = rng.sample(Open01);
                ScalarDraw::Log {
                    sign: 1.0,
                    ln_abs: log_tail_ln_from_uniform(u),
                }
            }
            ScalarLaw::StretchedExp { beta } => {
                let e: f64 = rng.sample(Exp1);
                ScalarDraw::Log {
                    sign: 1.0,
                    ln_abs: stretched_exp_ln_from_exponential(e, beta),
                }
            }
            ScalarLaw::Constant { value } => {
                if is_exact_int(value) {
                    ScalarDraw::Int(value as i64)
                } else {
                    ScalarDraw::Log {
                        sign: value.signum(),
                        ln_abs: value.abs().ln(),
                    }
                }
            }
        }
    }
}

fn is_exact_int(v: f64) -> bool {
    v.is_finite() && v.fract() == 0.0 && v.abs() < EXACT_INT
}

// ---------------------------------------------------------------------------
// validation

impl IncrementSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: IncrementSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serialization is infallible")
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::spec("dimension", "must be positive"));
        }
        for (i, law) in self.laws.iter().enumerate() {
            law.validate().map_err(|r| Error::spec(format!("laws[{i}]"), r))?;
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.vector.len() != d {
                return Err(Error::spec(
                    format!("atoms[{i}].vector"),
                    format!("expected {d} components, got {}", atom.vector.len()),
                ));
            }
            if atom.vector.iter().any(|x| !x.is_finite()) {
                return Err(Error::spec(format!("atoms[{i}].vector"), "non-finite component"));
            }
        }
        let drift_nonzero = self.drift.iter().any(|&x| x != 0.0);
        match self.form {
            Form::CoordinateProduct => {
                if self.laws.len() != d {
                    return Err(Error::spec(
                        "laws",
                        format!("coordinate product needs {d} laws, got {}", self.laws.len()),
                    ));
                }
                if !self.atoms.is_empty() {
                    return Err(Error::spec("atoms", "unused by coordinate product"));
                }
                if !self.drift.is_empty() && self.drift.len() != d {
                    return Err(Error::spec(
                        "drift",
                        format!("expected {d} components, got {}", self.drift.len()),
                    ));
                }
                if self.drift.iter().any(|x| !x.is_finite()) {
                    return Err(Error::spec("drift", "non-finite component"));
                }
            }
            Form::RadialProduct => {
                if self.laws.len() != 1 {
                    return Err(Error::spec("laws", "radial product takes exactly one magnitude law"));
                }
                let law = self.laws[0];
                if !law.is_nonnegative() {
                    return Err(Error::spec("laws[0]", "magnitude law must be non-negative"));
                }
                if law == (ScalarLaw::Constant { value: 0.0 }) {
                    return Err(Error::spec("laws[0]", "magnitude must be positive with positive probability"));
                }
                if self.atoms.is_empty() {
                    return Err(Error::spec("atoms", "radial product needs at least one direction atom"));
                }
                let mut total = 0.0;
                for (i, atom) in self.atoms.iter().enumerate() {
                    let n = linalg::norm(&atom.vector);
                    if (n - 1.0).abs() > 1e-12 {
                        return Err(Error::spec(
                            format!("atoms[{i}].vector"),
                            format!("direction atoms must be unit vectors, norm is {n}"),
                        ));
                    }
                    match atom.weight {
                        Some(p) if p > 0.0 && p.is_finite() => total += p,
                        Some(p) => {
                            return Err(Error::spec(format!("atoms[{i}].weight"), format!("must be positive, got {p}")))
                        }
                        None => return Err(Error::spec(format!("atoms[{i}].weight"), "missing")),
                    }
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::spec("atoms", format!("weights sum to {total}, expected 1")));
                }
                if drift_nonzero {
                    return Err(Error::spec("drift", "only coordinate products carry a drift"));
                }
            }
            Form::LinearCombination => {
                if self.atoms.is_empty() || self.laws.len() != self.atoms.len() {
                    return Err(Error::spec(
                        "laws",
                        format!(
                            "linear combination needs one law per atom vector ({} atoms, {} laws)",
                            self.atoms.len(),
                            self.laws.len()
                        ),
                    ));
                }
                if let Some(i) = self.atoms.iter().position(|a| a.weight.is_some()) {
                    return Err(Error::spec(format!("atoms[{i}].weight"), "unused by linear combination"));
                }
                if drift_nonzero {
                    return Err(Error::spec("drift", "only coordinate products carry a drift"));
                }
            }
        }
        let r = linalg::rank(&self.spanning_set(), 1e-10);
        if r < d {
            return Err(Error::spec(
                "dimension",
                format!("support spans only {r} of {d} dimensions"),
            ));
        }
        Ok(())
    }

    /// Vectors whose span equals the span of the increment support.
    fn spanning_set(&self) -> Vec<Vec<f64>> {
        let d = self.dimension;
        let unit = |i: usize| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        };
        match self.form {
            Form::CoordinateProduct => {
                let mut base: Vec<f64> = self.laws.iter().map(|l| l.support_point()).collect();
                if !self.drift.is_empty() {
                    base.iter_mut().zip(&self.drift).for_each(|(b, m)| *b += m);
                }
                let mut out = vec![base];
                out.extend(
                    self.laws
                        .iter()
                        .enumerate()
                        .filter(|(_, l)| !l.is_degenerate())
                        .map(|(i, _)| unit(i)),
                );
                out
            }
            Form::RadialProduct => self.atoms.iter().map(|a| a.vector.clone()).collect(),
            Form::LinearCombination => {
                let mut base = vec![0.0; d];
                for (law, atom) in self.laws.iter().zip(&self.atoms) {
                    let z = law.support_point();
                    base.iter_mut().zip(&atom.vector).for_each(|(b, u)| *b += z * u);
                }
                let mut out = vec![base];
                out.extend(
                    self.laws
                        .iter()
                        .zip(&self.atoms)
                        .filter(|(l, _)| !l.is_degenerate())
                        .map(|(_, a)| a.vector.clone()),
                );
                out
            }
        }
    }

    /// How positions of a walk with this increment law are represented.
    pub fn position_mode(&self) -> PositionMode {
        if self.laws.iter().any(|l| l.is_heavy()) {
            return PositionMode::Scaled;
        }
        let ints = self.laws.iter().all(|l| l.is_integer_valued())
            && self.atoms.iter().all(|a| a.vector.iter().all(|&x| is_exact_int(x)))
            && self.drift.iter().all(|&x| is_exact_int(x));
        if ints {
            PositionMode::Lattice
        } else {
            PositionMode::Real
        }
    }

    pub fn mean_is_zero_by_symmetry(&self) -> bool {
        self.form == Form::CoordinateProduct
            && self.drift.iter().all(|&x| x == 0.0)
            && self
                .laws
                .iter()
                .all(|l| matches!(l, ScalarLaw::Rademacher | ScalarLaw::STwoSided { .. }))
    }
}

// ---------------------------------------------------------------------------
// composed increment sampler

/// Representation of walk positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionMode {
    /// Exact `i64` coordinates with overflow detection.
    Lattice,
    /// Plain `f64` coordinates.
    Real,
    /// `exp(log_scale) * coords`; used whenever a heavy-tailed law is present.
    Scaled,
}

/// The magnitude and direction index drawn by a radial product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialDraw {
    pub ln_xi: f64,
    pub atom: usize,
}

/// Reusable buffer receiving one increment.
#[derive(Clone, Debug, Default)]
pub struct Draw {
    /// Coordinates for [`PositionMode::Lattice`].
    pub lattice: Vec<i64>,
    /// Coordinates for `Real`; for `Scaled` the increment is `exp(log_scale) * coords`.
    pub coords: Vec<f64>,
    pub log_scale: f64,
    pub radial: Option<RadialDraw>,
    /// Number of lattice draws that hit [`LATTICE_CAP`].
    pub saturated: u32,
}

impl Draw {
    pub fn new(dimension: usize) -> Self {
        Draw {
            lattice: vec![0; dimension],
            coords: vec![0.0; dimension],
            log_scale: 0.0,
            radial: None,
            saturated: 0,
        }
    }
}

/// Immutable sampler for an [`IncrementSpec`].
#[derive(Clone, Debug)]
pub struct IncrementSampler {
    spec: IncrementSpec,
    mode: PositionMode,
    cumulative: Vec<f64>,
    scratch_len: usize,
}

pub fn make_increment_sampler(spec: &IncrementSpec) -> Result<IncrementSampler> {
    spec.validate()?;
    let mut cumulative = Vec::new();
    if spec.form == Form::RadialProduct {
        let mut acc = 0.0;
        for a in &spec.atoms {
            acc += a.weight.unwrap_or(0.0);
            cumulative.push(acc);
        }
        // guard against rounding in the last bucket
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
    }
    Ok(IncrementSampler {
        spec: spec.clone(),
        mode: spec.position_mode(),
        cumulative,
        scratch_len: spec.laws.len(),
    })
}

impl IncrementSampler {
    pub fn spec(&self) -> &IncrementSpec {
        &self.spec
    }

    pub fn mode(&self) -> PositionMode {
        self.mode
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn new_draw(&self) -> Draw {
        Draw::new(self.spec.dimension)
    }

    pub fn atom_vector(&self, index: usize) -> &[f64] {
        &self.spec.atoms[index].vector
    }

    /// Draws one increment into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Draw) {
        let d = self.spec.dimension;
        out.saturated = 0;
        out.radial = None;
        out.log_scale = 0.0;
        match self.spec.form {
            Form::RadialProduct => {
                let u: f64 = rng.random();
                let atom = self.cumulative.iter().position(|&c| u < c).unwrap_or(0);
                let xi = self.spec.laws[0].draw(rng, &mut out.saturated);
                let q = &self.spec.atoms[atom].vector;
                let (_, ln_xi) = xi.sign_ln();
                out.radial = Some(RadialDraw { ln_xi, atom });
                match (self.mode, xi) {
                    (PositionMode::Lattice, ScalarDraw::Int(m)) => {
                        for (o, &c) in out.lattice.iter_mut().zip(q) {
                            *o = (c as i64).saturating_mul(m);
                        }
                    }
                    (PositionMode::Scaled, _) => {
                        out.coords.copy_from_slice(q);
                        out.log_scale = ln_xi;
                    }
                    _ => {
                        let m = xi.as_f64();
                        out.coords.iter_mut().zip(q).for_each(|(o, &c)| *o = c * m);
                    }
                }
            }
            Form::CoordinateProduct => {
                let mut terms = [ScalarDraw::Int(0); 8];
                let mut heap;
                let draws: &mut [ScalarDraw] = if d <= 8 {
                    &mut terms[..d]
                } else {
                    heap = vec![ScalarDraw::Int(0); d];
                    &mut heap[..]
                };
                for (slot, law) in draws.iter_mut().zip(&self.spec.laws) {
                    *slot = law.draw(rng, &mut out.saturated);
                }
                let drift = |i: usize| self.spec.drift.get(i).copied().unwrap_or(0.0);
                match self.mode {
                    PositionMode::Lattice => {
                        for (i, z) in draws.iter().enumerate() {
                            let ScalarDraw::Int(v) = *z else { unreachable!() };
                            out.lattice[i] = v.saturating_add(drift(i) as i64);
                        }
                    }
                    PositionMode::Real => {
                        for (i, z) in draws.iter().enumerate() {
                            out.coords[i] = z.as_f64() + drift(i);
                        }
                    }
                    PositionMode::Scaled => {
                        let mut top = f64::NEG_INFINITY;
                        for (i, z) in draws.iter().enumerate() {
                            top = top.max(z.sign_ln().1);
                            let m = drift(i);
                            if m != 0.0 {
                                top = top.max(m.abs().ln());
                            }
                        }
                        if top == f64::NEG_INFINITY {
                            top = 0.0;
                        }
                        for (i, z) in draws.iter().enumerate() {
                            let (s, l) = z.sign_ln();
                            out.coords[i] = s * (l - top).exp() + drift(i) * (-top).exp();
                        }
                        out.log_scale = top;
                    }
                }
            }
            Form::LinearCombination => {
                let k = self.scratch_len;
                let mut draws = Vec::with_capacity(k);
                for law in &self.spec.laws {
                    draws.push(law.draw(rng, &mut out.saturated));
                }
                match self.mode {
                    PositionMode::Lattice => {
                        out.lattice.iter_mut().for_each(|x| *x = 0);
                        for (z, atom) in draws.iter().zip(&self.spec.atoms) {
                            let ScalarDraw::Int(v) = *z else { unreachable!() };
                            for (o, &c) in out.lattice.iter_mut().zip(&atom.vector) {
                                *o = o.saturating_add((c as i64).saturating_mul(v));
                            }
                        }
                    }
                    PositionMode::Real => {
                        out.coords.iter_mut().for_each(|x| *x = 0.0);
                        for (z, atom) in draws.iter().zip(&self.spec.atoms) {
                            let v = z.as_f64();
                            out.coords.iter_mut().zip(&atom.vector).for_each(|(o, &c)| *o += c * v);
                        }
                    }
                    PositionMode::Scaled => {
                        let top = draws
                            .iter()
                            .map(|z| z.sign_ln().1)
                            .fold(f64::NEG_INFINITY, f64::max);
                        let top = if top.is_finite() { top } else { 0.0 };
                        out.coords.iter_mut().for_each(|x| *x = 0.0);
                        for (z, atom) in draws.iter().zip(&self.spec.atoms) {
                            let (s, l) = z.sign_ln();
                            let w = s * (l - top).exp();
                            out.coords.iter_mut().zip(&atom.vector).for_each(|(o, &c)| *o += c * w);
                        }
                        out.log_scale = top;
                    }
                }
            }
        }
    }

    /// Increment as plain floats (may contain infinities for heavy tails).
    pub fn sample_vec<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut draw = self.new_draw();
        self.sample_into(rng, &mut draw);
        match self.mode {
            PositionMode::Lattice => draw.lattice.iter().map(|&x| x as f64).collect(),
            PositionMode::Real => draw.coords,
            PositionMode::Scaled => {
                let s = draw.log_scale.exp();
                draw.coords.iter().map(|c| c * s).collect()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// convenience constructors

impl IncrementSpec {
    pub fn coordinate_product(laws: Vec<ScalarLaw>) -> Self {
        IncrementSpec {
            dimension: laws.len(),
            form: Form::CoordinateProduct,
            laws,
            atoms: Vec::new(),
            drift: Vec::new(),
        }
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.drift = drift;
        self
    }

    /// `X = Q xi` with `Q` uniform over `directions` unless weights are given.
    pub fn radial_product(directions: Vec<Vec<f64>>, weights: Option<Vec<f64>>, magnitude: ScalarLaw) -> Self {
        let k = directions.len();
        let dimension = directions.first().map_or(0, |v| v.len());
        let weights = weights.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        IncrementSpec {
            dimension,
            form: Form::RadialProduct,
            laws: vec![magnitude],
            atoms: directions
                .into_iter()
                .zip(weights)
                .map(|(vector, w)| Atom { vector, weight: Some(w) })
                .collect(),
            drift: Vec::new(),
        }
    }

    pub fn linear_combination(vectors: Vec<Vec<f64>>, laws: Vec<ScalarLaw>) -> Self {
        let dimension = vectors.first().map_or(0, |v| v.len());
        IncrementSpec {
            dimension,
            form: Form::LinearCombination,
            laws,
            atoms: vectors.into_iter().map(|vector| Atom { vector, weight: None }).collect(),
            drift: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn s_magnitude_inverse_cdf_points() {
        assert_eq!(s_magnitude(0.5, 1.0), (2, false));
        assert_eq!(s_magnitude(0.9, 1.0), (1, false));
        // 0.25^(-2) = 16 exactly
        assert_eq!(s_magnitude(0.25, 0.5).0, 16);
        assert_eq!(s_magnitude(1e-300, 0.5), (LATTICE_CAP, true));
    }

    #[test]
    fn log_tail_from_half_is_e_squared() {
        let ln_xi = log_tail_ln_from_uniform(0.5);
        assert_eq!(ln_xi, 2.0);
        // P(xi > e^2) = P(1/U > 2) = P(U < 1/2) = 1/2 = 1/ln(e^2)
        assert!((ln_xi.exp() - 7.38905609893065).abs() < 1e-12);
    }

    #[test]
    fn parameter_errors() {
        let mut rng = stream(1, 0);
        assert!(matches!(
            sample_s_two_sided(&mut rng, 0.0),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
        assert!(sample_s_one_sided(&mut rng, -1.0).is_err());
        assert!(sample_heavy_tail(&mut rng, HeavyTail::StretchedExp { beta: 0.5 }).is_err());
        assert!(sample_heavy_tail(&mut rng, HeavyTail::StretchedExp { beta: 0.0 }).is_err());
    }

    #[test]
    fn draws_respect_support() {
        let mut rng = stream(2, 0);
        for _ in 0..10_000 {
            assert!(sample_s_two_sided(&mut rng, 0.7).unwrap().abs() >= 1);
            assert!(sample_s_one_sided(&mut rng, 0.7).unwrap() >= 1);
            assert!(sample_heavy_tail_ln(&mut rng, HeavyTail::LogTail).unwrap() >= 1.0);
            let r = sample_rademacher(&mut rng);
            assert!(r == 1 || r == -1);
        }
    }

    #[test]
    fn example_10_1_structure() {
        let spec = IncrementSpec::coordinate_product(vec![
            ScalarLaw::Constant { value: 1.0 },
            ScalarLaw::Rademacher,
        ]);
        let s = make_increment_sampler(&spec).unwrap();
        assert_eq!(s.mode(), PositionMode::Lattice);
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            let x = s.sample_vec(&mut rng);
            assert_eq!(x[0], 1.0);
            assert!(x[1] == 1.0 || x[1] == -1.0);
        }
    }

    #[test]
    fn degenerate_radial_is_constant() {
        let spec = IncrementSpec::radial_product(
            vec![vec![1.0, 0.0]],
            None,
            ScalarLaw::Constant { value: 1.0 },
        );
        // one atom spans only one dimension of two
        assert!(matches!(make_increment_sampler(&spec), Err(Error::InvalidSpec { .. })));
        let spec1 = IncrementSpec::radial_product(vec![vec![1.0]], None, ScalarLaw::Constant { value: 1.0 });
        let s = make_increment_sampler(&spec1).unwrap();
        let mut rng = stream(3, 1);
        for _ in 0..100 {
            assert_eq!(s.sample_vec(&mut rng), vec![1.0]);
        }
    }

    #[test]
    fn linear_combination_positive_quadrant() {
        let spec = IncrementSpec::linear_combination(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![ScalarLaw::SOneSided { alpha: 0.5 }; 2],
        );
        let s = make_increment_sampler(&spec).unwrap();
        let mut rng = stream(4, 0);
        for _ in 0..10_000 {
            let x = s.sample_vec(&mut rng);
            assert!(x[0] >= 1.0 && x[1] >= 1.0);
        }
    }

    #[test]
    fn dimension_check_rejects_flat_support() {
        let flat = IncrementSpec::coordinate_product(vec![
            ScalarLaw::Rademacher,
            ScalarLaw::Constant { value: 0.0 },
        ]);
        let err = flat.validate().unwrap_err().to_string();
        assert!(err.contains("spans only 1 of 2"), "{err}");
        let lin = IncrementSpec::linear_combination(
            vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![ScalarLaw::Rademacher; 2],
        );
        assert!(lin.validate().is_err());
    }

    #[test]
    fn radial_atoms_must_be_unit_and_weighted() {
        let mut spec = IncrementSpec::radial_product(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            None,
            ScalarLaw::LogTail,
        );
        assert!(spec.validate().is_ok());
        spec.atoms[0].vector = vec![1.0, 1e-3];
        assert!(spec.validate().unwrap_err().to_string().contains("atoms[0].vector"));
        spec.atoms[0].vector = vec![1.0, 0.0];
        spec.atoms[1].weight = Some(0.25);
        assert!(spec.validate().unwrap_err().to_string().contains("weights sum"));
        spec.atoms[1].weight = Some(0.5);
        spec.laws = vec![ScalarLaw::Rademacher];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn laws_validated_with_field_names() {
        let spec = IncrementSpec::coordinate_product(vec![
            ScalarLaw::Rademacher,
            ScalarLaw::STwoSided { alpha: -0.5 },
        ]);
        let msg = spec.validate().unwrap_err().to_string();
        assert!(msg.contains("laws[1]") && msg.contains("alpha"), "{msg}");
    }

    #[test]
    fn scaled_mode_for_heavy_tails() {
        let spec = IncrementSpec::radial_product(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            None,
            ScalarLaw::LogTail,
        );
        let s = make_increment_sampler(&spec).unwrap();
        assert_eq!(s.mode(), PositionMode::Scaled);
        let mut rng = stream(5, 0);
        let mut d = s.new_draw();
        for _ in 0..1000 {
            s.sample_into(&mut rng, &mut d);
            let r = d.radial.unwrap();
            assert_eq!(d.log_scale, r.ln_xi);
            assert_eq!(d.coords, s.atom_vector(r.atom));
        }
    }

    #[test]
    fn json_shape() {
        let spec = IncrementSpec::coordinate_product(vec![
            ScalarLaw::Constant { value: 1.0 },
            ScalarLaw::STwoSided { alpha: 0.5 },
        ]);
        let text = spec.to_json();
        assert_eq!(
            text,
            r#"{"dimension":2,"form":"coordinate_product","laws":[{"kind":"constant","value":1.0},{"kind":"s_two_sided","alpha":0.5}]}"#
        );
        assert_eq!(IncrementSpec::from_json(&text).unwrap(), spec);
    }
}
