//! Outage margin, indicator/sigmoid surrogates and the real-valued lifts.
//!
//! With cascaded channel `h^H = v^H diag(h_r^H) G + h_d^H` the margin is
//! `d = sigma^2 - |h^H w|^2 / gamma`; a sample is in outage iff `d > 0`.

use num_complex::Complex64;

use crate::channel::{ChannelSample, ChannelSampleSet};
use crate::error::{OutageError, Result};

/// Absolute slack used when checking the power and unit-modulus constraints.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Multiplier applied to the margin before it enters the sigmoid.
///
/// Margins are in watts, and with noise powers around 1e-11 W the raw
/// sigmoid is effectively linear around 0.5. `InverseNoise` (the default)
/// evaluates `S(d / sigma^2)`; `Fixed(1.0)` evaluates `S(d)` literally.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MarginScale {
    #[default]
    InverseNoise,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Maximum transmit power P, watts.
    pub power: f64,
    /// Noise power sigma^2, watts.
    pub noise: f64,
    /// SNR threshold gamma (linear).
    pub gamma: f64,
    pub margin_scale: MarginScale,
}

impl SystemParams {
    pub fn new(power: f64, noise: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            power,
            noise,
            gamma,
            margin_scale: MarginScale::InverseNoise,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_margin_scale(mut self, scale: MarginScale) -> Self {
        self.margin_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [
            ("power", self.power),
            ("noise", self.noise),
            ("gamma", self.gamma),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(OutageError::InvalidConfig(format!(
                    "{name} must be positive and finite, got {x}"
                )));
            }
        }
        if let MarginScale::Fixed(c) = self.margin_scale {
            if !(c > 0.0 && c.is_finite()) {
                return Err(OutageError::InvalidConfig(format!(
                    "margin scale must be positive and finite, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// Effective multiplier `c` in `S(c * d)`.
    pub fn scale(&self) -> f64 {
        match self.margin_scale {
            MarginScale::InverseNoise => 1.0 / self.noise,
            MarginScale::Fixed(c) => c,
        }
    }
}

/// BS transmit weights, `||w||^2 <= P`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingVector(Vec<Complex64>);

impl BeamformingVector {
    pub fn new(w: Vec<Complex64>, power: f64) -> Result<Self> {
        let norm2 = norm_sqr(&w);
        if w.is_empty() {
            return Err(OutageError::DimensionMismatch(
                "beamformer needs at least one antenna".into(),
            ));
        }
        if !(norm2.is_finite() && norm2 <= power + FEASIBILITY_TOL) {
            return Err(OutageError::Infeasible(format!(
                "||w||^2 = {norm2} exceeds P = {power}"
            )));
        }
        Ok(Self(w))
    }

    /// Wraps without the power check; the caller vouches for feasibility.
    pub fn from_vec_unchecked(w: Vec<Complex64>) -> Self {
        Self(w)
    }

    pub fn from_lift(w_tilde: &[f64]) -> Self {
        Self(unlift(w_tilde))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn power(&self) -> f64 {
        norm_sqr(&self.0)
    }

    pub fn lifted(&self) -> Vec<f64> {
        lift_vec(&self.0)
    }
}

/// IRS reflection vector, every entry on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftVector(Vec<Complex64>);

impl PhaseShiftVector {
    pub fn new(v: Vec<Complex64>) -> Result<Self> {
        if let Some((i, z)) = v.iter().enumerate().find(|(_, z)| {
            let dev = (z.norm() - 1.0).abs();
            dev.is_nan() || dev > FEASIBILITY_TOL
        }) {
            return Err(OutageError::Infeasible(format!(
                "|v_{i}| = {} is not unit modulus",
                z.norm()
            )));
        }
        Ok(Self(v))
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self(
            phases
                .iter()
                .map(|&t| Complex64::from_polar(1.0, t))
                .collect(),
        )
    }

    /// Empty vector, used when there is no IRS.
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_vec_unchecked(v: Vec<Complex64>) -> Self {
        Self(v)
    }

    pub fn from_lift(v_tilde: &[f64]) -> Self {
        Self(unlift(v_tilde))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn lifted(&self) -> Vec<f64> {
        lift_vec(&self.0)
    }
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// `[Re(x); Im(x)]`.
pub fn lift_vec(x: &[Complex64]) -> Vec<f64> {
    x.iter()
        .map(|z| z.re)
        .chain(x.iter().map(|z| z.im))
        .collect()
}

/// Inverse of [`lift_vec`]. Panics on odd length.
pub fn unlift(x: &[f64]) -> Vec<Complex64> {
    assert!(
        x.len().is_multiple_of(2),
        "lifted vector must have even length"
    );
    let n = x.len() / 2;
    (0..n).map(|i| Complex64::new(x[i], x[i + n])).collect()
}

/// Real `2L x 2` matrix `[[Re x, -Im x], [Im x, Re x]]` built from a complex
/// vector `x` of length `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoColumnMatrix {
    rows: Vec<[f64; 2]>,
}

impl TwoColumnMatrix {
    pub fn from_complex(x: &[Complex64]) -> Self {
        let rows = x
            .iter()
            .map(|z| [z.re, -z.im])
            .chain(x.iter().map(|z| [z.im, z.re]))
            .collect();
        Self { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r][c]
    }

    /// `X^T y`.
    pub fn transpose_mul(&self, y: &[f64]) -> [f64; 2] {
        debug_assert_eq!(y.len(), self.rows.len());
        self.rows.iter().zip(y).fold([0.0, 0.0], |acc, (r, &yi)| {
            [acc[0] + r[0] * yi, acc[1] + r[1] * yi]
        })
    }

    /// `X c`.
    pub fn mul(&self, c: [f64; 2]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r[0] * c[0] + r[1] * c[1])
            .collect()
    }
}

/// `(w_tilde, H_tilde)` with `||H_tilde^T w_tilde|| = |h^H w|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLiftW {
    pub w_tilde: Vec<f64>,
    pub h_tilde: TwoColumnMatrix,
}

/// `(v_tilde, A_tilde, b_tilde)` with `||b_tilde + A_tilde^T v_tilde|| = |b + v^H a|`.
///
/// `A_tilde^T v_tilde` lifts `conj(v^H a)`, so `b_tilde` lifts `conj(b)`,
/// i.e. `b_tilde = [Re b, -Im b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLiftV {
    pub v_tilde: Vec<f64>,
    pub a_tilde: TwoColumnMatrix,
    pub b_tilde: [f64; 2],
}

fn check_dims(s: &ChannelSample, m: Option<usize>, n: Option<usize>) -> Result<()> {
    if let Some(m) = m {
        if m != s.m() {
            return Err(OutageError::DimensionMismatch(format!(
                "beamformer has length {m}, channel has M = {}",
                s.m()
            )));
        }
    }
    if let Some(n) = n {
        if n != s.n() {
            return Err(OutageError::DimensionMismatch(format!(
                "phase-shift vector has length {n}, channel has N = {}",
                s.n()
            )));
        }
    }
    Ok(())
}

/// Returns `h` with `h^H = v^H diag(h_r^H) G + h_d^H`.
pub fn cascaded_channel(v: &PhaseShiftVector, s: &ChannelSample) -> Result<Vec<Complex64>> {
    check_dims(s, None, Some(v.len()))?;
    let mut h = s.h_d.clone();
    for (i, (vi, hri)) in v.as_slice().iter().zip(&s.h_r).enumerate() {
        let coef = vi * hri;
        for (hm, g) in h.iter_mut().zip(s.g_row(i)) {
            *hm += coef * g.conj();
        }
    }
    Ok(h)
}

/// `h^H w`.
pub fn inner(h: &[Complex64], w: &[Complex64]) -> Complex64 {
    h.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn margin(
    w: &BeamformingVector,
    v: &PhaseShiftVector,
    s: &ChannelSample,
    p: &SystemParams,
) -> Result<f64> {
    check_dims(s, Some(w.len()), Some(v.len()))?;
    let h = cascaded_channel(v, s)?;
    Ok(p.noise - inner(&h, w.as_slice()).norm_sqr() / p.gamma)
}

/// 1 for strictly positive input, 0 otherwise (including exactly 0).
pub fn indicator(x: f64) -> u8 {
    u8::from(x > 0.0)
}

/// Logistic sigmoid, split by sign so `exp` never overflows.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `S(z) * (1 - S(z))`, computed as `S(z) * S(-z)` to avoid cancellation.
pub fn sigmoid_slope(z: f64) -> f64 {
    sigmoid(z) * sigmoid(-z)
}

fn nonempty(set: &ChannelSampleSet) -> Result<()> {
    if set.is_empty() {
        Err(OutageError::EmptySampleSet)
    } else {
        Ok(())
    }
}

/// Fraction of samples whose margin is strictly positive.
pub fn empirical_outage(
    w: &BeamformingVector,
    v: &PhaseShiftVector,
    set: &ChannelSampleSet,
    p: &SystemParams,
) -> Result<f64> {
    nonempty(set)?;
    let mut hits = 0usize;
    for s in set.samples() {
        hits += usize::from(indicator(margin(w, v, s, p)?));
    }
    Ok(hits as f64 / set.len() as f64)
}

/// Sample mean of `S(c * d)`, `c` from [`SystemParams::scale`].
pub fn surrogate_objective(
    w: &BeamformingVector,
    v: &PhaseShiftVector,
    set: &ChannelSampleSet,
    p: &SystemParams,
) -> Result<f64> {
    nonempty(set)?;
    let c = p.scale();
    let mut acc = 0.0;
    for s in set.samples() {
        acc += sigmoid(c * margin(w, v, s, p)?);
    }
    Ok(acc / set.len() as f64)
}

pub fn lift_w(w: &BeamformingVector, h: &[Complex64]) -> Result<RealLiftW> {
    if w.len() != h.len() {
        return Err(OutageError::DimensionMismatch(format!(
            "beamformer length {} vs channel length {}",
            w.len(),
            h.len()
        )));
    }
    Ok(RealLiftW {
        w_tilde: w.lifted(),
        h_tilde: TwoColumnMatrix::from_complex(h),
    })
}

/// `a = diag(h_r^H) G w` and `b = h_d^H w`.
pub fn reflect_terms(w: &[Complex64], s: &ChannelSample) -> (Vec<Complex64>, Complex64) {
    let a = s
        .h_r
        .iter()
        .enumerate()
        .map(|(i, hr)| {
            let gw: Complex64 = s.g_row(i).iter().zip(w).map(|(g, wm)| g * wm).sum();
            hr.conj() * gw
        })
        .collect();
    (a, inner(&s.h_d, w))
}

/// Lifted per-sample constants `(A_tilde, b_tilde)` for a fixed beamformer.
pub fn lift_reflect_terms(w: &[Complex64], s: &ChannelSample) -> (TwoColumnMatrix, [f64; 2]) {
    let (a, b) = reflect_terms(w, s);
    (TwoColumnMatrix::from_complex(&a), [b.re, -b.im])
}

pub fn lift_v(w: &BeamformingVector, v: &PhaseShiftVector, s: &ChannelSample) -> Result<RealLiftV> {
    check_dims(s, Some(w.len()), Some(v.len()))?;
    let (a_tilde, b_tilde) = lift_reflect_terms(w.as_slice(), s);
    Ok(RealLiftV {
        v_tilde: v.lifted(),
        a_tilde,
        b_tilde,
    })
}

/// `sigma^2 - ||H_tilde^T w_tilde||^2 / gamma`.
pub fn d1(w_tilde: &[f64], h_tilde: &TwoColumnMatrix, p: &SystemParams) -> f64 {
    let r = h_tilde.transpose_mul(w_tilde);
    p.noise - (r[0] * r[0] + r[1] * r[1]) / p.gamma
}

/// `sigma^2 - ||b_tilde + A_tilde^T v_tilde||^2 / gamma`.
pub fn d2(v_tilde: &[f64], a_tilde: &TwoColumnMatrix, b_tilde: [f64; 2], p: &SystemParams) -> f64 {
    let r = a_tilde.transpose_mul(v_tilde);
    let (x, y) = (b_tilde[0] + r[0], b_tilde[1] + r[1]);
    p.noise - (x * x + y * y) / p.gamma
}

impl RealLiftW {
    pub fn margin(&self, p: &SystemParams) -> f64 {
        d1(&self.w_tilde, &self.h_tilde, p)
    }
}

impl RealLiftV {
    pub fn margin(&self, p: &SystemParams) -> f64 {
        d2(&self.v_tilde, &self.a_tilde, self.b_tilde, p)
    }
}
