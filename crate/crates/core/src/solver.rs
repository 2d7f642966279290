//! Alternating projected SGD over the beamformer and the IRS phase shifts.
//!
//! Each outer iteration runs up to `max_inner` single-sample SGD steps on the
//! lifted beamformer `w_tilde` (projected onto the power ball) followed by up
//! to `max_inner` steps on the lifted phase vector `v_tilde` (projected onto
//! the unit circle elementwise). An inner loop stops early once the relative
//! change of the full sample-average surrogate drops to `epsilon`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelSampleSet;
use crate::error::{OutageError, Result};
use crate::objective::{
    cascaded_channel, d1, d2, empirical_outage, lift_reflect_terms, sigmoid, sigmoid_slope,
    BeamformingVector, PhaseShiftVector, RealLiftV, RealLiftW, SystemParams, TwoColumnMatrix,
    FEASIBILITY_TOL,
};
use crate::seed;

/// When the multiplicative step-size decay is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecaySchedule {
    /// Once per outer iteration, to both step sizes.
    #[default]
    PerOuter,
    /// After every inner SGD step of the corresponding block.
    PerInner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Initial step size for `w_tilde`.
    pub l_w: f64,
    /// Initial step size for `v_tilde`.
    pub l_v: f64,
    pub decay: f64,
    pub decay_schedule: DecaySchedule,
    /// Outer iterations (J).
    pub max_outer: usize,
    /// Inner iterations per block (K).
    pub max_inner: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl SolverConfig {
    /// l_w = 1, l_v = 0.1, decay 0.99, J = 1000, K = 5000, eps = 1e-5.
    pub fn full_scale() -> Self {
        Self {
            l_w: 1.0,
            l_v: 0.1,
            decay: 0.99,
            decay_schedule: DecaySchedule::PerOuter,
            max_outer: 1000,
            max_inner: 5000,
            epsilon: 1e-5,
            seed: 0,
        }
    }

    /// J = 50, K = 200 and l_w = 0.01; l_v, decay and epsilon as in
    /// [`SolverConfig::full_scale`].
    pub fn desk_scale() -> Self {
        Self {
            l_w: 0.01,
            max_outer: 50,
            max_inner: 200,
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OutageError::InvalidConfig(msg));
        if !(self.l_w > 0.0 && self.l_w.is_finite()) {
            return bad(format!("l_w must be > 0, got {}", self.l_w));
        }
        if !(self.l_v > 0.0 && self.l_v.is_finite()) {
            return bad(format!("l_v must be > 0, got {}", self.l_v));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad(format!("decay must lie in (0, 1], got {}", self.decay));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration limits must be >= 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Beamformer,
    PhaseShift,
}

/// Summary of one inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    /// Full-set surrogate after every step, in step order.
    pub trace: Vec<f64>,
    pub steps: usize,
    pub stopped_early: bool,
    /// Step size after the loop (differs from the input only under per-inner decay).
    pub final_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerRun {
    pub outer: usize,
    pub block: Block,
    pub steps: usize,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverResult {
    pub w: BeamformingVector,
    pub v: PhaseShiftVector,
    /// Surrogate value after every inner step, in execution order.
    pub objective_trace: Vec<f64>,
    pub inner_runs: Vec<InnerRun>,
    pub outage_on_train: f64,
    pub outer_iterations_run: usize,
}

/// Gradient of `S(c * d1)` with respect to `w_tilde`.
pub fn grad_w(lift: &RealLiftW, p: &SystemParams) -> Vec<f64> {
    grad_w_at(&lift.w_tilde, &lift.h_tilde, p)
}

pub(crate) fn grad_w_at(w_tilde: &[f64], h_tilde: &TwoColumnMatrix, p: &SystemParams) -> Vec<f64> {
    let c = p.scale();
    let r = h_tilde.transpose_mul(w_tilde);
    let d = p.noise - (r[0] * r[0] + r[1] * r[1]) / p.gamma;
    let coef = c * sigmoid_slope(c * d) * (-2.0 / p.gamma);
    h_tilde.mul([coef * r[0], coef * r[1]])
}

/// Gradient of `S(c * d2)` with respect to `v_tilde`.
pub fn grad_v(lift: &RealLiftV, p: &SystemParams) -> Vec<f64> {
    grad_v_at(&lift.v_tilde, &lift.a_tilde, lift.b_tilde, p)
}

pub(crate) fn grad_v_at(
    v_tilde: &[f64],
    a_tilde: &TwoColumnMatrix,
    b_tilde: [f64; 2],
    p: &SystemParams,
) -> Vec<f64> {
    let c = p.scale();
    let r = a_tilde.transpose_mul(v_tilde);
    let r = [b_tilde[0] + r[0], b_tilde[1] + r[1]];
    let d = p.noise - (r[0] * r[0] + r[1] * r[1]) / p.gamma;
    let coef = c * sigmoid_slope(c * d) * (-2.0 / p.gamma);
    a_tilde.mul([coef * r[0], coef * r[1]])
}

/// Euclidean projection onto `{x : ||x||^2 <= p_max}`.
pub fn project_ball(y: &[f64], p_max: f64) -> Vec<f64> {
    let norm2: f64 = y.iter().map(|x| x * x).sum();
    if norm2 < p_max {
        return y.to_vec();
    }
    let s = (p_max / norm2).sqrt();
    y.iter().map(|x| x * s).collect()
}

/// Normalizes each pair `(y[n], y[n + N])` to unit length.
///
/// A pair at the origin has no nearest point on the circle; it takes the
/// corresponding pair of `fallback` when given, otherwise `(1, 0)`.
pub fn project_unimodular(y: &[f64], fallback: Option<&[f64]>) -> Vec<f64> {
    assert!(
        y.len().is_multiple_of(2),
        "lifted phase vector must have even length"
    );
    let n = y.len() / 2;
    let mut out = vec![0.0; y.len()];
    for i in 0..n {
        let (re, im) = (y[i], y[i + n]);
        let r = re.hypot(im);
        if r > 0.0 {
            out[i] = re / r;
            out[i + n] = im / r;
        } else if let Some(prev) = fallback {
            out[i] = prev[i];
            out[i + n] = prev[i + n];
        } else {
            out[i] = 1.0;
        }
    }
    out
}

/// Feasible starting point: `w` an isotropic Gaussian direction with
/// `||w||^2 = P`, `v` with i.i.d. uniform phases.
pub fn init_point<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    p: &SystemParams,
    rng: &mut R,
) -> (BeamformingVector, PhaseShiftVector) {
    assert!(m >= 1, "need at least one antenna");
    let mut w: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = p.power.sqrt() / norm;
    w.iter_mut().for_each(|z| *z *= s);
    let phases: Vec<f64> = (0..n)
        .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
        .collect();
    (
        BeamformingVector::from_vec_unchecked(w),
        PhaseShiftVector::from_phases(&phases),
    )
}

struct InnerSettings {
    step: f64,
    max_inner: usize,
    epsilon: f64,
    per_step_decay: Option<f64>,
}

/// Shared projected-SGD loop. `grad(x, i)` is the stochastic gradient on
/// sample `i`, `objective(x)` the full-set surrogate and `project(y, x_prev)`
/// the feasibility map.
fn projected_sgd<R, G, O, P>(
    x: &mut Vec<f64>,
    t: usize,
    settings: InnerSettings,
    rng: &mut R,
    grad: G,
    objective: O,
    project: P,
) -> InnerOutcome
where
    R: Rng + ?Sized,
    G: Fn(&[f64], usize) -> Vec<f64>,
    O: Fn(&[f64]) -> f64,
    P: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    let mut step = settings.step;
    let mut trace = Vec::with_capacity(settings.max_inner.min(1024));
    let mut stopped_early = false;
    for _ in 0..settings.max_inner {
        let i = rng.gen_range(0..t);
        let g = grad(x, i);
        let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        *x = project(&y, x);
        trace.push(objective(x));
        if let Some(rate) = settings.per_step_decay {
            step *= rate;
        }
        if let [.., prev, cur] = trace[..] {
            if prev == 0.0 || (prev - cur).abs() / prev <= settings.epsilon {
                stopped_early = true;
                break;
            }
        }
    }
    InnerOutcome {
        steps: trace.len(),
        trace,
        stopped_early,
        final_step: step,
    }
}

fn mean<F: Fn(usize) -> f64>(t: usize, f: F) -> f64 {
    (0..t).map(f).sum::<f64>() / t as f64
}

/// Beamformer block: SGD on `w_tilde` with the cascaded channels `h^t` fixed.
pub fn inner_loop_w<R: Rng + ?Sized>(
    w_tilde: &mut Vec<f64>,
    h_lifts: &[TwoColumnMatrix],
    p: &SystemParams,
    config: &SolverConfig,
    step: f64,
    rng: &mut R,
) -> InnerOutcome {
    let c = p.scale();
    let settings = InnerSettings {
        step,
        max_inner: config.max_inner,
        epsilon: config.epsilon,
        per_step_decay: (config.decay_schedule == DecaySchedule::PerInner).then_some(config.decay),
    };
    projected_sgd(
        w_tilde,
        h_lifts.len(),
        settings,
        rng,
        |x, i| grad_w_at(x, &h_lifts[i], p),
        |x| mean(h_lifts.len(), |t| sigmoid(c * d1(x, &h_lifts[t], p))),
        |y, _| project_ball(y, p.power),
    )
}

/// Phase-shift block: SGD on `v_tilde` with the per-sample `(A_tilde, b_tilde)` fixed.
pub fn inner_loop_v<R: Rng + ?Sized>(
    v_tilde: &mut Vec<f64>,
    v_lifts: &[(TwoColumnMatrix, [f64; 2])],
    p: &SystemParams,
    config: &SolverConfig,
    step: f64,
    rng: &mut R,
) -> InnerOutcome {
    let c = p.scale();
    let settings = InnerSettings {
        step,
        max_inner: config.max_inner,
        epsilon: config.epsilon,
        per_step_decay: (config.decay_schedule == DecaySchedule::PerInner).then_some(config.decay),
    };
    projected_sgd(
        v_tilde,
        v_lifts.len(),
        settings,
        rng,
        |x, i| grad_v_at(x, &v_lifts[i].0, v_lifts[i].1, p),
        |x| {
            mean(v_lifts.len(), |t| {
                sigmoid(c * d2(x, &v_lifts[t].0, v_lifts[t].1, p))
            })
        },
        |y, prev| project_unimodular(y, Some(prev)),
    )
}

fn check_start(
    set: &ChannelSampleSet,
    p: &SystemParams,
    w0: &BeamformingVector,
    v0: &PhaseShiftVector,
) -> Result<()> {
    if w0.len() != set.m() || v0.len() != set.n() {
        return Err(OutageError::DimensionMismatch(format!(
            "initial point has (M, N) = ({}, {}), sample set has ({}, {})",
            w0.len(),
            v0.len(),
            set.m(),
            set.n()
        )));
    }
    let power = w0.power();
    if power.is_nan() || power > p.power + FEASIBILITY_TOL {
        return Err(OutageError::Infeasible(format!(
            "initial ||w||^2 = {} exceeds P = {}",
            w0.power(),
            p.power
        )));
    }
    PhaseShiftVector::new(v0.as_slice().to_vec())?;
    Ok(())
}

fn run(
    set: &ChannelSampleSet,
    p: &SystemParams,
    config: &SolverConfig,
    w0: &BeamformingVector,
    v0: &PhaseShiftVector,
    optimize_v: bool,
) -> Result<SolverResult> {
    p.validate()?;
    config.validate()?;
    check_start(set, p, w0, v0)?;

    let mut rng = seed::rng_from_seed(config.seed);
    let mut w_tilde = w0.lifted();
    let mut v_tilde = v0.lifted();
    let (mut l_w, mut l_v) = (config.l_w, config.l_v);
    let mut objective_trace = Vec::new();
    let mut inner_runs = Vec::new();
    let update_v = optimize_v && set.n() > 0;

    for outer in 0..config.max_outer {
        let v = PhaseShiftVector::from_lift(&v_tilde);
        let h_lifts = set
            .samples()
            .iter()
            .map(|s| cascaded_channel(&v, s).map(|h| TwoColumnMatrix::from_complex(&h)))
            .collect::<Result<Vec<_>>>()?;
        let out = inner_loop_w(&mut w_tilde, &h_lifts, p, config, l_w, &mut rng);
        l_w = out.final_step;
        inner_runs.push(InnerRun {
            outer,
            block: Block::Beamformer,
            steps: out.steps,
            stopped_early: out.stopped_early,
        });
        objective_trace.extend(out.trace);

        if update_v {
            let w = crate::objective::unlift(&w_tilde);
            let v_lifts: Vec<_> = set
                .samples()
                .iter()
                .map(|s| lift_reflect_terms(&w, s))
                .collect();
            let out = inner_loop_v(&mut v_tilde, &v_lifts, p, config, l_v, &mut rng);
            l_v = out.final_step;
            inner_runs.push(InnerRun {
                outer,
                block: Block::PhaseShift,
                steps: out.steps,
                stopped_early: out.stopped_early,
            });
            objective_trace.extend(out.trace);
        }

        if config.decay_schedule == DecaySchedule::PerOuter {
            l_w *= config.decay;
            l_v *= config.decay;
        }
    }

    let w = BeamformingVector::from_lift(&w_tilde);
    let v = if update_v {
        PhaseShiftVector::from_lift(&v_tilde)
    } else {
        v0.clone()
    };
    let outage_on_train = empirical_outage(&w, &v, set, p)?;
    Ok(SolverResult {
        w,
        v,
        objective_trace,
        inner_runs,
        outage_on_train,
        outer_iterations_run: config.max_outer,
    })
}

/// Alternating SGD over `(w, v)` starting from a feasible `(w0, v0)`.
///
/// With `N = 0` the phase-shift block is skipped and this reduces to
/// beamforming-only SGD on the direct channel.
pub fn alternating_sgd(
    set: &ChannelSampleSet,
    p: &SystemParams,
    config: &SolverConfig,
    w0: &BeamformingVector,
    v0: &PhaseShiftVector,
) -> Result<SolverResult> {
    run(set, p, config, w0, v0, true)
}

/// Same outer/inner schedule as [`alternating_sgd`] but with `v` frozen at `v_fixed`.
pub fn beamforming_sgd(
    set: &ChannelSampleSet,
    p: &SystemParams,
    config: &SolverConfig,
    w0: &BeamformingVector,
    v_fixed: &PhaseShiftVector,
) -> Result<SolverResult> {
    run(set, p, config, w0, v_fixed, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_seeded_sample_set, ScenarioGeometry};
    use crate::objective::{lift_v, lift_w, surrogate_objective};
    use crate::seed::rng_from_seed;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grad_w_vanishes_at_origin() {
        let w = BeamformingVector::from_vec_unchecked(vec![c(0.0, 0.0); 3]);
        let lift = lift_w(&w, &[c(1.0, 2.0), c(-0.5, 0.3), c(0.0, 1.0)]).unwrap();
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(grad_w(&lift, &p).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn grad_w_scalar_case() {
        let w = BeamformingVector::from_vec_unchecked(vec![c(1.0, 0.0)]);
        let lift = lift_w(&w, &[c(1.0, 0.0)]).unwrap();
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        let g = grad_w(&lift, &p);
        assert!((g[0] + 0.5).abs() < 1e-15 && g[1].abs() < 1e-15, "{g:?}");
    }

    #[test]
    fn grad_v_zero_reflection() {
        let s = crate::channel::ChannelSample::new(
            vec![c(1.0, 0.5)],
            vec![c(0.3, -0.2), c(0.1, 0.9)],
            vec![c(1.0, 0.0), c(0.4, 0.4)],
        )
        .unwrap();
        let w = BeamformingVector::from_vec_unchecked(vec![c(0.0, 0.0)]);
        let v = PhaseShiftVector::from_phases(&[0.3, 2.0]);
        let lift = lift_v(&w, &v, &s).unwrap();
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(grad_v(&lift, &p).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn grad_v_scalar_case() {
        let lift = RealLiftV {
            v_tilde: vec![1.0, 0.0],
            a_tilde: TwoColumnMatrix::from_complex(&[c(1.0, 0.0)]),
            b_tilde: [0.0, 0.0],
        };
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        let g = grad_v(&lift, &p);
        assert!((g[0] + 0.5).abs() < 1e-15 && g[1].abs() < 1e-15, "{g:?}");
    }

    #[test]
    fn ball_projection_cases() {
        assert_eq!(project_ball(&[0.3, 0.4], 1.0), vec![0.3, 0.4]);
        let out = project_ball(&[3.0, 4.0], 1.0);
        assert!((out[0] - 0.6).abs() < 1e-15 && (out[1] - 0.8).abs() < 1e-15);
    }

    /// Nearest point of the disc of radius `r` to `y`, by bisection on the
    /// radius along a fine angle grid.
    fn ball_oracle(y: [f64; 2], r: f64) -> [f64; 2] {
        let dist = |p: [f64; 2]| (p[0] - y[0]).powi(2) + (p[1] - y[1]).powi(2);
        if y[0].hypot(y[1]) <= r {
            return y;
        }
        let mut best = [0.0, 0.0];
        let mut best_d = f64::INFINITY;
        let grid = 20_000;
        for k in 0..grid {
            let th = k as f64 / grid as f64 * std::f64::consts::TAU;
            let (mut lo, mut hi) = (0.0, r);
            for _ in 0..60 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let d1 = dist([m1 * th.cos(), m1 * th.sin()]);
                let d2 = dist([m2 * th.cos(), m2 * th.sin()]);
                if d1 < d2 {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let cand = [lo * th.cos(), lo * th.sin()];
            if dist(cand) < best_d {
                best_d = dist(cand);
                best = cand;
            }
        }
        best
    }

    #[test]
    fn ball_projection_is_nearest_point() {
        let mut rng = rng_from_seed(21);
        for _ in 0..5 {
            let y = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let pmax: f64 = rng.gen_range(0.2..2.0);
            let got = project_ball(&y, pmax);
            let want = ball_oracle(y, pmax.sqrt());
            assert!((got[0] - want[0]).abs() < 1e-3 && (got[1] - want[1]).abs() < 1e-3);
        }
    }

    #[test]
    fn unimodular_projection_cases() {
        let out = project_unimodular(&[3.0, 4.0], None);
        assert!((out[0] - 0.6).abs() < 1e-15 && (out[1] - 0.8).abs() < 1e-15);
        let unit = PhaseShiftVector::from_phases(&[0.1, 2.0, -1.3]).lifted();
        let again = project_unimodular(&unit, None);
        for (a, b) in unit.iter().zip(&again) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn unimodular_projection_zero_pair_keeps_previous() {
        let prev = [0.0, 1.0, 1.0, 0.0];
        let out = project_unimodular(&[0.0, 2.0, 0.0, 0.0], Some(&prev));
        assert_eq!(out, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(project_unimodular(&[0.0, 0.0], None), vec![1.0, 0.0]);
    }

    #[test]
    fn unimodular_projection_matches_complex_normalization() {
        let mut rng = rng_from_seed(8);
        for _ in 0..50 {
            let y: Vec<f64> = (0..12).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let out = project_unimodular(&y, None);
            let z = crate::objective::unlift(&y);
            let got = crate::objective::unlift(&out);
            for (zi, gi) in z.iter().zip(&got) {
                let want = zi / zi.norm();
                assert!((want - gi).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unimodular_projection_is_nearest_on_circle() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let y = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let out = project_unimodular(&y, None);
            let grid = 100_000;
            let (mut best, mut best_d) = (0.0, f64::INFINITY);
            for k in 0..grid {
                let th = k as f64 / grid as f64 * std::f64::consts::TAU;
                let d = (th.cos() - y[0]).powi(2) + (th.sin() - y[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = th;
                }
            }
            assert!((out[0] - best.cos()).abs() < 1e-4 && (out[1] - best.sin()).abs() < 1e-4);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ball_projection_is_feasible_and_idempotent(
                y in prop::collection::vec(-1e3f64..1e3, 1..16),
                pmax in 1e-6f64..1e3,
            ) {
                let out = project_ball(&y, pmax);
                let n2: f64 = out.iter().map(|x| x * x).sum();
                prop_assert!(n2 <= pmax * (1.0 + 1e-12));
                let again = project_ball(&out, pmax);
                for (a, b) in out.iter().zip(&again) {
                    prop_assert!((a - b).abs() <= 1e-15 * pmax.sqrt().max(1.0));
                }
            }

            #[test]
            fn unimodular_projection_lands_on_circle(
                y in prop::collection::vec(-1e3f64..1e3, 1..12)
                    .prop_map(|mut v| { if v.len() % 2 == 1 { v.push(0.5); } v }),
            ) {
                let out = project_unimodular(&y, None);
                let n = out.len() / 2;
                for i in 0..n {
                    prop_assert!((out[i].hypot(out[i + n]) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    fn desk_params() -> SystemParams {
        SystemParams::new(1.0, 1e-4, 3.0).unwrap()
    }

    #[test]
    fn init_point_contract() {
        let p = SystemParams::new(2.5, 1e-4, 3.0).unwrap();
        let (w, v) = init_point(6, 9, &p, &mut rng_from_seed(2));
        assert!((w.power() - 2.5).abs() < 1e-12);
        assert!(v.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let (w2, v2) = init_point(6, 9, &p, &mut rng_from_seed(2));
        assert_eq!((w, v), (w2, v2));
    }

    #[test]
    fn one_outer_one_inner_takes_one_step_each() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 3, 4, 10, 1).unwrap();
        let p = desk_params();
        let (w0, v0) = init_point(3, 4, &p, &mut rng_from_seed(1));
        let cfg = SolverConfig {
            max_outer: 1,
            max_inner: 1,
            ..SolverConfig::desk_scale()
        };
        let res = alternating_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        assert_eq!(res.objective_trace.len(), 2);
        assert_eq!(res.inner_runs.len(), 2);
        assert!(res.inner_runs.iter().all(|r| r.steps == 1));
        assert_eq!(res.outer_iterations_run, 1);
    }

    #[test]
    fn no_irs_skips_phase_block() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 3, 0, 10, 1).unwrap();
        let p = desk_params();
        let (w0, v0) = init_point(3, 0, &p, &mut rng_from_seed(1));
        let cfg = SolverConfig {
            max_outer: 3,
            max_inner: 5,
            ..SolverConfig::desk_scale()
        };
        let res = alternating_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        assert!(res.inner_runs.iter().all(|r| r.block == Block::Beamformer));
        assert!(res.v.is_empty());
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 2, 2, 5, 1).unwrap();
        let p = desk_params();
        let cfg = SolverConfig::desk_scale();
        let big = BeamformingVector::from_vec_unchecked(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let v = PhaseShiftVector::from_phases(&[0.0, 1.0]);
        assert!(matches!(
            alternating_sgd(&set, &p, &cfg, &big, &v),
            Err(OutageError::Infeasible(_))
        ));
        let w = BeamformingVector::from_vec_unchecked(vec![c(0.5, 0.0), c(0.0, 0.5)]);
        let off = PhaseShiftVector::from_vec_unchecked(vec![c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(alternating_sgd(&set, &p, &cfg, &w, &off).is_err());
        let short = PhaseShiftVector::from_phases(&[0.0]);
        assert!(matches!(
            alternating_sgd(&set, &p, &cfg, &w, &short),
            Err(OutageError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn solver_is_deterministic() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 3, 5, 30, 9).unwrap();
        let p = desk_params();
        let (w0, v0) = init_point(3, 5, &p, &mut rng_from_seed(3));
        let cfg = SolverConfig {
            max_outer: 5,
            max_inner: 20,
            seed: 17,
            ..SolverConfig::desk_scale()
        };
        let a = alternating_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        let b = alternating_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stopping_rule_holds_on_logged_trace() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 4, 8, 40, 5).unwrap();
        let p = desk_params();
        let (w0, v0) = init_point(4, 8, &p, &mut rng_from_seed(5));
        let cfg = SolverConfig {
            max_outer: 10,
            max_inner: 50,
            epsilon: 1e-3,
            ..SolverConfig::desk_scale()
        };
        let res = alternating_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        let mut offset = 0;
        let mut saw_stop = false;
        for run in &res.inner_runs {
            let tr = &res.objective_trace[offset..offset + run.steps];
            if run.stopped_early {
                saw_stop = true;
                let (prev, cur) = (tr[tr.len() - 2], tr[tr.len() - 1]);
                assert!(prev == 0.0 || (prev - cur).abs() / prev <= cfg.epsilon);
            } else {
                assert_eq!(run.steps, cfg.max_inner);
            }
            offset += run.steps;
        }
        assert!(saw_stop);
        assert!(res.objective_trace.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn random_phase_keeps_v_and_trace_matches_objective() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 3, 4, 25, 2).unwrap();
        let p = desk_params();
        let (w0, v0) = init_point(3, 4, &p, &mut rng_from_seed(6));
        let cfg = SolverConfig {
            max_outer: 4,
            max_inner: 30,
            ..SolverConfig::desk_scale()
        };
        let res = beamforming_sgd(&set, &p, &cfg, &w0, &v0).unwrap();
        assert_eq!(res.v, v0);
        assert!(res.w.power() <= p.power + FEASIBILITY_TOL);
        let last = *res.objective_trace.last().unwrap();
        let full = surrogate_objective(&res.w, &res.v, &set, &p).unwrap();
        assert!((last - full).abs() < 1e-12);
    }

    #[test]
    fn per_inner_decay_shrinks_steps() {
        let set = generate_seeded_sample_set(&ScenarioGeometry::standard(), 2, 2, 5, 2).unwrap();
        let p = desk_params();
        let cfg = SolverConfig {
            max_inner: 10,
            decay: 0.5,
            decay_schedule: DecaySchedule::PerInner,
            epsilon: 1e-300,
            ..SolverConfig::desk_scale()
        };
        let (w0, _) = init_point(2, 2, &p, &mut rng_from_seed(1));
        let v = PhaseShiftVector::from_phases(&[0.0, 0.0]);
        let h: Vec<_> = set
            .samples()
            .iter()
            .map(|s| TwoColumnMatrix::from_complex(&cascaded_channel(&v, s).unwrap()))
            .collect();
        let mut wt = w0.lifted();
        let out = inner_loop_w(&mut wt, &h, &p, &cfg, 1.0, &mut rng_from_seed(0));
        assert!((out.final_step - 0.5f64.powi(out.steps as i32)).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::full_scale().validate().is_ok());
        for bad in [
            SolverConfig {
                l_w: 0.0,
                ..SolverConfig::full_scale()
            },
            SolverConfig {
                decay: 1.5,
                ..SolverConfig::full_scale()
            },
            SolverConfig {
                max_outer: 0,
                ..SolverConfig::full_scale()
            },
            SolverConfig {
                epsilon: 0.0,
                ..SolverConfig::full_scale()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
