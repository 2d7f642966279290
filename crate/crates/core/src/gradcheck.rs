//! Central finite-difference validation of the lifted gradients.
//!
//! The reference derivative perturbs the lifted variable, maps it back to a
//! complex vector and re-evaluates the complex margin, so it shares no code
//! with the closed-form gradients beyond [`margin`] and [`sigmoid`].

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelSample;
use crate::objective::{
    cascaded_channel, inner, lift_v, lift_w, margin, sigmoid, unlift, BeamformingVector,
    PhaseShiftVector, SystemParams,
};
use crate::seed;
use crate::solver::{grad_v, grad_w};

/// Relative finite-difference step, scaled by the norm of the point.
pub const FD_REL_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckInstance {
    pub w: BeamformingVector,
    pub v: PhaseShiftVector,
    pub sample: ChannelSample,
    pub params: SystemParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub instances: usize,
    pub max_rel_err_w: f64,
    pub max_rel_err_v: f64,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.max_rel_err_w.max(self.max_rel_err_v)
    }
}

fn randc<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|_| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) / 2f64.sqrt()
        })
        .collect()
}

/// Random unit-variance channels and a noise level chosen so the scaled
/// margin `d / sigma^2` lands in `[-2, 0.9]`, where the sigmoid has slope.
pub fn random_instance<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> GradCheckInstance {
    let sample = ChannelSample {
        h_d: randc(rng, m),
        g: randc(rng, n * m),
        h_r: randc(rng, n),
    };
    let w = BeamformingVector::from_vec_unchecked(randc(rng, m));
    let phases: Vec<f64> = (0..n)
        .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
        .collect();
    let v = PhaseShiftVector::from_phases(&phases);
    let gamma = rng.gen_range(1.0..5.0);
    let target: f64 = rng.gen_range(-2.0..0.9);
    let gain = inner(&cascaded_channel(&v, &sample).unwrap(), w.as_slice()).norm_sqr();
    let noise = gain / (gamma * (1.0 - target));
    let params = SystemParams::new(w.power().max(1.0), noise, gamma).unwrap();
    GradCheckInstance {
        w,
        v,
        sample,
        params,
    }
}

fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let h = FD_REL_STEP * norm.max(1e-12);
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Relative error of `grad_w` and `grad_v` against finite differences.
pub fn check_instance(inst: &GradCheckInstance) -> (f64, f64) {
    let p = &inst.params;
    let c = p.scale();
    let s = &inst.sample;

    let h = cascaded_channel(&inst.v, s).unwrap();
    let lw = lift_w(&inst.w, &h).unwrap();
    let analytic_w = grad_w(&lw, p);
    let fd_w = central_difference(
        |x| {
            let w = BeamformingVector::from_vec_unchecked(unlift(x));
            sigmoid(c * margin(&w, &inst.v, s, p).unwrap())
        },
        &lw.w_tilde,
    );

    let lv = lift_v(&inst.w, &inst.v, s).unwrap();
    let analytic_v = grad_v(&lv, p);
    let fd_v = central_difference(
        |x| {
            let v = PhaseShiftVector::from_vec_unchecked(unlift(x));
            sigmoid(c * margin(&inst.w, &v, s, p).unwrap())
        },
        &lv.v_tilde,
    );
    (rel_err(&analytic_w, &fd_w), rel_err(&analytic_v, &fd_v))
}

/// Runs `instances` random checks for each `(M, N)` in `shapes`.
pub fn run_gradcheck(
    shapes: &[(usize, usize)],
    instances: usize,
    seed_value: u64,
) -> GradCheckReport {
    let mut rng = seed::rng_from_seed(seed_value);
    let mut report = GradCheckReport {
        instances: 0,
        max_rel_err_w: 0.0,
        max_rel_err_v: 0.0,
    };
    for &(m, n) in shapes {
        for _ in 0..instances {
            let inst = random_instance(m, n, &mut rng);
            let (ew, ev) = check_instance(&inst);
            report.max_rel_err_w = report.max_rel_err_w.max(ew);
            report.max_rel_err_v = report.max_rel_err_v.max(ev);
            report.instances += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_margin_in_sloped_region() {
        let mut rng = seed::rng_from_seed(1);
        for _ in 0..20 {
            let inst = random_instance(3, 4, &mut rng);
            let z =
                inst.params.scale() * margin(&inst.w, &inst.v, &inst.sample, &inst.params).unwrap();
            assert!((-2.0 - 1e-9..=0.9 + 1e-9).contains(&z), "{z}");
        }
    }

    #[test]
    fn gradients_pass_default_shapes() {
        let r = run_gradcheck(&[(2, 3), (8, 16)], 10, 7);
        assert_eq!(r.instances, 20);
        assert!(r.max_rel_err() < 1e-6, "{r:?}");
    }

    #[test]
    fn a_wrong_gradient_is_detected() {
        let mut rng = seed::rng_from_seed(2);
        let inst = random_instance(2, 2, &mut rng);
        let h = cascaded_channel(&inst.v, &inst.sample).unwrap();
        let lw = lift_w(&inst.w, &h).unwrap();
        let mut g = grad_w(&lw, &inst.params);
        g[0] *= 1.01;
        let c = inst.params.scale();
        let fd = central_difference(
            |x| {
                let w = BeamformingVector::from_vec_unchecked(unlift(x));
                sigmoid(c * margin(&w, &inst.v, &inst.sample, &inst.params).unwrap())
            },
            &lw.w_tilde,
        );
        assert!(rel_err(&g, &fd) > 1e-4);
    }
}
