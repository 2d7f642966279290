//! Scenario geometry and random channel-sample generation.
//!
//! Every link gain is `d^-beta` (1 m reference distance) times an i.i.d.
//! circularly-symmetric complex Gaussian entry with unit variance, i.e. real
//! and imaginary parts each `N(0, 1/2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{OutageError, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub bs_position: Position3D,
    pub irs_position: Position3D,
    pub user_region_center: Position3D,
    /// Side of the axis-aligned square the user is dropped in, meters.
    pub user_region_side: f64,
    pub beta_direct: f64,
    pub beta_bs_irs: f64,
    pub beta_irs_user: f64,
}

impl ScenarioGeometry {
    /// BS at (0,0,10), IRS at (15,5,5), user in a 2 m square around (18,1,0),
    /// path-loss exponents 2.5 / 2.1 / 2.2.
    pub fn standard() -> Self {
        Self {
            bs_position: Position3D::new(0.0, 0.0, 10.0),
            irs_position: Position3D::new(15.0, 5.0, 5.0),
            user_region_center: Position3D::new(18.0, 1.0, 0.0),
            user_region_side: 2.0,
            beta_direct: 2.5,
            beta_bs_irs: 2.1,
            beta_irs_user: 2.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.bs_position.is_finite()
            && self.irs_position.is_finite()
            && self.user_region_center.is_finite();
        if !finite {
            return Err(OutageError::DegenerateGeometry(
                "non-finite coordinate".into(),
            ));
        }
        if !(self.user_region_side >= 0.0 && self.user_region_side.is_finite()) {
            return Err(OutageError::DegenerateGeometry(format!(
                "user region side must be finite and >= 0, got {}",
                self.user_region_side
            )));
        }
        for (name, beta) in [
            ("beta_direct", self.beta_direct),
            ("beta_bs_irs", self.beta_bs_irs),
            ("beta_irs_user", self.beta_irs_user),
        ] {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(OutageError::DegenerateGeometry(format!(
                    "{name} must be > 0, got {beta}"
                )));
            }
        }
        Ok(())
    }

    /// Average power gains `(direct, bs_irs, irs_user)` for a user at `user`.
    pub fn link_gains(&self, user: &Position3D) -> Result<(f64, f64, f64)> {
        Ok((
            path_loss(self.bs_position.distance(user), self.beta_direct)?,
            path_loss(
                self.bs_position.distance(&self.irs_position),
                self.beta_bs_irs,
            )?,
            path_loss(self.irs_position.distance(user), self.beta_irs_user)?,
        ))
    }
}

/// One realization of the direct, BS-IRS and IRS-user channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// BS-user channel, length M.
    pub h_d: Vec<Complex64>,
    /// BS-IRS channel, N x M, row-major.
    pub g: Vec<Complex64>,
    /// IRS-user channel, length N.
    pub h_r: Vec<Complex64>,
}

impl ChannelSample {
    pub fn new(h_d: Vec<Complex64>, g: Vec<Complex64>, h_r: Vec<Complex64>) -> Result<Self> {
        let sample = Self { h_d, g, h_r };
        sample.validate()?;
        Ok(sample)
    }

    pub fn m(&self) -> usize {
        self.h_d.len()
    }

    pub fn n(&self) -> usize {
        self.h_r.len()
    }

    /// Row `i` of `G` (the channel from the BS array to IRS element `i`).
    pub fn g_row(&self, i: usize) -> &[Complex64] {
        let m = self.m();
        &self.g[i * m..(i + 1) * m]
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_d.is_empty() {
            return Err(OutageError::DimensionMismatch(
                "h_d must have at least one antenna".into(),
            ));
        }
        if self.g.len() != self.m() * self.n() {
            return Err(OutageError::DimensionMismatch(format!(
                "G has {} entries, expected {}x{}",
                self.g.len(),
                self.n(),
                self.m()
            )));
        }
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !(finite(&self.h_d) && finite(&self.g) && finite(&self.h_r)) {
            return Err(OutageError::DimensionMismatch(
                "channel contains non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// Same sample with the IRS removed (N = 0).
    pub fn without_irs(&self) -> Self {
        Self {
            h_d: self.h_d.clone(),
            g: Vec::new(),
            h_r: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSetMeta {
    pub geometry: ScenarioGeometry,
    pub user_position: Position3D,
    pub seed: Option<u64>,
}

/// The data-driven sample set `H_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSampleSet {
    samples: Vec<ChannelSample>,
    m: usize,
    n: usize,
    pub meta: SampleSetMeta,
}

impl ChannelSampleSet {
    pub fn new(samples: Vec<ChannelSample>, meta: SampleSetMeta) -> Result<Self> {
        let first = samples.first().ok_or(OutageError::EmptySampleSet)?;
        let (m, n) = (first.m(), first.n());
        for (t, s) in samples.iter().enumerate() {
            s.validate()?;
            if s.m() != m || s.n() != n {
                return Err(OutageError::DimensionMismatch(format!(
                    "sample {t} has (M, N) = ({}, {}), expected ({m}, {n})",
                    s.m(),
                    s.n()
                )));
            }
        }
        Ok(Self {
            samples,
            m,
            n,
            meta,
        })
    }

    pub fn samples(&self) -> &[ChannelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn without_irs(&self) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(ChannelSample::without_irs)
                .collect(),
            m: self.m,
            n: 0,
            meta: self.meta.clone(),
        }
    }
}

pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

pub fn path_loss(distance: f64, beta: f64) -> Result<f64> {
    if distance.is_nan() || distance <= 0.0 || distance.is_infinite() {
        return Err(OutageError::DegenerateGeometry(format!(
            "link distance must be positive and finite, got {distance}"
        )));
    }
    Ok(distance.powf(-beta))
}

/// Uniform drop over the square of side `user_region_side` centered at the
/// region center; the height is pinned to the center's z.
pub fn draw_user_position<R: Rng + ?Sized>(geometry: &ScenarioGeometry, rng: &mut R) -> Position3D {
    let c = geometry.user_region_center;
    let side = geometry.user_region_side;
    if side == 0.0 {
        return c;
    }
    let dx: f64 = rng.gen::<f64>() - 0.5;
    let dy: f64 = rng.gen::<f64>() - 0.5;
    Position3D::new(c.x + side * dx, c.y + side * dy, c.z)
}

fn cn<R: Rng + ?Sized>(rng: &mut R, std_per_axis: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_axis, im * std_per_axis)
}

/// Draws `h_d` (M), then `G` (N x M, row-major), then `h_r` (N), in that order.
pub fn generate_channel_sample<R: Rng + ?Sized>(
    geometry: &ScenarioGeometry,
    m: usize,
    n: usize,
    user_pos: &Position3D,
    rng: &mut R,
) -> Result<ChannelSample> {
    if m == 0 {
        return Err(OutageError::DimensionMismatch(
            "antenna count must be >= 1".into(),
        ));
    }
    let (pl_d, pl_g, pl_r) = geometry.link_gains(user_pos)?;
    let (s_d, s_g, s_r) = (
        (pl_d / 2.0).sqrt(),
        (pl_g / 2.0).sqrt(),
        (pl_r / 2.0).sqrt(),
    );
    let h_d = (0..m).map(|_| cn(rng, s_d)).collect();
    let g = (0..n * m).map(|_| cn(rng, s_g)).collect();
    let h_r = (0..n).map(|_| cn(rng, s_r)).collect();
    Ok(ChannelSample { h_d, g, h_r })
}

/// `t` independent fading draws for one fixed user placement.
pub fn generate_sample_set<R: Rng + ?Sized>(
    geometry: &ScenarioGeometry,
    m: usize,
    n: usize,
    t: usize,
    user_pos: &Position3D,
    rng: &mut R,
) -> Result<ChannelSampleSet> {
    geometry.validate()?;
    if t == 0 {
        return Err(OutageError::EmptySampleSet);
    }
    let samples = (0..t)
        .map(|_| generate_channel_sample(geometry, m, n, user_pos, rng))
        .collect::<Result<Vec<_>>>()?;
    ChannelSampleSet::new(
        samples,
        SampleSetMeta {
            geometry: geometry.clone(),
            user_position: *user_pos,
            seed: None,
        },
    )
}

/// Draws the user position and a sample set from a single seed and records
/// the seed in the set's metadata.
pub fn generate_seeded_sample_set(
    geometry: &ScenarioGeometry,
    m: usize,
    n: usize,
    t: usize,
    seed_value: u64,
) -> Result<ChannelSampleSet> {
    let mut pos_rng = seed::rng_from_seed(seed::derive(seed_value, seed::tags::USER_POSITION));
    let user = draw_user_position(geometry, &mut pos_rng);
    let mut rng = seed::rng_from_seed(seed::derive(seed_value, seed::tags::TRAIN_SET));
    let mut set = generate_sample_set(geometry, m, n, t, &user, &mut rng)?;
    set.meta.seed = Some(seed_value);
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
    }

    #[test]
    fn path_loss_values() {
        assert!((path_loss(10.0, 2.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(path_loss(1.0, 2.5).unwrap(), 1.0);
        // |(18,1,0) - (0,0,10)|^2 = 425, so the gain is 425^(-1.25)
        let bs = Position3D::new(0.0, 0.0, 10.0);
        let user = Position3D::new(18.0, 1.0, 0.0);
        let got = path_loss(bs.distance(&user), 2.5).unwrap();
        assert!((got / 5.182196031931404e-4 - 1.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn path_loss_rejects_zero_distance() {
        assert!(matches!(
            path_loss(0.0, 2.0),
            Err(OutageError::DegenerateGeometry(_))
        ));
        assert!(path_loss(-1.0, 2.0).is_err());
    }

    #[test]
    fn path_loss_monotonicity() {
        let betas = [0.5, 2.1, 2.5, 4.0];
        for &b in &betas {
            let mut prev = f64::INFINITY;
            for d in [0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
                let g = path_loss(d, b).unwrap();
                assert!(g < prev);
                prev = g;
            }
        }
        for d in [1.5, 10.0, 30.0] {
            assert!(path_loss(d, 2.5).unwrap() < path_loss(d, 2.1).unwrap());
        }
    }

    #[test]
    fn user_position_degenerate_and_bounds() {
        let mut geo = ScenarioGeometry::standard();
        let mut rng = rng_from_seed(3);
        for _ in 0..1000 {
            let p = draw_user_position(&geo, &mut rng);
            assert!((17.0..=19.0).contains(&p.x));
            assert!((0.0..=2.0).contains(&p.y));
            assert_eq!(p.z, 0.0);
        }
        geo.user_region_side = 0.0;
        assert_eq!(
            draw_user_position(&geo, &mut rng),
            Position3D::new(18.0, 1.0, 0.0)
        );
    }

    #[test]
    fn user_position_mean() {
        let geo = ScenarioGeometry::standard();
        let mut rng = rng_from_seed(11);
        let draws = 100_000;
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            let p = draw_user_position(&geo, &mut rng);
            sx += p.x;
            sy += p.y;
            sz += p.z;
        }
        let k = draws as f64;
        assert!((sx / k - 18.0).abs() < 0.02);
        assert!((sy / k - 1.0).abs() < 0.02);
        assert!((sz / k).abs() < 0.02);
    }

    #[test]
    fn no_irs_sample_shape() {
        let geo = ScenarioGeometry::standard();
        let user = geo.user_region_center;
        let s = generate_channel_sample(&geo, 4, 0, &user, &mut rng_from_seed(1)).unwrap();
        assert_eq!(s.h_d.len(), 4);
        assert!(s.g.is_empty());
        assert!(s.h_r.is_empty());
    }

    #[test]
    fn degenerate_link_is_an_error() {
        let geo = ScenarioGeometry::standard();
        let at_bs = geo.bs_position;
        assert!(generate_channel_sample(&geo, 2, 2, &at_bs, &mut rng_from_seed(1)).is_err());
        assert!(generate_channel_sample(
            &geo,
            0,
            2,
            &geo.user_region_center,
            &mut rng_from_seed(1)
        )
        .is_err());
    }

    #[test]
    fn sample_sets_are_deterministic() {
        let geo = ScenarioGeometry::standard();
        let a = generate_seeded_sample_set(&geo, 3, 5, 250, 42).unwrap();
        let b = generate_seeded_sample_set(&geo, 3, 5, 250, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 250);
        let c = generate_seeded_sample_set(&geo, 3, 5, 1, 43).unwrap();
        assert_eq!(c.len(), 1);
        assert_ne!(a.samples()[0], c.samples()[0]);
    }

    #[test]
    fn set_rejects_mixed_dimensions() {
        let geo = ScenarioGeometry::standard();
        let user = geo.user_region_center;
        let mut rng = rng_from_seed(5);
        let a = generate_channel_sample(&geo, 2, 3, &user, &mut rng).unwrap();
        let b = generate_channel_sample(&geo, 2, 4, &user, &mut rng).unwrap();
        let meta = SampleSetMeta {
            geometry: geo,
            user_position: user,
            seed: None,
        };
        assert!(ChannelSampleSet::new(vec![a, b], meta.clone()).is_err());
        assert!(matches!(
            ChannelSampleSet::new(vec![], meta),
            Err(OutageError::EmptySampleSet)
        ));
    }
}
