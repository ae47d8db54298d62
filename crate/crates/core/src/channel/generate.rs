//! Parametric two-level (cluster/ray) stochastic generator.
//!
//! Clusters arrive as a Poisson process whose power decays exponentially
//! with delay; each cluster holds a fixed number of rays with exponential
//! intra-cluster arrivals, exponential power decay, uniform phases and a
//! Laplacian angular spread around the cluster centre. Cluster centres are
//! drawn uniformly in azimuth and uniformly in polar angle over the
//! angular sector served by the codebook.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use super::{normalize, Cluster, OmniChannel, PolarizationMatrix, Ray};
use crate::antenna::Direction;
use crate::error::{Error, Result};
use crate::mat2::Mat2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelGenParams {
    /// Poisson mean of the number of NLOS clusters (at least one is kept).
    pub mean_clusters: f64,
    pub mean_cluster_interarrival_s: f64,
    pub cluster_decay_s: f64,
    pub rays_per_cluster: usize,
    pub mean_ray_interarrival_s: f64,
    pub ray_decay_s: f64,
    /// Standard deviation of the Laplacian offset applied to azimuth and
    /// polar angle of each ray.
    pub angular_spread_deg: f64,
    /// Upper polar limit for cluster centres.
    pub sector_polar_deg: f64,
    pub xpd_db: f64,
    pub los: bool,
    /// LOS power above the strongest NLOS cluster.
    pub los_excess_db: f64,
}

impl Default for ChannelGenParams {
    fn default() -> Self {
        Self {
            mean_clusters: 6.0,
            mean_cluster_interarrival_s: 10e-9,
            cluster_decay_s: 20e-9,
            rays_per_cluster: 8,
            mean_ray_interarrival_s: 1e-9,
            ray_decay_s: 5e-9,
            angular_spread_deg: 5.0,
            sector_polar_deg: 90.0,
            xpd_db: 15.0,
            los: true,
            los_excess_db: 10.0,
        }
    }
}

impl ChannelGenParams {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 5] = [
            ("mean_clusters", self.mean_clusters),
            ("mean_cluster_interarrival_s", self.mean_cluster_interarrival_s),
            ("cluster_decay_s", self.cluster_decay_s),
            ("mean_ray_interarrival_s", self.mean_ray_interarrival_s),
            ("ray_decay_s", self.ray_decay_s),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(field, format!("{v} must be positive")));
            }
        }
        if self.rays_per_cluster == 0 {
            return Err(Error::param("rays_per_cluster", "clusters need at least one ray"));
        }
        if !(self.angular_spread_deg >= 0.0 && self.angular_spread_deg.is_finite()) {
            return Err(Error::param("angular_spread_deg", "must be non-negative"));
        }
        if !(self.sector_polar_deg > 0.0 && self.sector_polar_deg <= 180.0) {
            return Err(Error::param("sector_polar_deg", "must lie in (0, 180]"));
        }
        if !self.xpd_db.is_finite() || self.xpd_db < 0.0 {
            return Err(Error::param("xpd_db", "must be a non-negative finite dB value"));
        }
        if !self.los_excess_db.is_finite() {
            return Err(Error::param("los_excess_db", "must be finite"));
        }
        Ok(())
    }

    /// Cross-polarized amplitude relative to co-polarized, `10^(−XPD/20)`.
    pub fn xpd_amplitude(&self) -> f64 {
        10f64.powf(-self.xpd_db / 20.0)
    }
}

/// Draws a normalized channel. The same `(params, seed)` always yields the
/// same channel, bit for bit.
pub fn generate_channel(params: &ChannelGenParams, seed: u64) -> Result<OmniChannel> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_clusters = (Poisson::new(params.mean_clusters)
        .map_err(|e| Error::param("mean_clusters", e.to_string()))?
        .sample(&mut rng) as usize)
        .max(1);
    let cluster_gap = Exp::new(1.0 / params.mean_cluster_interarrival_s)
        .map_err(|e| Error::param("mean_cluster_interarrival_s", e.to_string()))?;
    let ray_gap = Exp::new(1.0 / params.mean_ray_interarrival_s)
        .map_err(|e| Error::param("mean_ray_interarrival_s", e.to_string()))?;
    let spread = params.angular_spread_deg.to_radians();
    let sector = params.sector_polar_deg.to_radians();
    let xpd = params.xpd_amplitude();

    let mut clusters = Vec::with_capacity(n_clusters + 1);
    let mut toa = 0.0;
    let mut strongest = 0.0f64;
    for _ in 0..n_clusters {
        toa += cluster_gap.sample(&mut rng);
        let power = (-toa / params.cluster_decay_s).exp();
        strongest = strongest.max(power);

        let center_aod = draw_center(&mut rng, sector);
        let center_aoa = draw_center(&mut rng, sector);
        let pol = draw_polarization(&mut rng, xpd)?;

        let mut offsets = Vec::with_capacity(params.rays_per_cluster);
        let mut tau = 0.0;
        for k in 0..params.rays_per_cluster {
            if k > 0 {
                tau += ray_gap.sample(&mut rng);
            }
            offsets.push(tau);
        }
        let weights: Vec<f64> = offsets.iter().map(|t| (-t / params.ray_decay_s).exp()).collect();
        let total: f64 = weights.iter().sum();

        let mut rays = Vec::with_capacity(params.rays_per_cluster);
        for (tau, w) in offsets.iter().zip(&weights) {
            let phase = rng.random_range(0.0..TAU);
            rays.push(Ray {
                delay: toa + tau,
                amplitude: Complex64::from_polar((power * w / total).sqrt(), phase),
                aod: perturb(&mut rng, center_aod, spread),
                aoa: perturb(&mut rng, center_aoa, spread),
            });
        }
        clusters.push(Cluster {
            toa,
            center_aod,
            center_aoa,
            pol,
            rays,
            is_los: false,
        });
    }

    if params.los {
        let aod = draw_center(&mut rng, sector);
        let aoa = draw_center(&mut rng, sector);
        let power = strongest * 10f64.powf(params.los_excess_db / 10.0);
        let phase = rng.random_range(0.0..TAU);
        clusters.insert(
            0,
            Cluster {
                toa: 0.0,
                center_aod: aod,
                center_aoa: aoa,
                pol: PolarizationMatrix::identity(),
                rays: vec![Ray {
                    delay: 0.0,
                    amplitude: Complex64::from_polar(power.sqrt(), phase),
                    aod,
                    aoa,
                }],
                is_los: true,
            },
        );
    }

    normalize(&OmniChannel::with_provenance(params.clone(), seed, clusters)?)
}

fn draw_center(rng: &mut impl Rng, sector: f64) -> Direction {
    let az = rng.random_range(0.0..TAU);
    let polar = rng.random_range(0.0..=sector);
    Direction::new(az, polar)
}

/// Co-pol entries with unit magnitude, cross-pol entries attenuated by the
/// XPD; all with independent uniform phase.
fn draw_polarization(rng: &mut impl Rng, xpd: f64) -> Result<PolarizationMatrix> {
    let mut m = Mat2::ZERO;
    for n in 0..2 {
        for k in 0..2 {
            let mag = if n == k { 1.0 } else { xpd };
            m.set(n, k, Complex64::from_polar(mag, rng.random_range(0.0..TAU)));
        }
    }
    PolarizationMatrix::new(m)
}

/// Zero-mean Laplacian sample with standard deviation `sigma`.
fn laplace(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let b = sigma / 2f64.sqrt();
    let u: f64 = rng.random_range(-0.5..0.5);
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

fn perturb(rng: &mut impl Rng, center: Direction, sigma: f64) -> Direction {
    let mut az = center.azimuth() + laplace(rng, sigma);
    let mut polar = center.polar() + laplace(rng, sigma);
    // reflect across the poles instead of clamping
    if polar < 0.0 {
        polar = -polar;
        az += PI;
    } else if polar > PI {
        polar = TAU - polar;
        az += PI;
    }
    Direction::new(az, polar)
}
