//! Omni-directional polarized cluster/ray channel.
//!
//! A channel is a list of clusters, each a bundle of Dirac rays with their
//! own delay, complex amplitude, departure and arrival direction. Every
//! cluster also carries a 2×2 polarization matrix; projecting it onto the
//! Jones vectors of the TX and RX arrays gives the per-link gain `A[n][m]`
//! applied to all of the cluster's rays on link (RX PAA `n`, TX PAA `m`).

mod file;
mod generate;

pub use file::{load_channel, save_channel, ChannelFile};
pub use generate::{generate_channel, ChannelGenParams};

use num_complex::Complex64;

use crate::antenna::Direction;
use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Two-component Jones vector, `(ϑ-component, φ-component)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector([Complex64; 2]);

impl JonesVector {
    /// Polarized along φ.
    pub const V: JonesVector = JonesVector([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    /// Polarized along ϑ.
    pub const H: JonesVector = JonesVector([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);

    /// Normalizes `v` to unit length.
    pub fn new(v: [Complex64; 2]) -> Result<Self> {
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::param("jones_vector", "vector has zero or non-finite norm"));
        }
        Ok(JonesVector([v[0] / norm, v[1] / norm]))
    }

    pub fn components(&self) -> [Complex64; 2] {
        self.0
    }
}

/// Cross-polarized array pair: PAA 1 along φ, PAA 2 along ϑ.
pub const CROSS_POLARIZED: [JonesVector; 2] = [JonesVector::V, JonesVector::H];

/// Gain coefficients between the ϑ/φ field components at TX and RX.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationMatrix(Mat2);

impl PolarizationMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        // small slack for values that went through a text round-trip
        if let Some(x) = m.0.iter().flatten().find(|x| !(x.norm() <= 1.0 + 1e-12)) {
            return Err(Error::param(
                "pol",
                format!("entry magnitude {} exceeds 1 (passive channel)", x.norm()),
            ));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Mat2::IDENTITY)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }
}

/// Per-link polarization gains: `A[n][m] = rx[n]ᴴ · pol · tx[m]`.
pub fn polarization_attenuation(
    pol: &PolarizationMatrix,
    tx_orients: &[JonesVector; 2],
    rx_orients: &[JonesVector; 2],
) -> Mat2 {
    let p = pol.matrix();
    let mut a = Mat2::ZERO;
    for (n, rx) in rx_orients.iter().enumerate() {
        for (m, tx) in tx_orients.iter().enumerate() {
            let r = rx.components();
            let t = tx.components();
            let mut acc = Complex64::new(0.0, 0.0);
            for u in 0..2 {
                for v in 0..2 {
                    acc += r[u].conj() * p.get(u, v) * t[v];
                }
            }
            a.set(n, m, acc);
        }
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Absolute delay in seconds (cluster arrival plus intra-cluster offset).
    pub delay: f64,
    pub amplitude: Complex64,
    pub aod: Direction,
    pub aoa: Direction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub toa: f64,
    pub center_aod: Direction,
    pub center_aoa: Direction,
    pub pol: PolarizationMatrix,
    pub rays: Vec<Ray>,
    pub is_los: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmniChannel {
    params: ChannelGenParams,
    seed: u64,
    clusters: Vec<Cluster>,
    pol_gains: Vec<Mat2>,
}

impl OmniChannel {
    /// Builds a channel with cross-polarized arrays at both ends. The
    /// channel is taken as-is; call [`normalize`] to rescale it.
    pub fn new(clusters: Vec<Cluster>) -> Result<Self> {
        Self::with_provenance(ChannelGenParams::default(), 0, clusters)
    }

    pub(crate) fn with_provenance(
        params: ChannelGenParams,
        seed: u64,
        clusters: Vec<Cluster>,
    ) -> Result<Self> {
        if clusters.iter().filter(|c| c.is_los).count() > 1 {
            return Err(Error::param("clusters", "more than one LOS cluster"));
        }
        for c in &clusters {
            if c.rays.is_empty() {
                return Err(Error::param("clusters", "cluster without rays"));
            }
            for r in &c.rays {
                if !(r.delay >= 0.0 && r.delay.is_finite()) {
                    return Err(Error::param("delay", format!("{} s is not a valid delay", r.delay)));
                }
                if !(r.amplitude.re.is_finite() && r.amplitude.im.is_finite()) {
                    return Err(Error::param("amplitude", "non-finite ray amplitude"));
                }
            }
        }
        let pol_gains = clusters
            .iter()
            .map(|c| polarization_attenuation(&c.pol, &CROSS_POLARIZED, &CROSS_POLARIZED))
            .collect();
        Ok(Self {
            params,
            seed,
            clusters,
            pol_gains,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn pol_gains(&self) -> &[Mat2] {
        &self.pol_gains
    }

    pub fn params(&self) -> &ChannelGenParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn has_los(&self) -> bool {
        self.clusters.iter().any(|c| c.is_los)
    }

    /// Rays of link (RX PAA `n`, TX PAA `m`) with their polarization gain
    /// folded into the amplitude.
    pub fn link_rays(&self, n: usize, m: usize) -> impl Iterator<Item = Ray> + '_ {
        self.clusters
            .iter()
            .zip(&self.pol_gains)
            .flat_map(move |(c, a)| {
                let g = a.get(n, m);
                c.rays.iter().map(move |r| Ray {
                    amplitude: g * r.amplitude,
                    ..*r
                })
            })
    }

    /// `Σ |a_inm · α|²` over all rays of link (n, m).
    pub fn link_energy(&self, n: usize, m: usize) -> f64 {
        self.link_rays(n, m).map(|r| r.amplitude.norm_sqr()).sum()
    }

    /// Mean energy of the two direct links.
    pub fn direct_link_energy(&self) -> f64 {
        (self.link_energy(0, 0) + self.link_energy(1, 1)) / 2.0
    }

    fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.clusters {
            for r in &mut c.rays {
                r.amplitude *= factor;
            }
        }
        out
    }
}

/// Rescales every ray amplitude by one real factor so the mean direct-link
/// energy is 1.
pub fn normalize(ch: &OmniChannel) -> Result<OmniChannel> {
    let e = ch.direct_link_energy();
    if !(e > 0.0 && e.is_finite()) {
        return Err(Error::ZeroEnergy);
    }
    Ok(ch.scaled((1.0 / e).sqrt()))
}

/// Drops the LOS cluster and renormalizes.
pub fn strip_los(ch: &OmniChannel) -> Result<OmniChannel> {
    let clusters = ch.clusters.iter().filter(|c| !c.is_los).cloned().collect();
    let stripped = OmniChannel::with_provenance(ch.params.clone(), ch.seed, clusters)?;
    normalize(&stripped)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn single_ray_cluster(amp: Complex64, pol: Mat2, los: bool) -> Cluster {
        let d = Direction::boresight();
        Cluster {
            toa: 0.0,
            center_aod: d,
            center_aoa: d,
            pol: PolarizationMatrix::new(pol).unwrap(),
            rays: vec![Ray {
                delay: 0.0,
                amplitude: amp,
                aod: d,
                aoa: d,
            }],
            is_los: los,
        }
    }

    #[test]
    fn identity_pol_gives_identity_attenuation() {
        let a = polarization_attenuation(&PolarizationMatrix::identity(), &CROSS_POLARIZED, &CROSS_POLARIZED);
        assert_eq!(a, Mat2::IDENTITY);
        assert_eq!(a.get(0, 1), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn attenuation_expands_quadratic_forms() {
        let (a, b, cc, d) = (c(0.1, 0.2), c(-0.3, 0.05), c(0.4, -0.1), c(0.6, 0.3));
        let pol = PolarizationMatrix::new(Mat2::new(a, b, cc, d)).unwrap();
        let att = polarization_attenuation(&pol, &CROSS_POLARIZED, &CROSS_POLARIZED);
        assert_eq!(att, Mat2::new(d, cc, b, a));
    }

    #[test]
    fn zero_pol_gives_zero() {
        let pol = PolarizationMatrix::new(Mat2::ZERO).unwrap();
        assert_eq!(polarization_attenuation(&pol, &CROSS_POLARIZED, &CROSS_POLARIZED), Mat2::ZERO);
    }

    #[test]
    fn pol_matrix_must_be_passive() {
        assert!(PolarizationMatrix::new(Mat2::from_real([[1.5, 0.0], [0.0, 1.0]])).is_err());
    }

    #[test]
    fn jones_vector_is_normalized() {
        let j = JonesVector::new([c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        let [a, b] = j.components();
        assert!((a.norm_sqr() + b.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(JonesVector::new([c(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn normalize_two_single_rays() {
        // |h11| = 3 and |h22| = 1 through a diagonal pol matrix
        let pol = Mat2::from_real([[1.0 / 3.0, 0.0], [0.0, 1.0]]);
        let ch = OmniChannel::new(vec![single_ray_cluster(c(3.0, 0.0), pol, false)]).unwrap();
        assert!((ch.link_energy(0, 0) - 9.0).abs() < 1e-12);
        assert!((ch.link_energy(1, 1) - 1.0).abs() < 1e-12);
        let n = normalize(&ch).unwrap();
        let factor = n.clusters()[0].rays[0].amplitude.re / 3.0;
        assert!((factor - (2.0f64 / 10.0).sqrt()).abs() < 1e-15);
        assert!((n.direct_link_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent_and_scale_invariant() {
        let ch = generate_channel(&ChannelGenParams::default(), 9).unwrap();
        let once = normalize(&ch).unwrap();
        let twice = normalize(&once).unwrap();
        let doubled = normalize(&ch.scaled(2.0)).unwrap();
        for (a, b) in once.link_rays(0, 0).zip(twice.link_rays(0, 0)) {
            assert!((a.amplitude - b.amplitude).norm() < 1e-12);
        }
        for (a, b) in once.link_rays(1, 0).zip(doubled.link_rays(1, 0)) {
            assert!((a.amplitude - b.amplitude).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_rejects_silent_direct_links() {
        let pol = Mat2::from_real([[0.0, 1.0], [1.0, 0.0]]);
        let ch = OmniChannel::new(vec![single_ray_cluster(c(1.0, 0.0), pol, false)]).unwrap();
        assert!(matches!(normalize(&ch), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn strip_los_removes_and_is_idempotent() {
        let params = ChannelGenParams { los: true, ..Default::default() };
        let ch = generate_channel(&params, 3).unwrap();
        assert!(ch.has_los());
        let s1 = strip_los(&ch).unwrap();
        assert!(!s1.has_los());
        assert_eq!(s1.clusters().len(), ch.clusters().len() - 1);
        let s2 = strip_los(&s1).unwrap();
        assert_eq!(s1.clusters().len(), s2.clusters().len());
        for (a, b) in s1.link_rays(0, 1).zip(s2.link_rays(0, 1)) {
            assert!((a.amplitude - b.amplitude).norm() < 1e-12);
            assert_eq!(a.delay, b.delay);
        }
    }

    #[test]
    fn channel_rejects_two_los_clusters() {
        let a = single_ray_cluster(c(1.0, 0.0), Mat2::IDENTITY, true);
        assert!(OmniChannel::new(vec![a.clone(), a]).is_err());
    }
}
