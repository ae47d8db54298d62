//! Antenna model: rotationally symmetric Gaussian beams, the quasi-omni
//! listening pattern, and the hexagonal-ring beam codebook.
//!
//! Angles are radians in memory. The polar angle is measured from the array
//! boresight, so a codebook covering a sector of width `w` holds directions
//! with `polar <= w`.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// A direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth: f64,
    polar: f64,
}

impl Direction {
    /// Builds a direction, wrapping the azimuth into `[0, 2π)` and clamping
    /// the polar angle into `[0, π]`.
    pub fn new(azimuth: f64, polar: f64) -> Self {
        let mut az = azimuth.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        if az >= TAU {
            az = 0.0;
        }
        Self {
            azimuth: az,
            polar: polar.clamp(0.0, PI),
        }
    }

    pub fn from_degrees(azimuth_deg: f64, polar_deg: f64) -> Self {
        Self::new(azimuth_deg.to_radians(), polar_deg.to_radians())
    }

    pub fn boresight() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn polar(&self) -> f64 {
        self.polar
    }

    /// Cartesian unit vector with the boresight along +z.
    pub fn unit_vector(&self) -> [f64; 3] {
        let (sp, cp) = self.polar.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        [sp * ca, sp * sa, cp]
    }
}

/// Great-circle angle between two directions, in `[0, π]`.
///
/// Uses `atan2(|u × v|, u · v)`, which stays accurate for nearly parallel
/// and nearly antipodal directions where `acos` loses precision.
pub fn angular_offset(a: Direction, b: Direction) -> f64 {
    let u = a.unit_vector();
    let v = b.unit_vector();
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    sin.atan2(cos).clamp(0.0, PI)
}

/// Gaussian gain pattern in linear scale, `g(θ) = g0 · 2^(-(2θ/hpbw)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPattern {
    hpbw: f64,
    peak_gain: f64,
}

impl GaussianPattern {
    pub fn new(hpbw: f64, peak_gain: f64) -> Result<Self> {
        if !(hpbw > 0.0 && hpbw < PI) {
            return Err(Error::param("hpbw", format!("{hpbw} rad is outside (0, π)")));
        }
        if !(peak_gain > 0.0 && peak_gain.is_finite()) {
            return Err(Error::param("peak_gain", format!("{peak_gain} must be positive")));
        }
        Ok(Self { hpbw, peak_gain })
    }

    /// Pattern with the peak gain chosen for unit radiated power.
    pub fn calibrated(hpbw: f64) -> Result<Self> {
        let g0 = calibrate_peak_gain(hpbw)?;
        Self::new(hpbw, g0)
    }

    pub fn hpbw(&self) -> f64 {
        self.hpbw
    }

    pub fn peak_gain(&self) -> f64 {
        self.peak_gain
    }

    pub fn gain(&self, offset: f64) -> f64 {
        gaussian_gain(self, offset)
    }

    /// Gain seen by a ray travelling along `ray` when the beam points to `axis`.
    pub fn gain_towards(&self, axis: Direction, ray: Direction) -> f64 {
        self.gain(angular_offset(axis, ray))
    }
}

pub fn gaussian_gain(p: &GaussianPattern, offset: f64) -> f64 {
    let x = 2.0 * offset / p.hpbw;
    p.peak_gain * (-(x * x)).exp2()
}

/// Receive pattern of the quasi-omni antenna: unit gain everywhere.
pub fn quasi_omni_gain() -> f64 {
    1.0
}

/// Peak gain `g0` for which the pattern integrates to `4π` over the sphere.
///
/// The pattern is rotationally symmetric, so the azimuth integral is `2π`
/// and only the polar integral `∫ 2^(-(2θ/hpbw)²) sin θ dθ` over `[0, π]`
/// is evaluated, by composite Simpson with interval doubling.
pub fn calibrate_peak_gain(hpbw: f64) -> Result<f64> {
    if !(hpbw > 0.0 && hpbw < PI) {
        return Err(Error::param("hpbw", format!("{hpbw} rad is outside (0, π)")));
    }
    let f = |theta: f64| {
        let x = 2.0 * theta / hpbw;
        (-(x * x)).exp2() * theta.sin()
    };

    const MAX_INTERVALS: usize = 1 << 22;
    let mut n = 64;
    let mut prev = simpson(&f, 0.0, PI, n);
    let mut delta = f64::INFINITY;
    while n < MAX_INTERVALS {
        n *= 2;
        let next = simpson(&f, 0.0, PI, n);
        delta = ((next - prev) / next).abs();
        prev = next;
        if delta < 1e-13 {
            return Ok(2.0 / prev);
        }
    }
    Err(Error::Quadrature { nodes: n + 1, delta })
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    debug_assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Ordered list of beam directions. The position of an entry is its
/// sector ID (0-based in memory).
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    entries: Vec<Direction>,
    sector_width: f64,
}

/// Default ring progression: boresight, then 6 and 12 beams.
pub const DEFAULT_RING_SIZES: [usize; 3] = [1, 6, 12];

impl Codebook {
    /// Hexagonal-ring codebook over a rotationally symmetric sector.
    ///
    /// Ring `r` sits at polar angle `r · sector_width / (rings − 1)` with its
    /// beams equally spaced in azimuth; odd rings are rotated by half an
    /// azimuth step so neighbouring rings interleave.
    pub fn build(sector_width: f64, ring_sizes: &[usize]) -> Result<Self> {
        if !(sector_width > 0.0 && sector_width <= PI) {
            return Err(Error::param(
                "sector_width",
                format!("{sector_width} rad is outside (0, π]"),
            ));
        }
        if ring_sizes.iter().sum::<usize>() == 0 {
            return Err(Error::param("ring_sizes", "rings hold no beams"));
        }
        if ring_sizes[0] != 1 {
            return Err(Error::param(
                "ring_sizes",
                format!("first ring must be the single boresight beam, got {}", ring_sizes[0]),
            ));
        }

        let rings = ring_sizes.len();
        let mut entries = Vec::with_capacity(ring_sizes.iter().sum());
        for (r, &count) in ring_sizes.iter().enumerate() {
            let polar = if rings > 1 {
                r as f64 * sector_width / (rings - 1) as f64
            } else {
                0.0
            };
            let step = TAU / count.max(1) as f64;
            let offset = if r % 2 == 1 { step / 2.0 } else { 0.0 };
            for k in 0..count {
                entries.push(Direction::new(offset + k as f64 * step, polar));
            }
        }

        for (a, da) in entries.iter().enumerate() {
            for db in &entries[a + 1..] {
                if angular_offset(*da, *db) <= 1e-12 {
                    return Err(Error::param(
                        "ring_sizes",
                        format!("ring layout places two beams at ({:.3}°, {:.3}°)",
                            da.azimuth().to_degrees(), da.polar().to_degrees()),
                    ));
                }
            }
        }

        Ok(Self {
            entries,
            sector_width,
        })
    }

    /// The 19-beam codebook over a 90° sector.
    pub fn default_hexagonal() -> Self {
        Self::build(PI / 2.0, &DEFAULT_RING_SIZES).expect("default codebook is valid")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Direction] {
        &self.entries
    }

    pub fn sector_width(&self) -> f64 {
        self.sector_width
    }

    pub fn get(&self, index: usize) -> Result<Direction> {
        self.entries.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            len: self.entries.len(),
        })
    }

    /// JSON array of `{index, azimuth_deg, polar_deg}`; `index` is the
    /// 1-based sector ID.
    pub fn to_json(&self) -> serde_json::Result<String> {
        #[derive(Serialize)]
        struct Entry {
            index: usize,
            azimuth_deg: f64,
            polar_deg: f64,
        }
        let rows: Vec<Entry> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, d)| Entry {
                index: i + 1,
                azimuth_deg: d.azimuth().to_degrees(),
                polar_deg: d.polar().to_degrees(),
            })
            .collect();
        serde_json::to_string_pretty(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn direction_normalizes() {
        let d = Direction::new(-PI / 2.0, 4.0);
        assert!((d.azimuth() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(d.polar(), PI);
        let d = Direction::new(TAU, -0.1);
        assert_eq!(d.azimuth(), 0.0);
        assert_eq!(d.polar(), 0.0);
    }

    #[test]
    fn offset_examples() {
        let a = Direction::from_degrees(37.0, 71.0);
        assert_eq!(angular_offset(a, a), 0.0);

        let o = angular_offset(Direction::new(0.0, 0.0), Direction::new(0.0, deg(30.0)));
        assert!((o - deg(30.0)).abs() < 1e-14);

        // spherical law of cosines: cos c = cos a cos b + sin a sin b cos Δφ
        let (p1, p2, dphi) = (deg(90.0), deg(90.0), deg(90.0));
        let oracle = (p1.cos() * p2.cos() + p1.sin() * p2.sin() * dphi.cos()).acos();
        let o = angular_offset(Direction::new(0.0, p1), Direction::new(dphi, p2));
        assert!((o - oracle).abs() < 1e-14);
        assert!((o - deg(90.0)).abs() < 1e-14);
    }

    #[test]
    fn offset_antipodal() {
        let o = angular_offset(Direction::new(0.0, 0.0), Direction::new(1.0, PI));
        assert!((o - PI).abs() < 1e-15);
    }

    #[test]
    fn gaussian_examples() {
        let p = GaussianPattern::new(deg(60.0), 3.0).unwrap();
        assert_eq!(p.gain(0.0), 3.0);
        assert_eq!(p.gain(deg(30.0)), 1.5);
        assert!((p.gain(deg(60.0)) - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn pattern_rejects_bad_params() {
        assert!(GaussianPattern::new(0.0, 1.0).is_err());
        assert!(GaussianPattern::new(PI, 1.0).is_err());
        assert!(GaussianPattern::new(1.0, 0.0).is_err());
        assert!(calibrate_peak_gain(-1.0).is_err());
    }

    #[test]
    fn calibrated_peak_gain_golden() {
        // frozen from scipy.integrate.quad (2 / ∫ 2^-(2θ/h)² sinθ dθ) and
        // cross-checked against a 2·10⁶-point midpoint sphere grid
        let g0 = calibrate_peak_gain(deg(60.0)).unwrap();
        let golden = 10.797_599_723_049_046;
        assert!(((g0 - golden) / golden).abs() < 1e-6, "g0 = {g0}");
        let g0_90 = calibrate_peak_gain(deg(90.0)).unwrap();
        assert!(((g0_90 - 5.201_778_417_527_978) / 5.2).abs() < 1e-6);
    }

    #[test]
    fn narrower_beam_has_larger_peak() {
        let mut last = 0.0;
        for hp in [150.0, 120.0, 90.0, 60.0, 45.0, 30.0, 10.0] {
            let g0 = calibrate_peak_gain(deg(hp)).unwrap();
            assert!(g0 > last);
            last = g0;
        }
    }

    #[test]
    fn quasi_omni_is_unity() {
        assert_eq!(quasi_omni_gain(), 1.0);
    }

    #[test]
    fn default_codebook_has_19_entries() {
        let cb = Codebook::default_hexagonal();
        assert_eq!(cb.len(), 19);
        let polars: Vec<f64> = cb.entries().iter().map(|d| d.polar().to_degrees()).collect();
        assert_eq!(polars[0], 0.0);
        assert!(polars[1..7].iter().all(|p| (p - 45.0).abs() < 1e-12));
        assert!(polars[7..].iter().all(|p| (p - 90.0).abs() < 1e-12));
        // ring 1 is staggered by half a step
        assert!((cb.entries()[1].azimuth().to_degrees() - 30.0).abs() < 1e-12);
        assert_eq!(cb.entries()[7].azimuth(), 0.0);
    }

    #[test]
    fn small_codebooks() {
        let cb = Codebook::build(deg(40.0), &[1]).unwrap();
        assert_eq!(cb.len(), 1);
        assert_eq!(cb.entries()[0].polar(), 0.0);

        let cb = Codebook::build(deg(90.0), &[1, 6]).unwrap();
        assert_eq!(cb.len(), 7);
        for (k, d) in cb.entries()[1..].iter().enumerate() {
            assert!((d.polar() - deg(90.0)).abs() < 1e-15);
            assert!((d.azimuth() - deg(30.0 + 60.0 * k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn codebook_errors() {
        assert!(Codebook::build(deg(90.0), &[]).is_err());
        assert!(Codebook::build(deg(90.0), &[0, 0]).is_err());
        assert!(Codebook::build(deg(90.0), &[2, 6]).is_err());
        assert!(Codebook::build(0.0, &[1]).is_err());
        // two beams on the same pole
        assert!(Codebook::build(PI, &[1, 2]).is_err());
    }

    #[test]
    fn codebook_json_uses_sector_ids() {
        let cb = Codebook::build(deg(90.0), &[1, 6]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cb.to_json().unwrap()).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 7);
        assert_eq!(arr[0]["index"], 1);
        assert!((arr[3]["polar_deg"].as_f64().unwrap() - 90.0).abs() < 1e-12);
    }
}
