//! JSON channel files. Angles are stored in degrees, delays in seconds,
//! complex values as `[re, im]`; the polarization matrix is row-major.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ChannelGenParams, Cluster, OmniChannel, PolarizationMatrix, Ray};
use crate::antenna::Direction;
use crate::error::{Error, Result};
use crate::mat2::Mat2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DirectionRecord {
    az_deg: f64,
    polar_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RayRecord {
    delay_s: f64,
    amp: [f64; 2],
    aod: DirectionRecord,
    aoa: DirectionRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClusterRecord {
    toa_s: f64,
    aod: DirectionRecord,
    aoa: DirectionRecord,
    pol: [[f64; 2]; 4],
    los: bool,
    rays: Vec<RayRecord>,
}

/// On-disk layout of a channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    params: ChannelGenParams,
    seed: u64,
    clusters: Vec<ClusterRecord>,
}

impl From<Direction> for DirectionRecord {
    fn from(d: Direction) -> Self {
        Self {
            az_deg: d.azimuth().to_degrees(),
            polar_deg: d.polar().to_degrees(),
        }
    }
}

fn c2(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

impl From<&OmniChannel> for ChannelFile {
    fn from(ch: &OmniChannel) -> Self {
        let clusters = ch
            .clusters()
            .iter()
            .map(|c| {
                let p = c.pol.matrix();
                ClusterRecord {
                    toa_s: c.toa,
                    aod: c.center_aod.into(),
                    aoa: c.center_aoa.into(),
                    pol: [c2(p.get(0, 0)), c2(p.get(0, 1)), c2(p.get(1, 0)), c2(p.get(1, 1))],
                    los: c.is_los,
                    rays: c
                        .rays
                        .iter()
                        .map(|r| RayRecord {
                            delay_s: r.delay,
                            amp: c2(r.amplitude),
                            aod: r.aod.into(),
                            aoa: r.aoa.into(),
                        })
                        .collect(),
                }
            })
            .collect();
        ChannelFile {
            params: ch.params().clone(),
            seed: ch.seed(),
            clusters,
        }
    }
}

fn direction(rec: &DirectionRecord, ctx: &str) -> Result<Direction> {
    let invalid = |message: String| Error::Parse {
        context: ctx.to_string(),
        message,
    };
    if !(rec.polar_deg >= 0.0 && rec.polar_deg <= 180.0) {
        return Err(invalid(format!("polar_deg {} is outside [0, 180]", rec.polar_deg)));
    }
    if !rec.az_deg.is_finite() {
        return Err(invalid("az_deg is not finite".into()));
    }
    Ok(Direction::from_degrees(rec.az_deg, rec.polar_deg))
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<OmniChannel> {
        let mut clusters = Vec::with_capacity(self.clusters.len());
        for (ci, c) in self.clusters.iter().enumerate() {
            let ctx = format!("clusters[{ci}]");
            let [a, b, cc, d] = c.pol.map(|[re, im]| Complex64::new(re, im));
            let pol = PolarizationMatrix::new(Mat2::new(a, b, cc, d)).map_err(|e| Error::Parse {
                context: format!("{ctx}.pol"),
                message: e.to_string(),
            })?;
            if c.rays.is_empty() {
                return Err(Error::Parse {
                    context: format!("{ctx}.rays"),
                    message: "cluster has no rays".into(),
                });
            }
            let mut rays = Vec::with_capacity(c.rays.len());
            for (ri, r) in c.rays.iter().enumerate() {
                let rctx = format!("{ctx}.rays[{ri}]");
                if !(r.delay_s >= 0.0 && r.delay_s.is_finite()) {
                    return Err(Error::Parse {
                        context: format!("{rctx}.delay_s"),
                        message: format!("{} is not a valid delay", r.delay_s),
                    });
                }
                rays.push(Ray {
                    delay: r.delay_s,
                    amplitude: Complex64::new(r.amp[0], r.amp[1]),
                    aod: direction(&r.aod, &format!("{rctx}.aod"))?,
                    aoa: direction(&r.aoa, &format!("{rctx}.aoa"))?,
                });
            }
            clusters.push(Cluster {
                toa: c.toa_s,
                center_aod: direction(&c.aod, &format!("{ctx}.aod"))?,
                center_aoa: direction(&c.aoa, &format!("{ctx}.aoa"))?,
                pol,
                rays,
                is_los: c.los,
            });
        }
        OmniChannel::with_provenance(self.params, self.seed, clusters)
    }
}

pub fn save_channel(ch: &OmniChannel, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&ChannelFile::from(ch))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<OmniChannel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let file: ChannelFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        context: format!("{} line {} column {}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })?;
    file.into_channel()
}
