//! Effective (beamformed) channel.
//!
//! The omni channel is a sum of Dirac rays, so spatial filtering with the
//! TX and RX beam patterns reduces to weighting every ray by the two
//! pattern gains at its departure and arrival direction. The weighted rays
//! are then binned onto the sample grid and transformed to the
//! per-subcarrier transfer function.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::antenna::{quasi_omni_gain, Codebook, Direction, GaussianPattern};
use crate::channel::OmniChannel;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::rate::{self, RateConfig};

/// Codebook indices per PAA (0-based sector IDs). Ordering is the
/// lexicographic order of `(tx[0], tx[1], rx[0], rx[1])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeamSelection {
    pub tx: [usize; 2],
    pub rx: [usize; 2],
}

impl BeamSelection {
    pub fn new(tx: [usize; 2], rx: [usize; 2]) -> Self {
        Self { tx, rx }
    }

    pub fn indices(&self) -> [usize; 4] {
        [self.tx[0], self.tx[1], self.rx[0], self.rx[1]]
    }

    pub fn validate(&self, cb: &Codebook) -> Result<()> {
        for idx in self.indices() {
            if idx >= cb.len() {
                return Err(Error::IndexOutOfRange { index: idx, len: cb.len() });
            }
        }
        Ok(())
    }
}

/// Pattern applied by one PAA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beam {
    Directive { pattern: GaussianPattern, axis: Direction },
    QuasiOmni,
}

impl Beam {
    pub fn gain(&self, ray: Direction) -> f64 {
        match self {
            Beam::Directive { pattern, axis } => pattern.gain_towards(*axis, ray),
            Beam::QuasiOmni => quasi_omni_gain(),
        }
    }
}

/// A ray reduced to what the sampler needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedRay {
    pub delay: f64,
    pub amplitude: Complex64,
}

/// Weighted rays per link, indexed `[rx n][tx m]`.
pub type LinkRays = [[Vec<WeightedRay>; 2]; 2];

/// Weights the rays of link (RX PAA `n`, TX PAA `m`) with the TX and RX
/// pattern gains.
pub fn beamformed_link(ch: &OmniChannel, n: usize, m: usize, tx: &Beam, rx: &Beam) -> Vec<WeightedRay> {
    ch.link_rays(n, m)
        .map(|r| WeightedRay {
            delay: r.delay,
            amplitude: r.amplitude * (tx.gain(r.aod) * rx.gain(r.aoa)),
        })
        .collect()
}

/// Applies the selected codebook beams on all four links.
pub fn apply_beamforming(
    ch: &OmniChannel,
    sel: &BeamSelection,
    cb: &Codebook,
    pat: &GaussianPattern,
) -> Result<LinkRays> {
    sel.validate(cb)?;
    let beam = |idx: usize| Beam::Directive { pattern: *pat, axis: cb.entries()[idx] };
    let tx = [beam(sel.tx[0]), beam(sel.tx[1])];
    let rx = [beam(sel.rx[0]), beam(sel.rx[1])];
    Ok(std::array::from_fn(|n| {
        std::array::from_fn(|m| beamformed_link(ch, n, m, &tx[m], &rx[n]))
    }))
}

/// Sampling grid for the tapped-delay line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub sample_rate: f64,
    pub n_taps: usize,
}

impl Sampling {
    pub fn new(sample_rate: f64, n_taps: usize) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::param("f_s", format!("{sample_rate} Hz must be positive")));
        }
        if n_taps == 0 {
            return Err(Error::param("n_taps", "need at least one tap"));
        }
        Ok(Self { sample_rate, n_taps })
    }

    pub fn bin(&self, delay: f64) -> usize {
        (delay * self.sample_rate).round() as usize
    }
}

/// Sampled tap sequence of one link plus the energy of rays that fell
/// past the last tap.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTaps {
    pub taps: Vec<Complex64>,
    pub dropped_energy: f64,
}

/// Coherently sums each ray into tap `round(delay · f_s)`.
pub fn discretize_link(rays: &[WeightedRay], sampling: Sampling) -> LinkTaps {
    let mut taps = vec![Complex64::new(0.0, 0.0); sampling.n_taps];
    let mut dropped_energy = 0.0;
    for r in rays {
        match taps.get_mut(sampling.bin(r.delay)) {
            Some(t) => *t += r.amplitude,
            None => dropped_energy += r.amplitude.norm_sqr(),
        }
    }
    LinkTaps { taps, dropped_energy }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCIR {
    pub taps: Vec<Mat2>,
    pub sample_rate: f64,
    /// Energy of dropped rays summed over all four links.
    pub dropped_energy: f64,
}

impl DiscreteCIR {
    fn from_links(links: [[LinkTaps; 2]; 2], sample_rate: f64) -> Self {
        let n_taps = links[0][0].taps.len();
        let taps = (0..n_taps)
            .map(|k| Mat2(std::array::from_fn(|n| std::array::from_fn(|m| links[n][m].taps[k]))))
            .collect();
        let dropped_energy = links.iter().flatten().map(|l| l.dropped_energy).sum();
        Self { taps, sample_rate, dropped_energy }
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    fn link(&self, n: usize, m: usize) -> Vec<Complex64> {
        self.taps.iter().map(|t| t.get(n, m)).collect()
    }
}

pub fn discretize(rays: &LinkRays, sampling: Sampling) -> DiscreteCIR {
    let links = std::array::from_fn(|n| std::array::from_fn(|m| discretize_link(&rays[n][m], sampling)));
    DiscreteCIR::from_links(links, sampling.sample_rate)
}

/// Per-subcarrier 2×2 transfer matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    bins: Vec<Mat2>,
}

impl TransferFunction {
    pub fn from_bins(bins: Vec<Mat2>) -> Self {
        Self { bins }
    }

    pub fn bins(&self) -> &[Mat2] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// CSV with one row per subcarrier: `subcarrier` then re/im of
    /// `h11, h12, h21, h22`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "subcarrier,h11_re,h11_im,h12_re,h12_im,h21_re,h21_im,h22_re,h22_im")?;
        for (k, h) in self.bins.iter().enumerate() {
            write!(out, "{k}")?;
            for v in h.0.iter().flatten() {
                write!(out, ",{:e},{:e}", v.re, v.im)?;
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Forward DFT of a zero-padded tap sequence, `X[n] = Σ_k x[k] e^{-2πi kn/N}`.
#[derive(Clone)]
pub struct Spectrum {
    fft: Arc<dyn Fft<f64>>,
    n_sub: usize,
}

impl Spectrum {
    pub fn new(n_sub: usize) -> Result<Self> {
        if n_sub == 0 || !n_sub.is_power_of_two() {
            return Err(Error::param("n_sub", format!("{n_sub} is not a power of two")));
        }
        let fft = FftPlanner::new().plan_fft_forward(n_sub);
        Ok(Self { fft, n_sub })
    }

    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    pub fn transform(&self, taps: &[Complex64]) -> Result<Vec<Complex64>> {
        if taps.len() > self.n_sub {
            return Err(Error::param(
                "n_sub",
                format!("{} subcarriers cannot hold {} taps", self.n_sub, taps.len()),
            ));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_sub];
        buf[..taps.len()].copy_from_slice(taps);
        self.fft.process(&mut buf);
        Ok(buf)
    }
}

pub fn transfer_function(cir: &DiscreteCIR, n_sub: usize) -> Result<TransferFunction> {
    let spectrum = Spectrum::new(n_sub)?;
    let links: [[Vec<Complex64>; 2]; 2] = [
        [spectrum.transform(&cir.link(0, 0))?, spectrum.transform(&cir.link(0, 1))?],
        [spectrum.transform(&cir.link(1, 0))?, spectrum.transform(&cir.link(1, 1))?],
    ];
    Ok(assemble(&links, n_sub))
}

fn assemble(links: &[[Vec<Complex64>; 2]; 2], n_sub: usize) -> TransferFunction {
    let bins = (0..n_sub)
        .map(|k| Mat2(std::array::from_fn(|n| std::array::from_fn(|m| links[n][m][k]))))
        .collect();
    TransferFunction { bins }
}

/// Stage-1 role of an array during a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Initiator sweeps its TX beams; the responder listens quasi-omni.
    Initiator,
    /// The RX array sweeps its beams against a quasi-omni transmitter.
    Responder,
}

/// Received power of the beam-to-omni channel on direct link `paa`:
/// the sweeping side uses codebook beam `beam`, the other side listens with
/// the quasi-omni pattern.
pub fn beam_score(
    ch: &OmniChannel,
    side: Side,
    paa: usize,
    beam: usize,
    cb: &Codebook,
    pat: &GaussianPattern,
    sampling: Sampling,
) -> Result<f64> {
    if paa > 1 {
        return Err(Error::param("paa", format!("PAA {paa} does not exist")));
    }
    let axis = cb.get(beam)?;
    let directive = Beam::Directive { pattern: *pat, axis };
    let (tx, rx) = match side {
        Side::Initiator => (directive, Beam::QuasiOmni),
        Side::Responder => (Beam::QuasiOmni, directive),
    };
    Ok(link_power(ch, paa, &tx, &rx, sampling))
}

/// `Σ_k |h_k|²` of the sampled direct link `paa` under the given beams.
pub fn link_power(ch: &OmniChannel, paa: usize, tx: &Beam, rx: &Beam, sampling: Sampling) -> f64 {
    let rays = beamformed_link(ch, paa, paa, tx, rx);
    discretize_link(&rays, sampling).taps.iter().map(|t| t.norm_sqr()).sum()
}

/// Transfer functions of every (link, TX beam, RX beam) for one channel.
///
/// Entry `(n, m, i, j)` is link (RX PAA `n`, TX PAA `m`) with TX beam `i` on
/// PAA `m` and RX beam `j` on PAA `n`; a full beam selection reads four of
/// them. Built once per realization and read-only afterwards.
pub struct TransferCache {
    n_beams: usize,
    n_sub: usize,
    /// `[n][m]` → flattened `(i, j)` → spectrum of length `n_sub`.
    spectra: [[Vec<Complex64>; 2]; 2],
    dropped_energy: f64,
}

impl TransferCache {
    pub fn build(
        ch: &OmniChannel,
        cb: &Codebook,
        pat: &GaussianPattern,
        sampling: Sampling,
        n_sub: usize,
    ) -> Result<Self> {
        let spectrum = Spectrum::new(n_sub)?;
        let l = cb.len();
        let beams: Vec<Beam> = cb
            .entries()
            .iter()
            .map(|&axis| Beam::Directive { pattern: *pat, axis })
            .collect();
        let mut spectra: [[Vec<Complex64>; 2]; 2] = Default::default();
        let mut dropped_energy = 0.0;
        for (n, row) in spectra.iter_mut().enumerate() {
            for (m, slot) in row.iter_mut().enumerate() {
                slot.reserve_exact(l * l * n_sub);
                for tx in &beams {
                    for rx in &beams {
                        let rays = beamformed_link(ch, n, m, tx, rx);
                        let taps = discretize_link(&rays, sampling);
                        dropped_energy += taps.dropped_energy;
                        slot.extend(spectrum.transform(&taps.taps)?);
                    }
                }
            }
        }
        Ok(Self { n_beams: l, n_sub, spectra, dropped_energy })
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn n_sub(&self) -> usize {
        self.n_sub
    }

    /// Number of cached link spectra (`4 · ℓ²`).
    pub fn len(&self) -> usize {
        4 * self.n_beams * self.n_beams
    }

    pub fn is_empty(&self) -> bool {
        self.n_beams == 0
    }

    /// Dropped energy summed over every cached (link, beam pair).
    pub fn dropped_energy(&self) -> f64 {
        self.dropped_energy
    }

    fn link(&self, n: usize, m: usize, tx: usize, rx: usize) -> &[Complex64] {
        let start = (tx * self.n_beams + rx) * self.n_sub;
        &self.spectra[n][m][start..start + self.n_sub]
    }

    pub fn transfer_function(&self, sel: &BeamSelection) -> TransferFunction {
        let links = self.links(sel);
        let bins = (0..self.n_sub)
            .map(|k| Mat2([[links[0][k], links[1][k]], [links[2][k], links[3][k]]]))
            .collect();
        TransferFunction { bins }
    }

    fn links(&self, sel: &BeamSelection) -> [&[Complex64]; 4] {
        [
            self.link(0, 0, sel.tx[0], sel.rx[0]),
            self.link(0, 1, sel.tx[1], sel.rx[0]),
            self.link(1, 0, sel.tx[0], sel.rx[1]),
            self.link(1, 1, sel.tx[1], sel.rx[1]),
        ]
    }

    /// MIMO rate of a selection without materializing its transfer function.
    /// Bit-identical to `rate::mimo_rate(&self.transfer_function(sel), cfg)`.
    pub fn rate(&self, sel: &BeamSelection, cfg: &RateConfig) -> f64 {
        let [h00, h01, h10, h11] = self.links(sel);
        let h = |k: usize| Mat2([[h00[k], h01[k]], [h10[k], h11[k]]]);
        rate::sum_log_det(self.n_sub, cfg.stream_snr(), h) / self.n_sub as f64
    }
}
