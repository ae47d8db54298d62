//! Per-subcarrier MIMO rate, `(1/N_sub) Σ_n log₂ det(I + c · H_n H_nᴴ)`.

use serde::{Deserialize, Serialize};

use crate::effective::TransferFunction;
use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// How the per-PAA SNR is shared among the RF chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrScaling {
    /// `c = ρ / N_RF`: total power split equally over the streams.
    #[default]
    Divide,
    /// `c = ρ · N_RF`.
    Multiply,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    pub rho: f64,
    pub n_rf: usize,
    pub n_sub: usize,
    pub scaling: SnrScaling,
}

impl RateConfig {
    pub fn new(rho: f64, n_rf: usize, n_sub: usize) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::param("rho", format!("{rho} must be positive")));
        }
        if n_rf == 0 {
            return Err(Error::param("n_rf", "need at least one RF chain"));
        }
        if n_sub == 0 {
            return Err(Error::param("n_sub", "need at least one subcarrier"));
        }
        Ok(Self { rho, n_rf, n_sub, scaling: SnrScaling::Divide })
    }

    pub fn from_db(rho_db: f64, n_rf: usize, n_sub: usize) -> Result<Self> {
        Self::new(10f64.powf(rho_db / 10.0), n_rf, n_sub)
    }

    pub fn with_scaling(mut self, scaling: SnrScaling) -> Self {
        self.scaling = scaling;
        self
    }

    /// Factor multiplying `H Hᴴ` inside the determinant.
    pub fn stream_snr(&self) -> f64 {
        match self.scaling {
            SnrScaling::Divide => self.rho / self.n_rf as f64,
            SnrScaling::Multiply => self.rho * self.n_rf as f64,
        }
    }
}

/// `log₂ det(I + c · H Hᴴ)` for a 2×2 `H`, using
/// `det(I + c·HHᴴ) = 1 + c·‖H‖²_F + c²·|det H|²`.
#[inline]
pub fn subcarrier_log_det(h: &Mat2, c: f64) -> f64 {
    (1.0 + c * h.norm_sqr() + c * c * h.det().norm_sqr()).log2()
}

/// Terms multiplied before each `log₂`.
const LOG_BATCH: usize = 4;

/// `Σ_k log₂ det(I + c·H_k H_kᴴ)` over `n` subcarriers. Shared by every
/// rate evaluation so all paths produce bit-identical sums.
#[inline]
pub(crate) fn sum_log_det(n: usize, c: f64, h: impl Fn(usize) -> Mat2) -> f64 {
    let term = |k: usize| {
        let m = h(k);
        1.0 + c * m.norm_sqr() + c * c * m.det().norm_sqr()
    };
    let mut acc = 0.0;
    let mut k = 0;
    while k + LOG_BATCH <= n {
        let t = [term(k), term(k + 1), term(k + 2), term(k + 3)];
        let p = t[0] * t[1] * t[2] * t[3];
        // every term is >= 1, so only overflow can break the product
        acc += if p.is_finite() { p.log2() } else { t.iter().map(|x| x.log2()).sum() };
        k += LOG_BATCH;
    }
    while k < n {
        acc += term(k).log2();
        k += 1;
    }
    acc
}

pub fn mimo_rate(tf: &TransferFunction, cfg: &RateConfig) -> Result<f64> {
    if tf.len() != cfg.n_sub {
        return Err(Error::param(
            "n_sub",
            format!("transfer function has {} subcarriers, config expects {}", tf.len(), cfg.n_sub),
        ));
    }
    if let Some(k) = tf.bins().iter().position(|h| !h.is_finite()) {
        return Err(Error::NonFinite { subcarrier: k });
    }
    let bins = tf.bins();
    Ok(sum_log_det(bins.len(), cfg.stream_snr(), |k| bins[k]) / cfg.n_sub as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn flat(h: Mat2, n: usize) -> TransferFunction {
        TransferFunction::from_bins(vec![h; n])
    }

    #[test]
    fn zero_channel_has_zero_rate() {
        let cfg = RateConfig::new(100.0, 2, 8).unwrap();
        assert_eq!(mimo_rate(&flat(Mat2::ZERO, 8), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_cases() {
        let cfg = RateConfig::new(100.0, 2, 16).unwrap();
        let r = mimo_rate(&flat(Mat2::IDENTITY, 16), &cfg).unwrap();
        assert!((r - 2.0 * 51f64.log2()).abs() < 1e-9);
        assert!((r - 11.344_85).abs() < 1e-4);
        let ones = Mat2::from_real([[1.0, 1.0], [1.0, 1.0]]);
        let r = mimo_rate(&flat(ones, 16), &cfg).unwrap();
        assert!((r - 201f64.log2()).abs() < 1e-9);
        assert!((r - 7.6511).abs() < 1e-4);
    }

    #[test]
    fn multiply_scaling() {
        let cfg = RateConfig::new(100.0, 2, 4).unwrap().with_scaling(SnrScaling::Multiply);
        let r = mimo_rate(&flat(Mat2::IDENTITY, 4), &cfg).unwrap();
        assert!((r - 2.0 * 201f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn huge_gains_do_not_overflow() {
        let cfg = RateConfig::new(100.0, 2, 8).unwrap();
        let big = Mat2::from_real([[1e40, 0.0], [0.0, 1e40]]);
        let r = mimo_rate(&flat(big, 8), &cfg).unwrap();
        assert!((r - 2.0 * (1.0 + 50.0 * 1e80f64).log2()).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let cfg = RateConfig::new(100.0, 2, 4).unwrap();
        assert!(mimo_rate(&flat(Mat2::IDENTITY, 3), &cfg).is_err());
        let mut bad = vec![Mat2::IDENTITY; 4];
        bad[2].set(1, 0, Complex64::new(f64::NAN, 0.0));
        assert!(matches!(
            mimo_rate(&TransferFunction::from_bins(bad), &cfg),
            Err(Error::NonFinite { subcarrier: 2 })
        ));
        assert!(RateConfig::new(0.0, 2, 4).is_err());
        assert!(RateConfig::new(1.0, 0, 4).is_err());
        assert!(RateConfig::new(1.0, 2, 0).is_err());
    }
}
