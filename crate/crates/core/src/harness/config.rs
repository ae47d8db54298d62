//! Experiment configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! n_realizations = 50
//! rho_db = 20
//! codebook.ring_sizes = 1, 6, 12
//! channel_params.xpd_db = 15
//! ```
//!
//! Keys are the field names below; nested structures use a dotted prefix.
//! Angles are in degrees, SNR in dB, rates in Hz, delays in seconds. Keys
//! not present keep their default value.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::antenna::{Codebook, GaussianPattern};
use crate::channel::ChannelGenParams;
use crate::effective::Sampling;
use crate::error::{Error, Result};
use crate::rate::{RateConfig, SnrScaling};
use crate::training::{Method, N_PAA};

#[derive(Debug, Clone, PartialEq)]
pub struct CodebookConfig {
    pub sector_width_deg: f64,
    pub ring_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_realizations: usize,
    pub seed: u64,
    pub rho_db: f64,
    pub n_rf: usize,
    pub codebook: CodebookConfig,
    pub hpbw_deg: f64,
    pub n_sub: usize,
    pub f_s: f64,
    pub n_taps: usize,
    pub nlos: bool,
    pub k_values: Vec<usize>,
    pub channel_params: ChannelGenParams,
    pub methods: Vec<Method>,
    pub snr_scaling: SnrScaling,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_realizations: 50,
            seed: 42,
            rho_db: 20.0,
            n_rf: 2,
            codebook: CodebookConfig { sector_width_deg: 90.0, ring_sizes: vec![1, 6, 12] },
            hpbw_deg: 60.0,
            n_sub: 512,
            f_s: 2.56e9,
            n_taps: 128,
            nlos: true,
            k_values: vec![1, 2, 5, 10, 15, 20, 50, 100],
            channel_params: ChannelGenParams::default(),
            methods: vec![Method::Es, Method::Sls, Method::Kbest],
            snr_scaling: SnrScaling::Divide,
        }
    }
}

impl ExperimentConfig {
    /// Reduced profile for quick runs: 7-beam codebook, 64 subcarriers,
    /// 10 realizations.
    pub fn fast() -> Self {
        Self {
            n_realizations: 10,
            codebook: CodebookConfig { sector_width_deg: 90.0, ring_sizes: vec![1, 6] },
            n_sub: 64,
            n_taps: 64,
            ..Self::default()
        }
    }

    /// Resolves `default`, `fast`, or a path to a config file.
    pub fn resolve(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "fast" => Ok(Self::fast()),
            path => Self::load(path),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config { line: line_no, message: format!("duplicate key `{key}`") });
            }
            cfg.set(key, value).map_err(|message| Error::Config {
                line: line_no,
                message: format!("`{key}`: {message}"),
            })?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let p = &mut self.channel_params;
        match key {
            "n_realizations" => self.n_realizations = num(value)?,
            "seed" => self.seed = num(value)?,
            "rho_db" => self.rho_db = num(value)?,
            "n_rf" => self.n_rf = num(value)?,
            "codebook.sector_width_deg" => self.codebook.sector_width_deg = num(value)?,
            "codebook.ring_sizes" => self.codebook.ring_sizes = list(value)?,
            "hpbw_deg" => self.hpbw_deg = num(value)?,
            "n_sub" => self.n_sub = num(value)?,
            "f_s" => self.f_s = num(value)?,
            "n_taps" => self.n_taps = num(value)?,
            "nlos" => self.nlos = flag(value)?,
            "k_values" => self.k_values = list(value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|m| m.parse::<Method>().map_err(|e| e.to_string()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "snr_scaling" => {
                self.snr_scaling = match value {
                    "divide" => SnrScaling::Divide,
                    "multiply" => SnrScaling::Multiply,
                    other => return Err(format!("expected `divide` or `multiply`, got `{other}`")),
                }
            }
            "channel_params.mean_clusters" => p.mean_clusters = num(value)?,
            "channel_params.mean_cluster_interarrival_s" => p.mean_cluster_interarrival_s = num(value)?,
            "channel_params.cluster_decay_s" => p.cluster_decay_s = num(value)?,
            "channel_params.rays_per_cluster" => p.rays_per_cluster = num(value)?,
            "channel_params.mean_ray_interarrival_s" => p.mean_ray_interarrival_s = num(value)?,
            "channel_params.ray_decay_s" => p.ray_decay_s = num(value)?,
            "channel_params.angular_spread_deg" => p.angular_spread_deg = num(value)?,
            "channel_params.sector_polar_deg" => p.sector_polar_deg = num(value)?,
            "channel_params.xpd_db" => p.xpd_db = num(value)?,
            "channel_params.los" => p.los = flag(value)?,
            "channel_params.los_excess_db" => p.los_excess_db = num(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Serializes back to the text format; `parse(to_text())` is the identity.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
        let p = &self.channel_params;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to String");
        kv("n_realizations", self.n_realizations.to_string());
        kv("seed", self.seed.to_string());
        kv("rho_db", self.rho_db.to_string());
        kv("n_rf", self.n_rf.to_string());
        kv("codebook.sector_width_deg", self.codebook.sector_width_deg.to_string());
        kv("codebook.ring_sizes", join(&self.codebook.ring_sizes));
        kv("hpbw_deg", self.hpbw_deg.to_string());
        kv("n_sub", self.n_sub.to_string());
        kv("f_s", format!("{:e}", self.f_s));
        kv("n_taps", self.n_taps.to_string());
        kv("nlos", self.nlos.to_string());
        kv("k_values", join(&self.k_values));
        kv(
            "methods",
            self.methods.iter().map(Method::as_str).collect::<Vec<_>>().join(", "),
        );
        kv(
            "snr_scaling",
            match self.snr_scaling {
                SnrScaling::Divide => "divide",
                SnrScaling::Multiply => "multiply",
            }
            .into(),
        );
        kv("channel_params.mean_clusters", p.mean_clusters.to_string());
        kv("channel_params.mean_cluster_interarrival_s", format!("{:e}", p.mean_cluster_interarrival_s));
        kv("channel_params.cluster_decay_s", format!("{:e}", p.cluster_decay_s));
        kv("channel_params.rays_per_cluster", p.rays_per_cluster.to_string());
        kv("channel_params.mean_ray_interarrival_s", format!("{:e}", p.mean_ray_interarrival_s));
        kv("channel_params.ray_decay_s", format!("{:e}", p.ray_decay_s));
        kv("channel_params.angular_spread_deg", p.angular_spread_deg.to_string());
        kv("channel_params.sector_polar_deg", p.sector_polar_deg.to_string());
        kv("channel_params.xpd_db", p.xpd_db.to_string());
        kv("channel_params.los", p.los.to_string());
        kv("channel_params.los_excess_db", p.los_excess_db.to_string());
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::param("n_realizations", "must be at least 1"));
        }
        if self.n_rf != N_PAA {
            return Err(Error::param("n_rf", format!("only {N_PAA} RF chains are supported")));
        }
        if self.methods.is_empty() {
            return Err(Error::param("methods", "select at least one of es, sls, kbest"));
        }
        if self.methods.contains(&Method::Kbest) {
            if self.k_values.is_empty() {
                return Err(Error::param("k_values", "kbest needs at least one K"));
            }
            if self.k_values.contains(&0) {
                return Err(Error::param("k_values", "K must be at least 1"));
            }
        }
        if !self.rho_db.is_finite() {
            return Err(Error::param("rho_db", "must be finite"));
        }
        if !(self.hpbw_deg > 0.0 && self.hpbw_deg < 180.0) {
            return Err(Error::param("hpbw_deg", format!("{} is outside (0, 180)", self.hpbw_deg)));
        }
        if !self.n_sub.is_power_of_two() {
            return Err(Error::param("n_sub", format!("{} is not a power of two", self.n_sub)));
        }
        if self.n_taps == 0 || self.n_taps > self.n_sub {
            return Err(Error::param("n_taps", format!("{} must lie in [1, n_sub = {}]", self.n_taps, self.n_sub)));
        }
        if !(self.f_s > 0.0 && self.f_s.is_finite()) {
            return Err(Error::param("f_s", "must be positive"));
        }
        self.channel_params.validate()?;
        self.build_codebook()?;
        Ok(())
    }

    pub fn build_codebook(&self) -> Result<Codebook> {
        Codebook::build(self.codebook.sector_width_deg.to_radians(), &self.codebook.ring_sizes)
    }

    pub fn pattern(&self) -> Result<GaussianPattern> {
        GaussianPattern::calibrated(self.hpbw_deg.to_radians())
    }

    pub fn sampling(&self) -> Result<Sampling> {
        Sampling::new(self.f_s, self.n_taps)
    }

    pub fn rate_config(&self) -> Result<RateConfig> {
        Ok(RateConfig::from_db(self.rho_db, self.n_rf, self.n_sub)?.with_scaling(self.snr_scaling))
    }

    /// K values in ascending order without duplicates.
    pub fn sorted_k_values(&self) -> Vec<usize> {
        let mut ks = self.k_values.clone();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    pub fn runs(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| format!("cannot parse `{v}`: {e}"))
}

fn list(v: &str) -> std::result::Result<Vec<usize>, String> {
    v.split(',').map(|x| num(x.trim())).collect()
}

fn flag(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true/false, got `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_match_profiles() {
        let default = ExperimentConfig::parse(include_str!("../../configs/default.conf")).unwrap();
        assert_eq!(default, ExperimentConfig::default());
        let fast = ExperimentConfig::parse(include_str!("../../configs/fast.conf")).unwrap();
        assert_eq!(fast, ExperimentConfig::fast());
    }

    #[test]
    fn defaults_match_reference_setup() {
        let c = ExperimentConfig::default();
        assert_eq!(c.n_realizations, 50);
        assert_eq!(c.rho_db, 20.0);
        assert_eq!(c.build_codebook().unwrap().len(), 19);
        assert_eq!(c.n_rf, 2);
        assert!(c.nlos);
        assert_eq!(*c.k_values.last().unwrap(), 100);
        c.validate().unwrap();
        ExperimentConfig::fast().validate().unwrap();
        assert_eq!(ExperimentConfig::fast().build_codebook().unwrap().len(), 7);
    }

    #[test]
    fn text_round_trip() {
        for c in [ExperimentConfig::default(), ExperimentConfig::fast()] {
            assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
        }
    }

    #[test]
    fn parse_overrides_and_comments() {
        let c = ExperimentConfig::parse("# test\nseed = 7  # inline\n\nk_values = 3, 1\nmethods = kbest\nchannel_params.xpd_db = 20\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.k_values, vec![3, 1]);
        assert_eq!(c.sorted_k_values(), vec![1, 3]);
        assert_eq!(c.methods, vec![Method::Kbest]);
        assert_eq!(c.channel_params.xpd_db, 20.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match ExperimentConfig::parse("seed = 1\nbogus = 2\n") {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("bogus"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(ExperimentConfig::parse("seed = x"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("seed 1"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(ExperimentConfig::parse("seed=1\nseed=2"), Err(Error::Config { line: 2, .. })));
    }

    #[test]
    fn validation_names_fields() {
        let check = |c: ExperimentConfig, field: &str| match c.validate() {
            Err(Error::InvalidParam { field: f, .. }) => assert_eq!(f, field),
            other => panic!("expected {field} error, got {other:?}"),
        };
        check(ExperimentConfig { n_realizations: 0, ..Default::default() }, "n_realizations");
        check(ExperimentConfig { k_values: vec![0], ..Default::default() }, "k_values");
        check(ExperimentConfig { k_values: vec![], ..Default::default() }, "k_values");
        check(ExperimentConfig { n_sub: 500, ..Default::default() }, "n_sub");
        check(ExperimentConfig { n_taps: 1024, ..Default::default() }, "n_taps");
        check(ExperimentConfig { n_rf: 3, ..Default::default() }, "n_rf");
        check(ExperimentConfig { hpbw_deg: 0.0, ..Default::default() }, "hpbw_deg");
        check(ExperimentConfig { methods: vec![], ..Default::default() }, "methods");
    }
}
