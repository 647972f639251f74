//! Scenario configuration and its flat `key = value` text format.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Unknown keys are rejected. Missing keys keep their defaults, which are the
//! 28 GHz, 256-antenna, 60-RF-chain reference scenario.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reference noise temperature, K.
pub const NOISE_TEMPERATURE_K: f64 = 290.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid configuration: {0} violated")]
    Invariant(String),
    #[error("cannot read config {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Scaling applied to the baseband precoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `||F_RF F_BB||_F^2 = P_T`.
    #[default]
    PowerExact,
    /// `||F_BB||_F = 1`.
    PaperLiteral,
}

/// Which SINR expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinrForm {
    /// Signal and interference powers `|h^H F_RF f_i|^2`.
    #[default]
    Standard,
    /// Every power term squared once more.
    PaperLiteral,
}

/// How path azimuths are shared between users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleModel {
    /// Each user draws its own `L` path angles.
    #[default]
    PerUser,
    /// One set of `L` angles common to all users; `H` has rank at most `L`.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Thermal noise `k_B * 290 K * W` raised by a noise figure in dB.
    Thermal { noise_figure_db: f64 },
    /// Absolute noise power in watts.
    Fixed { watts: f64 },
}

impl NoiseModel {
    pub fn power_w(&self, bandwidth_hz: f64) -> f64 {
        match *self {
            NoiseModel::Thermal { noise_figure_db } => {
                BOLTZMANN * NOISE_TEMPERATURE_K * bandwidth_hz * 10f64.powf(noise_figure_db / 10.0)
            }
            NoiseModel::Fixed { watts } => watts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_tx: usize,
    pub n_rf: usize,
    pub n_users: usize,
    pub n_paths: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Antenna spacing in wavelengths.
    pub spacing_wavelengths: f64,
    pub tx_power_w: f64,
    pub path_loss_exp: f64,
    /// Per-path gain variances; a single entry applies to every path.
    pub path_gain_var: Vec<f64>,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub angle_model: AngleModel,
    pub noise: NoiseModel,
    pub pa_efficiency: f64,
    pub p_ps_w: f64,
    pub p_rf_w: f64,
    /// Baseband computation efficiency, flops per second per watt.
    pub l_bs_flops_per_w: f64,
    pub w_c_hz: f64,
    pub t_c_s: f64,
    /// `None` means four candidate beams per antenna.
    pub codebook_size: Option<usize>,
    pub m_override: Option<usize>,
    pub normalization: Normalization,
    pub sinr_form: SinrForm,
    pub trials: usize,
    pub master_seed: u64,
    /// Evaluate trials on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_tx: 256,
            n_rf: 60,
            n_users: 8,
            n_paths: 20,
            carrier_hz: 28e9,
            bandwidth_hz: 1e9,
            spacing_wavelengths: 0.5,
            tx_power_w: 5.0,
            path_loss_exp: 4.6,
            path_gain_var: vec![1.0],
            d_min_m: 20.0,
            d_max_m: 100.0,
            angle_model: AngleModel::PerUser,
            noise: NoiseModel::Thermal {
                noise_figure_db: 9.0,
            },
            pa_efficiency: 0.38,
            p_ps_w: 12e-3,
            p_rf_w: 57e-3,
            l_bs_flops_per_w: 12.8e9,
            w_c_hz: 100e6,
            t_c_s: 35e-6,
            codebook_size: None,
            m_override: None,
            normalization: Normalization::PowerExact,
            sinr_form: SinrForm::Standard,
            trials: 200,
            master_seed: 1,
            parallel: true,
        }
    }
}

/// Every accepted key, in the order they are written by [`SystemConfig::to_kv_string`].
pub const KEYS: &[&str] = &[
    "n_tx",
    "n_rf",
    "n_users",
    "n_paths",
    "carrier_hz",
    "bandwidth_hz",
    "spacing_wavelengths",
    "tx_power_w",
    "path_loss_exp",
    "path_gain_var",
    "d_min_m",
    "d_max_m",
    "angle_model",
    "noise_figure_db",
    "noise_fixed_w",
    "pa_efficiency",
    "p_ps_w",
    "p_rf_w",
    "l_bs_flops_per_w",
    "w_c_hz",
    "t_c_s",
    "codebook_size",
    "m_override",
    "normalization",
    "sinr_form",
    "trials",
    "master_seed",
    "parallel",
];

impl SystemConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn noise_power_w(&self) -> f64 {
        self.noise.power_w(self.bandwidth_hz)
    }

    pub fn codebook_size(&self) -> usize {
        self.codebook_size.unwrap_or(4 * self.n_tx)
    }

    /// Gain variance of path `l` (0-based).
    pub fn path_variance(&self, l: usize) -> f64 {
        if self.path_gain_var.len() == 1 {
            self.path_gain_var[0]
        } else {
            self.path_gain_var[l]
        }
    }

    /// Checks every range constraint, naming the first violated invariant.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |what: &str| Err(ConfigError::Invariant(what.to_string()));
        if self.n_users < 1 {
            return fail("K ≥ 1");
        }
        if self.n_users > self.n_rf {
            return fail("K ≤ N_RF");
        }
        if self.n_rf > self.n_tx {
            return fail("N_RF ≤ N_T");
        }
        if self.n_paths < 1 {
            return fail("L ≥ 1");
        }
        let positive = [
            ("carrier_hz > 0", self.carrier_hz),
            ("bandwidth_hz > 0", self.bandwidth_hz),
            ("spacing_wavelengths > 0", self.spacing_wavelengths),
            ("tx_power_w > 0", self.tx_power_w),
            ("d_min_m > 0", self.d_min_m),
            ("p_ps_w ≥ 0", self.p_ps_w + f64::MIN_POSITIVE),
            ("p_rf_w ≥ 0", self.p_rf_w + f64::MIN_POSITIVE),
            ("l_bs_flops_per_w > 0", self.l_bs_flops_per_w),
            ("w_c_hz > 0", self.w_c_hz),
            ("t_c_s > 0", self.t_c_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(name);
            }
        }
        if !self.path_loss_exp.is_finite() {
            return fail("path_loss_exp finite");
        }
        if !(self.d_max_m >= self.d_min_m && self.d_max_m.is_finite()) {
            return fail("d_min_m ≤ d_max_m");
        }
        if !(self.pa_efficiency > 0.0 && self.pa_efficiency <= 1.0) {
            return fail("η_PA ∈ (0, 1]");
        }
        if self.path_gain_var.len() != 1 && self.path_gain_var.len() != self.n_paths {
            return fail("path_gain_var has 1 or L entries");
        }
        if !self.path_gain_var.iter().all(|&v| v > 0.0 && v.is_finite()) {
            return fail("path_gain_var > 0");
        }
        match self.noise {
            NoiseModel::Fixed { watts } if !(watts > 0.0 && watts.is_finite()) => {
                return fail("noise power > 0")
            }
            NoiseModel::Thermal { noise_figure_db } if !noise_figure_db.is_finite() => {
                return fail("noise_figure_db finite")
            }
            _ => {}
        }
        if self.n_rf > self.codebook_size() {
            return fail("N_RF ≤ codebook_size");
        }
        if let Some(m) = self.m_override {
            if m < 1 || m > self.n_users {
                return fail("1 ≤ m_override ≤ K");
            }
        }
        if self.trials < 1 {
            return fail("trials ≥ 1");
        }
        Ok(())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key.trim() {
            "n_tx" => self.n_tx = parse(key, v)?,
            "n_rf" => self.n_rf = parse(key, v)?,
            "n_users" => self.n_users = parse(key, v)?,
            "n_paths" => self.n_paths = parse(key, v)?,
            "carrier_hz" => self.carrier_hz = parse(key, v)?,
            "bandwidth_hz" => self.bandwidth_hz = parse(key, v)?,
            "spacing_wavelengths" => self.spacing_wavelengths = parse(key, v)?,
            "tx_power_w" => self.tx_power_w = parse(key, v)?,
            "path_loss_exp" => self.path_loss_exp = parse(key, v)?,
            "path_gain_var" => {
                self.path_gain_var = v
                    .split(',')
                    .map(|x| parse(key, x.trim()))
                    .collect::<Result<_, _>>()?
            }
            "d_min_m" => self.d_min_m = parse(key, v)?,
            "d_max_m" => self.d_max_m = parse(key, v)?,
            "angle_model" => {
                self.angle_model = match v {
                    "per_user" => AngleModel::PerUser,
                    "shared" => AngleModel::Shared,
                    _ => return Err(bad(key, v, "expected per_user or shared")),
                }
            }
            "noise_figure_db" => {
                let nf = parse(key, v)?;
                if let NoiseModel::Thermal { .. } = self.noise {
                    self.noise = NoiseModel::Thermal { noise_figure_db: nf };
                } else {
                    return Err(bad(key, v, "noise_fixed_w is set; clear it with `none` first"));
                }
            }
            "noise_fixed_w" => {
                self.noise = match parse_opt::<f64>(key, v)? {
                    Some(watts) => NoiseModel::Fixed { watts },
                    None => NoiseModel::Thermal {
                        noise_figure_db: 9.0,
                    },
                }
            }
            "pa_efficiency" => self.pa_efficiency = parse(key, v)?,
            "p_ps_w" => self.p_ps_w = parse(key, v)?,
            "p_rf_w" => self.p_rf_w = parse(key, v)?,
            "l_bs_flops_per_w" => self.l_bs_flops_per_w = parse(key, v)?,
            "w_c_hz" => self.w_c_hz = parse(key, v)?,
            "t_c_s" => self.t_c_s = parse(key, v)?,
            "codebook_size" => self.codebook_size = parse_opt(key, v)?,
            "m_override" => self.m_override = parse_opt(key, v)?,
            "normalization" => self.normalization = v.parse().map_err(|e| bad(key, v, e))?,
            "sinr_form" => self.sinr_form = v.parse().map_err(|e| bad(key, v, e))?,
            "trials" => self.trials = parse(key, v)?,
            "master_seed" => self.master_seed = parse(key, v)?,
            "parallel" => self.parallel = parse(key, v)?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses a config document on top of the defaults. Does not validate.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    /// Applies every assignment in a config document, in order.
    pub fn apply_str(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Loads an optional config file, then applies `key=value` overrides, then validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            cfg.apply_str(&text)?;
        }
        for item in overrides {
            let (k, v) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: 0,
                text: item.clone(),
            })?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every key with its resolved value; parsing the result yields `self`.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("n_tx", self.n_tx.to_string());
        put("n_rf", self.n_rf.to_string());
        put("n_users", self.n_users.to_string());
        put("n_paths", self.n_paths.to_string());
        put("carrier_hz", fmt_f64(self.carrier_hz));
        put("bandwidth_hz", fmt_f64(self.bandwidth_hz));
        put("spacing_wavelengths", fmt_f64(self.spacing_wavelengths));
        put("tx_power_w", fmt_f64(self.tx_power_w));
        put("path_loss_exp", fmt_f64(self.path_loss_exp));
        put(
            "path_gain_var",
            self.path_gain_var
                .iter()
                .map(|&v| fmt_f64(v))
                .collect::<Vec<_>>()
                .join(","),
        );
        put("d_min_m", fmt_f64(self.d_min_m));
        put("d_max_m", fmt_f64(self.d_max_m));
        put("angle_model", self.angle_model.to_string());
        match self.noise {
            NoiseModel::Thermal { noise_figure_db } => {
                put("noise_fixed_w", "none".into());
                put("noise_figure_db", fmt_f64(noise_figure_db));
            }
            NoiseModel::Fixed { watts } => put("noise_fixed_w", fmt_f64(watts)),
        }
        put("pa_efficiency", fmt_f64(self.pa_efficiency));
        put("p_ps_w", fmt_f64(self.p_ps_w));
        put("p_rf_w", fmt_f64(self.p_rf_w));
        put("l_bs_flops_per_w", fmt_f64(self.l_bs_flops_per_w));
        put("w_c_hz", fmt_f64(self.w_c_hz));
        put("t_c_s", fmt_f64(self.t_c_s));
        put("codebook_size", fmt_opt(self.codebook_size));
        put("m_override", fmt_opt(self.m_override));
        put("normalization", self.normalization.to_string());
        put("sinr_form", self.sinr_form.to_string());
        put("trials", self.trials.to_string());
        put("master_seed", self.master_seed.to_string());
        put("parallel", self.parallel.to_string());
        out
    }
}

/// Shortest decimal that round-trips exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<usize>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.trim().to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    v.parse().map_err(|e| bad(key, v, e))
}

fn parse_opt<T: FromStr>(key: &str, v: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    match v {
        "none" | "auto" => Ok(None),
        _ => parse(key, v).map(Some),
    }
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($name),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name,)+ })
            }
        }
    };
}

str_enum!(Normalization { PowerExact => "power_exact", PaperLiteral => "paper_literal" });
str_enum!(SinrForm { Standard => "standard", PaperLiteral => "paper_literal" });
str_enum!(AngleModel { PerUser => "per_user", Shared => "shared" });
