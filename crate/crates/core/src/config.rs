//! Plain-text configuration files: `key = value` lines grouped under
//! `[section]` headers, `#` comments, UTF-8.

use crate::assembly::{AssemblyConfig, SimBox};
use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::modem::Scheme;
use crate::vec3::Vec3;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: HashMap<(String, String), String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| {
                    Error::config(format!("line {}: unterminated section", lineno + 1))
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected key = value", lineno + 1))
            })?;
            values.insert(
                (section.clone(), key.trim().to_string()),
                value.trim().to_string(),
            );
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    fn f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::config(format!("[{section}] {key}: not a number: '{s}'"))),
        }
    }

    fn usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::config(format!("[{section}] {key}: not an integer: '{s}'"))),
        }
    }

    fn u64(&self, section: &str, key: &str, default: u64) -> Result<u64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| Error::config(format!("[{section}] {key}: not an integer: '{s}'"))),
        }
    }

    fn bool(&self, section: &str, key: &str, default: bool) -> Result<bool> {
        match self.get(section, key) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(s) => Err(Error::config(format!(
                "[{section}] {key}: not a bool: '{s}'"
            ))),
        }
    }

    fn vec3(&self, section: &str, key: &str, default: Vec3) -> Result<Vec3> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => {
                let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::config(format!(
                        "[{section}] {key}: expected 'x,y,z', got '{s}'"
                    )));
                }
                let mut c = [0.0; 3];
                for (i, p) in parts.iter().enumerate() {
                    c[i] = p.parse().map_err(|_| {
                        Error::config(format!("[{section}] {key}: not a number: '{p}'"))
                    })?;
                }
                Ok(Vec3::new(c[0], c[1], c[2]))
            }
        }
    }

    fn f64_list(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| {
                        Error::config(format!("[{section}] {key}: not a number: '{p}'"))
                    })
                })
                .collect(),
        }
    }

    fn u32_list(&self, section: &str, key: &str, default: &[u32]) -> Result<Vec<u32>> {
        match self.get(section, key) {
            None => Ok(default.to_vec()),
            Some(s) => s
                .split(',')
                .map(|p| {
                    p.trim().parse().map_err(|_| {
                        Error::config(format!("[{section}] {key}: not an integer: '{p}'"))
                    })
                })
                .collect(),
        }
    }

    /// Experiment configuration with file overrides applied on top of the
    /// defaults.
    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = self.u64("experiment", "seed", cfg.seed)?;
        if let Some(s) = self.get("experiment", "scheme") {
            cfg.scheme = Scheme::parse(s)?;
        }
        cfg.bit_count = self.usize("experiment", "bit_count", cfg.bit_count)?;
        cfg.n_channels_set = self.u32_list("experiment", "n_channels", &cfg.n_channels_set)?;
        cfg.reset_per_symbol = self.bool("experiment", "reset_per_symbol", cfg.reset_per_symbol)?;
        cfg.ber_thresholds = self.f64_list("experiment", "ber_thresholds", &cfg.ber_thresholds)?;

        cfg.symbol.symbol_duration =
            self.f64("modem", "symbol_duration_s", cfg.symbol.symbol_duration)?;
        cfg.symbol.i_on = self.f64("modem", "i_on_a", cfg.symbol.i_on)?;
        cfg.symbol.pulse_fill = self.f64("modem", "pulse_fill", cfg.symbol.pulse_fill)?;
        cfg.symbol.guard_fill = self.f64("modem", "guard_fill", cfg.symbol.guard_fill)?;
        cfg.symbol.dt = self.f64("modem", "dt_s", cfg.symbol.dt)?;
        cfg.symbol.threshold_xi = self.f64("modem", "threshold_xi", cfg.symbol.threshold_xi)?;
        cfg.symbol.thresholds = self.f64_list("modem", "thresholds", &cfg.symbol.thresholds)?;
        cfg.symbol.k_bits = self.usize("modem", "k_bits", cfg.symbol.k_bits)?;

        cfg.geometry.r_ser = self.f64("receiver", "r_ser_m", cfg.geometry.r_ser)?;
        cfg.geometry.length = self.f64("receiver", "length_m", cfg.geometry.length)?;
        cfg.geometry.delta = self.f64("receiver", "delta_m", cfg.geometry.delta)?;
        cfg.geometry.eps_r = self.f64("receiver", "eps_r", cfg.geometry.eps_r)?;

        cfg.gating.i_per_channel =
            self.f64("gating", "i_per_channel_a", cfg.gating.i_per_channel)?;
        cfg.gating.v_threshold = self.f64("gating", "v_threshold_v", cfg.gating.v_threshold)?;
        cfg.gating.n_max = self.u64("gating", "n_max", cfg.gating.n_max as u64)? as u32;

        cfg.dynamics.alpha = self.f64("dynamics", "alpha_um_per_s", cfg.dynamics.alpha)?;
        cfg.dynamics.beta0 = self.f64("dynamics", "beta0_per_s", cfg.dynamics.beta0)?;
        cfg.dynamics.gamma = self.f64("dynamics", "gamma", cfg.dynamics.gamma)?;

        cfg.photon.wavelength = self.f64("photon", "wavelength_m", cfg.photon.wavelength)?;
        cfg.photon.p_em = self.f64("photon", "p_em", cfg.photon.p_em)?;
        cfg.photon.receiver_volume =
            self.f64("photon", "receiver_volume_m3", cfg.photon.receiver_volume)?;
        cfg.photon.bit_duration = cfg.symbol.symbol_duration;

        cfg.noise.sigma = self.f64("noise", "sigma", cfg.noise.sigma)?;

        cfg.velocity.v0 = self.f64("channel", "v0_um_per_s", cfg.velocity.v0)?;
        cfg.velocity.tau = self.f64("channel", "tau_s", cfg.velocity.tau)?;
        cfg.rlc.r_per_um = self.f64("channel", "r_per_um", cfg.rlc.r_per_um)?;
        cfg.rlc.l_per_um = self.f64("channel", "l_per_um", cfg.rlc.l_per_um)?;
        cfg.rlc.c_per_um = self.f64("channel", "c_per_um", cfg.rlc.c_per_um)?;
        cfg.wire_length_um = self.f64("channel", "length_um", cfg.wire_length_um)?;
        cfg.load_ohm = self.f64("channel", "load_ohm", cfg.load_ohm)?;

        cfg.validate()?;
        Ok(cfg)
    }

    /// Assembly configuration with file overrides applied.
    pub fn assembly(&self) -> Result<AssemblyConfig> {
        let mut cfg = AssemblyConfig::default();
        cfg.particle_count = self.usize("assembly", "particle_count", cfg.particle_count)?;
        cfg.particle_radius = self.f64("assembly", "particle_radius_um", cfg.particle_radius)?;
        cfg.speed_scale = self.f64("assembly", "speed_scale_um_per_s", cfg.speed_scale)?;
        cfg.magnetic_field = self.f64("assembly", "magnetic_field", cfg.magnetic_field)?;
        cfg.attach_angle_max =
            self.f64("assembly", "attach_angle_max_deg", cfg.attach_angle_max)?;
        cfg.frame_dt = self.f64("assembly", "frame_dt_s", cfg.frame_dt)?;
        cfg.max_time = self.f64("assembly", "max_time_s", cfg.max_time)?;
        cfg.seed = self.u64("assembly", "seed", cfg.seed)?;
        let min_corner = self.vec3("assembly", "box_min_um", cfg.sim_box.min_corner)?;
        let max_corner = self.vec3("assembly", "box_max_um", cfg.sim_box.max_corner)?;
        cfg.sim_box = SimBox::new(min_corner, max_corner)?;
        cfg.transmitter_pos = self.vec3("assembly", "transmitter_um", cfg.transmitter_pos)?;
        cfg.receiver_pos = self.vec3("assembly", "receiver_um", cfg.receiver_pos)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
