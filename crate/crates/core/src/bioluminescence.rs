//! Aequorin photon emission: Ca2+ concentration to ion counts, binomial
//! photon statistics, radiant energy, and AWGN at the photo-detector.

use crate::error::{Error, Result};
use crate::receiver::CaTrace;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

pub const AVOGADRO: f64 = 6.02214076e23;
pub const PLANCK: f64 = 6.62607015e-34;
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// Three Ca2+ ions bind one aequorin molecule per emitted photon.
pub const IONS_PER_PHOTON: u64 = 3;

#[derive(Debug, Clone, Copy)]
pub struct PhotonModel {
    /// Emission wavelength, m.
    pub wavelength: f64,
    /// Per-event emission probability.
    pub p_em: f64,
    pub recycled_aequorin: u64,
    /// Symbol duration, s.
    pub bit_duration: f64,
    /// Receiver volume, m^3.
    pub receiver_volume: f64,
}

impl Default for PhotonModel {
    fn default() -> Self {
        PhotonModel {
            wavelength: 470e-9,
            p_em: 0.9,
            recycled_aequorin: 1,
            bit_duration: 200e-6,
            receiver_volume: 1e-18, // 1 µm^3
        }
    }
}

impl PhotonModel {
    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / self.wavelength
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmissionSample {
    pub photon_count: u64,
    /// Photon count plus detector noise; may be negative.
    pub detector_statistic: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NoiseModel {
    /// AWGN standard deviation in photon-count units.
    pub sigma: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { sigma: 4.0 }
    }
}

/// Number of Ca2+ ions at concentration `c_uM` inside `volume_m3`.
pub fn ion_count(c_um: f64, volume_m3: f64) -> u64 {
    debug_assert!(c_um >= 0.0 && volume_m3 > 0.0);
    // µM -> mol/L, m^3 -> L
    (c_um * 1e-6 * AVOGADRO * volume_m3 * 1e3).round() as u64
}

/// Expected radiant energy over a CaTrace: (1/3)(hc/lambda) times the
/// trapezoidal estimate of triplet-binding events, normalized per symbol.
pub fn radiant_energy(trace: &CaTrace, model: &PhotonModel) -> Result<f64> {
    if trace.dt <= 0.0 {
        return Err(Error::invalid("trace dt must be > 0"));
    }
    if trace.samples.is_empty() {
        return Ok(0.0);
    }
    // trapezoidal quadrature of p_em * ion_count(c(t)) over the trace,
    // read as an event rate per symbol duration
    let n = trace.samples.len();
    let mut integral = 0.0;
    for (i, &c) in trace.samples.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        integral += w * model.p_em * ion_count(c, model.receiver_volume) as f64;
    }
    integral *= trace.dt / model.bit_duration;
    Ok(integral / IONS_PER_PHOTON as f64 * model.photon_energy())
}

/// One Binomial(floor(c/3), p_em) draw: trials are ion triplets.
pub fn sample_photons<R: Rng>(c_ions: u64, p_em: f64, rng: &mut R) -> u64 {
    let trials = c_ions / IONS_PER_PHOTON;
    if trials == 0 || p_em <= 0.0 {
        return 0;
    }
    if p_em >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p_em)
        .expect("p_em in (0,1)")
        .sample(rng)
}

/// Gaussian approximation of the photon count, with the CLT validity
/// guard (cp >= 10 and c(1-p) >= 10) reported alongside.
pub fn normal_approx(c_trials: u64, p_em: f64) -> (f64, f64, bool) {
    let c = c_trials as f64;
    let mean = c * p_em;
    let variance = c * p_em * (1.0 - p_em);
    let guard_ok = mean >= 10.0 && c * (1.0 - p_em) >= 10.0;
    (mean, variance, guard_ok)
}

/// Detector statistic = photon count + N(0, sigma^2).
pub fn add_noise<R: Rng>(photon_count: u64, noise: &NoiseModel, rng: &mut R) -> f64 {
    if noise.sigma == 0.0 {
        return photon_count as f64;
    }
    let n = Normal::new(0.0, noise.sigma).expect("sigma >= 0");
    photon_count as f64 + n.sample(rng)
}
