//! Experiment orchestration: the end-to-end pipeline, channel-count
//! sweeps and Monte-Carlo BER curves.

use crate::bioluminescence::{
    add_noise, ion_count, radiant_energy, sample_photons, NoiseModel, PhotonModel,
};
use crate::channel::{ChargeCapacity, RLCSegment, VelocityModel};
use crate::error::{Error, Result};
use crate::modem::{
    demodulate_bisk, demodulate_btsk, demodulate_qbask, modulate_bisk, modulate_btsk,
    modulate_qbask, DecisionStats, Scheme, SymbolConfig, SymbolStats,
};
use crate::receiver::{
    CaTrace, GatingModel, MembraneCircuit, ReleaseDynamics, ReleaseIntegrator, SerGeometry,
    StimulusWaveform,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub scheme: Scheme,
    /// Channel-count cases for sweeps, each in 1..=n_max.
    pub n_channels_set: Vec<u32>,
    pub bit_count: usize,
    pub symbol: SymbolConfig,
    pub geometry: SerGeometry,
    pub gating: GatingModel,
    pub dynamics: ReleaseDynamics,
    pub photon: PhotonModel,
    pub noise: NoiseModel,
    /// Reset the receiver state between symbols (unit-test aid); the
    /// default carries residual Ca2+ across symbols.
    pub reset_per_symbol: bool,
    /// Thresholds swept by `sweep_ber`, ascending.
    pub ber_thresholds: Vec<f64>,
    pub velocity: VelocityModel,
    pub capacity: ChargeCapacity,
    pub rlc: RLCSegment,
    pub wire_length_um: f64,
    pub load_ohm: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let symbol = SymbolConfig::default();
        let photon = PhotonModel {
            // Calibrated so a 4-channel bit '1' lands near a detector
            // statistic of 32, putting the best BISK threshold near 16.
            receiver_volume: 7e-21,
            bit_duration: symbol.symbol_duration,
            ..PhotonModel::default()
        };
        ExperimentConfig {
            seed: 1,
            scheme: Scheme::Bisk,
            n_channels_set: vec![1, 2, 3, 4],
            bit_count: 100_000,
            symbol,
            geometry: SerGeometry::default(),
            gating: GatingModel::default(),
            dynamics: ReleaseDynamics::default(),
            photon,
            noise: NoiseModel::default(),
            reset_per_symbol: false,
            ber_thresholds: (-16..=32).map(|i| i as f64 * 2.0).collect(),
            velocity: VelocityModel::default(),
            capacity: ChargeCapacity::default(),
            rlc: RLCSegment::default(),
            wire_length_um: 1.0,
            load_ohm: 1e6,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bit_count < 1 {
            return Err(Error::invalid("bit_count must be >= 1"));
        }
        self.symbol.validate()?;
        self.geometry.validate()?;
        if self
            .n_channels_set
            .iter()
            .any(|&n| n == 0 || n > self.gating.n_max)
        {
            return Err(Error::invalid("n_channels entries must be in 1..=n_max"));
        }
        if self.ber_thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("ber thresholds must be strictly ascending"));
        }
        Ok(())
    }

    pub fn circuit(&self) -> Result<MembraneCircuit> {
        let v_ca = crate::receiver::nernst_potential(0.9, 0.1, 310.0, 2)?;
        MembraneCircuit::from_geometry(&self.geometry, 0.5e-12, self.gating.n_max, v_ca, -75e-3)
    }
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub bits: Vec<u8>,
    pub stimulus: StimulusWaveform,
    pub ca_trace: CaTrace,
    /// Membrane voltage per sample, V.
    pub v_trace: Vec<f64>,
    /// Open channels per sample.
    pub n_open_trace: Vec<u32>,
    /// Whole-symbol peak concentration, µM.
    pub peak_ca: Vec<f64>,
    pub photons: Vec<u64>,
    pub stats: DecisionStats,
    pub decoded: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct BerCurve {
    pub n_channels: u32,
    pub thresholds: Vec<f64>,
    pub ber: Vec<f64>,
    pub bits_simulated: usize,
}

impl BerCurve {
    pub fn min_ber(&self) -> (f64, f64) {
        let (i, b) = self
            .ber
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("non-empty curve");
        (self.thresholds[i], *b)
    }

    pub fn max_ber(&self) -> f64 {
        self.ber.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct ChannelCaseSummary {
    pub n_channels: u32,
    /// Stimulus amplitude used, A.
    pub i_stim: f64,
    pub peak_ca_um: f64,
    /// Post-stimulus time for the concentration to halve, s.
    pub half_decay_s: f64,
    pub radiant_energy_j: f64,
}

pub fn random_bits(count: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..count).map(|_| rng.random_range(0..2u8)).collect()
}

fn modulate(bits: &[u8], scheme: Scheme, cfg: &SymbolConfig) -> Result<StimulusWaveform> {
    match scheme {
        Scheme::Bisk => modulate_bisk(bits, cfg),
        Scheme::Btsk => modulate_btsk(bits, cfg),
        Scheme::Qbask => modulate_qbask(bits, cfg),
    }
}

fn demodulate(stats: &DecisionStats, scheme: Scheme, cfg: &SymbolConfig) -> Vec<u8> {
    match scheme {
        Scheme::Bisk => demodulate_bisk(stats, cfg.threshold_xi),
        Scheme::Btsk => demodulate_btsk(stats),
        Scheme::Qbask => demodulate_qbask(stats, cfg),
    }
}

/// Full pipeline on one random message; stores complete traces, so keep
/// bit counts modest.
pub fn run_end_to_end(config: &ExperimentConfig) -> Result<TrialResult> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let k = config.scheme.bits_per_symbol();
    let bit_count = config.bit_count - config.bit_count % k;
    let bits = random_bits(bit_count.max(k), &mut rng);
    run_trial(config, &bits)
}

/// Pipeline on a caller-supplied message.
pub fn run_trial(config: &ExperimentConfig, bits: &[u8]) -> Result<TrialResult> {
    config.validate()?;
    let circuit = config.circuit()?;
    let stimulus = modulate(bits, config.scheme, &config.symbol)?;
    let n_symbols = bits.len() / config.scheme.bits_per_symbol();
    let per_symbol = config.symbol.samples_per_symbol();
    let half = per_symbol / 2;

    let mut integ = ReleaseIntegrator::new(circuit, config.gating, config.dynamics);
    let mut ca = Vec::with_capacity(stimulus.samples.len() + 1);
    let mut v_trace = Vec::with_capacity(stimulus.samples.len() + 1);
    let mut n_open_trace = Vec::with_capacity(stimulus.samples.len() + 1);
    ca.push(integ.c);
    v_trace.push(integ.v);
    n_open_trace.push(0);

    // rng stream for the photon/noise stage, decoupled from the message
    let mut stage_rng = ChaCha12Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut peak_ca = Vec::with_capacity(n_symbols);
    let mut photons = Vec::with_capacity(n_symbols);
    let mut symbols = Vec::with_capacity(n_symbols);

    for s in 0..n_symbols {
        if config.reset_per_symbol {
            integ = ReleaseIntegrator::new(circuit, config.gating, config.dynamics);
        }
        let guard = config.symbol.guard_samples();
        let (mut p_total, mut p_first, mut p_second) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..per_symbol {
            let i_stim = stimulus.samples[s * per_symbol + i];
            integ.step(i_stim, stimulus.dt);
            ca.push(integ.c);
            v_trace.push(integ.v);
            n_open_trace.push(integ.open_channels(i_stim, integ.v));
            // each window opens with a guard so residual Ca2+ from the
            // previous window decays before the peak detector engages
            if i < guard {
                continue;
            }
            p_total = p_total.max(integ.c);
            if i < half {
                p_first = p_first.max(integ.c);
            } else if i >= half + guard {
                p_second = p_second.max(integ.c);
            }
        }
        let stat_of = |peak: f64, rng: &mut ChaCha12Rng| {
            let ions = ion_count(peak, config.photon.receiver_volume);
            let k = sample_photons(ions, config.photon.p_em, rng);
            (k, add_noise(k, &config.noise, rng))
        };
        let (k_total, stat_total) = stat_of(p_total, &mut stage_rng);
        let (_, stat_first) = stat_of(p_first, &mut stage_rng);
        let (_, stat_second) = stat_of(p_second, &mut stage_rng);
        peak_ca.push(p_total);
        photons.push(k_total);
        symbols.push(SymbolStats {
            total: stat_total,
            first_half: stat_first,
            second_half: stat_second,
        });
    }

    let stats = DecisionStats { symbols };
    let decoded = demodulate(&stats, config.scheme, &config.symbol);
    Ok(TrialResult {
        bits: bits.to_vec(),
        stimulus,
        ca_trace: CaTrace {
            dt: config.symbol.dt,
            samples: ca,
        },
        v_trace,
        n_open_trace,
        peak_ca,
        photons,
        stats,
        decoded,
    })
}

/// Monte-Carlo BISK BER over the configured threshold sweep, one curve
/// per channel-count case. Thresholds reuse the same simulated symbol
/// statistics.
pub fn sweep_ber(config: &ExperimentConfig) -> Result<Vec<BerCurve>> {
    config.validate()?;
    if config.scheme != Scheme::Bisk {
        return Err(Error::invalid("BER sweep supports the BISK scheme"));
    }
    let circuit = config.circuit()?;
    let thresholds = &config.ber_thresholds;
    let chunk_size = 8192usize;

    let mut curves = Vec::new();
    for &n in &config.n_channels_set {
        let i_on = n as f64 * config.gating.i_per_channel;
        let n_chunks = config.bit_count.div_ceil(chunk_size);
        let errors: Vec<u64> = (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let bits_here = chunk_size.min(config.bit_count - chunk * chunk_size);
                let seed = config
                    .seed
                    .wrapping_add((n as u64) << 32)
                    .wrapping_add(chunk as u64)
                    .wrapping_mul(0x9e37_79b9_7f4a_7c15);
                ber_chunk(config, circuit, i_on, bits_here, seed, thresholds)
            })
            .reduce(
                || vec![0u64; thresholds.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let ber = errors
            .iter()
            .map(|&e| e as f64 / config.bit_count as f64)
            .collect();
        curves.push(BerCurve {
            n_channels: n,
            thresholds: thresholds.clone(),
            ber,
            bits_simulated: config.bit_count,
        });
    }
    Ok(curves)
}

/// Simulates one contiguous chunk of symbols with carried receiver state
/// and counts decode errors against every threshold.
fn ber_chunk(
    config: &ExperimentConfig,
    circuit: MembraneCircuit,
    i_on: f64,
    bit_count: usize,
    seed: u64,
    thresholds: &[f64],
) -> Vec<u64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let per_symbol = config.symbol.samples_per_symbol();
    let n_on = ((per_symbol as f64 * config.symbol.pulse_fill).round() as usize).max(1);
    let dt = config.symbol.dt;
    let tail = (per_symbol - n_on) as f64 * dt;
    let mut integ = ReleaseIntegrator::new(circuit, config.gating, config.dynamics);
    let mut errors = vec![0u64; thresholds.len()];

    let guard = config.symbol.guard_samples();
    for _ in 0..bit_count {
        let bit: u8 = rng.random_range(0..2);
        let mut peak = 0.0f64;
        if bit == 1 {
            for i in 0..n_on {
                integ.step(i_on, dt);
                if i >= guard {
                    peak = peak.max(integ.c);
                }
            }
            integ.advance_quiet(tail);
        } else if config.reset_per_symbol {
            integ = ReleaseIntegrator::new(circuit, config.gating, config.dynamics);
        } else {
            integ.advance_quiet(guard as f64 * dt);
            peak = integ.c;
            integ.advance_quiet((per_symbol - guard) as f64 * dt);
        }
        let ions = ion_count(peak, config.photon.receiver_volume);
        let k = sample_photons(ions, config.photon.p_em, &mut rng);
        let stat = add_noise(k, &config.noise, &mut rng);
        for (e, &xi) in errors.iter_mut().zip(thresholds) {
            let decoded = u8::from(stat >= xi);
            if decoded != bit {
                *e += 1;
            }
        }
    }
    errors
}

/// Per-channel-count summary: peak Ca2+, post-stimulus half-decay time
/// and radiant energy, driven by an n pA rectangular pulse.
pub fn run_channel_sweep(config: &ExperimentConfig) -> Result<Vec<ChannelCaseSummary>> {
    config.validate()?;
    if config.n_channels_set.is_empty() {
        return Err(Error::invalid("channel sweep needs a non-empty n set"));
    }
    let circuit = config.circuit()?;
    let dt = 2e-9;
    let on = config.symbol.symbol_duration * config.symbol.pulse_fill;
    let total = config.symbol.symbol_duration;
    let mut out = Vec::new();
    for &n in &config.n_channels_set {
        let i_stim = n as f64 * config.gating.i_per_channel;
        let stim = StimulusWaveform::rectangular(i_stim, on, total, dt);
        let (ca, _v) =
            crate::receiver::simulate_release(&circuit, &config.gating, &config.dynamics, &stim)?;
        let peak = ca.samples.iter().cloned().fold(0.0, f64::max);
        let i_end = (on / dt).round() as usize;
        let c_end = ca.samples[i_end.min(ca.samples.len() - 1)];
        let half_decay = (i_end..ca.samples.len())
            .find(|&i| ca.samples[i] <= c_end / 2.0)
            .map(|i| (i - i_end) as f64 * dt)
            .unwrap_or(f64::INFINITY);
        let q_e = radiant_energy(&ca, &config.photon)?;
        out.push(ChannelCaseSummary {
            n_channels: n,
            i_stim,
            peak_ca_um: peak,
            half_decay_s: half_decay,
            radiant_energy_j: q_e,
        });
    }
    Ok(out)
}
