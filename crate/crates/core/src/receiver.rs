//! SER membrane equivalent circuit built from geometry, and the ODE
//! model of voltage-gated Ca2+ release and reuptake.

use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;

/// SER tubule geometry, SI units.
#[derive(Debug, Clone, Copy)]
pub struct SerGeometry {
    pub r_ser: f64,
    pub length: f64,
    /// Membrane thickness.
    pub delta: f64,
    pub eps_r: f64,
}

impl Default for SerGeometry {
    fn default() -> Self {
        SerGeometry {
            r_ser: 50e-9,
            length: 1e-6,
            delta: 6e-9,
            eps_r: 5.0,
        }
    }
}

impl SerGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.r_ser <= 0.0 || self.length <= 0.0 || self.delta <= 0.0 || self.eps_r <= 0.0 {
            return Err(Error::invalid("geometry parameters must be > 0"));
        }
        if self.delta >= self.r_ser {
            return Err(Error::invalid("membrane thickness must be < tubule radius"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MembraneCircuit {
    pub c_ca: f64,
    pub r_ca: f64,
    pub n_channels: u32,
    /// Single-channel conductance, S.
    pub sigma_channel: f64,
    /// Ca2+ reversal potential, V.
    pub v_ca: f64,
    /// Resting potential, V.
    pub v0: f64,
}

impl MembraneCircuit {
    /// Builds the circuit from geometry with n channels.
    pub fn from_geometry(
        geom: &SerGeometry,
        sigma_channel: f64,
        n_channels: u32,
        v_ca: f64,
        v0: f64,
    ) -> Result<Self> {
        Ok(MembraneCircuit {
            c_ca: membrane_capacitance(geom)?,
            r_ca: channel_resistance(geom, sigma_channel, n_channels)?,
            n_channels,
            sigma_channel,
            v_ca,
            v0,
        })
    }
}

impl Default for MembraneCircuit {
    fn default() -> Self {
        let geom = SerGeometry::default();
        // reversal from a 9:1 outside/inside occupancy at body temperature
        let v_ca = nernst_potential(0.9, 0.1, 310.0, 2).unwrap();
        MembraneCircuit::from_geometry(&geom, 0.5e-12, 4, v_ca, -75e-3).unwrap()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GatingModel {
    /// Stimulus current that opens one more channel, A.
    pub i_per_channel: f64,
    /// Membrane voltage above which channels can conduct, V.
    pub v_threshold: f64,
    pub n_max: u32,
}

impl Default for GatingModel {
    fn default() -> Self {
        GatingModel {
            i_per_channel: 1e-12,
            // resting -75 mV depolarized by 35 mV
            v_threshold: -40e-3,
            n_max: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StimulusWaveform {
    pub dt: f64,
    /// Current samples, A.
    pub samples: Vec<f64>,
}

impl StimulusWaveform {
    /// Rectangular pulse of `amplitude` for `on_s`, then zero until `total_s`.
    pub fn rectangular(amplitude: f64, on_s: f64, total_s: f64, dt: f64) -> Self {
        let n = (total_s / dt).round() as usize;
        let n_on = (on_s / dt).round() as usize;
        let samples = (0..n)
            .map(|i| if i < n_on { amplitude } else { 0.0 })
            .collect();
        StimulusWaveform { dt, samples }
    }
}

#[derive(Debug, Clone)]
pub struct CaTrace {
    pub dt: f64,
    /// Released Ca2+ concentration, µM.
    pub samples: Vec<f64>,
}

/// Release gain and reuptake kinetics for the Ca2+ concentration ODE.
#[derive(Debug, Clone, Copy)]
pub struct ReleaseDynamics {
    /// µM/s released per open channel.
    pub alpha: f64,
    /// Base reuptake rate, 1/s; effective rate is beta0 * n_sym^gamma.
    pub beta0: f64,
    pub gamma: f64,
}

impl Default for ReleaseDynamics {
    fn default() -> Self {
        // Calibrated so a saturating 4-channel burst peaks near 26 µM and
        // the post-stimulus half-lives are 3 µs (n=1) / 1.5 µs (n=4).
        ReleaseDynamics {
            alpha: 3.0e6,
            beta0: std::f64::consts::LN_2 / 3e-6,
            gamma: 0.5,
        }
    }
}

/// Nernst reversal potential V = (kT / ze) ln(p_out / p_in).
pub fn nernst_potential(p_out: f64, p_in: f64, temp_k: f64, valence: i32) -> Result<f64> {
    if p_out <= 0.0 || p_in <= 0.0 {
        return Err(Error::invalid("ion occupancies must be > 0"));
    }
    if temp_k <= 0.0 {
        return Err(Error::invalid("temperature must be > 0"));
    }
    if valence == 0 {
        return Err(Error::invalid("valence must be nonzero"));
    }
    Ok(BOLTZMANN * temp_k / (valence as f64 * ELEMENTARY_CHARGE) * (p_out / p_in).ln())
}

/// Conductance-weighted resting potential V0 = sum(g V) / sum(g).
pub fn resting_potential(conductances: &[f64], reversal_potentials: &[f64]) -> Result<f64> {
    if conductances.is_empty() || conductances.len() != reversal_potentials.len() {
        return Err(Error::invalid(
            "conductances and reversal potentials must be non-empty and equal length",
        ));
    }
    if conductances.iter().any(|g| *g <= 0.0) {
        return Err(Error::invalid("conductances must be > 0"));
    }
    let num: f64 = conductances
        .iter()
        .zip(reversal_potentials)
        .map(|(g, v)| g * v)
        .sum();
    let den: f64 = conductances.iter().sum();
    Ok(num / den)
}

/// Cylindrical membrane capacitance C = 2 pi eps0 eps_r l / ln(1 + delta/r).
pub fn membrane_capacitance(geom: &SerGeometry) -> Result<f64> {
    geom.validate()?;
    let eps = VACUUM_PERMITTIVITY * geom.eps_r;
    Ok(2.0 * std::f64::consts::PI * eps * geom.length / (1.0 + geom.delta / geom.r_ser).ln())
}

/// Parallel-channel resistance R = ln(1 + delta/r) / (2 pi n sigma l~),
/// with l~ the tubule length expressed in µm.
pub fn channel_resistance(geom: &SerGeometry, sigma_channel: f64, n: u32) -> Result<f64> {
    geom.validate()?;
    if n == 0 {
        return Err(Error::invalid("channel count must be >= 1"));
    }
    if sigma_channel <= 0.0 {
        return Err(Error::invalid("channel conductance must be > 0"));
    }
    let length_um = geom.length * 1e6;
    Ok((1.0 + geom.delta / geom.r_ser).ln()
        / (2.0 * std::f64::consts::PI * n as f64 * sigma_channel * length_um))
}

/// Open-channel count from the stimulus current.
pub fn gate_open_channels(i_stim: f64, gating: &GatingModel) -> u32 {
    debug_assert!(i_stim >= 0.0);
    if i_stim <= 0.0 {
        return 0;
    }
    // epsilon guards float quotients that should be exact integers
    let n = ((i_stim / gating.i_per_channel) + 1e-9).floor() as u32;
    n.min(gating.n_max)
}

/// Streaming fixed-step RK4 integrator for (V, c). Owned by one caller.
#[derive(Debug, Clone)]
pub struct ReleaseIntegrator {
    pub circuit: MembraneCircuit,
    pub gating: GatingModel,
    pub dynamics: ReleaseDynamics,
    /// Membrane voltage, V.
    pub v: f64,
    /// Released Ca2+ concentration, µM.
    pub c: f64,
    /// Max open-channel count of the current stimulus burst.
    n_sym: u32,
    reuptake_rate: f64,
    prev_stim: f64,
}

impl ReleaseIntegrator {
    pub fn new(circuit: MembraneCircuit, gating: GatingModel, dynamics: ReleaseDynamics) -> Self {
        ReleaseIntegrator {
            v: circuit.v0,
            circuit,
            gating,
            dynamics,
            c: 0.0,
            n_sym: 0,
            reuptake_rate: 0.0,
            prev_stim: 0.0,
        }
    }

    pub fn open_channels(&self, i_stim: f64, v: f64) -> u32 {
        if v >= self.gating.v_threshold {
            gate_open_channels(i_stim, &self.gating)
        } else {
            0
        }
    }

    fn derivatives(&self, i_stim: f64, v: f64, c: f64) -> (f64, f64) {
        let n_open = self.open_channels(i_stim, v);
        let leak = n_open as f64 * self.circuit.sigma_channel * (v - self.circuit.v_ca);
        let dv = (i_stim - leak) / self.circuit.c_ca;
        let dc = self.dynamics.alpha * n_open as f64 - self.reuptake_rate * c;
        (dv, dc)
    }

    /// One RK4 step with a piecewise-constant stimulus sample.
    pub fn step(&mut self, i_stim: f64, dt: f64) {
        // a rising edge out of silence starts a new burst
        if self.prev_stim <= 0.0 && i_stim > 0.0 {
            self.n_sym = 0;
        }
        self.prev_stim = i_stim;
        let n_now = self.open_channels(i_stim, self.v);
        if n_now > self.n_sym {
            self.n_sym = n_now;
            self.reuptake_rate =
                self.dynamics.beta0 * (self.n_sym as f64).powf(self.dynamics.gamma);
        }

        let (k1v, k1c) = self.derivatives(i_stim, self.v, self.c);
        let (k2v, k2c) = self.derivatives(i_stim, self.v + 0.5 * dt * k1v, self.c + 0.5 * dt * k1c);
        let (k3v, k3c) = self.derivatives(i_stim, self.v + 0.5 * dt * k2v, self.c + 0.5 * dt * k2c);
        let (k4v, k4c) = self.derivatives(i_stim, self.v + dt * k3v, self.c + dt * k3c);
        self.v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        self.c += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        if self.c < 0.0 {
            self.c = 0.0;
        }
    }

    /// Exact advance over a zero-stimulus interval: V holds, c decays
    /// exponentially at the current reuptake rate.
    pub fn advance_quiet(&mut self, duration: f64) {
        self.prev_stim = 0.0;
        self.c *= (-self.reuptake_rate * duration).exp();
    }
}

/// Integrates the circuit response to a stimulus waveform. Returns the
/// Ca2+ concentration trace (µM) and the membrane voltage trace (V),
/// sampled at the stimulus dt, including the initial state.
pub fn simulate_release(
    circuit: &MembraneCircuit,
    gating: &GatingModel,
    dynamics: &ReleaseDynamics,
    stim: &StimulusWaveform,
) -> Result<(CaTrace, Vec<f64>)> {
    if stim.dt <= 0.0 {
        return Err(Error::invalid("stimulus dt must be > 0"));
    }
    if stim.samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("stimulus samples must be finite"));
    }
    let mut integ = ReleaseIntegrator::new(*circuit, *gating, *dynamics);
    let mut ca = Vec::with_capacity(stim.samples.len() + 1);
    let mut v = Vec::with_capacity(stim.samples.len() + 1);
    ca.push(integ.c);
    v.push(integ.v);
    for &i_stim in &stim.samples {
        integ.step(i_stim, stim.dt);
        ca.push(integ.c);
        v.push(integ.v);
    }
    Ok((
        CaTrace {
            dt: stim.dt,
            samples: ca,
        },
        v,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nernst_zero_for_equal_occupancy() {
        assert_eq!(nernst_potential(0.3, 0.3, 310.0, 2).unwrap(), 0.0);
    }

    #[test]
    fn nernst_matches_kt_over_ze() {
        // T=310 K, z=2, ratio 10 -> (26.73 mV / 2) ln 10 ~ 30.8 mV
        let v = nernst_potential(10.0, 1.0, 310.0, 2).unwrap();
        let kt_e = BOLTZMANN * 310.0 / ELEMENTARY_CHARGE;
        assert!((kt_e - 26.73e-3).abs() < 0.02e-3);
        assert!((v - kt_e / 2.0 * 10f64.ln()).abs() < 1e-15);
        assert!((v - 30.8e-3).abs() < 0.1e-3);
    }

    #[test]
    fn nernst_antisymmetric_and_rejects_nonpositive() {
        let a = nernst_potential(5.0, 2.0, 300.0, 2).unwrap();
        let b = nernst_potential(2.0, 5.0, 300.0, 2).unwrap();
        assert!((a + b).abs() < 1e-12 * a.abs());
        assert!(nernst_potential(0.0, 1.0, 300.0, 2).is_err());
        assert!(nernst_potential(1.0, 1.0, 300.0, 0).is_err());
    }

    #[test]
    fn resting_potential_basics() {
        assert_eq!(resting_potential(&[2.0], &[-0.05]).unwrap(), -0.05);
        let v = resting_potential(&[1.0, 1.0], &[-80e-3, -70e-3]).unwrap();
        assert!((v + 75e-3).abs() < 1e-15);
        let scaled = resting_potential(&[3.0, 3.0], &[-80e-3, -70e-3]).unwrap();
        assert!((v - scaled).abs() < 1e-15);
        assert!(resting_potential(&[], &[]).is_err());
    }

    #[test]
    fn capacitance_anchor_and_scaling() {
        let geom = SerGeometry::default();
        let c = membrane_capacitance(&geom).unwrap();
        assert!((c - 2.45e-15).abs() < 0.01e-15, "C = {c}");
        let double = SerGeometry {
            length: 2e-6,
            ..geom
        };
        let c2 = membrane_capacitance(&double).unwrap();
        assert!((c2 - 2.0 * c).abs() < 1e-12 * c);
        // monotone decreasing in delta
        let thin = SerGeometry {
            delta: 3e-9,
            ..geom
        };
        assert!(membrane_capacitance(&thin).unwrap() > c);
    }

    #[test]
    fn resistance_anchor_and_parallel_scaling() {
        let geom = SerGeometry::default();
        let r1 = channel_resistance(&geom, 0.5e-12, 1).unwrap();
        assert!((r1 - 3.61e10).abs() < 0.01e10, "R(1) = {r1}");
        let r2 = channel_resistance(&geom, 0.5e-12, 2).unwrap();
        assert_eq!(r2, r1 / 2.0);
        for n in 1..=4u32 {
            let rn = channel_resistance(&geom, 0.5e-12, n).unwrap();
            assert!((rn * n as f64 - r1).abs() < 1e-12 * r1);
        }
        let thick = SerGeometry {
            delta: 12e-9,
            ..geom
        };
        assert!(channel_resistance(&thick, 0.5e-12, 1).unwrap() > r1);
        assert!(channel_resistance(&geom, 0.5e-12, 0).is_err());
    }

    #[test]
    fn gating_counts_channels() {
        let g = GatingModel::default();
        assert_eq!(gate_open_channels(4e-12, &g), 4);
        assert_eq!(gate_open_channels(0.0, &g), 0);
        assert_eq!(gate_open_channels(2.5e-12, &g), 2);
        assert_eq!(gate_open_channels(9e-12, &g), 4); // clamped at n_max
    }

    #[test]
    fn zero_stimulus_stays_at_equilibrium() {
        let circuit = MembraneCircuit::default();
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let stim = StimulusWaveform::rectangular(0.0, 0.0, 10e-6, 10e-9);
        let (ca, v) = simulate_release(&circuit, &gating, &dyn_, &stim).unwrap();
        assert!(ca.samples.iter().all(|&c| c == 0.0));
        assert!(v.iter().all(|&x| x == circuit.v0));
    }

    #[test]
    fn four_pa_pulse_releases_over_20_um() {
        let circuit = MembraneCircuit::default();
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let stim = StimulusWaveform::rectangular(4e-12, 120e-6, 160e-6, 2e-9);
        let (ca, v) = simulate_release(&circuit, &gating, &dyn_, &stim).unwrap();
        let peak = ca.samples.iter().cloned().fold(0.0, f64::max);
        assert!(peak > 20.0, "peak = {peak} µM");
        assert!(v.iter().any(|&x| x >= gating.v_threshold));
        assert!(ca.samples.iter().all(|&c| c >= 0.0));
        // trace returns to under 1% of peak by the end of the window
        assert!(*ca.samples.last().unwrap() < 0.01 * peak);
    }

    #[test]
    fn decay_half_time_halves_from_one_to_four_channels() {
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let half_time = |n_pa: f64| {
            let circuit = MembraneCircuit::default();
            let on = 140e-6;
            let stim = StimulusWaveform::rectangular(n_pa * 1e-12, on, on + 20e-6, 4e-9);
            let (ca, _) = simulate_release(&circuit, &gating, &dyn_, &stim).unwrap();
            let i_end = (on / stim.dt).round() as usize;
            let c_end = ca.samples[i_end];
            let i_half = (i_end..ca.samples.len())
                .find(|&i| ca.samples[i] <= c_end / 2.0)
                .unwrap();
            (i_half - i_end) as f64 * stim.dt
        };
        let t1 = half_time(1.0);
        let t4 = half_time(4.0);
        assert!((t1 - 3e-6).abs() < 0.3e-6, "t1 = {t1}");
        assert!((t4 - 1.5e-6).abs() < 0.15e-6, "t4 = {t4}");
        let ratio = t1 / t4;
        assert!(ratio > 1.5 && ratio < 2.5, "ratio = {ratio}");
    }

    #[test]
    fn peak_monotone_in_stimulus_amplitude() {
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let peak = |n_pa: f64| {
            let circuit = MembraneCircuit::default();
            let stim = StimulusWaveform::rectangular(n_pa * 1e-12, 140e-6, 160e-6, 4e-9);
            let (ca, _) = simulate_release(&circuit, &gating, &dyn_, &stim).unwrap();
            ca.samples.iter().cloned().fold(0.0, f64::max)
        };
        let peaks: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&n| peak(n)).collect();
        for w in peaks.windows(2) {
            assert!(w[1] > w[0], "peaks {peaks:?}");
        }
    }

    #[test]
    fn rk4_dt_halving_changes_peak_under_0p1_percent() {
        let circuit = MembraneCircuit::default();
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let peak_at = |dt: f64| {
            let stim = StimulusWaveform::rectangular(4e-12, 120e-6, 160e-6, dt);
            let (ca, _) = simulate_release(&circuit, &gating, &dyn_, &stim).unwrap();
            ca.samples.iter().cloned().fold(0.0, f64::max)
        };
        let p1 = peak_at(2e-9);
        let p2 = peak_at(1e-9);
        assert!((p1 - p2).abs() / p2 < 1e-3, "p1={p1} p2={p2}");
    }

    #[test]
    fn rejects_bad_stimulus() {
        let circuit = MembraneCircuit::default();
        let gating = GatingModel::default();
        let dyn_ = ReleaseDynamics::default();
        let bad_dt = StimulusWaveform {
            dt: 0.0,
            samples: vec![0.0],
        };
        assert!(simulate_release(&circuit, &gating, &dyn_, &bad_dt).is_err());
        let bad_sample = StimulusWaveform {
            dt: 1e-9,
            samples: vec![f64::NAN],
        };
        assert!(simulate_release(&circuit, &gating, &dyn_, &bad_sample).is_err());
    }
}
