//! Frequency-domain RLC characterization of the nanowire, the throughput
//! law, and the skewed error-probability model.

use crate::error::{Error, Result};
use libm::erfc;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Per-µm lumped constants of the actin filament.
#[derive(Debug, Clone, Copy)]
pub struct RLCSegment {
    pub r_per_um: f64,
    pub l_per_um: f64,
    pub c_per_um: f64,
}

impl Default for RLCSegment {
    fn default() -> Self {
        RLCSegment {
            r_per_um: 1.2e9,
            l_per_um: 340e-12,
            c_per_um: 0.02e-12,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ChannelResponse {
    pub freqs_hz: Vec<f64>,
    pub attenuation_db: Vec<f64>,
    pub phase_rad: Vec<f64>,
    pub delay_s: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct VelocityModel {
    /// Initial charge velocity, µm/s.
    pub v0: f64,
    /// Exponential decay constant, s.
    pub tau: f64,
}

impl Default for VelocityModel {
    fn default() -> Self {
        VelocityModel {
            v0: 30_000.0,
            tau: 20e-6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChargeCapacity {
    pub e_per_monomer: u64,
    pub monomers_per_um: u64,
}

impl Default for ChargeCapacity {
    fn default() -> Self {
        ChargeCapacity {
            e_per_monomer: 4,
            monomers_per_um: 370,
        }
    }
}

impl ChargeCapacity {
    /// Total charge capacity per µm of filament, in electrons.
    pub fn psi_tot_per_um(&self) -> u64 {
        self.e_per_monomer * self.monomers_per_um
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SkewErrorParams {
    /// Skewness coefficient, A <= 0.
    pub a_skew: f64,
    pub p0: f64,
    pub p1: f64,
}

impl Default for SkewErrorParams {
    fn default() -> Self {
        SkewErrorParams {
            a_skew: 0.0,
            p0: 0.5,
            p1: 0.5,
        }
    }
}

/// 2x2 complex chain (ABCD) matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Abcd {
    pub fn identity() -> Self {
        Abcd {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    pub fn det(self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }
}

impl std::ops::Mul for Abcd {
    type Output = Abcd;

    fn mul(self, rhs: Abcd) -> Abcd {
        Abcd {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// One 1 µm cell: series R + jwL followed by shunt jwC.
pub fn cell_matrix(seg: &RLCSegment, f_hz: f64) -> Abcd {
    let w = 2.0 * PI * f_hz;
    let z = Complex64::new(seg.r_per_um, w * seg.l_per_um);
    let y = Complex64::new(0.0, w * seg.c_per_um);
    Abcd {
        a: Complex64::new(1.0, 0.0) + z * y,
        b: z,
        c: y,
        d: Complex64::new(1.0, 0.0),
    }
}

/// Cascade of per-µm cells over the given length. Lengths below 1 µm are
/// rejected; fractional lengths round up to whole cells.
pub fn abcd_cascade(seg: &RLCSegment, length_um: f64, f_hz: f64) -> Result<Abcd> {
    if length_um < 1.0 {
        return Err(Error::invalid("cascade length must be >= 1 µm"));
    }
    if f_hz < 0.0 {
        return Err(Error::invalid("frequency must be >= 0"));
    }
    let cells = length_um.ceil() as usize;
    let cell = cell_matrix(seg, f_hz);
    let mut m = Abcd::identity();
    for _ in 0..cells {
        m = m * cell;
    }
    Ok(m)
}

/// Loaded transfer function H(f) = Z_L / (A Z_L + B), reported as
/// attenuation, unwrapped phase and group delay.
pub fn channel_response(
    seg: &RLCSegment,
    length_um: f64,
    freqs_hz: &[f64],
    load_ohm: f64,
) -> Result<ChannelResponse> {
    if load_ohm <= 0.0 {
        return Err(Error::invalid("load impedance must be > 0"));
    }
    if freqs_hz.iter().any(|f| *f < 0.0) {
        return Err(Error::invalid("negative frequencies rejected"));
    }
    if freqs_hz.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("frequencies must be strictly ascending"));
    }
    let zl = Complex64::new(load_ohm, 0.0);
    let mut attenuation_db = Vec::with_capacity(freqs_hz.len());
    let mut phase_rad = Vec::with_capacity(freqs_hz.len());
    for &f in freqs_hz {
        let m = abcd_cascade(seg, length_um, f)?;
        let h = zl / (m.a * zl + m.b);
        attenuation_db.push(-20.0 * h.norm().log10());
        phase_rad.push(h.arg());
    }
    unwrap_phase(&mut phase_rad);
    let delay_s = group_delay(freqs_hz, &phase_rad);
    Ok(ChannelResponse {
        freqs_hz: freqs_hz.to_vec(),
        attenuation_db,
        phase_rad,
        delay_s,
    })
}

fn unwrap_phase(phase: &mut [f64]) {
    for i in 1..phase.len() {
        let mut d = phase[i] - phase[i - 1];
        while d > PI {
            phase[i] -= 2.0 * PI;
            d = phase[i] - phase[i - 1];
        }
        while d < -PI {
            phase[i] += 2.0 * PI;
            d = phase[i] - phase[i - 1];
        }
    }
}

/// delay = -dphi/dw, central differences inside, one-sided at the edges.
fn group_delay(freqs_hz: &[f64], phase: &[f64]) -> Vec<f64> {
    let n = freqs_hz.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0.0];
    }
    let w: Vec<f64> = freqs_hz.iter().map(|f| 2.0 * PI * f).collect();
    let mut delay = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        delay.push(-(phase[hi] - phase[lo]) / (w[hi] - w[lo]));
    }
    delay
}

/// Charge propagation speed v(t) = v0 * exp(-t/tau), µm/s.
pub fn charge_velocity(model: &VelocityModel, t_s: f64) -> f64 {
    debug_assert!(t_s >= 0.0);
    model.v0 * (-t_s / model.tau).exp()
}

/// Achievable throughput T_M(t) = v(t) * psi_tot, bit/s, with 1 e = 1 bit.
pub fn max_throughput(model: &VelocityModel, cap: &ChargeCapacity, t_s: f64) -> f64 {
    charge_velocity(model, t_s) * cap.psi_tot_per_um() as f64
}

/// Pointwise error densities: Gaussian bit-0 term, skewed bit-1 term, and
/// their prior-weighted combination.
pub fn bit_error_density(x: f64, params: &SkewErrorParams) -> (f64, f64, f64) {
    let inv_sqrt_2pi = 1.0 / (2.0 * PI).sqrt();
    let p_e0 = inv_sqrt_2pi * (-x * x / 2.0).exp();
    let xa = x - params.a_skew;
    let p_e1 = inv_sqrt_2pi * (-xa * xa / 2.0).exp() * erfc(xa / 2f64.sqrt());
    let p_e = params.p0 * p_e0 + params.p1 * p_e1;
    (p_e0, p_e1, p_e)
}

/// delta = A / sqrt(1 + A^2) and the unit-scale skew-normal variance
/// 1 - 2 delta^2 / pi.
pub fn skew_moments(a_skew: f64) -> (f64, f64) {
    let delta = a_skew / (1.0 + a_skew * a_skew).sqrt();
    let variance = 1.0 - 2.0 * delta * delta / PI;
    (delta, variance)
}
