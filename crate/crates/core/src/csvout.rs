//! CSV exports. All files use LF line endings, no BOM, `.` decimal
//! separator, and a fixed 9-significant-digit float format so identical
//! data always serializes to identical bytes.

use crate::assembly::GrowthTrace;
use crate::channel::{max_throughput, ChannelResponse, ChargeCapacity, VelocityModel};
use crate::error::{Error, Result};
use crate::experiment::{BerCurve, ChannelCaseSummary, TrialResult};
use std::fmt::Write as _;
use std::path::Path;

/// 9 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.8e}", x)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn growth_trace_csv(trace: &GrowthTrace) -> String {
    let mut s = String::from("t_s,tip_x_um,tip_y_um,tip_z_um,chain_len\n");
    for sample in &trace.samples {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_f64(sample.time),
            fmt_f64(sample.tip_position.x),
            fmt_f64(sample.tip_position.y),
            fmt_f64(sample.tip_position.z),
            sample.chain_length
        );
    }
    s
}

pub fn export_growth_trace(trace: &GrowthTrace, path: &Path) -> Result<()> {
    write_file(path, &growth_trace_csv(trace))
}

pub fn channel_response_csv(resp: &ChannelResponse) -> String {
    let mut s = String::from("f_hz,atten_db,phase_rad,delay_s\n");
    for i in 0..resp.freqs_hz.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(resp.freqs_hz[i]),
            fmt_f64(resp.attenuation_db[i]),
            fmt_f64(resp.phase_rad[i]),
            fmt_f64(resp.delay_s[i])
        );
    }
    s
}

pub fn export_channel_response(resp: &ChannelResponse, path: &Path) -> Result<()> {
    write_file(path, &channel_response_csv(resp))
}

pub fn throughput_csv(model: &VelocityModel, cap: &ChargeCapacity, times_s: &[f64]) -> String {
    let mut s = String::from("t_s,throughput_bps\n");
    for &t in times_s {
        let _ = writeln!(
            s,
            "{},{}",
            fmt_f64(t),
            fmt_f64(max_throughput(model, cap, t))
        );
    }
    s
}

pub fn export_throughput(
    model: &VelocityModel,
    cap: &ChargeCapacity,
    times_s: &[f64],
    path: &Path,
) -> Result<()> {
    write_file(path, &throughput_csv(model, cap, times_s))
}

pub fn ca_trace_csv(result: &TrialResult) -> String {
    let mut s = String::from("t_s,ca_uM,v_mV,n_open\n");
    let dt = result.ca_trace.dt;
    for i in 0..result.ca_trace.samples.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(i as f64 * dt),
            fmt_f64(result.ca_trace.samples[i]),
            fmt_f64(result.v_trace[i] * 1e3),
            result.n_open_trace[i]
        );
    }
    s
}

pub fn export_ca_trace(result: &TrialResult, path: &Path) -> Result<()> {
    write_file(path, &ca_trace_csv(result))
}

pub fn e2e_csv(result: &TrialResult, bits_per_symbol: usize) -> String {
    let mut s = String::from("symbol,bit_sent,peak_ca_uM,photons,statistic,bit_decoded\n");
    for (i, stat) in result.stats.symbols.iter().enumerate() {
        let sent: String = result.bits[i * bits_per_symbol..(i + 1) * bits_per_symbol]
            .iter()
            .map(|b| char::from(b'0' + b))
            .collect();
        let decoded: String = result.decoded[i * bits_per_symbol..(i + 1) * bits_per_symbol]
            .iter()
            .map(|b| char::from(b'0' + b))
            .collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            i,
            sent,
            fmt_f64(result.peak_ca[i]),
            result.photons[i],
            fmt_f64(stat.total),
            decoded
        );
    }
    s
}

pub fn export_e2e(result: &TrialResult, bits_per_symbol: usize, path: &Path) -> Result<()> {
    write_file(path, &e2e_csv(result, bits_per_symbol))
}

pub fn ber_csv(curves: &[BerCurve]) -> String {
    let mut s = String::from("n_channels,threshold,ber,bits\n");
    for curve in curves {
        for (i, &xi) in curve.thresholds.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                curve.n_channels,
                fmt_f64(xi),
                fmt_f64(curve.ber[i]),
                curve.bits_simulated
            );
        }
    }
    s
}

pub fn export_ber(curves: &[BerCurve], path: &Path) -> Result<()> {
    write_file(path, &ber_csv(curves))
}

pub fn channel_sweep_csv(rows: &[ChannelCaseSummary]) -> String {
    let mut s = String::from("n_channels,i_stim_a,peak_ca_uM,half_decay_s,radiant_energy_j\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.n_channels,
            fmt_f64(r.i_stim),
            fmt_f64(r.peak_ca_um),
            fmt_f64(r.half_decay_s),
            fmt_f64(r.radiant_energy_j)
        );
    }
    s
}

pub fn export_channel_sweep(rows: &[ChannelCaseSummary], path: &Path) -> Result<()> {
    write_file(path, &channel_sweep_csv(rows))
}
