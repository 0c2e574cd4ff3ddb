//! Output formats: the per-round CSV trace and the run-summary JSON.

use std::io::Write;

use crate::engine::{RoundMetrics, RunSummary};
use crate::error::Result;

pub const ROUND_CSV_HEADER: &str =
    "round,alive,dead,ch_count,energy_round_j,energy_cum_j,packets_bs_round,packets_bs_cum,packets_ch_round";

/// Formats `v` with 9 significant digits, like C's `%.9g`.
pub fn format_sig9(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn emit_round_csv<W: Write>(trace: &[RoundMetrics], sink: &mut W) -> Result<()> {
    writeln!(sink, "{ROUND_CSV_HEADER}")?;
    for m in trace {
        writeln!(
            sink,
            "{},{},{},{},{},{},{},{},{}",
            m.round,
            m.alive,
            m.dead,
            m.ch_count,
            format_sig9(m.energy_round),
            format_sig9(m.energy_cum),
            m.packets_bs_round,
            m.packets_bs_cum,
            m.packets_ch_round
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn round_csv_string(trace: &[RoundMetrics]) -> String {
    let mut buf = Vec::new();
    emit_round_csv(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Pretty-printed summary JSON, newline-terminated.
pub fn emit_summary_json<W: Write>(summary: &RunSummary, sink: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *sink, summary)?;
    writeln!(sink)?;
    sink.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(0.0425), "0.0425");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(49.99999999999), "50");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567890.0), "1.23456789e+09");
        assert_eq!(format_sig9(2.0e-5), "2e-05");
        assert_eq!(format_sig9(1.23456789123e-7), "1.23456789e-07");
        assert_eq!(format_sig9(0.000123), "0.000123");
    }

    #[test]
    fn empty_trace_is_header_only() {
        assert_eq!(round_csv_string(&[]), format!("{ROUND_CSV_HEADER}\n"));
    }
}
