//! Closed-form efficiency model of the divide-and-conquer tree protocol.
//!
//! Notation used throughout: `eta_s` is the pair-source efficiency, `eta_d`
//! the per-photon detector efficiency, and a target of `n = 2^m` qubits is
//! reached after `m - 1` rounds of connections starting from pairs whose
//! outer photon has been detected.
//!
//! - `a_m` is the fraction of accepted level-`m` segments whose connection
//!   qubit really holds a photon: `a_0 = 1`, `a_m = 2a/(4 - eta_d a)`, which
//!   solves to `1 / (2^m (1 - eta_d/2) + eta_d/2)`.
//! - The level-`m` connection is accepted with probability
//!   `eta_d [a²/2 + a²(2 - eta_d)/4 + a(1 - a)]`, `a = a_{m-1}`, and the
//!   base level with `eta_s eta_d`.
//! - The expected preparation time is
//!   `t0 / (eta_d a_{m-1}) * Π_{i<m} 1/p_i`; its large-`n` approximation is
//!   `t0 / (eta_s eta_d) * n^((log2 n - 1)/2 + log2(1/eta_d - 1/2))`.
//!
//! The approximation is meant for `2^m (1 - eta_d/2) ≫ eta_d/2`, where the
//! additive constant in the closed form for `a_m` can be dropped.
//!
//! Times are carried as `log10` values since the naive, non-repeater
//! strategy easily reaches `10^167`.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("value 10^{log10:.3} is not representable as f64")]
    Overflow { log10: f64 },
}

fn check_eta(name: &str, eta: f64) -> Result<(), AnalyticsError> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(AnalyticsError::InvalidArgument(format!(
            "{name} must lie in (0, 1], got {eta}"
        )))
    }
}

fn check_fraction(a: f64) -> Result<(), AnalyticsError> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(AnalyticsError::InvalidArgument(format!(
            "good fraction must lie in (0, 1], got {a}"
        )))
    }
}

/// Hardware and target-size parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProtocolParams {
    pub eta_s: f64,
    pub eta_d: f64,
    /// Target size is `2^m` qubits.
    pub m: u32,
    pub t0_seconds: f64,
}

impl ProtocolParams {
    pub fn new(eta_s: f64, eta_d: f64, m: u32, t0_seconds: f64) -> Result<Self, AnalyticsError> {
        let p = Self {
            eta_s,
            eta_d,
            m,
            t0_seconds,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        check_eta("eta_s", self.eta_s)?;
        check_eta("eta_d", self.eta_d)?;
        if self.m < 1 {
            return Err(AnalyticsError::InvalidArgument(
                "m must be at least 1".into(),
            ));
        }
        if !(self.t0_seconds > 0.0 && self.t0_seconds.is_finite()) {
            return Err(AnalyticsError::InvalidArgument(format!(
                "t0 must be positive, got {}",
                self.t0_seconds
            )));
        }
        Ok(())
    }

    pub fn qubits(&self) -> f64 {
        2f64.powi(self.m as i32)
    }
}

/// One step of the good-fraction recursion.
pub fn a_recursion_step(a: f64, eta_d: f64) -> Result<f64, AnalyticsError> {
    check_fraction(a)?;
    check_eta("eta_d", eta_d)?;
    Ok(2.0 * a / (4.0 - eta_d * a))
}

/// `a_m` in closed form.
pub fn a_closed_form(m: u32, eta_d: f64) -> Result<f64, AnalyticsError> {
    check_eta("eta_d", eta_d)?;
    Ok(1.0 / (2f64.powi(m as i32) * (1.0 - eta_d / 2.0) + eta_d / 2.0))
}

/// The three event classes of a connection attempt, as probabilities:
/// `[accepted good, accepted with both photons at the detector,
///   accepted with exactly one photon present]`.
pub fn connection_event_terms(a_prev: f64, eta_d: f64) -> Result<[f64; 3], AnalyticsError> {
    check_fraction(a_prev)?;
    check_eta("eta_d", eta_d)?;
    let a = a_prev;
    Ok([
        eta_d * a * a / 2.0,
        eta_d * (2.0 - eta_d) * a * a / 4.0,
        eta_d * a * (1.0 - a),
    ])
}

/// Acceptance probability of a connection between segments whose good
/// fraction is `a_prev`.
pub fn connection_success_prob(a_prev: f64, eta_d: f64) -> Result<f64, AnalyticsError> {
    let a = a_prev;
    check_fraction(a)?;
    check_eta("eta_d", eta_d)?;
    Ok(eta_d * (a * a / 2.0 + a * a * (2.0 - eta_d) / 4.0 + a * (1.0 - a)))
}

/// Success probability of a base pair: emitted and its outer photon detected.
pub fn base_success_prob(params: &ProtocolParams) -> f64 {
    params.eta_s * params.eta_d
}

/// Success probability `p_i` of level `i` (`p_0` is the base level).
pub fn level_success_prob(params: &ProtocolParams, level: u32) -> Result<f64, AnalyticsError> {
    if level == 0 {
        Ok(base_success_prob(params))
    } else {
        connection_success_prob(a_closed_form(level - 1, params.eta_d)?, params.eta_d)
    }
}

/// A positive quantity stored as its base-10 logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEstimate {
    log10: f64,
}

impl TimeEstimate {
    pub fn from_log10(log10: f64) -> Self {
        Self { log10 }
    }

    pub fn log10(&self) -> f64 {
        self.log10
    }

    /// Linear value, or an error once it leaves the `f64` range.
    pub fn value(&self) -> Result<f64, AnalyticsError> {
        let v = 10f64.powf(self.log10);
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(AnalyticsError::Overflow { log10: self.log10 })
        }
    }

    pub fn is_representable(&self) -> bool {
        self.value().is_ok()
    }
}

/// `T/t0` from the product over levels, including the final detection of
/// the last connection qubit.
pub fn total_time_exact(params: &ProtocolParams) -> Result<TimeEstimate, AnalyticsError> {
    params.validate()?;
    let a_last = a_closed_form(params.m - 1, params.eta_d)?;
    let mut log10 = -(params.eta_d * a_last).log10();
    for i in 0..params.m {
        log10 -= level_success_prob(params, i)?.log10();
    }
    Ok(TimeEstimate::from_log10(log10))
}

/// `T/t0` from the large-`n` approximation.
pub fn total_time_approx(params: &ProtocolParams) -> Result<TimeEstimate, AnalyticsError> {
    params.validate()?;
    let log2n = params.m as f64;
    let exponent = (log2n - 1.0) / 2.0 + (1.0 / params.eta_d - 0.5).log2();
    let log10 = -(params.eta_s * params.eta_d).log10() + exponent * log2n * 2f64.log10();
    Ok(TimeEstimate::from_log10(log10))
}

/// `log10(T/t0)` without the repeater trick: every one of the `n/2` pairs
/// and `n` detections must succeed at once, and each of the `n/2 - 1` gates
/// succeeds with probability 1/2.
pub fn naive_time_log10(n: u64, eta_s: f64, eta_d: f64) -> Result<f64, AnalyticsError> {
    if n < 2 || n % 2 == 1 {
        return Err(AnalyticsError::InvalidArgument(format!(
            "n must be an even number >= 2, got {n}"
        )));
    }
    check_eta("eta_s", eta_s)?;
    check_eta("eta_d", eta_d)?;
    let n = n as f64;
    Ok(
        n / 2.0 * (1.0 / eta_s).log10()
            + n * (1.0 / eta_d).log10()
            + (n / 2.0 - 1.0) * 2f64.log10(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRow {
    pub m: u32,
    pub n: f64,
    pub a_m: f64,
    pub p_m: f64,
    pub t_exact_over_t0: TimeEstimate,
    pub t_approx_over_t0: TimeEstimate,
    pub naive_log10_t_over_t0: f64,
}

/// One row per level `m = 1..=m_max`; `params.m` is ignored.
pub fn scaling_table(
    params: &ProtocolParams,
    m_max: u32,
) -> Result<Vec<AnalyticRow>, AnalyticsError> {
    if m_max < 1 {
        return Err(AnalyticsError::InvalidArgument(
            "m_max must be at least 1".into(),
        ));
    }
    (1..=m_max)
        .map(|m| {
            let p = ProtocolParams { m, ..*params };
            p.validate()?;
            Ok(AnalyticRow {
                m,
                n: p.qubits(),
                a_m: a_closed_form(m, p.eta_d)?,
                p_m: level_success_prob(&p, m)?,
                t_exact_over_t0: total_time_exact(&p)?,
                t_approx_over_t0: total_time_approx(&p)?,
                naive_log10_t_over_t0: if m < 64 {
                    naive_time_log10(1u64 << m, p.eta_s, p.eta_d)?
                } else {
                    f64::NAN
                },
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "m,n,a_m,p_m,T_exact_over_t0,T_approx_over_t0,naive_log10_T_over_t0";

/// Formats like C's `%.{sig}g`: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `%.{sig}g` rendering of `10^log10`, valid beyond the `f64` range.
pub fn format_sig_log10(log10: f64, sig: usize) -> String {
    let v = 10f64.powf(log10);
    if v.is_finite() && v > 0.0 && v.is_normal() {
        return format_sig(v, sig);
    }
    let mut exp = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exp);
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exp += 1.0;
    }
    let m = trim_zeros(&format!("{:.*}", sig - 1, mantissa)).to_string();
    let sign = if exp < 0.0 { '-' } else { '+' };
    format!("{m}e{sign}{:02}", exp.abs() as i64)
}

/// CSV with a fixed header and 15 significant digits per value.
pub fn to_csv(rows: &[AnalyticRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.m,
            format_sig(r.n, 15),
            format_sig(r.a_m, 15),
            format_sig(r.p_m, 15),
            format_sig_log10(r.t_exact_over_t0.log10(), 15),
            format_sig_log10(r.t_approx_over_t0.log10(), 15),
            format_sig(r.naive_log10_t_over_t0, 15),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(eta_s: f64, eta_d: f64, m: u32) -> ProtocolParams {
        ProtocolParams::new(eta_s, eta_d, m, 1.0).unwrap()
    }

    #[test]
    fn recursion_step_values() {
        assert!((a_recursion_step(1.0, 0.7).unwrap() - 20.0 / 33.0).abs() < 1e-15);
        assert_eq!(a_recursion_step(1.0, 1.0).unwrap(), 2.0 / 3.0);
        let tiny = 1e-9;
        assert!((a_recursion_step(tiny, 0.7).unwrap() / (tiny / 2.0) - 1.0).abs() < 1e-8);
        assert!(a_recursion_step(0.0, 0.7).is_err());
        assert!(a_recursion_step(1.0, 1.5).is_err());
    }

    #[test]
    fn closed_form_values() {
        for eta in [0.1, 0.5, 1.0] {
            assert_eq!(a_closed_form(0, eta).unwrap(), 1.0);
        }
        assert!((a_closed_form(2, 0.7).unwrap() - 1.0 / 2.95).abs() < 1e-15);
        let two_steps = a_recursion_step(a_recursion_step(1.0, 0.7).unwrap(), 0.7).unwrap();
        assert!((a_closed_form(2, 0.7).unwrap() - two_steps).abs() < 1e-15);
        assert!((a_closed_form(1, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(a_closed_form(1, 0.0).is_err());
    }

    #[test]
    fn connection_probability_values() {
        assert!((connection_success_prob(1.0, 0.7).unwrap() - 0.5775).abs() < 1e-15);
        assert_eq!(connection_success_prob(1.0, 1.0).unwrap(), 0.75);
        let a = 1e-8;
        assert!((connection_success_prob(a, 0.7).unwrap() / (0.7 * a) - 1.0).abs() < 1e-6);
        let terms = connection_event_terms(0.4, 0.7).unwrap();
        assert!(
            (terms.iter().sum::<f64>() - connection_success_prob(0.4, 0.7).unwrap()).abs() < 1e-16
        );
    }

    #[test]
    fn base_probability_values() {
        assert!((base_success_prob(&params(0.01, 0.7, 1)) - 0.007).abs() < 1e-18);
        assert_eq!(base_success_prob(&params(1.0, 1.0, 1)), 1.0);
        assert_eq!(base_success_prob(&params(0.5, 0.5, 1)), 0.25);
    }

    #[test]
    fn exact_time_perfect_hardware() {
        assert_eq!(
            total_time_exact(&params(1.0, 1.0, 1))
                .unwrap()
                .value()
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn exact_time_monotone_in_detector_efficiency() {
        for m in 1..=8 {
            let mut last = f64::INFINITY;
            for k in 1..=20 {
                let t = total_time_exact(&params(0.05, k as f64 / 20.0, m))
                    .unwrap()
                    .log10();
                assert!(t < last, "m={m} k={k}");
                last = t;
            }
        }
    }

    #[test]
    fn approx_time_small_case() {
        assert!(
            (total_time_approx(&params(1.0, 1.0, 1))
                .unwrap()
                .value()
                .unwrap()
                - 0.5)
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn headline_values() {
        let p = ProtocolParams::new(0.01, 0.7, 7, 1.0 / 80e6).unwrap();
        let approx = total_time_approx(&p).unwrap().value().unwrap();
        assert!((approx / 1.78e8 - 1.0).abs() < 0.01, "{approx}");
        let seconds = approx * p.t0_seconds;
        assert!((seconds - 2.2).abs() < 0.1, "{seconds}");
        let exact = total_time_exact(&p).unwrap().value().unwrap();
        assert!(exact > approx && exact < 10.0 * approx, "{exact}");
    }

    #[test]
    fn naive_values() {
        let v = naive_time_log10(128, 0.01, 0.7).unwrap();
        assert!((v - 166.8).abs() < 0.05, "{v}");
        assert_eq!(naive_time_log10(2, 1.0, 1.0).unwrap(), 0.0);
        assert!((naive_time_log10(4, 0.1, 1.0).unwrap() - (2.0 + 2f64.log10())).abs() < 1e-12);
        assert!(naive_time_log10(3, 0.1, 1.0).is_err());
        assert!(naive_time_log10(0, 0.1, 1.0).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let t = TimeEstimate::from_log10(400.0);
        assert!(matches!(t.value(), Err(AnalyticsError::Overflow { .. })));
        assert_eq!(format_sig_log10(400.0, 15), "1e+400");
        assert_eq!(format_sig_log10(400.5, 4), "3.162e+400");
    }

    #[test]
    fn table_is_consistent() {
        let rows = scaling_table(&params(0.01, 0.7, 1), 10).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            assert_eq!(r.a_m, a_closed_form(r.m, 0.7).unwrap());
            let a_prev = a_closed_form(r.m - 1, 0.7).unwrap();
            assert_eq!(r.p_m, connection_success_prob(a_prev, 0.7).unwrap());
            assert_eq!(r.n, 2f64.powi(r.m as i32));
        }
        for w in rows.windows(2) {
            assert!(w[1].a_m < w[0].a_m);
        }
        let row7 = rows[6].t_approx_over_t0.value().unwrap();
        assert!((row7 / 1.78e8 - 1.0).abs() < 0.01);
        assert!(scaling_table(&params(0.01, 0.7, 1), 0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ProtocolParams::new(0.0, 0.7, 3, 1.0).is_err());
        assert!(ProtocolParams::new(0.1, 1.1, 3, 1.0).is_err());
        assert!(ProtocolParams::new(0.1, 0.7, 0, 1.0).is_err());
        assert!(ProtocolParams::new(0.1, 0.7, 3, 0.0).is_err());
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(0.5775, 15), "0.5775");
        assert_eq!(format_sig(128.0, 15), "128");
        assert_eq!(format_sig(1.0 / 3.0, 15), "0.333333333333333");
        assert_eq!(format_sig(178_000_000.0, 15), "178000000");
        assert_eq!(format_sig(1e20, 15), "1e+20");
        assert_eq!(format_sig(1.5e-7, 15), "1.5e-07");
        assert_eq!(format_sig(-2.25, 3), "-2.25");
    }

    #[test]
    fn csv_layout() {
        let rows = scaling_table(&params(1.0, 1.0, 1), 1).unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "1,2,0.666666666666667,0.75,1,0.5,0");
    }
}
