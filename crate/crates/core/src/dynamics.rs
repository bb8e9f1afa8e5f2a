//! Forward simulation of the ideal delay loop.

use crate::error::{Error, Result};
use crate::signal::{ReservoirConfig, StepTrace, TraceRole};

/// Simulate the delay recurrence and return the state trace co-indexed with
/// the drive:
///
/// ```text
/// a[n] = mu * sin(a[n - N_D] + z[n]),   n in [0, L*N_T),  a[j] = 0 for j < 0
/// ```
///
/// `a[n]` is the loop's response to drive step `z[n]`, so the readout window
/// of sequence index `i` sees the reservoir acting on `s_i` together with the
/// one-delay-old state. The zero history before the window encodes the
/// zero initial condition; no state is carried between sequences.
pub fn simulate_forward(z: &StepTrace, cfg: &ReservoirConfig) -> Result<StepTrace> {
    debug_assert_eq!(z.role(), TraceRole::Drive);
    cfg.validate()?;
    if z.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("drive trace"));
    }
    let n_d = cfg.delay_steps();
    let mu = cfg.feedback_gain;
    let zv = z.values();
    let mut a = vec![0.0; zv.len()];
    for n in 0..zv.len() {
        let prev = if n >= n_d { a[n - n_d] } else { 0.0 };
        a[n] = mu * (prev + zv[n]).sin();
    }
    Ok(StepTrace::new_unchecked(a, TraceRole::State))
}

/// Distance of the feedback gain from the instability threshold of the zero
/// state: `|mu| - 1`. Negative means linearly stable; zero is the edge of
/// stability where the benchmark runs operate.
pub fn spectral_margin(cfg: &ReservoirConfig) -> f64 {
    cfg.feedback_gain.abs() - 1.0
}
