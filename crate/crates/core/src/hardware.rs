//! Cascaded dual-input/dual-output Mach-Zehnder modulator physics and the
//! experimental imperfections: measurement noise on recorded traces, MZM2
//! bias offset with slow drift (plus the two-pass correction that cancels
//! it), residual nonlinearity of the backward pass, error-signal scaling,
//! and an optional first-order high-pass on the drive.
//!
//! Noise is added to *recordings* only; the optical loop itself is clean.
//! The backward pass operates on time-inverted traces (backward time `q`),
//! where the error recurrence becomes an ordinary forward-running delay
//! equation; callers invert the traces going in and the record coming out.

use crate::error::{Error, Result};
use crate::signal::{Fidelity, ReservoirConfig, StepTrace, TraceRole};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Hardware model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareParams {
    /// MZM voltage constant; voltages are expressed in units of it.
    pub v0: f64,
    /// Source intensity entering the first modulator.
    pub source_intensity: f64,
    /// Std of the additive Gaussian measurement noise per masking step.
    pub noise_std: f64,
    /// Constant spurious offset at MZM2 in backward mode.
    pub bias_offset: f64,
    /// Per-iteration random-walk scale of the bias offset (slow drift).
    pub bias_drift_std: f64,
    /// Target standard deviation of the injected error signal.
    pub error_scale: f64,
    /// If false, the backward bracket passes through the true sin().
    pub linearized_backward: bool,
    /// Time constant (masking steps) of a first-order high-pass on the
    /// drive; `None` disables it.
    pub hpf_cutoff_steps: Option<f64>,
}

impl Default for HardwareParams {
    fn default() -> Self {
        HardwareParams {
            v0: 1.0,
            source_intensity: 1.0,
            noise_std: 1e-3,
            bias_offset: 0.0,
            bias_drift_std: 1e-4,
            error_scale: 0.1,
            linearized_backward: false,
            hpf_cutoff_steps: None,
        }
    }
}

impl HardwareParams {
    /// Imperfection-free parameters: the hardware model then reproduces the
    /// ideal dynamics bit for bit.
    pub fn ideal_limit() -> Self {
        HardwareParams {
            noise_std: 0.0,
            bias_offset: 0.0,
            bias_drift_std: 0.0,
            linearized_backward: true,
            hpf_cutoff_steps: None,
            ..HardwareParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.v0 <= 0.0 || self.source_intensity <= 0.0 {
            return Err(Error::InvalidConfig(
                "v0 and source_intensity must be positive".into(),
            ));
        }
        if self.noise_std < 0.0 || self.bias_drift_std < 0.0 {
            return Err(Error::InvalidConfig(
                "noise_std and bias_drift_std must be non-negative".into(),
            ));
        }
        if self.error_scale <= 0.0 {
            return Err(Error::InvalidConfig("error_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Per-iteration measurement context for hardware-fidelity gradient runs:
/// the bias offset frozen for this measurement pair and the noise RNG.
pub struct HwMeasurement<'a> {
    pub bias_offset: f64,
    pub rng: &'a mut ChaCha8Rng,
}

/// Gaussian random walk modelling the slow drift of the MZM2 working point.
/// Stepped once per training iteration; frozen within the two backward
/// measurements of an iteration, which is what makes the two-pass
/// correction effective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasDrift {
    pub value: f64,
}

impl BiasDrift {
    pub fn step(&mut self, std: f64, rng: &mut ChaCha8Rng) -> f64 {
        if std > 0.0 {
            let n: f64 = StandardNormal.sample(rng);
            self.value += std * n;
        }
        self.value
    }
}

/// Intensity at the upper output of the second modulator for a cascade
/// driven by `v1_rf` (RF part of MZM1, biased at quarter wave) and `v2`:
///
/// ```text
/// I2+ = (I0/2) * (1 + cos(v1_rf/V0) * sin(v2/V0))
/// ```
pub fn mzm_cascade(v1_rf: f64, v2: f64, p: &HardwareParams) -> f64 {
    0.5 * p.source_intensity * (1.0 + (v1_rf / p.v0).cos() * (v2 / p.v0).sin())
}

/// First-order high-pass with time constant `tau` masking steps:
/// `y[n] = alpha * (y[n-1] + x[n] - x[n-1])`, `alpha = tau/(tau+1)`.
fn high_pass(x: &[f64], tau: f64) -> Vec<f64> {
    let alpha = tau / (tau + 1.0);
    let mut y = vec![0.0; x.len()];
    let mut prev_x = 0.0;
    let mut prev_y = 0.0;
    for (n, &xn) in x.iter().enumerate() {
        let yn = alpha * (prev_y + xn - prev_x);
        y[n] = yn;
        prev_x = xn;
        prev_y = yn;
    }
    y
}

/// Forward pass through the physical loop. MZM1 sits at its quarter-wave
/// bias (`v1_rf = 0`), so the cascade's AC response normalized by `I0/2` is
/// exactly `sin(a_prev + z)`; the amplifier high-pass removes the DC term
/// and the attenuator supplies the loop gain `mu`. Measurement noise is
/// added to the recorded trace only — the loop itself is clean.
pub fn forward_hardware(
    z: &StepTrace,
    cfg: &ReservoirConfig,
    rng: &mut ChaCha8Rng,
) -> Result<StepTrace> {
    debug_assert_eq!(cfg.fidelity, Fidelity::Hardware);
    cfg.validate()?;
    if z.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("drive trace"));
    }
    let p = &cfg.hardware;
    let filtered;
    let zv: &[f64] = match p.hpf_cutoff_steps {
        Some(tau) => {
            filtered = high_pass(z.values(), tau);
            &filtered
        }
        None => z.values(),
    };
    let n_d = cfg.delay_steps();
    let mu = cfg.feedback_gain;
    let mut a = vec![0.0; zv.len()];
    for n in 0..zv.len() {
        let prev = if n >= n_d { a[n - n_d] } else { 0.0 };
        // normalized AC output of the cascade at quarter-wave bias
        a[n] = mu * (prev + zv[n]).sin();
    }
    if p.noise_std > 0.0 {
        for v in &mut a {
            let n: f64 = StandardNormal.sample(rng);
            *v += p.noise_std * n;
        }
    }
    Ok(StepTrace::new_unchecked(a, TraceRole::State))
}

/// Backward pass in backward time `q` on time-inverted traces. MZM1 is
/// driven with the recorded forward argument, giving the multiplicative
/// factor `mu*cos(a_inv[q+N_D] + z_inv[q])`; MZM2 carries the bracket
/// `ebar + e + bias_offset`, through the true sin() unless
/// `linearized_backward`. Returns the recorded (noisy) error trace, still
/// in the inverted frame.
pub fn backward_hardware(
    a_inv: &StepTrace,
    z_inv: &StepTrace,
    ebar_inv: &StepTrace,
    cfg: &ReservoirConfig,
    bias_offset: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StepTrace> {
    cfg.validate()?;
    let total = ebar_inv.len();
    if a_inv.len() != total || z_inv.len() != total {
        return Err(Error::dim("backward trace length", total, a_inv.len()));
    }
    if !bias_offset.is_finite() {
        return Err(Error::NonFinite("bias offset"));
    }
    let p = &cfg.hardware;
    let n_d = cfg.delay_steps();
    let mu = cfg.feedback_gain;
    let av = a_inv.values();
    let zv = z_inv.values();
    let bv = ebar_inv.values();
    let mut e = vec![0.0; total];
    for q in 0..total {
        let a_arg = if q + n_d < total { av[q + n_d] } else { 0.0 };
        let factor = mu * (a_arg + zv[q]).cos();
        let prev = if q >= n_d { e[q - n_d] } else { 0.0 };
        let bracket = bv[q] + prev + bias_offset;
        e[q] = factor
            * if p.linearized_backward {
                bracket
            } else {
                bracket.sin()
            };
    }
    if p.noise_std > 0.0 {
        for v in &mut e {
            let n: f64 = StandardNormal.sample(rng);
            *v += p.noise_std * n;
        }
    }
    Ok(StepTrace::new_unchecked(e, TraceRole::BackpropError))
}

/// Two-pass bias correction: measure once with the injected error and once
/// with a zero input error, both at the same frozen bias offset, and return
/// the difference. By linearity of the backward system the constant-offset
/// response cancels exactly.
pub fn bias_corrected_backward(
    a_inv: &StepTrace,
    z_inv: &StepTrace,
    ebar_inv: &StepTrace,
    cfg: &ReservoirConfig,
    bias_offset: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StepTrace> {
    let e_c = backward_hardware(a_inv, z_inv, ebar_inv, cfg, bias_offset, rng)?;
    let zero = StepTrace::new_unchecked(vec![0.0; ebar_inv.len()], TraceRole::InjectedError);
    let e_r = backward_hardware(a_inv, z_inv, &zero, cfg, bias_offset, rng)?;
    let diff = e_c
        .values()
        .iter()
        .zip(e_r.values())
        .map(|(c, r)| c - r)
        .collect();
    Ok(StepTrace::new_unchecked(diff, TraceRole::BackpropError))
}

/// Scale the injected error to the modulator's linear regime: divide by its
/// sample standard deviation and multiply by `error_scale`. Returns the
/// applied factor so gradients can be divided back. Degenerate traces
/// (std below 1e-12) pass through unchanged with factor 1.
pub fn scale_error(ebar: &StepTrace, p: &HardwareParams) -> (StepTrace, f64) {
    let v = ebar.values();
    if v.is_empty() {
        return (ebar.clone(), 1.0);
    }
    let mean: f64 = v.iter().sum::<f64>() / v.len() as f64;
    let var: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    let std = var.sqrt();
    if std < 1e-12 {
        return (ebar.clone(), 1.0);
    }
    let factor = p.error_scale / std;
    let scaled = v.iter().map(|x| x * factor).collect();
    (
        StepTrace::new_unchecked(scaled, ebar.role()),
        factor,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjoint::{backward_pass, jacobian_trace};
    use crate::dynamics::simulate_forward;
    use crate::rng::seeded;
    use crate::signal::time_invert;
    use rand::Rng;

    fn hw_cfg(n_t: usize, mu: f64, p: HardwareParams) -> ReservoirConfig {
        ReservoirConfig {
            n_virtual_nodes: n_t,
            feedback_gain: mu,
            fidelity: Fidelity::Hardware,
            hardware: p,
        }
    }

    fn random_drive(n: usize, seed: u64) -> StepTrace {
        let mut rng = seeded(seed, 0);
        StepTrace::new(
            (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
            TraceRole::Drive,
        )
        .unwrap()
    }

    #[test]
    fn mzm_identities() {
        let p = HardwareParams {
            source_intensity: 2.5,
            v0: 0.8,
            ..HardwareParams::default()
        };
        let i0 = p.source_intensity;
        // v1_rf = 0, v2 = 0 -> I0/2
        assert!((mzm_cascade(0.0, 0.0, &p) - i0 / 2.0).abs() < 1e-15);
        // v1_rf = 0, v2 = (pi/2) V0 -> I0 (full transmission)
        let v2 = std::f64::consts::FRAC_PI_2 * p.v0;
        assert!((mzm_cascade(0.0, v2, &p) - i0).abs() < 1e-12);
        // v1_rf = (pi/2) V0 kills the modulation for any v2
        let v1 = std::f64::consts::FRAC_PI_2 * p.v0;
        for v2 in [-3.0, -0.4, 0.0, 1.1, 9.0] {
            assert!((mzm_cascade(v1, v2, &p) - i0 / 2.0).abs() < 1e-15 * i0);
        }
    }

    #[test]
    fn mzm_forward_mode_identity_and_bounds() {
        let p = HardwareParams::default();
        let mut rng = seeded(71, 0);
        for _ in 0..1000 {
            let v1 = rng.gen::<f64>() * 20.0 - 10.0;
            let v2 = rng.gen::<f64>() * 20.0 - 10.0;
            let out = mzm_cascade(v1, v2, &p);
            assert!((0.0..=p.source_intensity).contains(&out));
        }
        for _ in 0..100 {
            let v2 = rng.gen::<f64>() * 10.0 - 5.0;
            let want = 0.5 * p.source_intensity * (1.0 + (v2 / p.v0).sin());
            assert_eq!(mzm_cascade(0.0, v2, &p), want);
        }
    }

    #[test]
    fn forward_ideal_limit_bit_identical() {
        let cfg = hw_cfg(7, 0.95, HardwareParams::ideal_limit());
        let z = random_drive(7 * 12, 73);
        let mut rng = seeded(1, 0);
        let a_hw = forward_hardware(&z, &cfg, &mut rng).unwrap();
        let a_ideal = simulate_forward(&z, &cfg).unwrap();
        assert_eq!(a_hw.values(), a_ideal.values());
    }

    #[test]
    fn forward_zero_drive_zero_state() {
        let cfg = hw_cfg(4, 1.0, HardwareParams::ideal_limit());
        let z = StepTrace::new(vec![0.0; 20], TraceRole::Drive).unwrap();
        let mut rng = seeded(2, 0);
        let a = forward_hardware(&z, &cfg, &mut rng).unwrap();
        assert!(a.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn forward_noise_statistics() {
        let noise_std = 0.01;
        let cfg = hw_cfg(
            10,
            0.9,
            HardwareParams {
                noise_std,
                ..HardwareParams::ideal_limit()
            },
        );
        let n = 10_000;
        let z = random_drive(n, 79);
        let mut rng = seeded(3, 0);
        let a_hw = forward_hardware(&z, &cfg, &mut rng).unwrap();
        let a_ideal = simulate_forward(&z, &cfg).unwrap();
        let diffs: Vec<f64> = a_hw
            .values()
            .iter()
            .zip(a_ideal.values())
            .map(|(h, i)| h - i)
            .collect();
        let mean: f64 = diffs.iter().sum::<f64>() / n as f64;
        let std = (diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64).sqrt();
        assert!(
            (std - noise_std).abs() / noise_std < 0.1,
            "sample std {std}"
        );
    }

    #[test]
    fn high_pass_removes_dc() {
        let x = vec![1.0; 400];
        let y = high_pass(&x, 10.0);
        assert!(y[0] > 0.9); // step passes through
        assert!(y[399].abs() < 1e-16 || y[399] < 1e-3); // DC decays
        let cfg_off = hw_cfg(4, 0.9, HardwareParams::ideal_limit());
        let cfg_on = hw_cfg(
            4,
            0.9,
            HardwareParams {
                hpf_cutoff_steps: Some(50.0),
                ..HardwareParams::ideal_limit()
            },
        );
        let z = random_drive(60, 83);
        let mut r1 = seeded(4, 0);
        let mut r2 = seeded(4, 0);
        let a_off = forward_hardware(&z, &cfg_off, &mut r1).unwrap();
        let a_on = forward_hardware(&z, &cfg_on, &mut r2).unwrap();
        assert_ne!(a_off.values(), a_on.values());
    }

    /// Shared fixture: forward-run traces plus a random injected error.
    fn backward_fixture(seed: u64) -> (ReservoirConfig, StepTrace, StepTrace, StepTrace) {
        let cfg = hw_cfg(6, 0.9, HardwareParams::ideal_limit());
        let z = random_drive(6 * 9, seed);
        let a = simulate_forward(&z, &cfg).unwrap();
        let mut rng = seeded(seed, 1);
        let ebar = StepTrace::new(
            (0..z.len()).map(|_| rng.gen::<f64>() * 0.2 - 0.1).collect(),
            TraceRole::InjectedError,
        )
        .unwrap();
        (cfg, z, a, ebar)
    }

    #[test]
    fn backward_ideal_limit_bit_identical() {
        let (cfg, z, a, ebar) = backward_fixture(89);
        let mut rng = seeded(5, 0);
        let e_inv = backward_hardware(
            &time_invert(&a),
            &time_invert(&z),
            &time_invert(&ebar),
            &cfg,
            0.0,
            &mut rng,
        )
        .unwrap();
        let e_hw = time_invert(&e_inv);
        let g = jacobian_trace(&a, &z, &cfg).unwrap();
        let e_ideal = backward_pass(&g, &ebar, &cfg).unwrap();
        assert_eq!(e_hw.values(), e_ideal.values());
    }

    #[test]
    fn backward_zero_error_zero_offset_is_zero() {
        let (cfg, z, a, _) = backward_fixture(97);
        let zero = StepTrace::new(vec![0.0; z.len()], TraceRole::InjectedError).unwrap();
        let mut rng = seeded(6, 0);
        let e = backward_hardware(
            &time_invert(&a),
            &time_invert(&z),
            &zero,
            &cfg,
            0.0,
            &mut rng,
        )
        .unwrap();
        assert!(e.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_offset_superposition() {
        // linear backward: response(ebar, offset) = response(ebar, 0)
        //                                         + response(0, offset)
        let (cfg, z, a, ebar) = backward_fixture(101);
        let (a_inv, z_inv, ebar_inv) = (time_invert(&a), time_invert(&z), time_invert(&ebar));
        let zero = StepTrace::new(vec![0.0; z.len()], TraceRole::InjectedError).unwrap();
        let mut rng = seeded(7, 0);
        let offset = 0.05;
        let both = backward_hardware(&a_inv, &z_inv, &ebar_inv, &cfg, offset, &mut rng).unwrap();
        let err_only = backward_hardware(&a_inv, &z_inv, &ebar_inv, &cfg, 0.0, &mut rng).unwrap();
        let off_only = backward_hardware(&a_inv, &z_inv, &zero, &cfg, offset, &mut rng).unwrap();
        for q in 0..z.len() {
            let want = err_only.values()[q] + off_only.values()[q];
            assert!((both.values()[q] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn bias_correction_recovers_ideal_backward() {
        let (cfg, z, a, ebar) = backward_fixture(103);
        let g = jacobian_trace(&a, &z, &cfg).unwrap();
        let e_ideal = backward_pass(&g, &ebar, &cfg).unwrap();
        let scale = e_ideal.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for offset in [0.01, -0.01, 0.1, -0.1] {
            let mut rng = seeded(8, 0);
            let e_inv = bias_corrected_backward(
                &time_invert(&a),
                &time_invert(&z),
                &time_invert(&ebar),
                &cfg,
                offset,
                &mut rng,
            )
            .unwrap();
            let e = time_invert(&e_inv);
            for q in 0..z.len() {
                let d = (e.values()[q] - e_ideal.values()[q]).abs();
                assert!(d <= 1e-12 * scale.max(1.0), "offset {offset} step {q}: {d}");
            }
        }
    }

    #[test]
    fn bias_correction_zero_error_is_zero() {
        let (cfg, z, a, _) = backward_fixture(107);
        let zero = StepTrace::new(vec![0.0; z.len()], TraceRole::InjectedError).unwrap();
        let mut rng = seeded(9, 0);
        let e = bias_corrected_backward(
            &time_invert(&a),
            &time_invert(&z),
            &zero,
            &cfg,
            0.3,
            &mut rng,
        )
        .unwrap();
        assert!(e.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bias_correction_noise_variance_doubles() {
        let (mut cfg, z, a, ebar) = backward_fixture(109);
        let noise_std = 5e-3;
        cfg.hardware.noise_std = noise_std;
        let (a_inv, z_inv, ebar_inv) = (time_invert(&a), time_invert(&z), time_invert(&ebar));
        // noise-free reference
        let mut cfg_clean = cfg.clone();
        cfg_clean.hardware.noise_std = 0.0;
        let mut rng0 = seeded(10, 0);
        let clean =
            bias_corrected_backward(&a_inv, &z_inv, &ebar_inv, &cfg_clean, 0.02, &mut rng0)
                .unwrap();
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..40u64 {
            let mut rng = seeded(11, seed);
            let noisy =
                bias_corrected_backward(&a_inv, &z_inv, &ebar_inv, &cfg, 0.02, &mut rng).unwrap();
            for (n, c) in noisy.values().iter().zip(clean.values()) {
                sum_sq += (n - c) * (n - c);
                count += 1;
            }
        }
        let var = sum_sq / count as f64;
        let want = 2.0 * noise_std * noise_std;
        assert!(
            (var - want).abs() / want < 0.15,
            "residual var {var}, want ~{want}"
        );
    }

    #[test]
    fn residual_nonlinearity_small_at_error_scale() {
        // the linearization error of the backward bracket obeys
        // |sin(x) - x| <= |x|^3/6, i.e. <= 1.7e-4 at the error scale 0.1
        for i in 0..=100 {
            let x = -0.1 + 0.002 * i as f64;
            assert!((x.sin() - x).abs() <= x.abs().powi(3) / 6.0 + 1e-18);
        }
        assert!(0.1f64.powi(3) / 6.0 <= 1.7e-4);
    }

    #[test]
    fn scale_error_examples() {
        let p = HardwareParams::default();
        // sigma = 1 -> scaled sigma = 0.1, factor 0.1
        let mut rng = seeded(12, 0);
        let raw: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mean: f64 = raw.iter().sum::<f64>() / raw.len() as f64;
        let std =
            (raw.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / raw.len() as f64).sqrt();
        let normalized: Vec<f64> = raw.iter().map(|x| x / std).collect();
        let t = StepTrace::new(normalized, TraceRole::InjectedError).unwrap();
        let (scaled, factor) = scale_error(&t, &p);
        assert!((factor - 0.1).abs() < 1e-12);
        let m: f64 = scaled.values().iter().sum::<f64>() / scaled.len() as f64;
        let s = (scaled.values().iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            / scaled.len() as f64)
            .sqrt();
        assert!((s - 0.1).abs() < 1e-12);

        // degenerate: all-zero trace passes through with factor 1
        let z = StepTrace::new(vec![0.0; 8], TraceRole::InjectedError).unwrap();
        let (same, f) = scale_error(&z, &p);
        assert_eq!(f, 1.0);
        assert_eq!(same.values(), z.values());
    }

    #[test]
    fn scale_error_round_trip_matches_ideal_backward() {
        // linear backward, no noise: backward(scaled ebar)/factor equals
        // backward(ebar)
        let (cfg, z, a, ebar) = backward_fixture(113);
        let (scaled, factor) = scale_error(&ebar, &cfg.hardware);
        let mut rng = seeded(13, 0);
        let e_scaled_inv = backward_hardware(
            &time_invert(&a),
            &time_invert(&z),
            &time_invert(&scaled),
            &cfg,
            0.0,
            &mut rng,
        )
        .unwrap();
        let g = jacobian_trace(&a, &z, &cfg).unwrap();
        let e_ideal = backward_pass(&g, &ebar, &cfg).unwrap();
        let e_scaled = time_invert(&e_scaled_inv);
        let scale = e_ideal.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for q in 0..z.len() {
            let unscaled = e_scaled.values()[q] / factor;
            assert!((unscaled - e_ideal.values()[q]).abs() < 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn drift_is_deterministic_random_walk() {
        let mut d1 = BiasDrift::default();
        let mut d2 = BiasDrift::default();
        let mut r1 = seeded(14, 0);
        let mut r2 = seeded(14, 0);
        for _ in 0..50 {
            assert_eq!(d1.step(1e-3, &mut r1), d2.step(1e-3, &mut r2));
        }
        assert_ne!(d1.value, 0.0);
        let mut d3 = BiasDrift::default();
        let mut r3 = seeded(14, 0);
        for _ in 0..50 {
            d3.step(0.0, &mut r3);
        }
        assert_eq!(d3.value, 0.0);
    }
}
