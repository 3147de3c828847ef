//! Single-qubit gate set from optimized `R_x` pulses.
//!
//! Translating a pulse to be centered at `t₀` conjugates its rotating-frame
//! propagator: `U(t₀) = R_z†(ω₀t₀) U(0) R_z(ω₀t₀)`. Quarter-period delays
//! `t₀ = m T₀/4` therefore turn `R_x(θ)` into `R_x(θ)`, `R_y(−θ)`, `R_x(−θ)`
//! and `R_y(θ)` for `m = 0, 1, 2, 3`. `z` rotations are tracked in a
//! [`VirtualFrame`] and folded into the delays of later pulses.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate_shifted_with, PropagatorOptions};
use crate::error::{Error, Result};
use crate::optimizer::{optimize_point, OptimizeSettings, SweepRecord};
use crate::pulse::{EnvelopeKind, PulseSpec};
use crate::seeders::{seed_rwa, seed_subcycle};
use crate::su2::{entanglement_fidelity, Axis, GateTarget, UnitarySU2};

/// Angles closer than this share a library entry.
const ANGLE_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryEntry {
    /// `θ > 0` realized as `R_x(θ)` by `pulse` at zero delay.
    pub angle: f64,
    pub pulse: PulseSpec,
}

/// Optimized `R_x(θ)` pulses keyed by `θ > 0`, all with `Ω > 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GateLibrary {
    entries: Vec<LibraryEntry>,
}

impl GateLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, angle: f64, pulse: PulseSpec) -> Result<()> {
        if !(angle > 0.0 && angle <= PI + ANGLE_MATCH) {
            return Err(Error::InvalidArgument(format!("library angle {angle} must lie in (0, π]")));
        }
        if pulse.rabi.is_nan() || pulse.rabi <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "library pulses must have Ω > 0, got {}",
                pulse.rabi
            )));
        }
        pulse.require_even("a gate library entry")?;
        self.entries.retain(|e| (e.angle - angle).abs() > ANGLE_MATCH);
        self.entries.push(LibraryEntry { angle, pulse });
        self.entries.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        Ok(())
    }

    pub fn lookup(&self, angle: f64) -> Option<&PulseSpec> {
        self.entries.iter().find(|e| (e.angle - angle).abs() <= ANGLE_MATCH).map(|e| &e.pulse)
    }

    pub fn entries(&self) -> &[LibraryEntry] {
        &self.entries
    }

    /// Optimizes one `R_x(θ)` pulse per angle at duration `tau_d`,
    /// seeded from the analytic value for the regime of `tau_d`.
    pub fn optimize(
        envelope: EnvelopeKind,
        ratio: f64,
        tau_d: f64,
        angles: &[f64],
        settings: &OptimizeSettings,
    ) -> Result<(Self, Vec<SweepRecord>)> {
        let mut library = Self::new();
        let mut records = Vec::with_capacity(angles.len());
        for &angle in angles {
            let sub = seed_subcycle(envelope, ratio, angle)?;
            let tau0 = sub.phi.expect("subcycle seed has a phase");
            let initial = if tau_d < tau0 {
                (sub.rabi_tau_d, sub.carrier_tau_d)
            } else {
                let s = seed_rwa(envelope, ratio, angle, tau_d)?;
                (s.rabi_tau_d, s.carrier_tau_d)
            };
            let record = optimize_point(envelope, ratio, angle, tau_d, initial, settings)?;
            library.insert(angle, record.pulse(envelope, ratio))?;
            records.push(record);
        }
        Ok((library, records))
    }
}

/// Accumulated virtual `z` rotation. A gate `G` requested after virtual
/// rotations totalling `p` is realized physically as `R_z†(p) G R_z(p)`;
/// the logical operation equals `R_z(p)` times the physical product.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VirtualFrame {
    pub phase: f64,
}

impl VirtualFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rotate(&mut self, angle: f64) {
        self.phase = (self.phase + angle).rem_euclid(2.0 * TAU);
    }

    /// `R_z(p)`, the rotation still owed to the logical state.
    pub fn pending(&self) -> UnitarySU2 {
        UnitarySU2::rz(self.phase)
    }

    /// Physical gate that realizes `gate` in this frame.
    pub fn physical(&self, gate: &UnitarySU2) -> UnitarySU2 {
        let r = UnitarySU2::rz(self.phase);
        r.dagger() * *gate * r
    }
}

/// How a negative effective angle may be obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPolicy {
    /// Keep `Ω > 0` and use the parity of the quarter-period delay.
    #[default]
    DelayOnly,
    /// Also allow `Ω → −Ω`, which realizes `R_x(−θ)` at zero delay.
    AllowFlip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatePlan {
    pub target: GateTarget,
    /// Library pulse used, with the sign of `Ω` already applied. Absent for
    /// virtual `z` gates.
    pub pulse: Option<PulseSpec>,
    /// `m` in `t₀ = m T₀/4`, in `0..4`.
    pub quarter: Option<u8>,
    /// `k` in `m = 2k` or `m = 2k + 1`.
    pub k: Option<u8>,
    /// `+1` or `−1`.
    pub rabi_sign: f64,
    /// Frame phase the gate is realized in.
    pub frame_phase: f64,
}

impl GatePlan {
    pub fn is_virtual(&self) -> bool {
        self.pulse.is_none()
    }

    /// Delay `t₀ ∈ [0, T₀)` of the pulse center, including the frame phase.
    pub fn delay(&self) -> Option<f64> {
        let pulse = self.pulse.as_ref()?;
        let period = TAU / pulse.omega0;
        let quarter = self.quarter? as f64 * period / 4.0;
        Some((quarter + self.frame_phase / pulse.omega0).rem_euclid(period))
    }

    /// Gate the physical pulse should implement: `R_z†(p) G R_z(p)`.
    pub fn physical_target(&self) -> UnitarySU2 {
        let frame = VirtualFrame { phase: self.frame_phase };
        if self.is_virtual() {
            UnitarySU2::identity()
        } else {
            frame.physical(&self.target.unitary())
        }
    }
}

/// Effective rotation `(axis, sign)` of a base `R_x(sθ)` delayed by `m T₀/4`.
fn quarter_rule(m: u8, sign: f64) -> (Axis, f64) {
    match m {
        0 => (Axis::X, sign),
        1 => (Axis::Y, -sign),
        2 => (Axis::X, -sign),
        _ => (Axis::Y, sign),
    }
}

pub fn plan_gate(target: GateTarget, library: &GateLibrary) -> Result<GatePlan> {
    plan_gate_in_frame(target, library, &mut VirtualFrame::new(), SignPolicy::default())
}

/// Plans `target` in `frame`. `z` targets update the frame and need no pulse.
pub fn plan_gate_in_frame(
    target: GateTarget,
    library: &GateLibrary,
    frame: &mut VirtualFrame,
    policy: SignPolicy,
) -> Result<GatePlan> {
    if target.angle.is_nan() || target.angle.abs() > PI + ANGLE_MATCH {
        return Err(Error::Plan(format!("gate angle {} outside [−π, π]", target.angle)));
    }
    if target.axis == Axis::Z {
        let plan = GatePlan {
            target,
            pulse: None,
            quarter: None,
            k: None,
            rabi_sign: 1.0,
            frame_phase: frame.phase,
        };
        frame.rotate(target.angle);
        return Ok(plan);
    }
    let magnitude = target.angle.abs();
    let base = library.lookup(magnitude).ok_or_else(|| {
        let have: Vec<String> = library.entries().iter().map(|e| format!("{:.6}", e.angle)).collect();
        Error::Plan(format!(
            "no optimized R_x pulse for |θ| = {magnitude:.6} in library [{}]",
            have.join(", ")
        ))
    })?;
    let want = (target.axis, target.angle.signum());
    let signs: &[f64] = match policy {
        SignPolicy::DelayOnly => &[1.0],
        SignPolicy::AllowFlip => &[1.0, -1.0],
    };
    let (m, sign) = (0u8..4)
        .flat_map(|m| signs.iter().map(move |&s| (m, s)))
        .find(|&(m, s)| quarter_rule(m, s) == want)
        .expect("every axis and sign is reachable with Ω > 0");
    Ok(GatePlan {
        target,
        pulse: Some(base.with_rabi(sign * base.rabi)),
        quarter: Some(m),
        k: Some(m / 2),
        rabi_sign: sign,
        frame_phase: frame.phase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub delay: Option<f64>,
    pub entanglement_fidelity: f64,
    pub realized: UnitarySU2,
    pub expected: UnitarySU2,
}

/// Propagates the delayed pulse and compares it with the planned gate.
pub fn verify_plan(plan: &GatePlan) -> Result<PlanReport> {
    verify_plan_with(plan, &PropagatorOptions::default())
}

pub fn verify_plan_with(plan: &GatePlan, opts: &PropagatorOptions) -> Result<PlanReport> {
    let expected = plan.physical_target();
    let (realized, delay) = match (&plan.pulse, plan.delay()) {
        (Some(pulse), Some(t0)) => (propagate_shifted_with(pulse, t0, opts)?, Some(t0)),
        _ => (UnitarySU2::identity(), None),
    };
    Ok(PlanReport {
        delay,
        entanglement_fidelity: entanglement_fidelity(&expected, &realized),
        realized,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::T0;

    /// Library whose entries are idealized: `R_x` pulses are never propagated here.
    fn library() -> GateLibrary {
        let mut lib = GateLibrary::new();
        for angle in [PI, PI / 2.0] {
            lib.insert(angle, PulseSpec::from_areas(EnvelopeKind::Gaussian, 5.0, 0.5, 2.0, 3.0)).unwrap();
        }
        lib
    }

    #[test]
    fn rx_pi_needs_no_delay() {
        let plan = plan_gate(GateTarget::new(Axis::X, PI).unwrap(), &library()).unwrap();
        assert_eq!((plan.quarter, plan.k, plan.rabi_sign), (Some(0), Some(0), 1.0));
        assert_eq!(plan.delay(), Some(0.0));
    }

    #[test]
    fn ry_half_pi_uses_three_quarters() {
        let plan = plan_gate(GateTarget::new(Axis::Y, PI / 2.0).unwrap(), &library()).unwrap();
        assert_eq!(plan.quarter, Some(3));
        assert_eq!(plan.rabi_sign, 1.0);
        assert!((plan.delay().unwrap() - 0.75 * T0).abs() < 1e-15);
    }

    #[test]
    fn ry_half_pi_with_flip_uses_one_quarter() {
        let plan = plan_gate_in_frame(
            GateTarget::new(Axis::Y, PI / 2.0).unwrap(),
            &library(),
            &mut VirtualFrame::new(),
            SignPolicy::AllowFlip,
        )
        .unwrap();
        assert_eq!((plan.quarter, plan.rabi_sign), (Some(1), -1.0));
        assert!(plan.pulse.unwrap().rabi < 0.0);
    }

    #[test]
    fn ry_minus_pi_uses_one_quarter() {
        let plan = plan_gate(GateTarget::new(Axis::Y, -PI).unwrap(), &library()).unwrap();
        assert_eq!((plan.quarter, plan.k), (Some(1), Some(0)));
    }

    #[test]
    fn rz_is_virtual() {
        let mut frame = VirtualFrame::new();
        let plan = plan_gate_in_frame(
            GateTarget::new(Axis::Z, 0.3).unwrap(),
            &library(),
            &mut frame,
            SignPolicy::default(),
        )
        .unwrap();
        assert!(plan.is_virtual() && plan.delay().is_none());
        assert_eq!(frame.phase, 0.3);
        let report = verify_plan(&plan).unwrap();
        assert_eq!(report.entanglement_fidelity, 1.0);
    }

    #[test]
    fn missing_angle_is_named() {
        let err = plan_gate(GateTarget::new(Axis::X, PI / 4.0).unwrap(), &library()).unwrap_err();
        assert!(matches!(err, Error::Plan(ref m) if m.contains("0.785398")), "{err}");
    }

    #[test]
    fn quarter_rule_matches_conjugation() {
        for m in 0u8..4 {
            for sign in [1.0, -1.0] {
                let theta = 0.9;
                let r = UnitarySU2::rz(m as f64 * PI / 2.0);
                let conj = r.dagger() * UnitarySU2::rx(sign * theta) * r;
                let (axis, s) = quarter_rule(m, sign);
                let expected = GateTarget::new(axis, s * theta).unwrap().unitary();
                assert!(conj.distance(&expected) < 1e-14, "m = {m}, sign = {sign}");
            }
        }
    }

    #[test]
    fn frame_shifts_delay() {
        let mut frame = VirtualFrame::new();
        frame.rotate(PI / 2.0);
        let plan = plan_gate_in_frame(
            GateTarget::new(Axis::X, PI).unwrap(),
            &library(),
            &mut frame,
            SignPolicy::default(),
        )
        .unwrap();
        assert!((plan.delay().unwrap() - T0 / 4.0).abs() < 1e-14);
    }
}
