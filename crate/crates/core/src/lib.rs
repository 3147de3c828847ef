//! Pulse design for single-qubit rotation gates at arbitrary gate speed.
//!
//! A driven two-level system with Hamiltonian `ω₀σz/2 + Ω f(t) σx` is
//! controlled by a cosine-carrier pulse `f(t) = f₀(t/τ_d)·cos(ωt + φ)`.
//! This crate finds `(Ω, ω)` such that the rotating-frame propagator equals
//! `R_x(θ)` for any pulse duration, from the subcycle regime (`τ_d ≪ T₀`)
//! to the multicycle regime where the rotating wave approximation holds.
//!
//! Units: the qubit frequency is `ω₀ = 1`, so one qubit period is
//! `T₀ = 2π`. Public helpers that take durations "in periods" say so.
//!
//! Module map:
//! - [`su2`]: exact SU(2) algebra and gate fidelities.
//! - [`pulse`]: envelopes, pulse ansatz and its scalar integrals.
//! - [`dynamics`]: rotating-frame and lab-frame propagation.
//! - [`seeders`]: analytic RWA and subcycle parameter seeds.
//! - [`magnus`]: rotating-frame Magnus expansion to third order.
//! - [`optimizer`]: fidelity optimization and continuation sweeps.
//! - [`gateset`]: universal gate set via time translation and virtual Z.

pub mod dynamics;
pub mod error;
pub mod gateset;
pub mod magnus;
pub mod optimizer;
pub mod pulse;
pub mod quadrature;
pub mod seeders;
pub mod simplex;
pub mod su2;

pub use dynamics::{propagate_lab, propagate_rot, propagate_shifted, BlochSample, PropagationResult, PropagatorOptions};
pub use error::{Error, Result};
pub use gateset::{plan_gate, plan_gate_in_frame, verify_plan, GateLibrary, GatePlan, PlanReport, SignPolicy, VirtualFrame};
pub use magnus::{
    magnus_coefficients, solve_second_order, solve_third_order, MagnusCoefficients, MagnusOrder, MagnusSolution,
};
pub use optimizer::{
    optimize_point, sweep, sweep_many, OptimizeSettings, SeedSource, SweepDirection, SweepJob, SweepRecord,
};
pub use pulse::{EnvelopeKind, PulseSpec, SpectrumRecord};
pub use seeders::{seed_rwa, seed_subcycle, transition_duration, Regime, SeedResult};
pub use su2::{
    average_gate_fidelity, entanglement_fidelity, entanglement_infidelity, Axis, GateTarget, Spinor, UnitarySU2,
};

/// Qubit angular frequency in internal units.
pub const OMEGA0: f64 = 1.0;

/// One qubit period `T₀ = 2π/ω₀` in internal time units.
pub const T0: f64 = std::f64::consts::TAU;

/// Converts a duration expressed in qubit periods to internal time units.
pub fn periods(n: f64) -> f64 {
    n * T0
}
