//! Benchmark fixtures shared by the criterion targets.

use anyspeed_core::{EnvelopeKind, PulseSpec, T0};

/// Gaussian pulse with the `R_x(π)` subcycle seed `(Ωτ_d, ωτ_d)` at `τ_d = periods·T₀`.
pub fn gaussian_pi(periods: f64) -> PulseSpec {
    PulseSpec::from_areas(EnvelopeKind::Gaussian, 5.0, periods * T0, 3.9716, 3.5929)
}
