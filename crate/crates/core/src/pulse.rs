//! Envelopes, the cosine-carrier pulse ansatz and its scalar integrals.
//!
//! A pulse is `Ω f(t)` with `f(t) = f₀(t/τ_d)·cos(ωt + φ_cep)` supported on
//! the gate window `|t| ≤ T/2`, `T = T_d·τ_d`. Integrals are taken over the
//! normalized time `u = t/τ_d ∈ [−T_d/2, T_d/2]` with composite
//! Gauss–Legendre panels that always break at `u = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{refine, CompositeGrid};
use crate::OMEGA0;

/// Panels per half window for the coarsest estimate.
pub(crate) const START_PANELS: usize = 128;
/// Upper bound on panels per half window during refinement.
pub(crate) const MAX_PANELS: usize = 1 << 15;
/// Relative agreement required between successive refinements.
pub(crate) const REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    /// `exp[−(2u)²]`
    Gaussian,
    /// `sech(πu)`
    Sech,
    /// `1 − |u|`
    Triangular,
    /// `1`
    Constant,
}

impl EnvelopeKind {
    pub const ALL: [EnvelopeKind; 4] = [
        EnvelopeKind::Gaussian,
        EnvelopeKind::Sech,
        EnvelopeKind::Triangular,
        EnvelopeKind::Constant,
    ];

    /// Canonical window ratio `T/τ_d`.
    pub fn canonical_ratio(self) -> f64 {
        match self {
            EnvelopeKind::Gaussian | EnvelopeKind::Sech => 5.0,
            EnvelopeKind::Triangular => 2.0,
            EnvelopeKind::Constant => 1.0,
        }
    }

    /// `f₀(u)` ignoring the window.
    pub fn profile(self, u: f64) -> f64 {
        match self {
            EnvelopeKind::Gaussian => (-4.0 * u * u).exp(),
            EnvelopeKind::Sech => 1.0 / (std::f64::consts::PI * u).cosh(),
            EnvelopeKind::Triangular => (1.0 - u.abs()).max(0.0),
            EnvelopeKind::Constant => 1.0,
        }
    }

    /// `f₀(u)` on the window `|u| ≤ ratio/2`, zero outside.
    pub fn value(self, u: f64, ratio: f64) -> f64 {
        if u.abs() > 0.5 * ratio {
            0.0
        } else {
            self.profile(u)
        }
    }

    /// Interior points of `u` where `f₀` is not smooth, plus the center.
    pub fn kinks(self) -> &'static [f64] {
        match self {
            EnvelopeKind::Triangular => &[-1.0, 0.0, 1.0],
            _ => &[0.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvelopeKind::Gaussian => "gaussian",
            EnvelopeKind::Sech => "sech",
            EnvelopeKind::Triangular => "triangular",
            EnvelopeKind::Constant => "constant",
        }
    }
}

impl fmt::Display for EnvelopeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvelopeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Ok(EnvelopeKind::Gaussian),
            "sech" => Ok(EnvelopeKind::Sech),
            "triangular" | "triangle" => Ok(EnvelopeKind::Triangular),
            "constant" | "box" => Ok(EnvelopeKind::Constant),
            other => Err(Error::InvalidArgument(format!("unknown envelope '{other}'"))),
        }
    }
}

/// Full pulse parameterization. Times are in internal units (`ω₀ = 1`
/// unless overridden, so `T₀ = 2π`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub envelope: EnvelopeKind,
    /// Window ratio `T_d = T/τ_d`.
    pub ratio: f64,
    /// Effective duration `τ_d`.
    pub tau_d: f64,
    /// Peak driving strength `Ω`.
    pub rabi: f64,
    /// Carrier frequency `ω`.
    pub carrier: f64,
    /// Carrier-envelope phase `φ_cep`.
    pub cep: f64,
    /// Qubit frequency `ω₀`.
    pub omega0: f64,
}

impl PulseSpec {
    /// Even pulse with the envelope's canonical window and `ω₀ = 1`.
    pub fn new(envelope: EnvelopeKind, tau_d: f64, rabi: f64, carrier: f64) -> Self {
        Self {
            envelope,
            ratio: envelope.canonical_ratio(),
            tau_d,
            rabi,
            carrier,
            cep: 0.0,
            omega0: OMEGA0,
        }
    }

    /// Builds a pulse from the dimensionless products `Ωτ_d` and `ωτ_d`.
    pub fn from_areas(
        envelope: EnvelopeKind,
        ratio: f64,
        tau_d: f64,
        rabi_tau_d: f64,
        carrier_tau_d: f64,
    ) -> Self {
        Self::new(envelope, tau_d, rabi_tau_d / tau_d, carrier_tau_d / tau_d).with_ratio(ratio)
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn with_cep(mut self, cep: f64) -> Self {
        self.cep = cep;
        self
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidArgument(format!("{what} = {v}")));
        if !(self.tau_d.is_finite() && self.tau_d > 0.0) {
            return bad("tau_d must be positive, got", self.tau_d);
        }
        if !(self.ratio.is_finite() && self.ratio > 0.0) {
            return bad("window ratio must be positive, got", self.ratio);
        }
        if !self.rabi.is_finite() {
            return bad("driving strength must be finite, got", self.rabi);
        }
        if !(self.carrier.is_finite() && self.carrier >= 0.0) {
            return bad("carrier frequency must be nonnegative, got", self.carrier);
        }
        if !self.cep.is_finite() {
            return bad("carrier-envelope phase must be finite, got", self.cep);
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return bad("qubit frequency must be positive, got", self.omega0);
        }
        Ok(())
    }

    /// Total gate time `T`.
    pub fn gate_time(&self) -> f64 {
        self.ratio * self.tau_d
    }

    pub fn half_window(&self) -> f64 {
        0.5 * self.ratio
    }

    pub fn rabi_tau_d(&self) -> f64 {
        self.rabi * self.tau_d
    }

    pub fn carrier_tau_d(&self) -> f64 {
        self.carrier * self.tau_d
    }

    /// `f(−u) = f(u)` holds exactly when `sin φ_cep = 0`.
    pub fn is_even(&self) -> bool {
        self.cep.sin().abs() < 1e-12
    }

    pub fn envelope_value(&self, u: f64) -> f64 {
        self.envelope.value(u, self.ratio)
    }

    /// Unit-amplitude shape `f(u)` at normalized time. The window is closed
    /// and widened by a relative `1e-12` so that both edges of a truncated
    /// envelope are seen identically despite rounding in `t/τ_d`.
    pub fn shape(&self, u: f64) -> f64 {
        if u.abs() > self.half_window() * (1.0 + 1e-12) {
            return 0.0;
        }
        self.envelope.profile(u) * (self.carrier_tau_d() * u + self.cep).cos()
    }

    /// `f(t)` at physical time measured from the pulse center.
    pub fn value(&self, t: f64) -> f64 {
        self.shape(t / self.tau_d)
    }

    /// `Ω f(t)`
    pub fn drive(&self, t: f64) -> f64 {
        self.rabi * self.value(t)
    }

    pub(crate) fn require_even(&self, what: &str) -> Result<()> {
        if self.is_even() {
            Ok(())
        } else {
            Err(Error::SymmetryViolation(format!(
                "{what} requires an even pulse, got φ_cep = {}",
                self.cep
            )))
        }
    }

    fn window_grid(&self, panels: usize) -> CompositeGrid {
        let h = self.half_window();
        CompositeGrid::new(&[-h, 0.0, h], panels)
    }
}

/// Probe frequency and real Fourier component of an even pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub probe: f64,
    pub value: f64,
}

fn window_integral(spec: &PulseSpec, integrand: impl Fn(f64) -> f64) -> f64 {
    refine(START_PANELS, MAX_PANELS, REL_TOL, |n| {
        let grid = spec.window_grid(n);
        let vals = grid.sample(&integrand);
        let scale = vals.iter().zip(grid.weights()).map(|(v, w)| v.abs() * w).sum();
        (grid.integrate(&vals), scale)
    })
    .0
}

/// `f₀` evaluated on the envelope's own window.
pub fn envelope_value(kind: EnvelopeKind, u: f64) -> f64 {
    kind.value(u, kind.canonical_ratio())
}

/// `s₀ = ∫ f₀(u) du` over `|u| ≤ ratio/2`.
pub fn envelope_area(kind: EnvelopeKind, ratio: f64) -> f64 {
    let spec = PulseSpec::new(kind, 1.0, 0.0, 0.0).with_ratio(ratio);
    window_integral(&spec, |u| kind.profile(u))
}

/// `s = ∫ f(u) du` over the window.
pub fn signed_area(spec: &PulseSpec) -> f64 {
    window_integral(spec, |u| spec.shape(u))
}

/// Rotation angle accumulated from the pulse center, `θ(u,0) = 2Ωτ_d ∫₀ᵘ f`.
pub fn theta_half(spec: &PulseSpec, u: f64) -> f64 {
    let u = u.clamp(-spec.half_window(), spec.half_window());
    if u == 0.0 {
        return 0.0;
    }
    let (lo, hi, sign) = if u > 0.0 { (0.0, u, 1.0) } else { (u, 0.0, -1.0) };
    let integral = refine(START_PANELS / 2, MAX_PANELS, REL_TOL, |n| {
        let grid = CompositeGrid::new(&[lo, hi], n);
        let vals = grid.sample(|x| spec.shape(x));
        let scale = vals.iter().zip(grid.weights()).map(|(v, w)| v.abs() * w).sum();
        (grid.integrate(&vals), scale)
    })
    .0;
    2.0 * spec.rabi_tau_d() * sign * integral
}

/// First-order subcycle error integrals `(s₁c, s₁ₛ)` at the end of the window:
/// `s₁c + i s₁ₛ = ∫ f(u) u exp[iθ(u,0)] du`.
///
/// The angle uses the area normalization `θ(u,0) = θ_g·∫₀ᵘ f / s`, so the
/// result depends on the carrier only through `ωτ_d` and not on `Ω`.
pub fn s1_integrals(spec: &PulseSpec, theta_g: f64) -> Result<(f64, f64)> {
    let mut prev: Option<(f64, f64)> = None;
    let mut panels = START_PANELS;
    loop {
        let (cur, scale) = s1_at(spec, theta_g, panels)?;
        if let Some(p) = prev {
            let tol = REL_TOL * scale.max(cur.0.abs()).max(cur.1.abs());
            if ((cur.0 - p.0).abs() <= tol && (cur.1 - p.1).abs() <= tol) || panels >= MAX_PANELS {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        panels *= 2;
    }
}

fn s1_at(spec: &PulseSpec, theta_g: f64, panels: usize) -> Result<((f64, f64), f64)> {
    let grid = spec.window_grid(panels);
    let f = grid.sample(|u| spec.shape(u));
    let (cum, edges) = grid.cumulative(&f);
    let at_center = edges[panels];
    let total = edges[edges.len() - 1];
    let magnitude = grid.integrate(&f.iter().map(|x| x.abs()).collect::<Vec<_>>());
    if total.abs() <= 1e-12 * magnitude {
        return Err(Error::InvalidArgument(
            "pulse area vanishes; θ(u,0) is undefined".into(),
        ));
    }
    let mut c = 0.0;
    let mut s = 0.0;
    let mut scale = 0.0;
    for (k, &u) in grid.nodes().iter().enumerate() {
        let theta = theta_g * (cum[k] - at_center) / total;
        let (sin, cos) = theta.sin_cos();
        let g = grid.weights()[k] * f[k] * u;
        c += g * cos;
        s += g * sin;
        scale += g.abs();
    }
    Ok(((c, s), scale))
}

/// Real Fourier component `g̃(ω̃) = ∫ Ω f(t) cos(ω̃t) dt` of an even pulse.
pub fn fourier_component(spec: &PulseSpec, probe: f64) -> Result<f64> {
    spec.require_even("fourier_component")?;
    if !(probe.is_finite() && probe >= 0.0) {
        return Err(Error::InvalidArgument(format!("probe frequency {probe} must be ≥ 0")));
    }
    let k = probe * spec.tau_d;
    Ok(spec.rabi_tau_d() * window_integral(spec, |u| spec.shape(u) * (k * u).cos()))
}

/// Resonant component `g̃(ω₀)`.
pub fn resonant_component(spec: &PulseSpec) -> Result<f64> {
    fourier_component(spec, spec.omega0)
}

pub fn spectrum(spec: &PulseSpec, probes: &[f64]) -> Result<Vec<SpectrumRecord>> {
    probes
        .iter()
        .map(|&probe| Ok(SpectrumRecord { probe, value: fourier_component(spec, probe)? }))
        .collect()
}
