//! Command-line arguments. The same types are the JSON run configuration,
//! so a saved document replays the run that produced it.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use anyspeed_core::{Axis, EnvelopeKind, GateTarget, OptimizeSettings, SignPolicy, SweepDirection};
use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Gate angle as typed by the user: `pi`, `-pi/2`, `3pi/4`, `0.5pi` or
/// decimal radians. The original text is kept for labels and configs.
#[derive(Debug, Clone, PartialEq)]
pub struct Angle {
    text: String,
    radians: f64,
}

impl Angle {
    pub fn radians(&self) -> f64 {
        self.radians
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// File-name friendly label, `pi/2` → `pi_2`.
    pub fn slug(&self) -> String {
        self.text.replace('/', "_").replace('-', "m")
    }
}

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let text = s.trim().to_ascii_lowercase();
        let radians = parse_radians(&text).ok_or_else(|| format!("cannot parse angle '{s}' (use pi, pi/2, 3pi/4 or radians)"))?;
        if !radians.is_finite() {
            return Err(format!("angle '{s}' is not finite"));
        }
        Ok(Angle { text, radians })
    }
}

fn parse_radians(text: &str) -> Option<f64> {
    let Some(pi_at) = text.find("pi") else {
        return text.parse().ok();
    };
    let (coef, rest) = (&text[..pi_at], &text[pi_at + 2..]);
    let coef = match coef.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let divisor = match rest {
        "" => 1.0,
        r => r.strip_prefix('/')?.parse::<f64>().ok().filter(|d| *d != 0.0)?,
    };
    Some(coef * PI / divisor)
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `rx:pi`, `ry:-pi/2`, `rz:0.3`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetArg {
    pub axis: Axis,
    pub angle: Angle,
}

impl TargetArg {
    pub fn target(&self) -> GateTarget {
        GateTarget { axis: self.axis, angle: self.angle.radians() }
    }
}

impl FromStr for TargetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.trim().to_ascii_lowercase();
        let (gate, angle) = lower.split_once(':').ok_or_else(|| format!("target '{s}' must look like ry:pi/2"))?;
        let axis = match gate {
            "rx" | "x" => Axis::X,
            "ry" | "y" => Axis::Y,
            "rz" | "z" => Axis::Z,
            other => return Err(format!("unknown rotation '{other}' in target '{s}' (rx, ry or rz)")),
        };
        Ok(TargetArg { axis, angle: angle.parse()? })
    }
}

impl fmt::Display for TargetArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}:{}", self.axis, self.angle)
    }
}

impl Serialize for TargetArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TargetArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub fn parse_envelope(s: &str) -> Result<EnvelopeKind, String> {
    s.parse().map_err(|e: anyspeed_core::error::Error| e.to_string())
}

fn parse_direction(s: &str) -> Result<SweepDirection, String> {
    s.parse().map_err(|e: anyspeed_core::error::Error| e.to_string())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("{x} must be positive")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RegimeChoice {
    Subcycle,
    Rwa,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyChoice {
    DelayOnly,
    AllowFlip,
}

impl From<PolicyChoice> for SignPolicy {
    fn from(p: PolicyChoice) -> Self {
        match p {
            PolicyChoice::DelayOnly => SignPolicy::DelayOnly,
            PolicyChoice::AllowFlip => SignPolicy::AllowFlip,
        }
    }
}

/// Envelope, window ratio and gate angle.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PulseArgs {
    #[arg(long, default_value = "gaussian", value_parser = parse_envelope)]
    pub envelope: EnvelopeKind,
    /// Window length `T/τ_d`; defaults to the envelope's standard window.
    #[arg(long, value_parser = parse_positive)]
    pub ratio: Option<f64>,
    #[arg(long, default_value = "pi")]
    pub theta: Angle,
}

impl PulseArgs {
    pub fn ratio(&self) -> f64 {
        self.ratio.unwrap_or_else(|| self.envelope.canonical_ratio())
    }
}

/// Optimizer overrides.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SolverArgs {
    /// Stop once `1 − F` drops below this.
    #[arg(long, default_value_t = 1e-14, value_parser = parse_positive)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Integrator steps per shortest time scale.
    #[arg(long, default_value_t = 200.0, value_parser = parse_positive)]
    pub resolution: f64,
}

impl SolverArgs {
    pub fn settings(&self) -> OptimizeSettings {
        OptimizeSettings {
            tolerance: self.tolerance,
            max_iter: self.max_iter,
            resolution: self.resolution,
            ..OptimizeSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SeedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pulse: PulseArgs,
    /// Duration `τ_d` in qubit periods; required for the RWA seed.
    #[arg(long, value_parser = parse_positive)]
    pub tau_d: Option<f64>,
    #[arg(long, value_enum, default_value = "both")]
    pub regime: RegimeChoice,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pulse: PulseArgs,
    /// Duration `τ_d` in qubit periods.
    #[arg(long, value_parser = parse_positive)]
    pub tau_d: f64,
    /// Starting `Ωτ_d`; the analytic seed is used when omitted.
    #[arg(long, requires = "start_carrier_tau_d")]
    pub start_rabi_tau_d: Option<f64>,
    /// Starting `ωτ_d`.
    #[arg(long, requires = "start_rabi_tau_d")]
    pub start_carrier_tau_d: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// One or more envelopes; each envelope and angle pair is swept in parallel.
    #[arg(long, default_value = "gaussian", value_delimiter = ',', value_parser = parse_envelope)]
    pub envelope: Vec<EnvelopeKind>,
    /// Applies to every envelope; defaults to each envelope's standard window.
    #[arg(long, value_parser = parse_positive)]
    pub ratio: Option<f64>,
    #[arg(long, default_value = "pi", value_delimiter = ',')]
    pub theta: Vec<Angle>,
    /// Shortest duration in qubit periods.
    #[arg(long, default_value_t = 0.01, value_parser = parse_positive)]
    pub tau_min: f64,
    /// Longest duration in qubit periods.
    #[arg(long, default_value_t = 10.0, value_parser = parse_positive)]
    pub tau_max: f64,
    /// Log-spaced grid points.
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    #[arg(long, default_value = "forward", value_parser = parse_direction)]
    pub direction: SweepDirection,
    /// Fill the `g_res_over_theta` column.
    #[arg(long)]
    pub emit_fourier: bool,
    /// Append parameters predicted by the Magnus expansion at this order.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub magnus_order: Option<u8>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SpectraArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pulse: PulseArgs,
    /// Durations in qubit periods, one optimized pulse each.
    #[arg(long, default_values_t = vec![0.1, 1.0, 10.0], value_delimiter = ',', value_parser = parse_positive)]
    pub tau_d: Vec<f64>,
    /// Largest probe frequency in units of `ω₀`.
    #[arg(long, default_value_t = 5.0, value_parser = parse_positive)]
    pub probe_max: f64,
    #[arg(long, default_value_t = 501)]
    pub probes: usize,
    /// Use the analytic seed without optimizing.
    #[arg(long)]
    pub seed_only: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub pulse: PulseArgs,
    /// Duration `τ_d` in qubit periods.
    #[arg(long, default_value_t = 0.1, value_parser = parse_positive)]
    pub tau_d: f64,
    /// Drive strength `Ω/ω₀`; seeded from `--theta` when omitted.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Carrier frequency `ω/ω₀`; seeded from `--theta` when omitted.
    #[arg(long, value_parser = parse_positive)]
    pub freq: Option<f64>,
    /// Carrier-envelope phase in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub cep: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TransitionArgs {}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GatesetArgs {
    /// Gates to plan in order, e.g. `rz:pi/2,ry:pi/2`; `z` rotations are virtual.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Vec<TargetArg>,
    #[arg(long, default_value = "gaussian", value_parser = parse_envelope)]
    pub envelope: EnvelopeKind,
    #[arg(long, value_parser = parse_positive)]
    pub ratio: Option<f64>,
    /// Duration of the library pulses in qubit periods.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub tau_d: f64,
    #[arg(long, value_enum, default_value = "delay-only")]
    pub policy: PolicyChoice,
    /// Random states per gate for a Monte-Carlo check of the average fidelity; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

impl GatesetArgs {
    pub fn ratio(&self) -> f64 {
        self.ratio.unwrap_or_else(|| self.envelope.canonical_ratio())
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Analytic pulse parameters for the subcycle and RWA regimes.
    Seed(SeedArgs),
    /// Optimize one pulse at a fixed duration.
    Optimize(OptimizeArgs),
    /// Continuation sweep of optimized pulses over a duration grid.
    Sweep(SweepArgs),
    /// Fourier spectra of optimized pulses.
    Spectra(SpectraArgs),
    /// Lab-frame Bloch vector under one pulse, starting in the ground state.
    Trajectory(TrajectoryArgs),
    /// Transition durations for the standard envelope and angle set.
    Transitions(TransitionArgs),
    /// Plan and verify gates built from optimized `R_x` pulses.
    Gateset(GatesetArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Seed(_) => "seed",
            Command::Optimize(_) => "optimize",
            Command::Sweep(_) => "sweep",
            Command::Spectra(_) => "spectra",
            Command::Trajectory(_) => "trajectory",
            Command::Transitions(_) => "transitions",
            Command::Gateset(_) => "gateset",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn angles() {
        let r = |s: &str| s.parse::<Angle>().unwrap().radians();
        assert_eq!(r("pi"), PI);
        assert_eq!(r("pi/2"), FRAC_PI_2);
        assert_eq!(r("PI/4"), FRAC_PI_4);
        assert_eq!(r("-pi/2"), -FRAC_PI_2);
        assert_eq!(r("3pi/4"), 3.0 * PI / 4.0);
        assert_eq!(r("0.5*pi"), 0.5 * PI);
        assert_eq!(r("1.25"), 1.25);
        for bad in ["", "tau", "pi/0", "pi/x", "2pi3", "nan"] {
            assert!(bad.parse::<Angle>().is_err(), "{bad}");
        }
    }

    #[test]
    fn targets() {
        let t: TargetArg = "ry:pi/2".parse().unwrap();
        assert_eq!(t.target(), GateTarget { axis: Axis::Y, angle: FRAC_PI_2 });
        assert_eq!(t.to_string(), "ry:pi/2");
        assert!("rw:pi".parse::<TargetArg>().is_err());
        assert!("ry".parse::<TargetArg>().is_err());
    }

    #[test]
    fn config_serializes_with_command_tag() {
        let cmd = Command::Seed(SeedArgs {
            pulse: PulseArgs { envelope: EnvelopeKind::Sech, ratio: None, theta: "pi/2".parse().unwrap() },
            tau_d: Some(0.1),
            regime: RegimeChoice::Subcycle,
        });
        let json = serde_json::to_value(&cmd).unwrap();
        assert_eq!(json["command"], "seed");
        assert_eq!(json["theta"], "pi/2");
        assert_eq!(json["envelope"], "sech");
        assert_eq!(serde_json::from_value::<Command>(json).unwrap(), cmd);
    }
}
