//! SU(2) elements stored as unit quaternions.
//!
//! An element is `U = q₀·I − i(q₁σx + q₂σy + q₃σz)`, so a rotation by `θ`
//! about the unit axis `n` has `q = (cos θ/2, sin θ/2 · n)`. Basis states are
//! the σz eigenstates with `σz = |1⟩⟨1| − |0⟩⟨0|`; the ground state `|0⟩`
//! has Bloch vector `(0, 0, −1)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the σy exponent component accepted by [`UnitarySU2::exponent_xz`].
pub const XZ_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitarySU2 {
    q: [f64; 4],
}

impl fmt::Debug for UnitarySU2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UnitarySU2({:+.12}, {:+.12}, {:+.12}, {:+.12})",
            self.q[0], self.q[1], self.q[2], self.q[3]
        )
    }
}

impl Default for UnitarySU2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl UnitarySU2 {
    pub const fn identity() -> Self {
        Self { q: [1.0, 0.0, 0.0, 0.0] }
    }

    /// Builds an element from raw quaternion components, normalizing them.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidArgument(format!("quaternion {q:?} cannot be normalized")));
        }
        Ok(Self { q: q.map(|x| x / norm) })
    }

    /// Components without renormalization. Callers guarantee unit norm.
    pub(crate) fn from_unit_quaternion(q: [f64; 4]) -> Self {
        Self { q }
    }

    /// `exp(−i·angle·(n·σ)/2)` for the normalized direction of `axis`.
    ///
    /// Fails for a zero or non-finite axis. The axis is normalized, so
    /// callers that need the stricter `|n| = 1 ± 1e-9` contract should check
    /// it beforehand with [`rotation_strict`](Self::rotation_strict).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::InvalidArgument(format!("rotation axis {axis:?} has zero norm")));
        }
        if !angle.is_finite() {
            return Err(Error::InvalidArgument(format!("rotation angle {angle} is not finite")));
        }
        let (s, c) = (0.5 * angle).sin_cos();
        Ok(Self { q: [c, s * axis[0] / norm, s * axis[1] / norm, s * axis[2] / norm] })
    }

    /// Like [`rotation`](Self::rotation) but rejects axes whose norm is not
    /// within `1e-9` of one.
    pub fn rotation_strict(axis: [f64; 3], angle: f64) -> Result<Self> {
        let norm = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("rotation axis norm {norm} is not 1")));
        }
        Self::rotation(axis, angle)
    }

    pub fn rx(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self { q: [c, s, 0.0, 0.0] }
    }

    pub fn ry(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self { q: [c, 0.0, s, 0.0] }
    }

    pub fn rz(angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self { q: [c, 0.0, 0.0, s] }
    }

    /// `exp[−i(a·σ)/2]` for an exponent vector `a = (aˣ, aʸ, aᶻ)`.
    pub fn from_exponent(a: [f64; 3]) -> Self {
        let angle = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if angle == 0.0 {
            return Self::identity();
        }
        let (s, c) = (0.5 * angle).sin_cos();
        let k = s / angle;
        Self { q: [c, k * a[0], k * a[1], k * a[2]] }
    }

    /// `exp[−i(Aˣσx + Aᶻσz)/2]`.
    pub fn from_exponent_xz(ax: f64, az: f64) -> Self {
        Self::from_exponent([ax, 0.0, az])
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    /// Rotation angle in `[0, 2π]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.vector_norm().atan2(self.q[0])
    }

    /// Unit rotation axis; `+z` by convention when the angle is `0 mod 2π`.
    pub fn axis(&self) -> [f64; 3] {
        let v = self.vector_norm();
        if v == 0.0 {
            return [0.0, 0.0, 1.0];
        }
        [self.q[1] / v, self.q[2] / v, self.q[3] / v]
    }

    fn vector_norm(&self) -> f64 {
        (self.q[1] * self.q[1] + self.q[2] * self.q[2] + self.q[3] * self.q[3]).sqrt()
    }

    /// Exponent vector `a` with `U = exp[−i(a·σ)/2]` and `|a| ∈ [0, 2π)`.
    ///
    /// `−I` has angle `2π`; it is reported as the zero exponent since the
    /// two differ only by a global sign.
    pub fn exponent(&self) -> [f64; 3] {
        let v = self.vector_norm();
        if v == 0.0 {
            return [0.0; 3];
        }
        let angle = 2.0 * v.atan2(self.q[0]);
        let angle = if angle >= TAU { 0.0 } else { angle };
        let k = angle / v;
        [k * self.q[1], k * self.q[2], k * self.q[3]]
    }

    /// `(Aˣ, Aᶻ)` with `U = exp[−i(Aˣσx + Aᶻσz)/2]` on the principal branch.
    ///
    /// Fails with [`Error::SymmetryViolation`] when the σy component exceeds
    /// [`XZ_TOLERANCE`]; that happens when a non-even pulse is propagated.
    pub fn exponent_xz(&self) -> Result<(f64, f64)> {
        let a = self.exponent();
        if a[1].abs() > XZ_TOLERANCE {
            return Err(Error::SymmetryViolation(format!(
                "propagator has a σy exponent component {:.3e}",
                a[1]
            )));
        }
        Ok((a[0], a[2]))
    }

    pub fn dagger(&self) -> Self {
        Self { q: [self.q[0], -self.q[1], -self.q[2], -self.q[3]] }
    }

    /// Matrix transpose in the σz basis (`σyᵀ = −σy`).
    pub fn transpose(&self) -> Self {
        Self { q: [self.q[0], self.q[1], -self.q[2], self.q[3]] }
    }

    pub fn neg(&self) -> Self {
        Self { q: self.q.map(|x| -x) }
    }

    /// Product `self · rhs`, renormalized.
    pub fn compose(&self, rhs: &Self) -> Self {
        let mut out = self.product(rhs);
        out.renormalize();
        out
    }

    fn product(&self, rhs: &Self) -> Self {
        let [a0, a1, a2, a3] = self.q;
        let [b0, b1, b2, b3] = rhs.q;
        // (a0 − i a·σ)(b0 − i b·σ) = a0b0 − a·b − i(a0 b + b0 a + a × b)·σ
        Self {
            q: [
                a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2,
                a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3,
                a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1,
            ],
        }
    }

    pub(crate) fn renormalize(&mut self) -> f64 {
        let norm = self.q.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.q = self.q.map(|x| x / norm);
        norm
    }

    /// `|det U − 1|`; zero for an exact SU(2) element.
    pub fn determinant_error(&self) -> f64 {
        (self.q.iter().map(|x| x * x).sum::<f64>() - 1.0).abs()
    }

    /// Matrix entries in the `(|1⟩, |0⟩)` ordering where `σz = diag(1, −1)`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let [q0, q1, q2, q3] = self.q;
        [
            [Complex64::new(q0, -q3), Complex64::new(-q2, -q1)],
            [Complex64::new(q2, -q1), Complex64::new(q0, q3)],
        ]
    }

    /// `Tr(self† · other)/2`, which is real for SU(2).
    pub fn overlap(&self, other: &Self) -> f64 {
        self.q.iter().zip(&other.q).map(|(a, b)| a * b).sum()
    }

    /// Frobenius norm `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        let d: f64 = self.q.iter().zip(&other.q).map(|(a, b)| (a - b) * (a - b)).sum();
        (2.0 * d).sqrt()
    }

    /// Frobenius distance up to the global sign `U ≅ −U`.
    pub fn distance_mod_sign(&self, other: &Self) -> f64 {
        self.distance(other).min(self.distance(&other.neg()))
    }

    pub fn apply(&self, psi: &Spinor) -> Spinor {
        let m = self.matrix();
        Spinor {
            excited: m[0][0] * psi.excited + m[0][1] * psi.ground,
            ground: m[1][0] * psi.excited + m[1][1] * psi.ground,
        }
    }
}

impl Mul for UnitarySU2 {
    type Output = UnitarySU2;

    fn mul(self, rhs: Self) -> Self {
        self.compose(&rhs)
    }
}

impl Mul for &UnitarySU2 {
    type Output = UnitarySU2;

    fn mul(self, rhs: Self) -> UnitarySU2 {
        self.compose(rhs)
    }
}

/// Entanglement fidelity `|Tr(target†·actual)/2|²`, invariant under `U → −U`.
pub fn entanglement_fidelity(target: &UnitarySU2, actual: &UnitarySU2) -> f64 {
    let c = target.overlap(actual);
    (c * c).min(1.0)
}

/// `1 − F_e` evaluated without cancellation.
///
/// For unit quaternions `1 − (a·b)² = Σ_{i<j} (aᵢbⱼ − aⱼbᵢ)²`, which stays
/// accurate when the gate error is far below machine epsilon relative to 1.
pub fn entanglement_infidelity(target: &UnitarySU2, actual: &UnitarySU2) -> f64 {
    let a = target.q;
    let b = actual.q;
    let mut sum = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let w = a[i] * b[j] - a[j] * b[i];
            sum += w * w;
        }
    }
    sum.min(1.0)
}

/// Average gate fidelity over Haar-random input states, `(1 + 2F_e)/3`.
pub fn average_gate_fidelity(target: &UnitarySU2, actual: &UnitarySU2) -> f64 {
    1.0 / 3.0 + 2.0 * entanglement_fidelity(target, actual) / 3.0
}

/// `1 − F` computed from [`entanglement_infidelity`].
pub fn average_gate_infidelity(target: &UnitarySU2, actual: &UnitarySU2) -> f64 {
    2.0 * entanglement_infidelity(target, actual) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn vector(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Target rotation `R_axis(θ)` with `θ ∈ [−2π, 2π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTarget {
    pub axis: Axis,
    pub angle: f64,
}

impl GateTarget {
    pub fn new(axis: Axis, angle: f64) -> Result<Self> {
        if !angle.is_finite() || angle.abs() > TAU + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "gate angle {angle} outside [-2π, 2π]"
            )));
        }
        Ok(Self { axis, angle })
    }

    pub fn rx(angle: f64) -> Result<Self> {
        Self::new(Axis::X, angle)
    }

    pub fn unitary(&self) -> UnitarySU2 {
        match self.axis {
            Axis::X => UnitarySU2::rx(self.angle),
            Axis::Y => UnitarySU2::ry(self.angle),
            Axis::Z => UnitarySU2::rz(self.angle),
        }
    }
}

impl fmt::Display for GateTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}({:.6}π)", self.axis, self.angle / PI)
    }
}

/// Two-component state with amplitudes on `|1⟩` (excited) and `|0⟩` (ground).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub excited: Complex64,
    pub ground: Complex64,
}

impl Spinor {
    pub fn ground() -> Self {
        Self { excited: Complex64::new(0.0, 0.0), ground: Complex64::new(1.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { excited: Complex64::new(1.0, 0.0), ground: Complex64::new(0.0, 0.0) }
    }

    /// Normalizes the given amplitudes.
    pub fn new(excited: Complex64, ground: Complex64) -> Result<Self> {
        let norm = (excited.norm_sqr() + ground.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidArgument("spinor has zero norm".into()));
        }
        Ok(Self { excited: excited / norm, ground: ground / norm })
    }

    pub fn norm(&self) -> f64 {
        (self.excited.norm_sqr() + self.ground.norm_sqr()).sqrt()
    }

    /// `⟨ψ|φ⟩`
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.excited.conj() * other.excited + self.ground.conj() * other.ground
    }

    /// `|⟨ψ|φ⟩|²`
    pub fn fidelity(&self, other: &Spinor) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Expectation values `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let c = self.excited.conj() * self.ground;
        [
            2.0 * c.re,
            2.0 * c.im,
            self.excited.norm_sqr() - self.ground.norm_sqr(),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_angle_rotation_is_identity() {
        let u = UnitarySU2::rotation([0.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(u, UnitarySU2::identity());
    }

    #[test]
    fn rx_pi_exponent() {
        let u = UnitarySU2::rotation([1.0, 0.0, 0.0], PI).unwrap();
        let (ax, az) = u.exponent_xz().unwrap();
        assert!((ax - PI).abs() < 1e-12);
        assert_eq!(az, 0.0);
    }

    #[test]
    fn identity_exponent_is_zero() {
        assert_eq!(UnitarySU2::identity().exponent_xz().unwrap(), (0.0, 0.0));
        assert_eq!(UnitarySU2::identity().neg().exponent(), [0.0; 3]);
    }

    #[test]
    fn same_axis_rotations_add() {
        let half = UnitarySU2::rotation([0.0, 0.0, 1.0], FRAC_PI_2).unwrap();
        let full = half * half;
        assert!((full.angle() - PI).abs() < 1e-12);
        assert!(full.distance(&UnitarySU2::rz(PI)) < 1e-12);
    }

    #[test]
    fn zero_axis_is_rejected() {
        assert!(matches!(
            UnitarySU2::rotation([0.0; 3], 1.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(UnitarySU2::rotation_strict([2.0, 0.0, 0.0], 1.0).is_err());
        assert!(UnitarySU2::rotation_strict([1.0, 0.0, 0.0], 1.0).is_ok());
    }

    #[test]
    fn fidelity_examples() {
        let u = UnitarySU2::rx(0.7);
        assert_eq!(entanglement_fidelity(&u, &u), 1.0);
        assert_eq!(average_gate_fidelity(&u, &u), 1.0);
        let fe = entanglement_fidelity(&UnitarySU2::rx(PI), &UnitarySU2::rx(FRAC_PI_2));
        assert!((fe - 0.5).abs() < 1e-15);
        let f = average_gate_fidelity(&UnitarySU2::rx(PI), &UnitarySU2::rx(FRAC_PI_2));
        assert!((f - 2.0 / 3.0).abs() < 1e-15);
        assert!(entanglement_fidelity(&UnitarySU2::rx(PI), &UnitarySU2::ry(PI)) < 1e-30);
    }

    #[test]
    fn fidelity_ignores_global_sign() {
        let u = UnitarySU2::rx(1.3) * UnitarySU2::rz(0.4);
        assert!((entanglement_fidelity(&u, &u.neg()) - 1.0).abs() < 1e-15);
        assert!(entanglement_infidelity(&u, &u.neg()) < 1e-30);
    }

    #[test]
    fn infidelity_is_accurate_for_tiny_errors() {
        let target = UnitarySU2::rx(PI);
        let actual = UnitarySU2::rx(PI + 2e-9);
        // 1 − cos²(1e-9) = sin²(1e-9)
        let exact = (1e-9f64).sin().powi(2);
        let got = entanglement_infidelity(&target, &actual);
        assert!((got - exact).abs() < 1e-6 * exact, "{got} vs {exact}");
    }

    #[test]
    fn exponent_xz_rejects_sigma_y() {
        let u = UnitarySU2::from_exponent([0.5, 1e-6, 0.2]);
        assert!(matches!(u.exponent_xz(), Err(Error::SymmetryViolation(_))));
    }

    #[test]
    fn transpose_flips_sigma_y() {
        let u = UnitarySU2::from_exponent([0.3, 0.4, 0.5]);
        let m = u.matrix();
        let t = u.transpose().matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - t[j][i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_is_unitary_with_unit_determinant() {
        let u = UnitarySU2::from_exponent([0.3, -1.4, 2.5]);
        let m = u.matrix();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let col = |j: usize| [m[0][j], m[1][j]];
        let dot = |a: [Complex64; 2], b: [Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
        assert!((dot(col(0), col(0)).re - 1.0).abs() < 1e-12);
        assert!(dot(col(0), col(1)).norm() < 1e-12);
    }

    #[test]
    fn bloch_vectors_of_basis_states() {
        assert_eq!(Spinor::ground().bloch(), [0.0, 0.0, -1.0]);
        assert_eq!(Spinor::excited().bloch(), [0.0, 0.0, 1.0]);
        // R_x(π) flips ground to excited
        let flipped = UnitarySU2::rx(PI).apply(&Spinor::ground());
        assert!((flipped.bloch()[2] - 1.0).abs() < 1e-15);
        // R_y(π/2) takes ground to −x on the Bloch sphere
        let b = UnitarySU2::ry(FRAC_PI_2).apply(&Spinor::ground()).bloch();
        assert!((b[0] + 1.0).abs() < 1e-15 && b[1].abs() < 1e-15);
    }

    #[test]
    fn gate_target_bounds() {
        assert!(GateTarget::new(Axis::X, 7.0).is_err());
        assert!(GateTarget::new(Axis::Y, -TAU).is_ok());
        assert_eq!(GateTarget::rx(PI).unwrap().unitary(), UnitarySU2::rx(PI));
    }
}
