//! The family of two-qubit thermalizing machines and its equivalence structure.
//!
//! A machine `U(φ, θ, α)` acts on `|system⟩|ancilla⟩` as
//!
//! ```text
//! |00⟩ → |00⟩
//! |11⟩ → |11⟩
//! |01⟩ → e^{i(θ+α)} (cos φ |01⟩ + i sin φ |10⟩)
//! |10⟩ → e^{i(θ−α)} (cos φ |10⟩ + i sin φ |01⟩)
//! ```
//!
//! It conserves the number of excitations, so every thermal product state
//! `ξ⊗ξ` is left invariant. `φ` sets the dissipation, `θ` the phase
//! fluctuations and `α` only rotates the transverse axes.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sigma_x, sigma_y, sigma_z, tensor, ComplexMatrix};

/// Tolerance used when comparing machine angles.
pub const ANGLE_TOL: f64 = 1e-9;

/// Angles `(φ, θ, α)` of a machine. `φ ∈ [0, π/2]`; `θ` and `α` are
/// periodic and accepted as any finite real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    phi: f64,
    theta: f64,
    alpha: f64,
}

impl MachineParams {
    pub fn new(phi: f64, theta: f64, alpha: f64) -> Result<Self> {
        if !(phi.is_finite() && theta.is_finite() && alpha.is_finite()) {
            return Err(Error::InvalidParameter("machine angles must be finite".into()));
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi = {phi} outside [0, pi/2]"
            )));
        }
        Ok(MachineParams {
            phi: phi.min(FRAC_PI_2),
            theta,
            alpha,
        })
    }

    /// The Bell-diagonal representative `V(φ, θ) = U(φ, θ, 0)`.
    pub fn representative(phi: f64, theta: f64) -> Result<Self> {
        Self::new(phi, theta, 0.0)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Machines with `φ = 0` never relax the population.
    pub fn is_thermalizing(&self) -> bool {
        self.phi > 0.0
    }

    pub fn unitary(&self) -> ComplexMatrix {
        build_machine(self)
    }
}

/// Local canonical parameters `exp(i Σ μ_j σ_j⊗σ_j)` of a machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub mu_x: f64,
    pub mu_y: f64,
    pub mu_z: f64,
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// The 4×4 unitary of `U(φ, θ, α)` in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn build_machine(m: &MachineParams) -> ComplexMatrix {
    let (s, c) = m.phi.sin_cos();
    let i = Complex64::i();
    let e_plus = cis(m.theta + m.alpha);
    let e_minus = cis(m.theta - m.alpha);
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // columns are the images of the basis kets
    #[rustfmt::skip]
    let entries = [
        one,  zero,             zero,             zero,
        zero, e_plus * c,       e_minus * i * s,  zero,
        zero, e_plus * i * s,   e_minus * c,      zero,
        zero, zero,             zero,             one,
    ];
    ComplexMatrix::new(4, &entries).expect("4x4 machine is well formed")
}

/// `V(φ, θ) = U(φ, θ, 0)`, diagonal in the Bell basis.
pub fn build_v(phi: f64, theta: f64) -> ComplexMatrix {
    build_machine(&MachineParams {
        phi,
        theta,
        alpha: 0.0,
    })
}

pub fn swap() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        &[
            1., 0., 0., 0., //
            0., 0., 1., 0., //
            0., 1., 0., 0., //
            0., 0., 0., 1.,
        ],
    )
    .expect("swap")
}

/// The Bell basis `|00⟩, |11⟩, |Ψ⁺⟩, |Ψ⁻⟩` in which every `V(φ, θ)` is diagonal.
pub fn bell_basis() -> [[Complex64; 4]; 4] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let h = Complex64::new(r, 0.0);
    [[o, z, z, z], [z, z, z, o], [z, h, h, z], [z, h, -h, z]]
}

/// `H(φ, θ) = ½[φ(σx⊗σx + σy⊗σy) − θ σz⊗σz]`.
pub fn hamiltonian_form(phi: f64, theta: f64) -> ComplexMatrix {
    let xx = tensor(&sigma_x(), &sigma_x()).expect("2x2");
    let yy = tensor(&sigma_y(), &sigma_y()).expect("2x2");
    let zz = tensor(&sigma_z(), &sigma_z()).expect("2x2");
    (xx + yy).scale(Complex64::new(0.5 * phi, 0.0)) - zz.scale(Complex64::new(0.5 * theta, 0.0))
}

/// `exp(iH)` for a Bell-diagonal Hermitian `H`: reads the eigenvalues
/// `⟨b|H|b⟩` off the Bell basis and re-assembles `Σ e^{iλ_b} |b⟩⟨b|`.
pub fn exp_i_bell_diagonal(h: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(4).expect("4x4");
    for b in bell_basis() {
        let hb = h.apply(&b);
        let lambda: Complex64 = b.iter().zip(&hb).map(|(x, y)| x.conj() * y).sum();
        let proj = ComplexMatrix::outer(&b, &b).expect("4x4");
        out = out + proj.scale(cis(lambda.re));
    }
    out
}

/// `u(x) = P₀ + e^{ix} P₁`.
pub fn phase_gate(x: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[Complex64::new(1.0, 0.0), cis(x)]).expect("2x2")
}

/// `(1 ⊗ u(a)) · U · (1 ⊗ u(b))`: rephasing of the ancilla basis, which leaves
/// the induced channel on the system unchanged.
pub fn gauge_transform(u: &ComplexMatrix, a: f64, b: f64) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2).expect("2x2");
    let left = tensor(&id, &phase_gate(a)).expect("4x4");
    let right = tensor(&id, &phase_gate(b)).expect("4x4");
    &(&left * u) * &right
}

/// Reduces an angle into `(−π/2, π/2]` modulo π; the boundary maps to `+π/2`.
pub fn reduce_mod_pi(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    if (r - FRAC_PI_2).abs() <= 1e-12 {
        FRAC_PI_2
    } else if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Canonical parameters of `U(φ, θ, α)`: `μx = μy = φ/2`, `μz = −θ'/2` with
/// `θ' = θ mod π` in `(−π/2, π/2]`.
pub fn canonical_params(phi: f64, theta: f64) -> CanonicalParams {
    let t = reduce_mod_pi(theta);
    CanonicalParams {
        mu_x: phi / 2.0,
        mu_y: phi / 2.0,
        // avoid a negative zero
        mu_z: if t == 0.0 { 0.0 } else { -t / 2.0 },
    }
}

/// Distance of `x` from the nearest multiple of `period`.
fn circular_distance(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    r.min(period - r)
}

/// Same `φ`, and `θ` equal modulo π; `α` is free.
pub fn dynamically_equivalent(m1: &MachineParams, m2: &MachineParams) -> bool {
    (m1.phi - m2.phi).abs() <= ANGLE_TOL && circular_distance(m1.theta - m2.theta, PI) <= ANGLE_TOL
}

/// Equivalence under local unitaries.
///
/// Coincides with [`dynamically_equivalent`] for `0 < φ < π/2`. On the
/// boundary faces `φ ∈ {0, π/2}` the canonical class `(μ, μ, μz)` is also
/// equivalent to `(μ, μ, −μz)`, so `θ` and `−θ` are identified there too.
pub fn lu_equivalent(m1: &MachineParams, m2: &MachineParams) -> bool {
    if (m1.phi - m2.phi).abs() > ANGLE_TOL {
        return false;
    }
    if circular_distance(m1.theta - m2.theta, PI) <= ANGLE_TOL {
        return true;
    }
    let on_face = m1.phi <= ANGLE_TOL || (m1.phi - FRAC_PI_2).abs() <= ANGLE_TOL;
    on_face && circular_distance(m1.theta + m2.theta, PI) <= ANGLE_TOL
}

/// Haar-random single-qubit unitary.
///
/// `w = e^{iχ} [[e^{iψ} cos a, e^{iω} sin a], [−e^{−iω} sin a, e^{−iψ} cos a]]`
/// with `ψ, ω, χ` uniform on `[0, 2π)` and `sin² a` uniform on `[0, 1]`.
pub fn haar_unitary_2<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    let psi = rng.random::<f64>() * TAU;
    let omega = rng.random::<f64>() * TAU;
    let chi = rng.random::<f64>() * TAU;
    let a = rng.random::<f64>().sqrt().asin();
    let g = cis(chi);
    ComplexMatrix::new(
        2,
        &[
            g * cis(psi) * a.cos(),
            g * cis(omega) * a.sin(),
            -g * cis(-omega) * a.sin(),
            g * cis(-psi) * a.cos(),
        ],
    )
    .expect("2x2")
}

/// `min_γ ‖A − e^{iγ}B‖_F / √dim`: zero iff the matrices agree up to a
/// global phase, and linear in small perturbations.
pub fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let dim = a.dim();
    let mut overlap = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            overlap += b[(i, j)].conj() * a[(i, j)];
        }
    }
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut sum = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            sum += (a[(i, j)] - phase * b[(i, j)]).norm_sqr();
        }
    }
    (sum / dim as f64).sqrt()
}

/// Whether `U` commutes (up to phase) with `w⊗w` for `trials` Haar-random
/// single-qubit `w`, i.e. whether the machine works for any quantization axis.
pub fn is_basis_independent<R: Rng + ?Sized>(
    u: &ComplexMatrix,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<bool> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.dim(),
        });
    }
    for _ in 0..trials {
        let w = haar_unitary_2(rng);
        let ww = tensor(&w, &w)?;
        if phase_distance(&u.conjugate_by(&ww), u) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
