//! The single-collision thermalizing channel and its iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, tensor, trace_distance, ComplexMatrix, DensityMatrix, QubitState};
use crate::machines::{build_machine, MachineParams};

/// Thermal state of a bath qubit, `ξ = p P₀ + q P₁` with `p = ½(1 + tanh βE)`.
///
/// Built either from `(β, E)` or from `p` directly; the latter also admits
/// `p < ½` for scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    p: f64,
    beta_energy: Option<f64>,
}

impl BathSpec {
    /// `beta` may be `+∞` (zero temperature).
    pub fn from_temperature(beta: f64, energy: f64) -> Result<Self> {
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidParameter(format!("energy {energy} must be positive")));
        }
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta {beta} must be >= 0")));
        }
        let be = beta * energy;
        Ok(BathSpec {
            p: 0.5 * (1.0 + be.tanh()),
            beta_energy: Some(be),
        })
    }

    pub fn from_population(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        Ok(BathSpec { p, beta_energy: None })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// `βE`; recovered as `atanh(2p − 1)` when the bath was given by `p`.
    pub fn beta_energy(&self) -> f64 {
        self.beta_energy
            .unwrap_or_else(|| (2.0 * self.p - 1.0).atanh())
    }

    pub fn state(&self) -> QubitState {
        QubitState::unchecked(self.p, Complex64::new(0.0, 0.0))
    }
}

/// `ξ = diag(p, 1 − p)`.
pub fn bath_state(b: &BathSpec) -> DensityMatrix {
    b.state().to_density()
}

/// `λ = e^{iα}(p e^{−iθ} + q e^{iθ})`.
pub fn lambda(p: f64, theta: f64, alpha: f64) -> Complex64 {
    let q = 1.0 - p;
    Complex64::from_polar(1.0, alpha)
        * (p * Complex64::from_polar(1.0, -theta) + q * Complex64::from_polar(1.0, theta))
}

/// Joint system–ancilla state after one collision: `U (ρ ⊗ ξ) U†`.
pub fn collide_joint(rho: &ComplexMatrix, u: &ComplexMatrix, b: &BathSpec) -> ComplexMatrix {
    let xi = b.state().to_matrix();
    tensor(rho, &xi).expect("2x2 ⊗ 2x2").conjugate_by(u)
}

/// One collision through the full 4×4 conjugation and partial trace.
pub fn apply_collision_matrix(rho: &QubitState, u: &ComplexMatrix, b: &BathSpec) -> QubitState {
    let joint = collide_joint(&rho.to_matrix(), u, b);
    let sys = partial_trace(&joint, &[0]).expect("system qubit");
    QubitState::unchecked(sys[(0, 0)].re, sys[(0, 1)])
}

/// One collision through the closed-form map `d' = d cos²φ + p sin²φ`,
/// `k' = cos φ · λ · k`.
pub fn apply_collision_analytic(rho: &QubitState, m: &MachineParams, b: &BathSpec) -> QubitState {
    let (s, c) = m.phi().sin_cos();
    let d = rho.d() * c * c + b.p() * s * s;
    let k = c * lambda(b.p(), m.theta(), m.alpha()) * rho.k();
    QubitState::unchecked(d, k)
}

/// `T_ξ[ρ] = Tr_B[U (ρ ⊗ ξ) U†]`.
pub fn apply_collision(rho: &QubitState, m: &MachineParams, b: &BathSpec) -> QubitState {
    apply_collision_matrix(rho, &build_machine(m), b)
}

/// `d⁽ⁿ⁾ = (1 − cos^{2n}φ) p + cos^{2n}φ d⁽⁰⁾`.
pub fn closed_form_d(d0: f64, p: f64, phi: f64, n: u32) -> f64 {
    let c2n = phi.cos().powi(2).powi(n as i32);
    (1.0 - c2n) * p + c2n * d0
}

/// `k⁽ⁿ⁾ = k⁽⁰⁾ (λ cos φ)ⁿ`.
pub fn closed_form_k(k0: Complex64, lambda: Complex64, phi: f64, n: u32) -> Complex64 {
    k0 * (lambda * phi.cos()).powi(n as i32)
}

/// Closed-form state after `n` collisions.
pub fn closed_form_state(rho0: &QubitState, m: &MachineParams, b: &BathSpec, n: u32) -> QubitState {
    QubitState::unchecked(
        closed_form_d(rho0.d(), b.p(), m.phi(), n),
        closed_form_k(rho0.k(), lambda(b.p(), m.theta(), m.alpha()), m.phi(), n),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IterationMode {
    /// Closed-form single-step map.
    #[default]
    Analytic,
    /// Full 4×4 conjugation and partial trace at every step.
    Matrix,
}

/// States `ρ⁽⁰⁾, …, ρ⁽ᴺ⁾` of an iterated channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<QubitState>,
}

impl Trajectory {
    pub fn states(&self) -> &[QubitState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &QubitState {
        self.states.last().expect("trajectory holds the initial state")
    }
}

impl std::ops::Index<usize> for Trajectory {
    type Output = QubitState;
    fn index(&self, n: usize) -> &QubitState {
        &self.states[n]
    }
}

/// Iterates `T_ξ` `n` times starting from `rho0`.
pub fn iterate(
    rho0: &QubitState,
    m: &MachineParams,
    b: &BathSpec,
    n: usize,
    mode: IterationMode,
) -> Trajectory {
    let mut states = Vec::with_capacity(n + 1);
    states.push(*rho0);
    let u = build_machine(m);
    let mut cur = *rho0;
    for _ in 0..n {
        cur = match mode {
            IterationMode::Analytic => apply_collision_analytic(&cur, m, b),
            IterationMode::Matrix => apply_collision_matrix(&cur, &u, b),
        };
        states.push(cur);
    }
    Trajectory { states }
}

/// Trace distance of a qubit state from the bath state `ξ`.
pub fn distance_to_bath(rho: &QubitState, b: &BathSpec) -> f64 {
    trace_distance(&rho.to_density(), &bath_state(b))
}

/// Largest deviation `‖U(ξ⊗ξ)U† − ξ⊗ξ‖_max` over a list of populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationarityReport {
    pub max_deviation: f64,
    pub worst_p: f64,
}

pub fn stationarity_deviation(u: &ComplexMatrix, p: f64) -> f64 {
    let xi = QubitState::unchecked(p, Complex64::new(0.0, 0.0)).to_matrix();
    let xx = tensor(&xi, &xi).expect("4x4");
    xx.conjugate_by(u).max_abs_diff(&xx)
}

pub fn check_stationarity_unitary(u: &ComplexMatrix, ps: &[f64]) -> StationarityReport {
    ps.iter().fold(
        StationarityReport {
            max_deviation: 0.0,
            worst_p: f64::NAN,
        },
        |acc, &p| {
            let dev = stationarity_deviation(u, p);
            if dev > acc.max_deviation || acc.worst_p.is_nan() {
                StationarityReport {
                    max_deviation: dev.max(acc.max_deviation),
                    worst_p: p,
                }
            } else {
                acc
            }
        },
    )
}

pub fn check_stationarity(m: &MachineParams, ps: &[f64]) -> StationarityReport {
    check_stationarity_unitary(&build_machine(m), ps)
}

/// Reduced state of the ancilla after one collision.
pub fn ancilla_after_collision(rho: &QubitState, m: &MachineParams, b: &BathSpec) -> DensityMatrix {
    let joint = collide_joint(&rho.to_matrix(), &build_machine(m), b);
    DensityMatrix::new(partial_trace(&joint, &[1]).expect("ancilla")).expect("valid reduced state")
}
