//! Relaxation times in the continuous-collision limit and the
//! fluctuation-dissipation relation.
//!
//! The limit takes the collision interval `τ₀ → 0` together with `φ` and `θ`
//! while holding `φ²/τ₀ = 1/T₁` and `2θ²/τ₀ = 1/T_pf` fixed. It is realized
//! here as a convergence study over a decreasing sequence of `τ₀`, since both
//! sides are available in closed form.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{iterate, lambda, BathSpec, IterationMode, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{projector, sigma_z, ComplexMatrix, QubitState};
use crate::machines::MachineParams;

/// Number of leading trajectory points skipped by [`fit_relaxation`].
pub const FIT_SKIP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationRates {
    pub t1: f64,
    pub t2: f64,
    /// Phase-fluctuation time; infinite when `θ = 0`.
    pub tpf: f64,
    pub tau0: f64,
}

impl RelaxationRates {
    /// `T₂ = 2T₁`, up to a relative `1e-12`.
    pub fn bound_saturated(&self) -> bool {
        (self.t2 - 2.0 * self.t1).abs() <= 1e-12 * 2.0 * self.t1
    }
}

/// `T₁ = τ₀/φ²`, `T_pf = τ₀/(2θ²)`, `1/T₂ = 1/(2T₁) + pq/T_pf`.
pub fn rates_from_machine(phi: f64, theta: f64, tau0: f64, p: f64) -> Result<RelaxationRates> {
    if !(phi > 0.0 && phi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "phi = {phi} does not dissipate; T1 undefined"
        )));
    }
    if !(tau0 > 0.0 && tau0.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau0 = {tau0} must be positive")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    let t1 = tau0 / (phi * phi);
    let pf_rate = 2.0 * theta * theta / tau0;
    let tpf = if pf_rate == 0.0 { f64::INFINITY } else { 1.0 / pf_rate };
    let t2 = 1.0 / (1.0 / (2.0 * t1) + p * (1.0 - p) * pf_rate);
    Ok(RelaxationRates { t1, t2, tpf, tau0 })
}

/// `d(t) = e^{−t/T₁} d(0) + (1 − e^{−t/T₁}) p`.
pub fn continuous_d(t: f64, d0: f64, p: f64, t1: f64) -> f64 {
    let e = (-t / t1).exp();
    e * d0 + (1.0 - e) * p
}

/// `|k|(t) = e^{−t/T₂} |k|(0)`.
pub fn continuous_k_mag(t: f64, k0_mag: f64, t2: f64) -> f64 {
    (-t / t2).exp() * k0_mag
}

/// Target of a continuous-limit study: fixed rates, initial state and
/// observation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitScenario {
    pub t1: f64,
    pub tpf: f64,
    pub p: f64,
    pub t: f64,
    pub d0: f64,
    pub k0_mag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitRow {
    pub tau0: f64,
    pub n: u32,
    pub phi: f64,
    pub theta: f64,
    pub d_discrete: f64,
    pub d_continuous: f64,
    pub k_discrete: f64,
    pub k_continuous: f64,
    /// Relative error of `cos^{2n}φ` against `e^{−t/T₁}`.
    pub envelope1_rel_err: f64,
    /// Relative error of `(|λ| cos φ)ⁿ` against `e^{−t/T₂}`.
    pub envelope2_rel_err: f64,
}

impl LimitRow {
    pub fn d_error(&self) -> f64 {
        (self.d_discrete - self.d_continuous).abs()
    }

    pub fn k_error(&self) -> f64 {
        (self.k_discrete - self.k_continuous).abs()
    }
}

/// Discrete dynamics with `φ = √(τ₀/T₁)`, `θ = √(τ₀/(2T_pf))`, `n = t/τ₀`
/// against the continuous-time exponentials, one row per `τ₀`.
pub fn discrete_limit_check(sc: &LimitScenario, taus: &[f64]) -> Result<Vec<LimitRow>> {
    let t2 = 1.0 / (1.0 / (2.0 * sc.t1) + sc.p * (1.0 - sc.p) / sc.tpf);
    taus.iter()
        .map(|&tau0| {
            if !(tau0 > 0.0) {
                return Err(Error::InvalidParameter(format!("tau0 = {tau0} must be positive")));
            }
            let phi = (tau0 / sc.t1).sqrt();
            let theta = (tau0 / (2.0 * sc.tpf)).sqrt();
            if phi > std::f64::consts::FRAC_PI_2 {
                return Err(Error::InvalidParameter(format!(
                    "tau0 = {tau0} too large for T1 = {}",
                    sc.t1
                )));
            }
            let n = (sc.t / tau0).round() as u32;
            let c = phi.cos();
            let env1 = c.powi(2).powi(n as i32);
            let env2 = (lambda(sc.p, theta, 0.0).norm() * c).powi(n as i32);
            let e1 = (-sc.t / sc.t1).exp();
            let e2 = (-sc.t / t2).exp();
            Ok(LimitRow {
                tau0,
                n,
                phi,
                theta,
                d_discrete: (1.0 - env1) * sc.p + env1 * sc.d0,
                d_continuous: continuous_d(sc.t, sc.d0, sc.p, sc.t1),
                k_discrete: env2 * sc.k0_mag,
                k_continuous: continuous_k_mag(sc.t, sc.k0_mag, t2),
                envelope1_rel_err: (env1 - e1).abs() / e1,
                envelope2_rel_err: (env2 - e2).abs() / e2,
            })
        })
        .collect()
}

/// `D⁽ⁿ⁾ = 1 − cos^{2n}φ`.
pub fn dissipation(phi: f64, n: u32) -> f64 {
    1.0 - phi.cos().powi(2).powi(n as i32)
}

/// `D(t) = 1 − e^{−t/T₁}`.
pub fn dissipation_continuous(t: f64, t1: f64) -> f64 {
    1.0 - (-t / t1).exp()
}

fn require_hermitian(a: &ComplexMatrix) -> Result<()> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: a.dim(),
        });
    }
    if !a.is_hermitian(1e-12) {
        return Err(Error::NotHermitian);
    }
    Ok(())
}

fn expectation(rho: &ComplexMatrix, a: &ComplexMatrix) -> f64 {
    (rho * a).trace().re
}

/// Branch states `ρ_j⁽ⁿ⁾ = T_ξⁿ[P_j]` of the measured-equilibrium protocol,
/// evolved collision by collision through the full unitary.
pub fn fd_branches(m: &MachineParams, b: &BathSpec, n: usize) -> [QubitState; 2] {
    let evolve = |start: QubitState| -> QubitState {
        *iterate(&start, m, b, n, IterationMode::Matrix).last()
    };
    [evolve(QubitState::ground()), evolve(QubitState::excited())]
}

/// Fluctuation measure `F⁽ⁿ⁾_A = √(p[Tr(δ₀A)]² + q[Tr(δ₁A)]²)` with
/// `δ_j = ρ_j⁽ⁿ⁾ − P_j`, from simulated branches.
pub fn fd_protocol_simulated(
    m: &MachineParams,
    b: &BathSpec,
    a: &ComplexMatrix,
    n: usize,
) -> Result<f64> {
    require_hermitian(a)?;
    let [r0, r1] = fd_branches(m, b, n);
    let d0 = r0.to_matrix() - projector(0);
    let d1 = r1.to_matrix() - projector(1);
    let t0 = expectation(&d0, a);
    let t1 = expectation(&d1, a);
    Ok((b.p() * t0 * t0 + b.q() * t1 * t1).sqrt())
}

/// `F⁽ʲ⁾_A` for `j = 0..=n`, from one pass over each branch.
pub fn fd_series(m: &MachineParams, b: &BathSpec, a: &ComplexMatrix, n: usize) -> Result<Vec<f64>> {
    require_hermitian(a)?;
    let b0 = iterate(&QubitState::ground(), m, b, n, IterationMode::Matrix);
    let b1 = iterate(&QubitState::excited(), m, b, n, IterationMode::Matrix);
    Ok(b0
        .states()
        .iter()
        .zip(b1.states())
        .map(|(r0, r1)| {
            let t0 = expectation(&(r0.to_matrix() - projector(0)), a);
            let t1 = expectation(&(r1.to_matrix() - projector(1)), a);
            (b.p() * t0 * t0 + b.q() * t1 * t1).sqrt()
        })
        .collect())
}

/// `|Tr(Aσz)| / (2 cosh βE)`.
pub fn fd_prefactor(a: &ComplexMatrix, b: &BathSpec) -> f64 {
    let tr = (a * &sigma_z()).trace().norm();
    tr / (2.0 * b.beta_energy().cosh())
}

/// `F⁽ⁿ⁾_A = D⁽ⁿ⁾ |Tr(Aσz)| / (2 cosh βE)`.
pub fn fd_closed_form(a: &ComplexMatrix, b: &BathSpec, phi: f64, n: u32) -> Result<f64> {
    require_hermitian(a)?;
    Ok(dissipation(phi, n) * fd_prefactor(a, b))
}

/// Continuous-time variant with `D(t) = 1 − e^{−t/T₁}`.
pub fn fd_closed_form_continuous(a: &ComplexMatrix, b: &BathSpec, t: f64, t1: f64) -> Result<f64> {
    require_hermitian(a)?;
    Ok(dissipation_continuous(t, t1) * fd_prefactor(a, b))
}

/// `p ρ₀⁽ⁿ⁾ + q ρ₁⁽ⁿ⁾`, which equals `ξ` at every `n`.
pub fn branch_mean(m: &MachineParams, b: &BathSpec, n: usize) -> ComplexMatrix {
    let [r0, r1] = fd_branches(m, b, n);
    r0.to_matrix().scale(Complex64::new(b.p(), 0.0)) + r1.to_matrix().scale(Complex64::new(b.q(), 0.0))
}

/// Slope of the least-squares line through `(x, y)`.
fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Log-linear fit of `|d⁽ⁿ⁾ − p|` and `|k⁽ⁿ⁾|` against `t = nτ₀`, skipping
/// the first [`FIT_SKIP`] points. Returns `(T₁, T₂)` estimates.
pub fn fit_relaxation(traj: &Trajectory, b: &BathSpec, tau0: f64) -> Result<(f64, f64)> {
    const FLOOR: f64 = 1e-280;
    let collect = |f: &dyn Fn(&QubitState) -> f64| -> Vec<(f64, f64)> {
        traj.states()
            .iter()
            .enumerate()
            .skip(FIT_SKIP)
            .filter_map(|(n, s)| {
                let y = f(s);
                (y > FLOOR).then(|| (n as f64 * tau0, y.ln()))
            })
            .collect()
    };
    let pop = collect(&|s| (s.d() - b.p()).abs());
    let coh = collect(&|s| s.k().norm());
    let rate = |pts: &[(f64, f64)], what: &str| -> Result<f64> {
        match ls_slope(pts) {
            Some(s) if s < 0.0 => Ok(-1.0 / s),
            _ => Err(Error::Degenerate(format!(
                "cannot fit {what}: need a decaying signal over at least two points"
            ))),
        }
    };
    Ok((rate(&pop, "T1")?, rate(&coh, "T2")?))
}
