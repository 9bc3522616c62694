//! Wootters concurrence and the entangling power of thermalizing machines.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::BathSpec;
use crate::error::{Error, Result};
use crate::linalg::{bloch_ket, sigma_y, tensor, ComplexMatrix, DensityMatrix};
use crate::machines::{build_machine, MachineParams};
use crate::optimize::{nelder_mead, NelderMeadOptions};

/// Eigenvalues of `ρ` at or below this are treated as exact zeros. Their square
/// roots would otherwise leak `O(√ε)` round-off into the concurrence.
const RANK_TOL: f64 = 1e-14;

/// `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`, conjugation in the computational basis.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = tensor(&sigma_y(), &sigma_y()).expect("4x4");
    &(&yy * &rho.conj()) * &yy
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`.
///
/// The `λᵢ` (square roots of the eigenvalues of `ρρ̃`) are computed as the
/// singular values of `τ = Wᵀ(σy⊗σy)W` for the factorization `ρ = WW†` built
/// from the spectrum of `ρ`; `ττ†` shares its nonzero spectrum with `ρρ̃`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: rho.dim(),
        });
    }
    let (values, vectors) = rho.matrix().hermitian_eigen();
    let columns: Vec<Vec<Complex64>> = values
        .iter()
        .zip(&vectors)
        .filter(|(v, _)| **v > RANK_TOL)
        .map(|(v, w)| w.iter().map(|z| z * v.sqrt()).collect())
        .collect();
    if columns.is_empty() {
        return Err(Error::InvalidDensity("zero matrix".into()));
    }
    let yy = tensor(&sigma_y(), &sigma_y()).expect("4x4");
    let r = columns.len();
    let tau = DMatrix::from_fn(r, r, |i, j| {
        let yw = yy.apply(&columns[j]);
        columns[i].iter().zip(&yw).map(|(a, b)| a * b).sum::<Complex64>()
    });
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let rest: f64 = lambdas.iter().skip(1).sum();
    Ok((lambdas[0] - rest).max(0.0))
}

/// Grid and refinement settings for [`entangling_power`].
#[derive(Debug, Clone, Copy)]
pub struct PowerSearch {
    /// Polar grid points, both poles included.
    pub polar: usize,
    /// Azimuthal grid points.
    pub azimuthal: usize,
    /// Convergence tolerance of the local refinement.
    pub refine_tol: f64,
}

impl Default for PowerSearch {
    fn default() -> Self {
        PowerSearch {
            polar: 32,
            azimuthal: 64,
            refine_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglingPowerResult {
    pub value: f64,
    /// Bloch angles of the maximizing pure input.
    pub bloch_theta: f64,
    pub bloch_phi: f64,
}

impl EntanglingPowerResult {
    /// `|⟨1|ψ⟩|²` of the maximizing input.
    pub fn excited_fidelity(&self) -> f64 {
        (self.bloch_theta / 2.0).sin().powi(2)
    }
}

/// Concurrence of `U (|ψ⟩⟨ψ| ⊗ ξ) U†` for a pure input given by Bloch angles.
pub fn output_concurrence(u: &ComplexMatrix, xi: &DensityMatrix, theta: f64, phi: f64) -> f64 {
    let psi = bloch_ket(theta, phi);
    let input = DensityMatrix::from_pure(&psi).expect("normalized");
    let joint = input.tensor(xi).expect("4x4").evolve(u);
    concurrence(&joint).expect("4x4")
}

/// `max_ρ C(U (ρ ⊗ ξ) U†)`.
///
/// Only pure inputs are searched: the output is linear in `ρ` and the
/// concurrence is convex, so a mixed input never beats the best pure state in
/// its decomposition. A Bloch-sphere grid locates the basin, then a simplex
/// refinement polishes the best grid point.
pub fn entangling_power(
    m: &MachineParams,
    b: &BathSpec,
    search: PowerSearch,
) -> Result<EntanglingPowerResult> {
    if search.polar < 32 || search.azimuthal < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid {}x{} below the 32x64 minimum",
            search.polar, search.azimuthal
        )));
    }
    let u = build_machine(m);
    let xi = crate::channel::bath_state(b);
    let f = |theta: f64, phi: f64| output_concurrence(&u, &xi, theta, phi);

    let points: Vec<(f64, f64)> = (0..search.polar)
        .flat_map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (search.polar - 1) as f64;
            (0..search.azimuthal)
                .map(move |j| (theta, std::f64::consts::TAU * j as f64 / search.azimuthal as f64))
        })
        .collect();
    let values: Vec<f64> = points.par_iter().map(|&(t, p)| f(t, p)).collect();
    let (best_idx, &best_val) = values
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })
        .expect("non-empty grid");

    let start = points[best_idx];
    let refined = nelder_mead(
        |x| -f(x[0], x[1]),
        &[start.0, start.1],
        NelderMeadOptions {
            step: std::f64::consts::PI / (search.polar - 1) as f64,
            tol: search.refine_tol,
            max_iter: 4000,
        },
    );
    let (value, theta, phi) = if -refined.value > best_val {
        (-refined.value, refined.x[0], refined.x[1])
    } else {
        (best_val, start.0, start.1)
    };
    let (theta, phi) = canonical_bloch(theta, phi);
    Ok(EntanglingPowerResult {
        value,
        bloch_theta: theta,
        bloch_phi: phi,
    })
}

/// Folds unconstrained Bloch angles back to `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
fn canonical_bloch(theta: f64, phi: f64) -> (f64, f64) {
    let mut t = theta.rem_euclid(std::f64::consts::TAU);
    let mut p = phi;
    if t > std::f64::consts::PI {
        t = std::f64::consts::TAU - t;
        p += std::f64::consts::PI;
    }
    (t, p.rem_euclid(std::f64::consts::TAU))
}

/// `max(p, q) · sin 2φ`; equals `p sin 2φ` in the physical regime `p ≥ q`.
/// The `p < q` branch mirrors it with the maximizing input `|0⟩`.
pub fn entangling_power_closed(p: f64, phi: f64) -> f64 {
    p.max(1.0 - p) * (2.0 * phi).sin()
}
