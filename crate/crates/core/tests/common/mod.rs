//! Independent reference implementations used as test oracles. Everything
//! here is written from the defining formulas on fixed-size matrices and
//! shares no code paths with the library beyond the optimizer.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64 as C;
use rand::Rng;
use rand_distr::StandardNormal;
use thermal_machines::optimize::{nelder_mead, NelderMeadOptions};
use thermal_machines::ComplexMatrix;

pub type M2 = Matrix2<C>;
pub type M4 = Matrix4<C>;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn cis(x: f64) -> C {
    C::from_polar(1.0, x)
}

/// The machine from its action on basis kets:
/// `|01⟩ ↦ e^{i(θ+α)}(cos φ|01⟩ + i sin φ|10⟩)`,
/// `|10⟩ ↦ e^{i(θ−α)}(cos φ|10⟩ + i sin φ|01⟩)`, `|00⟩`, `|11⟩` fixed.
pub fn machine(phi: f64, theta: f64, alpha: f64) -> M4 {
    let mut u = M4::zeros();
    u[(0, 0)] = c(1.0);
    u[(3, 3)] = c(1.0);
    let (a, b) = (cis(theta + alpha), cis(theta - alpha));
    // column 1 = image of |01⟩, column 2 = image of |10⟩
    u[(1, 1)] = a * phi.cos();
    u[(2, 1)] = a * C::i() * phi.sin();
    u[(2, 2)] = b * phi.cos();
    u[(1, 2)] = b * C::i() * phi.sin();
    u
}

pub fn to_m4(u: &ComplexMatrix) -> M4 {
    M4::from_fn(|i, j| u[(i, j)])
}

pub fn to_m2(u: &ComplexMatrix) -> M2 {
    M2::from_fn(|i, j| u[(i, j)])
}

pub fn kron(a: &M2, b: &M2) -> M4 {
    M4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

pub fn xi(p: f64) -> M2 {
    M2::new(c(p), c(0.0), c(0.0), c(1.0 - p))
}

pub fn qubit(d: f64, k: C) -> M2 {
    M2::new(c(d), k, k.conj(), c(1.0 - d))
}

/// `Tr_B` by explicit summation over the second index.
pub fn trace_out_second(m: &M4) -> M2 {
    M2::from_fn(|i, j| (0..2).map(|t| m[(2 * i + t, 2 * j + t)]).sum())
}

pub fn trace_out_first(m: &M4) -> M2 {
    M2::from_fn(|i, j| (0..2).map(|t| m[(2 * t + i, 2 * t + j)]).sum())
}

pub fn collide(rho: &M2, u: &M4, p: f64) -> M2 {
    trace_out_second(&(u * kron(rho, &xi(p)) * u.adjoint()))
}

pub fn max_abs<const R: usize, const K: usize>(
    m: &nalgebra::SMatrix<C, R, K>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn closed_d(d0: f64, p: f64, phi: f64, n: u32) -> f64 {
    let c2n = phi.cos().powi(2).powi(n as i32);
    (1.0 - c2n) * p + c2n * d0
}

pub fn closed_k(k0: C, p: f64, phi: f64, theta: f64, alpha: f64, n: u32) -> C {
    let lam = cis(alpha) * (cis(-theta) * p + cis(theta) * (1.0 - p));
    k0 * (lam * phi.cos()).powi(n as i32)
}

/// Trace distance of two qubit states from the Bloch-vector difference.
pub fn qubit_trace_distance(a: &M2, b: &M2) -> f64 {
    let dd = (a[(0, 0)] - b[(0, 0)]).re;
    let dk = a[(0, 1)] - b[(0, 1)];
    (dd * dd + dk.norm_sqr()).sqrt()
}

/// `(σy⊗σy)` written out entry by entry.
pub fn yy() -> M4 {
    let mut m = M4::zeros();
    m[(0, 3)] = c(-1.0);
    m[(1, 2)] = c(1.0);
    m[(2, 1)] = c(1.0);
    m[(3, 0)] = c(-1.0);
    m
}

/// Wootters concurrence the textbook way: spectrum of the non-Hermitian
/// `ρρ̃` via a complex Schur form, square roots, descending sort.
pub fn brute_concurrence(rho: &M4) -> f64 {
    let flipped = yy() * rho.conjugate() * yy();
    let r = DMatrix::from_fn(4, 4, |i, j| (rho * flipped)[(i, j)]);
    let ev = r.schur().eigenvalues().expect("complex Schur form has eigenvalues");
    let mut lam: Vec<f64> = ev.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

/// Pure two-qubit state concurrence `2|ad − bc|`.
pub fn pure_concurrence(psi: &[C; 4]) -> f64 {
    2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).norm()
}

pub fn gaussian_c<R: Rng + ?Sized>(rng: &mut R) -> C {
    C::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Hilbert-Schmidt random density matrix `GG†/Tr(GG†)` with `G` a 4×`rank`
/// complex Ginibre matrix.
pub fn random_density4<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> M4 {
    let g = DMatrix::from_fn(4, rank, |_, _| gaussian_c(rng));
    let m = &g * g.adjoint();
    let tr: C = m.trace();
    M4::from_fn(|i, j| m[(i, j)] / tr)
}

pub fn random_pure4<R: Rng + ?Sized>(rng: &mut R) -> [C; 4] {
    let v: [C; 4] = std::array::from_fn(|_| gaussian_c(rng));
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// Random qubit state with the population uniform and the coherence uniform
/// in the allowed disc.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> (f64, C) {
    let d: f64 = rng.random();
    let r = (d * (1.0 - d)).sqrt() * rng.random::<f64>().sqrt();
    (d, C::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU)))
}

/// `exp(i(aX + bY + cZ))`.
pub fn su2(a: f64, b: f64, cz: f64) -> M2 {
    let r = (a * a + b * b + cz * cz).sqrt();
    if r < 1e-300 {
        return M2::identity();
    }
    let (s, co) = r.sin_cos();
    let (nx, ny, nz) = (a / r, b / r, cz / r);
    let i = C::i();
    M2::new(
        c(co) + i * s * nz,
        i * s * C::new(nx, -ny),
        i * s * C::new(nx, ny),
        c(co) - i * s * nz,
    )
}

/// Best `|Tr(U₂† (A⊗B) U₁ (C⊗D))|/4` over local unitaries, found by simplex
/// searches from `restarts` random starting points. Equals 1 exactly when
/// the two gates are LU-equivalent.
pub fn lu_search<R: Rng + ?Sized>(u1: &M4, u2: &M4, restarts: usize, rng: &mut R) -> f64 {
    let u2d = u2.adjoint();
    let cost = |x: &[f64]| -> f64 {
        let left = kron(&su2(x[0], x[1], x[2]), &su2(x[3], x[4], x[5]));
        let right = kron(&su2(x[6], x[7], x[8]), &su2(x[9], x[10], x[11]));
        1.0 - (u2d * left * u1 * right).trace().norm() / 4.0
    };
    let opts = NelderMeadOptions {
        step: 0.4,
        tol: 1e-15,
        max_iter: 30_000,
    };
    let mut best = f64::INFINITY;
    for _ in 0..restarts {
        let x0: Vec<f64> = (0..12).map(|_| rng.random_range(-3.2..3.2)).collect();
        let mut m = nelder_mead(cost, &x0, opts);
        // re-seed the simplex where it stalled
        for _ in 0..3 {
            let again = nelder_mead(cost, &m.x, NelderMeadOptions { step: 0.05, ..opts });
            if again.value < m.value {
                m = again;
            }
        }
        best = best.min(m.value);
        if best < 1e-10 {
            break;
        }
    }
    1.0 - best
}

/// Makhlin invariants `(G₁, G₂)`: `m = U_Bᵀ U_B` in the magic basis,
/// `G₁ = tr²(m)/(16 det U)`, `G₂ = (tr²(m) − tr(m²))/(4 det U)`.
pub fn makhlin(u: &M4) -> (C, C) {
    let s = 1.0 / 2f64.sqrt();
    let i = C::i();
    #[rustfmt::skip]
    let q = M4::new(
        c(s), c(0.0), c(0.0), i * s,
        c(0.0), i * s, c(s), c(0.0),
        c(0.0), i * s, c(-s), c(0.0),
        c(s), c(0.0), c(0.0), -i * s,
    );
    let ub = q.adjoint() * u * q;
    let m = ub.transpose() * ub;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (m * m).trace();
    (tr * tr / (det * 16.0), (tr * tr - tr2) / (det * 4.0))
}

/// Two-qubit gate on qubits `(a, b)` of an `n`-qubit register (qubit 0 most
/// significant), as a full matrix built by index bookkeeping.
pub fn embed(u: &M4, n: usize, a: usize, b: usize) -> DMatrix<C> {
    let dim = 1 << n;
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    DMatrix::from_fn(dim, dim, |row, col| {
        let rest_mask = !((1 << (n - 1 - a)) | (1 << (n - 1 - b)));
        if row & rest_mask != col & rest_mask {
            return c(0.0);
        }
        let r = 2 * bit(row, a) + bit(row, b);
        let k = 2 * bit(col, a) + bit(col, b);
        u[(r, k)]
    })
}

/// Reduced state of qubit 0 by summing over all other indices.
pub fn reduce_to_first(m: &DMatrix<C>) -> M2 {
    let half = m.nrows() / 2;
    M2::from_fn(|i, j| (0..half).map(|t| m[(i * half + t, j * half + t)]).sum())
}

pub fn pure_fidelity(psi: &[C; 2], rho: &M2) -> f64 {
    let v = nalgebra::Vector2::new(psi[0], psi[1]);
    (v.adjoint() * rho * v)[(0, 0)].re
}
