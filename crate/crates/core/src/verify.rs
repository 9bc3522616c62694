//! Self-check battery over the library's numerical invariants.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::channel::{
    bath_state, check_stationarity, closed_form_state, distance_to_bath, iterate, BathSpec,
    IterationMode,
};
use crate::entanglement::{entangling_power, entangling_power_closed, PowerSearch};
use crate::linalg::{bloch_ket, fidelity, ComplexMatrix, DensityMatrix, QubitState};
use crate::machines::{build_v, is_basis_independent, MachineParams};
use crate::thermo::{branch_mean, fd_closed_form, fd_protocol_simulated, rates_from_machine};
use crate::trajectories::{forward_run, reverse_run, Mode};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: value <= tolerance,
        value,
        tolerance,
    }
}

fn random_machine(rng: &mut ChaCha8Rng) -> MachineParams {
    MachineParams::new(
        rng.random_range(0.0..=FRAC_PI_2),
        rng.random_range(0.0..TAU),
        rng.random_range(0.0..TAU),
    )
    .expect("sampled in range")
}

fn random_state(rng: &mut ChaCha8Rng) -> QubitState {
    let d: f64 = rng.random();
    let r = (d * (1.0 - d)).sqrt() * rng.random::<f64>().sqrt();
    let k = Complex64::from_polar(r, rng.random_range(0.0..TAU));
    QubitState::new(d, k).expect("inside the Bloch ball")
}

fn p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn stationarity(rng: &mut ChaCha8Rng) -> Check {
    let ps = p_grid();
    let worst = (0..50)
        .map(|_| check_stationarity(&random_machine(rng), &ps).max_deviation)
        .fold(0.0, f64::max);
    check("stationarity", worst, 1e-12)
}

fn closed_form_agreement(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let m = random_machine(rng);
        let b = BathSpec::from_population(rng.random()).expect("in [0, 1]");
        let rho0 = random_state(rng);
        let traj = iterate(&rho0, &m, &b, 50, IterationMode::Matrix);
        for n in [1u32, 5, 50] {
            let cf = closed_form_state(&rho0, &m, &b, n);
            let got = &traj[n as usize];
            worst = worst.max((got.d() - cf.d()).abs()).max((got.k() - cf.k()).norm());
        }
    }
    check("closed_form_agreement", worst, 1e-11)
}

fn convergence(rng: &mut ChaCha8Rng) -> Check {
    // count of steps where the distance to ξ grew, beyond round-off
    let mut violations = 0usize;
    for _ in 0..20 {
        let mut m = random_machine(rng);
        if m.phi() < 0.05 {
            m = MachineParams::new(0.05, m.theta(), m.alpha()).expect("valid");
        }
        let b = BathSpec::from_population(rng.random()).expect("in [0, 1]");
        let traj = iterate(&random_state(rng), &m, &b, 200, IterationMode::Matrix);
        let dist: Vec<f64> = traj.states().iter().map(|s| distance_to_bath(s, &b)).collect();
        violations += dist.windows(2).filter(|w| w[1] > w[0] + 1e-14).count();
    }
    check("monotone_convergence", violations as f64, 0.0)
}

fn observable(rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let (a, d) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let off = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    ComplexMatrix::new(2, &[Complex64::new(a, 0.0), off, off.conj(), Complex64::new(d, 0.0)])
        .expect("2x2")
}

fn fd_identity(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let a = observable(rng);
        let b = BathSpec::from_temperature(rng.random_range(0.0..3.0), 1.0).expect("valid bath");
        let m = random_machine(rng);
        let n = rng.random_range(0..40u32);
        let sim = fd_protocol_simulated(&m, &b, &a, n as usize).expect("hermitian");
        let cf = fd_closed_form(&a, &b, m.phi(), n).expect("hermitian");
        worst = worst.max((sim - cf).abs());
    }
    check("fd_identity", worst, 1e-12)
}

fn branch_average(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b = BathSpec::from_population(rng.random()).expect("in [0, 1]");
        let m = random_machine(rng);
        let mean = branch_mean(&m, &b, rng.random_range(0..30));
        worst = worst.max(mean.max_abs_diff(bath_state(&b).matrix()));
    }
    check("branch_average_is_thermal", worst, 1e-12)
}

fn relaxation_bound(rng: &mut ChaCha8Rng) -> Check {
    // relative excess of T2 over 2 T1
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let phi = rng.random_range(0.01..FRAC_PI_2);
        let r = rates_from_machine(phi, rng.random_range(-PI..PI), 1e-3, rng.random())
            .expect("phi > 0");
        worst = worst.max((r.t2 - 2.0 * r.t1) / r.t1);
    }
    check("t2_at_most_2t1", worst.max(0.0), 1e-12)
}

fn partial_swap(rng: &mut ChaCha8Rng) -> Check {
    let phi = rng.random_range(0.05..FRAC_PI_2);
    let swap_like = is_basis_independent(&build_v(phi, -phi), 20, 1e-9, rng).expect("4x4");
    let other = is_basis_independent(&build_v(phi, 0.3 - phi), 20, 1e-9, rng).expect("4x4");
    check("partial_swap_unique", f64::from(u8::from(!swap_like || other)), 0.0)
}

fn entangling(rng: &mut ChaCha8Rng) -> Check {
    let (p, phi) = (rng.random_range(0.55..1.0), rng.random_range(0.1..1.4));
    let m = MachineParams::new(phi, rng.random_range(0.0..TAU), 0.0).expect("valid");
    let b = BathSpec::from_population(p).expect("in [0, 1]");
    let r = entangling_power(&m, &b, PowerSearch::default()).expect("default grid");
    check("entangling_power", (r.value - entangling_power_closed(p, phi)).abs(), 1e-6)
}

fn reversal(rng: &mut ChaCha8Rng) -> Check {
    let psi = bloch_ket((1.0 - 2.0 * rng.random::<f64>()).acos(), rng.random_range(0.0..TAU));
    let rho0 = DensityMatrix::from_pure(&psi).expect("normalized");
    let b = BathSpec::from_population(rng.random_range(0.5..1.0)).expect("in [0, 1]");
    let m = random_machine(rng);
    let (js, rec) = forward_run(&rho0, 5, &m, &b, Mode::Exact, 0).expect("within limit");
    let back = reverse_run(&js, &rec, &rec.reverse_order()).expect("permutation");
    check("keyed_reversal", 1.0 - fidelity(&psi, &back), 1e-10)
}

/// Runs every check with inputs drawn from a generator seeded by `seed`.
pub fn run_battery(seed: u64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        stationarity(&mut rng),
        closed_form_agreement(&mut rng),
        convergence(&mut rng),
        fd_identity(&mut rng),
        branch_average(&mut rng),
        relaxation_bound(&mut rng),
        partial_swap(&mut rng),
        entangling(&mut rng),
        reversal(&mut rng),
    ];
    VerifyReport { seed, checks }
}
