//! T1, T2 and the phase-fluctuation time, the bound T2 ≤ 2T1, and how the
//! discrete dynamics approaches the exponentials as τ0 → 0.
//!
//!     cargo run --example relaxation_rates

use num_complex::Complex64;
use thermal_machines::channel::{iterate, BathSpec, IterationMode};
use thermal_machines::thermo::{discrete_limit_check, fit_relaxation, rates_from_machine, LimitScenario};
use thermal_machines::{MachineParams, QubitState};

fn main() -> thermal_machines::Result<()> {
    let tau0 = 1e-3;
    for (phi, theta, p) in [(0.05, 0.0, 0.8), (0.05, 0.03, 0.8), (0.05, 0.03, 1.0), (0.05, 0.1, 0.5)] {
        let r = rates_from_machine(phi, theta, tau0, p)?;
        println!(
            "phi={phi} theta={theta} p={p}: T1={:.4} T2={:.4} Tpf={:.4} T2/(2T1)={:.4} saturated={}",
            r.t1,
            r.t2,
            r.tpf,
            r.t2 / (2.0 * r.t1),
            r.bound_saturated()
        );
    }

    let m = MachineParams::new(0.05, 0.03, 0.0)?;
    let b = BathSpec::from_population(0.8)?;
    let traj = iterate(&QubitState::new(0.2, Complex64::new(0.3, 0.0))?, &m, &b, 2000, IterationMode::Analytic);
    let (t1, t2) = fit_relaxation(&traj, &b, tau0)?;
    println!("fitted from 2000 collisions: T1={t1:.4} T2={t2:.4}");

    let sc = LimitScenario { t1: 0.5, tpf: 1.0, p: 0.8, t: 1.0, d0: 0.1, k0_mag: 0.3 };
    println!("{:>8} {:>7} {:>12} {:>12}", "tau0", "n", "env1 err", "env2 err");
    for row in discrete_limit_check(&sc, &[1e-1, 1e-2, 1e-3, 1e-4])? {
        println!(
            "{:>8.0e} {:>7} {:>12.3e} {:>12.3e}",
            row.tau0, row.n, row.envelope1_rel_err, row.envelope2_rel_err
        );
    }
    Ok(())
}
