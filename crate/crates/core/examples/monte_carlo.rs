//! Sampled pure-state trajectories reproduce the averaged channel.
//!
//!     cargo run --release --example monte_carlo

use thermal_machines::channel::{closed_form_d, BathSpec};
use thermal_machines::linalg::bloch_ket;
use thermal_machines::trajectories::{monte_carlo_populations, Sampling};
use thermal_machines::MachineParams;

fn main() -> thermal_machines::Result<()> {
    let psi = bloch_ket(2.3, 0.4);
    let m = MachineParams::new(0.3, 0.5, 0.0)?;
    let b = BathSpec::from_population(0.8)?;
    let steps = [1, 5, 10, 50];
    let est = monte_carlo_populations(&psi, &m, &b, &steps, 10_000, Sampling::Unravelled, 7)?;
    for e in est {
        let exact = closed_form_d(psi[0].norm_sqr(), b.p(), 0.3, e.n as u32);
        println!(
            "n={:>2}: sampled {:.5} +- {:.5}, exact {:.5}",
            e.n, e.mean, e.std_err, exact
        );
    }
    Ok(())
}
