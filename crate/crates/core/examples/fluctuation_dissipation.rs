//! Fluctuation-dissipation: the spread of the measured-equilibrium branches
//! equals the dissipation times a thermal prefactor.
//!
//!     cargo run --example fluctuation_dissipation

use thermal_machines::channel::BathSpec;
use thermal_machines::linalg::sigma_z;
use thermal_machines::thermo::{dissipation, fd_closed_form, fd_series};
use thermal_machines::MachineParams;

fn main() -> thermal_machines::Result<()> {
    let m = MachineParams::new(0.4, 0.7, 0.2)?;
    let energy = 1.0;
    // the system Hamiltonian as the observable
    let h = sigma_z().scale(num_complex::Complex64::new(-energy, 0.0));
    for beta in [0.0, 0.5, 2.0, f64::INFINITY] {
        let b = BathSpec::from_temperature(beta, energy)?;
        let series = fd_series(&m, &b, &h, 12)?;
        println!("beta = {beta}");
        for n in [1usize, 4, 12] {
            println!(
                "  n={n:>2} F={:.10} closed={:.10} D={:.6}",
                series[n],
                fd_closed_form(&h, &b, m.phi(), n as u32)?,
                dissipation(m.phi(), n as u32)
            );
        }
    }
    Ok(())
}
