//! Largest concurrence a machine can create between the system and one bath
//! qubit, compared with p sin 2φ.
//!
//!     cargo run --release --example entangling_power

use thermal_machines::channel::BathSpec;
use thermal_machines::entanglement::{entangling_power, entangling_power_closed, PowerSearch};
use thermal_machines::MachineParams;

fn main() -> thermal_machines::Result<()> {
    for p in [0.6, 0.8, 1.0] {
        for phi in [0.2, std::f64::consts::FRAC_PI_4, 1.2] {
            let b = BathSpec::from_population(p)?;
            let r = entangling_power(&MachineParams::new(phi, 0.9, 0.3)?, &b, PowerSearch::default())?;
            println!(
                "p={p:.1} phi={phi:.4}: max C = {:.10}  p sin 2phi = {:.10}  |<1|psi>|^2 = {:.6}",
                r.value,
                entangling_power_closed(p, phi),
                r.excited_fidelity()
            );
        }
    }
    Ok(())
}
