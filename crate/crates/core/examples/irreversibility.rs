//! Undo a thermalization by replaying the collisions backwards. Only the
//! recorded order restores the initial state.
//!
//!     cargo run --release --example irreversibility

use thermal_machines::channel::BathSpec;
use thermal_machines::linalg::{bloch_ket, DensityMatrix};
use thermal_machines::trajectories::{
    forward_run, reconstruction_experiment, reduced_states_check, Mode,
};
use thermal_machines::MachineParams;

fn main() -> thermal_machines::Result<()> {
    let psi = bloch_ket(1.2, 0.5);
    let m = MachineParams::new(0.8, 0.4, 0.0)?;
    let b = BathSpec::from_population(0.8)?;

    let (js, _) = forward_run(&DensityMatrix::from_pure(&psi)?, 6, &m, &b, Mode::Exact, 0)?;
    let rep = reduced_states_check(&js, &b)?;
    println!("after 6 collisions: system distance to xi {:.4}", rep.system_distance);
    println!("ancilla distances to xi: {:.4?}", rep.ancilla_distances);

    for mode in [Mode::Exact, Mode::Sampled] {
        let r = reconstruction_experiment(&psi, 6, &m, &b, mode, 200, 42)?;
        let w = r.wrong_order.expect("6 collisions have wrong orders");
        println!(
            "{mode:?}: with key {:.12}, wrong order {:.4} +- {:.4} ({} orders), no key {:.4}",
            r.correct_fidelity, w.mean, w.std_err, w.count, r.no_key_fidelity
        );
    }
    Ok(())
}
