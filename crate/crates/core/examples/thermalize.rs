//! Iterate the collision channel and compare with the closed-form solution.
//!
//!     cargo run --example thermalize

use num_complex::Complex64;
use thermal_machines::channel::{
    closed_form_state, distance_to_bath, iterate, lambda, BathSpec, IterationMode,
};
use thermal_machines::{MachineParams, QubitState};

fn main() -> thermal_machines::Result<()> {
    let machine = MachineParams::new(0.3, 0.4, 0.1)?;
    let bath = BathSpec::from_temperature(1.0, 0.8)?;
    let rho0 = QubitState::new(0.1, Complex64::new(0.2, -0.1))?;

    println!("p = {:.6}, lambda = {:.6}", bath.p(), lambda(bath.p(), 0.4, 0.1));
    let traj = iterate(&rho0, &machine, &bath, 60, IterationMode::Matrix);
    println!("{:>3} {:>10} {:>10} {:>12} {:>10}", "n", "d", "|k|", "dist to xi", "closed d");
    for (n, s) in traj.states().iter().enumerate().step_by(10) {
        let cf = closed_form_state(&rho0, &machine, &bath, n as u32);
        println!(
            "{n:>3} {:>10.6} {:>10.6} {:>12.3e} {:>10.6}",
            s.d(),
            s.k().norm(),
            distance_to_bath(s, &bath),
            cf.d()
        );
    }
    Ok(())
}
