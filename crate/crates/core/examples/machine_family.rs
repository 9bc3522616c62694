//! The thermalizing machines: stationarity of ξ⊗ξ, the Bell-diagonal and
//! Hamiltonian forms, and the partial swap.
//!
//!     cargo run --example machine_family

use num_complex::Complex64;
use thermal_machines::channel::check_stationarity;
use thermal_machines::machines::{
    build_machine, build_v, exp_i_bell_diagonal, hamiltonian_form, phase_gate, swap,
};
use thermal_machines::linalg::tensor;
use thermal_machines::{ComplexMatrix, MachineParams};

fn main() -> thermal_machines::Result<()> {
    let ps: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for (phi, theta, alpha) in [(0.2, 0.0, 0.0), (0.7, 1.3, 0.4), (1.5707963267948966, 2.0, 5.0)] {
        let m = MachineParams::new(phi, theta, alpha)?;
        let rep = check_stationarity(&m, &ps);
        println!(
            "U({phi:.3}, {theta:.3}, {alpha:.3}): unitary = {}, max |U(xi x xi)U' - xi x xi| = {:.1e}",
            build_machine(&m).is_unitary(1e-13),
            rep.max_deviation
        );
    }

    // V(φ,θ) = e^{iθ/2} exp(iH) with H = ½[φ(XX + YY) − θ ZZ]
    let (phi, theta) = (0.6, 0.9);
    let from_h = exp_i_bell_diagonal(&hamiltonian_form(phi, theta))
        .scale(Complex64::from_polar(1.0, theta / 2.0));
    println!("Hamiltonian form vs V: {:.1e}", from_h.max_abs_diff(&build_v(phi, theta)));

    // V = U · (u(α) ⊗ u(−α))
    let alpha = 0.8;
    let u = build_machine(&MachineParams::new(phi, theta, alpha)?);
    let local = tensor(&phase_gate(alpha), &phase_gate(-alpha))?;
    println!("U(u(a) x u(-a)) vs V: {:.1e}", (&u * &local).max_abs_diff(&build_v(phi, theta)));

    // V(φ,−φ) = e^{−iφ}(cos φ I + i sin φ SWAP)
    let id = ComplexMatrix::identity(4)?;
    let ps = (id.scale(Complex64::new(phi.cos(), 0.0)) + swap().scale(Complex64::new(0.0, phi.sin())))
        .scale(Complex64::from_polar(1.0, -phi));
    println!("partial swap vs V(phi, -phi): {:.1e}", ps.max_abs_diff(&build_v(phi, -phi)));
    Ok(())
}
