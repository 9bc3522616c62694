//! Which machines work in every basis? Scan θ at fixed φ: only the partial
//! swap θ = −φ commutes with every w⊗w.
//!
//!     cargo run --example partial_swap

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use thermal_machines::machines::{build_v, is_basis_independent};

fn main() -> thermal_machines::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phi = std::f64::consts::FRAC_PI_4;
    for j in 0..24 {
        let theta = j as f64 * TAU / 24.0;
        let ok = is_basis_independent(&build_v(phi, theta), 20, 1e-9, &mut rng)?;
        println!("theta = {theta:.4}: {}", if ok { "basis independent" } else { "-" });
    }
    Ok(())
}
