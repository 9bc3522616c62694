//! Canonical parameters and local-unitary classes of the machine family.
//!
//!     cargo run --example lu_classification

use std::f64::consts::{FRAC_PI_2, PI};
use thermal_machines::machines::{canonical_params, dynamically_equivalent, lu_equivalent};
use thermal_machines::MachineParams;

fn main() -> thermal_machines::Result<()> {
    let pairs = [
        ((0.5, 0.3, 0.1), (0.5, 0.3, 2.0)),
        ((0.5, 0.3, 0.0), (0.5, 0.3 + PI, 0.0)),
        ((0.5, 0.3, 0.0), (0.4, 0.3, 0.0)),
        ((0.5, 0.3, 0.0), (0.5, -0.3, 0.0)),
        ((FRAC_PI_2, 0.3, 0.0), (FRAC_PI_2, -0.3, 0.0)),
    ];
    for (a, b) in pairs {
        let m1 = MachineParams::new(a.0, a.1, a.2)?;
        let m2 = MachineParams::new(b.0, b.1, b.2)?;
        let (c1, c2) = (canonical_params(a.0, a.1), canonical_params(b.0, b.1));
        println!(
            "{a:?} vs {b:?}: dynamical {}, LU {}, mu_z {:.4} / {:.4}",
            dynamically_equivalent(&m1, &m2),
            lu_equivalent(&m1, &m2),
            c1.mu_z,
            c2.mu_z
        );
    }
    Ok(())
}
