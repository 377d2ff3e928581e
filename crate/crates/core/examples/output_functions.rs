//! Output maps: built-ins, a user-supplied map, assumption checks and the
//! antiderivatives behind the Lyapunov functions.

use etcon::nonlinearity::{validate_assumption, Component};
use etcon::prelude::*;

fn main() {
    let sat = OutputFunction::saturation(1, 1.0);
    let id = OutputFunction::identity(1);
    let tanh = OutputFunction::from_components(vec![Component::custom(
        "tanh",
        f64::tanh,
        1.0,
        1.0 - 1f64.tanh().powi(2),
    )])
    .unwrap();
    let dead = OutputFunction::from_components(vec![Component::custom(
        "deadzone",
        |x: f64| if x.abs() < 0.5 { 0.0 } else { x },
        1.0,
        1.0,
    )])
    .unwrap();

    for (name, f) in [
        ("sat_1", &sat),
        ("identity", &id),
        ("tanh", &tanh),
        ("deadzone", &dead),
    ] {
        let report = validate_assumption(f, 10.0, 2001);
        let c = &report.components[0];
        let failed: Vec<u8> = c
            .parts
            .iter()
            .filter(|p| !p.passed)
            .map(|p| p.part)
            .collect();
        println!(
            "{name:>9}: passed = {}, failed parts {failed:?}, K estimate {:.3}, slope on band {:.3}",
            report.passed(),
            c.lipschitz_estimate,
            c.varrho_estimate
        );
    }

    println!("G(x) = integral of g(s) - g(a) from a to x, a = 0.3:");
    for x in [-5.0, -1.0, 0.3, 1.0, 5.0] {
        println!(
            "  x = {x:>4}: sat {:.4}, identity {:.4}, tanh {:.4}",
            sat.antiderivative(0, 0.3, x).unwrap(),
            id.antiderivative(0, 0.3, x).unwrap(),
            tanh.antiderivative(0, 0.3, x).unwrap()
        );
    }
}
