//! Width history, densities, the `C = 0` velocity field and potentials.

use serde_json::{json, Value};
use wvl_core::vlasov::{density, velocity_field, FlowParams};
use wvl_core::wavefunction::{potential_u1, quantum_potential};
use wvl_core::{Axis, SigmaState};

use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::output::{num, OutputDir};

pub fn run(config: &ScenarioConfig, out: &mut OutputDir) -> CliResult<Value> {
    let history = config.history()?;
    let params = *history.params();
    let times = config.times();
    let states: Vec<SigmaState> = times.iter().map(|&t| history.state(t)).collect::<Result<_, _>>()?;

    out.csv(
        "sigma.csv",
        &[
            "t [time]",
            "sigma [length]",
            "sigma_dot [length/time]",
            "sigma_ddot [length/time^2]",
            "omega_squared [1/time^2]",
        ],
        states.iter().map(|s| {
            vec![
                num(s.t),
                num(s.sigma),
                num(s.sigma_dot),
                num(s.sigma_ddot),
                num(wvl_core::dynamics::omega_squared(s, &params)),
            ]
        }),
    )?;

    let sigma_max = states.iter().map(|s| s.sigma).fold(0.0, f64::max);
    let sigma_min = states.iter().map(|s| s.sigma).fold(f64::INFINITY, f64::min);
    let points = config.grid.x.points;
    for n in config.orders() {
        let axis = Axis::symmetric(8.0 * sigma_max * (2.0 * n.as_f64() + 1.0).sqrt(), points)?;
        let xs = axis.coords();
        let rows = states.iter().flat_map(|s| xs.iter().map(move |&x| vec![num(s.t), num(x), num(density(n, s, x))]));
        out.csv(&format!("density_{}.csv", n.get()), &["t [time]", "x [length]", "f [1/length]"], rows)?;
    }

    let widest = config.orders().into_iter().max().expect("validated non-empty");
    let axis = Axis::symmetric(8.0 * sigma_max * (2.0 * widest.as_f64() + 1.0).sqrt(), points)?;
    let xs = axis.coords();
    let flow = FlowParams { c: 0.0, x0: 0.0 };
    let mut rows = Vec::with_capacity(states.len() * xs.len());
    for s in &states {
        for &x in &xs {
            rows.push(vec![num(s.t), num(x), num(velocity_field(widest, s, &flow, x)?)]);
        }
    }
    out.csv("velocity.csv", &["t [time]", "x [length]", "v [length/time]"], rows)?;

    let mut rows = Vec::new();
    for s in &states {
        for n in config.orders() {
            for &x in &xs {
                rows.push(vec![
                    num(s.t),
                    n.get().to_string(),
                    num(x),
                    num(potential_u1(s, &params, x)),
                    num(quantum_potential(n, s, &params, x)),
                ]);
            }
        }
    }
    out.csv("potential.csv", &["t [time]", "n", "x [length]", "U [energy]", "Q [energy]"], rows)?;

    Ok(json!({ "samples": states.len(), "sigma_min": sigma_min, "sigma_max": sigma_max }))
}
