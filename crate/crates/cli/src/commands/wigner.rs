//! Wigner grids, ellipse geometry and optional rank-4 slices.

use serde_json::{json, Value};
use wvl_core::highrank::{wigner_rank4, ExtendedPhasePoint};
use wvl_core::wigner::{ellipse_geometry, phase_space_grid, wigner, PhasePoint};
use wvl_core::Axis;

use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::output::{num, OutputDir};

pub fn run(config: &ScenarioConfig, out: &mut OutputDir) -> CliResult<Value> {
    let history = config.history()?;
    let params = *history.params();
    let (nx, np) = (config.grid.x.points, config.grid.p.points);
    let mut minima = Vec::new();
    let mut ellipse = Vec::new();

    let times = config.wigner_times.clone().unwrap_or_else(|| config.times());
    for (i, &t) in times.iter().enumerate() {
        let s = history.state(t)?;
        let g = ellipse_geometry(&s, &params);
        ellipse.push(vec![
            num(t),
            num(g.a11),
            num(g.a12),
            num(g.a22),
            num(g.theta),
            num(g.det),
            num(g.area_at_unit_level),
        ]);

        for n in config.orders() {
            let box_ = phase_space_grid(n, &s, &params, 3)?;
            let xs = Axis::new(0.0, box_.axes[0].half_width, nx)?.coords();
            let ps = Axis::new(0.0, box_.axes[1].half_width, np)?.coords();
            let mut min = f64::INFINITY;
            let mut rows = Vec::with_capacity(nx * np);
            for &x in &xs {
                for &p in &ps {
                    let w = wigner(n, &s, &params, PhasePoint::new(x, p));
                    min = min.min(w);
                    rows.push(vec![num(x), num(p), num(w)]);
                }
            }
            out.csv(
                &format!("wigner_n{}_t{i:04}.csv", n.get()),
                &["x [length]", "p [momentum]", "W [1/action]"],
                rows,
            )?;
            minima.push(json!({ "n": n.get(), "t": t, "min": min }));
        }

        if let Some([p_dot, p_ddot]) = config.rank4_slice {
            let box_ = phase_space_grid(wvl_core::PolyOrder::new(0)?, &s, &params, 3)?;
            let xs = Axis::new(0.0, box_.axes[0].half_width, nx)?.coords();
            let ps = Axis::new(0.0, box_.axes[1].half_width, np)?.coords();
            let rows = xs.iter().flat_map(|&x| {
                ps.iter().map(move |&p| {
                    let pt = ExtendedPhasePoint::new(x, p, p_dot, p_ddot);
                    vec![num(x), num(p), num(wigner_rank4(&s, &params, pt, config.rank4_sign))]
                })
            });
            out.csv(&format!("rank4_t{i:04}.csv"), &["x [length]", "p [momentum]", "W4 [1/action^2]"], rows)?;
        }
    }

    out.csv(
        "ellipse_geometry.csv",
        &["t [time]", "a11", "a12", "a22", "theta [rad]", "det", "area [action/hbar]"],
        ellipse,
    )?;
    Ok(json!({ "grid_minima": minima }))
}
