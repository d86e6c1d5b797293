//! Floquet raster over the Mathieu `(a, g)` plane.

use serde_json::{json, Value};
use wvl_core::dynamics::{ince_strutt_raster, Stability};

use crate::config::ScenarioConfig;
use crate::error::CliResult;
use crate::output::{num, OutputDir};

pub fn run(config: &ScenarioConfig, out: &mut OutputDir) -> CliResult<Value> {
    let s = &config.stability;
    let raster = ince_strutt_raster((s.a[0], s.a[1]), (s.g[0], s.g[1]), s.resolution, s.step)?;
    let count = |c: Stability| raster.iter().filter(|v| v.classification == c).count();
    let summary = json!({
        "cells": raster.len(),
        "stable": count(Stability::Stable),
        "unstable": count(Stability::Unstable),
        "marginal": count(Stability::Marginal),
    });
    out.csv(
        "incestrutt.csv",
        &["a", "g", "trace", "class"],
        raster.iter().map(|v| vec![num(v.a), num(v.g), num(v.trace), v.classification.to_string()]),
    )?;
    Ok(summary)
}
