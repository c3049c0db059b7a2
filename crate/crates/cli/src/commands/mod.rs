pub mod figure;
pub mod flow;
pub mod submersion;
pub mod verify;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::report::Stamp;

pub(crate) fn stamp(
    command: &str,
    seed: u64,
    tolerances: &BTreeMap<String, f64>,
    grid: impl Serialize,
) -> Stamp {
    let grid = match serde_json::to_value(grid).expect("grid serializes") {
        serde_json::Value::Object(m) => m.into_iter().collect(),
        other => BTreeMap::from([("value".to_string(), other)]),
    };
    Stamp {
        tool: "psclab",
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        seed,
        tolerances: tolerances.clone(),
        grid,
    }
}

/// Shortest decimal that round-trips, for check ids and file names.
pub(crate) fn num(x: f64) -> String {
    format!("{x}")
}
