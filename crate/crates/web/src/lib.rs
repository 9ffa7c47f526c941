//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every function takes and returns strings so the page needs no glue
//! beyond the generated bindings.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use entctl::{build, emit_report, parse_instance_str, run_command, serialize_instance, Command, Format, Options};
use entropy_core::Method;

const SAMPLES: [(&str, &str); 8] = [
    ("beta-shift", include_str!("../../cli/instances/beta-shift.json")),
    ("zero-endo", include_str!("../../cli/instances/zero-endo.json")),
    ("mixed-blocks", include_str!("../../cli/instances/mixed-blocks.json")),
    ("symmetric-shift", include_str!("../../cli/instances/symmetric-shift.json")),
    ("bridge-sum", include_str!("../../cli/instances/bridge-sum.json")),
    ("left-shift", include_str!("../../cli/instances/left-shift.json")),
    ("right-shift", include_str!("../../cli/instances/right-shift.json")),
    ("depth-shift", include_str!("../../cli/instances/depth-shift.json")),
];

fn failure(code: i32, message: impl Into<String>) -> String {
    json!({"status": "error", "exit_code": code, "message": message.into()}).to_string()
}

/// Names of the bundled instances, as a JSON array.
#[wasm_bindgen]
pub fn samples() -> String {
    Value::from(SAMPLES.iter().map(|(n, _)| *n).collect::<Vec<_>>()).to_string()
}

/// Text of a bundled instance, or an empty string.
#[wasm_bindgen]
pub fn sample(name: &str) -> String {
    SAMPLES.iter().find(|(n, _)| *n == name).map_or(String::new(), |(_, t)| t.to_string())
}

/// Runs `command` on an instance; returns the JSON report, or an error
/// object carrying the exit code the command line would use.
#[wasm_bindgen]
pub fn compute(command: &str, instance: &str, method: &str) -> String {
    let cmd: Command = match command.parse() {
        Ok(c) => c,
        Err(e) => return failure(3, e),
    };
    let method: Method = match method.parse() {
        Ok(m) => m,
        Err(e) => return failure(3, e),
    };
    let outcome = parse_instance_str(instance)
        .and_then(|inst| build(&inst))
        .and_then(|model| run_command(cmd, &model, &Options { method, jobs: 1 }));
    match outcome {
        Ok(report) => emit_report(&report, Format::Json),
        Err(e) => failure(e.class.code(), e.message),
    }
}

/// Checks an instance and returns its canonical pretty-printed form.
#[wasm_bindgen]
pub fn canonical(instance: &str) -> String {
    match parse_instance_str(instance).and_then(|inst| build(&inst).map(|_| inst)) {
        Ok(inst) => json!({"status": "ok", "canonical": serialize_instance(&inst)}).to_string(),
        Err(e) => failure(e.class.code(), e.message),
    }
}
