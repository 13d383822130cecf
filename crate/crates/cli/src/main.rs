mod args;
mod commands;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, ExperimentConfig, Task};
use unitroot_core::Error;

const PASS: u8 = 0;
const MISMATCH: u8 = 1;
const USAGE: u8 = 2;
const RESOURCE: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Resource(_) | Error::Precision(_) | Error::Convergence(_) | Error::Stabilization(_) | Error::Window(_) => RESOURCE,
        e if e.is_usage() => USAGE,
        _ => MISMATCH,
    }
}

fn read_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_value(raw.clone()).map_err(|e| format!("{}: {e}", path.display()))?;
    let known: BTreeSet<String> = match serde_json::to_value(&cfg) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => BTreeSet::new(),
    };
    if let Value::Object(m) = &raw {
        if let Some(k) = m.keys().find(|k| !known.contains(*k)) {
            return Err(format!("{}: unknown field '{k}'", path.display()));
        }
    }
    Ok(cfg)
}

fn emit(doc: &Value, out: Option<&PathBuf>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| e.to_string())?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(task: Task, out: Option<&PathBuf>) -> u8 {
    let command = commands::name(&task);
    let inputs = serde_json::to_value(&task).unwrap_or(Value::Null);
    let (doc, code) = match commands::run(task) {
        Ok(report) => {
            let code = if report.passed() { PASS } else { MISMATCH };
            (serde_json::to_value(&report).unwrap_or(Value::Null), code)
        }
        Err(e) => {
            eprintln!("unitroot {command}: {e}");
            (json!({ "command": command, "inputs": inputs, "error": e.to_string(), "status": "error" }), exit_code(&e))
        }
    };
    if let Err(e) = emit(&doc, out) {
        eprintln!("unitroot: {e}");
        return USAGE;
    }
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Task(task) => execute(task, cli.out.as_ref()),
        Command::Run { config } => match read_config(&config) {
            Ok(cfg) => execute(cfg.task, cli.out.as_ref().or(cfg.out.as_ref())),
            Err(e) => {
                eprintln!("unitroot run: {e}");
                USAGE
            }
        },
    };
    ExitCode::from(code)
}
