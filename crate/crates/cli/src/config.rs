//! Reading model parameters from JSON files and command-line values.

use std::fs;
use std::path::Path;

use sos_core::numeric::{c, Guard, C64};
use sos_core::params::ParamsWire;
use sos_core::ModelParams;

use crate::error::{CliError, CliResult};

/// Parses and validates a parameter document. `origin` labels errors.
pub fn parse_params_str(text: &str, origin: &str, guard: Guard) -> CliResult<ModelParams> {
    let wire: ParamsWire = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let params = ModelParams::try_from(wire)?;
    params.validate(guard)?;
    Ok(params)
}

pub fn parse_config(path: &Path, guard: Guard) -> CliResult<ModelParams> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_params_str(&text, &path.display().to_string(), guard)
}

/// `"RE,IM"` or a bare `"RE"`.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let mut parts = s.split(',').map(str::trim);
    let re = parts.next().unwrap_or_default();
    let im = parts.next().unwrap_or("0");
    if parts.next().is_some() {
        return Err(format!("expected RE,IM, got {s:?}"));
    }
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(c(num(re)?, num(im)?))
}

/// `NAME=VALUE` tolerance override.
pub fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("{value:?}: {e}"))?;
    if !(value > 0.0) {
        return Err(format!("tolerance {name} must be positive"));
    }
    Ok((name.trim().to_string(), value))
}
