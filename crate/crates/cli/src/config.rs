//! `--config` files: flat TOML tables whose keys are long flag names.

use std::ffi::OsString;
use std::path::Path;

use toml::Value;

use crate::CliError;

/// Turns `key = value` pairs into `--key value` arguments. `true` booleans
/// become bare flags, `false` ones are dropped and arrays are joined with
/// commas.
pub fn config_args(text: &str, path: &Path) -> Result<Vec<OsString>, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut args = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| -> Result<String, CliError> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Integer(i) => Ok(i.to_string()),
                Value::Float(f) => Ok(f.to_string()),
                other => Err(CliError::Usage(format!(
                    "{}: unsupported value for '{key}': {other}",
                    path.display()
                ))),
            }
        };
        match &value {
            Value::Boolean(true) => args.push(flag.into()),
            Value::Boolean(false) => {}
            Value::Array(items) => {
                let joined = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?.join(",");
                args.push(flag.into());
                args.push(joined.into());
            }
            v => {
                args.push(flag.into());
                args.push(scalar(v)?.into());
            }
        }
    }
    Ok(args)
}

/// Finds `--config PATH` / `--config=PATH` and the subcommand position.
pub fn locate(argv: &[OsString]) -> (Option<OsString>, Option<usize>) {
    let mut config = None;
    let mut subcommand = None;
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].to_string_lossy();
        if a == "--config" {
            config = argv.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.into());
        } else if subcommand.is_none() && !a.starts_with('-') {
            subcommand = Some(i);
        }
        i += 1;
    }
    (config, subcommand)
}
