//! TOML config files, applied as flags placed before the user's own flags so
//! the command line wins.
//!
//! Top-level keys apply to every subcommand that has the flag; a table named
//! after a subcommand applies only to it. Keys may use `-` or `_`.

use std::ffi::OsString;
use std::fs;

use clap::{ArgAction, Command};
use toml::{Table, Value};

use crate::CliError;

fn normalize(key: &str) -> String {
    key.replace('_', "-")
}

fn locate_subcommand(argv: &[OsString], cmd: &Command) -> Option<usize> {
    argv.iter()
        .enumerate()
        .skip(1)
        .find(|(_, a)| a.to_str().is_some_and(|s| cmd.find_subcommand(s).is_some()))
        .map(|(i, _)| i)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn value_text(key: &str, v: &Value) -> Result<String, CliError> {
    Ok(match v {
        Value::String(s) => s.clone(),
        Value::Integer(i) => i.to_string(),
        Value::Float(f) => {
            if f.is_infinite() {
                if *f > 0.0 {
                    "inf".into()
                } else {
                    "-inf".into()
                }
            } else {
                f.to_string()
            }
        }
        Value::Array(items) => items
            .iter()
            .map(|i| value_text(key, i))
            .collect::<Result<Vec<_>, _>>()?
            .join(","),
        Value::Boolean(_) | Value::Datetime(_) | Value::Table(_) => {
            return Err(CliError::Usage(format!(
                "config key `{key}` has an unsupported value type"
            )));
        }
    })
}

fn push_pair(out: &mut Vec<OsString>, sub: &Command, key: &str, v: &Value) -> Result<(), CliError> {
    let name = normalize(key);
    let arg = sub
        .get_arguments()
        .find(|a| a.get_long() == Some(name.as_str()) && name != "config")
        .ok_or_else(|| {
            CliError::Usage(format!(
                "unknown config key `{key}` for `{}`",
                sub.get_name()
            ))
        })?;
    if matches!(arg.get_action(), ArgAction::SetTrue) {
        match v {
            Value::Boolean(true) => out.push(format!("--{name}").into()),
            Value::Boolean(false) => {}
            _ => {
                return Err(CliError::Usage(format!(
                    "config key `{key}` expects true or false"
                )))
            }
        }
        return Ok(());
    }
    out.push(format!("--{name}").into());
    out.push(value_text(key, v)?.into());
    Ok(())
}

/// Return `argv` with the config file's flags inserted right after the
/// subcommand name. Unchanged when no `--config` is given.
pub fn inject(argv: Vec<OsString>, cmd: &Command) -> Result<Vec<OsString>, CliError> {
    let Some(idx) = locate_subcommand(&argv, cmd) else {
        return Ok(argv);
    };
    let Some(path) = config_path(&argv[idx + 1..]) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::Io(format!(
            "cannot read config {}: {e}",
            path.to_string_lossy()
        ))
    })?;
    let table: Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.to_string_lossy())))?;
    let sub_name = argv[idx].to_string_lossy().into_owned();
    let sub = cmd.find_subcommand(&sub_name).expect("located above");
    let subcommand_names: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();

    let mut injected = Vec::new();
    for (key, value) in &table {
        let name = normalize(key);
        if let Value::Table(inner) = value {
            if !subcommand_names.contains(&name.as_str()) {
                return Err(CliError::Usage(format!("unknown config table `[{key}]`")));
            }
            if name == sub_name {
                for (k, v) in inner {
                    push_pair(&mut injected, sub, k, v)?;
                }
            } else {
                let other = cmd.find_subcommand(&name).expect("known subcommand");
                for (k, v) in inner {
                    // still reject typos in tables for other subcommands
                    push_pair(&mut Vec::new(), other, k, v)?;
                }
            }
            continue;
        }
        if sub
            .get_arguments()
            .any(|a| a.get_long() == Some(name.as_str()))
        {
            push_pair(&mut injected, sub, key, value)?;
        } else if !cmd.get_subcommands().any(|s| {
            s.get_arguments()
                .any(|a| a.get_long() == Some(name.as_str()))
        }) {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
    }
    let mut out = argv[..=idx].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[idx + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::Cli;
    use clap::CommandFactory;

    fn injected(toml: &str, argv: &[&str]) -> Result<Vec<String>, CliError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, toml).unwrap();
        let mut full: Vec<OsString> = argv.iter().map(Into::into).collect();
        full.push("--config".into());
        full.push(path.clone().into());
        let out = inject(full, &Cli::command())?;
        Ok(out
            .into_iter()
            .map(|s| s.to_string_lossy().into_owned())
            .take_while(|s| s != "--config")
            .collect())
    }

    #[test]
    fn flags_go_before_user_flags() {
        let out = injected(
            "[rate-curve]\nn = [1, 2]\nsqueeze_db = [inf, 10.0]\n",
            &["gkp-link", "rate-curve", "--n", "5"],
        )
        .unwrap();
        assert_eq!(
            out,
            [
                "gkp-link",
                "rate-curve",
                "--n",
                "1,2",
                "--squeeze-db",
                "inf,10",
                "--n",
                "5"
            ]
        );
    }

    #[test]
    fn booleans_map_to_switches() {
        let out = injected(
            "[csum-fidelity]\nbs-noise = true\n",
            &["gkp-link", "csum-fidelity"],
        )
        .unwrap();
        assert_eq!(out, ["gkp-link", "csum-fidelity", "--bs-noise"]);
        let out = injected(
            "[csum-fidelity]\nbs-noise = false\n",
            &["gkp-link", "csum-fidelity"],
        )
        .unwrap();
        assert_eq!(out, ["gkp-link", "csum-fidelity"]);
        assert!(injected(
            "[csum-fidelity]\nbs-noise = 1\n",
            &["gkp-link", "csum-fidelity"]
        )
        .is_err());
    }

    #[test]
    fn top_level_keys_apply_where_known() {
        let out = injected(
            "trials = 10\nformat = \"jsonl\"\n",
            &["gkp-link", "rate-curve"],
        )
        .unwrap();
        assert_eq!(out, ["gkp-link", "rate-curve", "--format", "jsonl"]);
        let out = injected("trials = 10\n", &["gkp-link", "swap-mc"]).unwrap();
        assert_eq!(out, ["gkp-link", "swap-mc", "--trials", "10"]);
    }

    #[test]
    fn rejects_typos_everywhere() {
        assert!(matches!(
            injected("tirals = 1\n", &["gkp-link", "swap-mc"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            injected("[swap-mc]\ntirals = 1\n", &["gkp-link", "rate-curve"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            injected("config = \"x\"\n", &["gkp-link", "swap-mc"]),
            Err(CliError::Usage(_))
        ));
    }
}
