//! Flat `key = value` config files merged under the command-line flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Command;

/// The `--config` value, if any.
fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_owned());
        }
    }
    None
}

pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), i + 1);
        };
        pairs.push((k.trim().replace('_', "-"), v.trim().to_owned()));
    }
    Ok(pairs)
}

/// Rewrites `argv` so the config file's settings come first and every flag
/// given on the command line follows them and wins.
pub fn merge(cmd: &mut Command, argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let pairs = read_pairs(Path::new(&path))?;
    cmd.build();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_owned()).collect();
    let Some(pos) = argv.iter().skip(1).position(|a| names.contains(a)).map(|p| p + 1) else {
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&argv[pos]).expect("known subcommand");
    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            continue;
        }
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            bail!("{path}: `{key}` is not an option of `{}`", sub.get_name());
        };
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}"));
            injected.push(value);
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => bail!("{path}: `{key}` expects true or false, got {value:?}"),
            }
        }
    }
    let mut merged = vec![argv[0].clone(), argv[pos].clone()];
    merged.extend(injected);
    merged.extend(argv[1..pos].iter().cloned());
    merged.extend(argv[pos + 1..].iter().cloned());
    Ok(merged)
}
