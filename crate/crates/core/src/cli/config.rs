//! `--config` expansion: `key=value` lines become long flags inserted right
//! after the subcommand, skipping any flag already on the command line.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use clap::{Command, CommandFactory};

use super::{Cli, Failure};
use crate::error::Error;

fn config_path(args: &[String]) -> Option<(usize, String)> {
    for (i, a) in args.iter().enumerate().skip(1) {
        if a == "--config" {
            return args.get(i + 1).map(|p| (i, p.clone()));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some((i, p.to_string()));
        }
    }
    None
}

fn long_flags(cmd: &Command) -> impl Iterator<Item = (String, bool)> + '_ {
    cmd.get_arguments()
        .filter_map(|a| a.get_long().map(|l| (l.to_string(), a.get_action().takes_values())))
}

fn all_flags(cmd: &Command, into: &mut BTreeSet<String>) {
    into.extend(long_flags(cmd).map(|(l, _)| l));
    for sub in cmd.get_subcommands() {
        all_flags(sub, into);
    }
}

/// Position just past the subcommand path and the subcommand itself.
fn subcommand_path<'a>(root: &'a Command, args: &[String]) -> Option<(usize, &'a Command)> {
    let mut cmd = root;
    let mut pos = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            i += 2;
            continue;
        }
        if a.starts_with('-') {
            if pos.is_some() {
                break;
            }
            i += 1;
            continue;
        }
        match cmd.find_subcommand(a) {
            Some(sub) => {
                cmd = sub;
                pos = Some(i + 1);
                if !sub.has_subcommands() {
                    break;
                }
            }
            None => break,
        }
        i += 1;
    }
    pos.map(|p| (p, cmd))
}

pub(super) fn parse_config(text: &str, source_name: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Data(Error::parse(source_name, no + 1, format!("expected key=value, got `{line}`"))))?;
        pairs.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(pairs)
}

pub(super) fn expand(mut args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some((_, path)) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Data(Error::io(Path::new(&path), e)))?;
    let pairs = parse_config(&text, &path)?;

    let root = Cli::command();
    let mut known = BTreeSet::new();
    all_flags(&root, &mut known);
    if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.contains(k)) {
        return Err(Failure::Usage(format!("unknown config key `{k}` in {path}")));
    }
    let Some((insert_at, cmd)) = subcommand_path(&root, &args) else {
        return Ok(args);
    };
    let local: Vec<(String, bool)> = long_flags(cmd).collect();
    let given = |flag: &str| {
        args.iter()
            .any(|a| a == &format!("--{flag}") || a.starts_with(&format!("--{flag}=")))
    };
    let mut injected = Vec::new();
    for (key, value) in &pairs {
        let Some(&(_, takes_value)) = local.iter().find(|(l, _)| l == key) else {
            continue;
        };
        if key == "config" || given(key) {
            continue;
        }
        if takes_value {
            injected.push(format!("--{key}"));
            injected.push(value.clone());
        } else {
            match value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => injected.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                _ => return Err(Failure::Usage(format!("config key `{key}` expects true or false, got `{value}`"))),
            }
        }
    }
    args.splice(insert_at..insert_at, injected);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn with_config(text: &str, args: &[&str]) -> Result<Vec<String>, Failure> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        let p = f.path().to_str().unwrap().to_string();
        let mut a = strs(args);
        a.insert(1, p);
        a.insert(1, "--config".into());
        expand(a)
    }

    #[test]
    fn injects_after_subcommand_and_flags_win() {
        let out = with_config(
            "# defaults\nseed = 7\nvariant=ridge\nstandardize=true\natoms=9\n",
            &["dreamgen", "train-map", "--seed", "3"],
        )
        .unwrap();
        assert_eq!(out[3], "train-map");
        assert_eq!(&out[4..], strs(&["--variant", "ridge", "--standardize", "--seed", "3"]).as_slice());
    }

    #[test]
    fn nested_subcommand() {
        let out = with_config("n=5\ncell_dim=16\n", &["dreamgen", "synth", "vision"]).unwrap();
        assert_eq!(&out[3..], strs(&["synth", "vision", "--n", "5", "--cell-dim", "16"]).as_slice());
    }

    #[test]
    fn unknown_key_and_bad_bool() {
        assert!(matches!(with_config("colour=red\n", &["dreamgen", "eval"]), Err(Failure::Usage(_))));
        assert!(matches!(
            with_config("standardize=maybe\n", &["dreamgen", "train-map"]),
            Err(Failure::Usage(_))
        ));
        assert!(matches!(with_config("justtext\n", &["dreamgen", "eval"]), Err(Failure::Data(_))));
    }

    #[test]
    fn without_config_untouched() {
        let a = strs(&["dreamgen", "eval", "--mode", "random"]);
        assert_eq!(expand(a.clone()).unwrap(), a);
    }
}
