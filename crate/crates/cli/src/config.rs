//! `--config FILE` support: `key = value` lines become long flags inserted
//! right after the subcommand, ahead of the user's own flags, so anything
//! given on the command line overrides the file.

use std::ffi::OsString;
use std::fs;

use clap::CommandFactory;

use crate::args::Cli;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter().skip(1);
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", n + 1));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Returns `args` with config-file entries spliced in after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let entries = parse_config(&text)?;

    let cmd = Cli::command();
    let sub_names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let Some(pos) = args
        .iter()
        .position(|a| sub_names.iter().any(|n| a.to_string_lossy() == n.as_str()))
    else {
        return Ok(args);
    };
    let sub_name = args[pos].to_string_lossy().into_owned();
    let sub = cmd.find_subcommand(&sub_name).expect("subcommand exists");

    let mut inserted: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let arg = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str()));
        match arg {
            Some(arg) if !arg.get_action().takes_values() => {
                match value.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "1" | "on" | "" => inserted.push(format!("--{key}").into()),
                    "false" | "no" | "0" | "off" => {}
                    other => return Err(format!("config key {key}: expected a boolean, got {other:?}")),
                }
            }
            Some(_) => inserted.push(format!("--{key}={value}").into()),
            None => {
                let known_elsewhere = cmd
                    .get_subcommands()
                    .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key.as_str())));
                if !known_elsewhere {
                    return Err(format!("unknown config key {key:?}"));
                }
            }
        }
    }

    let mut out = args;
    let tail = out.split_off(pos + 1);
    out.extend(inserted);
    out.extend(tail);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parse_lines() {
        let cfg = parse_config("# comment\nchunk = 4096\n\ncache_filter=true # inline\n").unwrap();
        assert_eq!(
            cfg,
            vec![("chunk".into(), "4096".into()), ("cache-filter".into(), "true".into())]
        );
        assert!(parse_config("nonsense").is_err());
        assert!(parse_config("=3").is_err());
    }

    #[test]
    fn entries_go_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "format = csv\nk_binary = true\nchunk = 16\nrepeats=2\n").unwrap();
        let p = path.to_string_lossy().into_owned();
        let out = expand(os(&["chunkfft", "--config", &p, "bench", "--repeats", "5"])).unwrap();
        let out: Vec<String> = out.iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(
            out,
            vec!["chunkfft", "--config", &p, "bench", "--format=csv", "--k-binary", "--repeats=2", "--repeats", "5"]
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "warp_drive = 9\n").unwrap();
        let p = path.to_string_lossy().into_owned();
        assert!(expand(os(&["chunkfft", "--config", &p, "budget"])).is_err());
    }

    #[test]
    fn no_config_is_a_no_op() {
        let args = os(&["chunkfft", "budget", "--capacity", "80"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
