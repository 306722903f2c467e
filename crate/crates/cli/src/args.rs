//! Hand-rolled argument parsing: four subcommands, four flags.

use std::path::PathBuf;

pub const USAGE: &str = "\
Usage: emcom <command> [options]

Commands:
  train     --config <path>   Run one training; writes metrics.csv, a
                              checkpoint, the message atlas, and a resolved
                              config echo into the output directory.
  sweep     --config <path>   Run the r_a x seed grid; writes per-cell
                              artifacts, sweep_summary.csv and plot_sweep.py.
  eval      <checkpoint>      Re-evaluate a checkpoint; prints the report and
                              writes eval_report.json.
  messages  <checkpoint>      Dump the message atlas (atlas.csv) and the
                              cosine-similarity matrix (similarity.csv).

Options:
  --config <path>   JSON config file ({} uses every default)
  --out <dir>       Override the output directory
  --seed <u64>      Override the config seed (sweep: replaces the seed list)
  --quiet           Suppress progress output
  -h, --help        Show this help
";

#[derive(Debug, Clone, PartialEq)]
pub struct CommonOpts {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Train {
        config: PathBuf,
        opts: CommonOpts,
    },
    Sweep {
        config: PathBuf,
        opts: CommonOpts,
    },
    Eval {
        checkpoint: PathBuf,
        opts: CommonOpts,
    },
    Messages {
        checkpoint: PathBuf,
        opts: CommonOpts,
    },
}

#[derive(Debug)]
pub enum Parsed {
    Command(Command),
    Help,
}

pub fn parse(argv: &[String]) -> Result<Parsed, String> {
    let mut it = argv.iter().peekable();
    let sub = match it.next() {
        Some(s) if s == "-h" || s == "--help" => return Ok(Parsed::Help),
        Some(s) => s.as_str(),
        None => return Err("missing subcommand".into()),
    };

    let mut config: Option<PathBuf> = None;
    let mut positional: Option<PathBuf> = None;
    let mut opts = CommonOpts {
        out: None,
        seed: None,
        quiet: false,
    };

    while let Some(arg) = it.next() {
        match arg.as_str() {
            "-h" | "--help" => return Ok(Parsed::Help),
            "--config" => {
                let value = it.next().ok_or("--config needs a path")?;
                config = Some(PathBuf::from(value));
            }
            "--out" => {
                let value = it.next().ok_or("--out needs a directory")?;
                opts.out = Some(PathBuf::from(value));
            }
            "--seed" => {
                let value = it.next().ok_or("--seed needs a number")?;
                let seed = value
                    .parse::<u64>()
                    .map_err(|_| format!("--seed: '{value}' is not a u64"))?;
                opts.seed = Some(seed);
            }
            "--quiet" => opts.quiet = true,
            other if other.starts_with('-') => {
                return Err(format!("unknown option '{other}'"));
            }
            other => {
                if positional.is_some() {
                    return Err(format!("unexpected argument '{other}'"));
                }
                positional = Some(PathBuf::from(other));
            }
        }
    }

    let command = match sub {
        "train" | "sweep" => {
            if positional.is_some() {
                return Err(format!("'{sub}' takes no positional argument"));
            }
            let config = config.ok_or(format!("'{sub}' requires --config <path>"))?;
            if sub == "train" {
                Command::Train { config, opts }
            } else {
                Command::Sweep { config, opts }
            }
        }
        "eval" | "messages" => {
            if config.is_some() {
                return Err(format!("'{sub}' takes a checkpoint path, not --config"));
            }
            let checkpoint = positional.ok_or(format!("'{sub}' requires a checkpoint path"))?;
            if sub == "eval" {
                Command::Eval { checkpoint, opts }
            } else {
                Command::Messages { checkpoint, opts }
            }
        }
        other => return Err(format!("unknown subcommand '{other}'")),
    };
    Ok(Parsed::Command(command))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(words: &str) -> Vec<String> {
        words.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_train_with_options() {
        let parsed = parse(&argv(
            "train --config cfg.json --out runs/x --seed 7 --quiet",
        ));
        match parsed {
            Ok(Parsed::Command(Command::Train { config, opts })) => {
                assert_eq!(config, PathBuf::from("cfg.json"));
                assert_eq!(opts.out, Some(PathBuf::from("runs/x")));
                assert_eq!(opts.seed, Some(7));
                assert!(opts.quiet);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_eval_positional() {
        let parsed = parse(&argv("eval runs/x/checkpoint.bin"));
        match parsed {
            Ok(Parsed::Command(Command::Eval { checkpoint, .. })) => {
                assert_eq!(checkpoint, PathBuf::from("runs/x/checkpoint.bin"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_missing_config_and_unknown_flags() {
        assert!(parse(&argv("train")).is_err());
        assert!(parse(&argv("sweep --seed 1")).is_err());
        assert!(parse(&argv("eval")).is_err());
        assert!(parse(&argv("train --config c.json --frobnicate")).is_err());
        assert!(parse(&argv("tarin --config c.json")).is_err());
        assert!(parse(&argv("train --config c.json --seed twelve")).is_err());
    }

    #[test]
    fn help_short_circuits() {
        assert!(matches!(parse(&argv("--help")), Ok(Parsed::Help)));
        assert!(matches!(parse(&argv("train --help")), Ok(Parsed::Help)));
    }
}
