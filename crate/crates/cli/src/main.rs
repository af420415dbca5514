use std::process::ExitCode;

use brinkfric::commands::{cmd_run, cmd_steady, cmd_sweep, cmd_verify};
use brinkfric::config::{parse_config, CliError};

const USAGE: &str = "\
usage: brinkfric <command> <config> [options]

commands:
  run    <config>                      march the transient problem
  steady <config>                      solve the stationary problem
  verify <config>                      run the certification suite
  sweep  <config> --vary key=v1,v2,..  run variants concurrently

The BRINKFRIC_THREADS environment variable caps sweep concurrency.
";

fn real_main() -> Result<i32, CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        return Err(CliError::Usage(USAGE.trim_end().to_string()));
    }
    let command = args[0].as_str();
    let text = std::fs::read_to_string(&args[1])?;
    let cfg = parse_config(&text)?;
    match command {
        "run" => {
            if args.len() != 2 {
                return Err(CliError::Usage("run takes exactly one config path".into()));
            }
            cmd_run(&cfg)
        }
        "steady" => {
            if args.len() != 2 {
                return Err(CliError::Usage("steady takes exactly one config path".into()));
            }
            cmd_steady(&cfg)
        }
        "verify" => {
            if args.len() != 2 {
                return Err(CliError::Usage("verify takes exactly one config path".into()));
            }
            cmd_verify(&cfg)
        }
        "sweep" => {
            let vary = args
                .iter()
                .position(|a| a == "--vary")
                .and_then(|k| args.get(k + 1))
                .ok_or_else(|| CliError::Usage("sweep needs --vary key=v1,v2,...".into()))?;
            let (key, values) = vary
                .split_once('=')
                .ok_or_else(|| CliError::Usage("--vary expects key=v1,v2,...".into()))?;
            let values: Vec<String> = values.split(',').map(|s| s.trim().to_string()).collect();
            cmd_sweep(&cfg, key, &values)
        }
        other => Err(CliError::Usage(format!(
            "unknown command `{other}`\n{USAGE}"
        ))),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
