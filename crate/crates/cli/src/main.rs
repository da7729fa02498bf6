use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stml::engine::DEFAULT_BUDGET;
use stml_cli::commands::{self, CliError, TransformArgs};
use stml_cli::service;

#[derive(Parser)]
#[command(
    name = "stml",
    version,
    about = "Rule-based source-to-source transformation of annotated C"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a derivation and write the final code plus a JSON report.
    Transform {
        input: PathBuf,
        #[arg(long = "rules")]
        rules: Vec<PathBuf>,
        /// greedy | lookahead:<d> | scripted:<file> | http(s)://<oracle base url>
        #[arg(long, default_value = "greedy")]
        oracle: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        properties: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to `<out>.report.json` when --out is given.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Lower skeleton annotations to STML facts.
    Lower {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List applicable matches as JSON.
    Matches {
        input: PathBuf,
        #[arg(long = "rules")]
        rules: Vec<PathBuf>,
        #[arg(long)]
        properties: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8787)]
        port: u16,
        #[arg(long = "rules")]
        rules: Vec<PathBuf>,
        /// Oracle answering /oracle/select and /oracle/is_final.
        #[arg(long, default_value = "greedy")]
        oracle: String,
    },
}

fn serve(port: u16, rules: &[PathBuf], oracle: &str) -> Result<i32, CliError> {
    let st = service::AppState::new(commands::load_rules(rules)?, commands::make_oracle(oracle)?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::new("IoError", e))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        service::serve(listener, st).await
    })
    .map_err(|e| CliError::new("IoError", e))?;
    Ok(0)
}

fn main() -> ExitCode {
    let r = match Cli::parse().cmd {
        Cmd::Transform {
            input,
            rules,
            oracle,
            budget,
            properties,
            out,
            report,
        } => commands::transform(&TransformArgs {
            input,
            rules,
            oracle,
            budget,
            properties,
            out,
            report,
        }),
        Cmd::Lower { input, out } => commands::lower(&input, out.as_deref()),
        Cmd::Matches {
            input,
            rules,
            properties,
            out,
        } => commands::matches(&input, &rules, properties.as_deref(), out.as_deref()),
        Cmd::Serve {
            port,
            rules,
            oracle,
        } => serve(port, &rules, &oracle),
    };
    match r {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
