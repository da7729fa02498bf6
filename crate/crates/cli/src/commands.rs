//! The batch subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;
use stml::c::ast::AnnotatedAst;
use stml::c::parser::parse_c;
use stml::c::printer::print_c;
use stml::engine::History;
use stml::lang::rules::{default_rules, parse_rules, RuleSet};
use stml::oracle::{oracle_from_spec, run_derivation, Oracle, OracleError};
use stml::semantics::ingest::ingest_properties;
use stml::semantics::lower::{lower_polca, lower_polca_with_warnings};
use stml::semantics::store::Warning;
use stml::session::{Report, Session};

use crate::http_oracle::HttpOracle;

pub const RULE_PATH_VAR: &str = "STML_RULE_PATH";

/// Error printed as one JSON object on stderr.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub error: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl ToString) -> Self {
        CliError {
            error: kind.to_string(),
            message: message.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::new("FileError", format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::new("FileError", format!("{}: {e}", path.display())))
}

/// Rules from the given files, else every `*.stml` file in
/// `$STML_RULE_PATH`, else the built-in set.
pub fn load_rules(files: &[PathBuf]) -> Result<RuleSet, CliError> {
    let mut files = files.to_vec();
    if files.is_empty() {
        if let Ok(dir) = std::env::var(RULE_PATH_VAR) {
            let entries = std::fs::read_dir(&dir)
                .map_err(|e| CliError::new("FileError", format!("{dir}: {e}")))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "stml"))
                .collect();
            found.sort();
            files = found;
        }
    }
    if files.is_empty() {
        return default_rules().map_err(|e| CliError::new(e.kind(), e));
    }
    let mut set = RuleSet { rules: Vec::new() };
    for f in &files {
        let r = parse_rules(&read(f)?)
            .map_err(|e| CliError::new(e.kind(), format!("{}: {e}", f.display())))?;
        set.extend(r);
    }
    Ok(set)
}

/// Parse, lower skeleton annotations and merge an optional sidecar.
pub fn load_program(
    src: &str,
    sidecar: Option<&str>,
) -> Result<(AnnotatedAst, Vec<Warning>), CliError> {
    let ast = parse_c(src).map_err(|e| CliError::new(e.kind(), e))?;
    let (ast, mut warnings) =
        lower_polca_with_warnings(&ast).map_err(|e| CliError::new("LoweringError", e))?;
    let ast = match sidecar {
        Some(s) => {
            let (a, w) = ingest_properties(&ast, s).map_err(|e| CliError::new(e.kind(), e))?;
            warnings.extend(w);
            a
        }
        None => ast,
    };
    Ok((ast, warnings))
}

fn load_input(
    input: &Path,
    properties: Option<&Path>,
) -> Result<(AnnotatedAst, Vec<Warning>), CliError> {
    let src = read(input)?;
    let sidecar = properties.map(read).transpose()?;
    load_program(&src, sidecar.as_deref())
}

pub fn make_oracle(spec: &str) -> Result<Box<dyn Oracle + Send>, CliError> {
    if spec.starts_with("http://") || spec.starts_with("https://") {
        return Ok(Box::new(HttpOracle::new(spec)));
    }
    oracle_from_spec(spec).map_err(|e| CliError::new("OracleSpecError", e))
}

pub struct TransformArgs {
    pub input: PathBuf,
    pub rules: Vec<PathBuf>,
    pub oracle: String,
    pub budget: usize,
    pub properties: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Output of a transform run: final code, report and exit status.
pub struct Transformed {
    pub code: String,
    pub report: Report,
    pub exit: i32,
}

pub fn transform_program(
    ast: &AnnotatedAst,
    input_warnings: &[Warning],
    rules: &RuleSet,
    oracle: &mut dyn Oracle,
    budget: usize,
) -> Result<Transformed, CliError> {
    let name = oracle.name();
    let (history, outcome, exit): (History, &str, i32) =
        match run_derivation(ast, rules, oracle, budget) {
            Ok(d) => (d.history, "final", 0),
            Err(OracleError::BudgetExceeded(partial)) => (partial.history, "budget_exhausted", 2),
            Err(e) => return Err(CliError::new(e.kind(), e)),
        };
    Ok(Transformed {
        code: print_c(history.current()),
        report: Report::new(&history, &name, outcome, input_warnings),
        exit,
    })
}

pub fn transform(a: &TransformArgs) -> Result<i32, CliError> {
    let rules = load_rules(&a.rules)?;
    let (ast, warnings) = load_input(&a.input, a.properties.as_deref())?;
    let mut oracle = make_oracle(&a.oracle)?;
    let t = transform_program(&ast, &warnings, &rules, oracle.as_mut(), a.budget)?;
    let report = serde_json::to_string_pretty(&t.report).expect("report serializes");
    match &a.out {
        Some(out) => {
            write(out, &t.code)?;
            let rp = a.report.clone().unwrap_or_else(|| report_path(out));
            write(&rp, &report)?;
        }
        None => {
            print!("{}", t.code);
            if let Some(rp) = &a.report {
                write(rp, &report)?;
            }
        }
    }
    Ok(t.exit)
}

/// `out.c` gets its report at `out.c.report.json`.
pub fn report_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".report.json");
    PathBuf::from(s)
}

pub fn lower(input: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let ast = parse_c(&read(input)?).map_err(|e| CliError::new(e.kind(), e))?;
    let lowered = lower_polca(&ast).map_err(|e| CliError::new("LoweringError", e))?;
    emit(out, &print_c(&lowered))?;
    Ok(0)
}

pub fn matches(
    input: &Path,
    rules: &[PathBuf],
    properties: Option<&Path>,
    out: Option<&Path>,
) -> Result<i32, CliError> {
    let rules = load_rules(rules)?;
    let (ast, w) = load_input(input, properties)?;
    let mut s = Session::new("cli", ast, rules, w);
    let json = serde_json::to_string_pretty(&s.match_views()).expect("matches serialize");
    emit(out, &(json + "\n"))?;
    Ok(0)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
