//! Merging facts produced by external analysers.
//!
//! Sidecar lines look like `kernel.c:12: #pragma stml iteration_independent`;
//! blank lines and lines starting with `//` are skipped.

use thiserror::Error;

use crate::c::ast::*;
use crate::c::error::ParseError;
use crate::lang::property::Property;
use crate::semantics::lower::for_each_stmt_mut;
use crate::semantics::store::{merge_fact, Warning};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("AnchorError: sidecar line {sidecar_line} points at {file}:{line}, where no statement starts")]
    Anchor {
        sidecar_line: u32,
        file: String,
        line: u32,
    },
    #[error("sidecar line {sidecar_line}: {msg}")]
    Syntax { sidecar_line: u32, msg: String },
}

impl IngestError {
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Anchor { .. } => "AnchorError",
            IngestError::Syntax { .. } => "SidecarSyntaxError",
        }
    }
}

/// One parsed sidecar entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SidecarFact {
    pub file: String,
    pub line: u32,
    pub prop: Property,
}

pub fn parse_sidecar(text: &str) -> Result<Vec<SidecarFact>, IngestError> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let sidecar_line = k as u32 + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with("//") {
            continue;
        }
        let syntax = |msg: String| IngestError::Syntax { sidecar_line, msg };
        let hash = l
            .find('#')
            .ok_or_else(|| syntax("missing `#pragma`".into()))?;
        let anchor = l[..hash].trim().trim_end_matches(':');
        let (file, line) = anchor
            .rsplit_once(':')
            .ok_or_else(|| syntax(format!("bad anchor `{anchor}`, expected <file>:<line>")))?;
        let line: u32 = line
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad line number in `{anchor}`")))?;
        let pragma = &l[hash..];
        let prop =
            Property::parse_line(pragma, line).map_err(|e: ParseError| syntax(e.to_string()))?;
        if !prop.is_stml() {
            return Err(syntax("only stml facts may be ingested".into()));
        }
        out.push(SidecarFact {
            file: file.trim().to_string(),
            line,
            prop,
        });
    }
    Ok(out)
}

/// Merge sidecar facts into the program. Facts get external-tool provenance;
/// a fact that contradicts one already attached is discarded with one
/// warning.
pub fn ingest_properties(
    ast: &AnnotatedAst,
    sidecar: &str,
) -> Result<(AnnotatedAst, Vec<Warning>), IngestError> {
    let facts = parse_sidecar(sidecar)?;
    let mut targets = Vec::new();
    for (k, f) in facts.iter().enumerate() {
        let id = ast
            .stmt_at_line(f.line)
            .ok_or_else(|| IngestError::Anchor {
                sidecar_line: sidecar_line_of(sidecar, k),
                file: f.file.clone(),
                line: f.line,
            })?;
        targets.push(id);
    }
    let mut out = ast.clone();
    let mut warnings = Vec::new();
    let stmt_ids: Vec<NodeId> = ast
        .nodes()
        .into_iter()
        .filter(|v| matches!(v.node, crate::c::visit::NodeRef::Stmt(_)))
        .map(|v| v.id)
        .collect();
    let mut k = 0;
    for_each_stmt_mut(&mut out.items, &mut |s| {
        let id = stmt_ids[k];
        k += 1;
        for (f, t) in facts.iter().zip(&targets) {
            if *t == id {
                let new = Pragma {
                    prop: f.prop.clone(),
                    origin: Origin::ExternalTool,
                };
                let end = s.pragmas.len();
                merge_fact(&mut s.pragmas, new, end, id, Some(f.line), &mut warnings);
            }
        }
    });
    out.lines = ast.lines.clone();
    Ok((out, warnings))
}

fn sidecar_line_of(text: &str, fact_index: usize) -> u32 {
    let mut seen = 0;
    for (k, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with("//") {
            continue;
        }
        if seen == fact_index {
            return k as u32 + 1;
        }
        seen += 1;
    }
    0
}
