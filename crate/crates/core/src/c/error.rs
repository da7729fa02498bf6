use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("pragma error at line {line}: {msg}")]
    Pragma { line: u32, msg: String },
    #[error("unsupported feature at {line}:{col}: {feature}")]
    Unsupported {
        line: u32,
        col: u32,
        feature: String,
    },
}

impl ParseError {
    pub fn syntax(line: u32, col: u32, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub fn line(&self) -> u32 {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::Pragma { line, .. }
            | ParseError::Unsupported { line, .. } => *line,
        }
    }

    /// Stable error kind name used in JSON reports.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "SyntaxError",
            ParseError::Pragma { .. } => "PragmaError",
            ParseError::Unsupported { .. } => "UnsupportedFeature",
        }
    }
}
