use std::path::PathBuf;

use thiserror::Error;

/// A syntax or validation problem in one of the line-oriented input files.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}line {line}: {message}", source_prefix(.path))]
pub struct ParseError {
    pub path: Option<PathBuf>,
    pub line: usize,
    pub message: String,
}

fn source_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            path: None,
            line,
            message: message.into(),
        }
    }

    pub fn with_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.path = Some(path.into());
        self
    }
}

/// Splits a line-oriented file into (line number, trimmed content) pairs, dropping blank lines and
/// `#` comments.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    line: usize,
    what: &str,
    raw: &str,
) -> Result<T, ParseError> {
    raw.parse()
        .map_err(|_| ParseError::new(line, format!("invalid {what} '{raw}'")))
}
