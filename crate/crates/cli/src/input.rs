use std::fs;
use std::path::Path;

use ordpat::{Error, Result, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Semicolon,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains(';') {
            Delimiter::Semicolon
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Semicolon => line.split(';').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Reads one numeric column (1-based `column`) of a delimited text file.
/// A first line whose field does not parse as a number is taken as a header.
pub fn read_series(path: &Path, column: usize) -> Result<TimeSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_series(&text, column)
}

pub fn parse_series(text: &str, column: usize) -> Result<TimeSeries> {
    if column == 0 {
        return Err(Error::InvalidParameter("columns are numbered from 1".into()));
    }
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let Some(&(_, first)) = lines.peek() else {
        return Err(Error::Parse("input contains no data".into()));
    };
    let delim = Delimiter::detect(first);
    let mut values = Vec::new();
    let mut header_allowed = true;
    for (i, line) in lines {
        let lineno = i + 1;
        let fields = delim.split(line.trim());
        let field = fields.get(column - 1).copied().ok_or_else(|| {
            Error::Parse(format!("line {lineno}: no column {column} in {line:?}"))
        })?;
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(Error::Parse(format!("line {lineno}: non-finite value {v}"))),
            Err(_) if header_allowed => {}
            Err(_) => return Err(Error::Parse(format!("line {lineno}: not a number: {field:?}"))),
        }
        header_allowed = false;
    }
    if values.is_empty() {
        return Err(Error::Parse("input contains no data".into()));
    }
    TimeSeries::new(values)
}
