//! Reader for SMART/Cornell-style collections (`.I`, `.T`, `.W`, ...).

use std::collections::HashSet;
use std::path::Path;

use super::{Analyzer, DocId, Document, QueryDoc};
use crate::error::{Error, Result};

#[derive(Debug, Default)]
struct Record {
    id: u32,
    title: String,
    body: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Field {
    Title,
    Body,
    Ignored,
}

/// Recognizes a field marker: a `.` plus one uppercase letter at line start,
/// followed by whitespace or end of line.
fn marker(line: &str) -> Option<(u8, &str)> {
    let b = line.as_bytes();
    if b.len() >= 2 && b[0] == b'.' && b[1].is_ascii_uppercase() {
        let rest = &line[2..];
        if rest.is_empty() || rest.starts_with(char::is_whitespace) {
            return Some((b[1], rest.trim()));
        }
    }
    None
}

fn append(dst: &mut String, text: &str) {
    if text.is_empty() {
        return;
    }
    if !dst.is_empty() {
        dst.push('\n');
    }
    dst.push_str(text);
}

fn parse_records(text: &str, path: &str) -> Result<Vec<Record>> {
    let mut records: Vec<Record> = Vec::new();
    let mut seen = HashSet::new();
    // text ahead of any field marker is treated as body (NPL-style records)
    let mut field = Field::Body;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        match marker(line) {
            Some((b'I', rest)) => {
                let id: u32 = rest
                    .split_whitespace()
                    .next()
                    .and_then(|s| s.parse().ok())
                    .filter(|&id| id > 0)
                    .ok_or_else(|| {
                        Error::parse(
                            path,
                            lineno,
                            format!("expected positive integer id in {line:?}"),
                        )
                    })?;
                if !seen.insert(id) {
                    return Err(Error::parse(path, lineno, format!("duplicate id {id}")));
                }
                records.push(Record {
                    id,
                    ..Record::default()
                });
                field = Field::Body;
            }
            Some((tag, rest)) => {
                let Some(rec) = records.last_mut() else {
                    return Err(Error::parse(path, lineno, "expected .I record marker"));
                };
                field = match tag {
                    b'T' => Field::Title,
                    b'W' => Field::Body,
                    _ => Field::Ignored,
                };
                match field {
                    Field::Title => append(&mut rec.title, rest),
                    Field::Body => append(&mut rec.body, rest),
                    Field::Ignored => {}
                }
            }
            None => {
                let Some(rec) = records.last_mut() else {
                    if line.trim().is_empty() {
                        continue;
                    }
                    return Err(Error::parse(path, lineno, "expected .I record marker"));
                };
                let line = line.trim_end();
                match field {
                    Field::Title => append(&mut rec.title, line),
                    Field::Body => append(&mut rec.body, line),
                    Field::Ignored => {}
                }
            }
        }
    }
    Ok(records)
}

fn read(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// One [`Document`] per `.I` record, in file order. Title and body both feed
/// the token stream; `.A`, `.B`, `.X`, `.N` and other markers are skipped.
pub fn parse_smart_docs(path: &Path, analyzer: &Analyzer) -> Result<Vec<Document>> {
    parse_smart_docs_str(&read(path)?, &path.display().to_string(), analyzer)
}

pub fn parse_smart_docs_str(
    text: &str,
    source: &str,
    analyzer: &Analyzer,
) -> Result<Vec<Document>> {
    Ok(parse_records(text, source)?
        .into_iter()
        .map(|r| {
            let mut tokens = analyzer.analyze(&r.title);
            tokens.extend(analyzer.analyze(&r.body));
            Document {
                id: r.id as DocId,
                title: r.title,
                body: r.body,
                tokens,
            }
        })
        .collect())
}

/// Queries use the same layout; the `.W` field is the query text.
pub fn parse_smart_queries(path: &Path, analyzer: &Analyzer) -> Result<Vec<QueryDoc>> {
    parse_smart_queries_str(&read(path)?, &path.display().to_string(), analyzer)
}

pub fn parse_smart_queries_str(
    text: &str,
    source: &str,
    analyzer: &Analyzer,
) -> Result<Vec<QueryDoc>> {
    Ok(parse_records(text, source)?
        .into_iter()
        .map(|r| QueryDoc {
            id: r.id,
            tokens: analyzer.analyze(&r.body),
            text: r.body,
        })
        .collect())
}
