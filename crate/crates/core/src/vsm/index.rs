//! Binary index file.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "CIRX" | version u32 | corpus_size u64 | vocab_size u64
//! vocab_size × { term_len u32 | term utf-8 | term_id u32 | doc_freq u32 }
//! corpus_size × { doc_id u32 | entries u32 | entries × { term_id u32 | weight f64 } }
//! ```

use std::path::Path;

use rayon::prelude::*;

use super::{document_vectors, DocVectors, TermVector, Vocabulary};
use crate::corpus::Document;
use crate::error::{Error, Result};

pub const INDEX_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"CIRX";

/// Vocabulary plus one TF-IDF vector per document.
#[derive(Debug, Clone, PartialEq)]
pub struct Index {
    pub vocab: Vocabulary,
    pub vectors: DocVectors,
}

impl Index {
    pub fn build(docs: &[Document]) -> Result<Self> {
        let vocab = Vocabulary::build(docs)?;
        let vectors = document_vectors(docs, &vocab);
        Ok(Index { vocab, vectors })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&INDEX_FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.vectors.len() as u64).to_le_bytes());
        out.extend_from_slice(&(self.vocab.len() as u64).to_le_bytes());
        for (id, (term, df)) in self
            .vocab
            .terms()
            .iter()
            .zip(self.vocab.doc_freqs())
            .enumerate()
        {
            out.extend_from_slice(&(term.len() as u32).to_le_bytes());
            out.extend_from_slice(term.as_bytes());
            out.extend_from_slice(&(id as u32).to_le_bytes());
            out.extend_from_slice(&df.to_le_bytes());
        }
        let encoded: Vec<Vec<u8>> = self
            .vectors
            .par_iter()
            .map(|(doc, v)| {
                let mut buf = Vec::with_capacity(8 + v.len() * 12);
                buf.extend_from_slice(&doc.to_le_bytes());
                buf.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for (t, w) in v.iter() {
                    buf.extend_from_slice(&t.to_le_bytes());
                    buf.extend_from_slice(&w.to_le_bytes());
                }
                buf
            })
            .collect();
        for chunk in encoded {
            out.extend_from_slice(&chunk);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::IndexFormat("bad magic".into()));
        }
        let version = r.u32()?;
        if version != INDEX_FORMAT_VERSION {
            return Err(Error::IndexFormat(format!("unsupported version {version}")));
        }
        let corpus_size = r.u64()?;
        let vocab_size = r.u64()?;
        let corpus_size = u32::try_from(corpus_size)
            .map_err(|_| Error::IndexFormat("corpus too large".into()))?;

        let mut terms = Vec::new();
        let mut doc_freq = Vec::new();
        for expected in 0..vocab_size {
            let len = r.u32()? as usize;
            let term = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::IndexFormat("term is not utf-8".into()))?
                .to_string();
            let id = r.u32()?;
            if id as u64 != expected {
                return Err(Error::IndexFormat(format!("term id {id} out of sequence")));
            }
            terms.push(term);
            doc_freq.push(r.u32()?);
        }
        let vocab = Vocabulary::from_parts(terms, doc_freq, corpus_size)?;

        let mut vectors = DocVectors::new();
        for _ in 0..corpus_size {
            let doc = r.u32()?;
            let n = r.u32()? as usize;
            let mut entries = Vec::with_capacity(n);
            for _ in 0..n {
                let t = r.u32()?;
                let w = f64::from_le_bytes(r.take(8)?.try_into().unwrap());
                if t as usize >= vocab.len()
                    || w.is_nan()
                    || w <= 0.0
                    || entries.last().is_some_and(|&(p, _)| p >= t)
                {
                    return Err(Error::IndexFormat(format!(
                        "bad entry ({t}, {w}) for document {doc}"
                    )));
                }
                entries.push((t, w));
            }
            if vectors
                .insert(doc, TermVector::from_sorted_unchecked(entries))
                .is_some()
            {
                return Err(Error::IndexFormat(format!("duplicate document {doc}")));
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::IndexFormat("trailing bytes".into()));
        }
        Ok(Index { vocab, vectors })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::IndexFormat("unexpected end of file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
