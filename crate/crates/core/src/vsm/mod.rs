//! TF-IDF vector space model.
//!
//! `idf(t) = log10(|D| / |D_t|)` and `w(t, d) = tf(t, d) * idf(t)`. Terms that
//! occur in every document get weight zero and are never stored.

mod index;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::corpus::{DocId, Document, QueryDoc};
use crate::error::{Error, Result};

pub use index::{Index, INDEX_FORMAT_VERSION};

pub type TermId = u32;

/// Document vectors keyed (and iterated) by ascending document id.
pub type DocVectors = BTreeMap<DocId, TermVector>;

/// Sparse non-negative weight vector, entries sorted by term id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(TermId, f64)>,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from arbitrary pairs. Non-positive weights are
    /// dropped and repeated ids are summed.
    pub fn from_pairs<I: IntoIterator<Item = (TermId, f64)>>(pairs: I) -> Self {
        let mut entries: Vec<(TermId, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|&(id, _)| id);
        let mut merged: Vec<(TermId, f64)> = Vec::with_capacity(entries.len());
        for (id, w) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == id => *acc += w,
                _ => merged.push((id, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        TermVector { entries: merged }
    }

    /// Dense array view: position `i` becomes term id `i`.
    pub fn from_dense(values: &[f64]) -> Self {
        TermVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(i, &w)| (i as TermId, w))
                .collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(entries: Vec<(TermId, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, w)| w > 0.0));
        TermVector { entries }
    }

    pub fn get(&self, id: TermId) -> f64 {
        match self.entries.binary_search_by_key(&id, |&(t, _)| t) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    /// Sets one component; a non-positive weight removes the entry.
    pub fn set(&mut self, id: TermId, weight: f64) {
        match self.entries.binary_search_by_key(&id, |&(t, _)| t) {
            Ok(i) if weight > 0.0 => self.entries[i].1 = weight,
            Ok(i) => {
                self.entries.remove(i);
            }
            Err(i) if weight > 0.0 => self.entries.insert(i, (id, weight)),
            Err(_) => {}
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = TermId> + '_ {
        self.entries.iter().map(|&(t, _)| t)
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Sparse dot product over the intersection of supports.
    pub fn dot(&self, other: &TermVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scaled(&self, factor: f64) -> TermVector {
        TermVector::from_pairs(self.iter().map(|(t, w)| (t, w * factor)))
    }

    /// Copy scaled to unit length; the zero vector stays zero.
    pub fn normalized(&self) -> TermVector {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        TermVector {
            entries: self.entries.iter().map(|&(t, w)| (t, w / n)).collect(),
        }
    }

    /// Largest stored term id plus one (0 for the empty vector).
    pub fn dim(&self) -> usize {
        self.entries.last().map_or(0, |&(t, _)| t as usize + 1)
    }
}

/// Cosine similarity of two non-negative vectors, in `[0, 1]`. Returns 0
/// when either vector is zero.
pub fn cosine(p: &TermVector, q: &TermVector) -> f64 {
    let denom = p.norm() * q.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (p.dot(q) / denom).clamp(0.0, 1.0)
}

/// Term dictionary with per-term document frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_id: HashMap<String, TermId>,
    doc_freq: Vec<u32>,
    corpus_size: u32,
}

impl Vocabulary {
    /// Terms are numbered in lexicographic order, so ids depend only on
    /// the corpus contents.
    pub fn build(docs: &[Document]) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for doc in docs {
            let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            for t in distinct {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let (terms, doc_freq): (Vec<String>, Vec<u32>) =
            df.into_iter().map(|(t, n)| (t.to_string(), n)).unzip();
        Self::from_parts(terms, doc_freq, docs.len() as u32)
    }

    pub(crate) fn from_parts(
        terms: Vec<String>,
        doc_freq: Vec<u32>,
        corpus_size: u32,
    ) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::IndexFormat(
                "term and frequency tables differ in length".into(),
            ));
        }
        if let Some(bad) = doc_freq.iter().position(|&f| f == 0 || f > corpus_size) {
            return Err(Error::IndexFormat(format!(
                "term {:?} has document frequency {} outside 1..={corpus_size}",
                terms[bad], doc_freq[bad]
            )));
        }
        let term_to_id: HashMap<String, TermId> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TermId))
            .collect();
        if term_to_id.len() != terms.len() {
            return Err(Error::IndexFormat("duplicate term in vocabulary".into()));
        }
        Ok(Vocabulary {
            terms,
            term_to_id,
            doc_freq,
            corpus_size,
        })
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.terms.get(id as usize).map(String::as_str)
    }

    pub fn doc_freq(&self, term: &str) -> Option<u32> {
        self.id(term).map(|id| self.doc_freq[id as usize])
    }

    pub fn corpus_size(&self) -> u32 {
        self.corpus_size
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn terms(&self) -> &[String] {
        &self.terms
    }

    pub(crate) fn doc_freqs(&self) -> &[u32] {
        &self.doc_freq
    }

    fn idf_by_id(&self, id: TermId) -> f64 {
        (self.corpus_size as f64 / self.doc_freq[id as usize] as f64).log10()
    }
}

pub fn build_vocabulary(docs: &[Document]) -> Result<Vocabulary> {
    Vocabulary::build(docs)
}

/// Raw occurrence count of `term` in the document's token stream.
pub fn tf(doc: &Document, term: &str) -> u32 {
    doc.tokens.iter().filter(|t| *t == term).count() as u32
}

/// Base-10 inverse document frequency.
pub fn idf(vocab: &Vocabulary, term: &str) -> Result<f64> {
    vocab
        .id(term)
        .map(|id| vocab.idf_by_id(id))
        .ok_or_else(|| Error::UnknownTerm(term.to_string()))
}

fn weigh_tokens<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> TermVector {
    let mut counts: BTreeMap<TermId, u32> = BTreeMap::new();
    for id in tokens.iter().filter_map(|t| vocab.id(t.as_ref())) {
        *counts.entry(id).or_insert(0) += 1;
    }
    let entries = counts
        .into_iter()
        .map(|(id, n)| (id, n as f64 * vocab.idf_by_id(id)))
        .filter(|&(_, w)| w > 0.0)
        .collect();
    TermVector::from_sorted_unchecked(entries)
}

pub fn tfidf_vector(doc: &Document, vocab: &Vocabulary) -> TermVector {
    weigh_tokens(&doc.tokens, vocab)
}

/// Same weighting as documents; out-of-vocabulary terms are dropped.
pub fn query_vector(q: &QueryDoc, vocab: &Vocabulary) -> TermVector {
    weigh_tokens(&q.tokens, vocab)
}

/// Weights an already analyzed token list.
pub fn tokens_vector<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> TermVector {
    weigh_tokens(tokens, vocab)
}

/// Vectors for every document, built in parallel.
pub fn document_vectors(docs: &[Document], vocab: &Vocabulary) -> DocVectors {
    docs.par_iter()
        .map(|d| (d.id, tfidf_vector(d, vocab)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: DocId, tokens: &[&str]) -> Document {
        Document {
            id,
            title: String::new(),
            body: String::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn four_docs() -> Vec<Document> {
        vec![
            doc(1, &["laser", "beam", "optic"]),
            doc(2, &["beam", "optic"]),
            doc(3, &["laser", "laser", "optic"]),
            doc(4, &["fibre", "optic"]),
        ]
    }

    #[test]
    fn vocabulary_counts() {
        let v = build_vocabulary(&four_docs()).unwrap();
        assert_eq!(v.doc_freq("laser"), Some(2));
        assert_eq!(v.doc_freq("optic"), Some(4));
        assert_eq!(v.corpus_size(), 4);
        assert_eq!(v.len(), 4);
        let mut ids: Vec<_> = ["beam", "fibre", "laser", "optic"]
            .iter()
            .map(|t| v.id(t).unwrap())
            .collect();
        ids.sort();
        assert_eq!(ids, [0, 1, 2, 3]);
    }

    #[test]
    fn single_doc_vocabulary() {
        let v = build_vocabulary(&[doc(9, &["a1", "b1", "a1"])]).unwrap();
        assert_eq!(v.doc_freq("a1"), Some(1));
        assert_eq!(v.doc_freq("b1"), Some(1));
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(matches!(build_vocabulary(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn tf_counts() {
        let d = doc(1, &["a", "b", "a"]);
        assert_eq!(tf(&d, "a"), 2);
        assert_eq!(tf(&d, "zzz"), 0);
        assert_eq!(tf(&doc(2, &["x", "x", "x"]), "x"), 3);
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn idf_values() {
        let v = build_vocabulary(&four_docs()).unwrap();
        assert_eq!(idf(&v, "optic").unwrap(), 0.0);
        assert!((idf(&v, "laser").unwrap() - 0.301_029_995_663_981_2).abs() < 1e-12);
        assert!(matches!(idf(&v, "nope"), Err(Error::UnknownTerm(_))));

        let mut docs: Vec<Document> = (1..=100).map(|i| doc(i, &["filler"])).collect();
        for d in docs.iter_mut().take(10) {
            d.tokens.push("rare".into());
        }
        let v = build_vocabulary(&docs).unwrap();
        assert!((idf(&v, "rare").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tfidf_weights() {
        let docs = four_docs();
        let v = build_vocabulary(&docs).unwrap();
        let vec4 = tfidf_vector(&docs[3], &v);
        // fibre: tf 1, df 1 of 4; optic is in every doc and absent
        assert_eq!(vec4.len(), 1);
        assert!((vec4.get(v.id("fibre").unwrap()) - 4f64.log10()).abs() < 1e-12);
        assert_eq!(vec4.get(v.id("optic").unwrap()), 0.0);

        let docs = vec![
            doc(1, &["laser", "laser"]),
            doc(2, &["x1"]),
            doc(3, &["x1"]),
            doc(4, &["x1"]),
        ];
        let v = build_vocabulary(&docs).unwrap();
        let w = tfidf_vector(&docs[0], &v).get(v.id("laser").unwrap());
        assert!((w - 1.204_119_982_655_924_8).abs() < 1e-9);
        assert!(tfidf_vector(&doc(5, &[]), &v).is_empty());
    }

    #[test]
    fn query_weights() {
        let docs = four_docs();
        let v = build_vocabulary(&docs).unwrap();
        let q = QueryDoc {
            id: 1,
            text: String::new(),
            tokens: vec!["laser".into(), "laser".into(), "unknown".into()],
        };
        let qv = query_vector(&q, &v);
        assert_eq!(qv.len(), 1);
        assert!((qv.get(v.id("laser").unwrap()) - 2.0 * 2f64.log10()).abs() < 1e-12);
        let oov = QueryDoc {
            id: 2,
            text: String::new(),
            tokens: vec!["zzz".into()],
        };
        assert!(query_vector(&oov, &v).is_empty());
    }

    #[test]
    fn cosine_examples() {
        let p = TermVector::from_pairs([(0, 1.0), (1, 2.0)]);
        let q = TermVector::from_pairs([(0, 2.0), (1, 1.0)]);
        assert!((cosine(&p, &q) - 0.8).abs() < 1e-12);
        assert!((cosine(&p, &p) - 1.0).abs() < 1e-12);
        let r = TermVector::from_pairs([(5, 3.0)]);
        assert_eq!(cosine(&p, &r), 0.0);
        assert_eq!(cosine(&p, &TermVector::new()), 0.0);
    }

    #[test]
    fn set_and_get() {
        let mut v = TermVector::from_pairs([(3, 1.0), (1, 2.0), (3, 0.5)]);
        assert_eq!(v.entries(), &[(1, 2.0), (3, 1.5)]);
        v.set(2, 4.0);
        v.set(1, 0.0);
        assert_eq!(v.entries(), &[(2, 4.0), (3, 1.5)]);
        assert_eq!(v.get(7), 0.0);
        assert_eq!(v.dim(), 4);
    }
}
