//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use clusterir::corpus::{DocId, Document};
use clusterir::vsm::{DocVectors, TermVector};
use rand::Rng;

/// A random corpus of `n` documents over a vocabulary of `v` synthetic
/// terms; ids are unique but not contiguous.
pub fn random_corpus<R: Rng>(rng: &mut R, n: usize, v: usize) -> Vec<Document> {
    (0..n)
        .map(|i| {
            let len = rng.gen_range(0..12);
            let tokens: Vec<String> = (0..len)
                .map(|_| format!("t{}", rng.gen_range(0..v)))
                .collect();
            Document {
                id: (i as DocId) * 7 + 3,
                title: String::new(),
                body: tokens.join(" "),
                tokens,
            }
        })
        .collect()
}

pub fn random_query<R: Rng>(rng: &mut R, v: usize) -> Vec<String> {
    let len = rng.gen_range(1..5);
    (0..len)
        .map(|_| format!("t{}", rng.gen_range(0..v + 2)))
        .collect()
}

/// Dense TF-IDF weights computed from scratch: one row per document over
/// the sorted term list, `count * log10(N / df)`.
pub struct DenseModel {
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    pub rows: Vec<(DocId, Vec<f64>)>,
}

impl DenseModel {
    pub fn build(docs: &[Document], log: fn(f64) -> f64) -> Self {
        let terms: Vec<String> = docs
            .iter()
            .flat_map(|d| d.tokens.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = docs.len() as f64;
        let idf: Vec<f64> = terms
            .iter()
            .map(|t| {
                let df = docs.iter().filter(|d| d.tokens.contains(t)).count() as f64;
                log(n / df)
            })
            .collect();
        let rows = docs
            .iter()
            .map(|d| (d.id, Self::weigh(&terms, &idf, &d.tokens)))
            .collect();
        DenseModel { terms, idf, rows }
    }

    fn weigh(terms: &[String], idf: &[f64], tokens: &[String]) -> Vec<f64> {
        terms
            .iter()
            .zip(idf)
            .map(|(t, w)| tokens.iter().filter(|x| *x == t).count() as f64 * w)
            .collect()
    }

    pub fn query(&self, tokens: &[String]) -> Vec<f64> {
        Self::weigh(&self.terms, &self.idf, tokens)
    }

    /// Cosine ranking, score descending, ties by ascending id.
    pub fn rank(&self, q: &[f64]) -> Vec<(DocId, f64)> {
        let mut out: Vec<(DocId, f64)> = self
            .rows
            .iter()
            .map(|(d, v)| (*d, dense_cosine(v, q)))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

/// Random non-negative sparse vector and its dense expansion.
pub fn random_sparse<R: Rng>(rng: &mut R, dim: u32, nnz: usize) -> (TermVector, Vec<f64>) {
    let mut dense = vec![0.0; dim as usize];
    for _ in 0..nnz {
        dense[rng.gen_range(0..dim) as usize] = rng.gen_range(0.01..5.0);
    }
    (TermVector::from_dense(&dense), dense)
}

/// Two groups of near-duplicate vectors on disjoint term ranges: within a
/// group cosine > 0.99, across groups cosine 0.
pub fn separated_vectors<R: Rng>(rng: &mut R, per_group: usize) -> (DocVectors, BTreeSet<DocId>) {
    let mut vectors = BTreeMap::new();
    let mut first = BTreeSet::new();
    for g in 0..2u32 {
        for i in 0..per_group {
            let base = g * 10;
            let pairs: Vec<(u32, f64)> = (0..5)
                .map(|t| (base + t, 10.0 + rng.gen_range(0.0..0.5)))
                .collect();
            let id = g * 1000 + i as u32 + 1;
            vectors.insert(id, TermVector::from_pairs(pairs));
            if g == 0 {
                first.insert(id);
            }
        }
    }
    (vectors, first)
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}
