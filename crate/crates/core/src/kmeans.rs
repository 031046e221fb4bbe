//! K-means over TF-IDF vectors with cosine distance.
//!
//! Documents are scaled to unit length before clustering and each centroid
//! is the arithmetic mean of its members' unit vectors. Cosine is scale
//! invariant, so assignments are the same as for raw vectors, and with unit
//! members the mean is the direction that minimizes the summed cosine
//! distance of the cluster. That is what keeps the objective monotone.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::vsm::{cosine, DocVectors, TermVector};

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_K: usize = 10;

/// Above this many `k × dim` cells centroids are kept sparse only.
const DENSE_CENTROID_LIMIT: usize = 1 << 25;

/// `1 - cosine(p, q)`.
pub fn cos_distance(p: &TermVector, q: &TermVector) -> f64 {
    1.0 - cosine(p, q)
}

/// Default number of clusters handed to the search: `ceil(k / 2)`.
pub fn default_selected(k: usize) -> usize {
    k.div_ceil(2)
}

/// A partition of the indexed documents into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    k: usize,
    centroids: Vec<TermVector>,
    assignment: BTreeMap<DocId, usize>,
    iterations_run: usize,
}

impl ClusterSet {
    /// Rebuilds centroids from a stored assignment.
    pub fn from_assignment(
        vectors: &DocVectors,
        k: usize,
        assignment: BTreeMap<DocId, usize>,
        iterations_run: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK {
                k,
                docs: vectors.len(),
            });
        }
        if assignment.len() != vectors.len() || !assignment.keys().eq(vectors.keys()) {
            return Err(Error::Config(
                "cluster assignment does not match the indexed documents".into(),
            ));
        }
        let mut sizes = vec![0usize; k];
        for &c in assignment.values() {
            if c >= k {
                return Err(Error::Config(format!(
                    "cluster index {c} out of range for k={k}"
                )));
            }
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::EmptyCluster(empty));
        }
        let units: Vec<TermVector> = vectors.values().map(TermVector::normalized).collect();
        let labels: Vec<usize> = assignment.values().copied().collect();
        let centroids = mean_centroids(&units, &labels, k);
        Ok(ClusterSet {
            k,
            centroids,
            assignment,
            iterations_run,
        })
    }

    /// Every document in one cluster.
    pub fn single(vectors: &DocVectors) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let assignment = vectors.keys().map(|&d| (d, 0)).collect();
        Self::from_assignment(vectors, 1, assignment, 0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn centroids(&self) -> &[TermVector] {
        &self.centroids
    }

    pub fn assignment(&self) -> &BTreeMap<DocId, usize> {
        &self.assignment
    }

    pub fn iterations_run(&self) -> usize {
        self.iterations_run
    }

    pub fn cluster_of(&self, doc: DocId) -> Option<usize> {
        self.assignment.get(&doc).copied()
    }

    /// Member ids of one cluster, ascending.
    pub fn members(&self, cluster: usize) -> Vec<DocId> {
        self.assignment
            .iter()
            .filter(|&(_, &c)| c == cluster)
            .map(|(&d, _)| d)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in self.assignment.values() {
            sizes[c] += 1;
        }
        sizes
    }

    /// Text dump: a `# k .. iterations ..` header, one `# cluster i size s`
    /// line per cluster, then `doc-id<TAB>cluster` per document.
    pub fn to_dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# k {} iterations {}", self.k, self.iterations_run);
        for (i, s) in self.sizes().iter().enumerate() {
            let _ = writeln!(out, "# cluster {i} size {s}");
        }
        for (d, c) in &self.assignment {
            let _ = writeln!(out, "{d}\t{c}");
        }
        out
    }

    pub fn from_dump(text: &str, source: &str, vectors: &DocVectors) -> Result<Self> {
        let mut k = None;
        let mut iterations = 0;
        let mut assignment = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let words: Vec<&str> = comment.split_whitespace().collect();
                if let ["k", kv, "iterations", it] = words.as_slice() {
                    k = kv.parse().ok();
                    iterations = it.parse().unwrap_or(0);
                }
                continue;
            }
            let mut parts = line.split('\t');
            let parsed = match (parts.next(), parts.next(), parts.next()) {
                (Some(d), Some(c), None) => d.parse::<DocId>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            let (d, c) =
                parsed.ok_or_else(|| Error::parse(source, i + 1, "expected doc-id<TAB>cluster"))?;
            if assignment.insert(d, c).is_some() {
                return Err(Error::parse(
                    source,
                    i + 1,
                    format!("document {d} assigned twice"),
                ));
            }
        }
        let k = k.unwrap_or_else(|| assignment.values().max().map_or(0, |&m| m + 1));
        Self::from_assignment(vectors, k, assignment, iterations)
    }
}

struct Centroid {
    sparse: TermVector,
    dense: Option<Vec<f64>>,
    norm: f64,
}

impl Centroid {
    fn new(sparse: TermVector, dim: usize, dense_ok: bool) -> Self {
        let dense = dense_ok.then(|| {
            let mut d = vec![0.0; dim];
            for (t, w) in sparse.iter() {
                d[t as usize] = w;
            }
            d
        });
        let norm = sparse.norm();
        Centroid {
            sparse,
            dense,
            norm,
        }
    }

    /// Sums products in term order, so dense and sparse paths agree bit for bit.
    fn distance(&self, doc: &TermVector, doc_norm: f64) -> f64 {
        let denom = doc_norm * self.norm;
        if denom == 0.0 {
            return 1.0;
        }
        let dot = match &self.dense {
            Some(d) => doc.iter().map(|(t, w)| w * d[t as usize]).sum::<f64>(),
            None => doc.dot(&self.sparse),
        };
        1.0 - (dot / denom).clamp(0.0, 1.0)
    }
}

fn mean_centroids(units: &[TermVector], labels: &[usize], k: usize) -> Vec<TermVector> {
    let mut sums: Vec<HashMap<u32, f64>> = vec![HashMap::new(); k];
    let mut counts = vec![0usize; k];
    for (v, &c) in units.iter().zip(labels) {
        counts[c] += 1;
        for (t, w) in v.iter() {
            *sums[c].entry(t).or_insert(0.0) += w;
        }
    }
    sums.into_iter()
        .zip(counts)
        .map(|(sum, n)| TermVector::from_pairs(sum.into_iter().map(|(t, s)| (t, s / n as f64))))
        .collect()
}

/// Per-iteration record kept by [`kmeans_cluster_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansTrace {
    /// Summed cosine distance of every document to its centroid after each update.
    pub objective: Vec<f64>,
    /// Number of reassigned documents in each iteration.
    pub changed: Vec<usize>,
}

pub fn kmeans_cluster(
    vectors: &DocVectors,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterSet> {
    kmeans_cluster_traced(vectors, k, seed, max_iter).map(|(cs, _)| cs)
}

pub fn kmeans_cluster_traced(
    vectors: &DocVectors,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<(ClusterSet, KMeansTrace)> {
    let n = vectors.len();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, docs: n });
    }
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be at least 1".into()));
    }
    let ids: Vec<DocId> = vectors.keys().copied().collect();
    let units: Vec<TermVector> = vectors.values().map(TermVector::normalized).collect();
    let norms: Vec<f64> = units.iter().map(TermVector::norm).collect();
    let dim = units.iter().map(TermVector::dim).max().unwrap_or(0);
    let dense_ok = k.saturating_mul(dim) <= DENSE_CENTROID_LIMIT;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = rand::seq::index::sample(&mut rng, n, k);
    let mut centroids: Vec<Centroid> = seeds
        .iter()
        .map(|i| Centroid::new(units[i].clone(), dim, dense_ok))
        .collect();

    let mut labels: Vec<usize> = vec![usize::MAX; n];
    let mut trace = KMeansTrace {
        objective: Vec::new(),
        changed: Vec::new(),
    };
    let mut iterations_run = 0;

    for iter in 1..=max_iter {
        let mut nearest: Vec<(usize, f64)> = units
            .par_iter()
            .zip(norms.par_iter())
            .map(|(u, &un)| {
                let mut best = (0, f64::INFINITY);
                for (j, c) in centroids.iter().enumerate() {
                    let d = c.distance(u, un);
                    if d < best.1 {
                        best = (j, d);
                    }
                }
                best
            })
            .collect();
        repair_empty(&mut nearest, k);

        let changed = nearest
            .iter()
            .zip(&labels)
            .filter(|((c, _), &old)| *c != old)
            .count();
        labels = nearest.iter().map(|&(c, _)| c).collect();

        centroids = mean_centroids(&units, &labels, k)
            .into_iter()
            .map(|v| Centroid::new(v, dim, dense_ok))
            .collect();
        let objective = units
            .par_iter()
            .zip(norms.par_iter())
            .zip(labels.par_iter())
            .map(|((u, &un), &c)| centroids[c].distance(u, un))
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        trace.objective.push(objective);
        trace.changed.push(changed);
        iterations_run = iter;
        if changed == 0 {
            break;
        }
    }

    let cs = ClusterSet {
        k,
        centroids: centroids.into_iter().map(|c| c.sparse).collect(),
        assignment: ids.into_iter().zip(labels).collect(),
        iterations_run,
    };
    Ok((cs, trace))
}

/// Moves into each empty cluster the document farthest from its own
/// centroid, taken from clusters that keep at least one member.
fn repair_empty(nearest: &mut [(usize, f64)], k: usize) {
    let mut sizes = vec![0usize; k];
    for &(c, _) in nearest.iter() {
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for (i, &(c, d)) in nearest.iter().enumerate() {
            if sizes[c] > 1 && pick.is_none_or(|p| d > nearest[p].1) {
                pick = Some(i);
            }
        }
        // k <= n guarantees a cluster with two or more members
        let i = pick.expect("no donor cluster for empty cluster");
        sizes[nearest[i].0] -= 1;
        sizes[empty] += 1;
        nearest[i] = (empty, 0.0);
    }
}

/// The `m` clusters whose centroids are most similar to the query, best
/// first; equal similarities keep the lower cluster index first.
pub fn select_relevant_clusters(cs: &ClusterSet, q: &TermVector, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > cs.k {
        return Err(Error::InvalidSelection { m, k: cs.k });
    }
    let scores: Vec<f64> = cs.centroids.iter().map(|c| cosine(c, q)).collect();
    let mut order: Vec<usize> = (0..cs.k).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(m);
    Ok(order)
}
