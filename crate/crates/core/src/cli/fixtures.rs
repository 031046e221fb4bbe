//! Small synthetic collections and the published precision tables, so the
//! whole pipeline can be exercised without downloading a test collection.
//!
//! Collections are written as `docs.all`, `queries.qry` and `qrels.rel` in
//! the SMART layout the indexer reads.

use std::fmt::Write;

use anyhow::bail;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evalkit::{csv_header, PrecisionRow};

pub const DOCS_FILE: &str = "docs.all";
pub const QUERIES_FILE: &str = "queries.qry";
pub const QRELS_FILE: &str = "qrels.rel";

/// One published comparison: our precision row against a baseline row and
/// the improvement row as printed.
#[derive(Debug, Clone, Copy)]
pub struct PublishedTable {
    pub dataset: &'static str,
    pub baseline: &'static str,
    pub ours: [f64; 9],
    pub ours_avg: &'static str,
    pub base: [f64; 9],
    pub base_avg: &'static str,
    pub improvement: [i64; 9],
    pub improvement_avg: &'static str,
}

const HPGA_NPL: [f64; 9] = [0.9, 0.87, 0.84, 0.77, 0.74, 0.66, 0.58, 0.46, 0.38];
const HPGA_CISI: [f64; 9] = [0.89, 0.84, 0.78, 0.76, 0.69, 0.55, 0.51, 0.47, 0.44];
const HPGA_CACM: [f64; 9] = [0.94, 0.9, 0.87, 0.85, 0.8, 0.77, 0.66, 0.54, 0.41];

pub const PUBLISHED_TABLES: [PublishedTable; 6] = [
    PublishedTable {
        dataset: "npl",
        baseline: "ga",
        ours: HPGA_NPL,
        ours_avg: "0.6888",
        base: [0.88, 0.66, 0.59, 0.44, 0.4, 0.31, 0.27, 0.19, 0.15],
        base_avg: "0.4322",
        improvement: [2, 21, 25, 33, 34, 35, 31, 27, 23],
        improvement_avg: "25.6666",
    },
    PublishedTable {
        dataset: "cisi",
        baseline: "ga",
        ours: HPGA_CISI,
        ours_avg: "0.6588",
        base: [0.8, 0.55, 0.48, 0.39, 0.36, 0.28, 0.24, 0.2, 0.16],
        base_avg: "0.3844",
        improvement: [9, 29, 30, 37, 33, 27, 27, 27, 28],
        improvement_avg: "27.4444",
    },
    PublishedTable {
        dataset: "cacm",
        baseline: "ga",
        ours: HPGA_CACM,
        ours_avg: "0.7488",
        base: [0.79, 0.47, 0.42, 0.27, 0.23, 0.16, 0.14, 0.1, 0.09],
        base_avg: "0.2966",
        improvement: [15, 43, 45, 58, 57, 61, 52, 44, 32],
        improvement_avg: "45.2222",
    },
    PublishedTable {
        dataset: "npl",
        baseline: "classic",
        ours: HPGA_NPL,
        ours_avg: "0.6888",
        base: [0.73, 0.5, 0.44, 0.34, 0.31, 0.24, 0.22, 0.17, 0.15],
        base_avg: "0.3444",
        improvement: [17, 37, 40, 43, 43, 42, 36, 29, 23],
        improvement_avg: "34.4444",
    },
    PublishedTable {
        dataset: "cisi",
        baseline: "classic",
        ours: HPGA_CISI,
        ours_avg: "0.6588",
        base: [0.68, 0.56, 0.46, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15],
        base_avg: "0.3722",
        improvement: [21, 28, 32, 36, 34, 25, 26, 27, 29],
        improvement_avg: "28.6666",
    },
    PublishedTable {
        dataset: "cacm",
        baseline: "classic",
        ours: HPGA_CACM,
        ours_avg: "0.7488",
        base: [0.72, 0.45, 0.37, 0.25, 0.22, 0.16, 0.14, 0.11, 0.09],
        base_avg: "0.2788",
        improvement: [22, 45, 50, 60, 58, 61, 52, 43, 32],
        improvement_avg: "47",
    },
];

/// Files for fixture `kind`, as (relative path, contents) pairs.
pub fn generate(kind: &str, seed: u64) -> anyhow::Result<Vec<(String, String)>> {
    let files = match kind {
        "duplicates" => collection(&duplicates()),
        "disjoint" => collection(&disjoint()),
        "separated" => collection(&separated(seed)),
        "topics" => collection(&topics(seed, 6, 40, 5)),
        "tables" => tables(),
        other => bail!("unknown fixture kind {other:?} (expected duplicates, disjoint, separated, topics or tables)"),
    };
    Ok(files)
}

/// An in-memory SMART collection.
#[derive(Debug, Clone, Default)]
pub struct Collection {
    pub docs: Vec<(u32, String)>,
    pub queries: Vec<(u32, String)>,
    pub qrels: Vec<(u32, u32)>,
}

impl Collection {
    pub fn docs_text(&self) -> String {
        smart(&self.docs)
    }

    pub fn queries_text(&self) -> String {
        smart(&self.queries)
    }

    pub fn qrels_text(&self) -> String {
        let mut out = String::new();
        for (q, d) in &self.qrels {
            let _ = writeln!(out, "{q} {d} 0 0");
        }
        out
    }
}

fn smart(items: &[(u32, String)]) -> String {
    let mut out = String::new();
    for (id, text) in items {
        let _ = writeln!(out, ".I {id}\n.W\n{text}");
    }
    out
}

fn collection(c: &Collection) -> Vec<(String, String)> {
    vec![
        (DOCS_FILE.to_string(), c.docs_text()),
        (QUERIES_FILE.to_string(), c.queries_text()),
        (QRELS_FILE.to_string(), c.qrels_text()),
    ]
}

const DUPLICATE_TOPICS: [&str; 4] = [
    "volcanic eruption magma basalt",
    "orbital satellite telescope galaxy",
    "violin orchestra symphony concerto",
    "glacier tundra permafrost iceberg",
];

/// Every query's relevant documents repeat the query text verbatim, so a
/// cosine ranking puts them first with similarity 1.
pub fn duplicates() -> Collection {
    let mut c = Collection::default();
    let mut next = 1;
    for (qi, topic) in DUPLICATE_TOPICS.iter().enumerate() {
        let q = qi as u32 + 1;
        c.queries.push((q, topic.to_string()));
        for _ in 0..3 {
            c.docs.push((next, topic.to_string()));
            c.qrels.push((q, next));
            next += 1;
        }
    }
    for filler in [
        "harbour cargo freight",
        "wheat barley harvest",
        "copper bronze alloy",
        "rainfall monsoon flood",
    ] {
        c.docs.push((next, filler.to_string()));
        next += 1;
    }
    c
}

/// Queries share no terms with the collection and their judged documents do
/// not exist, so every precision cell is zero.
pub fn disjoint() -> Collection {
    let mut c = duplicates();
    c.queries = vec![
        (1, "quantum chromodynamics".into()),
        (2, "medieval heraldry".into()),
    ];
    c.qrels = vec![(1, 9001), (1, 9002), (2, 9003)];
    c
}

/// Two groups of near-duplicate documents on unrelated vocabularies.
pub fn separated(seed: u64) -> Collection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups: [(&str, &[&str]); 2] = [
        ("reactor", &["neutron", "uranium", "fission", "coolant"]),
        ("pasta", &["tomato", "basil", "garlic", "olive"]),
    ];
    let mut c = Collection::default();
    let mut next = 1;
    for (gi, (core, extras)) in groups.iter().enumerate() {
        let q = gi as u32 + 1;
        c.queries.push((q, format!("{core} {}", extras[0])));
        for _ in 0..6 {
            // a heavy shared core keeps within-group cosine near 1
            let mut words = vec![*core; 8];
            words.extend(extras.iter().copied());
            words.push(extras[rng.gen_range(0..extras.len())]);
            c.docs.push((next, words.join(" ")));
            c.qrels.push((q, next));
            next += 1;
        }
    }
    c
}

/// Seeded pseudo-word vocabulary: lowercase syllables, no digits.
fn pseudo_words(rng: &mut ChaCha8Rng, count: usize) -> Vec<String> {
    const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "z"];
    const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
    let mut out: Vec<String> = Vec::with_capacity(count);
    while out.len() < count {
        let syllables = rng.gen_range(3..=4);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        }
        w.push('x');
        if !out.contains(&w) {
            out.push(w);
        }
    }
    out
}

/// A topical collection: each topic has its own vocabulary and every
/// document mixes words from its topic with a shared background.
pub fn topics(
    seed: u64,
    n_topics: usize,
    docs_per_topic: usize,
    queries_per_topic: usize,
) -> Collection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topic_vocab: Vec<Vec<String>> = (0..n_topics).map(|_| pseudo_words(&mut rng, 25)).collect();
    let background = pseudo_words(&mut rng, 60);
    let mut c = Collection::default();
    let mut doc_topic = Vec::new();
    for t in 0..n_topics {
        for _ in 0..docs_per_topic {
            doc_topic.push(t);
        }
    }
    doc_topic.shuffle(&mut rng);
    for (i, &t) in doc_topic.iter().enumerate() {
        let len = rng.gen_range(20..40);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    topic_vocab[t][rng.gen_range(0..topic_vocab[t].len())].as_str()
                } else {
                    background[rng.gen_range(0..background.len())].as_str()
                }
            })
            .collect();
        c.docs.push((i as u32 + 1, words.join(" ")));
    }
    let mut q = 1;
    for (t, vocab) in topic_vocab.iter().enumerate() {
        for _ in 0..queries_per_topic {
            let words: Vec<&str> = (0..4)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].as_str())
                .collect();
            c.queries.push((q, words.join(" ")));
            for (i, &dt) in doc_topic.iter().enumerate() {
                if dt == t {
                    c.qrels.push((q, i as u32 + 1));
                }
            }
            q += 1;
        }
    }
    c
}

fn report(label: &str, cells: &[f64; 9], avg: &str) -> String {
    let mut out = format!("# {label} published\n");
    out.push_str(&csv_header());
    out.push_str("precision");
    for p in cells {
        let _ = write!(out, ",{p}");
    }
    let _ = writeln!(out, ",{avg}");
    out
}

/// One report per engine and dataset, readable by `compare --report-a/-b`.
fn tables() -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = Vec::new();
    for t in &PUBLISHED_TABLES {
        let ours = format!("{}-hpga.csv", t.dataset);
        if !files.iter().any(|(n, _)| *n == ours) {
            files.push((
                ours,
                report(&format!("{} hpga", t.dataset), &t.ours, t.ours_avg),
            ));
        }
        let base = format!("{}-{}.csv", t.dataset, t.baseline);
        files.push((
            base,
            report(
                &format!("{} {}", t.dataset, t.baseline),
                &t.base,
                t.base_avg,
            ),
        ));
    }
    files
}

impl PublishedTable {
    pub fn ours_row(&self) -> PrecisionRow {
        PrecisionRow::new(self.ours)
    }

    pub fn base_row(&self) -> PrecisionRow {
        PrecisionRow::new(self.base)
    }
}
