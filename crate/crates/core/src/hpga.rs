//! Two-level parallel genetic search over query-relevant clusters.
//!
//! Each selected cluster becomes a deme (island). Demes evolve independently
//! between migrations and fitness inside a deme is evaluated in parallel.
//! A chromosome is a document vector tagged with the document it descends
//! from; the final ranking scores each document by the best fitness ever
//! seen in its lineage.
//!
//! Every deme draws from its own random stream derived from
//! `(seed, deme index, generation)`, so results do not depend on how many
//! worker threads run the search.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::kmeans::ClusterSet;
use crate::vsm::{cosine, DocVectors, TermId, TermVector};

pub const DEFAULT_GENERATIONS: usize = 50;
pub const DEFAULT_MIGRATION_INTERVAL: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: TermVector,
    pub provenance: DocId,
    pub fitness: Option<f64>,
}

impl Chromosome {
    pub fn new(genes: TermVector, provenance: DocId) -> Self {
        Chromosome {
            genes,
            provenance,
            fitness: None,
        }
    }

    fn score(&self) -> f64 {
        self.fitness.unwrap_or(0.0)
    }
}

/// Fitter first; equal fitness puts the lower provenance first.
fn fitter(a: &Chromosome, b: &Chromosome) -> std::cmp::Ordering {
    b.score()
        .total_cmp(&a.score())
        .then(a.provenance.cmp(&b.provenance))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deme {
    pub index: usize,
    pub chromosomes: Vec<Chromosome>,
    pub generation: usize,
}

impl Deme {
    pub fn len(&self) -> usize {
        self.chromosomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chromosomes.is_empty()
    }

    /// `max(1, ceil(4% of the deme))`, or 0 when the deme is too small for
    /// genetic operators.
    pub fn elite_count(&self) -> usize {
        elite_count(self.len())
    }

    pub fn best_fitness(&self) -> f64 {
        self.chromosomes
            .iter()
            .map(Chromosome::score)
            .fold(0.0, f64::max)
    }

    pub fn mean_fitness(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.chromosomes.iter().map(Chromosome::score).sum::<f64>() / self.len() as f64
    }
}

pub fn elite_count(size: usize) -> usize {
    if size < 2 {
        0
    } else {
        (4 * size).div_ceil(100).max(1)
    }
}

/// `max(1, ceil(5% of the deme))`.
pub fn default_migration_count(size: usize) -> usize {
    (5 * size).div_ceil(100).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generations {
    Fixed(usize),
    /// As many generations as there are chromosomes across all demes.
    PopulationSize,
}

/// Where crossover draws its two exchange positions from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverSpace {
    /// Union of the two parents' non-zero terms.
    Support,
    /// Every term id below the vocabulary size.
    Vocabulary(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub generations: Generations,
    pub migration_interval: usize,
    /// `None` uses `max(1, ceil(5%))` of the receiving deme.
    pub migration_count: Option<usize>,
    pub seed: u64,
    pub mutation_enabled: bool,
    /// Per-offspring probability of scaling one gene when mutation is on.
    pub mutation_rate: f64,
    pub crossover_space: CrossoverSpace,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            generations: Generations::Fixed(DEFAULT_GENERATIONS),
            migration_interval: DEFAULT_MIGRATION_INTERVAL,
            migration_count: None,
            seed: 0,
            mutation_enabled: false,
            mutation_rate: 0.05,
            crossover_space: CrossoverSpace::Support,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.migration_interval == 0 {
            return Err(Error::Config(
                "migration interval must be at least 1".into(),
            ));
        }
        if self.migration_count == Some(0) {
            return Err(Error::Config("migration count must be at least 1".into()));
        }
        if self.generations == Generations::Fixed(0) {
            return Err(Error::Config("generations must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::Config("mutation rate must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn generations_for(&self, population: usize) -> usize {
        match self.generations {
            Generations::Fixed(n) => n,
            Generations::PopulationSize => population,
        }
    }
}

/// Documents ordered by score, best first, ties by ascending id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: Option<u32>,
    pub entries: Vec<(DocId, f64)>,
}

impl RankedList {
    pub fn from_scores<I: IntoIterator<Item = (DocId, f64)>>(
        query_id: Option<u32>,
        scores: I,
    ) -> Self {
        let mut entries: Vec<(DocId, f64)> = scores.into_iter().collect();
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        RankedList { query_id, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = DocId> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    /// `rank,doc_id,score` with a header line; ranks start at 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,doc_id,score\n");
        for (i, (d, s)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{d},{s}", i + 1);
        }
        out
    }
}

/// One deme per selected cluster, one chromosome per member document.
pub fn init_demes(cs: &ClusterSet, selected: &[usize], vectors: &DocVectors) -> Result<Vec<Deme>> {
    if selected.is_empty() {
        return Err(Error::EmptySelection);
    }
    selected
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c >= cs.k() {
                return Err(Error::InvalidSelection { m: c, k: cs.k() });
            }
            let chromosomes: Vec<Chromosome> = cs
                .members(c)
                .into_iter()
                .map(|d| {
                    let genes = vectors.get(&d).cloned().ok_or_else(|| {
                        Error::Config(format!("document {d} is clustered but not indexed"))
                    })?;
                    Ok(Chromosome::new(genes, d))
                })
                .collect::<Result<_>>()?;
            if chromosomes.is_empty() {
                return Err(Error::EmptyCluster(c));
            }
            Ok(Deme {
                index: i,
                chromosomes,
                generation: 0,
            })
        })
        .collect()
}

/// Master/slave step: every chromosome is scored against the query in parallel.
pub fn evaluate_deme(d: &mut Deme, q: &TermVector) {
    d.chromosomes
        .par_iter_mut()
        .for_each(|c| c.fitness = Some(cosine(&c.genes, q)));
}

/// `fitness[i] / total`, uniform when every fitness is zero.
pub fn fitness_probabilities(d: &Deme) -> Vec<f64> {
    let total: f64 = d.chromosomes.iter().map(Chromosome::score).sum();
    let n = d.len();
    if total > 0.0 {
        d.chromosomes.iter().map(|c| c.score() / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

/// The `elite_count` fittest chromosomes, copied unchanged.
pub fn take_elite(d: &Deme) -> Vec<Chromosome> {
    let mut order: Vec<&Chromosome> = d.chromosomes.iter().collect();
    order.sort_by(|a, b| fitter(a, b));
    order.into_iter().take(d.elite_count()).cloned().collect()
}

/// Cumulative fitness table for roulette draws.
struct Wheel {
    cumulative: Vec<f64>,
    last_positive: Option<usize>,
}

impl Wheel {
    fn new(d: &Deme) -> Self {
        let mut acc = 0.0;
        let cumulative = d
            .chromosomes
            .iter()
            .map(|c| {
                acc += c.score();
                acc
            })
            .collect();
        let last_positive = d.chromosomes.iter().rposition(|c| c.score() > 0.0);
        Wheel {
            cumulative,
            last_positive,
        }
    }

    fn spin<R: Rng>(&self, rng: &mut R) -> usize {
        let n = self.cumulative.len();
        let Some(last) = self.last_positive else {
            return rng.gen_range(0..n);
        };
        let total = self.cumulative[n - 1];
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        i.min(last)
    }
}

/// Hybrid roulette-tournament selection. For each parent a pool size `r`
/// is drawn uniformly from `1..=n`, the pool is filled by `r` roulette
/// spins, and the fittest pool member wins; among equally fit members the
/// one drawn first wins, so equal fitness means equal selection odds.
/// Returns indices into the deme.
pub fn hrts_select<R: Rng>(d: &Deme, rng: &mut R) -> Result<(usize, usize)> {
    if d.len() < 2 {
        return Err(Error::DemeTooSmall(d.len()));
    }
    Ok(hrts_select_with(d, &Wheel::new(d), rng))
}

fn hrts_select_with<R: Rng>(d: &Deme, wheel: &Wheel, rng: &mut R) -> (usize, usize) {
    let mut pick = || {
        let r = rng.gen_range(1..=d.len());
        let mut best = wheel.spin(rng);
        for _ in 1..r {
            let i = wheel.spin(rng);
            if d.chromosomes[i].score() > d.chromosomes[best].score() {
                best = i;
            }
        }
        best
    };
    let first = pick();
    let second = pick();
    (first, second)
}

/// Swaps the genes at `positions` between two vectors.
pub fn exchange_positions(
    a: &TermVector,
    b: &TermVector,
    positions: &[TermId],
) -> (TermVector, TermVector) {
    let mut ca = a.clone();
    let mut cb = b.clone();
    for &p in positions {
        ca.set(p, b.get(p));
        cb.set(p, a.get(p));
    }
    (ca, cb)
}

/// Two-position crossover. Both children take the provenance of the fitter
/// parent (the first on ties) and come back unevaluated.
pub fn crossover_two_positions<R: Rng>(
    p1: &Chromosome,
    p2: &Chromosome,
    space: CrossoverSpace,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    let candidates: Vec<TermId> = match space {
        CrossoverSpace::Support => {
            let mut ids: Vec<TermId> = p1.genes.ids().chain(p2.genes.ids()).collect();
            ids.sort_unstable();
            ids.dedup();
            ids
        }
        CrossoverSpace::Vocabulary(n) => (0..n).collect(),
    };
    let positions: Vec<TermId> = match candidates.len() {
        0 => Vec::new(),
        1 => vec![candidates[0]],
        len => index::sample(rng, len, 2)
            .iter()
            .map(|i| candidates[i])
            .collect(),
    };
    let (g1, g2) = exchange_positions(&p1.genes, &p2.genes, &positions);
    let provenance = if p2.score() > p1.score() {
        p2.provenance
    } else {
        p1.provenance
    };
    (
        Chromosome::new(g1, provenance),
        Chromosome::new(g2, provenance),
    )
}

fn mutate<R: Rng>(c: &mut Chromosome, rng: &mut R) {
    if c.genes.is_empty() {
        return;
    }
    let (t, w) = c.genes.entries()[rng.gen_range(0..c.genes.len())];
    c.genes.set(t, w * rng.gen_range(0.5..1.5));
}

/// Elites plus offspring from repeated selection and crossover, refilled to
/// the original size. Demes with fewer than two chromosomes only age.
pub fn next_generation<R: Rng>(d: &Deme, cfg: &GaConfig, rng: &mut R) -> Deme {
    let n = d.len();
    let mut next = Deme {
        index: d.index,
        chromosomes: Vec::with_capacity(n),
        generation: d.generation + 1,
    };
    if n < 2 {
        next.chromosomes = d.chromosomes.clone();
        return next;
    }
    next.chromosomes = take_elite(d);
    let wheel = Wheel::new(d);
    while next.chromosomes.len() < n {
        let (a, b) = hrts_select_with(d, &wheel, rng);
        let (mut c1, mut c2) = crossover_two_positions(
            &d.chromosomes[a],
            &d.chromosomes[b],
            cfg.crossover_space,
            rng,
        );
        if cfg.mutation_enabled {
            for c in [&mut c1, &mut c2] {
                if rng.gen_bool(cfg.mutation_rate) {
                    mutate(c, rng);
                }
            }
        }
        next.chromosomes.push(c1);
        if next.chromosomes.len() < n {
            next.chromosomes.push(c2);
        }
    }
    next
}

/// Synchronous ring migration: deme `i` sends copies of its fittest
/// chromosomes to deme `(i + 1) % D`, which overwrites its least fit. All
/// migrants are chosen before any deme changes, and a receiver never loses
/// its own best chromosome.
pub fn migrate(demes: &mut [Deme], cfg: &GaConfig) {
    let count = demes.len();
    if count < 2 {
        return;
    }
    let outgoing: Vec<Vec<Chromosome>> = demes
        .iter()
        .enumerate()
        .map(|(i, sender)| {
            let receiver = &demes[(i + 1) % count];
            let wanted = cfg
                .migration_count
                .unwrap_or_else(|| default_migration_count(receiver.len()));
            let n = wanted
                .min(sender.len())
                .min(receiver.len().saturating_sub(1));
            let mut best: Vec<&Chromosome> = sender.chromosomes.iter().collect();
            best.sort_by(|a, b| fitter(a, b));
            best.into_iter().take(n).cloned().collect()
        })
        .collect();

    for (i, migrants) in outgoing.into_iter().enumerate() {
        let receiver = &mut demes[(i + 1) % count];
        let mut worst: Vec<usize> = (0..receiver.len()).collect();
        worst.sort_by(|&a, &b| {
            fitter(&receiver.chromosomes[b], &receiver.chromosomes[a]).then(b.cmp(&a))
        });
        for (slot, m) in worst.into_iter().zip(migrants) {
            receiver.chromosomes[slot] = m;
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream for one deme in one generation.
pub fn deme_rng(seed: u64, deme: usize, generation: usize) -> ChaCha8Rng {
    let s = mix(mix(mix(seed) ^ deme as u64) ^ generation as u64);
    ChaCha8Rng::seed_from_u64(s)
}

/// Best and mean fitness of one deme after evaluation in one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub generation: usize,
    pub deme: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// `gen,deme,best_fitness,mean_fitness` lines with a header.
pub fn trace_to_text(rows: &[TraceRow]) -> String {
    let mut out = String::from("gen,deme,best_fitness,mean_fitness\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.generation, r.deme, r.best_fitness, r.mean_fitness
        );
    }
    out
}

pub fn run_hpga(
    vectors: &DocVectors,
    cs: &ClusterSet,
    selected: &[usize],
    q: &TermVector,
    cfg: &GaConfig,
) -> Result<RankedList> {
    run_hpga_traced(vectors, cs, selected, q, cfg).map(|(r, _)| r)
}

/// Evaluate, record, migrate on the interval, breed; repeated for the
/// configured number of generations. Each document is scored by the best
/// fitness observed on any chromosome of its lineage.
pub fn run_hpga_traced(
    vectors: &DocVectors,
    cs: &ClusterSet,
    selected: &[usize],
    q: &TermVector,
    cfg: &GaConfig,
) -> Result<(RankedList, Vec<TraceRow>)> {
    cfg.validate()?;
    let mut demes = init_demes(cs, selected, vectors)?;
    let population: usize = demes.iter().map(Deme::len).sum();
    let generations = cfg.generations_for(population).max(1);
    let mut scores: BTreeMap<DocId, f64> = BTreeMap::new();
    let mut trace = Vec::with_capacity(generations * demes.len());

    for gen in 0..generations {
        demes.par_iter_mut().for_each(|d| evaluate_deme(d, q));
        for d in &demes {
            for c in &d.chromosomes {
                let f = c.score();
                scores
                    .entry(c.provenance)
                    .and_modify(|s| *s = s.max(f))
                    .or_insert(f);
            }
            trace.push(TraceRow {
                generation: gen,
                deme: d.index,
                best_fitness: d.best_fitness(),
                mean_fitness: d.mean_fitness(),
            });
        }
        if gen > 0 && gen % cfg.migration_interval == 0 {
            migrate(&mut demes, cfg);
        }
        if gen + 1 < generations {
            demes = demes
                .par_iter()
                .map(|d| next_generation(d, cfg, &mut deme_rng(cfg.seed, d.index, d.generation)))
                .collect();
        }
    }
    Ok((RankedList::from_scores(None, scores), trace))
}
