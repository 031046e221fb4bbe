//! Property tests for the invariants of every module.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use clusterir::corpus::{parse_smart_docs_str, porter_stem, Analyzer, DocId, StopList};
use clusterir::evalkit::{
    classic_ir_rank, f_measure, improvement_row, interpolated_precision_row, PrecisionRow,
};
use clusterir::hpga::{
    crossover_two_positions, deme_rng, elite_count, evaluate_deme, hrts_select, init_demes,
    migrate, next_generation, run_hpga, Chromosome, CrossoverSpace, Deme, GaConfig, Generations,
    RankedList,
};
use clusterir::kmeans::{cos_distance, kmeans_cluster, kmeans_cluster_traced, ClusterSet};
use clusterir::vsm::{
    build_vocabulary, cosine, document_vectors, tokens_vector, DocVectors, TermVector,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn vectors_of(docs: &[clusterir::corpus::Document]) -> DocVectors {
    document_vectors(docs, &build_vocabulary(docs).unwrap())
}

fn random_vectors(r: &mut ChaCha8Rng, n: usize, dim: u32) -> DocVectors {
    (0..n as u32)
        .map(|i| {
            let nnz = r.gen_range(1..6);
            let (v, _) = random_sparse(r, dim, nnz);
            (i * 3 + 1, v)
        })
        .collect()
}

fn random_deme(r: &mut ChaCha8Rng, index: usize, n: usize, q: &TermVector) -> Deme {
    let mut d = Deme {
        index,
        chromosomes: (0..n)
            .map(|i| Chromosome::new(random_sparse(r, 12, 4).0, (index * 1000 + i) as DocId + 1))
            .collect(),
        generation: 0,
    };
    evaluate_deme(&mut d, q);
    d
}

// corpus

proptest! {
    #[test]
    fn analyzed_tokens_are_clean(text in "[ -~\n\t]{0,300}") {
        let a = Analyzer::default();
        for t in a.analyze(&text) {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()), "{t:?}");
            prop_assert!(!a.stoplist.contains(&t), "{t:?} is a stopword");
        }
    }

    #[test]
    fn reanalysis_acts_token_by_token(text in "[a-zA-Z ,.]{0,200}") {
        // Porter is not idempotent, so a second pass may shorten stems; it
        // must still treat every first-pass token independently.
        let a = Analyzer::default();
        let first = a.analyze(&text);
        let second = a.analyze(&first.join(" "));
        let expected: Vec<String> = first
            .iter()
            .filter(|t| t.len() >= 2 && !a.stoplist.contains(t))
            .map(|t| porter_stem(t))
            .filter(|t| !a.stoplist.contains(t))
            .collect();
        prop_assert_eq!(second, expected);
    }

    #[test]
    fn smart_parse_counts_records_and_is_deterministic(
        bodies in prop::collection::vec("[a-z ]{0,40}", 0..20)
    ) {
        let mut text = String::new();
        for (i, b) in bodies.iter().enumerate() {
            text.push_str(&format!(".I {}\n.T\ntitle {i}\n.A\nsomeone\n.W\n{b}\n", i + 1));
        }
        let a = Analyzer::default();
        let docs = parse_smart_docs_str(&text, "gen", &a).unwrap();
        prop_assert_eq!(docs.len(), text.matches(".I ").count());
        let again = with_workers(4, || parse_smart_docs_str(&text, "gen", &a).unwrap());
        prop_assert_eq!(docs, again);
    }
}

#[test]
fn stoplist_membership_ignores_case() {
    let s = StopList::standard();
    assert!(s.contains("The"));
    assert!(s.contains("the"));
    assert!(!s.contains("retrieval"));
}

// vsm

proptest! {
    #[test]
    fn cosine_is_symmetric_bounded_and_scale_free(seed in any::<u64>(), c in 0.001f64..1000.0) {
        let mut r = rng(seed);
        let (p, pd) = random_sparse(&mut r, 30, 8);
        let (q, qd) = random_sparse(&mut r, 30, 8);
        let pq = cosine(&p, &q);
        prop_assert_eq!(pq, cosine(&q, &p));
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((cosine(&p.scaled(c), &q) - pq).abs() < 1e-12);
        prop_assert!((dense_cosine(&pd, &qd) - pq).abs() < 1e-12);
    }

    #[test]
    fn single_term_ranking_ignores_log_base(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..30);
        let docs = random_corpus(&mut r, n, 15);
        let term = format!("t{}", r.gen_range(0..15));
        let ten = DenseModel::build(&docs, f64::log10);
        let e = DenseModel::build(&docs, f64::ln);
        let order = |m: &DenseModel| -> Vec<DocId> {
            let mut ranked: Vec<(DocId, i64)> = m
                .rank(&m.query(std::slice::from_ref(&term)))
                .into_iter()
                .map(|(d, s)| (d, (s * 1e9).round() as i64))
                .collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            ranked.into_iter().map(|(d, _)| d).collect()
        };
        prop_assert_eq!(order(&ten), order(&e));
    }

    #[test]
    fn stored_weights_are_positive(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..30);
        let docs = random_corpus(&mut r, n, 10);
        let vocab = build_vocabulary(&docs).unwrap();
        for v in document_vectors(&docs, &vocab).values() {
            for (t, w) in v.iter() {
                prop_assert!(w > 0.0);
                prop_assert!((t as usize) < vocab.len());
            }
        }
    }
}

// kmeans

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kmeans_partition_and_objective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..40);
        let vectors = random_vectors(&mut r, n, 20);
        let k = r.gen_range(1..=n);
        let (cs, trace) = kmeans_cluster_traced(&vectors, k, seed, 50).unwrap();

        prop_assert!(cs.iterations_run() <= 50);
        prop_assert_eq!(cs.assignment().len(), n);
        prop_assert!(vectors.keys().all(|d| cs.cluster_of(*d).is_some()));
        prop_assert!(cs.sizes().iter().all(|&s| s > 0));
        for w in trace.objective.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "objective rose: {:?}", trace.objective);
        }
        // centroids are the mean of the members' unit vectors
        for c in 0..k {
            let members = cs.members(c);
            let mut mean: BTreeMap<u32, f64> = BTreeMap::new();
            for d in &members {
                for (t, w) in vectors[d].normalized().iter() {
                    *mean.entry(t).or_default() += w / members.len() as f64;
                }
            }
            let centroid = &cs.centroids()[c];
            for (t, w) in mean {
                prop_assert!((centroid.get(t) - w).abs() < 1e-9);
            }
        }
        if trace.changed.last() == Some(&0) {
            for (d, v) in &vectors {
                let own = cos_distance(v, &cs.centroids()[cs.cluster_of(*d).unwrap()]);
                let best = cs.centroids().iter().map(|c| cos_distance(v, c)).fold(f64::INFINITY, f64::min);
                prop_assert!(own <= best + 1e-12, "doc {d} not at a nearest centroid");
            }
        }
    }

    #[test]
    fn kmeans_ignores_worker_count(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..60);
        let vectors = random_vectors(&mut r, n, 25);
        let k = r.gen_range(1..=n.min(8));
        let one = with_workers(1, || kmeans_cluster(&vectors, k, seed, 100).unwrap());
        let many = with_workers(8, || kmeans_cluster(&vectors, k, seed, 100).unwrap());
        prop_assert_eq!(one.to_dump(), many.to_dump());
        prop_assert_eq!(one.centroids(), many.centroids());
    }

    #[test]
    fn separated_groups_are_recovered(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (vectors, first) = separated_vectors(&mut r, 8);
        let cs = kmeans_cluster(&vectors, 2, seed, 100).unwrap();
        let c0 = cs.cluster_of(*first.iter().next().unwrap()).unwrap();
        for d in vectors.keys() {
            prop_assert_eq!(cs.cluster_of(*d) == Some(c0), first.contains(d));
        }
    }
}

// hpga

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generations_conserve_size_and_keep_the_best(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let (q, _) = random_sparse(&mut r, 12, 5);
        let cfg = GaConfig::default();
        let mut d = random_deme(&mut r, 0, n, &q);
        for g in 0..10 {
            let before = d.best_fitness();
            let elites: Vec<Chromosome> = {
                let mut c = d.chromosomes.clone();
                c.sort_by(|a, b| b.fitness.unwrap().total_cmp(&a.fitness.unwrap()).then(a.provenance.cmp(&b.provenance)));
                c.truncate(elite_count(n));
                c
            };
            let mut next = next_generation(&d, &cfg, &mut deme_rng(seed, 0, g));
            prop_assert_eq!(next.len(), n);
            prop_assert_eq!(next.generation, d.generation + 1);
            for e in &elites {
                prop_assert!(next.chromosomes.contains(e));
            }
            evaluate_deme(&mut next, &q);
            prop_assert!(next.best_fitness() >= before);
            d = next;
        }
    }

    #[test]
    fn crossover_preserves_each_position(seed in any::<u64>(), vocab in prop::bool::ANY) {
        let mut r = rng(seed);
        let p1 = Chromosome { fitness: Some(r.gen()), ..Chromosome::new(random_sparse(&mut r, 15, 6).0, 1) };
        let p2 = Chromosome { fitness: Some(r.gen()), ..Chromosome::new(random_sparse(&mut r, 15, 6).0, 2) };
        let space = if vocab { CrossoverSpace::Vocabulary(15) } else { CrossoverSpace::Support };
        let (c1, c2) = crossover_two_positions(&p1, &p2, space, &mut r);
        let mut swapped = 0;
        for t in 0..15 {
            let mut before = [p1.genes.get(t), p2.genes.get(t)];
            let mut after = [c1.genes.get(t), c2.genes.get(t)];
            before.sort_by(f64::total_cmp);
            after.sort_by(f64::total_cmp);
            prop_assert_eq!(before, after);
            if c1.genes.get(t) != p1.genes.get(t) {
                swapped += 1;
            }
        }
        prop_assert!(swapped <= 2);
        let fitter = if p2.fitness > p1.fitness { 2 } else { 1 };
        prop_assert_eq!((c1.provenance, c2.provenance), (fitter, fitter));
        prop_assert!(c1.fitness.is_none() && c2.fitness.is_none());
    }

    #[test]
    fn migration_conserves_counts_and_best(seed in any::<u64>(), demes in 1usize..6, count in prop::option::of(1usize..5)) {
        let mut r = rng(seed);
        let (q, _) = random_sparse(&mut r, 12, 5);
        let mut ds: Vec<Deme> = (0..demes).map(|i| { let n = r.gen_range(1..15); random_deme(&mut r, i, n, &q) }).collect();
        let sizes: Vec<usize> = ds.iter().map(Deme::len).collect();
        let bests: Vec<f64> = ds.iter().map(Deme::best_fitness).collect();
        let global = bests.iter().copied().fold(0.0, f64::max);
        let cfg = GaConfig { migration_count: count, ..GaConfig::default() };
        migrate(&mut ds, &cfg);
        prop_assert_eq!(ds.iter().map(Deme::len).collect::<Vec<_>>(), sizes);
        for (d, b) in ds.iter().zip(&bests) {
            prop_assert!(d.best_fitness() >= *b);
        }
        prop_assert!(ds.iter().map(Deme::best_fitness).fold(0.0, f64::max) >= global);
    }

    #[test]
    fn selection_stays_in_the_deme(seed in any::<u64>(), n in 2usize..30) {
        let mut r = rng(seed);
        let (q, _) = random_sparse(&mut r, 12, 5);
        let d = random_deme(&mut r, 0, n, &q);
        let (a, b) = hrts_select(&d, &mut r).unwrap();
        prop_assert!(a < n && b < n);

        let mut lone = d.clone();
        let winner = r.gen_range(0..n);
        for (i, c) in lone.chromosomes.iter_mut().enumerate() {
            c.fitness = Some(if i == winner { 0.7 } else { 0.0 });
        }
        prop_assert_eq!(hrts_select(&lone, &mut r).unwrap(), (winner, winner));
    }

    #[test]
    fn search_scores_are_sound_and_reproducible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..40);
        let docs = random_corpus(&mut r, n, 12);
        let vocab = build_vocabulary(&docs).unwrap();
        let vectors = document_vectors(&docs, &vocab);
        let q = tokens_vector(&random_query(&mut r, 12), &vocab);
        let k = r.gen_range(1..=n.min(5));
        let cs = kmeans_cluster(&vectors, k, seed, 100).unwrap();
        let selected: Vec<usize> = (0..k).filter(|_| r.gen_bool(0.6)).collect();
        let selected = if selected.is_empty() { vec![0] } else { selected };
        let cfg = GaConfig { generations: Generations::Fixed(r.gen_range(1..12)), seed, ..GaConfig::default() };

        let ranked = with_workers(1, || run_hpga(&vectors, &cs, &selected, &q, &cfg).unwrap());
        let again = with_workers(8, || run_hpga(&vectors, &cs, &selected, &q, &cfg).unwrap());
        prop_assert_eq!(&ranked, &again);

        let members: BTreeSet<DocId> = selected.iter().flat_map(|&c| cs.members(c)).collect();
        prop_assert_eq!(ranked.doc_ids().collect::<BTreeSet<_>>(), members.clone());
        check_ranked_list(&ranked)?;
        for (d, s) in &ranked.entries {
            prop_assert!(*s >= cosine(&vectors[d], &q));
            prop_assert!((0.0..=1.0).contains(s));
        }
        let demes = init_demes(&cs, &selected, &vectors).unwrap();
        prop_assert_eq!(demes.iter().map(Deme::len).sum::<usize>(), members.len());
    }
}

fn check_ranked_list(r: &RankedList) -> Result<(), TestCaseError> {
    let ids: BTreeSet<DocId> = r.doc_ids().collect();
    prop_assert_eq!(ids.len(), r.len());
    for w in r.entries.windows(2) {
        prop_assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
    }
    Ok(())
}

// evalkit

proptest! {
    #[test]
    fn classic_matches_dense_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=50);
        let docs = random_corpus(&mut r, n, 20);
        let vocab = build_vocabulary(&docs).unwrap();
        let vectors = document_vectors(&docs, &vocab);
        let query = random_query(&mut r, 20);
        let ranked = classic_ir_rank(&tokens_vector(&query, &vocab), &vectors);
        let model = DenseModel::build(&docs, f64::log10);
        let oracle = model.rank(&model.query(&query));
        prop_assert_eq!(ranked.doc_ids().collect::<Vec<_>>(), oracle.iter().map(|x| x.0).collect::<Vec<_>>());
        for ((_, a), (_, b)) in ranked.entries.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolated_precision_never_rises(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..60);
        let ranked = RankedList::from_scores(None, (0..n as DocId).map(|d| (d + 1, r.gen::<f64>())));
        let relevant: BTreeSet<DocId> = (0..r.gen_range(1..10)).map(|_| r.gen_range(1..=n as DocId + 5)).collect();
        let row = interpolated_precision_row(&ranked, &relevant).unwrap();
        for w in row.precision.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(row.precision.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((row.avg - row.precision.iter().sum::<f64>() / 9.0).abs() < 1e-9);
    }

    #[test]
    fn f_measure_lies_between_its_inputs(rv in 0.0001f64..=1.0, pv in 0.0001f64..=1.0) {
        let f = f_measure(rv, pv);
        prop_assert!(f >= rv.min(pv) - 1e-12 && f <= rv.max(pv) + 1e-12);
        prop_assert!((f_measure(rv, rv) - rv).abs() < 1e-12);
    }

    #[test]
    fn improvement_is_antisymmetric(a in prop::array::uniform9(0.0f64..=1.0), b in prop::array::uniform9(0.0f64..=1.0)) {
        let (x, y) = (PrecisionRow::new(a), PrecisionRow::new(b));
        prop_assert!(improvement_row(&x, &x).cells.iter().all(|&c| c == 0.0));
        let fwd = improvement_row(&x, &y);
        let back = improvement_row(&y, &x);
        for (f, b) in fwd.cells.iter().zip(&back.cells) {
            prop_assert_eq!(*f, -*b);
        }
        prop_assert!((fwd.avg + back.avg).abs() < 1e-9);
    }
}

#[test]
fn single_cluster_wraps_whole_corpus() {
    let mut r = rng(5);
    let docs = random_corpus(&mut r, 20, 8);
    let vectors = vectors_of(&docs);
    let cs = ClusterSet::single(&vectors).unwrap();
    assert_eq!(cs.k(), 1);
    assert_eq!(cs.members(0).len(), 20);
}
