mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use phonosim::aligner::{nw_align, nw_score, oracle_score, ScoringScheme, Slot};
use phonosim::corpus::{is_separator, normalize_ipa, tokenize_ipa, DigraphSet, PhonemeId, PhonemeInventory};
use phonosim::engine::{compute_all_pairs, ComputePlan};
use phonosim::graph::{ego_network, shortest_path, GraphView};
use phonosim::store::{normalize, write_store, EdgeStore, EdgeStoreManifest};
use phonosim::triangle;
use proptest::prelude::*;

use common::{random_words, reference_payload};

fn phonemes(max_len: usize, alphabet: u32) -> impl Strategy<Value = Vec<PhonemeId>> {
    prop::collection::vec((0..alphabet).prop_map(PhonemeId), 0..=max_len)
}

fn scheme() -> impl Strategy<Value = ScoringScheme> {
    (0i32..=3, -3i32..=0, -3i32..=0).prop_map(|(m, x, g)| ScoringScheme::uniform(m, x.min(m), g))
}

// Bases, combining marks, tie bars and separators.
fn ipa_string() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "p", "ɥ", "i", "s", "ɑ", "\u{303}", "d", "ʒ", "t", "ʃ", "\u{361}", "e", "\u{301}", ".", "ˈ",
        "ˌ", " ", "ʁ", "n", "ə",
    ]);
    prop::collection::vec(pieces, 1..12).prop_map(|v| v.concat())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dp_matches_exhaustive_oracle(a in phonemes(7, 5), b in phonemes(7, 5), s in scheme()) {
        prop_assert_eq!(nw_score(&a, &b, &s), oracle_score(&a, &b, &s).unwrap());
    }

    #[test]
    fn score_is_symmetric(a in phonemes(12, 6), b in phonemes(12, 6), s in scheme()) {
        prop_assert_eq!(nw_score(&a, &b, &s), nw_score(&b, &a, &s));
    }

    #[test]
    fn score_within_uniform_bounds(a in phonemes(12, 6), b in phonemes(12, 6), s in scheme()) {
        prop_assume!(s.gap() <= s.mismatch_score());
        let score = nw_score(&a, &b, &s);
        let lower = s.gap() * (a.len() + b.len()) as i32;
        let upper = s.match_score() * a.len().min(b.len()) as i32;
        prop_assert!(lower <= score && score <= upper, "{lower} <= {score} <= {upper}");
    }

    #[test]
    fn alignment_is_valid(a in phonemes(10, 4), b in phonemes(10, 4), s in scheme()) {
        let al = nw_align(&a, &b, &s);
        prop_assert_eq!(al.score, nw_score(&a, &b, &s));
        prop_assert!(al.pairs.iter().all(|p| *p != (Slot::Gap, Slot::Gap)));
        let left: Vec<_> = al.pairs.iter().filter_map(|p| p.0.phoneme()).collect();
        let right: Vec<_> = al.pairs.iter().filter_map(|p| p.1.phoneme()).collect();
        prop_assert_eq!(left, a);
        prop_assert_eq!(right, b);
        prop_assert_eq!(al.pair_score(&s), Some(al.score));
    }

    #[test]
    fn tokens_concatenate_to_input(ipa in ipa_string()) {
        let digraphs = DigraphSet::default();
        let expected: String = normalize_ipa(&ipa).chars().filter(|&c| !is_separator(c)).collect();
        match tokenize_ipa(&ipa, &digraphs) {
            Ok(tokens) => {
                let joined = tokens.concat();
                // Tie bars vanish only when their pair is a known digraph.
                let expected_no_ties: String = expected.chars().filter(|&c| c != '\u{361}').collect();
                let joined_no_ties: String = joined.chars().filter(|&c| c != '\u{361}').collect();
                prop_assert_eq!(joined_no_ties, expected_no_ties);
                let kept_ties = joined.chars().filter(|&c| c == '\u{361}').count();
                let input_ties = expected.chars().filter(|&c| c == '\u{361}').count();
                let digraph_tokens = tokens.iter().filter(|t| digraphs.contains(t)).count();
                prop_assert!(kept_ties <= input_ties && input_ties - kept_ties <= digraph_tokens);
                prop_assert!(tokens.iter().all(|t| !t.is_empty()));
            }
            Err(_) => prop_assert!(expected.is_empty()),
        }
    }

    #[test]
    fn encoding_is_injective(x in ipa_string(), y in ipa_string()) {
        let digraphs = DigraphSet::default();
        let (Ok(tx), Ok(ty)) = (tokenize_ipa(&x, &digraphs), tokenize_ipa(&y, &digraphs)) else {
            return Ok(());
        };
        let mut symbols: Vec<String> = tx.iter().chain(&ty).cloned().collect();
        symbols.sort();
        symbols.dedup();
        let inv = PhonemeInventory::from_pairs(symbols.iter().cloned().zip(0..)).unwrap();
        let ex: Vec<_> = tx.iter().map(|t| inv.id_of(t).unwrap()).collect();
        let ey: Vec<_> = ty.iter().map(|t| inv.id_of(t).unwrap()).collect();
        prop_assert_eq!(ex == ey, tx == ty);
    }

    #[test]
    fn triangle_order_is_lexicographic(n in 2u64..2_000, a in any::<u64>(), b in any::<u64>()) {
        let total = triangle::num_edges(n);
        let (i, j) = (a % total, b % total);
        let pi = triangle::position_of(i, n).unwrap();
        let pj = triangle::position_of(j, n).unwrap();
        prop_assert_eq!(i.cmp(&j), pi.cmp(&pj));
    }

    #[test]
    fn normalized_weights_bounded(a in phonemes(10, 5), b in phonemes(10, 5)) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let s = ScoringScheme::default();
        let w = normalize(nw_score(&a, &b, &s), a.len(), b.len());
        prop_assert!((-200.0..=100.0).contains(&w));
        if a.len() == b.len() {
            prop_assert!(w >= -100.0);
        }
    }
}

#[test]
fn prefix_counts_close_the_triangle() {
    for n in 2..=500u64 {
        assert_eq!(triangle::prefix_count(n - 2, n).unwrap(), triangle::num_edges(n));
        let brute: u64 = (0..=n - 2).map(|k| n - k - 1).sum();
        assert_eq!(triangle::prefix_count(n - 2, n).unwrap(), brute);
    }
}

#[test]
fn workers_and_chunks_do_not_change_payload() {
    let words = random_words(11, 120, 8, 1, 9);
    let s = ScoringScheme::default();
    let reference = reference_payload(&words, &s);
    for (chunk, workers) in [(1, 1), (7, 3), (100, 2), (65_536, 4)] {
        let mut out = Vec::new();
        let stats = compute_all_pairs(&words, &s, &mut out, &ComputePlan::new(chunk, workers).unwrap()).unwrap();
        assert_eq!(out, reference, "chunk {chunk}, workers {workers}");
        assert_eq!(stats.edges_written, triangle::num_edges(120));
        let sum: i64 = reference.iter().map(|&x| x as i64).sum();
        assert_eq!(stats.mean_score, sum as f64 / reference.len() as f64);
        assert_eq!(stats.min_score, *reference.iter().min().unwrap() as i32);
        assert_eq!(stats.max_score, *reference.iter().max().unwrap() as i32);
    }
}

#[test]
fn store_roundtrip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let s = ScoringScheme::uniform(2, -1, -2);
    for n in [2usize, 3, 17, 50] {
        let words = random_words(n as u64, n, 6, 1, 8);
        let payload = reference_payload(&words, &s);
        let path = dir.path().join(format!("s{n}.nwedges"));
        let manifest = EdgeStoreManifest::for_words(&words, &s, &s.describe(None));
        write_store(&path, manifest, payload.iter().copied()).unwrap();
        let store = EdgeStore::open(&path).unwrap();
        assert_eq!(store.read_all().unwrap(), payload);
        let mut k = 0;
        for r in 0..n as u64 {
            for c in r + 1..n as u64 {
                assert_eq!(store.read_weight(r, c).unwrap(), payload[k]);
                let (rr, cc) = triangle::position_of(k as u64, n as u64).unwrap();
                assert_eq!(store.read_weight(rr, cc).unwrap(), payload[k]);
                k += 1;
            }
        }
        store.verify_payload().unwrap();
    }
}

fn random_view(seed: u64, n: usize, p: f64) -> GraphView {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, rng.gen_range(0.0..100.0)));
            }
        }
    }
    GraphView::from_edges((0.0, 100.0), edges).unwrap()
}

fn all_pairs_hops(view: &GraphView, n: usize) -> Vec<Vec<Option<usize>>> {
    // Floyd–Warshall on unit weights.
    let mut d = vec![vec![None; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        if view.contains(u) {
            row[u] = Some(0);
        }
        for &(v, _) in view.neighbors(u) {
            row[v] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|x| a + b < x) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

#[test]
fn bfs_paths_are_shortest() {
    for seed in 0..20 {
        let n = 40;
        let view = random_view(seed, n, 0.06);
        let dist = all_pairs_hops(&view, n);
        let nodes: Vec<usize> = view.nodes().collect();
        for &u in &nodes {
            for &v in &nodes {
                let got = shortest_path(&view, u, v).unwrap();
                assert_eq!(got.as_ref().map(|p| p.hops), dist[u][v], "{u} -> {v}");
                if let Some(p) = got {
                    assert_eq!(p.hops, p.nodes.len() - 1);
                    assert!(p.nodes.windows(2).all(|w| view.neighbors(w[0]).iter().any(|&(x, _)| x == w[1])));
                }
            }
        }
    }
}

#[test]
fn ego_networks_grow_with_depth() {
    for seed in 0..20 {
        let view = random_view(100 + seed, 45, 0.05);
        let Some(seed_node) = view.nodes().next() else { continue };
        let mut prev: BTreeSet<usize> = BTreeSet::new();
        for depth in 1..=45 {
            let ego = ego_network(&view, seed_node, depth).unwrap();
            let nodes: BTreeSet<usize> = ego.nodes().collect();
            assert!(prev.is_subset(&nodes));
            prev = nodes;
        }
        // Full depth reaches the connected component.
        let mut component = BTreeSet::from([seed_node]);
        let mut queue = VecDeque::from([seed_node]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in view.neighbors(u) {
                if component.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        assert_eq!(prev, component);
    }
}

#[test]
fn induced_ego_contains_every_view_edge_among_its_nodes() {
    let view = random_view(7, 30, 0.15);
    let seed = view.nodes().next().unwrap();
    let ego = ego_network(&view, seed, 2).unwrap();
    let nodes: BTreeSet<usize> = ego.nodes().collect();
    let expected: BTreeMap<(usize, usize), ()> = view
        .edges()
        .filter(|(u, v, _)| nodes.contains(u) && nodes.contains(v))
        .map(|(u, v, _)| ((u, v), ()))
        .collect();
    let got: HashMap<(usize, usize), ()> = ego.edges().map(|(u, v, _)| ((u, v), ())).collect();
    assert_eq!(got.len(), expected.len());
    assert!(expected.keys().all(|k| got.contains_key(k)));
}
