use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use phonosim::corpus::{self, DigraphSet, PhonemeInventory};
use phonosim::engine::{compute_all_pairs, preflight_range_check, ComputePlan};
use phonosim::graph::{self, ego_network, filter_view, find_word, shortest_path, WordPath};
use phonosim::store::{self, histogram, EdgeStore, EdgeStoreManifest, EdgeStoreWriter, PAYLOAD_EXTENSION};
use phonosim::{triangle, EncodedWord, Error, Result, ScoringScheme};

use crate::{Command, RangeArgs, WordsArg};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest {
            corpus,
            limit,
            out,
            digraphs,
        } => ingest(&corpus, limit, &out, &digraphs),
        Command::Compute {
            words,
            match_score,
            mismatch,
            gap,
            scheme,
            inventory,
            workers,
            chunk_size,
            out,
        } => {
            let scheme_source = match scheme {
                Some(path) => SchemeSource::File {
                    path,
                    inventory: inventory.unwrap_or_else(|| with_suffix(&words, "inventory")),
                },
                None => SchemeSource::Uniform(match_score, mismatch, gap),
            };
            compute(&words, scheme_source, workers, chunk_size, &out)
        }
        Command::Hist {
            store,
            words,
            normalized,
        } => hist(&store, &words, normalized),
        Command::Ego {
            store,
            words,
            word,
            depth,
            range,
            out,
            gexf,
        } => {
            let out = out.unwrap_or_else(|| PathBuf::from(format!("ego_{word}")));
            ego(&store, &words, &word, depth, &range, &out, gexf)
        }
        Command::Path {
            store,
            words,
            from,
            to,
            range,
        } => path(&store, &words, &from, &to, &range),
        Command::Info {
            store,
            nodes,
            budget,
            max_len,
            shared_mem,
        } => info(store.as_deref(), nodes, budget, max_len, shared_mem),
    }
}

/// `prefix` + `.suffix`, or the stem of a `.nwedges`/`.words` file + `.suffix`.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext == PAYLOAD_EXTENSION || ext == "words" => path.with_extension(suffix),
        _ => {
            let mut s: OsString = path.as_os_str().to_owned();
            s.push(".");
            s.push(suffix);
            PathBuf::from(s)
        }
    }
}

fn ingest(corpus_path: &Path, limit: Option<usize>, out: &Path, digraphs: &str) -> Result<()> {
    if limit == Some(0) {
        return Err(Error::invalid("limit must be positive"));
    }
    let digraphs = DigraphSet::new(digraphs.split(',').map(str::trim).filter(|s| !s.is_empty()));
    let rows = corpus::load_corpus(corpus_path, limit)?;
    let inventory = corpus::build_inventory(&rows, &digraphs)?;
    let words = corpus::encode_corpus(&rows, &inventory, &digraphs)?;

    let words_path = with_suffix(out, "words");
    let inventory_path = with_suffix(out, "inventory");
    corpus::save_words(&words, &words_path)?;
    inventory.save(&inventory_path)?;

    let longest = words.iter().map(EncodedWord::len).max().unwrap_or(0);
    println!("words\t{}", words.len());
    println!("phonemes\t{}", inventory.len());
    println!("max_length\t{longest}");
    println!("edges\t{}", triangle::num_edges(words.len() as u64));
    println!("wrote\t{}", words_path.display());
    println!("wrote\t{}", inventory_path.display());
    Ok(())
}

enum SchemeSource {
    Uniform(i32, i32, i32),
    File { path: PathBuf, inventory: PathBuf },
}

fn compute(
    words_path: &Path,
    source: SchemeSource,
    workers: Option<usize>,
    chunk_size: u64,
    out: &Path,
) -> Result<()> {
    let plan = ComputePlan::new(
        chunk_size,
        workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    )?;
    let words = corpus::load_words(words_path)?;
    let (scheme, description) = match source {
        SchemeSource::Uniform(m, x, g) => {
            let scheme = ScoringScheme::uniform(m, x, g);
            let description = scheme.describe(None);
            (scheme, description)
        }
        SchemeSource::File { path, inventory } => {
            let inventory = PhonemeInventory::load(&inventory)?;
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let scheme = ScoringScheme::parse(&text, &inventory)?;
            let description = scheme.describe(Some(&inventory));
            (scheme, description)
        }
    };
    preflight_range_check(&words, &scheme)?;

    let store_path = with_suffix(out, PAYLOAD_EXTENSION);
    let manifest = EdgeStoreManifest::for_words(&words, &scheme, &description);
    let mut writer = EdgeStoreWriter::create(&store_path, manifest)?;
    let stats = compute_all_pairs(&words, &scheme, &mut writer, &plan)?;
    let manifest = writer.finish()?;

    println!("store\t{}", store_path.display());
    println!("nodes\t{}", manifest.n);
    println!("edges\t{}", stats.edges_written);
    println!("workers\t{}", plan.worker_count);
    println!("seconds\t{:.3}", stats.wall_time);
    println!("min_score\t{}", stats.min_score);
    println!("max_score\t{}", stats.max_score);
    println!("mean_score\t{:.6}", stats.mean_score);
    println!("payload_digest\t{}", manifest.payload_digest);
    Ok(())
}

fn open_with_words(store_path: &Path, words: &WordsArg) -> Result<(EdgeStore, Vec<EncodedWord>)> {
    let store = EdgeStore::open(store_path)?;
    let words_path = words
        .path
        .clone()
        .unwrap_or_else(|| with_suffix(store_path, "words"));
    let words = corpus::load_words(&words_path)?;
    store.check_words(&words)?;
    Ok((store, words))
}

fn hist(store_path: &Path, words: &WordsArg, normalized: bool) -> Result<()> {
    let (store, words) = open_with_words(store_path, words)?;
    let h = histogram(&store, &words, normalized)?;
    println!("bin\tcount");
    for (edge, count) in h.bin_edges.iter().zip(&h.counts) {
        println!("{edge}\t{count}");
    }
    println!();
    println!("total\t{}", h.total);
    println!("mean\t{:.6}", h.mean);
    println!("min\t{}", h.min);
    println!("max\t{}", h.max);
    Ok(())
}

fn weight_range(range: &RangeArgs) -> Result<(f64, f64)> {
    let lo = range.min.unwrap_or(f64::NEG_INFINITY);
    let hi = range.max.unwrap_or(f64::INFINITY);
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::invalid(format!("--min {lo} must not exceed --max {hi}")));
    }
    Ok((lo, hi))
}

fn ego(
    store_path: &Path,
    words: &WordsArg,
    word: &str,
    depth: usize,
    range: &RangeArgs,
    out: &Path,
    gexf: bool,
) -> Result<()> {
    if depth == 0 {
        return Err(Error::invalid("--depth must be at least 1"));
    }
    let (lo, hi) = weight_range(range)?;
    let (store, words) = open_with_words(store_path, words)?;
    let seed = find_word(&words, word)?;
    let view = filter_view(&store, &words, lo, hi)?;
    if !view.contains(seed) {
        return Err(Error::data(format!(
            "{word:?} has no edges with normalized weight in [{lo}, {hi}]"
        )));
    }
    let ego = ego_network(&view, seed, depth)?;

    let nodes_path = with_suffix(out, "nodes.csv");
    let edges_path = with_suffix(out, "edges.csv");
    graph::export_csv_files(&ego, &words, &nodes_path, &edges_path)?;
    println!("nodes\t{}", ego.node_count());
    println!("edges\t{}", ego.edge_count());
    println!("wrote\t{}", nodes_path.display());
    println!("wrote\t{}", edges_path.display());
    if gexf {
        let gexf_path = with_suffix(out, "gexf");
        graph::export_gexf_file(&ego, &words, &gexf_path)?;
        println!("wrote\t{}", gexf_path.display());
    }
    Ok(())
}

fn path(store_path: &Path, words: &WordsArg, from: &str, to: &str, range: &RangeArgs) -> Result<()> {
    let (lo, hi) = weight_range(range)?;
    let (store, words) = open_with_words(store_path, words)?;
    let a = find_word(&words, from)?;
    let b = find_word(&words, to)?;

    let found = if a == b {
        Some(WordPath {
            nodes: vec![a],
            hops: 0,
        })
    } else {
        let view = filter_view(&store, &words, lo, hi)?;
        if view.contains(a) && view.contains(b) {
            shortest_path(&view, a, b)?
        } else {
            None
        }
    };

    match found {
        Some(p) => {
            let chain: Vec<&str> = p.nodes.iter().map(|&i| words[i].word.as_str()).collect();
            println!("{}", chain.join(" -> "));
            println!("hops\t{}", p.hops);
        }
        None => println!("no path between {from:?} and {to:?} in weight range [{lo}, {hi}]"),
    }
    Ok(())
}

fn info(
    store_path: Option<&Path>,
    nodes: Option<u64>,
    budget: Option<u64>,
    max_len: Option<u64>,
    shared_mem: u64,
) -> Result<()> {
    if store_path.is_none() && nodes.is_none() && budget.is_none() && max_len.is_none() {
        return Err(Error::invalid(
            "give a store path, --nodes, --budget or --max-len",
        ));
    }
    if let Some(path) = store_path {
        let mpath = store::manifest_path(path);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest = EdgeStoreManifest::parse(&text)?;
        print!("{}", manifest.to_text());
    }
    if let Some(n) = nodes {
        let edges = triangle::num_edges(n);
        println!("nodes\t{n}");
        println!("num_edges\t{edges}");
        println!("payload_bytes\t{edges}");
        println!("payload_gib\t{:.2}", edges as f64 / (1u64 << 30) as f64);
    }
    if let Some(bytes) = budget {
        let n = triangle::nodes_for_edge_budget(bytes, 1)?;
        println!("budget_bytes\t{bytes}");
        println!("max_nodes\t{n}");
        println!("num_edges\t{}", triangle::num_edges(n));
    }
    if let Some(q) = max_len {
        let width = triangle::plan_block_width(q, shared_mem, triangle::DEFAULT_MAX_THREADS)?;
        println!("max_word_length\t{q}");
        println!("shared_mem_bytes\t{shared_mem}");
        println!("block_width\t{width}");
    }
    Ok(())
}
