//! Filtered in-memory graph views over an edge store, neighborhood queries
//! and Gephi-compatible exports.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::corpus::EncodedWord;
use crate::error::{Error, Result};
use crate::store::{normalize, EdgeStore};

/// Undirected graph on word indices whose edges are the store edges with
/// normalized weight in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphView {
    adjacency: BTreeMap<usize, Vec<(usize, f64)>>,
    filter: (f64, f64),
}

impl GraphView {
    /// Build from explicit undirected edges. Self-loops are rejected.
    pub fn from_edges<I>(filter: (f64, f64), edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut adjacency: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop on node {u}")));
            }
            adjacency.entry(u).or_default().push((v, w));
            adjacency.entry(v).or_default().push((u, w));
        }
        for list in adjacency.values_mut() {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by_key(|&mut (v, _)| v);
        }
        Ok(GraphView { adjacency, filter })
    }

    pub fn filter(&self) -> (f64, f64) {
        self.filter
    }

    pub fn contains(&self, node: usize) -> bool {
        self.adjacency.contains_key(&node)
    }

    /// Retained nodes, ascending.
    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Neighbors of `node` with weights, ascending by neighbor.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        self.adjacency.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Each undirected edge once as `(u, v, weight)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().flat_map(|(&u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Subgraph induced by `keep`. Nodes left without edges are dropped.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> GraphView {
        let adjacency = self
            .adjacency
            .iter()
            .filter(|(u, _)| keep.contains(u))
            .map(|(&u, list)| {
                let kept: Vec<_> = list.iter().copied().filter(|(v, _)| keep.contains(v)).collect();
                (u, kept)
            })
            .filter(|(_, list)| !list.is_empty())
            .collect();
        GraphView {
            adjacency,
            filter: self.filter,
        }
    }

    /// Hop distance from `seed` to every node within `max_depth` hops.
    pub fn bfs_depths(&self, seed: usize, max_depth: usize) -> BTreeMap<usize, usize> {
        let mut depth = BTreeMap::new();
        if !self.contains(seed) {
            return depth;
        }
        depth.insert(seed, 0);
        let mut queue = VecDeque::from([seed]);
        while let Some(u) = queue.pop_front() {
            let d = depth[&u];
            if d == max_depth {
                continue;
            }
            for &(v, _) in self.neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = depth.entry(v) {
                    e.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        depth
    }
}

/// Index of `word` in the word list.
pub fn find_word(words: &[EncodedWord], word: &str) -> Result<usize> {
    words
        .iter()
        .position(|w| w.word == word)
        .ok_or_else(|| Error::data(format!("unknown word {word:?}")))
}

/// One streaming pass over the store keeping edges whose normalized weight
/// lies in `[lo, hi]`.
pub fn filter_view(store: &EdgeStore, words: &[EncodedWord], lo: f64, hi: f64) -> Result<GraphView> {
    if !store.manifest().complete {
        return Err(Error::IncompleteStore {
            path: store.path().to_path_buf(),
        });
    }
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::invalid(format!("invalid weight range [{lo}, {hi}]")));
    }
    store.check_words(words)?;

    let lens: Vec<usize> = words.iter().map(EncodedWord::len).collect();
    let mut adjacency: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    store.for_each_edge(|r, c, s| {
        let (r, c) = (r as usize, c as usize);
        let w = normalize(s as i32, lens[r], lens[c]);
        if lo <= w && w <= hi {
            adjacency.entry(r).or_default().push((c, w));
            adjacency.entry(c).or_default().push((r, w));
        }
    })?;
    // Row-major streaming already yields ascending neighbor lists.
    debug_assert!(adjacency.values().all(|l| l.windows(2).all(|p| p[0].0 < p[1].0)));
    Ok(GraphView {
        adjacency,
        filter: (lo, hi),
    })
}

/// Subgraph induced by every node within `depth` hops of `seed`.
pub fn ego_network(view: &GraphView, seed: usize, depth: usize) -> Result<GraphView> {
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    if !view.contains(seed) {
        return Err(Error::data(format!(
            "node {seed} has no edges in weight range [{}, {}]",
            view.filter.0, view.filter.1
        )));
    }
    let keep: BTreeSet<usize> = view.bfs_depths(seed, depth).into_keys().collect();
    Ok(view.induced(&keep))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPath {
    pub nodes: Vec<usize>,
    pub hops: usize,
}

/// Minimum-hop path by breadth-first search. Neighbors are expanded in
/// ascending order, so among equally short paths the result is fixed.
/// `Ok(None)` means both endpoints exist but are disconnected.
pub fn shortest_path(view: &GraphView, from: usize, to: usize) -> Result<Option<WordPath>> {
    for node in [from, to] {
        if !view.contains(node) {
            return Err(Error::data(format!("node {node} is not in the view")));
        }
    }
    if from == to {
        return Ok(Some(WordPath {
            nodes: vec![from],
            hops: 0,
        }));
    }

    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    parent.insert(from, from);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in view.neighbors(u) {
            if parent.contains_key(&v) {
                continue;
            }
            parent.insert(v, u);
            if v == to {
                let mut nodes = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[&cur];
                    nodes.push(cur);
                }
                nodes.reverse();
                let hops = nodes.len() - 1;
                return Ok(Some(WordPath { nodes, hops }));
            }
            queue.push_back(v);
        }
    }
    Ok(None)
}

fn label(words: &[EncodedWord], id: usize) -> Result<&str> {
    words
        .get(id)
        .map(|w| w.word.as_str())
        .ok_or_else(|| Error::data(format!("node {id} has no word")))
}

/// Gephi spreadsheet import: nodes `Id,Label`, edges
/// `Source,Target,Weight,Type` with two-decimal weights.
pub fn export_csv<N: Write, E: Write>(
    view: &GraphView,
    words: &[EncodedWord],
    nodes_out: N,
    edges_out: E,
) -> Result<()> {
    if view.is_empty() {
        return Err(Error::data("cannot export an empty graph view"));
    }
    let io_err = |e: csv::Error| Error::Write(e.into());

    let mut nodes = csv::Writer::from_writer(nodes_out);
    nodes.write_record(["Id", "Label"]).map_err(io_err)?;
    for id in view.nodes() {
        nodes
            .write_record([id.to_string().as_str(), label(words, id)?])
            .map_err(io_err)?;
    }
    nodes.flush()?;

    let mut edges = csv::Writer::from_writer(edges_out);
    edges
        .write_record(["Source", "Target", "Weight", "Type"])
        .map_err(io_err)?;
    for (u, v, w) in view.edges() {
        edges
            .write_record([u.to_string(), v.to_string(), format!("{w:.2}"), "Undirected".to_owned()])
            .map_err(io_err)?;
    }
    edges.flush()?;
    Ok(())
}

pub fn export_csv_files(
    view: &GraphView,
    words: &[EncodedWord],
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<()> {
    let (np, ep) = (nodes_path.as_ref(), edges_path.as_ref());
    if view.is_empty() {
        return Err(Error::data("cannot export an empty graph view"));
    }
    let nf = File::create(np).map_err(|e| Error::io(np, e))?;
    let ef = File::create(ep).map_err(|e| Error::io(ep, e))?;
    export_csv(view, words, BufWriter::new(nf), BufWriter::new(ef))
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Static undirected GEXF 1.3 document with a `weight` on every edge.
pub fn export_gexf<W: Write>(view: &GraphView, words: &[EncodedWord], mut out: W) -> Result<()> {
    if view.is_empty() {
        return Err(Error::data("cannot export an empty graph view"));
    }
    let mut doc = String::new();
    doc.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    doc.push_str("<gexf xmlns=\"http://gexf.net/1.3\" version=\"1.3\">\n");
    doc.push_str("  <graph mode=\"static\" defaultedgetype=\"undirected\">\n");
    doc.push_str("    <nodes>\n");
    for id in view.nodes() {
        doc.push_str(&format!(
            "      <node id=\"{id}\" label=\"{}\"/>\n",
            xml_escape(label(words, id)?)
        ));
    }
    doc.push_str("    </nodes>\n    <edges>\n");
    for (k, (u, v, w)) in view.edges().enumerate() {
        doc.push_str(&format!(
            "      <edge id=\"{k}\" source=\"{u}\" target=\"{v}\" weight=\"{w:.2}\"/>\n"
        ));
    }
    doc.push_str("    </edges>\n  </graph>\n</gexf>\n");
    out.write_all(doc.as_bytes())
        .and_then(|_| out.flush())
        .map_err(Error::Write)
}

pub fn export_gexf_file(view: &GraphView, words: &[EncodedWord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if view.is_empty() {
        return Err(Error::data("cannot export an empty graph view"));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    export_gexf(view, words, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PhonemeId;

    fn words(names: &[&str]) -> Vec<EncodedWord> {
        names
            .iter()
            .map(|n| EncodedWord {
                word: (*n).into(),
                ipa: (*n).into(),
                phonemes: vec![PhonemeId(0)],
                frequency: 1.0,
            })
            .collect()
    }

    fn view(edges: &[(usize, usize)]) -> GraphView {
        GraphView::from_edges((0.0, 100.0), edges.iter().map(|&(u, v)| (u, v, 50.0))).unwrap()
    }

    #[test]
    fn chain_path() {
        let g = view(&[(0, 1), (1, 2)]);
        let p = shortest_path(&g, 0, 2).unwrap().unwrap();
        assert_eq!((p.nodes, p.hops), (vec![0, 1, 2], 2));
        let p = shortest_path(&g, 1, 1).unwrap().unwrap();
        assert_eq!((p.nodes, p.hops), (vec![1], 0));
        assert!(shortest_path(&g, 0, 9).is_err());
    }

    #[test]
    fn disconnected_nodes_have_no_path() {
        let g = view(&[(0, 1), (2, 3)]);
        assert_eq!(shortest_path(&g, 0, 3).unwrap(), None);
    }

    #[test]
    fn equal_length_paths_take_smallest_neighbor() {
        // Two routes 0-2-4 and 0-1-4.
        let g = view(&[(0, 2), (2, 4), (0, 1), (1, 4)]);
        assert_eq!(shortest_path(&g, 0, 4).unwrap().unwrap().nodes, vec![0, 1, 4]);
    }

    #[test]
    fn star_ego_network() {
        let g = view(&[(0, 1), (0, 2), (0, 3), (3, 4)]);
        let ego = ego_network(&g, 0, 1).unwrap();
        assert_eq!(ego.nodes().collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert_eq!(ego.edge_count(), 3);
        let ego2 = ego_network(&g, 0, 2).unwrap();
        assert_eq!(ego2.node_count(), 5);
        assert!(ego_network(&g, 7, 1).is_err());
        assert!(ego_network(&g, 0, 0).is_err());
    }

    #[test]
    fn ego_network_is_induced() {
        // Triangle 1-2-3 around seed 0 connected to 1 and 2.
        let g = view(&[(0, 1), (0, 2), (1, 2), (2, 3)]);
        let ego = ego_network(&g, 0, 1).unwrap();
        assert_eq!(ego.edge_count(), 3);
    }

    #[test]
    fn csv_export_format() {
        let w = words(&["puisant", "épuisant"]);
        let g = GraphView::from_edges((40.0, 100.0), [(0, 1, 200.0 / 3.0)]).unwrap();
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        export_csv(&g, &w, &mut nodes, &mut edges).unwrap();
        assert_eq!(String::from_utf8(nodes).unwrap(), "Id,Label\n0,puisant\n1,épuisant\n");
        assert_eq!(
            String::from_utf8(edges).unwrap(),
            "Source,Target,Weight,Type\n0,1,66.67,Undirected\n"
        );
    }

    #[test]
    fn csv_labels_are_quoted_when_needed() {
        let w = words(&["a,b", "c"]);
        let g = view(&[(0, 1)]);
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        export_csv(&g, &w, &mut nodes, &mut edges).unwrap();
        assert_eq!(String::from_utf8(nodes).unwrap(), "Id,Label\n0,\"a,b\"\n1,c\n");
    }

    #[test]
    fn empty_view_is_not_exported() {
        let g = view(&[]);
        assert!(export_csv(&g, &[], Vec::new(), Vec::new()).is_err());
        assert!(export_gexf(&g, &[], Vec::new()).is_err());
    }

    #[test]
    fn gexf_export() {
        let w = words(&["a&b", "c"]);
        let g = view(&[(0, 1)]);
        let mut out = Vec::new();
        export_gexf(&g, &w, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("label=\"a&amp;b\""));
        assert!(text.contains("source=\"0\" target=\"1\" weight=\"50.00\""));
        assert!(text.contains("defaultedgetype=\"undirected\""));
    }

    #[test]
    fn self_loops_rejected() {
        assert!(GraphView::from_edges((0.0, 1.0), [(1, 1, 0.5)]).is_err());
    }
}
