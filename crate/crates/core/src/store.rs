//! Edge store: a headerless payload of signed 8-bit scores, one byte per
//! upper-triangle edge at byte offset = edge index, plus a `key<TAB>value`
//! manifest binding it to the corpus and the scoring scheme.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::hash::Hasher;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use twox_hash::XxHash64;

use crate::aligner::ScoringScheme;
use crate::corpus::EncodedWord;
use crate::error::{Error, Result};
use crate::triangle::{self, TriangleGeometry};

pub const FORMAT_VERSION: u32 = 1;
pub const PAYLOAD_EXTENSION: &str = "nwedges";
pub const MANIFEST_SUFFIX: &str = ".manifest";

const READ_CHUNK: usize = 1 << 20;

/// 64-bit streaming checksum used for payloads, word lists and schemes.
#[derive(Default)]
pub struct Digest(XxHash64);

impl Digest {
    pub fn new() -> Self {
        Digest(XxHash64::with_seed(0))
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.0.write(bytes);
    }

    pub fn finish_hex(&self) -> String {
        format!("{:016x}", self.0.finish())
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut d = Digest::new();
    d.update(bytes);
    d.finish_hex()
}

/// Checksum of the ordered `(word, ipa)` list.
pub fn words_digest(words: &[EncodedWord]) -> String {
    let mut d = Digest::new();
    for w in words {
        d.update(w.word.as_bytes());
        d.update(b"\t");
        d.update(w.ipa.as_bytes());
        d.update(b"\n");
    }
    d.finish_hex()
}

pub fn manifest_path(payload: &Path) -> PathBuf {
    let mut s = payload.as_os_str().to_owned();
    s.push(MANIFEST_SUFFIX);
    PathBuf::from(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStoreManifest {
    pub format_version: u32,
    pub n: u64,
    pub num_edges: u64,
    pub match_score: i32,
    pub mismatch_score: i32,
    pub gap: i32,
    pub scheme_hash: String,
    pub words_digest: String,
    pub payload_digest: String,
    pub complete: bool,
}

impl EdgeStoreManifest {
    /// Manifest for a store about to be written; the payload digest is
    /// filled in when the writer finishes.
    pub fn for_words(words: &[EncodedWord], scheme: &ScoringScheme, scheme_description: &str) -> Self {
        let n = words.len() as u64;
        EdgeStoreManifest {
            format_version: FORMAT_VERSION,
            n,
            num_edges: triangle::num_edges(n),
            match_score: scheme.match_score(),
            mismatch_score: scheme.mismatch_score(),
            gap: scheme.gap(),
            scheme_hash: digest_bytes(scheme_description.as_bytes()),
            words_digest: words_digest(words),
            payload_digest: String::new(),
            complete: false,
        }
    }

    pub fn geometry(&self) -> TriangleGeometry {
        TriangleGeometry::new(self.n)
    }

    pub fn to_text(&self) -> String {
        format!(
            "format_version\t{}\nn\t{}\nnum_edges\t{}\nmatch\t{}\nmismatch\t{}\ngap\t{}\n\
             scheme_hash\t{}\nwords_digest\t{}\npayload_digest\t{}\ncomplete\t{}\n",
            self.format_version,
            self.n,
            self.num_edges,
            self.match_score,
            self.mismatch_score,
            self.gap,
            self.scheme_hash,
            self.words_digest,
            self.payload_digest,
            self.complete
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key<TAB>value, got {line:?}"),
            })?;
            fields.insert(k, v);
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::data(format!("manifest is missing {key}")))
        };
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::data(format!("manifest field {key} has invalid value {v:?}")))
        }

        let manifest = EdgeStoreManifest {
            format_version: num("format_version", get("format_version")?)?,
            n: num("n", get("n")?)?,
            num_edges: num("num_edges", get("num_edges")?)?,
            match_score: num("match", get("match")?)?,
            mismatch_score: num("mismatch", get("mismatch")?)?,
            gap: num("gap", get("gap")?)?,
            scheme_hash: get("scheme_hash")?.to_owned(),
            words_digest: get("words_digest")?.to_owned(),
            payload_digest: get("payload_digest").unwrap_or("").to_owned(),
            complete: num("complete", get("complete")?)?,
        };
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported edge store format version {}",
                manifest.format_version
            )));
        }
        if manifest.num_edges != triangle::num_edges(manifest.n) {
            return Err(Error::data(format!(
                "manifest num_edges {} does not equal n(n-1)/2 for n = {}",
                manifest.num_edges, manifest.n
            )));
        }
        Ok(manifest)
    }

    fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Single-writer sink for edge scores in index order.
///
/// The manifest is written with `complete = false` on creation and only
/// rewritten as complete by [`EdgeStoreWriter::finish`].
pub struct EdgeStoreWriter {
    payload_path: PathBuf,
    manifest_path: PathBuf,
    out: BufWriter<File>,
    digest: Digest,
    written: u64,
    manifest: EdgeStoreManifest,
}

impl EdgeStoreWriter {
    pub fn create(path: impl AsRef<Path>, mut manifest: EdgeStoreManifest) -> Result<Self> {
        let payload_path = path.as_ref().to_path_buf();
        let manifest_path = manifest_path(&payload_path);
        manifest.complete = false;
        manifest.payload_digest.clear();
        manifest.save(&manifest_path)?;
        let file = File::create(&payload_path).map_err(|e| Error::io(&payload_path, e))?;
        Ok(EdgeStoreWriter {
            payload_path,
            manifest_path,
            out: BufWriter::with_capacity(READ_CHUNK, file),
            digest: Digest::new(),
            written: 0,
            manifest,
        })
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn write(&mut self, scores: &[i8]) -> Result<()> {
        let len = scores.len() as u64;
        if self.written + len > self.manifest.num_edges {
            return Err(Error::data(format!(
                "payload exceeds {} edges",
                self.manifest.num_edges
            )));
        }
        let bytes = u8_view(scores);
        self.out
            .write_all(bytes)
            .map_err(|e| Error::io(&self.payload_path, e))?;
        self.digest.update(bytes);
        self.written += len;
        Ok(())
    }

    /// Flush the payload and mark the store complete. Fails, leaving the
    /// manifest incomplete, if fewer than `num_edges` scores were written.
    pub fn finish(mut self) -> Result<EdgeStoreManifest> {
        self.out
            .flush()
            .map_err(|e| Error::io(&self.payload_path, e))?;
        if self.written != self.manifest.num_edges {
            return Err(Error::data(format!(
                "payload has {} edges, expected {}",
                self.written, self.manifest.num_edges
            )));
        }
        self.out
            .get_ref()
            .sync_all()
            .map_err(|e| Error::io(&self.payload_path, e))?;
        self.manifest.payload_digest = self.digest.finish_hex();
        self.manifest.complete = true;
        self.manifest.save(&self.manifest_path)?;
        Ok(self.manifest)
    }
}

/// Write a whole payload in one call.
pub fn write_store<I>(path: impl AsRef<Path>, manifest: EdgeStoreManifest, payload: I) -> Result<EdgeStoreManifest>
where
    I: IntoIterator<Item = i8>,
{
    let mut writer = EdgeStoreWriter::create(path, manifest)?;
    let mut buf = Vec::with_capacity(READ_CHUNK);
    for s in payload {
        buf.push(s);
        if buf.len() == READ_CHUNK {
            writer.write(&buf)?;
            buf.clear();
        }
    }
    writer.write(&buf)?;
    writer.finish()
}

/// Read-only handle on a stored edge payload.
#[derive(Debug)]
pub struct EdgeStore {
    path: PathBuf,
    manifest: EdgeStoreManifest,
    file: File,
}

impl EdgeStore {
    /// Open a complete store.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        Self::open_with(path, false)
    }

    /// Open a store, accepting an incomplete one when `force` is set.
    pub fn open_with(path: impl AsRef<Path>, force: bool) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mpath = manifest_path(&path);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest = EdgeStoreManifest::parse(&text)?;
        if !manifest.complete && !force {
            return Err(Error::IncompleteStore { path });
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        if manifest.complete && len != manifest.num_edges {
            return Err(Error::data(format!(
                "payload is {len} bytes but manifest declares {} edges",
                manifest.num_edges
            )));
        }
        Ok(EdgeStore { path, manifest, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn manifest(&self) -> &EdgeStoreManifest {
        &self.manifest
    }

    pub fn n(&self) -> u64 {
        self.manifest.n
    }

    pub fn num_edges(&self) -> u64 {
        self.manifest.num_edges
    }

    /// Fail unless `words` is the list the store was computed from.
    pub fn check_words(&self, words: &[EncodedWord]) -> Result<()> {
        if words.len() as u64 != self.manifest.n {
            return Err(Error::DigestMismatch(format!(
                "store has {} nodes but word list has {} words",
                self.manifest.n,
                words.len()
            )));
        }
        let digest = words_digest(words);
        if digest != self.manifest.words_digest {
            return Err(Error::DigestMismatch(format!(
                "word list digest {digest} does not match store's {}",
                self.manifest.words_digest
            )));
        }
        Ok(())
    }

    /// Score of edge `(r, c)`, `r < c`.
    pub fn read_weight(&self, r: u64, c: u64) -> Result<i8> {
        let idx = triangle::index_of(r, c, self.manifest.n)?;
        self.read_index(idx)
    }

    pub fn read_index(&self, idx: u64) -> Result<i8> {
        if idx >= self.manifest.num_edges {
            return Err(Error::invalid(format!("edge index {idx} out of range")));
        }
        let mut byte = [0u8; 1];
        read_exact_at(&self.file, &mut byte, idx).map_err(|e| Error::io(&self.path, e))?;
        Ok(byte[0] as i8)
    }

    /// Stream the payload in order; `f` receives each chunk's first edge
    /// index and its scores.
    pub fn scan_chunks(&self, mut f: impl FnMut(u64, &[i8]) -> Result<()>) -> Result<()> {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut reader = BufReader::with_capacity(READ_CHUNK, file);
        let mut offset = 0u64;
        while offset < self.manifest.num_edges {
            let buf = reader.fill_buf().map_err(|e| Error::io(&self.path, e))?;
            if buf.is_empty() {
                return Err(Error::data(format!(
                    "payload truncated at {offset} of {} edges",
                    self.manifest.num_edges
                )));
            }
            let take = buf.len().min((self.manifest.num_edges - offset) as usize);
            let scores: &[i8] = bytemuck_i8(&buf[..take]);
            f(offset, scores)?;
            offset += take as u64;
            reader.consume(take);
        }
        Ok(())
    }

    /// Stream every edge as `(r, c, score)` in index order.
    pub fn for_each_edge(&self, mut f: impl FnMut(u64, u64, i8)) -> Result<()> {
        let mut positions = self.manifest.geometry().edges_from(0)?;
        self.scan_chunks(|_, scores| {
            for (&s, (r, c)) in scores.iter().zip(positions.by_ref()) {
                f(r, c, s);
            }
            Ok(())
        })
    }

    /// Recompute the payload checksum and compare it with the manifest.
    pub fn verify_payload(&self) -> Result<()> {
        let mut digest = Digest::new();
        self.scan_chunks(|_, scores| {
            digest.update(u8_view(scores));
            Ok(())
        })?;
        let got = digest.finish_hex();
        if got != self.manifest.payload_digest {
            return Err(Error::DigestMismatch(format!(
                "payload digest {got} does not match manifest's {}",
                self.manifest.payload_digest
            )));
        }
        Ok(())
    }

    pub fn read_all(&self) -> Result<Vec<i8>> {
        let mut out = Vec::with_capacity(self.manifest.num_edges as usize);
        self.scan_chunks(|_, s| {
            out.extend_from_slice(s);
            Ok(())
        })?;
        Ok(out)
    }
}

fn bytemuck_i8(bytes: &[u8]) -> &[i8] {
    // SAFETY: u8 and i8 have identical size, alignment and validity.
    unsafe { std::slice::from_raw_parts(bytes.as_ptr().cast::<i8>(), bytes.len()) }
}

fn u8_view(scores: &[i8]) -> &[u8] {
    // SAFETY: as above.
    unsafe { std::slice::from_raw_parts(scores.as_ptr().cast::<u8>(), scores.len()) }
}

#[cfg(unix)]
fn read_exact_at(file: &File, buf: &mut [u8], offset: u64) -> std::io::Result<()> {
    use std::os::unix::fs::FileExt;
    file.read_exact_at(buf, offset)
}

#[cfg(not(unix))]
fn read_exact_at(file: &File, buf: &mut [u8], offset: u64) -> std::io::Result<()> {
    use std::io::{Read, Seek, SeekFrom};
    let mut f = file.try_clone()?;
    f.seek(SeekFrom::Start(offset))?;
    f.read_exact(buf)
}

/// Length-normalized weight: `100 · score / max(len_a, len_b)`.
pub fn normalize(score: i32, len_a: usize, len_b: usize) -> f64 {
    let longest = len_a.max(len_b).max(1);
    100.0 * score as f64 / longest as f64
}

/// Width-1 bin of a normalized weight, `floor(100 · score / max_len)`,
/// computed exactly in integers.
pub fn normalized_bin(score: i32, len_a: usize, len_b: usize) -> i64 {
    let longest = len_a.max(len_b).max(1) as i64;
    (100 * score as i64).div_euclid(longest)
}

/// Counts over width-1 integer bins `[edge, edge + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<i64>,
    pub counts: Vec<u64>,
    pub total: u64,
    pub mean: f64,
    pub min: i64,
    pub max: i64,
}

impl Histogram {
    fn from_bins(bins: &BTreeMap<i64, u64>, sum: f64) -> Self {
        let total: u64 = bins.values().sum();
        let (min, max) = match (bins.keys().next(), bins.keys().next_back()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => (0, 0),
        };
        let (bin_edges, counts) = if total == 0 {
            (Vec::new(), Vec::new())
        } else {
            (min..=max)
                .map(|b| (b, bins.get(&b).copied().unwrap_or(0)))
                .unzip()
        };
        Histogram {
            bin_edges,
            counts,
            total,
            mean: if total == 0 { 0.0 } else { sum / total as f64 },
            min,
            max,
        }
    }
}

/// Histogram of raw or length-normalized weights in one pass over the store.
pub fn histogram(store: &EdgeStore, words: &[EncodedWord], normalized: bool) -> Result<Histogram> {
    store.check_words(words)?;
    let mut bins: BTreeMap<i64, u64> = BTreeMap::new();
    let mut sum = 0.0f64;

    if normalized {
        let lens: Vec<usize> = words.iter().map(EncodedWord::len).collect();
        store.for_each_edge(|r, c, s| {
            let (la, lb) = (lens[r as usize], lens[c as usize]);
            *bins.entry(normalized_bin(s as i32, la, lb)).or_default() += 1;
            sum += normalize(s as i32, la, lb);
        })?;
    } else {
        let mut counts = [0u64; 256];
        let mut exact_sum: i128 = 0;
        store.scan_chunks(|_, scores| {
            for &s in scores {
                counts[(s as i16 + 128) as usize] += 1;
                exact_sum += s as i128;
            }
            Ok(())
        })?;
        for (i, &count) in counts.iter().enumerate() {
            if count > 0 {
                bins.insert(i as i64 - 128, count);
            }
        }
        sum = exact_sum as f64;
    }

    Ok(Histogram::from_bins(&bins, sum))
}
