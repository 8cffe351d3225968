//! Embedding spaces: word -> R^d lookup with optional subword fallback,
//! cosine similarity, and text-format persistence.
//!
//! The on-disk format is the word2vec text layout: a `V d` header line,
//! then one `word f1 ... fd` row per word, space-separated, six decimal
//! places, `.` as the decimal separator. When a space carries subword
//! buckets, they live in a sibling file at `<path>.sub` with a
//! `B d n_min n_max` header and `index f1 ... fd` rows (absent indexes are
//! zero vectors).

use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::subword::bucket_indices;
use crate::{Error, Result};

/// Hashed n-gram bucket table backing out-of-vocabulary lookups.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordTable {
    n_min: usize,
    n_max: usize,
    bucket_count: usize,
    dim: usize,
    vectors: Vec<f32>, // bucket_count x dim, row-major
}

impl SubwordTable {
    pub fn new(n_min: usize, n_max: usize, bucket_count: usize, dim: usize) -> Self {
        assert!(n_min >= 1 && n_min <= n_max);
        assert!(bucket_count > 0 && dim > 0);
        SubwordTable {
            n_min,
            n_max,
            bucket_count,
            dim,
            vectors: vec![0.0; bucket_count * dim],
        }
    }

    pub fn from_vectors(
        n_min: usize,
        n_max: usize,
        bucket_count: usize,
        dim: usize,
        vectors: Vec<f32>,
    ) -> Result<Self> {
        if vectors.len() != bucket_count * dim {
            return Err(Error::DimensionMismatch {
                dim: bucket_count * dim,
                got: vectors.len(),
            });
        }
        Ok(SubwordTable {
            n_min,
            n_max,
            bucket_count,
            dim,
            vectors,
        })
    }

    pub fn ngram_range(&self) -> (usize, usize) {
        (self.n_min, self.n_max)
    }

    pub fn bucket_count(&self) -> usize {
        self.bucket_count
    }

    pub fn bucket(&self, idx: usize) -> &[f32] {
        &self.vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn bucket_mut(&mut self, idx: usize) -> &mut [f32] {
        &mut self.vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Average of the bucket vectors of all n-grams of `word`, or `None`
    /// when no n-gram fits the length range.
    pub fn compose(&self, word: &str) -> Option<Vec<f32>> {
        let indices = bucket_indices(word, self.n_min, self.n_max, self.bucket_count);
        if indices.is_empty() {
            return None;
        }
        let mut acc = vec![0.0f32; self.dim];
        for &idx in &indices {
            for (a, &v) in acc.iter_mut().zip(self.bucket(idx)) {
                *a += v;
            }
        }
        let inv = 1.0 / indices.len() as f32;
        for a in &mut acc {
            *a *= inv;
        }
        Some(acc)
    }
}

/// One trained embedding space: vocabulary -> R^d, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f32>, // words.len() x dim, row-major
    subword: Option<SubwordTable>,
}

impl EmbeddingSpace {
    pub fn from_parts(
        dim: usize,
        words: Vec<String>,
        vectors: Vec<f32>,
        subword: Option<SubwordTable>,
    ) -> Result<Self> {
        assert!(dim > 0, "dimension must be positive");
        if vectors.len() != words.len() * dim {
            return Err(Error::DimensionMismatch {
                dim: words.len() * dim,
                got: vectors.len(),
            });
        }
        if let Some(sub) = &subword {
            if sub.dim != dim {
                return Err(Error::DimensionMismatch {
                    dim,
                    got: sub.dim,
                });
            }
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate word in space: {w:?}")));
            }
        }
        Ok(EmbeddingSpace {
            dim,
            words,
            index,
            vectors,
            subword,
        })
    }

    /// Convenience constructor for tests and fixtures.
    pub fn from_pairs(dim: usize, pairs: &[(&str, Vec<f32>)]) -> Result<Self> {
        let mut words = Vec::with_capacity(pairs.len());
        let mut vectors = Vec::with_capacity(pairs.len() * dim);
        for (w, v) in pairs {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { dim, got: v.len() });
            }
            words.push((*w).to_string());
            vectors.extend_from_slice(v);
        }
        EmbeddingSpace::from_parts(dim, words, vectors, None)
    }

    pub fn with_subword(mut self, subword: SubwordTable) -> Result<Self> {
        if subword.dim != self.dim {
            return Err(Error::DimensionMismatch {
                dim: self.dim,
                got: subword.dim,
            });
        }
        self.subword = Some(subword);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn subword_table(&self) -> Option<&SubwordTable> {
        self.subword.as_ref()
    }

    /// Stored vector of an in-vocabulary word, bypassing subword fallback.
    pub fn word_vector(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Vector of `word`: the stored row when in vocabulary, otherwise the
    /// average of its hashed n-gram bucket vectors.
    pub fn vector(&self, word: &str) -> Result<Cow<'_, [f32]>> {
        if word.is_empty() {
            return Err(Error::OutOfVocabulary {
                word: word.to_string(),
            });
        }
        if let Some(v) = self.word_vector(word) {
            return Ok(Cow::Borrowed(v));
        }
        match &self.subword {
            Some(table) => table.compose(word).map(Cow::Owned).ok_or_else(|| {
                Error::OutOfVocabulary {
                    word: word.to_string(),
                }
            }),
            None => Err(Error::OutOfVocabulary {
                word: word.to_string(),
            }),
        }
    }
}

/// Cosine similarity, clamped to [-1, 1]. Accumulates in f64.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    assert_eq!(u.len(), v.len(), "cosine arguments differ in length");
    let mut dot = 0.0f64;
    let mut nu = 0.0f64;
    let mut nv = 0.0f64;
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Path of the subword bucket file that travels with an embedding file.
pub fn subword_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".sub");
    PathBuf::from(os)
}

/// Write a space in the text format; bucket vectors, when present, go to
/// `<path>.sub`.
pub fn save_embeddings(space: &EmbeddingSpace, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write_err = |e| Error::io(path, e);
    writeln!(out, "{} {}", space.len(), space.dim).map_err(write_err)?;
    for word in &space.words {
        write!(out, "{word}").map_err(write_err)?;
        for x in space.word_vector(word).expect("word listed in space") {
            write!(out, " {x:.6}").map_err(write_err)?;
        }
        writeln!(out).map_err(write_err)?;
    }
    out.flush().map_err(write_err)?;

    if let Some(table) = &space.subword {
        let sub_path = subword_path(path);
        let file = File::create(&sub_path).map_err(|e| Error::io(&sub_path, e))?;
        let mut out = BufWriter::new(file);
        let write_err = |e| Error::io(&sub_path, e);
        writeln!(
            out,
            "{} {} {} {}",
            table.bucket_count, table.dim, table.n_min, table.n_max
        )
        .map_err(write_err)?;
        for idx in 0..table.bucket_count {
            write!(out, "{idx}").map_err(write_err)?;
            for x in table.bucket(idx) {
                write!(out, " {x:.6}").map_err(write_err)?;
            }
            writeln!(out).map_err(write_err)?;
        }
        out.flush().map_err(write_err)?;
    }
    Ok(())
}

fn parse_float(path: &Path, line_no: usize, field: &str) -> Result<f32> {
    let value: f32 = field
        .parse()
        .map_err(|_| Error::format(path, line_no, format!("bad float {field:?}")))?;
    if !value.is_finite() {
        return Err(Error::format(
            path,
            line_no,
            format!("non-finite value {field:?}"),
        ));
    }
    Ok(value)
}

fn parse_header(path: &Path, line: Option<std::io::Result<String>>, fields: usize) -> Result<Vec<usize>> {
    let line = match line {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::format(path, 1, "missing header line")),
    };
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != fields {
        return Err(Error::format(
            path,
            1,
            format!("header must have {fields} fields, got {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<usize>()
                .map_err(|_| Error::format(path, 1, format!("bad header field {p:?}")))
        })
        .collect()
}

/// Parse the word2vec text format from any reader. `origin` is used in
/// error messages only.
pub fn read_embeddings(reader: impl BufRead, origin: &Path) -> Result<EmbeddingSpace> {
    let mut lines = reader.lines();
    let header = parse_header(origin, lines.next(), 2)?;
    let (count, dim) = (header[0], header[1]);
    if dim == 0 {
        return Err(Error::format(origin, 1, "dimension must be positive"));
    }
    // Guard against absurd headers before allocating.
    if count.saturating_mul(dim) > 1 << 33 {
        return Err(Error::format(origin, 1, "header dimensions too large"));
    }

    let mut words = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count * dim);
    for row in 0..count {
        let line_no = row + 2;
        let line = match lines.next() {
            Some(l) => l.map_err(|e| Error::io(origin, e))?,
            None => {
                return Err(Error::format(
                    origin,
                    line_no,
                    format!("expected {count} rows, file ends after {row}"),
                ))
            }
        };
        let mut fields = line.split_whitespace();
        let word = fields
            .next()
            .ok_or_else(|| Error::format(origin, line_no, "empty row"))?;
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::format(
                origin,
                line_no,
                format!("expected {dim} values, got {}", values.len()),
            ));
        }
        words.push(word.to_string());
        for field in values {
            vectors.push(parse_float(origin, line_no, field)?);
        }
    }
    if let Some(extra) = lines.next() {
        let extra = extra.map_err(|e| Error::io(origin, e))?;
        if !extra.trim().is_empty() {
            return Err(Error::format(
                origin,
                count + 2,
                "trailing content after declared rows",
            ));
        }
    }
    EmbeddingSpace::from_parts(dim, words, vectors, None)
}

/// Parse a subword bucket file from any reader.
pub fn read_subword_table(reader: impl BufRead, origin: &Path) -> Result<SubwordTable> {
    let mut lines = reader.lines();
    let header = parse_header(origin, lines.next(), 4)?;
    let (bucket_count, dim, n_min, n_max) = (header[0], header[1], header[2], header[3]);
    if bucket_count == 0 || dim == 0 {
        return Err(Error::format(origin, 1, "bucket count and dimension must be positive"));
    }
    if n_min == 0 || n_min > n_max {
        return Err(Error::format(origin, 1, "invalid n-gram range"));
    }
    if bucket_count.saturating_mul(dim) > 1 << 33 {
        return Err(Error::format(origin, 1, "header dimensions too large"));
    }

    let mut table = SubwordTable::new(n_min, n_max, bucket_count, dim);
    let mut seen = vec![false; bucket_count];
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let idx: usize = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::format(origin, line_no, "bad bucket index"))?;
        if idx >= bucket_count {
            return Err(Error::format(
                origin,
                line_no,
                format!("bucket index {idx} out of range (count {bucket_count})"),
            ));
        }
        if seen[idx] {
            return Err(Error::format(
                origin,
                line_no,
                format!("duplicate bucket index {idx}"),
            ));
        }
        seen[idx] = true;
        let values: Vec<&str> = fields.collect();
        if values.len() != dim {
            return Err(Error::format(
                origin,
                line_no,
                format!("expected {dim} values, got {}", values.len()),
            ));
        }
        let row = table.bucket_mut(idx);
        for (slot, field) in row.iter_mut().zip(values) {
            *slot = parse_float(origin, line_no, field)?;
        }
    }
    Ok(table)
}

/// Load a space from `path`, picking up `<path>.sub` when it exists.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingSpace> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let space = read_embeddings(BufReader::new(file), path)?;
    let sub_path = subword_path(path);
    if sub_path.exists() {
        let file = File::open(&sub_path).map_err(|e| Error::io(&sub_path, e))?;
        let table = read_subword_table(BufReader::new(file), &sub_path)?;
        return space.with_subword(table);
    }
    Ok(space)
}
