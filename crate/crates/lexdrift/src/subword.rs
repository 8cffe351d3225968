//! Character n-gram extraction and bucket hashing for subword vectors.
//!
//! A word `w` is padded to `<w>` and all character n-grams with length in
//! `[n_min, n_max]` are taken, the full padded token included when its
//! length falls in range. Lengths count Unicode scalar values, not bytes.
//! N-grams map to rows of a fixed-size bucket table via FNV-1a (32 bit)
//! over their UTF-8 bytes, modulo the bucket count; trainer and lookup use
//! this exact function so out-of-vocabulary composition agrees with what
//! was trained.

pub const BOW: char = '<';
pub const EOW: char = '>';

/// Default number of hash buckets for subword n-grams.
pub const DEFAULT_BUCKETS: usize = 2_000_000;

/// All character n-grams of `<w>` with length in `[n_min, n_max]`,
/// ordered by start position, then by length.
pub fn extract_ngrams(word: &str, n_min: usize, n_max: usize) -> Vec<String> {
    assert!(n_min >= 1 && n_min <= n_max, "invalid n-gram range");
    if word.is_empty() {
        return Vec::new();
    }
    let mut padded: Vec<char> = Vec::with_capacity(word.chars().count() + 2);
    padded.push(BOW);
    padded.extend(word.chars());
    padded.push(EOW);

    let len = padded.len();
    let mut ngrams = Vec::new();
    for start in 0..len {
        let longest = n_max.min(len - start);
        for n in n_min..=longest {
            ngrams.push(padded[start..start + n].iter().collect());
        }
    }
    ngrams
}

/// FNV-1a 32-bit hash of the n-gram bytes.
pub fn fnv1a(bytes: &[u8]) -> u32 {
    let mut hash: u32 = 0x811c_9dc5;
    for &b in bytes {
        hash ^= b as u32;
        hash = hash.wrapping_mul(0x0100_0193);
    }
    hash
}

/// Bucket index of one n-gram.
pub fn bucket_index(ngram: &str, bucket_count: usize) -> usize {
    assert!(bucket_count > 0, "bucket_count must be positive");
    fnv1a(ngram.as_bytes()) as usize % bucket_count
}

/// Bucket indices for every n-gram of `word`, in n-gram order.
/// Repeated indices are kept: two n-grams hashing to the same bucket
/// both contribute to averages.
pub fn bucket_indices(word: &str, n_min: usize, n_max: usize, bucket_count: usize) -> Vec<usize> {
    extract_ngrams(word, n_min, n_max)
        .iter()
        .map(|ng| bucket_index(ng, bucket_count))
        .collect()
}
