//! Scoring predictions against gold data: accuracy for binary detection,
//! Pearson and Kendall tau-b (with asymptotic p-value) for rankings.
//!
//! Gold and prediction files share the answer layout: `word<TAB>label`
//! lines for the binary task, `word<TAB>score` lines for the graded task,
//! UTF-8.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Ground-truth labels and graded scores for a target word list.
#[derive(Debug, Clone, Default)]
pub struct GoldData {
    pub binary: BTreeMap<String, u8>,
    pub graded: BTreeMap<String, f64>,
}

/// Fraction of exact label matches. The two maps must cover the same words.
pub fn accuracy(pred: &BTreeMap<String, u8>, gold: &BTreeMap<String, u8>) -> Result<f64> {
    let mismatch: Vec<String> = pred
        .keys()
        .filter(|w| !gold.contains_key(*w))
        .chain(gold.keys().filter(|w| !pred.contains_key(*w)))
        .cloned()
        .collect();
    if !mismatch.is_empty() {
        return Err(Error::KeyMismatch { words: mismatch });
    }
    if pred.is_empty() {
        return Err(Error::TooFewValues(0));
    }
    let hits = pred
        .iter()
        .filter(|(w, &l)| gold[w.as_str()] == l)
        .count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len(), "pearson arguments differ in length");
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewValues(n));
    }
    let mean_x = x.iter().sum::<f64>() / n as f64;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mean_x, b - mean_y);
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Kendall tau-b with tie correction, plus a two-sided p-value from the
/// normal approximation with tie-adjusted variance. The approximation is
/// coarse below roughly n = 10.
///
/// tau_b = (C - D) / sqrt((n0 - n1)(n0 - n2)) with n0 = n(n-1)/2 and
/// n1, n2 the tied-pair counts of x and y.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    assert_eq!(x.len(), y.len(), "kendall_tau arguments differ in length");
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewValues(n));
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Tie runs over x (and joint xy ties) in (x, y) order.
    let mut x_ties = TieStats::default();
    let mut xy_tied_pairs: u64 = 0;
    let mut run = 1u64;
    let mut joint_run = 1u64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                joint_run += 1;
            } else {
                xy_tied_pairs += joint_run * (joint_run - 1) / 2;
                joint_run = 1;
            }
        } else {
            x_ties.add_run(run);
            run = 1;
            xy_tied_pairs += joint_run * (joint_run - 1) / 2;
            joint_run = 1;
        }
    }
    x_ties.add_run(run);
    xy_tied_pairs += joint_run * (joint_run - 1) / 2;

    // Discordant pairs = inversions of y once sorted by (x, y).
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys);

    // ys is now sorted; tie runs over y.
    let mut y_ties = TieStats::default();
    run = 1;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run += 1;
        } else {
            y_ties.add_run(run);
            run = 1;
        }
    }
    y_ties.add_run(run);

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = x_ties.tied_pairs;
    let n2 = y_ties.tied_pairs;
    if n1 == n0 || n2 == n0 {
        return Err(Error::AllTied);
    }

    let con_minus_dis =
        n0 as f64 - n1 as f64 - n2 as f64 + xy_tied_pairs as f64 - 2.0 * discordant as f64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    let tau = (con_minus_dis / denom).clamp(-1.0, 1.0);

    // Tie-adjusted variance of S = C - D (normal approximation).
    let nf = n as f64;
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let mut var_s = (v0 - x_ties.v_t - y_ties.v_t) / 18.0
        + (2.0 * x_ties.tied_pairs as f64) * (2.0 * y_ties.tied_pairs as f64)
            / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var_s += x_ties.v_product * y_ties.v_product / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    let z = con_minus_dis / var_s.sqrt();
    let p = erfc(z.abs() / std::f64::consts::SQRT_2);
    Ok((tau, p))
}

#[derive(Default)]
struct TieStats {
    /// sum over tie groups of t(t-1)/2
    tied_pairs: u64,
    /// sum of t(t-1)(2t+5)
    v_t: f64,
    /// sum of t(t-1)(t-2)
    v_product: f64,
}

impl TieStats {
    fn add_run(&mut self, t: u64) {
        self.tied_pairs += t * (t - 1) / 2;
        let tf = t as f64;
        self.v_t += tf * (tf - 1.0) * (2.0 * tf + 5.0);
        self.v_product += tf * (tf - 1.0) * (tf - 2.0);
    }
}

/// Merge sort counting inversions (strict). Sorts `values` in place.
fn count_inversions(values: &mut [f64]) -> u64 {
    let n = values.len();
    let mut buf = vec![0.0f64; n];
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if j >= end || (i < mid && values[i] <= values[j]) {
                    buf[k] = values[i];
                    i += 1;
                } else {
                    inversions += (mid - i) as u64;
                    buf[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            values[start..end].copy_from_slice(&buf[start..end]);
            start = end;
        }
        width *= 2;
    }
    inversions
}

fn split_answer_line(line: &str) -> Option<(&str, &str)> {
    let line = line.trim_end_matches('\r');
    let (word, value) = line.split_once('\t')?;
    if word.is_empty() {
        return None;
    }
    Some((word, value))
}

/// Parse `word<TAB>{0,1}` lines. Blank lines are skipped; anything else
/// malformed is a format error naming the line.
pub fn read_binary_labels(reader: impl BufRead, origin: &Path) -> Result<BTreeMap<String, u8>> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, value) = split_answer_line(&line)
            .ok_or_else(|| Error::format(origin, line_no, "expected word<TAB>label"))?;
        let label = match value.trim() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::format(
                    origin,
                    line_no,
                    format!("label must be 0 or 1, got {other:?}"),
                ))
            }
        };
        if out.insert(word.to_string(), label).is_some() {
            return Err(Error::format(
                origin,
                line_no,
                format!("duplicate word {word:?}"),
            ));
        }
    }
    Ok(out)
}

/// Parse `word<TAB>score` lines with finite scores.
pub fn read_graded_scores(reader: impl BufRead, origin: &Path) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, value) = split_answer_line(&line)
            .ok_or_else(|| Error::format(origin, line_no, "expected word<TAB>score"))?;
        let score: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::format(origin, line_no, format!("bad score {value:?}")))?;
        if !score.is_finite() {
            return Err(Error::format(origin, line_no, "score must be finite"));
        }
        if out.insert(word.to_string(), score).is_some() {
            return Err(Error::format(
                origin,
                line_no,
                format!("duplicate word {word:?}"),
            ));
        }
    }
    Ok(out)
}

pub fn load_binary_labels(path: &Path) -> Result<BTreeMap<String, u8>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_binary_labels(BufReader::new(file), path)
}

pub fn load_graded_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_graded_scores(BufReader::new(file), path)
}

/// Align prediction and gold scores on their (identical) word sets and
/// return paired vectors in sorted word order.
pub fn align_scores(
    pred: &BTreeMap<String, f64>,
    gold: &BTreeMap<String, f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mismatch: Vec<String> = pred
        .keys()
        .filter(|w| !gold.contains_key(*w))
        .chain(gold.keys().filter(|w| !pred.contains_key(*w)))
        .cloned()
        .collect();
    if !mismatch.is_empty() {
        return Err(Error::KeyMismatch { words: mismatch });
    }
    let xs = pred.values().copied().collect();
    let ys = pred.keys().map(|w| gold[w]).collect();
    Ok((xs, ys))
}

// Targets files are one word per line; blank lines are skipped.
pub fn read_target_words(reader: impl BufRead, origin: &Path) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let word = line.trim_end_matches('\r').trim();
        if !word.is_empty() {
            out.push(word.to_string());
        }
    }
    Ok(out)
}

pub fn load_target_words(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_target_words(BufReader::new(file), path)
}

/// Write `word<TAB>label` rows in the given order.
pub fn write_binary_labels(path: &Path, rows: &[(String, u8)]) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for (word, label) in rows {
        writeln!(out, "{word}\t{label}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Write `word<TAB>score` rows (six decimals) in the given order.
pub fn write_graded_scores(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    use std::io::Write;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for (word, score) in rows {
        writeln!(out, "{word}\t{score:.6}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Brute-force tau-b by definitional pair counting, O(n^2): the
/// independent oracle used by equivalence tests.
#[doc(hidden)]
pub fn kendall_tau_pair_count_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut tied_x, mut tied_y) = (0i64, 0i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (x[i] - x[j]).signum();
            let dy = (y[i] - y[j]).signum();
            if x[i] == x[j] {
                tied_x += 1;
            }
            if y[i] == y[j] {
                tied_y += 1;
            }
            if x[i] != x[j] && y[i] != y[j] {
                if dx == dy {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    if tied_x == n0 || tied_y == n0 {
        return None;
    }
    let denom = (((n0 - tied_x) as f64) * ((n0 - tied_y) as f64)).sqrt();
    Some((concordant - discordant) as f64 / denom)
}
