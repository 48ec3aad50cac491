//! Seeded corpus generators and the two corpus file formats.
//!
//! Binary layout (little-endian): magic `EDLCSCP1`, `u32` entry count, then
//! per entry `u32 |X|`, X, `u32 |Y|`, Y, `u32 planted` (`u32::MAX` = none).
//! Text layout: X and Y on consecutive lines, no planted values.

use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BenchError;

const MAGIC: &[u8; 8] = b"EDLCSCP1";
const NO_PLANT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    RandomUniform,
    /// `k` random edits of a random base; insertions and deletions come in
    /// pairs so both strings keep the requested length.
    PlantedEd,
    /// Two random strings sharing a planted common subsequence of length `k`.
    PlantedLcs,
    File,
}

impl std::str::FromStr for Generator {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Ok(match s {
            "random_uniform" => Generator::RandomUniform,
            "planted_ed" => Generator::PlantedEd,
            "planted_lcs" => Generator::PlantedLcs,
            "file" => Generator::File,
            _ => return Err(BenchError::BadSpec(format!("unknown generator `{s}`"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    /// ED: upper bound (edits applied). LCS: lower bound (planted length).
    pub planted: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
    pub generator: Generator,
    pub alphabet_size: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub generator: Generator,
    pub pairs: usize,
    /// Length of each string.
    pub length: usize,
    pub alphabet_size: usize,
    /// Edits (ED) or planted subsequence length (LCS).
    pub k: usize,
    pub seed: u64,
}

/// Symbol `i` of an alphabet of the given size.
pub fn symbol(i: usize, size: usize) -> u8 {
    if size <= 26 {
        b'a' + i as u8
    } else {
        i as u8
    }
}

fn index_of(b: u8, size: usize) -> usize {
    if size <= 26 {
        (b - b'a') as usize
    } else {
        b as usize
    }
}

fn random_string(rng: &mut ChaCha8Rng, len: usize, sigma: usize) -> Vec<u8> {
    (0..len).map(|_| symbol(rng.gen_range(0..sigma), sigma)).collect()
}

fn plant_edits(rng: &mut ChaCha8Rng, base: &[u8], k: usize, sigma: usize) -> Vec<u8> {
    let mut indel = 0usize;
    for _ in 0..k {
        if rng.gen_range(0..3) != 0 {
            indel += 1;
        }
    }
    let pairs = indel / 2;
    let subs = k - 2 * pairs;
    // 0 = substitution, 1 = insertion, 2 = deletion
    let mut ops: Vec<u8> = std::iter::repeat(0).take(subs).collect();
    ops.extend(std::iter::repeat(1).take(pairs));
    ops.extend(std::iter::repeat(2).take(pairs));
    for i in (1..ops.len()).rev() {
        let j = rng.gen_range(0..=i);
        ops.swap(i, j);
    }
    let mut y = base.to_vec();
    for op in ops {
        match op {
            0 if sigma > 1 && !y.is_empty() => {
                let p = rng.gen_range(0..y.len());
                let cur = index_of(y[p], sigma);
                let c = symbol((cur + 1 + rng.gen_range(0..sigma - 1)) % sigma, sigma);
                y[p] = c;
            }
            1 => {
                let p = rng.gen_range(0..=y.len());
                y.insert(p, symbol(rng.gen_range(0..sigma), sigma));
            }
            2 if !y.is_empty() => {
                let p = rng.gen_range(0..y.len());
                y.remove(p);
            }
            _ => {}
        }
    }
    y
}

fn plant_common(rng: &mut ChaCha8Rng, x: &[u8], y: &mut [u8], k: usize) {
    let k = k.min(x.len()).min(y.len());
    let mut px = sample(rng, x.len(), k).into_vec();
    let mut py = sample(rng, y.len(), k).into_vec();
    px.sort_unstable();
    py.sort_unstable();
    for (i, j) in px.into_iter().zip(py) {
        y[j] = x[i];
    }
}

pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus, BenchError> {
    if spec.alphabet_size == 0 || spec.alphabet_size > 256 {
        return Err(BenchError::BadSpec(format!("alphabet size {} outside 1..=256", spec.alphabet_size)));
    }
    if spec.generator == Generator::File {
        return Err(BenchError::BadSpec("file corpora are read, not generated".into()));
    }
    if spec.generator == Generator::PlantedLcs && spec.k > spec.length {
        return Err(BenchError::BadSpec(format!("planted length {} exceeds string length", spec.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = spec.alphabet_size;
    let entries = (0..spec.pairs)
        .map(|_| {
            let x = random_string(&mut rng, spec.length, sigma);
            match spec.generator {
                Generator::RandomUniform => {
                    let y = random_string(&mut rng, spec.length, sigma);
                    CorpusEntry { x, y, planted: None }
                }
                Generator::PlantedEd => {
                    let y = plant_edits(&mut rng, &x, spec.k, sigma);
                    CorpusEntry { x, y, planted: Some(spec.k as u64) }
                }
                Generator::PlantedLcs => {
                    let mut y = random_string(&mut rng, spec.length, sigma);
                    plant_common(&mut rng, &x, &mut y, spec.k);
                    CorpusEntry { x, y, planted: Some(spec.k as u64) }
                }
                Generator::File => unreachable!(),
            }
        })
        .collect();
    Ok(Corpus { entries, generator: spec.generator, alphabet_size: sigma, seed: spec.seed })
}

fn io_err(path: &Path, e: std::io::Error) -> BenchError {
    BenchError::Io { path: path.display().to_string(), source: e }
}

impl Corpus {
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            for s in [&e.x, &e.y] {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s);
            }
            let p = e.planted.map_or(NO_PLANT, |v| v.min(NO_PLANT as u64 - 1) as u32);
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    /// Text form; fails on strings containing line breaks.
    pub fn to_text(&self) -> Result<String, BenchError> {
        let mut out = String::new();
        for e in &self.entries {
            for s in [&e.x, &e.y] {
                if s.iter().any(|&b| b == b'\n' || b == b'\r') {
                    return Err(BenchError::BadSpec("text corpora cannot hold line breaks".into()));
                }
                out.push_str(std::str::from_utf8(s).map_err(|_| BenchError::BadSpec("text corpora must be UTF-8".into()))?);
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Corpus, BenchError> {
        let entries = if bytes.starts_with(MAGIC) {
            parse_binary(&bytes[MAGIC.len()..])?
        } else {
            parse_text(bytes)?
        };
        let alphabet_size = {
            let mut seen = [false; 256];
            for e in &entries {
                for &b in e.x.iter().chain(&e.y) {
                    seen[b as usize] = true;
                }
            }
            seen.iter().filter(|&&s| s).count()
        };
        Ok(Corpus { entries, generator: Generator::File, alphabet_size, seed: 0 })
    }

    pub fn read(path: &Path) -> Result<Corpus, BenchError> {
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        Corpus::from_bytes(&bytes)
    }

    pub fn write(&self, path: &Path, text: bool) -> Result<(), BenchError> {
        let data = if text { self.to_text()?.into_bytes() } else { self.to_binary() };
        fs::write(path, data).map_err(|e| io_err(path, e))
    }
}

fn parse_binary(mut b: &[u8]) -> Result<Vec<CorpusEntry>, BenchError> {
    let truncated = || BenchError::BadSpec("truncated binary corpus".into());
    let take_u32 = |b: &mut &[u8]| -> Result<u32, BenchError> {
        if b.len() < 4 {
            return Err(truncated());
        }
        let v = u32::from_le_bytes(b[..4].try_into().unwrap());
        *b = &b[4..];
        Ok(v)
    };
    let count = take_u32(&mut b)? as usize;
    let mut out = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let mut strs = [Vec::new(), Vec::new()];
        for s in &mut strs {
            let len = take_u32(&mut b)? as usize;
            if b.len() < len {
                return Err(truncated());
            }
            *s = b[..len].to_vec();
            b = &b[len..];
        }
        let p = take_u32(&mut b)?;
        let [x, y] = strs;
        out.push(CorpusEntry { x, y, planted: (p != NO_PLANT).then_some(p as u64) });
    }
    if !b.is_empty() {
        return Err(BenchError::BadSpec("trailing bytes after binary corpus".into()));
    }
    Ok(out)
}

fn parse_text(bytes: &[u8]) -> Result<Vec<CorpusEntry>, BenchError> {
    let mut lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').map(|l| l.strip_suffix(b"\r").unwrap_or(l)).collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    if lines.len() % 2 != 0 {
        return Err(BenchError::BadSpec("text corpus needs an even number of lines".into()));
    }
    Ok(lines
        .chunks(2)
        .map(|c| CorpusEntry { x: c[0].to_vec(), y: c[1].to_vec(), planted: None })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(generator: Generator, k: usize) -> CorpusSpec {
        CorpusSpec { generator, pairs: 5, length: 64, alphabet_size: 4, k, seed: 11 }
    }

    #[test]
    fn zero_edits_give_identical_pairs() {
        let c = generate_corpus(&spec(Generator::PlantedEd, 0)).unwrap();
        assert!(c.entries.iter().all(|e| e.x == e.y));
    }

    #[test]
    fn planted_ed_keeps_lengths() {
        let c = generate_corpus(&spec(Generator::PlantedEd, 9)).unwrap();
        assert!(c.entries.iter().all(|e| e.x.len() == 64 && e.y.len() == 64));
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&spec(Generator::PlantedLcs, 20)).unwrap();
        let b = generate_corpus(&spec(Generator::PlantedLcs, 20)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_and_text_round_trip() {
        let c = generate_corpus(&spec(Generator::PlantedEd, 3)).unwrap();
        let back = Corpus::from_bytes(&c.to_binary()).unwrap();
        assert_eq!(back.entries, c.entries);
        let t = Corpus::from_bytes(c.to_text().unwrap().as_bytes()).unwrap();
        assert_eq!(t.entries.len(), 5);
        assert_eq!(t.entries[0].x, c.entries[0].x);
        assert!(Corpus::from_bytes(b"").unwrap().entries.is_empty());
    }

    #[test]
    fn bad_specs() {
        let mut s = spec(Generator::RandomUniform, 0);
        s.alphabet_size = 0;
        assert!(generate_corpus(&s).is_err());
        assert!(Corpus::from_bytes(b"one line\n").is_err());
    }
}
