//! Random-binning codebooks over GF(2).
//!
//! Two flavors share one container:
//!
//! - individual mode: codewords have the message length (`n = k`); the first
//!   `k - w` message bits pick a bin, the last `w` bits pick the codeword
//!   inside it.
//! - strong mode: one bin per possible message column (`2^k` bins), codeword
//!   length `n >= k + w`, and the encoder burns fresh randomness to pick a
//!   codeword inside the bin.
//!
//! Each bin holds `Delta = 2^(w + ceil(n*epsilon))` codewords. An i.i.d.
//! fill draws every codeword independently (the ensemble the leakage
//! analysis is about), which cannot be globally injective once
//! `Delta * bins > 2^n`; decode then reports every candidate instead of
//! pretending otherwise. The partition fill (individual mode, `epsilon = 0`
//! only) deals GF(2)^k out as a seeded random permutation, giving a true
//! bijection for reliability tests.
//!
//! Mode defaults differ on `epsilon`: individual-mode callers may pass any
//! `epsilon >= 0` (arbitrarily small included), while strong mode defaults
//! to the smallest usable exponent `epsilon = 1/n`. The two conventions are
//! kept as is rather than reconciled.

use crate::coset::CosetCode;
use crate::error::{Error, Result};
use crate::util::substream;
use rand::RngCore;

/// Default cap on `bins * Delta * n` cells per codebook.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinMode {
    Individual,
    Strong,
}

impl BinMode {
    fn as_str(&self) -> &'static str {
        match self {
            BinMode::Individual => "individual",
            BinMode::Strong => "strong",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillMode {
    /// Every codeword drawn i.i.d. Bernoulli(1/2), the ensemble fill.
    Iid,
    /// A seeded random permutation of GF(2)^k dealt into bins; bijective.
    Partition,
}

impl FillMode {
    fn as_str(&self) -> &'static str {
        match self {
            FillMode::Iid => "iid",
            FillMode::Partition => "partition",
        }
    }
}

/// Outcome of a codebook lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    /// Exactly one message maps to the codeword.
    Message(Vec<u32>),
    /// Several (bin, slot) pairs store this codeword.
    Ambiguous(Vec<BinSlot>),
    /// The codeword is not in the book at all.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinSlot {
    pub bin: u64,
    pub slot: u64,
}

/// Per-bin counts of stored codewords consistent with a `w`-position
/// observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellReport {
    pub positions: Vec<usize>,
    pub values: Vec<u32>,
    pub per_bin: Vec<u64>,
    /// Sum of the per-bin counts.
    pub total: u64,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
}

/// Result of sampling shell counts against the `(1 +/- varepsilon) * target`
/// bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub trials: u64,
    pub varepsilon: f64,
    pub threshold: f64,
    /// Expected per-bin count, `Delta / 2^w`.
    pub target: f64,
    pub pairs_within: u64,
    pub pairs_total: u64,
    pub fraction: f64,
    pub pass: bool,
}

/// A binning codebook; see the module docs for the two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCodebook {
    mode: BinMode,
    fill: FillMode,
    k: usize,
    w: usize,
    n: usize,
    epsilon: f64,
    seed: u64,
    delta: u64,
    /// `bins[b][e]` is a codeword packed little-endian: bit `j` is entry `j`.
    bins: Vec<Vec<u64>>,
}

/// `Delta = 2^(w + ceil(n * epsilon))`, saturating on absurd exponents so
/// the budget check can reject them instead of overflowing.
fn delta_for(w: usize, n: usize, epsilon: f64) -> u64 {
    let extra = (n as f64 * epsilon).ceil() as u32;
    1u64
        .checked_shl(w as u32 + extra)
        .unwrap_or(u64::MAX)
}

fn pack(bits: &[u32]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (j, &b)| acc | ((b as u64 & 1) << j))
}

fn unpack(word: u64, n: usize) -> Vec<u32> {
    (0..n).map(|j| (word >> j & 1) as u32).collect()
}

/// Big-endian integer of a bit slice: the first entry is the most
/// significant, matching the "first entries choose the bin" wire layout.
fn index_of(bits: &[u32]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| acc << 1 | (b as u64 & 1))
}

pub(crate) fn bits_of(mut index: u64, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    for i in (0..len).rev() {
        out[i] = (index & 1) as u32;
        index >>= 1;
    }
    out
}

impl BinCodebook {
    /// Individual-mode codebook: `2^(k-w)` bins of `Delta` length-`k`
    /// codewords. `fill` picks the i.i.d. ensemble or the bijective
    /// partition (which requires `epsilon = 0`).
    pub fn generate_individual(
        k: usize,
        w: usize,
        epsilon: f64,
        fill: FillMode,
        seed: u64,
    ) -> Result<Self> {
        Self::generate_individual_budgeted(k, w, epsilon, fill, seed, DEFAULT_CELL_BUDGET)
    }

    pub fn generate_individual_budgeted(
        k: usize,
        w: usize,
        epsilon: f64,
        fill: FillMode,
        seed: u64,
        budget: u64,
    ) -> Result<Self> {
        if w == 0 || w >= k {
            return Err(Error::InvalidParameter(format!(
                "need 0 < w < k, got w={w}, k={k}"
            )));
        }
        if k > 62 {
            return Err(Error::InvalidParameter(format!("k={k} too large")));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon={epsilon}")));
        }
        if fill == FillMode::Partition && epsilon != 0.0 {
            return Err(Error::InvalidParameter(
                "partition fill requires epsilon = 0".into(),
            ));
        }
        let n = k;
        let delta = delta_for(w, n, epsilon);
        let num_bins = 1u64 << (k - w);
        check_budget(num_bins, delta, n, budget)?;
        let bins = match fill {
            FillMode::Iid => fill_iid(num_bins, delta, n, seed),
            FillMode::Partition => {
                let mut words: Vec<u64> = (0..1u64 << k).collect();
                let mut rng = substream(seed, "binning-partition");
                // Fisher-Yates, back to front
                for i in (1..words.len()).rev() {
                    let j = (rng.next_u64() % (i as u64 + 1)) as usize;
                    words.swap(i, j);
                }
                words.chunks(delta as usize).map(|c| c.to_vec()).collect()
            }
        };
        Ok(BinCodebook {
            mode: BinMode::Individual,
            fill,
            k,
            w,
            n,
            epsilon,
            seed,
            delta,
            bins,
        })
    }

    /// Individual-mode partition codebook whose bins are the cosets of a
    /// binary coset code: bin = coset index, slot = within-coset index. The
    /// per-bin shell counts of this book are perfectly flat.
    pub fn from_coset_code(code: &CosetCode) -> Result<Self> {
        if code.field().order() != 2 {
            return Err(Error::InvalidParameter(
                "codebook bins need a binary coset code".into(),
            ));
        }
        let k = code.k();
        let w = code.w();
        if w == 0 || k > 62 {
            return Err(Error::InvalidParameter(format!(
                "unsupported coset code shape k={k}, w={w}"
            )));
        }
        let kp = k - w;
        let mut bins = vec![Vec::with_capacity(1 << w); 1 << kp];
        for bin in 0..1u64 << kp {
            for slot in 0..1u64 << w {
                let mut m = bits_of(bin, kp);
                m.extend(bits_of(slot, w));
                let x = code.encode_column(&m)?;
                bins[bin as usize].push(pack(&x));
            }
        }
        Ok(BinCodebook {
            mode: BinMode::Individual,
            fill: FillMode::Partition,
            k,
            w,
            n: k,
            epsilon: 0.0,
            seed: 0,
            delta: 1 << w,
            bins,
        })
    }

    /// Strong-mode codebook: `2^k` bins of `Delta` length-`n` codewords,
    /// `n >= k + w` (default exactly `k + w`). Pass `epsilon = 1.0 / n as
    /// f64` for the smallest usable exponent.
    pub fn generate_strong(
        k: usize,
        w: usize,
        epsilon: f64,
        n: Option<usize>,
        seed: u64,
    ) -> Result<Self> {
        Self::generate_strong_budgeted(k, w, epsilon, n, seed, DEFAULT_CELL_BUDGET)
    }

    pub fn generate_strong_budgeted(
        k: usize,
        w: usize,
        epsilon: f64,
        n: Option<usize>,
        seed: u64,
        budget: u64,
    ) -> Result<Self> {
        if w == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "need w >= 1 and k >= 1, got w={w}, k={k}"
            )));
        }
        let n = n.unwrap_or(k + w);
        if n < k + w || n > 62 || k > 62 {
            return Err(Error::InvalidParameter(format!(
                "need k+w <= n <= 62, got n={n}, k={k}, w={w}"
            )));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon={epsilon}")));
        }
        let delta = delta_for(w, n, epsilon);
        let num_bins = 1u64 << k;
        check_budget(num_bins, delta, n, budget)?;
        Ok(BinCodebook {
            mode: BinMode::Strong,
            fill: FillMode::Iid,
            k,
            w,
            n,
            epsilon,
            seed,
            delta,
            bins: fill_iid(num_bins, delta, n, seed),
        })
    }

    pub fn mode(&self) -> BinMode {
        self.mode
    }

    pub fn fill(&self) -> FillMode {
        self.fill
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn num_bins(&self) -> u64 {
        self.bins.len() as u64
    }

    /// Codeword at (bin, slot), unpacked to bits.
    pub fn codeword(&self, bin: u64, slot: u64) -> Vec<u32> {
        unpack(self.bins[bin as usize][slot as usize], self.n)
    }

    /// Individual-mode encoding: first `k-w` bits choose the bin, last `w`
    /// bits the slot.
    pub fn encode_individual(&self, m: &[u32]) -> Result<Vec<u32>> {
        if self.mode != BinMode::Individual {
            return Err(Error::InvalidParameter(
                "individual encode on a strong-mode codebook".into(),
            ));
        }
        self.check_bits(m, self.k)?;
        let bin = index_of(&m[..self.k - self.w]);
        let slot = index_of(&m[self.k - self.w..]);
        Ok(self.codeword(bin, slot))
    }

    /// Invert [`BinCodebook::encode_individual`] by codeword lookup. With a
    /// partition fill this always yields `Decoded::Message`; with an i.i.d.
    /// fill collisions are reported as `Ambiguous` and absent codewords as
    /// `Unknown`.
    pub fn decode_individual(&self, x: &[u32]) -> Result<Decoded> {
        if self.mode != BinMode::Individual {
            return Err(Error::InvalidParameter(
                "individual decode on a strong-mode codebook".into(),
            ));
        }
        self.check_bits(x, self.n)?;
        let hits = self.lookup(pack(x));
        Ok(match hits.len() {
            0 => Decoded::Unknown,
            1 => {
                let mut m = bits_of(hits[0].bin, self.k - self.w);
                m.extend(bits_of(hits[0].slot, self.w));
                Decoded::Message(m)
            }
            _ => Decoded::Ambiguous(hits),
        })
    }

    /// Strong-mode encoding: the message picks the bin, `pick` (reduced mod
    /// `Delta`) picks the codeword inside it. Feed it fresh uniform
    /// randomness per column.
    pub fn encode_strong(&self, m: &[u32], pick: u64) -> Result<Vec<u32>> {
        if self.mode != BinMode::Strong {
            return Err(Error::InvalidParameter(
                "strong encode on an individual-mode codebook".into(),
            ));
        }
        self.check_bits(m, self.k)?;
        let bin = index_of(m);
        Ok(self.codeword(bin, pick % self.delta))
    }

    /// Map a codeword back to its bin's message. Slot multiplicity inside
    /// one bin is harmless (the message is the bin); the same codeword in
    /// two bins is a genuine ambiguity.
    pub fn decode_strong(&self, x: &[u32]) -> Result<Decoded> {
        if self.mode != BinMode::Strong {
            return Err(Error::InvalidParameter(
                "strong decode on an individual-mode codebook".into(),
            ));
        }
        self.check_bits(x, self.n)?;
        let hits = self.lookup(pack(x));
        let mut bins: Vec<u64> = hits.iter().map(|h| h.bin).collect();
        bins.dedup();
        Ok(match bins.len() {
            0 => Decoded::Unknown,
            1 => Decoded::Message(bits_of(bins[0], self.k)),
            _ => Decoded::Ambiguous(hits),
        })
    }

    fn lookup(&self, word: u64) -> Vec<BinSlot> {
        let mut hits = Vec::new();
        for (b, bin) in self.bins.iter().enumerate() {
            for (e, &cw) in bin.iter().enumerate() {
                if cw == word {
                    hits.push(BinSlot {
                        bin: b as u64,
                        slot: e as u64,
                    });
                }
            }
        }
        hits
    }

    fn check_bits(&self, m: &[u32], want: usize) -> Result<()> {
        if m.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, codebook wants {want}",
                m.len()
            )));
        }
        if let Some(&bad) = m.iter().find(|&&b| b > 1) {
            return Err(Error::ElementOutOfRange { value: bad, q: 2 });
        }
        Ok(())
    }

    /// Exact per-bin counts of stored codewords agreeing with `values` at
    /// `positions` (`w` distinct coordinates).
    pub fn shell_report(&self, positions: &[usize], values: &[u32]) -> Result<ShellReport> {
        if positions.len() != self.w || values.len() != self.w {
            return Err(Error::DimensionMismatch(format!(
                "observation of {} positions / {} values, codebook wants w={}",
                positions.len(),
                values.len(),
                self.w
            )));
        }
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.w || positions.iter().any(|&p| p >= self.n) {
            return Err(Error::InvalidParameter(
                "positions must be distinct and within the codeword length".into(),
            ));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(Error::InvalidParameter("values must be bits".into()));
        }
        let mut mask = 0u64;
        let mut want = 0u64;
        for (&p, &v) in positions.iter().zip(values) {
            mask |= 1 << p;
            want |= (v as u64) << p;
        }
        let per_bin: Vec<u64> = self
            .bins
            .iter()
            .map(|bin| bin.iter().filter(|&&cw| cw & mask == want).count() as u64)
            .collect();
        let total: u64 = per_bin.iter().sum();
        let min = per_bin.iter().copied().min().unwrap_or(0);
        let max = per_bin.iter().copied().max().unwrap_or(0);
        Ok(ShellReport {
            positions: positions.to_vec(),
            values: values.to_vec(),
            per_bin,
            total,
            mean: total as f64 / self.bins.len() as f64,
            min,
            max,
        })
    }

    /// Sample `trials` random observations and measure how many (observation,
    /// bin) pairs fall inside `(1 +/- varepsilon) * Delta/2^w`. Passes when
    /// the fraction reaches `threshold`.
    pub fn concentration_check(
        &self,
        trials: u64,
        varepsilon: f64,
        threshold: f64,
        seed: u64,
    ) -> Result<ConcentrationReport> {
        if trials == 0 {
            return Err(Error::InvalidParameter("need trials >= 1".into()));
        }
        let target = (self.delta >> self.w) as f64;
        let lo = (1.0 - varepsilon) * target;
        let hi = (1.0 + varepsilon) * target;
        let mut rng = substream(seed, "shell-concentration");
        let mut within = 0u64;
        let mut total_pairs = 0u64;
        for _ in 0..trials {
            // draw w distinct positions, then w value bits
            let mut pool: Vec<usize> = (0..self.n).collect();
            for i in 0..self.w {
                let j = i + (rng.next_u64() as usize) % (self.n - i);
                pool.swap(i, j);
            }
            let mut positions = pool[..self.w].to_vec();
            positions.sort_unstable();
            let values: Vec<u32> = (0..self.w).map(|_| (rng.next_u64() & 1) as u32).collect();
            let report = self.shell_report(&positions, &values)?;
            for &count in &report.per_bin {
                let c = count as f64;
                if c >= lo && c <= hi {
                    within += 1;
                }
                total_pairs += 1;
            }
        }
        let fraction = within as f64 / total_pairs as f64;
        Ok(ConcentrationReport {
            trials,
            varepsilon,
            threshold,
            target,
            pairs_within: within,
            pairs_total: total_pairs,
            fraction,
            pass: fraction >= threshold,
        })
    }

    /// Dump: a header naming every parameter, then each bin as lines of
    /// bit-strings (entry 0 first).
    pub fn to_dump(&self) -> String {
        let mut s = format!(
            "bin-codebook v1\nmode {}\nfill {}\nk {}\nw {}\nn {}\nepsilon {}\nseed {}\ndelta {}\nbins {}\n",
            self.mode.as_str(),
            self.fill.as_str(),
            self.k,
            self.w,
            self.n,
            self.epsilon,
            self.seed,
            self.delta,
            self.bins.len(),
        );
        for (b, bin) in self.bins.iter().enumerate() {
            s.push_str(&format!("bin {b}\n"));
            for &cw in bin {
                let bits: String = (0..self.n)
                    .map(|j| if cw >> j & 1 == 1 { '1' } else { '0' })
                    .collect();
                s.push_str(&bits);
                s.push('\n');
            }
        }
        s
    }

    /// Parse a dump and re-validate the invariants: counts, codeword
    /// lengths, `Delta` consistency, and bijectivity for partition fills.
    pub fn from_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(no, l)| (no + 1, l.trim()))
                .ok_or(Error::Parse {
                    line: 0,
                    msg: format!("missing {what}"),
                })
        };
        let (no, header) = next("header")?;
        if header != "bin-codebook v1" {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected `bin-codebook v1`, found `{header}`"),
            });
        }
        fn field<'a>(line: (usize, &'a str), key: &str) -> Result<&'a str> {
            line.1.strip_prefix(key).map(str::trim).ok_or(Error::Parse {
                line: line.0,
                msg: format!("expected `{key} ...`, found `{}`", line.1),
            })
        }
        let mode = match field(next("mode")?, "mode")? {
            "individual" => BinMode::Individual,
            "strong" => BinMode::Strong,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown mode `{other}`"),
                })
            }
        };
        let fill = match field(next("fill")?, "fill")? {
            "iid" => FillMode::Iid,
            "partition" => FillMode::Partition,
            other => {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("unknown fill `{other}`"),
                })
            }
        };
        let parse_num = |s: &str, what: &str| -> Result<u64> {
            s.parse().map_err(|e| Error::Parse {
                line: 0,
                msg: format!("bad {what}: {e}"),
            })
        };
        let k = parse_num(field(next("k")?, "k")?, "k")? as usize;
        let w = parse_num(field(next("w")?, "w")?, "w")? as usize;
        let n = parse_num(field(next("n")?, "n")?, "n")? as usize;
        let epsilon: f64 = field(next("epsilon")?, "epsilon")?
            .parse()
            .map_err(|e| Error::Parse {
                line: 0,
                msg: format!("bad epsilon: {e}"),
            })?;
        let seed = parse_num(field(next("seed")?, "seed")?, "seed")?;
        let delta = parse_num(field(next("delta")?, "delta")?, "delta")?;
        let num_bins = parse_num(field(next("bins")?, "bins")?, "bins")?;

        if w == 0 || k == 0 || k > 62 || n > 62 {
            return Err(Error::Parse {
                line: 0,
                msg: format!("inconsistent parameters k={k}, w={w}, n={n}"),
            });
        }
        let expected_bins = match mode {
            BinMode::Individual => {
                if w >= k || n != k {
                    return Err(Error::Parse {
                        line: 0,
                        msg: "individual mode needs w < k and n = k".into(),
                    });
                }
                1u64 << (k - w)
            }
            BinMode::Strong => {
                if n < k + w {
                    return Err(Error::Parse {
                        line: 0,
                        msg: "strong mode needs n >= k + w".into(),
                    });
                }
                if fill == FillMode::Partition {
                    return Err(Error::Parse {
                        line: 0,
                        msg: "strong mode cannot use a partition fill".into(),
                    });
                }
                1u64 << k
            }
        };
        if num_bins != expected_bins {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {expected_bins} bins, header says {num_bins}"),
            });
        }
        if delta != delta_for(w, n, epsilon) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("delta {delta} disagrees with 2^(w + ceil(n*epsilon))"),
            });
        }

        let mut bins = Vec::with_capacity(num_bins as usize);
        for b in 0..num_bins {
            let (no, tag) = next("bin header")?;
            if tag != format!("bin {b}") {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected `bin {b}`, found `{tag}`"),
                });
            }
            let mut bin = Vec::with_capacity(delta as usize);
            for _ in 0..delta {
                let (no, bits) = next("codeword")?;
                if bits.len() != n || bits.bytes().any(|c| c != b'0' && c != b'1') {
                    return Err(Error::Parse {
                        line: no,
                        msg: format!("bad codeword `{bits}`"),
                    });
                }
                let word = bits
                    .bytes()
                    .enumerate()
                    .fold(0u64, |acc, (j, c)| acc | (((c - b'0') as u64) << j));
                bin.push(word);
            }
            bins.push(bin);
        }
        if lines.next().is_some() {
            return Err(Error::Parse {
                line: 0,
                msg: "trailing content after the last bin".into(),
            });
        }
        if fill == FillMode::Partition {
            let mut all: Vec<u64> = bins.iter().flatten().copied().collect();
            all.sort_unstable();
            let exhaustive = all.len() as u64 == 1u64 << k
                && all.iter().enumerate().all(|(i, &v)| v == i as u64);
            if !exhaustive {
                return Err(Error::Parse {
                    line: 0,
                    msg: "partition fill must cover GF(2)^k exactly once".into(),
                });
            }
        }
        Ok(BinCodebook {
            mode,
            fill,
            k,
            w,
            n,
            epsilon,
            seed,
            delta,
            bins,
        })
    }
}

fn check_budget(bins: u64, delta: u64, n: usize, budget: u64) -> Result<()> {
    let cells = bins as u128 * delta as u128 * n as u128;
    if cells > budget as u128 {
        return Err(Error::ResourceBudget {
            cells: cells.min(u64::MAX as u128) as u64,
            budget,
        });
    }
    Ok(())
}

fn fill_iid(bins: u64, delta: u64, n: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = substream(seed, "binning-iid");
    let mask = (1u64 << n) - 1;
    (0..bins)
        .map(|_| (0..delta).map(|_| rng.next_u64() & mask).collect())
        .collect()
}
