//! Structured linear coset codes.
//!
//! A `(k, w)` code over GF(q) splits each length-`k` message column in two:
//! the first `k' = k - w` entries pick a coset of the underlying linear code
//! (they are recovered as the syndrome `H*x`), the remaining `w` entries pick
//! the member within the coset. Encoding is a single matrix product, so the
//! message-to-codeword map is a bijection of GF(q)^k and costs no rate.
//!
//! Wire layout: message entries `0..k'` select the coset, entries `k'..k`
//! select the codeword inside it.

use crate::error::{Error, Result};
use crate::gf::{FieldMatrix, FieldSpec};
use crate::util::{binomial, for_each_combination, substream};
use rand::Rng;

/// A `(k, w)` coset code with parity-check matrix `H`, generator `G` and the
/// complement matrix `Gstar` satisfying `H * Gstar^T = I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetCode {
    field: FieldSpec,
    k: usize,
    w: usize,
    h: FieldMatrix,
    g: FieldMatrix,
    gstar: FieldMatrix,
    /// `[Gstar; G]^T`, the encoding map.
    enc: FieldMatrix,
    /// Inverse of `enc`, the decoding map.
    dec: FieldMatrix,
}

impl CosetCode {
    /// Build the canonical code from a generator matrix: `H` is the
    /// deterministic null-space basis of `G` and `Gstar` the deterministic
    /// right inverse of `H`, so the same generator always yields the same
    /// code.
    ///
    /// `G` must be a `w x k` matrix of rank `w` with `w < k`. A generator
    /// with zero rows is allowed and degenerates to the identity map (no
    /// secrecy; see [`CosetCode::is_degenerate`]).
    pub fn construct_from_generator(g: FieldMatrix) -> Result<Self> {
        let field = g.field();
        let w = g.rows();
        let k = g.cols();
        if w >= k {
            return Err(Error::InvalidParameter(format!(
                "need w < k, got w={w}, k={k}"
            )));
        }
        if g.rank() != w {
            return Err(Error::InvalidGenerator {
                expected: w,
                got: g.rank(),
            });
        }
        let h = g.nullspace_basis();
        let kp = k - w;
        debug_assert_eq!(h.rows(), kp);
        let mut gstar_rows = Vec::with_capacity(kp);
        for i in 0..kp {
            let mut e = vec![0u32; kp];
            e[i] = 1;
            let row = h
                .solve_particular(&e)?
                .ok_or_else(|| Error::InvalidCode("parity-check rows are dependent".into()))?;
            gstar_rows.push(row);
        }
        let gstar = FieldMatrix::from_rows(field, gstar_rows)?;
        Self::assemble(field, k, w, h, g, gstar)
    }

    /// Rebuild a code from explicit `H`, `G`, `Gstar`, re-validating every
    /// invariant. This is the loader path for descriptor files.
    pub fn from_parts(
        field: FieldSpec,
        k: usize,
        w: usize,
        h: FieldMatrix,
        g: FieldMatrix,
        gstar: FieldMatrix,
    ) -> Result<Self> {
        if w >= k {
            return Err(Error::InvalidParameter(format!(
                "need w < k, got w={w}, k={k}"
            )));
        }
        let kp = k - w;
        let shape_ok = h.rows() == kp
            && h.cols() == k
            && g.rows() == w
            && g.cols() == k
            && gstar.rows() == kp
            && gstar.cols() == k
            && h.field() == field
            && g.field() == field
            && gstar.field() == field;
        if !shape_ok {
            return Err(Error::InvalidCode("matrix shapes or fields disagree".into()));
        }
        if h.rank() != kp {
            return Err(Error::InvalidCode(format!(
                "H must have rank {kp}, got {}",
                h.rank()
            )));
        }
        if g.rank() != w {
            return Err(Error::InvalidCode(format!(
                "G must have rank {w}, got {}",
                g.rank()
            )));
        }
        if w > 0 && !h.mul(&g.transpose())?.is_zero() {
            return Err(Error::InvalidCode("H * G^T != 0".into()));
        }
        let hg = h.mul(&gstar.transpose())?;
        if hg != FieldMatrix::identity(field, kp) {
            return Err(Error::InvalidCode("H * Gstar^T != I".into()));
        }
        Self::assemble(field, k, w, h, g, gstar)
    }

    fn assemble(
        field: FieldSpec,
        k: usize,
        w: usize,
        h: FieldMatrix,
        g: FieldMatrix,
        gstar: FieldMatrix,
    ) -> Result<Self> {
        let stacked = FieldMatrix::stack_vertical(&[&gstar, &g])?;
        let enc = stacked.transpose();
        let dec = enc
            .invert()?
            .ok_or_else(|| Error::InvalidCode("[Gstar; G] is singular".into()))?;
        Ok(CosetCode {
            field,
            k,
            w,
            h,
            g,
            gstar,
            enc,
            dec,
        })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Codeword length (= message length; the map costs no rate).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Eavesdropper budget / dimension of the underlying code.
    pub fn w(&self) -> usize {
        self.w
    }

    /// Width of the coset index, `k - w`.
    pub fn coset_index_len(&self) -> usize {
        self.k - self.w
    }

    pub fn parity_check(&self) -> &FieldMatrix {
        &self.h
    }

    pub fn generator(&self) -> &FieldMatrix {
        &self.g
    }

    pub fn complement(&self) -> &FieldMatrix {
        &self.gstar
    }

    /// True when `w = 0`: the code is the identity map and offers no
    /// secrecy. Reports flag this case.
    pub fn is_degenerate(&self) -> bool {
        self.w == 0
    }

    /// Encode one column: `x = [Gstar; G]^T * m`. The syndrome `H*x` equals
    /// the first `k'` message entries.
    pub fn encode_column(&self, m: &[u32]) -> Result<Vec<u32>> {
        self.enc.mat_vec(m)
    }

    /// Decode one column. The map is a bijection: every vector of GF(q)^k
    /// decodes, and `decode(encode(m)) = m`.
    pub fn decode_column(&self, x: &[u32]) -> Result<Vec<u32>> {
        self.dec.mat_vec(x)
    }

    /// Decode by the syndrome route: the coset index is `H*x`, the member
    /// index the unique `r` with `G^T r = x - Gstar^T (H*x)`. Algebraically
    /// identical to [`CosetCode::decode_column`]; kept as an independent
    /// path for cross-checking.
    pub fn decode_column_by_syndrome(&self, x: &[u32]) -> Result<Vec<u32>> {
        let f = self.field;
        let syndrome = self.h.mat_vec(x)?;
        let shift = self.gstar.transpose().mat_vec(&syndrome)?;
        let residue: Vec<u32> = x.iter().zip(&shift).map(|(&a, &b)| f.sub(a, b)).collect();
        let r = self
            .g
            .transpose()
            .solve_particular(&residue)?
            .ok_or_else(|| Error::InvalidCode("residue not in the code".into()))?;
        let mut m = syndrome;
        m.extend_from_slice(&r);
        Ok(m)
    }

    /// Encode a whole message matrix column by column.
    pub fn encode_matrix(&self, m: &MessageMatrix) -> Result<CodewordMatrix> {
        if m.data.rows() != self.k || m.data.field() != self.field {
            return Err(Error::DimensionMismatch(format!(
                "message matrix is {}x{} over {}, code wants {} rows over {}",
                m.data.rows(),
                m.data.cols(),
                m.data.field(),
                self.k,
                self.field
            )));
        }
        let xt = m.data.transpose().mul(&self.enc.transpose())?;
        Ok(CodewordMatrix {
            source: m.source.clone(),
            data: xt.transpose(),
        })
    }

    /// Invert [`CosetCode::encode_matrix`].
    pub fn decode_matrix(&self, x: &CodewordMatrix) -> Result<MessageMatrix> {
        if x.data.rows() != self.k || x.data.field() != self.field {
            return Err(Error::DimensionMismatch(format!(
                "codeword matrix is {}x{} over {}, code wants {} rows over {}",
                x.data.rows(),
                x.data.cols(),
                x.data.field(),
                self.k,
                self.field
            )));
        }
        let mt = x.data.transpose().mul(&self.dec.transpose())?;
        Ok(MessageMatrix {
            source: x.source.clone(),
            data: mt.transpose(),
        })
    }

    /// Column-subset security check: true iff every `w`-subset of columns of
    /// `G` has full rank `w`. Costs `C(k, w)` rank computations.
    pub fn check_lemma2(&self) -> bool {
        if self.w == 0 {
            return true;
        }
        let mut ok = true;
        for_each_combination(self.k, self.w, |cols| {
            if ok && self.g.select_columns(cols).rank() != self.w {
                ok = false;
            }
        });
        ok
    }

    /// Serialize as a descriptor: field order, k, w, then `H`, `G`, `Gstar`
    /// in the matrix text format.
    pub fn to_descriptor(&self) -> String {
        format!(
            "coset-code v1\nq {}\nk {}\nw {}\nH\n{}G\n{}Gstar\n{}",
            self.field.order(),
            self.k,
            self.w,
            self.h.to_text(),
            self.g.to_text(),
            self.gstar.to_text(),
        )
    }

    /// Parse a descriptor and re-validate all invariants.
    pub fn from_descriptor(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let mut cursor = 0usize;
        let mut next_content = |lines: &[&str]| -> Option<(usize, String)> {
            while cursor < lines.len() {
                let line = lines[cursor].trim().to_string();
                cursor += 1;
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                return Some((cursor, line));
            }
            None
        };
        let (no, header) = next_content(&lines).ok_or(Error::Parse {
            line: 0,
            msg: "empty descriptor".into(),
        })?;
        if header != "coset-code v1" {
            return Err(Error::Parse {
                line: no,
                msg: format!("expected `coset-code v1`, found `{header}`"),
            });
        }
        let mut scalar = |key: &str| -> Result<u64> {
            let (no, line) = next_content(&lines).ok_or(Error::Parse {
                line: 0,
                msg: format!("missing `{key}`"),
            })?;
            line.strip_prefix(key)
                .map(str::trim)
                .and_then(|v| v.parse().ok())
                .ok_or(Error::Parse {
                    line: no,
                    msg: format!("bad `{key}` line: `{line}`"),
                })
        };
        let q = scalar("q")?;
        let k = scalar("k")? as usize;
        let w = scalar("w")? as usize;
        let field = FieldSpec::new(u32::try_from(q).map_err(|_| Error::UnsupportedFieldOrder(q))?)?;

        let mut read_block = |label: &str| -> Result<FieldMatrix> {
            let (no, line) = next_content(&lines).ok_or(Error::Parse {
                line: 0,
                msg: format!("missing `{label}` block"),
            })?;
            if line != label {
                return Err(Error::Parse {
                    line: no,
                    msg: format!("expected `{label}`, found `{line}`"),
                });
            }
            let (hno, header) = next_content(&lines).ok_or(Error::Parse {
                line: no,
                msg: format!("truncated `{label}` block"),
            })?;
            let rows: usize = header
                .split_whitespace()
                .nth(1)
                .and_then(|v| v.parse().ok())
                .ok_or(Error::Parse {
                    line: hno,
                    msg: format!("bad `{label}` matrix header"),
                })?;
            let mut chunk = header;
            for _ in 0..rows {
                let (_, row) = next_content(&lines).ok_or(Error::Parse {
                    line: hno,
                    msg: format!("truncated `{label}` block"),
                })?;
                chunk.push('\n');
                chunk.push_str(&row);
            }
            FieldMatrix::from_text(&chunk)
        };
        let h = read_block("H")?;
        let g = read_block("G")?;
        let gstar = read_block("Gstar")?;
        Self::from_parts(field, k, w, h, g, gstar)
    }
}

/// Smallest usable message count from the cut values:
/// `ceil(rho_sd / (rho_sd - rho_sz))`. Errors when the eavesdropper cut
/// reaches the source cut (no positive-rate secure code exists).
pub fn min_k_bound(rho_sd: u32, rho_sz: u32) -> Result<u32> {
    if rho_sz >= rho_sd {
        return Err(Error::InfeasibleRate { rho_sd, rho_sz });
    }
    Ok(rho_sd.div_ceil(rho_sd - rho_sz))
}

/// Search budget for [`search_code`].
#[derive(Debug, Clone, Copy)]
pub struct SearchBudget {
    /// Exhaust the full generator space when `q^(w*k)` is at most this.
    pub exhaustive_cap: u64,
    /// Otherwise, try this many random generators.
    pub random_trials: u64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            exhaustive_cap: 1 << 20,
            random_trials: 200_000,
            seed: 0,
        }
    }
}

/// Find a generator whose code passes [`CosetCode::check_lemma2`].
///
/// Enumerates all `q^(w*k)` generators in a fixed order when that fits the
/// budget (so the result is canonical), otherwise falls back to seeded
/// random trials. Returns `None` when the search exhausts its budget without
/// a passing generator.
pub fn search_code(
    k: usize,
    w: usize,
    field: FieldSpec,
    budget: &SearchBudget,
) -> Result<Option<CosetCode>> {
    if w >= k {
        return Err(Error::InvalidParameter(format!(
            "need w < k, got w={w}, k={k}"
        )));
    }
    if w == 0 {
        let g = FieldMatrix::zero(field, 0, k);
        return Ok(Some(CosetCode::construct_from_generator(g)?));
    }
    let q = field.order() as u128;
    let space = q.checked_pow((w * k) as u32);
    let try_generator = |entries: Vec<u32>| -> Result<Option<CosetCode>> {
        let g = FieldMatrix::from_flat(field, w, k, entries)?;
        if g.rank() != w {
            return Ok(None);
        }
        let code = CosetCode::construct_from_generator(g)?;
        if code.check_lemma2() {
            Ok(Some(code))
        } else {
            Ok(None)
        }
    };
    match space {
        Some(total) if total <= budget.exhaustive_cap as u128 => {
            // odometer over generator entries, first entry most significant
            let mut digits = vec![0u32; w * k];
            loop {
                if let Some(code) = try_generator(digits.clone())? {
                    return Ok(Some(code));
                }
                let mut i = digits.len();
                loop {
                    if i == 0 {
                        return Ok(None);
                    }
                    i -= 1;
                    digits[i] += 1;
                    if digits[i] < field.order() {
                        break;
                    }
                    digits[i] = 0;
                }
            }
        }
        _ => {
            let mut rng = substream(budget.seed, "code-search");
            for _ in 0..budget.random_trials {
                let entries: Vec<u32> =
                    (0..w * k).map(|_| field.random_element(&mut rng)).collect();
                if let Some(code) = try_generator(entries)? {
                    return Ok(Some(code));
                }
            }
            Ok(None)
        }
    }
}

/// Number of `w`-subsets the checker has to inspect for a `(k, w)` code.
pub fn lemma2_subset_count(k: usize, w: usize) -> u64 {
    binomial(k as u64, w as u64)
}

/// A source's stack of `k` messages, one per row, `c` symbols each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageMatrix {
    pub source: String,
    pub data: FieldMatrix,
}

impl MessageMatrix {
    pub fn new(source: impl Into<String>, data: FieldMatrix) -> Self {
        MessageMatrix {
            source: source.into(),
            data,
        }
    }

    pub fn random<R: Rng + ?Sized>(
        source: impl Into<String>,
        field: FieldSpec,
        k: usize,
        c: usize,
        rng: &mut R,
    ) -> Self {
        MessageMatrix {
            source: source.into(),
            data: FieldMatrix::random(field, k, c, rng),
        }
    }
}

/// The encoded counterpart of a [`MessageMatrix`]; same width, row count
/// equal to the code's output length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordMatrix {
    pub source: String,
    pub data: FieldMatrix,
}

impl CodewordMatrix {
    pub fn new(source: impl Into<String>, data: FieldMatrix) -> Self {
        CodewordMatrix {
            source: source.into(),
            data,
        }
    }
}
