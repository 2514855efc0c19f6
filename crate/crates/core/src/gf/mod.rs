//! Finite-field scalar arithmetic over GF(q) for prime q and GF(2^m).
//!
//! Elements are canonical integers in `[0, q)`. For GF(2^m) the integer is
//! the coefficient bit pattern of the polynomial representation, and products
//! are reduced by a fixed irreducible polynomial per `m` (see
//! [`BINARY_POLYS`]), so every derived matrix and codebook is bit-identical
//! across runs and platforms.

mod matrix;

pub use matrix::FieldMatrix;

use crate::error::{Error, Result};
use rand::Rng;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Irreducible polynomials for GF(2^m), m = 2..=16, as bit patterns including
/// the x^m term. These are the usual low-weight choices (x^2+x+1, x^3+x+1,
/// x^4+x+1, x^5+x^2+1, x^6+x+1, x^7+x+1, x^8+x^4+x^3+x+1, ...); the test
/// suite re-verifies irreducibility of each entry.
pub const BINARY_POLYS: [(u32, u32); 15] = [
    (2, 0x7),
    (3, 0xB),
    (4, 0x13),
    (5, 0x25),
    (6, 0x43),
    (7, 0x83),
    (8, 0x11B),
    (9, 0x203),
    (10, 0x409),
    (11, 0x805),
    (12, 0x1009),
    (13, 0x201B),
    (14, 0x4021),
    (15, 0x8003),
    (16, 0x1002B),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum FieldKind {
    Prime,
    /// GF(2^m) with the reduction polynomial as a bit pattern.
    Binary { m: u32, poly: u32 },
}

/// A field order plus the data needed to carry out arithmetic in it.
///
/// `FieldSpec` is a small copyable value; matrices and codes embed one and
/// all operations on elements go through it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    q: u32,
    kind: FieldKind,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Field of order `q`. Supported orders are primes and powers of two,
    /// with `2 <= q <= 2^16`.
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 || q > MAX_ORDER {
            return Err(Error::UnsupportedFieldOrder(q as u64));
        }
        if q.is_power_of_two() && q > 2 {
            let m = q.trailing_zeros();
            let poly = BINARY_POLYS
                .iter()
                .find(|(deg, _)| *deg == m)
                .map(|(_, p)| *p)
                .ok_or(Error::UnsupportedFieldOrder(q as u64))?;
            return Ok(FieldSpec {
                q,
                kind: FieldKind::Binary { m, poly },
            });
        }
        if is_prime(q) {
            return Ok(FieldSpec {
                q,
                kind: FieldKind::Prime,
            });
        }
        Err(Error::UnsupportedFieldOrder(q as u64))
    }

    /// GF(2), the most common case.
    pub fn binary() -> Self {
        FieldSpec {
            q: 2,
            kind: FieldKind::Prime,
        }
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// log2(q), exact for binary extension fields and GF(2).
    pub fn bits_per_symbol(&self) -> f64 {
        (self.q as f64).log2()
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.q
    }

    pub fn check(&self, a: u32) -> Result<u32> {
        if a < self.q {
            Ok(a)
        } else {
            Err(Error::ElementOutOfRange { value: a, q: self.q })
        }
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.q && b < self.q);
        match self.kind {
            FieldKind::Prime => {
                let s = a as u64 + b as u64;
                (s % self.q as u64) as u32
            }
            FieldKind::Binary { .. } => a ^ b,
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        debug_assert!(a < self.q);
        match self.kind {
            FieldKind::Prime => {
                if a == 0 {
                    0
                } else {
                    self.q - a
                }
            }
            FieldKind::Binary { .. } => a,
        }
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a < self.q && b < self.q);
        match self.kind {
            FieldKind::Prime => ((a as u64 * b as u64) % self.q as u64) as u32,
            FieldKind::Binary { m, .. } => {
                if a == 0 || b == 0 {
                    return 0;
                }
                let t = binary_tables(m);
                let span = self.q - 1;
                let idx = t.log[a as usize] as u32 + t.log[b as usize] as u32;
                t.exp[if idx >= span { idx - span } else { idx } as usize] as u32
            }
        }
    }

    /// Product by shift-and-xor reduction; the reference the log/exp tables
    /// are built from and tested against.
    fn mul_carryless(&self, a: u32, b: u32) -> u32 {
        let FieldKind::Binary { m, poly } = self.kind else {
            unreachable!("carry-less product only exists for binary fields");
        };
        let mut acc: u64 = 0;
        let mut x = a as u64;
        let mut y = b;
        while y != 0 {
            if y & 1 == 1 {
                acc ^= x;
            }
            x <<= 1;
            y >>= 1;
        }
        let poly = poly as u64;
        while acc >> m != 0 {
            let deg = 63 - acc.leading_zeros();
            acc ^= poly << (deg - m);
        }
        acc as u32
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        debug_assert!(a < self.q);
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match self.kind {
            // a^(q-2)
            FieldKind::Prime => Some(self.pow(a, self.q as u64 - 2)),
            FieldKind::Binary { m, .. } => {
                let t = binary_tables(m);
                let span = (self.q - 1) as usize;
                Some(t.exp[(span - t.log[a as usize] as usize) % span] as u32)
            }
        }
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// Uniform element in `[0, q)`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(0..self.q)
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

/// Discrete log/antilog tables for GF(2^m), built once per `m` on first
/// use from the carry-less reference product. Entries fit in u16 because
/// the largest supported field is GF(2^16).
struct BinaryTables {
    log: Vec<u16>,
    exp: Vec<u16>,
}

fn binary_tables(m: u32) -> &'static BinaryTables {
    static TABLES: [std::sync::OnceLock<BinaryTables>; 15] =
        [const { std::sync::OnceLock::new() }; 15];
    TABLES[(m - 2) as usize].get_or_init(|| {
        let field = FieldSpec::new(1 << m).expect("table polynomials cover m = 2..=16");
        let q = field.q;
        // find a multiplicative generator by trial: its powers must visit
        // every nonzero element exactly once
        'candidate: for g in 2..q {
            let mut exp = vec![0u16; (q - 1) as usize];
            let mut cur = 1u32;
            for e in exp.iter_mut() {
                *e = cur as u16;
                cur = field.mul_carryless(cur, g);
            }
            let mut log = vec![0u16; q as usize];
            let mut seen = vec![false; q as usize];
            for (i, &v) in exp.iter().enumerate() {
                if seen[v as usize] {
                    continue 'candidate;
                }
                seen[v as usize] = true;
                log[v as usize] = i as u16;
            }
            return BinaryTables { log, exp };
        }
        unreachable!("every finite field has a multiplicative generator")
    })
}
