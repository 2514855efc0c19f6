//! Small shared helpers: seed derivation for named substreams and
//! lexicographic combination enumeration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a over the label bytes, used to key substreams.
fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Derive a child seed from a base seed and a label. Every component of an
/// experiment (codebook, network, gossip, adversary, per-trial streams) pulls
/// its randomness from its own named substream so runs replay component by
/// component.
pub fn subseed(seed: u64, label: &str) -> u64 {
    // splitmix64 finalizer over the xor of seed and label hash
    let mut z = seed ^ fnv1a(label).rotate_left(17);
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seeded generator for the named substream.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed(seed, label))
}

/// Visit size-`r` subsets of `0..n` in lexicographic order until the
/// visitor returns `false`.
pub fn for_each_combination_while<F: FnMut(&[usize]) -> bool>(n: usize, r: usize, mut f: F) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // advance to the next combination
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Visit every size-`r` subset of `0..n` in lexicographic order.
pub fn for_each_combination<F: FnMut(&[usize])>(n: usize, r: usize, mut f: F) {
    for_each_combination_while(n, r, |c| {
        f(c);
        true
    });
}

/// All size-`r` subsets of `0..n`, materialized in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_combination(n, r, |c| out.push(c.to_vec()));
    out
}

/// Binomial coefficient, saturating at `u64::MAX`.
pub fn binomial(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_lexicographic() {
        let cs = combinations(4, 2);
        assert_eq!(
            cs,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(2, 3), Vec::<Vec<usize>>::new());
        assert_eq!(binomial(20, 10), 184756);
    }

    #[test]
    fn subseed_is_label_sensitive() {
        assert_ne!(subseed(7, "network"), subseed(7, "gossip"));
        assert_ne!(subseed(7, "network"), subseed(8, "network"));
        assert_eq!(subseed(7, "network"), subseed(7, "network"));
    }
}
