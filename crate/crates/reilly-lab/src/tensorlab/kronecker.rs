//! Generalized Kronecker deltas and the subset/permutation enumeration
//! that drives every oracle sum in this crate.

use crate::error::{arg, Result};

/// Generalized Kronecker delta `δ^{upper}_{lower}`.
///
/// Returns the sign of the permutation carrying `lower` onto `upper`, or 0
/// when either list repeats an index or the two index sets differ.
pub fn gen_kronecker(upper: &[usize], lower: &[usize]) -> Result<i32> {
    if upper.len() != lower.len() {
        return arg(format!(
            "index lists of different length ({} vs {})",
            upper.len(),
            lower.len()
        ));
    }
    Ok(kronecker_unchecked(upper, lower))
}

pub(crate) fn kronecker_unchecked(upper: &[usize], lower: &[usize]) -> i32 {
    let m = upper.len();
    let mut perm = Vec::with_capacity(m);
    for (a, &u) in upper.iter().enumerate() {
        if upper[..a].contains(&u) {
            return 0;
        }
        match lower.iter().position(|&l| l == u) {
            Some(pos) => perm.push(pos),
            None => return 0,
        }
    }
    let mut seen = vec![false; m];
    for &p in &perm {
        if seen[p] {
            return 0;
        }
        seen[p] = true;
    }
    permutation_sign(&perm)
}

/// Sign of a permutation of `0..m` given in one-line notation.
pub(crate) fn permutation_sign(perm: &[usize]) -> i32 {
    let mut visited = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !visited[j] {
            visited[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// All strictly increasing `m`-subsets of `0..n`.
pub(crate) fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - m + i {
                cur[i] += 1;
                for j in i + 1..m {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Permutations of `0..m` in lexicographic order, each with its sign.
pub(crate) fn signed_permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        out.push((perm.clone(), permutation_sign(&perm) as f64));
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return out;
        };
        let j = (i + 1..m).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// Visits every nonzero term of a full Kronecker sum of length `m` in
/// dimension `n`: each call receives `(upper, lower, δ^{upper}_{lower})`.
pub(crate) fn for_each_delta_term(n: usize, m: usize, mut f: impl FnMut(&[usize], &[usize], f64)) {
    let perms = signed_permutations(m);
    let mut up = vec![0usize; m];
    let mut lo = vec![0usize; m];
    for set in subsets(n, m) {
        for (ps, ss) in &perms {
            for (a, &pa) in ps.iter().enumerate() {
                up[a] = set[pa];
            }
            for (pt, st) in &perms {
                for (a, &pa) in pt.iter().enumerate() {
                    lo[a] = set[pa];
                }
                f(&up, &lo, ss * st);
            }
        }
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Binomial coefficient as an exact integer.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Falling factorial ratio `a!/b!` for `a ≥ b`.
pub(crate) fn factorial_ratio(a: usize, b: usize) -> f64 {
    debug_assert!(a >= b);
    (b + 1..=a).map(|i| i as f64).product()
}
