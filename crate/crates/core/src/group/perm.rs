//! Permutations in one-line notation over `0..n`.
//!
//! `p[i]` is the image of point `i`. Composition acts on positions of an
//! arrangement: applying `a` and then `b` rearranges `x` into `x[a[b[i]]]`,
//! so the product `a ⊙ b` is the one-line permutation `i ↦ a[b[i]]`. With this
//! convention `(12) ⊙ (13) = (132)` and `(12) ⊙ (123) = (23)`.

pub(crate) type Perm = Vec<u8>;

pub(crate) fn compose(a: &[u8], b: &[u8]) -> Perm {
    b.iter().map(|&bi| a[bi as usize]).collect()
}

pub(crate) fn is_even(p: &[u8]) -> bool {
    let mut seen = vec![false; p.len()];
    let mut transpositions = 0usize;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i] as usize;
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 0
}

/// All permutations of `0..n` in lexicographic order of one-line notation.
pub(crate) fn all_lexicographic(n: usize) -> Vec<Perm> {
    let mut current: Perm = (0..n as u8).collect();
    let mut out = vec![current.clone()];
    // Standard next-permutation walk.
    loop {
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let pivot = i - 1;
        let j = (pivot + 1..n).rev().find(|&j| current[j] > current[pivot]).unwrap();
        current.swap(pivot, j);
        current[i..].reverse();
        out.push(current.clone());
    }
    out
}

/// Cycle notation with 1-based points, `e` for the identity. Points are
/// comma-separated once they no longer fit in one digit.
pub(crate) fn cycle_label(p: &[u8]) -> String {
    let wide = p.len() > 9;
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] as usize == start {
            continue;
        }
        let mut points = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            points.push((i + 1).to_string());
            i = p[i] as usize;
        }
        out.push('(');
        out.push_str(&points.join(if wide { "," } else { "" }));
        out.push(')');
    }
    if out.is_empty() {
        out.push('e');
    }
    out
}

pub(crate) fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k))
}
