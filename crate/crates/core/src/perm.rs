//! Permutations of 0..n in one-line form: `p[i]` is the image of `i`.

pub type Perm = Vec<usize>;

pub fn identity(n: usize) -> Perm {
    (0..n).collect()
}

/// `a ∘ b`: apply `b` first.
pub fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&x| a[x]).collect()
}

pub fn inverse(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

pub fn is_identity(p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

/// All permutations of 0..n in lexicographic order.
pub fn all(n: usize) -> Vec<Perm> {
    use itertools::Itertools;
    (0..n).permutations(n).collect()
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}
