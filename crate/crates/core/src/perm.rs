use alloc::vec::Vec;

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::new();
    loop {
        out.push(current.clone());
        if !next_permutation(&mut current) {
            return out;
        }
    }
}

fn next_permutation(p: &mut [u8]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p.iter().rposition(|&x| x > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub(crate) fn is_permutation(p: &[u8]) -> bool {
    let mut seen = alloc::vec![false; p.len()];
    p.iter().all(|&x| {
        let x = x as usize;
        x < seen.len() && !core::mem::replace(&mut seen[x], true)
    })
}

pub(crate) fn invert(p: &[u8]) -> Vec<u8> {
    let mut inv = alloc::vec![0u8; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x as usize] = i as u8;
    }
    inv
}

/// `outer ∘ inner`: index `i` goes to `outer[inner[i]]`.
pub(crate) fn compose(outer: &[u8], inner: &[u8]) -> Vec<u8> {
    inner.iter().map(|&i| outer[i as usize]).collect()
}
