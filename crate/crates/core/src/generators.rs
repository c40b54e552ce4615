//! Small network generators for tests and experiments: ring, star, path,
//! complete, Erdos-Renyi and random regular graphs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::network::{build_network, Network};

pub fn path(n: usize) -> Network {
    let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)).collect();
    build_network(&edges, n, true).expect("path edges are valid")
}

pub fn ring(n: usize) -> Network {
    assert!(n >= 3);
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    build_network(&edges, n, true).expect("ring edges are valid")
}

/// Star with the center at node 0.
pub fn star(n: usize) -> Network {
    assert!(n >= 2);
    let edges: Vec<_> = (1..n).map(|i| (0, i, 1.0)).collect();
    build_network(&edges, n, true).expect("star edges are valid")
}

pub fn complete(n: usize) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, 1.0));
        }
    }
    build_network(&edges, n, true).expect("complete edges are valid")
}

/// Undirected G(n, p).
pub fn erdos_renyi(n: usize, p: f64, rng: &mut impl Rng) -> Network {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    build_network(&edges, n, true).expect("sampled edges are valid")
}

/// Random k-regular undirected graph by the pairing model with rejection
/// of self-loops and multi-edges. Requires n*k even and k < n.
pub fn random_regular(n: usize, k: usize, rng: &mut impl Rng) -> Option<Network> {
    if k >= n || (n * k) % 2 != 0 {
        return None;
    }
    'attempt: for _ in 0..500 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat(i).take(k)).collect();
        stubs.shuffle(rng);
        let mut seen = std::collections::HashSet::new();
        let mut edges = Vec::with_capacity(n * k / 2);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b {
                continue 'attempt;
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                continue 'attempt;
            }
            edges.push((key.0, key.1, 1.0));
        }
        return Some(build_network(&edges, n, true).expect("matched edges are valid"));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basic_shapes() {
        let p = path(4);
        assert_eq!(p.k_in(0), 1);
        assert_eq!(p.k_in(1), 2);
        let r = ring(5);
        assert!((0..5).all(|i| r.k_in(i) == 2));
        let s = star(6);
        assert_eq!(s.k_out(0), 5);
        assert!((1..6).all(|i| s.k_in(i) == 1));
        let c = complete(5);
        assert!((0..5).all(|i| c.k_in(i) == 4));
    }

    #[test]
    fn erdos_renyi_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let na = erdos_renyi(12, 0.3, &mut a);
        let nb = erdos_renyi(12, 0.3, &mut b);
        assert_eq!(na, nb);
    }

    #[test]
    fn random_regular_has_uniform_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(n, k) in &[(10, 3), (16, 4), (9, 2)] {
            let net = random_regular(n, k, &mut rng).expect("should find a matching");
            for i in 0..n {
                assert_eq!(net.k_in(i), k, "n={n}, k={k}, node {i}");
                assert_eq!(net.k_out(i), k);
            }
        }
        assert!(random_regular(5, 3, &mut rng).is_none()); // odd stub count
        assert!(random_regular(4, 4, &mut rng).is_none()); // k >= n
    }
}
