//! Independent oracles shared by the integration tests. Nothing here calls
//! into the arithmetic or elimination code under test.

#![allow(dead_code)]

use ncpt::simnet::NetworkGraph;
use rand::Rng;

/// Shift-and-add multiplication modulo x^8 + x^4 + x^3 + x + 1.
pub fn peasant_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= 0x1B;
        }
        b >>= 1;
    }
    p
}

/// Inverse by exhaustive search.
pub fn brute_inv(a: u8) -> Option<u8> {
    (1..=255u8).find(|&c| peasant_mul(a, c) == 1)
}

/// Rank over GF(2^8) by plain row reduction on bytes.
pub fn rank_oracle(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = brute_inv(m[rank][c]).unwrap();
        for x in m[rank].iter_mut() {
            *x = peasant_mul(*x, inv);
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                let pivot = m[rank].clone();
                for (x, &p) in m[r].iter_mut().zip(&pivot) {
                    *x ^= peasant_mul(f, p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `matrix * natives` computed entry by entry.
pub fn matmul_oracle(matrix: &[Vec<u8>], natives: &[Vec<u8>]) -> Vec<Vec<u8>> {
    let n = natives.first().map_or(0, Vec::len);
    matrix
        .iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(natives).fold(0u8, |acc, (&g, x)| acc ^ peasant_mul(g, x[j])))
                .collect()
        })
        .collect()
}

/// Min s-d cut by enumerating every node set that contains `s` but not `d`.
pub fn brute_min_cut(n: usize, edges: &[(usize, usize, u32)], s: usize, d: usize) -> u64 {
    let others: Vec<usize> = (0..n).filter(|&v| v != s && v != d).collect();
    let mut best = u64::MAX;
    for mask in 0u32..(1 << others.len()) {
        let mut side = vec![false; n];
        side[s] = true;
        for (i, &v) in others.iter().enumerate() {
            if mask >> i & 1 == 1 {
                side[v] = true;
            }
        }
        let cut: u64 = edges
            .iter()
            .filter(|&&(u, v, _)| side[u] && !side[v])
            .map(|&(_, _, c)| c as u64)
            .sum();
        best = best.min(cut);
    }
    best
}

/// Random digraph on 2..=8 nodes with capacities in 0..=3.
pub fn random_graph<R: Rng>(rng: &mut R) -> (usize, Vec<(usize, usize, u32)>) {
    let n = rng.gen_range(2..=8);
    let density = rng.gen_range(0.15..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                edges.push((u, v, rng.gen_range(0..=3)));
            }
        }
    }
    (n, edges)
}

pub fn build(n: usize, edges: &[(usize, usize, u32)]) -> NetworkGraph {
    let mut g = NetworkGraph::new(n);
    for &(u, v, c) in edges {
        g.add_edge(u, v, c);
    }
    g
}
