//! Hopcroft-Karp maximum bipartite matching.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

const NIL: usize = usize::MAX;

/// Maximum matching of the bipartite graph with `left` vertices whose
/// neighbour lists (right vertices in `0..right`) are `adj`.
///
/// Returns `mate[l] = Some(r)` for each matched left vertex.
pub fn hopcroft_karp(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    let left = adj.len();
    let mut mate_l = vec![NIL; left];
    let mut mate_r = vec![NIL; right];
    let mut dist = vec![0usize; left];

    while bfs(adj, &mate_l, &mate_r, &mut dist) {
        for u in 0..left {
            if mate_l[u] == NIL {
                dfs(adj, u, &mut mate_l, &mut mate_r, &mut dist);
            }
        }
    }
    mate_l.into_iter().map(|r| (r != NIL).then_some(r)).collect()
}

fn bfs(adj: &[Vec<usize>], mate_l: &[usize], mate_r: &[usize], dist: &mut [usize]) -> bool {
    let mut queue = VecDeque::new();
    for (u, d) in dist.iter_mut().enumerate() {
        if mate_l[u] == NIL {
            *d = 0;
            queue.push_back(u);
        } else {
            *d = NIL;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &r in &adj[u] {
            let w = mate_r[r];
            if w == NIL {
                found = true;
            } else if dist[w] == NIL {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    found
}

fn dfs(adj: &[Vec<usize>], u: usize, mate_l: &mut [usize], mate_r: &mut [usize], dist: &mut [usize]) -> bool {
    for &r in &adj[u] {
        let w = mate_r[r];
        if w == NIL || (dist[w] == dist[u] + 1 && dfs(adj, w, mate_l, mate_r, dist)) {
            mate_l[u] = r;
            mate_r[r] = u;
            return true;
        }
    }
    dist[u] = NIL;
    false
}

/// A perfect matching of an `n x n` bipartite graph, as a left-to-right image.
pub fn perfect_matching(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    hopcroft_karp(adj, n).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_max(adj: &[Vec<usize>], right: usize) -> usize {
        fn go(adj: &[Vec<usize>], u: usize, used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(adj, u + 1, used);
            for &r in &adj[u] {
                if !used[r] {
                    used[r] = true;
                    best = best.max(1 + go(adj, u + 1, used));
                    used[r] = false;
                }
            }
            best
        }
        go(adj, 0, &mut vec![false; right])
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let mut rng = crate::rng::SplitMix64::new(3);
        for _ in 0..300 {
            let l = 1 + rng.index(6);
            let r = 1 + rng.index(6);
            let adj: Vec<Vec<usize>> = (0..l)
                .map(|_| (0..r).filter(|_| rng.below(3) == 0).collect())
                .collect();
            let m = hopcroft_karp(&adj, r);
            let size = m.iter().flatten().count();
            assert_eq!(size, brute_max(&adj, r));
            let mut seen = vec![false; r];
            for (u, v) in m.iter().enumerate() {
                if let Some(v) = *v {
                    assert!(adj[u].contains(&v));
                    assert!(!seen[v]);
                    seen[v] = true;
                }
            }
        }
    }

    #[test]
    fn no_perfect_matching_when_hall_fails() {
        let adj = vec![vec![0], vec![0], vec![1, 2]];
        assert!(perfect_matching(&adj).is_none());
        let adj = vec![vec![1], vec![0, 2], vec![0]];
        assert_eq!(perfect_matching(&adj), Some(vec![1, 2, 0]));
    }
}
