//! Hopcroft-Karp maximum bipartite matching.
//!
//! The condition-3 checker reduces "z distinct edges paired with z distinct
//! missing colors" to a matching of size z, so an early-stop bound lets the
//! search quit as soon as the target size is reached.

use std::collections::VecDeque;

const UNMATCHED: usize = usize::MAX;

/// Maximum matching size in the bipartite graph where `adj[l]` lists the
/// right-side neighbors of left vertex `l`. If `stop_at` is given, the
/// search returns as soon as the matching reaches that size.
pub fn max_matching(adj: &[Vec<usize>], right_count: usize, stop_at: Option<usize>) -> usize {
    let left_count = adj.len();
    let mut match_left = vec![UNMATCHED; left_count];
    let mut match_right = vec![UNMATCHED; right_count];
    let mut size = 0;

    if let Some(target) = stop_at {
        if target == 0 {
            return 0;
        }
    }

    let mut dist = vec![0usize; left_count];
    loop {
        // BFS from free left vertices builds the layer structure.
        let mut queue = VecDeque::new();
        for l in 0..left_count {
            if match_left[l] == UNMATCHED {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = UNMATCHED;
            }
        }
        let mut found_augmenting = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                match match_right[r] {
                    UNMATCHED => found_augmenting = true,
                    l2 => {
                        if dist[l2] == UNMATCHED {
                            dist[l2] = dist[l] + 1;
                            queue.push_back(l2);
                        }
                    }
                }
            }
        }
        if !found_augmenting {
            return size;
        }
        for l in 0..left_count {
            if match_left[l] == UNMATCHED
                && augment(adj, &mut match_left, &mut match_right, &mut dist, l)
            {
                size += 1;
                if let Some(target) = stop_at {
                    if size >= target {
                        return size;
                    }
                }
            }
        }
    }
}

fn augment(
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    l: usize,
) -> bool {
    let d = std::mem::replace(&mut dist[l], UNMATCHED);
    for &r in &adj[l] {
        let ok = match match_right[r] {
            UNMATCHED => true,
            l2 => dist[l2] == d + 1 && augment(adj, match_left, match_right, dist, l2),
        };
        if ok {
            match_left[l] = r;
            match_right[r] = l;
            return true;
        }
    }
    false
}
