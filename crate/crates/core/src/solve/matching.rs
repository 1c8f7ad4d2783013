//! Maximum bipartite matching (Hopcroft–Karp) and the König vertex cover
//! read off its final alternating layering.

use std::collections::VecDeque;

use crate::order::PrecedenceRelation;

/// A bipartite graph whose left vertices enumerate their neighbours through
/// a cursor, so adjacency can be stored or computed on demand.
pub trait Bipartite {
    fn left_len(&self) -> usize;
    fn right_len(&self) -> usize;
    /// First neighbour of `left` at or after `cursor`, with the cursor to
    /// resume from.
    fn next_edge(&self, left: usize, cursor: usize) -> Option<(usize, usize)>;
}

/// Plain adjacency lists.
#[derive(Clone, Debug)]
pub struct AdjacencyLists {
    pub right_len: usize,
    pub adj: Vec<Vec<usize>>,
}

impl Bipartite for AdjacencyLists {
    fn left_len(&self) -> usize {
        self.adj.len()
    }

    fn right_len(&self) -> usize {
        self.right_len
    }

    fn next_edge(&self, left: usize, cursor: usize) -> Option<(usize, usize)> {
        self.adj[left].get(cursor).map(|&r| (r, cursor + 1))
    }
}

/// Left copy `i` is joined to right copy `j` iff member `i` precedes `j`.
impl Bipartite for PrecedenceRelation {
    fn left_len(&self) -> usize {
        self.len()
    }

    fn right_len(&self) -> usize {
        self.len()
    }

    fn next_edge(&self, left: usize, cursor: usize) -> Option<(usize, usize)> {
        self.next_successor(left, cursor).map(|j| (j, j + 1))
    }
}

const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub size: usize,
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    /// Left vertices reachable from an unmatched left vertex by an
    /// alternating path in the final layering.
    pub left_reached: Vec<bool>,
    /// Right vertices adjacent to a reached left vertex.
    pub right_reached: Vec<bool>,
}

impl Matching {
    /// König cover: unreached left vertices plus reached right vertices.
    /// Its size equals the matching size.
    pub fn vertex_cover(&self) -> (Vec<usize>, Vec<usize>) {
        let left = (0..self.left_reached.len())
            .filter(|&u| !self.left_reached[u])
            .collect();
        let right = (0..self.right_reached.len())
            .filter(|&v| self.right_reached[v])
            .collect();
        (left, right)
    }
}

/// Computes a maximum matching in O(E √V) phases of breadth-first layering
/// followed by layered augmentation.
pub fn hopcroft_karp<G: Bipartite + ?Sized>(graph: &G) -> Matching {
    let (nl, nr) = (graph.left_len(), graph.right_len());
    let mut l2r: Vec<Option<usize>> = vec![None; nl];
    let mut r2l: Vec<Option<usize>> = vec![None; nr];
    let mut dist = vec![UNREACHED; nl];
    let mut cursor = vec![0usize; nl];
    let mut size = 0;

    loop {
        let limit = layer(graph, &l2r, &r2l, &mut dist);
        if limit == UNREACHED {
            break;
        }
        cursor.iter_mut().for_each(|c| *c = 0);
        for root in 0..nl {
            if l2r[root].is_none()
                && dist[root] == 0
                && augment(graph, root, limit, &mut dist, &mut cursor, &mut l2r, &mut r2l)
            {
                size += 1;
            }
        }
    }

    // `dist` now holds the full alternating reachability from free left
    // vertices, since the last layering found no free right vertex.
    let left_reached: Vec<bool> = dist.iter().map(|&d| d != UNREACHED).collect();
    let mut right_reached = vec![false; nr];
    for u in (0..nl).filter(|&u| left_reached[u]) {
        let mut c = 0;
        while let Some((v, next)) = graph.next_edge(u, c) {
            right_reached[v] = true;
            c = next;
        }
    }

    Matching {
        size,
        left_to_right: l2r,
        right_to_left: r2l,
        left_reached,
        right_reached,
    }
}

/// Breadth-first layering from all free left vertices. Returns the layer of
/// the shallowest left vertex adjacent to a free right vertex.
fn layer<G: Bipartite + ?Sized>(
    graph: &G,
    l2r: &[Option<usize>],
    r2l: &[Option<usize>],
    dist: &mut [u32],
) -> u32 {
    let mut queue = VecDeque::new();
    for (u, d) in dist.iter_mut().enumerate() {
        if l2r[u].is_none() {
            *d = 0;
            queue.push_back(u);
        } else {
            *d = UNREACHED;
        }
    }
    let mut limit = UNREACHED;
    while let Some(u) = queue.pop_front() {
        if dist[u] >= limit {
            continue;
        }
        let mut c = 0;
        while let Some((v, next)) = graph.next_edge(u, c) {
            c = next;
            match r2l[v] {
                None => limit = limit.min(dist[u]),
                Some(w) if dist[w] == UNREACHED => {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
                Some(_) => {}
            }
        }
    }
    limit
}

/// Iterative search for one augmenting path along the layering, flipping it
/// when found. Dead-end vertices are removed from the layering.
fn augment<G: Bipartite + ?Sized>(
    graph: &G,
    root: usize,
    limit: u32,
    dist: &mut [u32],
    cursor: &mut [usize],
    l2r: &mut [Option<usize>],
    r2l: &mut [Option<usize>],
) -> bool {
    let mut stack = vec![root];
    // via[k] is the right vertex joining stack[k] to stack[k + 1].
    let mut via: Vec<usize> = Vec::new();
    while let Some(&u) = stack.last() {
        let Some((v, next)) = graph.next_edge(u, cursor[u]) else {
            dist[u] = UNREACHED;
            stack.pop();
            via.pop();
            continue;
        };
        cursor[u] = next;
        match r2l[v] {
            None if dist[u] == limit => {
                via.push(v);
                for (&l, &r) in stack.iter().zip(&via) {
                    l2r[l] = Some(r);
                    r2l[r] = Some(l);
                }
                return true;
            }
            Some(w) if dist[w] != UNREACHED && dist[w] == dist[u] + 1 && dist[w] <= limit => {
                via.push(v);
                stack.push(w);
            }
            _ => {}
        }
    }
    false
}
