//! Structural checks shared by the transform tests and the acceptance suite.

use crate::corpus::Sentence;

/// Every chunk's subtree occupies a contiguous span.
pub fn descendants_contiguous(s: &Sentence) -> bool {
    (0..s.len()).all(|i| {
        let sub = s.subtree(i);
        match (sub.first(), sub.last()) {
            (Some(lo), Some(hi)) => hi - lo + 1 == sub.len(),
            _ => false,
        }
    })
}

pub fn root_is_final(s: &Sentence) -> bool {
    !s.is_empty() && s.root() == s.len() - 1
}

fn sorted_surfaces(s: &Sentence) -> Vec<String> {
    let mut v = s.chunk_surfaces();
    v.sort();
    v
}

pub fn same_chunk_multiset(a: &Sentence, b: &Sentence) -> bool {
    sorted_surfaces(a) == sorted_surfaces(b)
}

/// Chunk multisets agree except for at most one chunk per side whose
/// particle was rewritten; those two must agree once particles are stripped.
pub fn same_chunks_up_to_one_rewrite(a: &Sentence, b: &Sentence) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut only_b: Vec<&crate::corpus::Chunk> = b.chunks.iter().collect();
    let mut only_a = Vec::new();
    for ca in &a.chunks {
        let surface = ca.surface();
        match only_b.iter().position(|cb| cb.surface() == surface) {
            Some(pos) => {
                only_b.swap_remove(pos);
            }
            None => only_a.push(ca),
        }
    }
    match (only_a.as_slice(), only_b.as_slice()) {
        ([], []) => true,
        ([x], [y]) => x.content_surface() == y.content_surface(),
        _ => false,
    }
}

/// Sorted (chunk surface, head surface) pairs: the dependency structure
/// independent of linear positions.
pub fn dependency_pairs(s: &Sentence) -> Vec<(String, Option<String>)> {
    let mut pairs: Vec<_> = s
        .chunks
        .iter()
        .map(|c| (c.surface(), c.head.map(|h| s.chunks[h].surface())))
        .collect();
    pairs.sort();
    pairs
}
