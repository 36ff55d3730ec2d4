//! Generators for randomized test corpora: random valid cell complexes
//! (simplicial builds plus stacked-frame builds, so quads and prisms get
//! exercised) and random vertex filters. Used by the property suites, the
//! acceptance harness, and the benchmarks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::cellcomplex::{CellComplex, CellId};
use crate::complexbuild::{build_stacked_complex, LandmarkFrame};
use crate::filtration::{FilterFunction, FilterLabel};

/// A random simplicial complex of dimension <= 3 with at most roughly
/// `max_cells` cells: random vertices and edges, triangles filled where all
/// three edges exist, solid tetrahedra where all four faces exist.
pub fn random_simplicial_complex(rng: &mut ChaCha8Rng, max_cells: usize) -> CellComplex {
    let n = rng.gen_range(3..=12.min(max_cells.max(4)));
    let mut complex = CellComplex::new();
    let vertices: Vec<CellId> = (0..n).map(|_| complex.add_vertex()).collect();

    let edge_prob = rng.gen_range(0.25..0.85);
    let mut edge_ids = std::collections::BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) && complex.num_cells() < max_cells {
                let id = complex
                    .add_cell(1, &[vertices[i], vertices[j]])
                    .expect("vertices exist");
                edge_ids.insert([i, j], id);
            }
        }
    }

    let tri_prob = rng.gen_range(0.3..0.95);
    let mut tri_ids = std::collections::BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let all_edges = edge_ids.contains_key(&[i, j])
                    && edge_ids.contains_key(&[i, k])
                    && edge_ids.contains_key(&[j, k]);
                if all_edges && rng.gen_bool(tri_prob) && complex.num_cells() < max_cells {
                    let id = complex
                        .add_cell(
                            2,
                            &[edge_ids[&[i, j]], edge_ids[&[i, k]], edge_ids[&[j, k]]],
                        )
                        .expect("edges exist");
                    tri_ids.insert([i, j, k], id);
                }
            }
        }
    }

    let tet_prob = rng.gen_range(0.3..0.9);
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let all_faces = tri_ids.contains_key(&[i, j, k])
                        && tri_ids.contains_key(&[i, j, l])
                        && tri_ids.contains_key(&[i, k, l])
                        && tri_ids.contains_key(&[j, k, l]);
                    if all_faces && rng.gen_bool(tet_prob) && complex.num_cells() < max_cells {
                        complex
                            .add_cell(
                                3,
                                &[
                                    tri_ids[&[i, j, k]],
                                    tri_ids[&[i, j, l]],
                                    tri_ids[&[i, k, l]],
                                    tri_ids[&[j, k, l]],
                                ],
                            )
                            .expect("faces exist");
                    }
                }
            }
        }
    }
    complex
}

/// A small random landmark sequence; frames share a base cloud with
/// per-frame jitter, so consecutive triangulations overlap but are not
/// always identical.
pub fn random_frames(rng: &mut ChaCha8Rng, max_points: usize, max_frames: usize) -> Vec<LandmarkFrame> {
    let points = rng.gen_range(4..=max_points.max(5));
    let frames = rng.gen_range(1..=max_frames.max(1));
    let base: Vec<[f64; 2]> = (0..points)
        .map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)])
        .collect();
    (0..frames)
        .map(|f| LandmarkFrame {
            points: base
                .iter()
                .map(|p| {
                    [
                        p[0] + rng.gen_range(-3.0..3.0),
                        p[1] + rng.gen_range(-3.0..3.0),
                    ]
                })
                .collect(),
            frame_index: f,
        })
        .collect()
}

/// A random stacked spatiotemporal complex (general cells: quads, prisms).
/// Retries fresh jitter when a degenerate frame slips in.
pub fn random_stacked_complex(rng: &mut ChaCha8Rng) -> CellComplex {
    loop {
        let frames = random_frames(rng, 8, 4);
        if let Ok(complex) = build_stacked_complex(&frames) {
            return complex;
        }
    }
}

/// A random valid complex: usually simplicial, sometimes a stacked build.
pub fn random_complex(rng: &mut ChaCha8Rng, max_cells: usize) -> CellComplex {
    if rng.gen_bool(0.3) {
        random_stacked_complex(rng)
    } else {
        random_simplicial_complex(rng, max_cells)
    }
}

/// A random finite filter on the complex's vertices. Values are drawn in
/// [0, 1); with probability 1/2 they are quantized to one decimal so ties
/// get exercised.
pub fn random_filter(rng: &mut ChaCha8Rng, complex: &CellComplex) -> FilterFunction {
    let quantize = rng.gen_bool(0.5);
    let values = complex
        .cells()
        .filter(|c| c.dim == 0)
        .map(|c| {
            let v: f64 = rng.gen_range(0.0..1.0);
            let v = if quantize { (v * 10.0).round() / 10.0 } else { v };
            (c.id, v)
        })
        .collect();
    FilterFunction::new(FilterLabel::Audio, values)
}
