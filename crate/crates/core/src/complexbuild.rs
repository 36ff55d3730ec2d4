//! Constructing the three complexes the pipeline uses: per-frame 2-D
//! Delaunay triangulations, the stacked 3-D spatiotemporal complex of an
//! image sequence, and the 1-D path complex of an audio signal.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::cellcomplex::{CellComplex, CellId, ComplexError};
use crate::filtration::{FilterFunction, FilterLabel};

/// Relative tolerance on geometric determinants (in-circle, orientation).
/// Pixel-coordinate inputs are low precision; anything within this band is
/// treated as degenerate (cocircular / collinear).
const REL_TOL: f64 = 1e-9;

/// One frame of tracked facial landmarks, in pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    pub points: Vec<[f64; 2]>,
    pub frame_index: usize,
}

/// A raw audio signal: amplitudes plus the sample rate they were read at.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioSignal {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

/// A Delaunay triangulation of a planar point set.
///
/// Triangles are stored as sorted index triples and edges as sorted index
/// pairs, so set operations across frames are plain set intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation2D {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: BTreeSet<[usize; 3]>,
    pub edges: BTreeSet<[usize; 2]>,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("need at least 3 points to triangulate, got {0}")]
    TooFewPoints(usize),
    #[error("points are all collinear")]
    CollinearPoints,
    #[error("points {a} and {b} coincide")]
    DuplicatePoints { a: usize, b: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("no frames given")]
    NoFrames,
    #[error("frame {frame} has {found} landmarks, expected {expected}")]
    LandmarkCountMismatch {
        frame: usize,
        expected: usize,
        found: usize,
    },
    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<BuildError>,
    },
    #[error("audio signal is empty")]
    EmptySignal,
    #[error("audio sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Twice the signed area of (a, b, c); positive for counter-clockwise.
fn orient_det(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> (f64, f64) {
    let t1 = (b[0] - a[0]) * (c[1] - a[1]);
    let t2 = (b[1] - a[1]) * (c[0] - a[0]);
    (t1 - t2, t1.abs() + t2.abs())
}

fn is_ccw(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let (det, _) = orient_det(a, b, c);
    det > 0.0
}

fn strictly_left(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let (det, scale) = orient_det(a, b, c);
    det > REL_TOL * scale
}

/// In-circle determinant for the counter-clockwise triangle (a, b, c) and
/// query point d, together with a magnitude estimate for relative
/// tolerancing. Positive means d is inside the circumcircle.
fn incircle_det(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> (f64, f64) {
    let ax = a[0] - d[0];
    let ay = a[1] - d[1];
    let bx = b[0] - d[0];
    let by = b[1] - d[1];
    let cx = c[0] - d[0];
    let cy = c[1] - d[1];
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;

    let m0 = bx * cy - by * cx;
    let m1 = ax * cy - ay * cx;
    let m2 = ax * by - ay * bx;
    let det = a2 * m0 - b2 * m1 + c2 * m2;
    let scale = a2 * m0.abs() + b2 * m1.abs() + c2 * m2.abs();
    (det, scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CirclePos {
    Inside,
    On,
    Outside,
}

fn circle_position(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> CirclePos {
    let (det, scale) = incircle_det(a, b, c, d);
    if det > REL_TOL * scale {
        CirclePos::Inside
    } else if det < -REL_TOL * scale {
        CirclePos::Outside
    } else {
        CirclePos::On
    }
}

/// Computes the Delaunay triangulation of `points`.
///
/// Incremental Bowyer-Watson over a large super-triangle, followed by a
/// Lawson pass that both repairs any tolerance-induced local defect and
/// canonicalizes cocircular quads: among the two legal diagonals the one
/// with the lexicographically smaller vertex-index pair wins, so the output
/// is deterministic for a fixed input.
pub fn delaunay2d(points: &[[f64; 2]]) -> Result<Triangulation2D, BuildError> {
    if points.len() < 3 {
        return Err(BuildError::TooFewPoints(points.len()));
    }
    for (i, p) in points.iter().enumerate() {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(BuildError::NonFinitePoint { index: i });
        }
    }
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if points[i] == points[j] {
                return Err(BuildError::DuplicatePoints { a: i, b: j });
            }
        }
    }
    if all_collinear(points) {
        return Err(BuildError::CollinearPoints);
    }

    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let cx = (xmin + xmax) / 2.0;
    let cy = (ymin + ymax) / 2.0;
    let big = 1e5 * ((xmax - xmin).max(ymax - ymin) + 1.0);

    let n = points.len();
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.push([cx - big, cy - big]);
    pts.push([cx + big, cy - big]);
    pts.push([cx, cy + big]);

    // Active triangles, each stored counter-clockwise.
    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];

    for p in 0..n {
        let mut cavity: Vec<usize> = (0..tris.len())
            .filter(|&t| {
                let [a, b, c] = tris[t];
                circle_position(pts[a], pts[b], pts[c], pts[p]) == CirclePos::Inside
            })
            .collect();
        if cavity.is_empty() {
            // Tolerance pushed the point just outside every circumcircle;
            // fall back to the triangle that contains it.
            let containing = (0..tris.len()).find(|&t| {
                let [a, b, c] = tris[t];
                let inside = |u, v| {
                    let (det, scale) = orient_det(pts[u], pts[v], pts[p]);
                    det >= -REL_TOL * scale
                };
                inside(a, b) && inside(b, c) && inside(c, a)
            });
            cavity = vec![containing.expect("point lies inside the super-triangle")];
        }

        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut directed: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for &t in &cavity {
            let [a, b, c] = tris[t];
            for (u, v) in [(a, b), (b, c), (c, a)] {
                let key = (u.min(v), u.max(v));
                *edge_count.entry(key).or_insert(0) += 1;
                directed.insert(key, (u, v));
            }
        }
        cavity.sort_unstable_by(|a, b| b.cmp(a));
        for t in cavity {
            tris.swap_remove(t);
        }
        for (key, count) in edge_count {
            if count == 1 {
                let (u, v) = directed[&key];
                // Cavity triangles were CCW, so the boundary edge (u, v) seen
                // from inside keeps CCW orientation with the new point.
                let tri = if is_ccw(pts[u], pts[v], pts[p]) {
                    [u, v, p]
                } else {
                    [v, u, p]
                };
                tris.push(tri);
            }
        }
    }

    tris.retain(|t| t.iter().all(|&v| v < n));
    if tris.is_empty() {
        return Err(BuildError::CollinearPoints);
    }

    lawson_canonicalize(&pts[..n], &mut tris);

    let mut triangles = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for t in &tris {
        let mut s = *t;
        s.sort_unstable();
        triangles.insert(s);
        edges.insert([s[0], s[1]]);
        edges.insert([s[0], s[2]]);
        edges.insert([s[1], s[2]]);
    }
    Ok(Triangulation2D {
        vertices: points.to_vec(),
        triangles,
        edges,
    })
}

fn all_collinear(points: &[[f64; 2]]) -> bool {
    let a = points[0];
    let Some(&b) = points[1..].iter().find(|&&p| p != a) else {
        return true;
    };
    points.iter().all(|&c| {
        let (det, scale) = orient_det(a, b, c);
        det.abs() <= REL_TOL * scale
    })
}

/// Lawson flip pass. Strictly non-Delaunay interior edges are flipped; exact
/// (within tolerance) cocircular quads are flipped towards the diagonal with
/// the lexicographically smallest sorted vertex pair.
fn lawson_canonicalize(pts: &[[f64; 2]], tris: &mut Vec<[usize; 3]>) {
    let max_flips = 10 * pts.len() * pts.len() + 100;
    let mut flips = 0;
    'outer: loop {
        let mut adjacency: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            let [a, b, c] = *tri;
            for (u, v) in [(a, b), (b, c), (c, a)] {
                adjacency.entry((u.min(v), u.max(v))).or_default().push(t);
            }
        }
        let mut interior: Vec<(usize, usize)> = adjacency
            .iter()
            .filter(|(_, ts)| ts.len() == 2)
            .map(|(&e, _)| e)
            .collect();
        interior.sort_unstable();

        for (u, v) in interior {
            let ts = &adjacency[&(u, v)];
            let (t1, t2) = (ts[0], ts[1]);
            let c = opposite_vertex(tris[t1], u, v);
            let d = opposite_vertex(tris[t2], u, v);
            // Flip legality: the quad must be strictly convex, i.e. the new
            // diagonal (c, d) properly crosses (u, v).
            let convex = strictly_left(pts[c], pts[d], pts[u]) != strictly_left(pts[c], pts[d], pts[v])
                && strictly_left(pts[u], pts[v], pts[c]) != strictly_left(pts[u], pts[v], pts[d]);
            if !convex {
                continue;
            }
            let (a1, b1, c1) = ccw(pts, tris[t1]);
            let pos = circle_position(pts[a1], pts[b1], pts[c1], pts[d]);
            let wants_flip = match pos {
                CirclePos::Inside => true,
                CirclePos::On => [c.min(d), c.max(d)] < [u, v],
                CirclePos::Outside => false,
            };
            if wants_flip && flips < max_flips {
                tris[t1] = orient_ccw(pts, [c, d, u]);
                tris[t2] = orient_ccw(pts, [c, d, v]);
                flips += 1;
                continue 'outer;
            }
        }
        break;
    }
    debug_assert!(flips < max_flips, "lawson pass did not converge");
}

fn opposite_vertex(tri: [usize; 3], u: usize, v: usize) -> usize {
    *tri.iter()
        .find(|&&w| w != u && w != v)
        .expect("triangle has a vertex off the shared edge")
}

fn ccw(pts: &[[f64; 2]], tri: [usize; 3]) -> (usize, usize, usize) {
    let [a, b, c] = orient_ccw(pts, tri);
    (a, b, c)
}

fn orient_ccw(pts: &[[f64; 2]], tri: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = tri;
    if is_ccw(pts[a], pts[b], pts[c]) {
        tri
    } else {
        [a, c, b]
    }
}

impl Triangulation2D {
    /// Brute-force check of the defining property: for each triangle, no
    /// other vertex lies strictly inside its circumcircle. Returns every
    /// (triangle, offending vertex) pair.
    pub fn empty_circumcircle_violations(&self) -> Vec<([usize; 3], usize)> {
        let mut bad = Vec::new();
        for &tri in &self.triangles {
            let [a, b, c] = orient_ccw(
                &self.vertices,
                tri,
            );
            for p in 0..self.vertices.len() {
                if p == tri[0] || p == tri[1] || p == tri[2] {
                    continue;
                }
                if circle_position(
                    self.vertices[a],
                    self.vertices[b],
                    self.vertices[c],
                    self.vertices[p],
                ) == CirclePos::Inside
                {
                    bad.push((tri, p));
                }
            }
        }
        bad
    }
}

/// Builds the stacked 3-D cell complex of a landmark sequence.
///
/// Each frame contributes its Delaunay triangulation embedded at
/// z = k * s, where s is the frame-0 bounding-box diagonal divided by the
/// number of frames. Between consecutive frames: one temporal edge per
/// landmark; a quad per edge whose index pair appears in both frames'
/// triangulations (2 spatial + 2 temporal edges); a prism per triangle whose
/// index triple appears in both (2 triangles + 3 quads).
pub fn build_stacked_complex(frames: &[LandmarkFrame]) -> Result<CellComplex, BuildError> {
    if frames.is_empty() {
        return Err(BuildError::NoFrames);
    }
    let landmarks = frames[0].points.len();
    for (f, frame) in frames.iter().enumerate() {
        if frame.points.len() != landmarks {
            return Err(BuildError::LandmarkCountMismatch {
                frame: f,
                expected: landmarks,
                found: frame.points.len(),
            });
        }
    }

    let tris: Vec<Triangulation2D> = frames
        .iter()
        .enumerate()
        .map(|(f, frame)| {
            delaunay2d(&frame.points).map_err(|e| BuildError::Frame {
                frame: f,
                source: Box::new(e),
            })
        })
        .collect::<Result<_, _>>()?;

    let spacing = {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &frames[0].points {
            xmin = xmin.min(p[0]);
            xmax = xmax.max(p[0]);
            ymin = ymin.min(p[1]);
            ymax = ymax.max(p[1]);
        }
        ((xmax - xmin).hypot(ymax - ymin)) / frames.len() as f64
    };

    let mut complex = CellComplex::new();

    let mut vert: Vec<Vec<CellId>> = Vec::with_capacity(frames.len());
    for (f, frame) in frames.iter().enumerate() {
        let z = f as f64 * spacing;
        vert.push(
            frame
                .points
                .iter()
                .map(|p| complex.add_vertex_at([p[0], p[1], z]))
                .collect(),
        );
    }

    let mut edge_ids: Vec<BTreeMap<[usize; 2], CellId>> = Vec::with_capacity(frames.len());
    let mut tri_ids: Vec<BTreeMap<[usize; 3], CellId>> = Vec::with_capacity(frames.len());
    for (f, tri) in tris.iter().enumerate() {
        let mut edges = BTreeMap::new();
        for &[i, j] in &tri.edges {
            let id = complex.add_cell(1, &[vert[f][i], vert[f][j]])?;
            edges.insert([i, j], id);
        }
        let mut triangles = BTreeMap::new();
        for &[i, j, k] in &tri.triangles {
            let id = complex.add_cell(2, &[edges[&[i, j]], edges[&[i, k]], edges[&[j, k]]])?;
            triangles.insert([i, j, k], id);
        }
        edge_ids.push(edges);
        tri_ids.push(triangles);
    }

    for f in 0..frames.len().saturating_sub(1) {
        let temporal: Vec<CellId> = (0..landmarks)
            .map(|i| complex.add_cell(1, &[vert[f][i], vert[f + 1][i]]))
            .collect::<Result<_, _>>()?;

        let mut quads: BTreeMap<[usize; 2], CellId> = BTreeMap::new();
        for (&e, &lower) in &edge_ids[f] {
            if let Some(&upper) = edge_ids[f + 1].get(&e) {
                let id = complex.add_cell(2, &[lower, upper, temporal[e[0]], temporal[e[1]]])?;
                quads.insert(e, id);
            }
        }

        for (&t, &lower) in &tri_ids[f] {
            if let Some(&upper) = tri_ids[f + 1].get(&t) {
                let [i, j, k] = t;
                let id = complex.add_cell(
                    3,
                    &[lower, upper, quads[&[i, j]], quads[&[i, k]], quads[&[j, k]]],
                )?;
                debug_assert!(complex.cell(id).is_some());
            }
        }
    }

    Ok(complex)
}

/// Builds the 1-dimensional path complex of an audio signal: one vertex per
/// sample carrying the amplitude as its filter value, one edge between
/// consecutive samples.
pub fn build_path_complex(
    signal: &AudioSignal,
) -> Result<(CellComplex, FilterFunction), BuildError> {
    if signal.samples.is_empty() {
        return Err(BuildError::EmptySignal);
    }
    for (i, &s) in signal.samples.iter().enumerate() {
        if !s.is_finite() {
            return Err(BuildError::NonFiniteSample { index: i });
        }
    }

    let mut complex = CellComplex::new();
    let mut values = BTreeMap::new();
    let vertices: Vec<CellId> = signal
        .samples
        .iter()
        .map(|&amp| {
            let v = complex.add_vertex();
            values.insert(v, amp);
            v
        })
        .collect();
    for pair in vertices.windows(2) {
        complex.add_cell(1, &[pair[0], pair[1]])?;
    }
    Ok((complex, FilterFunction::new(FilterLabel::Audio, values)))
}
