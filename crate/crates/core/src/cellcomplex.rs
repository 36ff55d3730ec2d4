//! Finite cell complexes with Z/2 boundary algebra.
//!
//! Cells are stored by dense integer id in insertion order; the boundary of a
//! d-cell is a set of (d-1)-cell ids. There are no orientation signs: the
//! ground ring is Z/2, so a boundary is just a parity set. Quads and prisms
//! are perfectly ordinary cells here, which is what the stacked
//! spatiotemporal complex needs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// Handle of a cell inside one [`CellComplex`].
pub type CellId = usize;

/// A single cell: its dimension and the ids of its (dim-1)-dimensional faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: CellId,
    pub dim: usize,
    /// Sorted, duplicate-free ids of the boundary cells.
    pub boundary: Vec<CellId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("cell {0} does not exist")]
    UnknownCell(CellId),
    #[error("boundary cell {id} has dimension {found}, expected {expected}")]
    BoundaryDimension {
        id: CellId,
        expected: usize,
        found: usize,
    },
    #[error("boundary ids contain {0} more than once; a boundary is a set of distinct cells")]
    DuplicateBoundary(CellId),
    #[error("a {dim}-cell must have a non-empty boundary")]
    EmptyBoundary { dim: usize },
    #[error("a 0-cell cannot have a boundary")]
    VertexWithBoundary,
    #[error("cell {0} is not a vertex")]
    NotAVertex(CellId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A structural defect found by [`CellComplex::validate`].
///
/// Violations are data, not errors: a complex that fails validation can still
/// be inspected and serialized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A cell lists a boundary id that is not present in the complex.
    MissingFace { cell: CellId, missing: CellId },
    /// A boundary cell does not have dimension dim-1.
    FaceDimension {
        cell: CellId,
        face: CellId,
        expected: usize,
        found: usize,
    },
    /// The boundary of the boundary of `cell` covers `grandface` an odd
    /// number of times, so dd != 0 over Z/2.
    OddIncidence { cell: CellId, grandface: CellId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingFace { cell, missing } => {
                write!(f, "cell {cell}: boundary cell {missing} is missing")
            }
            Violation::FaceDimension {
                cell,
                face,
                expected,
                found,
            } => write!(
                f,
                "cell {cell}: face {face} has dimension {found}, expected {expected}"
            ),
            Violation::OddIncidence { cell, grandface } => {
                write!(f, "cell {cell}: dd covers cell {grandface} an odd number of times")
            }
        }
    }
}

/// A finite cell complex.
///
/// Ids are assigned consecutively in insertion order, which downstream code
/// relies on for filtration tie-breaking. Vertices may carry an optional
/// position in (x, y, t) space; positions play no combinatorial role.
///
/// A complex is built single-threaded and is immutable afterwards; all query
/// methods take `&self`.
#[derive(Debug, Clone, Default)]
pub struct CellComplex {
    cells: Vec<Option<Cell>>,
    positions: BTreeMap<CellId, [f64; 3]>,
}

impl CellComplex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a cell of dimension `dim` attached along `boundary`.
    ///
    /// Every boundary id must already exist with dimension `dim - 1`, and the
    /// boundary must be empty exactly for vertices. Returns the fresh id
    /// (ids increase by one per insertion).
    pub fn add_cell(&mut self, dim: usize, boundary: &[CellId]) -> Result<CellId, ComplexError> {
        if dim == 0 {
            if !boundary.is_empty() {
                return Err(ComplexError::VertexWithBoundary);
            }
        } else if boundary.is_empty() {
            return Err(ComplexError::EmptyBoundary { dim });
        }
        let mut sorted = boundary.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(ComplexError::DuplicateBoundary(pair[0]));
            }
        }
        for &b in &sorted {
            let face = self.cell(b).ok_or(ComplexError::UnknownCell(b))?;
            if face.dim + 1 != dim {
                return Err(ComplexError::BoundaryDimension {
                    id: b,
                    expected: dim - 1,
                    found: face.dim,
                });
            }
        }
        let id = self.cells.len();
        self.cells.push(Some(Cell {
            id,
            dim,
            boundary: sorted,
        }));
        Ok(id)
    }

    /// Adds a vertex (0-cell).
    pub fn add_vertex(&mut self) -> CellId {
        self.add_cell(0, &[]).expect("vertex insertion cannot fail")
    }

    /// Adds a vertex carrying a position.
    pub fn add_vertex_at(&mut self, pos: [f64; 3]) -> CellId {
        let id = self.add_vertex();
        self.positions.insert(id, pos);
        id
    }

    pub fn set_vertex_position(&mut self, v: CellId, pos: [f64; 3]) -> Result<(), ComplexError> {
        let cell = self.cell(v).ok_or(ComplexError::UnknownCell(v))?;
        if cell.dim != 0 {
            return Err(ComplexError::NotAVertex(v));
        }
        self.positions.insert(v, pos);
        Ok(())
    }

    pub fn vertex_position(&self, v: CellId) -> Option<[f64; 3]> {
        self.positions.get(&v).copied()
    }

    /// True when every vertex of the complex has a position.
    pub fn has_all_vertex_positions(&self) -> bool {
        self.cells()
            .filter(|c| c.dim == 0)
            .all(|c| self.positions.contains_key(&c.id))
    }

    pub fn cell(&self, id: CellId) -> Option<&Cell> {
        self.cells.get(id).and_then(|c| c.as_ref())
    }

    /// All cells in ascending id order.
    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter_map(|c| c.as_ref())
    }

    /// One past the largest id ever assigned (holes from removals included).
    pub fn id_bound(&self) -> usize {
        self.cells.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells().count()
    }

    pub fn num_cells_of_dim(&self, dim: usize) -> usize {
        self.cells().filter(|c| c.dim == dim).count()
    }

    pub fn max_dim(&self) -> usize {
        self.cells().map(|c| c.dim).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.cells().next().is_none()
    }

    /// Removes a cell, leaving a hole at its id. Removing a non-maximal cell
    /// breaks face closure, which `validate` will report; the main use is
    /// exercising exactly that.
    pub fn remove_cell(&mut self, id: CellId) -> Option<Cell> {
        self.positions.remove(&id);
        self.cells.get_mut(id).and_then(|slot| slot.take())
    }

    /// All faces of `id` (transitively), including the cell itself.
    pub fn faces_of(&self, id: CellId) -> Result<BTreeSet<CellId>, ComplexError> {
        if self.cell(id).is_none() {
            return Err(ComplexError::UnknownCell(id));
        }
        let mut faces = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if !faces.insert(c) {
                continue;
            }
            if let Some(cell) = self.cell(c) {
                stack.extend(cell.boundary.iter().copied());
            }
        }
        Ok(faces)
    }

    /// The closed star of a vertex: every cell sigma such that some cell mu
    /// has both sigma and v among its faces. The result is a subcomplex.
    pub fn closed_star(&self, v: CellId) -> Result<BTreeSet<CellId>, ComplexError> {
        let cell = self.cell(v).ok_or(ComplexError::UnknownCell(v))?;
        if cell.dim != 0 {
            return Err(ComplexError::NotAVertex(v));
        }
        let mut star = BTreeSet::new();
        for mu in self.cells() {
            let faces = self.faces_of(mu.id)?;
            if faces.contains(&v) {
                star.extend(faces);
            }
        }
        Ok(star)
    }

    /// Alternating sum of cell counts per dimension.
    pub fn euler_characteristic(&self) -> i64 {
        self.cells()
            .map(|c| if c.dim % 2 == 0 { 1i64 } else { -1i64 })
            .sum()
    }

    /// Checks face closure and dd = 0 over Z/2, reporting every violation.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for cell in self.cells() {
            let mut squares: BTreeMap<CellId, usize> = BTreeMap::new();
            for &b in &cell.boundary {
                match self.cell(b) {
                    None => violations.push(Violation::MissingFace {
                        cell: cell.id,
                        missing: b,
                    }),
                    Some(face) => {
                        if face.dim + 1 != cell.dim {
                            violations.push(Violation::FaceDimension {
                                cell: cell.id,
                                face: b,
                                expected: cell.dim - 1,
                                found: face.dim,
                            });
                        }
                        for &g in &face.boundary {
                            *squares.entry(g).or_insert(0) += 1;
                        }
                    }
                }
            }
            for (grandface, count) in squares {
                if count % 2 != 0 {
                    violations.push(Violation::OddIncidence {
                        cell: cell.id,
                        grandface,
                    });
                }
            }
        }
        violations
    }

    /// Writes the line format `id dim b1 b2 ... bk`, ids ascending.
    pub fn write_text(&self, w: &mut impl Write) -> io::Result<()> {
        for cell in self.cells() {
            write!(w, "{} {}", cell.id, cell.dim)?;
            for b in &cell.boundary {
                write!(w, " {b}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("text format is ascii")
    }

    /// Parses the `write_text` format. Ids must be strictly ascending and
    /// every boundary id must already have appeared with the right dimension.
    pub fn parse_text(text: &str) -> Result<Self, ComplexError> {
        let mut complex = CellComplex::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: &str| -> Result<usize, ComplexError> {
                tok.parse().map_err(|_| ComplexError::Parse {
                    line: lineno + 1,
                    msg: format!("not an integer: {tok:?}"),
                })
            };
            let mut toks = line.split_whitespace();
            let id = parse(toks.next().expect("non-empty line has a token"))?;
            let dim = parse(toks.next().ok_or(ComplexError::Parse {
                line: lineno + 1,
                msg: "missing dimension".into(),
            })?)?;
            let boundary = toks.map(parse).collect::<Result<Vec<_>, _>>()?;
            if id < complex.cells.len() {
                return Err(ComplexError::Parse {
                    line: lineno + 1,
                    msg: format!("id {id} is not ascending"),
                });
            }
            // Holes are allowed: a file written after removals skips ids.
            while complex.cells.len() < id {
                complex.cells.push(None);
            }
            let got = complex.add_cell(dim, &boundary).map_err(|e| ComplexError::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            debug_assert_eq!(got, id);
        }
        Ok(complex)
    }
}

/// Builds the complex of a single filled triangle; a small fixture used all
/// over the test suites.
#[cfg(test)]
pub(crate) fn filled_triangle() -> (CellComplex, [CellId; 7]) {
    let mut k = CellComplex::new();
    let v0 = k.add_vertex();
    let v1 = k.add_vertex();
    let v2 = k.add_vertex();
    let e01 = k.add_cell(1, &[v0, v1]).unwrap();
    let e02 = k.add_cell(1, &[v0, v2]).unwrap();
    let e12 = k.add_cell(1, &[v1, v2]).unwrap();
    let t = k.add_cell(2, &[e01, e02, e12]).unwrap();
    (k, [v0, v1, v2, e01, e02, e12, t])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_vertex_gets_id_zero() {
        let mut k = CellComplex::new();
        assert_eq!(k.add_cell(0, &[]).unwrap(), 0);
    }

    #[test]
    fn segment_complex() {
        let mut k = CellComplex::new();
        let v0 = k.add_vertex();
        let v1 = k.add_vertex();
        let e = k.add_cell(1, &[v0, v1]).unwrap();
        assert_eq!(e, 2);
        assert_eq!(k.cell(e).unwrap().dim, 1);
        assert!(k.validate().is_empty());
    }

    #[test]
    fn degenerate_edge_is_rejected() {
        let mut k = CellComplex::new();
        let v0 = k.add_vertex();
        assert_eq!(
            k.add_cell(1, &[v0, v0]),
            Err(ComplexError::DuplicateBoundary(v0))
        );
    }

    #[test]
    fn unknown_and_wrong_dimension_boundaries_are_rejected() {
        let mut k = CellComplex::new();
        let v0 = k.add_vertex();
        let v1 = k.add_vertex();
        assert_eq!(k.add_cell(1, &[v0, 17]), Err(ComplexError::UnknownCell(17)));
        let e = k.add_cell(1, &[v0, v1]).unwrap();
        // An edge cannot serve as the endpoint of another edge.
        assert!(matches!(
            k.add_cell(1, &[v0, e]),
            Err(ComplexError::BoundaryDimension { .. })
        ));
        assert!(matches!(
            k.add_cell(0, &[v0]),
            Err(ComplexError::VertexWithBoundary)
        ));
        assert!(matches!(
            k.add_cell(2, &[]),
            Err(ComplexError::EmptyBoundary { dim: 2 })
        ));
    }

    #[test]
    fn ids_follow_insertion_order() {
        let mut k = CellComplex::new();
        for expect in 0..10 {
            assert_eq!(k.add_vertex(), expect);
        }
    }

    #[test]
    fn closed_star_of_isolated_vertex() {
        let mut k = CellComplex::new();
        let v = k.add_vertex();
        let star = k.closed_star(v).unwrap();
        assert_eq!(star.into_iter().collect::<Vec<_>>(), vec![v]);
    }

    #[test]
    fn closed_star_includes_far_endpoint() {
        let mut k = CellComplex::new();
        let v0 = k.add_vertex();
        let v1 = k.add_vertex();
        let e = k.add_cell(1, &[v0, v1]).unwrap();
        let star = k.closed_star(v0).unwrap();
        assert_eq!(star, [v0, v1, e].into_iter().collect());
    }

    #[test]
    fn closed_star_of_filled_triangle_vertex_is_everything() {
        let (k, ids) = filled_triangle();
        let star = k.closed_star(ids[0]).unwrap();
        assert_eq!(star.len(), 7);
        assert_eq!(star, ids.into_iter().collect());
    }

    #[test]
    fn closed_star_rejects_non_vertices() {
        let (k, ids) = filled_triangle();
        assert_eq!(k.closed_star(ids[3]), Err(ComplexError::NotAVertex(ids[3])));
        assert_eq!(k.closed_star(99), Err(ComplexError::UnknownCell(99)));
    }

    #[test]
    fn euler_characteristic_examples() {
        let mut k = CellComplex::new();
        k.add_vertex();
        assert_eq!(k.euler_characteristic(), 1);

        let (disk, _) = filled_triangle();
        assert_eq!(disk.euler_characteristic(), 1);

        // Hollow triangle: drop the 2-cell.
        let (mut circle, ids) = filled_triangle();
        circle.remove_cell(ids[6]);
        assert_eq!(circle.euler_characteristic(), 0);
        assert!(circle.validate().is_empty());
    }

    #[test]
    fn validate_reports_missing_face() {
        let (mut k, ids) = filled_triangle();
        k.remove_cell(ids[0]);
        let violations = k.validate();
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::MissingFace { missing, .. } if *missing == ids[0])));
    }

    #[test]
    fn validate_reports_odd_incidence() {
        // A 2-cell whose boundary is only two of the triangle's edges: the
        // shared vertex is covered twice (even) but the far endpoints once.
        let mut k = CellComplex::new();
        let v0 = k.add_vertex();
        let v1 = k.add_vertex();
        let v2 = k.add_vertex();
        let e01 = k.add_cell(1, &[v0, v1]).unwrap();
        let e12 = k.add_cell(1, &[v1, v2]).unwrap();
        let bad = k.add_cell(2, &[e01, e12]).unwrap();
        let violations = k.validate();
        let odd: Vec<_> = violations
            .iter()
            .filter_map(|v| match v {
                Violation::OddIncidence { cell, grandface } if *cell == bad => Some(*grandface),
                _ => None,
            })
            .collect();
        assert_eq!(odd, vec![v0, v2]);
    }

    #[test]
    fn text_round_trip() {
        let (k, _) = filled_triangle();
        let text = k.to_text();
        let parsed = CellComplex::parse_text(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        assert_eq!(parsed.num_cells(), 7);
        assert!(parsed.validate().is_empty());
    }

    #[test]
    fn parse_rejects_dangling_and_unsorted_ids() {
        assert!(CellComplex::parse_text("0 1 5 6").is_err());
        assert!(CellComplex::parse_text("1 0\n0 0").is_err());
        assert!(CellComplex::parse_text("0 0\n1 0\nx 1 0 1").is_err());
    }
}
