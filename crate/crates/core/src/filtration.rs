//! Lower-star filtrations from vertex scalar fields.
//!
//! A filter function assigns a real value to every vertex; every higher cell
//! takes the maximum over its vertices. Cells are emitted lower star by lower
//! star, vertices in non-decreasing value order, which guarantees that faces
//! precede cofaces and that cell values never decrease along the order.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::cellcomplex::{CellComplex, CellId};

/// Which scalar field a filtration came from.
///
/// The first eight are distances to the planes spanned around the vertex
/// cloud's (x, y) bounding box, all parallel to the time axis; `Audio` is the
/// raw amplitude filter of the 1-dimensional audio complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterLabel {
    HorizontalMin,
    HorizontalMax,
    VerticalMin,
    VerticalMax,
    ObliquePpMin,
    ObliquePpMax,
    ObliquePmMin,
    ObliquePmMax,
    Audio,
}

impl FilterLabel {
    /// The eight plane filters in their canonical signature order.
    pub const PLANES: [FilterLabel; 8] = [
        FilterLabel::HorizontalMin,
        FilterLabel::HorizontalMax,
        FilterLabel::VerticalMin,
        FilterLabel::VerticalMax,
        FilterLabel::ObliquePpMin,
        FilterLabel::ObliquePpMax,
        FilterLabel::ObliquePmMin,
        FilterLabel::ObliquePmMax,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FilterLabel::HorizontalMin => "horizontal-min",
            FilterLabel::HorizontalMax => "horizontal-max",
            FilterLabel::VerticalMin => "vertical-min",
            FilterLabel::VerticalMax => "vertical-max",
            FilterLabel::ObliquePpMin => "oblique-pp-min",
            FilterLabel::ObliquePpMax => "oblique-pp-max",
            FilterLabel::ObliquePmMin => "oblique-pm-min",
            FilterLabel::ObliquePmMax => "oblique-pm-max",
            FilterLabel::Audio => "audio",
        }
    }
}

impl fmt::Display for FilterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A vertex scalar field h together with its provenance label.
#[derive(Debug, Clone)]
pub struct FilterFunction {
    label: FilterLabel,
    values: BTreeMap<CellId, f64>,
}

impl FilterFunction {
    pub fn new(label: FilterLabel, values: BTreeMap<CellId, f64>) -> Self {
        Self { label, values }
    }

    pub fn label(&self) -> FilterLabel {
        self.label
    }

    pub fn value(&self, v: CellId) -> Option<f64> {
        self.values.get(&v).copied()
    }

    pub fn values(&self) -> &BTreeMap<CellId, f64> {
        &self.values
    }
}

#[derive(Debug, Error)]
pub enum FiltrationError {
    #[error("vertex {0} has no filter value")]
    MissingVertexValue(CellId),
    #[error("vertex {vertex} has a non-finite filter value {value}")]
    NonFiniteValue { vertex: CellId, value: f64 },
    #[error("vertex {0} has no position; plane filters need (x, y, t) coordinates")]
    MissingVertexPosition(CellId),
    #[error("cell {0} has no vertices; the complex is not face-closed")]
    InvalidComplex(CellId),
}

/// The eight plane-distance filters of a positioned complex.
///
/// Planes are anchored to the (x, y) bounding box of the vertex cloud:
/// y = ymin, y = ymax, x = xmin, x = xmax, and the four oblique planes
/// through the extremes of x+y and x-y (distances divided by sqrt 2). Every
/// filter is non-negative and attains 0 on at least one vertex.
pub fn plane_filters(complex: &CellComplex) -> Result<[FilterFunction; 8], FiltrationError> {
    let mut coords = Vec::new();
    for cell in complex.cells().filter(|c| c.dim == 0) {
        let pos = complex
            .vertex_position(cell.id)
            .ok_or(FiltrationError::MissingVertexPosition(cell.id))?;
        coords.push((cell.id, pos[0], pos[1]));
    }

    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    let mut pp_min = f64::INFINITY;
    let mut pp_max = f64::NEG_INFINITY;
    let mut pm_min = f64::INFINITY;
    let mut pm_max = f64::NEG_INFINITY;
    for &(_, x, y) in &coords {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
        pp_min = pp_min.min(x + y);
        pp_max = pp_max.max(x + y);
        pm_min = pm_min.min(x - y);
        pm_max = pm_max.max(x - y);
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let dist: [&dyn Fn(f64, f64) -> f64; 8] = [
        &|_, y| y - ymin,
        &|_, y| ymax - y,
        &|x, _| x - xmin,
        &|x, _| xmax - x,
        &|x, y| (x + y - pp_min) / sqrt2,
        &|x, y| (pp_max - (x + y)) / sqrt2,
        &|x, y| (x - y - pm_min) / sqrt2,
        &|x, y| (pm_max - (x - y)) / sqrt2,
    ];

    let mut filters = Vec::with_capacity(8);
    for (label, d) in FilterLabel::PLANES.iter().zip(dist) {
        let values: BTreeMap<CellId, f64> = coords.iter().map(|&(v, x, y)| (v, d(x, y))).collect();
        filters.push(FilterFunction::new(*label, values));
    }
    Ok(filters.try_into().expect("exactly eight filters"))
}

/// An ordering of all cells of a complex compatible with lower stars.
#[derive(Debug, Clone)]
pub struct Filtration<'a> {
    complex: &'a CellComplex,
    label: FilterLabel,
    /// Cell ids in filtration order.
    order: Vec<CellId>,
    /// Filter value of the cell at each position (max over its vertices).
    values: Vec<f64>,
    /// 1-based rank of the lower-star vertex owning the cell at each
    /// position: the j with cell in lwSt(v_j).
    star_ordinal: Vec<usize>,
    /// Position of each cell id in `order`, indexed by id.
    position: Vec<usize>,
}

impl<'a> Filtration<'a> {
    pub fn complex(&self) -> &'a CellComplex {
        self.complex
    }

    pub fn label(&self) -> FilterLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[CellId] {
        &self.order
    }

    pub fn cell_at(&self, pos: usize) -> CellId {
        self.order[pos]
    }

    pub fn value_at(&self, pos: usize) -> f64 {
        self.values[pos]
    }

    /// 1-based sublevel index: the cell at `pos` first appears in K_j.
    pub fn star_ordinal_at(&self, pos: usize) -> usize {
        self.star_ordinal[pos]
    }

    pub fn position_of(&self, id: CellId) -> Option<usize> {
        let pos = *self.position.get(id)?;
        (pos != usize::MAX).then_some(pos)
    }

    /// Largest cell value in the filtration, if any cells exist. This is the
    /// N used when capping infinite intervals.
    pub fn max_value(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// Debug dump: one `id value` line per cell in filtration order.
    pub fn write_dump(&self, w: &mut impl Write) -> io::Result<()> {
        for (id, value) in self.order.iter().zip(&self.values) {
            writeln!(w, "{id} {value}")?;
        }
        Ok(())
    }

    /// Assembles a filtration from an explicit order without any checking,
    /// so tests can feed deliberately broken orders to the consumers.
    #[cfg(test)]
    pub(crate) fn from_raw_parts_for_tests(
        complex: &'a CellComplex,
        label: FilterLabel,
        order: Vec<CellId>,
        values: Vec<f64>,
    ) -> Self {
        let mut position = vec![usize::MAX; complex.id_bound()];
        for (pos, &id) in order.iter().enumerate() {
            position[id] = pos;
        }
        let star_ordinal = (1..=order.len()).collect();
        Self {
            complex,
            label,
            order,
            values,
            star_ordinal,
            position,
        }
    }
}

/// Builds the lower-star filtration of `complex` under the vertex field `h`.
///
/// Vertices are processed in non-decreasing value (ties by ascending id);
/// a cell belongs to the lower star of its maximum-value vertex, ties broken
/// by the largest vertex id; within one lower star, cells are sorted by
/// dimension then id.
pub fn lower_star_filtration<'a>(
    complex: &'a CellComplex,
    h: &FilterFunction,
) -> Result<Filtration<'a>, FiltrationError> {
    let bound = complex.id_bound();

    // Vertex sets per cell, bottom-up; boundary ids precede the cell id.
    let mut vertex_sets: Vec<Vec<CellId>> = vec![Vec::new(); bound];
    for cell in complex.cells() {
        if cell.dim == 0 {
            vertex_sets[cell.id] = vec![cell.id];
        } else {
            let mut verts: Vec<CellId> = Vec::new();
            for &b in &cell.boundary {
                verts.extend(vertex_sets.get(b).map(|v| v.as_slice()).unwrap_or(&[]));
            }
            verts.sort_unstable();
            verts.dedup();
            vertex_sets[cell.id] = verts;
        }
    }

    let value_of = |v: CellId| -> Result<f64, FiltrationError> {
        let value = h.value(v).ok_or(FiltrationError::MissingVertexValue(v))?;
        if !value.is_finite() {
            return Err(FiltrationError::NonFiniteValue { vertex: v, value });
        }
        Ok(value)
    };

    let mut vertices: Vec<(f64, CellId)> = complex
        .cells()
        .filter(|c| c.dim == 0)
        .map(|c| Ok((value_of(c.id)?, c.id)))
        .collect::<Result<_, _>>()?;
    vertices.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut vertex_rank = vec![usize::MAX; bound];
    for (rank, &(_, v)) in vertices.iter().enumerate() {
        vertex_rank[v] = rank;
    }

    // Assign each cell to the lower star of its maximum-value vertex (ties:
    // largest id). Because vertices tie-break by id, that is exactly the
    // vertex with the greatest rank.
    let mut stars: Vec<Vec<CellId>> = vec![Vec::new(); vertices.len()];
    for cell in complex.cells() {
        let owner = vertex_sets[cell.id]
            .iter()
            .map(|&v| vertex_rank[v])
            .max()
            .ok_or(FiltrationError::InvalidComplex(cell.id))?;
        stars[owner].push(cell.id);
    }

    let total = complex.num_cells();
    let mut order = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    let mut star_ordinal = Vec::with_capacity(total);
    let mut position = vec![usize::MAX; bound];
    for (rank, star) in stars.iter_mut().enumerate() {
        star.sort_by_key(|&id| (complex.cell(id).expect("cell exists").dim, id));
        let star_value = vertices[rank].0;
        for &id in star.iter() {
            position[id] = order.len();
            order.push(id);
            values.push(star_value);
            star_ordinal.push(rank + 1);
        }
    }

    Ok(Filtration {
        complex,
        label: h.label(),
        order,
        values,
        star_ordinal,
        position,
    })
}
