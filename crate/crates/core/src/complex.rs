//! Geometric simplicial complexes and their Euler characteristic.
//!
//! A complex stores one coordinate row per vertex and, for every dimension
//! `i`, the set of `i`-simplices as strictly increasing vertex index lists.
//! Vertex identity is positional: two rows with equal coordinates are still
//! two distinct vertices.

use std::collections::HashSet;
use std::fmt;

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{EctError, Result};

/// A simplex given by strictly increasing vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the indices; rejects empty input and repeated vertices.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(EctError::InvalidParameter("empty simplex".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(EctError::InvalidParameter(format!(
                "simplex {vertices:?} repeats a vertex"
            )));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// All nonempty proper subsets, in no particular order.
    pub fn proper_faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let m = self.0.len();
        let full = (1u64 << m) - 1;
        (1..full).map(move |mask| {
            Simplex(
                (0..m)
                    .filter(|&b| mask & (1 << b) != 0)
                    .map(|b| self.0[b])
                    .collect(),
            )
        })
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// One broken invariant of a candidate complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySimplex,
    UnsortedOrRepeated { vertices: Vec<usize> },
    VertexOutOfRange { simplex: Simplex, vertex: usize, n: usize },
    Duplicate { simplex: Simplex },
    /// The simplex is stored but some of its faces are not.
    NotClosed { simplex: Simplex, missing: Vec<Simplex> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySimplex => write!(f, "empty simplex"),
            Violation::UnsortedOrRepeated { vertices } => {
                write!(f, "vertex list {vertices:?} is not strictly increasing")
            }
            Violation::VertexOutOfRange { simplex, vertex, n } => {
                write!(f, "simplex {simplex} references vertex {vertex} but n = {n}")
            }
            Violation::Duplicate { simplex } => write!(f, "simplex {simplex} stored twice"),
            Violation::NotClosed { simplex, missing } => {
                write!(f, "simplex {simplex} is missing {} face(s)", missing.len())?;
                if let Some(first) = missing.first() {
                    write!(f, ", e.g. {first}")?;
                }
                Ok(())
            }
        }
    }
}

/// Checks raw vertex lists against the complex invariants.
///
/// Every violation is reported; an empty result means the lists describe a
/// valid complex over `coordinates.nrows()` vertices.
pub fn validate(coordinates: ArrayView2<'_, f64>, simplices: &[Vec<usize>]) -> Vec<Violation> {
    let n = coordinates.nrows();
    let mut violations = Vec::new();
    let mut stored: HashSet<Simplex> = HashSet::with_capacity(simplices.len());
    let mut accepted = Vec::with_capacity(simplices.len());

    for raw in simplices {
        if raw.is_empty() {
            violations.push(Violation::EmptySimplex);
            continue;
        }
        if raw.windows(2).any(|w| w[0] >= w[1]) {
            violations.push(Violation::UnsortedOrRepeated {
                vertices: raw.clone(),
            });
            continue;
        }
        let simplex = Simplex(raw.clone());
        if let Some(&vertex) = raw.iter().find(|&&v| v >= n) {
            violations.push(Violation::VertexOutOfRange {
                simplex,
                vertex,
                n,
            });
            continue;
        }
        if !stored.insert(simplex.clone()) {
            violations.push(Violation::Duplicate { simplex });
            continue;
        }
        accepted.push(simplex);
    }

    for simplex in &accepted {
        let mut missing: Vec<Simplex> = simplex
            .proper_faces()
            .filter(|face| !stored.contains(face))
            .collect();
        if !missing.is_empty() {
            missing.sort();
            violations.push(Violation::NotClosed {
                simplex: simplex.clone(),
                missing,
            });
        }
    }
    violations
}

/// Simplex counts per dimension together with the ambient sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexStats {
    pub counts: Vec<usize>,
    /// Number of coordinate rows.
    pub n: usize,
    /// Top dimension; `None` for the empty complex.
    pub p: Option<usize>,
    pub d: usize,
}

/// A face-closed simplicial complex whose vertices carry coordinates in `R^d`.
///
/// Instances are valid by construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSimplicialComplex {
    coordinates: Array2<f64>,
    simplices: Vec<Vec<Simplex>>,
}

impl GeometricSimplicialComplex {
    /// Builds a complex from an explicit simplex list, which must already be
    /// face-closed.
    pub fn new(coordinates: Array2<f64>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        if coordinates.ncols() == 0 {
            return Err(EctError::InvalidParameter(
                "coordinates must have at least one column".into(),
            ));
        }
        let violations = validate(coordinates.view(), &simplices);
        if !violations.is_empty() {
            return Err(EctError::InvalidComplex(violations));
        }
        let mut by_dim: Vec<Vec<Simplex>> = Vec::new();
        for raw in simplices {
            let s = Simplex(raw);
            let dim = s.dim();
            if by_dim.len() <= dim {
                by_dim.resize_with(dim + 1, Vec::new);
            }
            by_dim[dim].push(s);
        }
        Ok(Self::from_sorted_parts(coordinates, by_dim))
    }

    /// Closes `maximal` under faces and builds the resulting complex.
    pub fn from_maximal_simplices(
        coordinates: Array2<f64>,
        maximal: &[Vec<usize>],
    ) -> Result<Self> {
        let n = coordinates.nrows();
        let mut seen: HashSet<Simplex> = HashSet::new();
        for raw in maximal {
            let simplex = Simplex::new(raw.clone())?;
            if let Some(&v) = simplex.vertices().iter().find(|&&v| v >= n) {
                return Err(EctError::InvalidComplex(vec![Violation::VertexOutOfRange {
                    simplex,
                    vertex: v,
                    n,
                }]));
            }
            for face in simplex.proper_faces() {
                seen.insert(face);
            }
            seen.insert(simplex);
        }
        Ok(Self::from_simplex_set(coordinates, seen))
    }

    /// Vertices, deduplicated edges and triangles of a triangle mesh. Every
    /// coordinate row becomes a vertex, referenced or not.
    pub fn from_triangle_mesh(coordinates: Array2<f64>, triangles: &[[usize; 3]]) -> Result<Self> {
        if coordinates.ncols() == 0 {
            return Err(EctError::InvalidParameter(
                "coordinates must have at least one column".into(),
            ));
        }
        let n = coordinates.nrows();
        let mut edges: HashSet<Simplex> = HashSet::new();
        let mut faces: HashSet<Simplex> = HashSet::new();
        for (idx, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= n) {
                return Err(EctError::InvalidParameter(format!(
                    "triangle {idx} references vertex {v} but there are {n} vertices"
                )));
            }
            let simplex = Simplex::new(tri.to_vec()).map_err(|_| {
                EctError::InvalidParameter(format!("triangle {idx} {tri:?} is degenerate"))
            })?;
            let [a, b, c] = [simplex.0[0], simplex.0[1], simplex.0[2]];
            edges.insert(Simplex(vec![a, b]));
            edges.insert(Simplex(vec![a, c]));
            edges.insert(Simplex(vec![b, c]));
            faces.insert(simplex);
        }
        let mut by_dim = vec![(0..n).map(|v| Simplex(vec![v])).collect::<Vec<_>>()];
        let mut edges: Vec<Simplex> = edges.into_iter().collect();
        edges.sort_unstable();
        let mut faces: Vec<Simplex> = faces.into_iter().collect();
        faces.sort_unstable();
        if !edges.is_empty() {
            by_dim.push(edges);
        }
        if !faces.is_empty() {
            by_dim.push(faces);
        }
        Ok(Self::from_sorted_parts(coordinates, by_dim))
    }

    /// A 0-dimensional complex with one vertex per row.
    pub fn from_point_cloud(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 {
            return Err(EctError::InvalidParameter("empty point cloud".into()));
        }
        if points.ncols() == 0 {
            return Err(EctError::InvalidParameter(
                "points must have at least one coordinate".into(),
            ));
        }
        let vertices = (0..points.nrows()).map(|v| Simplex(vec![v])).collect();
        Ok(Self::from_sorted_parts(points, vec![vertices]))
    }

    fn from_simplex_set(coordinates: Array2<f64>, set: HashSet<Simplex>) -> Self {
        let mut by_dim: Vec<Vec<Simplex>> = Vec::new();
        for s in set {
            let dim = s.dim();
            if by_dim.len() <= dim {
                by_dim.resize_with(dim + 1, Vec::new);
            }
            by_dim[dim].push(s);
        }
        for level in &mut by_dim {
            level.sort_unstable();
        }
        Self::from_sorted_parts(coordinates, by_dim)
    }

    pub(crate) fn from_sorted_parts(coordinates: Array2<f64>, mut by_dim: Vec<Vec<Simplex>>) -> Self {
        while by_dim.last().is_some_and(|level| level.is_empty()) {
            by_dim.pop();
        }
        GeometricSimplicialComplex {
            coordinates,
            simplices: by_dim,
        }
    }

    pub fn coordinates(&self) -> ArrayView2<'_, f64> {
        self.coordinates.view()
    }

    /// Number of coordinate rows.
    pub fn n(&self) -> usize {
        self.coordinates.nrows()
    }

    /// Ambient dimension.
    pub fn d(&self) -> usize {
        self.coordinates.ncols()
    }

    /// Top simplex dimension, `None` when the complex is empty.
    pub fn top_dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn simplices(&self, dim: usize) -> &[Simplex] {
        self.simplices.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn simplices_by_dim(&self) -> &[Vec<Simplex>] {
        &self.simplices
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn stats(&self) -> ComplexStats {
        ComplexStats {
            counts: self.simplices.iter().map(Vec::len).collect(),
            n: self.n(),
            p: self.top_dim(),
            d: self.d(),
        }
    }

    /// Re-runs [`validate`] on this complex's own parts.
    pub fn validate(&self) -> Vec<Violation> {
        let raw: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .flatten()
            .map(|s| s.0.clone())
            .collect();
        validate(self.coordinates.view(), &raw)
    }

    /// `sum_i (-1)^i |K^(i)|`.
    pub fn euler_characteristic(&self) -> i64 {
        alternating_sum(self.simplices.iter().map(Vec::len))
    }

    /// Same simplices, new coordinates of identical shape.
    pub fn with_coordinates(&self, coordinates: Array2<f64>) -> Result<Self> {
        if coordinates.dim() != self.coordinates.dim() {
            return Err(EctError::ShapeMismatch(format!(
                "expected coordinates of shape {:?}, got {:?}",
                self.coordinates.dim(),
                coordinates.dim()
            )));
        }
        Ok(GeometricSimplicialComplex {
            coordinates,
            simplices: self.simplices.clone(),
        })
    }

    /// Keeps only the simplices accepted by `keep`. The caller guarantees the
    /// kept set is face-closed.
    pub(crate) fn filter_simplices(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let by_dim = self
            .simplices
            .iter()
            .enumerate()
            .map(|(dim, level)| {
                level
                    .iter()
                    .enumerate()
                    .filter(|(idx, _)| keep(dim, *idx))
                    .map(|(_, s)| s.clone())
                    .collect()
            })
            .collect();
        Self::from_sorted_parts(self.coordinates.clone(), by_dim)
    }

    /// Disjoint union with `other`'s vertex indices shifted past ours.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(EctError::ShapeMismatch(format!(
                "ambient dimensions differ: {} vs {}",
                self.d(),
                other.d()
            )));
        }
        let shift = self.n();
        let coordinates = ndarray::concatenate(
            Axis(0),
            &[self.coordinates.view(), other.coordinates.view()],
        )
        .expect("column counts checked above");
        let depth = self.simplices.len().max(other.simplices.len());
        let by_dim = (0..depth)
            .map(|dim| {
                let mut level: Vec<Simplex> = self.simplices(dim).to_vec();
                level.extend(
                    other
                        .simplices(dim)
                        .iter()
                        .map(|s| Simplex(s.0.iter().map(|v| v + shift).collect())),
                );
                level
            })
            .collect();
        Ok(Self::from_sorted_parts(coordinates, by_dim))
    }

    /// Relabels vertex `v` as `perm[v]`, permuting coordinate rows to match.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(EctError::InvalidParameter(
                "relabeling must be a permutation of the vertex indices".into(),
            ));
        }
        let mut coordinates = Array2::zeros(self.coordinates.dim());
        for (v, &p) in perm.iter().enumerate() {
            coordinates.row_mut(p).assign(&self.coordinates.row(v));
        }
        let by_dim = self
            .simplices
            .iter()
            .map(|level| {
                let mut level: Vec<Simplex> = level
                    .iter()
                    .map(|s| {
                        let mut vs: Vec<usize> = s.0.iter().map(|&v| perm[v]).collect();
                        vs.sort_unstable();
                        Simplex(vs)
                    })
                    .collect();
                level.sort_unstable();
                level
            })
            .collect();
        Ok(Self::from_sorted_parts(coordinates, by_dim))
    }
}

pub(crate) fn alternating_sum(counts: impl Iterator<Item = usize>) -> i64 {
    counts
        .enumerate()
        .map(|(dim, c)| if dim % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum()
}

/// Result of [`normalize_to_unit_ball`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization<T> {
    pub value: T,
    pub center: Array1<f64>,
    pub scale: f64,
    /// All points coincide; `scale` was forced to 1.
    pub degenerate: bool,
}

impl<T> Normalization<T> {
    /// Maps normalized coordinates back to the original frame.
    pub fn invert(&self, points: ArrayView2<'_, f64>) -> Array2<f64> {
        points.mapv(|x| x * self.scale) + &self.center
    }
}

/// Translates the centroid to the origin and scales so the farthest point
/// has norm exactly 1.
pub fn normalize_points(points: ArrayView2<'_, f64>) -> Result<Normalization<Array2<f64>>> {
    if points.nrows() == 0 {
        return Err(EctError::InvalidParameter("cannot normalize zero points".into()));
    }
    let center = points
        .mean_axis(Axis(0))
        .expect("at least one row checked above");
    let centered = &points - &center;
    let radius = centered
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .fold(0.0_f64, f64::max);
    let (scale, degenerate) = if radius > 0.0 { (radius, false) } else { (1.0, true) };
    let mut value = centered.mapv(|x| x / scale);
    if !degenerate {
        // Pin the farthest point to norm 1 despite rounding in the division.
        for mut row in value.rows_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 1.0 {
                row.mapv_inplace(|x| x / norm);
            }
        }
    }
    Ok(Normalization {
        value,
        center,
        scale,
        degenerate,
    })
}

/// [`normalize_points`] applied to a complex's coordinates.
pub fn normalize_to_unit_ball(
    complex: &GeometricSimplicialComplex,
) -> Result<Normalization<GeometricSimplicialComplex>> {
    let Normalization {
        value,
        center,
        scale,
        degenerate,
    } = normalize_points(complex.coordinates())?;
    Ok(Normalization {
        value: complex.with_coordinates(value)?,
        center,
        scale,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn minimal_edge_is_valid() {
        let coords = array![[0.0, 0.0], [1.0, 0.0]];
        let v = validate(coords.view(), &[vec![0], vec![1], vec![0, 1]]);
        assert!(v.is_empty());
    }

    #[test]
    fn edge_without_vertices_reports_one_closure_violation() {
        let coords = array![[0.0, 0.0], [1.0, 0.0]];
        let v = validate(coords.view(), &[vec![0, 1]]);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::NotClosed { simplex, missing } => {
                assert_eq!(simplex.vertices(), &[0, 1]);
                assert_eq!(missing.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_vertex_is_reported() {
        let coords = array![[0.0], [1.0]];
        let v = validate(coords.view(), &[vec![0], vec![2]]);
        assert_eq!(
            v,
            vec![Violation::VertexOutOfRange {
                simplex: Simplex(vec![2]),
                vertex: 2,
                n: 2
            }]
        );
    }

    #[test]
    fn duplicates_and_unsorted_lists_are_reported() {
        let coords = array![[0.0], [1.0]];
        let v = validate(coords.view(), &[vec![0], vec![0], vec![1, 0], vec![]]);
        assert!(v.contains(&Violation::Duplicate {
            simplex: Simplex(vec![0])
        }));
        assert!(v.contains(&Violation::UnsortedOrRepeated {
            vertices: vec![1, 0]
        }));
        assert!(v.contains(&Violation::EmptySimplex));
    }

    #[test]
    fn new_rejects_invalid_parts() {
        let coords = array![[0.0], [1.0]];
        let err = GeometricSimplicialComplex::new(coords, vec![vec![0, 1]]).unwrap_err();
        assert!(matches!(err, EctError::InvalidComplex(ref v) if v.len() == 1));
    }

    #[test]
    fn euler_of_small_complexes() {
        let single = GeometricSimplicialComplex::from_point_cloud(array![[0.0, 0.0]]).unwrap();
        assert_eq!(single.euler_characteristic(), 1);

        let edge = GeometricSimplicialComplex::new(
            array![[0.0], [1.0]],
            vec![vec![0], vec![1], vec![0, 1]],
        )
        .unwrap();
        assert_eq!(edge.euler_characteristic(), 1);
    }

    #[test]
    fn triangle_mesh_counts() {
        let tet = array![
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0]
        ];
        let k = GeometricSimplicialComplex::from_triangle_mesh(
            tet,
            &[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
        )
        .unwrap();
        assert_eq!(k.stats().counts, vec![4, 6, 4]);
        assert_eq!(k.euler_characteristic(), 2);
        assert!(k.validate().is_empty());

        let disc = GeometricSimplicialComplex::from_triangle_mesh(
            array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            &[[2, 0, 1]],
        )
        .unwrap();
        assert_eq!(disc.stats().counts, vec![3, 3, 1]);
        assert_eq!(disc.euler_characteristic(), 1);

        let two = GeometricSimplicialComplex::from_triangle_mesh(
            array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            &[[0, 1, 2], [1, 2, 3]],
        )
        .unwrap();
        assert_eq!(two.stats().counts, vec![4, 5, 2]);
        assert_eq!(two.euler_characteristic(), 1);
    }

    #[test]
    fn triangle_mesh_errors() {
        let coords = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(GeometricSimplicialComplex::from_triangle_mesh(coords.clone(), &[[0, 1, 3]]).is_err());
        assert!(GeometricSimplicialComplex::from_triangle_mesh(coords, &[[0, 1, 1]]).is_err());
    }

    #[test]
    fn point_cloud_counts_by_index() {
        let k = GeometricSimplicialComplex::from_point_cloud(Array2::from_elem((5, 2), 0.5)).unwrap();
        assert_eq!(k.euler_characteristic(), 5);
        assert_eq!(k.top_dim(), Some(0));
        assert!(GeometricSimplicialComplex::from_point_cloud(Array2::zeros((0, 2))).is_err());
    }

    #[test]
    fn maximal_simplices_are_closed() {
        let coords = Array2::zeros((4, 2));
        let k = GeometricSimplicialComplex::from_maximal_simplices(coords, &[vec![0, 1, 2], vec![2, 3]])
            .unwrap();
        assert_eq!(k.stats().counts, vec![4, 4, 1]);
        assert!(k.validate().is_empty());
    }

    #[test]
    fn normalize_symmetric_pair() {
        let norm = normalize_points(array![[0.0, 0.0], [2.0, 0.0]].view()).unwrap();
        assert_eq!(norm.center, array![1.0, 0.0]);
        assert_eq!(norm.scale, 1.0);
        assert_eq!(norm.value, array![[-1.0, 0.0], [1.0, 0.0]]);
        assert!(!norm.degenerate);
    }

    #[test]
    fn normalize_single_point_is_degenerate() {
        let norm = normalize_points(array![[3.0, 4.0]].view()).unwrap();
        assert!(norm.degenerate);
        assert_eq!(norm.scale, 1.0);
        assert_eq!(norm.value, array![[0.0, 0.0]]);
    }
}
