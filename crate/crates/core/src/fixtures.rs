//! The five platonic solids, centered and scaled to the unit sphere.
//!
//! Faces are recovered from the vertex set as the facets of its convex hull,
//! so pentagons and squares stay polygonal in [`Polyhedron::faces`]; the
//! simplicial complex fan-triangulates them.

use ndarray::Array2;

use crate::complex::{normalize_points, GeometricSimplicialComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solid {
    Tetrahedron,
    Cube,
    Octahedron,
    Dodecahedron,
    Icosahedron,
}

impl Solid {
    pub const ALL: [Solid; 5] = [
        Solid::Tetrahedron,
        Solid::Cube,
        Solid::Octahedron,
        Solid::Dodecahedron,
        Solid::Icosahedron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solid::Tetrahedron => "tetrahedron",
            Solid::Cube => "cube",
            Solid::Octahedron => "octahedron",
            Solid::Dodecahedron => "dodecahedron",
            Solid::Icosahedron => "icosahedron",
        }
    }

    fn raw_vertices(self) -> Vec<[f64; 3]> {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let signs = [1.0, -1.0];
        let mut out = Vec::new();
        match self {
            Solid::Tetrahedron => {
                out = vec![
                    [1.0, 1.0, 1.0],
                    [1.0, -1.0, -1.0],
                    [-1.0, 1.0, -1.0],
                    [-1.0, -1.0, 1.0],
                ];
            }
            Solid::Cube => {
                for a in signs {
                    for b in signs {
                        for c in signs {
                            out.push([a, b, c]);
                        }
                    }
                }
            }
            Solid::Octahedron => {
                for s in signs {
                    out.push([s, 0.0, 0.0]);
                    out.push([0.0, s, 0.0]);
                    out.push([0.0, 0.0, s]);
                }
            }
            Solid::Dodecahedron => {
                for a in signs {
                    for b in signs {
                        for c in signs {
                            out.push([a, b, c]);
                        }
                    }
                }
                for a in signs {
                    for b in signs {
                        out.push([0.0, a / phi, b * phi]);
                        out.push([a / phi, b * phi, 0.0]);
                        out.push([a * phi, 0.0, b / phi]);
                    }
                }
            }
            Solid::Icosahedron => {
                for a in signs {
                    for b in signs {
                        out.push([0.0, a, b * phi]);
                        out.push([a, b * phi, 0.0]);
                        out.push([a * phi, 0.0, b]);
                    }
                }
            }
        }
        out
    }

    pub fn polyhedron(self) -> Polyhedron {
        let raw = self.raw_vertices();
        let flat: Vec<f64> = raw.iter().flatten().copied().collect();
        let coords = Array2::from_shape_vec((raw.len(), 3), flat).expect("rows of three");
        let coords = normalize_points(coords.view())
            .expect("nonempty vertex set")
            .value;
        let faces = hull_faces(&coords);
        Polyhedron {
            solid: self,
            coordinates: coords,
            faces,
        }
    }
}

/// A convex polyhedron with polygonal faces, vertices listed in cyclic order.
#[derive(Debug, Clone)]
pub struct Polyhedron {
    pub solid: Solid,
    pub coordinates: Array2<f64>,
    pub faces: Vec<Vec<usize>>,
}

impl Polyhedron {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| {
                (0..f.len()).map(move |i| {
                    let (a, b) = (f[i], f[(i + 1) % f.len()]);
                    (a.min(b), a.max(b))
                })
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    /// `(V, E, F)` counting each polygon as one face.
    pub fn cell_counts(&self) -> (usize, usize, usize) {
        (self.coordinates.nrows(), self.edges().len(), self.faces.len())
    }

    pub fn cell_euler_characteristic(&self) -> i64 {
        let (v, e, f) = self.cell_counts();
        v as i64 - e as i64 + f as i64
    }

    /// Fan triangulation of every face.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        self.faces
            .iter()
            .flat_map(|f| (1..f.len() - 1).map(move |i| [f[0], f[i], f[i + 1]]))
            .collect()
    }

    pub fn complex(&self) -> GeometricSimplicialComplex {
        GeometricSimplicialComplex::from_triangle_mesh(self.coordinates.clone(), &self.triangles())
            .expect("hull faces index valid vertices")
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Facets of the convex hull of a small point set, by brute force over
/// vertex triples.
fn hull_faces(coords: &Array2<f64>) -> Vec<Vec<usize>> {
    const EPS: f64 = 1e-9;
    let pts: Vec<[f64; 3]> = coords.rows().into_iter().map(|r| [r[0], r[1], r[2]]).collect();
    let n = pts.len();
    let mut faces: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let normal = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
                let len = dot(normal, normal).sqrt();
                if len < EPS {
                    continue;
                }
                let normal = [normal[0] / len, normal[1] / len, normal[2] / len];
                let offset = dot(normal, pts[a]);
                let side: Vec<f64> = pts.iter().map(|p| dot(normal, *p) - offset).collect();
                let normal = if side.iter().all(|&s| s <= EPS) {
                    normal
                } else if side.iter().all(|&s| s >= -EPS) {
                    [-normal[0], -normal[1], -normal[2]]
                } else {
                    continue;
                };
                let mut on_plane: Vec<usize> = (0..n).filter(|&i| side[i].abs() <= EPS).collect();
                on_plane.sort_unstable();
                if faces.iter().any(|f| {
                    let mut g = f.clone();
                    g.sort_unstable();
                    g == on_plane
                }) {
                    continue;
                }
                faces.push(cyclic_order(&pts, &on_plane, normal));
            }
        }
    }
    faces
}

/// Orders coplanar points counterclockwise around their centroid, seen from
/// outside along `normal`.
fn cyclic_order(pts: &[[f64; 3]], idx: &[usize], normal: [f64; 3]) -> Vec<usize> {
    let m = idx.len() as f64;
    let mut centroid = [0.0; 3];
    for &i in idx {
        for c in 0..3 {
            centroid[c] += pts[i][c] / m;
        }
    }
    let u = sub(pts[idx[0]], centroid);
    let ulen = dot(u, u).sqrt();
    let u = [u[0] / ulen, u[1] / ulen, u[2] / ulen];
    let v = cross(normal, u);
    let mut keyed: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| {
            let r = sub(pts[i], centroid);
            (dot(r, v).atan2(dot(r, u)), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, i)| i).collect()
}
