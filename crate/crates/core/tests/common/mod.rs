#![allow(dead_code)]

use ndarray::Array2;

use ectkit::fixtures::Solid;
use ectkit::sampling::{generate_double_annulus, Rng, Stream};
use ectkit::GeometricSimplicialComplex;

/// Random complex of dimension at most 2 on 4..=8 points inside the unit
/// ball, with at most `max_simplices` simplices.
pub fn random_complex(seed: u64, d: usize, max_simplices: usize) -> GeometricSimplicialComplex {
    let mut rng = Rng::new(seed, Stream::Misc);
    let n = 4 + rng.index(5);
    let mut coords = Array2::zeros((n, d));
    for v in coords.iter_mut() {
        *v = rng.uniform_in(-0.7, 0.7);
    }
    let mut maximal: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut complex = GeometricSimplicialComplex::from_maximal_simplices(coords.clone(), &maximal).unwrap();
    for _ in 0..40 {
        let size = 2 + rng.index(2);
        let mut s: Vec<usize> = Vec::new();
        while s.len() < size {
            let v = rng.index(n);
            if !s.contains(&v) {
                s.push(v);
            }
        }
        maximal.push(s);
        let candidate = GeometricSimplicialComplex::from_maximal_simplices(coords.clone(), &maximal).unwrap();
        if candidate.num_simplices() > max_simplices {
            maximal.pop();
            break;
        }
        complex = candidate;
    }
    complex
}

pub fn platonic_complexes() -> Vec<(&'static str, GeometricSimplicialComplex)> {
    Solid::ALL
        .iter()
        .map(|s| (s.name(), s.polyhedron().complex()))
        .collect()
}

/// Platonic solids, a double annulus, and a few random complexes in 2D and 3D.
pub fn fixture_suite() -> Vec<(String, GeometricSimplicialComplex)> {
    let mut out: Vec<(String, GeometricSimplicialComplex)> = platonic_complexes()
        .into_iter()
        .map(|(name, k)| (name.to_string(), k))
        .collect();
    out.push((
        "double annulus".into(),
        GeometricSimplicialComplex::from_point_cloud(generate_double_annulus(100, 0).unwrap()).unwrap(),
    ));
    for seed in 0..3 {
        out.push((format!("random 2d #{seed}"), random_complex(seed, 2, 30)));
        out.push((format!("random 3d #{seed}"), random_complex(100 + seed, 3, 30)));
    }
    out
}

/// Uniform random rotation in 2 or 3 dimensions.
pub fn random_rotation(d: usize, rng: &mut Rng) -> Array2<f64> {
    match d {
        2 => {
            let a = rng.uniform_in(0.0, std::f64::consts::TAU);
            ndarray::array![[a.cos(), -a.sin()], [a.sin(), a.cos()]]
        }
        3 => {
            // Unit quaternion from four normals.
            let mut q = [rng.normal(), rng.normal(), rng.normal(), rng.normal()];
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.iter_mut().for_each(|x| *x /= norm);
            let [w, x, y, z] = q;
            ndarray::array![
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
                [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
                [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
            ]
        }
        _ => panic!("rotations only in 2 or 3 dimensions"),
    }
}
