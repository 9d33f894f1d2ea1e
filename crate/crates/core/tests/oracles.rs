//! Brute-force and independent-method cross checks.

use forge_core::graph::{petersen, Girth, VertexSet};
use forge_core::matching::perfect_matching;
use forge_core::spectral::{eigensystem, EigenOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{adjacency, brute_girth, brute_has_perfect_matching, dense, jacobi, random_graph};

#[test]
fn girth_matches_cycle_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6172);
    let mut mismatches = 0;
    let mut finite = 0;
    for i in 0..600 {
        let n = 1 + i % 12;
        let p = [0.15, 0.25, 0.4, 0.6][i % 4];
        let g = random_graph(&mut rng, n, p);
        let expected = brute_girth(&g);
        finite += usize::from(expected.is_some());
        let got = g.girth();
        let same = match expected {
            Some(k) => got == Girth::Finite(k),
            None => got == Girth::Infinite,
        };
        if !same {
            mismatches += 1;
            eprintln!(
                "mismatch on {:?}: bfs {got}, brute {expected:?}",
                g.edges().collect::<Vec<_>>()
            );
        }
    }
    assert_eq!(mismatches, 0);
    assert!(finite > 300);
}

#[test]
fn known_girths() {
    assert_eq!(brute_girth(&petersen()), Some(5));
    assert_eq!(petersen().girth(), Girth::Finite(5));
}

#[test]
fn blossom_matches_exhaustive_matching_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d61);
    let mut mismatches = 0;
    let mut with_matching = 0;
    for i in 0..600 {
        let n = 1 + i % 10;
        let p = [0.2, 0.35, 0.5, 0.7][i % 4];
        let g = random_graph(&mut rng, n, p);
        let exists = brute_has_perfect_matching(&adjacency(&g), &mut vec![false; n]);
        let seed = (i % 3 == 0).then_some(i as u64);
        let found = perfect_matching(&g, seed);
        if let Some(m) = &found {
            assert!(m.is_perfect_in(&g));
        }
        with_matching += usize::from(exists);
        if exists != found.is_some() {
            mismatches += 1;
            eprintln!(
                "mismatch on {:?}: brute {exists}",
                g.edges().collect::<Vec<_>>()
            );
        }
    }
    assert_eq!(mismatches, 0);
    assert!(with_matching > 100);
}

#[test]
fn bipartite_matches_two_colouring_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6270);
    for i in 0..400 {
        let n = 1 + i % 8;
        let g = random_graph(&mut rng, n, [0.2, 0.3, 0.5][i % 3]);
        let edges: Vec<_> = g.edges().collect();
        let brute = (0u32..1 << n).any(|mask| {
            edges
                .iter()
                .all(|&(u, v)| (mask >> u & 1) != (mask >> v & 1))
        });
        assert_eq!(g.is_bipartite(), brute, "{edges:?}");
    }
}

#[test]
fn petersen_spectrum_against_jacobi() {
    let g = petersen();
    let eig = eigensystem(&g, &EigenOptions::default()).unwrap();
    let oracle = jacobi(dense(&g));
    let known = [-2.0, -2.0, -2.0, -2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0];
    for ((x, y), z) in eig.values().iter().zip(&oracle).zip(known) {
        assert!((x - y).abs() < 1e-8, "{x} vs jacobi {y}");
        assert!((x - z).abs() < 1e-8, "{x} vs {z}");
    }
    let dims: Vec<usize> = eig.groups().iter().map(|&(lo, hi)| hi - lo).collect();
    assert_eq!(dims, vec![4, 5, 1]);
}

#[test]
fn random_spectra_against_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a63);
    for i in 0..40 {
        let g = random_graph(&mut rng, 4 + i % 20, 0.3);
        let eig = eigensystem(&g, &EigenOptions::default()).unwrap();
        let oracle = jacobi(dense(&g));
        for (x, y) in eig.values().iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

fn top_gram_eigenvalue(basis: &[Vec<f64>], s: &VertexSet) -> f64 {
    let k = basis.len();
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| s.iter().map(|x| basis[i][x] * basis[j][x]).sum())
                .collect()
        })
        .collect();
    *jacobi(gram).last().unwrap()
}

/// Orthonormal columns from a random Gaussian matrix by Gram-Schmidt.
fn random_rotation(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < k {
        let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    cols
}

#[test]
fn petersen_cycle_mass_against_sampling_and_rotation() {
    let g = petersen();
    let eig = eigensystem(&g, &EigenOptions::default()).unwrap();
    let s: VertexSet = (0..5).collect();
    let records = eig.eigenspace_masses(&s);
    let one = records
        .iter()
        .find(|r| (r.eigenvalue - 1.0).abs() < 1e-8)
        .unwrap();
    assert_eq!(one.eigenspace_dim, 5);
    assert!((one.witness_mass(&s) - one.mass).abs() < 1e-10);
    assert!(one.witness_residual(&g) < 1e-8);

    let (lo, hi) = eig.groups()[1];
    let basis: Vec<Vec<f64>> = (lo..hi).map(|k| eig.vector(k).to_vec()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d73);
    let mut best: f64 = 0.0;
    for _ in 0..50_000 {
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mass: f64 = s
            .iter()
            .map(|x| {
                let w: f64 = c.iter().zip(&basis).map(|(ci, b)| ci * b[x]).sum::<f64>() / norm;
                w * w
            })
            .sum();
        assert!(mass <= one.mass + 1e-10);
        best = best.max(mass);
    }
    assert!(best > one.mass - 0.02, "sampled {best} vs {}", one.mass);

    for _ in 0..20 {
        let q = random_rotation(&mut rng, 5);
        let rotated: Vec<Vec<f64>> = q
            .iter()
            .map(|col| {
                (0..g.vertex_count())
                    .map(|x| col.iter().zip(&basis).map(|(c, b)| c * b[x]).sum())
                    .collect()
            })
            .collect();
        assert!((top_gram_eigenvalue(&rotated, &s) - one.mass).abs() < 1e-8);
    }
}

#[test]
fn simple_eigenvalue_mass_is_squared_norm() {
    let g = petersen();
    let eig = eigensystem(&g, &EigenOptions::default()).unwrap();
    let s: VertexSet = [0, 2, 7].into_iter().collect();
    let top = eig
        .eigenspace_masses(&s)
        .into_iter()
        .find(|r| (r.eigenvalue - 3.0).abs() < 1e-8)
        .unwrap();
    assert_eq!(top.eigenspace_dim, 1);
    let v = eig.vector(eig.len() - 1);
    let direct: f64 = s.iter().map(|x| v[x] * v[x]).sum();
    assert!((top.mass - direct).abs() < 1e-12);
    assert!((top.mass - 0.3).abs() < 1e-12);
}
