use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::driver::rng::standard_normal_pair;
use crate::Vector;

/// Deterministic, roughly uniform unit directions on `S^{dim-1}`.
///
/// - `dim = 1`: `{-1, +1}`.
/// - `dim = 2`: `count` equally spaced angles.
/// - `dim = 3`: Fibonacci lattice.
/// - `dim > 3`: antithetic pairs of normalised Gaussian vectors from a
///   fixed-key stream, so the point set is symmetric under `u ↦ -u`.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vector> {
    let count = count.max(2);
    match dim {
        0 => Vec::new(),
        1 => vec![Vector::from_element(1, -1.0), Vector::from_element(1, 1.0)],
        2 => (0..count)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / count as f64;
                Vector::from_column_slice(&[a.cos(), a.sin()])
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = golden * i as f64;
                    Vector::from_column_slice(&[r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_D1EC_7100_0000 ^ dim as u64);
            let mut out = Vec::with_capacity(count);
            while out.len() < count {
                let mut g = Vec::with_capacity(dim + 1);
                while g.len() < dim {
                    let (a, b) = standard_normal_pair(&mut rng);
                    g.push(a);
                    g.push(b);
                }
                g.truncate(dim);
                let u = Vector::from_vec(g);
                let n = u.norm();
                if n == 0.0 {
                    continue;
                }
                let u = u / n;
                out.push(-&u);
                out.push(u);
            }
            out.truncate(count);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit() {
        for dim in 1..=5 {
            for u in sphere_directions(dim, 64) {
                assert!((u.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn directions_are_balanced() {
        for dim in 2..=5 {
            let us = sphere_directions(dim, 4096);
            let mean = us.iter().fold(Vector::zeros(dim), |acc, u| acc + u) / us.len() as f64;
            assert!(mean.norm() < 1e-3, "dim {dim}: mean {}", mean.norm());
        }
    }
}
