//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13 (Higham 2005).

use crate::Matrix;

const THETA: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn norm1(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` for a square matrix with finite entries.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let norm = norm1(a);
    if norm == 0.0 {
        return Matrix::identity(n, n);
    }
    for &(m, theta) in &THETA[..4] {
        if norm <= theta {
            return pade_low(a, m);
        }
    }
    let theta13 = THETA[4].1;
    let s = (norm / theta13).log2().ceil().max(0.0) as i32;
    let scaled = a / 2f64.powi(s);
    let mut r = pade13(&scaled);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn solve(u: &Matrix, v: &Matrix) -> Matrix {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for ‖A‖₁ ≤ θ_m")
}

fn pade_low(a: &Matrix, m: usize) -> Matrix {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        _ => &B9,
    };
    let n = a.nrows();
    let ident = Matrix::identity(n, n);
    let a2 = a * a;
    // Even powers I, A², A⁴, ...
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut odd = Matrix::zeros(n, n);
    let mut even = Matrix::zeros(n, n);
    for k in 0..=m / 2 {
        odd += &powers[k] * b[2 * k + 1];
        even += &powers[k] * b[2 * k];
    }
    let u = a * odd;
    solve(&u, &even)
}

fn pade13(a: &Matrix) -> Matrix {
    let b = &B13;
    let n = a.nrows();
    let ident = Matrix::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]);
    let u = a * (inner_u + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1]);
    let inner_v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]);
    let v = inner_v + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    solve(&u, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(x: &Matrix, y: &Matrix) -> f64 {
        (x - y).norm() / y.norm()
    }

    /// Oracle for symmetric matrices: `Q e^Λ Qᵀ`.
    fn sym_oracle(a: &Matrix) -> Matrix {
        let eig = a.clone().symmetric_eigen();
        let d = Matrix::from_diagonal(&eig.eigenvalues.map(f64::exp));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    }

    #[test]
    fn scalar_exponential() {
        let a = Matrix::from_element(1, 1, -1.0);
        assert!((expm(&a)[(0, 0)] - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn nilpotent_is_i_plus_a() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 3.5, 0.0, 0.0]);
        let e = expm(&a);
        assert_eq!(e, Matrix::from_row_slice(2, 2, &[1.0, 3.5, 0.0, 1.0]));
    }

    #[test]
    fn upper_triangular_closed_form() {
        for &(x, y, z) in &[(0.3, 2.0, -1.1), (4.0, -0.7, 1.5), (-9.0, 5.0, -2.0)] {
            let a = Matrix::from_row_slice(2, 2, &[x, y, 0.0, z]);
            let oracle = Matrix::from_row_slice(
                2,
                2,
                &[x.exp(), y * (x.exp() - z.exp()) / (x - z), 0.0, z.exp()],
            );
            assert!(rel_err(&expm(&a), &oracle) < 1e-10);
        }
    }

    #[test]
    fn symmetric_matrices_across_every_degree() {
        // Norms straddle each θ_m so every branch, and the squaring phase, runs.
        for &scale in &[1e-3, 0.1, 0.5, 1.5, 4.0, 20.0, 150.0] {
            let raw = Matrix::from_row_slice(
                3,
                3,
                &[1.0, 0.4, -0.2, 0.4, -0.5, 0.3, -0.2, 0.3, 0.8],
            );
            let a = raw * (scale / 1.7);
            assert!(rel_err(&expm(&a), &sym_oracle(&a)) < 1e-10, "scale {scale}");
        }
    }

    #[test]
    fn rotation_generator() {
        let w = 2.3;
        let a = Matrix::from_row_slice(2, 2, &[0.0, -w, w, 0.0]);
        let e = expm(&a);
        let oracle = Matrix::from_row_slice(2, 2, &[w.cos(), -w.sin(), w.sin(), w.cos()]);
        assert!(rel_err(&e, &oracle) < 1e-10);
    }
}
