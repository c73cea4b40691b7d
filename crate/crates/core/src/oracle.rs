//! Reference computations that avoid the closed forms they are used to check.
//!
//! The mixture integral over the probability simplex is evaluated by direct
//! quadrature after a change of variables (`θ = sin²φ` for binary columns, a
//! uniform point on the sphere for ternary ones). Under those maps the
//! Jeffreys weight becomes uniform and the integrand a trigonometric
//! polynomial, so equispaced and Gauss-Legendre rules are exact up to rounding.

/// `p_U(x^t | y^t)` for a binary input alphabet with `y_size ∈ {1, 2}` contexts,
/// by tensor-product quadrature over one angle per output column.
pub fn binary_mixture_prob(xs: &[usize], ys: &[usize], y_size: usize) -> f64 {
    assert!(y_size == 1 || y_size == 2, "quadrature oracle supports one or two contexts");
    assert_eq!(xs.len(), ys.len());
    let n = (2 * xs.len() + 2).max(64);
    let nodes: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            let s = phi.sin();
            (s * s, 1.0 - s * s)
        })
        .collect();
    let integrand = |theta: [(f64, f64); 2]| -> f64 {
        xs.iter().zip(ys).fold(1.0, |acc, (&x, &y)| {
            let (p0, p1) = theta[y];
            acc * if x == 0 { p0 } else { p1 }
        })
    };
    let mut total = 0.0;
    if y_size == 1 {
        for &a in &nodes {
            total += integrand([a, a]);
        }
        total / n as f64
    } else {
        for &a in &nodes {
            for &b in &nodes {
                total += integrand([a, b]);
            }
        }
        total / (n * n) as f64
    }
}

/// Dirichlet(1/2,1/2,1/2) mixture probability of a single column with counts `n`,
/// integrating over the unit sphere with Gauss-Legendre in `z` and midpoints in azimuth.
pub fn ternary_column_mixture_prob(n: &[u32; 3]) -> f64 {
    let degree = 2 * (n[0] + n[1] + n[2]) as usize;
    let (z_nodes, z_weights) = gauss_legendre(degree / 2 + 2);
    let nb = (degree + 2).max(64);
    let mut total = 0.0;
    for (&z, &wz) in z_nodes.iter().zip(&z_weights) {
        let r2 = 1.0 - z * z;
        let mut ring = 0.0;
        for j in 0..nb {
            let beta = std::f64::consts::TAU * (j as f64 + 0.5) / nb as f64;
            let (s, c) = beta.sin_cos();
            let theta = [r2 * c * c, r2 * s * s, z * z];
            ring += theta.iter().zip(n).map(|(&t, &k)| t.powi(k as i32)).product::<f64>();
        }
        total += 0.5 * wz * ring / nb as f64;
    }
    total
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Capacity of a binary-input channel by grid search over `q(1)`.
pub fn binary_input_capacity_grid(forward: &[Vec<f64>], steps: usize) -> f64 {
    (0..=steps)
        .map(|k| {
            let a = k as f64 / steps as f64;
            let q = [1.0 - a, a];
            let ny = forward[0].len();
            let mut info = 0.0;
            for y in 0..ny {
                let r: f64 = (0..2).map(|x| q[x] * forward[x][y]).sum();
                for x in 0..2 {
                    let p = forward[x][y];
                    if q[x] > 0.0 && p > 0.0 {
                        info += q[x] * p * (p / r).log2();
                    }
                }
            }
            info
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(&x, &w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn jeffreys_single_symbol_is_half() {
        assert!((binary_mixture_prob(&[1], &[0], 1) - 0.5).abs() < 1e-14);
        assert!((binary_mixture_prob(&[], &[], 2) - 1.0).abs() < 1e-14);
        assert!((ternary_column_mixture_prob(&[1, 0, 0]) - 1.0 / 3.0).abs() < 1e-14);
    }
}
