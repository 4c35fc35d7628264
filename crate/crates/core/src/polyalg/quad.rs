//! Gauss-type quadrature rules.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use super::refgeom::{apex_height, duffy, duffy_jacobian, RefDomain, RECT_Y_HI, RECT_Y_LO};

/// Legendre polynomial `L_n(x)` and its derivative.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-14 {
        // endpoint value of L_n'
        let s = if x > 0.0 { 1.0 } else if n % 2 == 0 { -1.0 } else { 1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1-x)^α (1+x)^β` (Golub–Welsch).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut t = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        t[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let b2 = if k == 0 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * j * (j + alpha) * (j + beta) * (j + ab)
                    / ((2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0))
            };
            t[(k, k + 1)] = b2.sqrt();
            t[(k + 1, k)] = b2.sqrt();
        }
    }
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0)).exp();
    let eig = SymmetricEigen::new(t);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Gauss–Jacobi rule on `[0, 1]` for the weight `(1-t)^α t^β`.
pub fn gauss_jacobi_unit(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_jacobi(n, alpha, beta);
    let s = 0.5f64.powf(alpha + beta + 1.0);
    (x.iter().map(|x| 0.5 * (x + 1.0)).collect(), w.iter().map(|w| w * s).collect())
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    (x.iter().map(|x| a + h * (x + 1.0)).collect(), w.iter().map(|w| w * h).collect())
}

/// Gauss–Lobatto–Legendre rule with `p+1` nodes (roots of `(1-x²)L_p'(x)`).
pub fn gauss_lobatto_nodes(p: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(p >= 1);
    let mut nodes = vec![-1.0];
    if p >= 2 {
        let (interior, _) = gauss_jacobi(p - 1, 1.0, 1.0);
        for mut x in interior {
            // polish as roots of L_p'
            for _ in 0..50 {
                let (lp, dlp) = legendre_with_derivative(p, x);
                // L_p'' from the Legendre ODE: (1-x²)L'' = 2xL' - p(p+1)L
                let d2 = (2.0 * x * dlp - (p * (p + 1)) as f64 * lp) / (1.0 - x * x);
                let dx = dlp / d2;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
        }
    }
    nodes.push(1.0);
    let pf = p as f64;
    let weights = nodes
        .iter()
        .map(|&x| {
            let (lp, _) = legendre_with_derivative(p, x);
            2.0 / (pf * (pf + 1.0) * lp * lp)
        })
        .collect();
    (nodes, weights)
}

/// Nodes (padded to 3 coordinates) and weights of a rule on a reference domain.
#[derive(Clone, Debug)]
pub struct QuadRule {
    pub domain: RefDomain,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exactness: u32,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// Rule exact for polynomials of total degree `order` on `domain`.
///
/// Boxes use tensor Gauss–Legendre; the triangle is the Duffy image of a
/// rectangle rule; the tetrahedron collapses a triangle × interval rule
/// onto the apex.
pub fn make_quadrature(domain: RefDomain, order: u32) -> QuadRule {
    let order = order.max(1);
    let n = order as usize / 2 + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match domain {
        RefDomain::Rectangle => {
            let (xs, wx) = gauss_legendre_on(n, -1.0, 1.0);
            let (ys, wy) = gauss_legendre_on(n, RECT_Y_LO, RECT_Y_HI);
            for (x, a) in xs.iter().zip(&wx) {
                for (y, b) in ys.iter().zip(&wy) {
                    points.push([*x, *y, 0.0]);
                    weights.push(a * b);
                }
            }
        }
        RefDomain::Triangle => {
            let (xs, wx) = gauss_legendre_on(n, -1.0, 1.0);
            let (ys, wy) = gauss_legendre_on((order as usize + 1) / 2 + 1, RECT_Y_LO, RECT_Y_HI);
            for (y, b) in ys.iter().zip(&wy) {
                for (x, a) in xs.iter().zip(&wx) {
                    let q = duffy([*x, *y]);
                    points.push([q[0], q[1], 0.0]);
                    weights.push(a * b * duffy_jacobian(*y));
                }
            }
        }
        RefDomain::Tetrahedron => {
            let h = apex_height();
            let tri = make_quadrature(RefDomain::Triangle, order);
            let (ss, ws) = gauss_jacobi_unit(n, 2.0, 0.0);
            for (s, a) in ss.iter().zip(&ws) {
                for (q, b) in tri.points.iter().zip(&tri.weights) {
                    points.push([(1.0 - s) * q[0], (1.0 - s) * q[1], h * s]);
                    weights.push(a * b * h);
                }
            }
        }
        RefDomain::Prism => {
            let tri = make_quadrature(RefDomain::Triangle, order);
            let (zs, wz) = gauss_legendre_on(n, 0.0, 1.0);
            for (z, a) in zs.iter().zip(&wz) {
                for (q, b) in tri.points.iter().zip(&tri.weights) {
                    points.push([q[0], q[1], *z]);
                    weights.push(a * b);
                }
            }
        }
    }
    QuadRule { domain, points, weights, exactness: order }
}
