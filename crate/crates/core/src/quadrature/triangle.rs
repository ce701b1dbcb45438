use super::gauss_legendre;
use std::sync::OnceLock;

/// Rule on a triangle in barycentric coordinates; weights sum to one so they
/// scale with the physical area.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

const MAX_DEGREE: usize = 30;

fn symmetric(groups: &[(f64, f64)], centroid: Option<f64>) -> TriangleRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    if let Some(w) = centroid {
        points.push([1.0 / 3.0; 3]);
        weights.push(w);
    }
    for &(a, w) in groups {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            points.push(p);
            weights.push(w);
        }
    }
    TriangleRule { points, weights }
}

/// Stroud conical product, exact for total degree 2n - 2.
fn conical(n: usize) -> TriangleRule {
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let u = x[i];
            let v = x[j] * (1.0 - u);
            points.push([1.0 - u - v, u, v]);
            weights.push(2.0 * w[i] * w[j] * (1.0 - u));
        }
    }
    TriangleRule { points, weights }
}

fn build(degree: usize) -> TriangleRule {
    match degree {
        0 | 1 => symmetric(&[], Some(1.0)),
        2 => symmetric(&[(1.0 / 6.0, 1.0 / 3.0)], None),
        3 | 4 => symmetric(&[(0.445948490915965, 0.223381589678011), (0.091576213509771, 0.109951743655322)], None),
        5 => symmetric(&[(0.470142064105115, 0.132394152788506), (0.101286507323456, 0.125939180544827)], Some(0.225)),
        d => conical((d + 2).div_ceil(2)),
    }
}

/// Rule exact for polynomials of the given total degree.
pub fn triangle_rule(degree: usize) -> &'static TriangleRule {
    static RULES: OnceLock<Vec<TriangleRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=MAX_DEGREE).map(build).collect());
    &rules[degree.min(MAX_DEGREE)]
}
