//! Relative-coordinate transforms for touching triangle pairs.
//!
//! Both triangles are parametrised over {0 ≤ x₂ ≤ x₁ ≤ 1} by
//! χ(x) = P₀ + x₁(P₁ − P₀) + x₂(P₂ − P₁). For an edge-adjacent pair the
//! shared edge must be P₀P₁ on both sides; for a vertex-adjacent pair the
//! shared vertex must be P₀. The weights include every Jacobian of the
//! transform, so Σ w = 1/4 (the squared reference area).

use super::gauss_legendre;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Coincident,
    Edge,
    Vertex,
}

#[derive(Debug, Clone, Default)]
pub struct SingularRule {
    pub x: Vec<[f64; 2]>,
    pub y: Vec<[f64; 2]>,
    pub w: Vec<f64>,
}

const MAX_N: usize = 16;

fn build(rel: Relation, n: usize) -> SingularRule {
    let (g, gw) = gauss_legendre(n);
    let mut r = SingularRule::default();
    let mut push = |x: [f64; 2], y: [f64; 2], w: f64| {
        r.x.push(x);
        r.y.push(y);
        r.w.push(w);
    };
    for a in 0..n {
        let xi = g[a];
        for b in 0..n {
            let e1 = g[b];
            for c in 0..n {
                let e2 = g[c];
                let base = gw[a] * gw[b] * gw[c];
                match rel {
                    Relation::Vertex => {
                        let w = base * xi.powi(3) * e2;
                        for d in 0..n {
                            let e3 = g[d];
                            let wd = w * gw[d];
                            push([xi, xi * e1], [xi * e2, xi * e2 * e3], wd);
                            push([xi * e2, xi * e2 * e1], [xi, xi * e3], wd);
                        }
                    }
                    Relation::Edge => {
                        for d in 0..n {
                            let e3 = g[d];
                            let w1 = base * gw[d] * xi.powi(3) * e1 * e1;
                            let w2 = w1 * e2;
                            let s = |p: [f64; 2]| [xi * p[0], xi * p[1]];
                            push(s([1.0, e1 * e3]), s([1.0 - e1 * e2, e1 * (1.0 - e2)]), w1);
                            push(s([1.0, e1]), s([1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)]), w2);
                            push(s([1.0 - e1 * e2, e1 * (1.0 - e2)]), s([1.0, e1 * e2 * e3]), w2);
                            push(s([1.0 - e1 * e2 * e3, e1 * e2 * (1.0 - e3)]), s([1.0, e1]), w2);
                            push(s([1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)]), s([1.0, e1 * e2]), w2);
                        }
                    }
                    Relation::Coincident => {
                        for d in 0..n {
                            let e3 = g[d];
                            let w = base * gw[d] * xi.powi(3) * e1 * e1 * e2;
                            let s = |p: [f64; 2]| [xi * p[0], xi * p[1]];
                            let pairs = [
                                ([1.0, 1.0 - e1 + e1 * e2], [1.0 - e1 * e2 * e3, 1.0 - e1]),
                                ([1.0, e1 * (1.0 - e2 + e2 * e3)], [1.0 - e1 * e2, e1 * (1.0 - e2)]),
                                ([1.0 - e1 * e2 * e3, e1 * (1.0 - e2 * e3)], [1.0, e1 * (1.0 - e2)]),
                            ];
                            for (p, q) in pairs {
                                push(s(p), s(q), w);
                                push(s(q), s(p), w);
                            }
                        }
                    }
                }
            }
        }
    }
    r
}

pub fn singular_rule(rel: Relation, n: usize) -> &'static SingularRule {
    static RULES: OnceLock<[Vec<OnceLock<SingularRule>>; 3]> = OnceLock::new();
    let all = RULES.get_or_init(|| std::array::from_fn(|_| (0..=MAX_N).map(|_| OnceLock::new()).collect()));
    let n = n.clamp(1, MAX_N);
    let slot = match rel {
        Relation::Coincident => 0,
        Relation::Edge => 1,
        Relation::Vertex => 2,
    };
    all[slot][n].get_or_init(|| build(rel, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    // ∫ over {0 ≤ x₂ ≤ x₁ ≤ 1} of x₁^a x₂^b = 1 / ((b+1)(a+b+2))
    fn tri_moment(a: i32, b: i32) -> f64 {
        1.0 / ((b + 1) as f64 * (a + b + 2) as f64)
    }

    // The transforms are bijections of the product domain, so any smooth
    // integrand must be reproduced; polynomial moments separate exactly.
    #[test]
    fn reproduces_polynomial_moments() {
        for rel in [Relation::Coincident, Relation::Edge, Relation::Vertex] {
            let r = singular_rule(rel, 6);
            assert!((r.w.iter().sum::<f64>() - 0.25).abs() < 1e-14);
            for (a, b, c, d) in [(1, 0, 0, 0), (0, 1, 2, 0), (2, 1, 0, 1), (1, 1, 1, 1), (0, 0, 3, 2)] {
                let s: f64 = (0..r.w.len())
                    .map(|k| r.w[k] * r.x[k][0].powi(a) * r.x[k][1].powi(b) * r.y[k][0].powi(c) * r.y[k][1].powi(d))
                    .sum();
                let exact = tri_moment(a, b) * tri_moment(c, d);
                assert!((s - exact).abs() < 1e-12 * exact.abs().max(1.0), "{rel:?} {a}{b}{c}{d}: {s} vs {exact}");
            }
        }
    }

    #[test]
    fn points_stay_in_reference_triangle() {
        for rel in [Relation::Coincident, Relation::Edge, Relation::Vertex] {
            let r = singular_rule(rel, 3);
            for p in r.x.iter().chain(&r.y) {
                assert!(p[1] >= 0.0 && p[1] <= p[0] && p[0] <= 1.0);
            }
        }
    }
}
