//! Gauss rules, triangle rules and the Sauter–Schwab singular transforms.

mod gauss;
mod sauter_schwab;
mod triangle;

pub use gauss::gauss_legendre;
pub use sauter_schwab::{singular_rule, Relation, SingularRule};
pub use triangle::{triangle_rule, TriangleRule};

/// Rule orders used by pair integration. `bump` raises all of them, which
/// is what the quadrature-stability checks do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureOrders {
    /// Degree of the triangle rule for well-separated pairs.
    pub far: usize,
    /// Degree for pairs at moderate distance.
    pub mid: usize,
    /// Degree for close, non-touching pairs.
    pub near: usize,
    /// Gauss points per dimension in the singular transforms.
    pub singular: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        QuadratureOrders { far: 2, mid: 4, near: 5, singular: 4 }
    }
}

impl QuadratureOrders {
    pub fn bump(self, k: usize) -> Self {
        QuadratureOrders {
            far: self.far + k,
            mid: self.mid + k,
            near: self.near + k,
            singular: self.singular + k,
        }
    }
}
