use super::{FieldError, Result};
use crate::operators::{assemble_energy, energy_quadratic};
use crate::quadrature::QuadratureOrders;
use crate::spaces::MultiTraceSpace;
use crate::C64;
use faer::Mat;

/// Block-diagonal energy form, one real SPD block per domain shared by the
/// electric and magnetic components.
pub struct EnergyForm {
    pub layout: MultiTraceSpace,
    pub blocks: Vec<Mat<f64>>,
}

impl EnergyForm {
    pub fn new(space: &MultiTraceSpace, kappa0: f64, orders: QuadratureOrders) -> Result<Self> {
        let blocks = space.spaces.iter().map(|s| assemble_energy(s, kappa0, orders)).collect::<std::result::Result<_, _>>()?;
        Ok(EnergyForm { layout: space.clone(), blocks })
    }

    /// uᴴEu; for a real symmetric E this is the sum over real and imaginary
    /// parts.
    pub fn quadratic(&self, u: &[C64]) -> Result<f64> {
        if u.len() != self.layout.dim() {
            return Err(FieldError::Dimension(format!("vector of length {} for a space of size {}", u.len(), self.layout.dim())));
        }
        let mut total = 0.0;
        let mut scale = 0.0;
        for (i, e) in self.blocks.iter().enumerate() {
            for r in [self.layout.electric(i), self.layout.magnetic(i)] {
                let x = Mat::from_fn(r.len(), 2, |k, c| if c == 0 { u[r.start + k].re } else { u[r.start + k].im });
                let ex = e * &x;
                for c in 0..2 {
                    for k in 0..r.len() {
                        total += x[(k, c)] * ex[(k, c)];
                        scale += (x[(k, c)] * x[(k, c)]) * e[(k, k)].abs();
                    }
                }
            }
        }
        if total < -1e-12 * scale.max(1.0) {
            return Err(FieldError::Indefinite(total));
        }
        Ok(total.max(0.0))
    }

    pub fn norm(&self, u: &[C64]) -> Result<f64> {
        Ok(self.quadratic(u)?.sqrt())
    }
}

/// √(uᴴEu) evaluated pair by pair; no matrix is formed, which is what makes
/// the norm affordable on the refined level of the BC spaces.
pub fn energy_norm(u: &[C64], space: &MultiTraceSpace, kappa0: f64, orders: QuadratureOrders) -> Result<f64> {
    if u.len() != space.dim() {
        return Err(FieldError::Dimension(format!("vector of length {} for a space of size {}", u.len(), space.dim())));
    }
    let mut total = 0.0;
    for (i, s) in space.spaces.iter().enumerate() {
        let q = energy_quadratic(s, &[&u[space.electric(i)], &u[space.magnetic(i)]], kappa0, orders)?;
        total += q[0] + q[1];
    }
    let scale = u.iter().map(|v| v.norm_sqr()).sum::<f64>();
    if total < -1e-12 * scale.max(1.0) {
        return Err(FieldError::Indefinite(total));
    }
    Ok(total.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_sphere;
    use crate::spaces::rwg_space;

    fn form() -> EnergyForm {
        let mesh = make_sphere(0.5).unwrap();
        let spaces = (0..2).map(|i| rwg_space(&mesh.build_domain_boundary(i).unwrap()).unwrap()).collect();
        EnergyForm::new(&MultiTraceSpace::new(spaces), 2.0, QuadratureOrders::default()).unwrap()
    }

    #[test]
    fn norm_properties() {
        let f = form();
        let n = f.layout.dim();
        assert_eq!(f.norm(&vec![C64::new(0.0, 0.0); n]).unwrap(), 0.0);
        let u: Vec<C64> = (0..n).map(|k| C64::new((k as f64 * 0.3).sin(), (k as f64 * 1.1).cos())).collect();
        let a = C64::new(-1.5, 2.0);
        let au: Vec<C64> = u.iter().map(|v| v * a).collect();
        let (x, y) = (f.norm(&u).unwrap(), f.norm(&au).unwrap());
        assert!((y - a.norm() * x).abs() < 1e-12 * y);
        let mut e = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            e[k] = C64::new(0.0, 1.0);
            assert!(f.norm(&e).unwrap() > 0.0);
            e[k] = C64::new(0.0, 0.0);
        }
        assert!(f.norm(&u[1..]).is_err());
        let free = energy_norm(&u, &f.layout, 2.0, QuadratureOrders::default()).unwrap();
        assert!((free - x).abs() < 1e-12 * x);
    }

    #[test]
    fn blocks_are_positive_definite() {
        let f = form();
        for b in &f.blocks {
            let ev = b.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
            assert!(ev.iter().all(|&v| v > 0.0), "{:?}", ev.iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }
}
