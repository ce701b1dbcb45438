use super::{FieldError, Result};
use crate::operators::Material;
use crate::C64;

/// Mie coefficients a_n, b_n (n = 1..=N) of a homogeneous sphere in the
/// e^{−iωt} convention of Bohren & Huffman. Only |S|² is used downstream,
/// which is the same in either time convention.
#[derive(Debug, Clone)]
pub struct MieSeries {
    pub size_parameter: f64,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

pub fn default_truncation(x: f64) -> usize {
    (x + 4.0 * x.cbrt() + 2.0).ceil() as usize
}

impl MieSeries {
    /// `kappa0·radius` is scaled by the background index.
    pub fn new(radius: f64, sphere: Material, background: Material, kappa0: f64, terms: Option<usize>) -> Result<Self> {
        if !(radius > 0.0 && kappa0 > 0.0) {
            return Err(FieldError::Parameter("radius and κ₀ must be positive".into()));
        }
        let nb = (background.eps_r * background.mu_r).sqrt();
        if nb.im.abs() > 1e-14 {
            return Err(FieldError::Parameter("lossy background is not supported".into()));
        }
        let x = kappa0 * radius * nb.re;
        if x > 500.0 {
            return Err(FieldError::Series(format!("size parameter {x} too large")));
        }
        let m = (sphere.eps_r * sphere.mu_r).sqrt() / nb.re;
        let mu_ratio = sphere.mu_r / background.mu_r;
        let n_terms = terms.unwrap_or_else(|| default_truncation(x)).max(1);

        // logarithmic derivative D_n(mx) by downward recurrence
        let mx = m * x;
        let start = n_terms.max(mx.norm().ceil() as usize) + 16;
        let mut d = vec![C64::new(0.0, 0.0); start + 1];
        for n in (1..=start).rev() {
            let q = n as f64 / mx;
            d[n - 1] = q - 1.0 / (d[n] + q);
        }

        // Riccati–Bessel ψ_n = x j_n, χ_n = −x y_n by upward recurrence
        let (mut psi0, mut psi1) = (x.cos(), x.sin());
        let (mut chi0, mut chi1) = (-x.sin(), x.cos());
        let mut a = Vec::with_capacity(n_terms);
        let mut b = Vec::with_capacity(n_terms);
        for n in 1..=n_terms {
            let nf = n as f64;
            let psi = (2.0 * nf - 1.0) / x * psi1 - psi0;
            let chi = (2.0 * nf - 1.0) / x * chi1 - chi0;
            let xi = C64::new(psi, -chi);
            let xi1 = C64::new(psi1, -chi1);
            // ψ'_n = ψ_{n−1} − nψ_n/x, same for ξ
            let dpsi = psi1 - nf * psi / x;
            let dxi = xi1 - xi * (nf / x);
            let dn = d[n];
            a.push((m * dpsi - mu_ratio * dn * psi) / (m * dxi - mu_ratio * dn * xi));
            b.push((mu_ratio * dpsi - m * dn * psi) / (mu_ratio * dxi - m * dn * xi));
            psi0 = psi1;
            psi1 = psi;
            chi0 = chi1;
            chi1 = chi;
        }
        let tail = a.last().unwrap().norm() + b.last().unwrap().norm();
        let head = a.iter().chain(&b).map(|v| v.norm()).fold(0.0, f64::max);
        if !tail.is_finite() || (terms.is_none() && tail > 1e-6 * head + 1e-15) {
            return Err(FieldError::Series(format!("series tail {tail:.3e} did not decay (x = {x})")));
        }
        Ok(MieSeries { size_parameter: x, a, b })
    }

    /// Amplitude functions S₁(θ), S₂(θ), θ measured from the direction of
    /// incidence.
    pub fn amplitudes(&self, theta: f64) -> (C64, C64) {
        let mu = theta.cos();
        let (mut s1, mut s2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let (mut pi0, mut pi1) = (0.0, 1.0);
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let n = (k + 1) as f64;
            let pi = if k == 0 { 1.0 } else { ((2.0 * n - 1.0) * mu * pi1 - n * pi0) / (n - 1.0) };
            let tau = n * mu * pi - (n + 1.0) * if k == 0 { 0.0 } else { pi1 };
            let f = (2.0 * n + 1.0) / (n * (n + 1.0));
            s1 += (a * pi + b * tau) * f;
            s2 += (a * tau + b * pi) * f;
            if k > 0 {
                pi0 = pi1;
            }
            pi1 = pi;
        }
        (s1, s2)
    }

    /// Bistatic RCS in the plane containing the incident polarisation.
    pub fn rcs_e_plane(&self, theta: f64, kappa: f64) -> f64 {
        4.0 * std::f64::consts::PI * self.amplitudes(theta).1.norm_sqr() / (kappa * kappa)
    }

    pub fn rcs_h_plane(&self, theta: f64, kappa: f64) -> f64 {
        4.0 * std::f64::consts::PI * self.amplitudes(theta).0.norm_sqr() / (kappa * kappa)
    }
}

/// E-plane bistatic RCS at the given angles from the forward direction.
pub fn mie_rcs(radius: f64, sphere: Material, background: Material, kappa0: f64, thetas: &[f64]) -> Result<Vec<f64>> {
    let s = MieSeries::new(radius, sphere, background, kappa0, None)?;
    let k = kappa0 * (background.eps_r * background.mu_r).sqrt().re;
    Ok(thetas.iter().map(|&t| s.rcs_e_plane(t, k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Tabulated with scipy's spherical Bessel functions through the direct
    // (non-logarithmic-derivative) form of the coefficients.
    const ANGLES: [f64; 5] = [0.0, 45.0, 90.0, 135.0, 180.0];
    const EPS3_K2: [(f64, f64); 5] = [
        (4.696932535562e+01, 4.696932535562e+01),
        (1.913698781904e+01, 2.404023617879e+01),
        (6.636752021901e+00, 2.879582536801e+00),
        (3.374515262578e+00, 2.545514090114e-01),
        (2.065303928267e+00, 2.065303928267e+00),
    ];
    const EPS3_K6: [(f64, f64); 5] = [
        (1.283046978444e+02, 1.283046978444e+02),
        (5.284915602089e+00, 4.280081238821e-02),
        (1.483565304991e+00, 1.348790908252e+00),
        (4.604625404097e-01, 1.619976821077e+00),
        (3.543038574778e+01, 3.543038574778e+01),
    ];
    const MATCHED_K2: [f64; 4] = [8.162837587362e+01, 2.958475574153e+01, 8.750131279771e+00, 2.437092559291e+00];

    fn check(k0: f64, sphere: Material, table: &[(f64, f64)]) {
        let s = MieSeries::new(1.0, sphere, Material::vacuum(), k0, Some(default_truncation(k0) + 10)).unwrap();
        for (deg, (e, h)) in ANGLES.iter().zip(table) {
            let t = deg.to_radians();
            let (ce, ch) = (s.rcs_e_plane(t, k0), s.rcs_h_plane(t, k0));
            assert!((ce - e).abs() < 1e-9 * e.max(1.0), "E {deg}: {ce} vs {e}");
            assert!((ch - h).abs() < 1e-9 * h.max(1.0), "H {deg}: {ch} vs {h}");
        }
    }

    #[test]
    fn matches_tabulated_dielectric_spheres() {
        check(2.0, Material::real(3.0, 1.0).unwrap(), &EPS3_K2);
        check(6.0, Material::real(3.0, 1.0).unwrap(), &EPS3_K6);
    }

    #[test]
    fn impedance_matched_sphere_has_no_backscatter() {
        let s = MieSeries::new(1.0, Material::real(2.0, 2.0).unwrap(), Material::vacuum(), 2.0, None).unwrap();
        for (deg, v) in ANGLES.iter().zip(MATCHED_K2) {
            let c = s.rcs_e_plane(deg.to_radians(), 2.0);
            assert!((c - v).abs() < 1e-6 * v, "{deg}: {c} vs {v}");
        }
        assert!(s.rcs_e_plane(std::f64::consts::PI, 2.0) < 1e-20);
    }

    #[test]
    fn no_contrast_no_scattering() {
        let r = mie_rcs(1.0, Material::vacuum(), Material::vacuum(), 3.0, &[0.0, 1.0, 2.0]).unwrap();
        assert!(r.iter().all(|&v| v < 1e-25), "{r:?}");
    }

    #[test]
    fn truncation_tail() {
        let m = Material::real(3.0, 1.0).unwrap();
        let n = default_truncation(6.0);
        let a = MieSeries::new(1.0, m, Material::vacuum(), 6.0, Some(n)).unwrap();
        let b = MieSeries::new(1.0, m, Material::vacuum(), 6.0, Some(n + 5)).unwrap();
        for k in 0..=18 {
            let t = k as f64 * 10f64.to_radians();
            let (x, y) = (a.rcs_e_plane(t, 6.0), b.rcs_e_plane(t, 6.0));
            assert!((x - y).abs() < 1e-8 * y, "{t}: {x} vs {y}");
        }
    }
}
