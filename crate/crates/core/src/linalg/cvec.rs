use crate::{Point, C64};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Complex 3-vector for field values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CVec3 {
    pub x: C64,
    pub y: C64,
    pub z: C64,
}

impl CVec3 {
    pub const ZERO: CVec3 = CVec3 { x: C64::new(0.0, 0.0), y: C64::new(0.0, 0.0), z: C64::new(0.0, 0.0) };

    pub fn new(x: C64, y: C64, z: C64) -> Self {
        CVec3 { x, y, z }
    }

    pub fn from_real(p: Point) -> Self {
        CVec3::new(p.x.into(), p.y.into(), p.z.into())
    }

    /// Bilinear dot product with a real vector.
    pub fn dot_real(&self, p: Point) -> C64 {
        self.x * p.x + self.y * p.y + self.z * p.z
    }

    /// Bilinear (unconjugated) dot product.
    pub fn dot(&self, o: &CVec3) -> C64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &CVec3) -> CVec3 {
        CVec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    /// self × p
    pub fn cross_real(&self, p: Point) -> CVec3 {
        self.cross(&CVec3::from_real(p))
    }

    /// p × self
    pub fn real_cross(p: Point, v: &CVec3) -> CVec3 {
        CVec3::from_real(p).cross(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()).sqrt()
    }

    pub fn to_array(self) -> [C64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        CVec3::new(-self.x, -self.y, -self.z)
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, o: CVec3) {
        *self = *self + o;
    }
}

impl Mul<C64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: C64) -> CVec3 {
        CVec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<f64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: f64) -> CVec3 {
        CVec3::new(self.x * s, self.y * s, self.z * s)
    }
}
