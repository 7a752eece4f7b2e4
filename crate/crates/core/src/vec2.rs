use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the cross-sectional plane.
///
/// `x` is the transverse coordinate (normal to the mean plate planes) and `y`
/// the lateral coordinate along which the profiles are periodic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    #[inline]
    pub fn component(self, i: usize) -> f64 {
        if i == 0 {
            self.x
        } else {
            self.y
        }
    }

    /// Distance from `self` to the closed segment [a, b].
    pub fn distance_to_segment(self, a: Vec2, b: Vec2) -> f64 {
        let ab = b - a;
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return (self - a).norm();
        }
        let t = ((self - a).dot(ab) / len2).clamp(0.0, 1.0);
        (self - (a + ab * t)).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Distance between two closed segments.
pub fn segment_distance(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> f64 {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let denom = d1.cross(d2);
    if denom.abs() > 1e-300 {
        let t = (b0 - a0).cross(d2) / denom;
        let u = (b0 - a0).cross(d1) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return 0.0;
        }
    }
    a0.distance_to_segment(b0, b1)
        .min(a1.distance_to_segment(b0, b1))
        .min(b0.distance_to_segment(a0, a1))
        .min(b1.distance_to_segment(a0, a1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distances() {
        let p = Vec2::new(1.0, 0.5);
        assert!((p.distance_to_segment(Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0)) - 1.0).abs() < 1e-15);
        let d = segment_distance(
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 3.0),
        );
        assert!((d - 5f64.sqrt()).abs() < 1e-15);
        let crossing = segment_distance(
            Vec2::new(-1.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, -1.0),
            Vec2::new(0.0, 1.0),
        );
        assert_eq!(crossing, 0.0);
    }
}
