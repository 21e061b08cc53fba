use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned bounding box, top-left anchored, in pixels.
///
/// Coordinates are continuous: detector outputs and Kalman estimates are
/// subpixel, and the window features downstream are computed on reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    /// Builds a box, enforcing `w > 0`, `h > 0` and finite fields.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = BBox { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite())
        {
            return Err(Error::invalid("bbox", format!("non-finite field in {self:?}")));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::invalid(
                "bbox",
                format!("width and height must be positive, got w={} h={}", self.w, self.h),
            ));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    /// Center of the box: `(x + w/2, y + h/2)`.
    pub fn centroid(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    /// Width over height.
    pub fn aspect(&self) -> f64 {
        self.w / self.h
    }

    /// Intersection over union. Zero for disjoint boxes, including boxes
    /// that touch only at an edge (their intersection has zero area).
    ///
    /// Areas are taken from the same corner arithmetic as the overlap so
    /// identical boxes score exactly 1.
    pub fn iou(&self, other: &BBox) -> f64 {
        let (ax2, ay2) = (self.x + self.w, self.y + self.h);
        let (bx2, by2) = (other.x + other.w, other.y + other.h);
        let ix = ax2.min(bx2) - self.x.max(other.x);
        let iy = ay2.min(by2) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        let area_a = (ax2 - self.x) * (ay2 - self.y);
        let area_b = (bx2 - other.x) * (by2 - other.y);
        inter / (area_a + area_b - inter)
    }
}
