use serde::{Deserialize, Serialize};

/// A point on the complex plane, stored as `(re, im)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Point {
            x: radius * angle.cos(),
            y: radius * angle.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(&self, k: f64) -> Self {
        Point {
            x: self.x * k,
            y: self.y * k,
        }
    }

    fn cross(&self, other: &Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

/// A half-plane `{p : a·x + b·y <= c}`.
#[derive(Debug, Clone, Copy)]
pub struct HalfPlane {
    a: f64,
    b: f64,
    c: f64,
}

impl HalfPlane {
    /// Points on or to the left of the directed line `from -> to`.
    pub fn left_of(from: Point, to: Point) -> Self {
        // left side: cross(to - from, p - from) >= 0
        let dx = to.x - from.x;
        let dy = to.y - from.y;
        HalfPlane {
            a: dy,
            b: -dx,
            c: dy * from.x - dx * from.y,
        }
    }

    fn signed(&self, p: &Point) -> f64 {
        self.c - (self.a * p.x + self.b * p.y)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.signed(p) >= 0.0
    }
}

/// A closed polygonal chain. The closing edge from the last vertex back to
/// the first is implicit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace signed area; positive for anticlockwise chains.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..n {
            let p = &self.vertices[i];
            let q = &self.vertices[(i + 1) % n];
            acc += p.cross(q);
        }
        0.5 * acc
    }

    /// Area enclosed by the chain; degenerate chains measure zero.
    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices.iter().map(Point::norm).fold(0.0, f64::max)
    }

    /// Sutherland-Hodgman step: keeps the part of the polygon inside `hp`.
    /// Works for any simple subject polygon; the result may contain
    /// zero-width slivers, which contribute nothing to the area.
    pub fn clip(&self, hp: &HalfPlane) -> Polygon {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 2);
        if n == 0 {
            return Polygon::new(out);
        }
        let mut prev = self.vertices[n - 1];
        let mut prev_d = hp.signed(&prev);
        for &cur in &self.vertices {
            let cur_d = hp.signed(&cur);
            let cur_in = cur_d >= 0.0;
            let prev_in = prev_d >= 0.0;
            if cur_in != prev_in {
                let t = prev_d / (prev_d - cur_d);
                out.push(Point {
                    x: prev.x + t * (cur.x - prev.x),
                    y: prev.y + t * (cur.y - prev.y),
                });
            }
            if cur_in {
                out.push(cur);
            }
            prev = cur;
            prev_d = cur_d;
        }
        Polygon::new(out)
    }

    /// Intersection with a convex polygon given in anticlockwise order.
    pub fn clip_convex(&self, convex: &Polygon) -> Polygon {
        let n = convex.vertices.len();
        let mut result = self.clone();
        for i in 0..n {
            if result.is_empty() {
                break;
            }
            let hp = HalfPlane::left_of(convex.vertices[i], convex.vertices[(i + 1) % n]);
            result = result.clip(&hp);
        }
        result
    }
}

/// Shoelace area of an arbitrary vertex chain.
pub fn polygon_area(p: &Polygon) -> f64 {
    p.area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square(side: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(side, 0.0),
            Point::new(side, side),
            Point::new(0.0, side),
        ])
    }

    #[test]
    fn area_of_square_and_degenerates() {
        assert_relative_eq!(square(2.0).area(), 4.0);
        assert_eq!(Polygon::default().area(), 0.0);
        let segment = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]);
        assert_eq!(segment.area(), 0.0);
    }

    #[test]
    fn clockwise_chain_has_negative_signed_area() {
        let mut sq = square(1.0);
        sq.vertices.reverse();
        assert!(sq.signed_area() < 0.0);
        assert_relative_eq!(sq.area(), 1.0);
    }

    #[test]
    fn clip_by_half_plane_halves_square() {
        let hp = HalfPlane::left_of(Point::new(0.5, -1.0), Point::new(0.5, 1.0));
        let left = square(1.0).clip(&hp);
        assert_relative_eq!(left.area(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn clip_concave_subject_by_convex_window() {
        // L-shaped subject, area 3
        let l = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ]);
        assert_relative_eq!(l.area(), 3.0);
        let window = Polygon::new(vec![
            Point::new(0.5, 0.5),
            Point::new(1.5, 0.5),
            Point::new(1.5, 1.5),
            Point::new(0.5, 1.5),
        ]);
        assert_relative_eq!(l.clip_convex(&window).area(), 0.75, epsilon = 1e-12);
    }
}
