use super::{region_trace, DiscrepancyTrace, OrbitSpec, Point, Volume};
use crate::arithmetic::{wide, Length, SWide, Wide};
use crate::error::{Error, Result};

/// Convex polygon in [0,1]^2 with vertices as raw numerators over 2^F,
/// stored counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<[Wide; 2]>,
    /// Whether each edge i -> i+1 belongs to the polygon.
    closed_edge: Vec<bool>,
    area2: Wide,
    bits: u32,
}

fn cross(o: [Wide; 2], a: [Wide; 2], b: [Wide; 2]) -> SWide {
    let ax = SWide::from_diff(a[0], o[0]);
    let ay = SWide::from_diff(a[1], o[1]);
    let bx = SWide::from_diff(b[0], o[0]);
    let by = SWide::from_diff(b[1], o[1]);
    ax.mul(by).sub(ay.mul(bx))
}

impl Polygon {
    pub fn new(mut vertices: Vec<[Wide; 2]>, bits: u32) -> Result<Self> {
        let top = wide(1) << bits as usize;
        if vertices.iter().flatten().any(|&c| c > top) {
            return Err(Error::InvalidParameter("polygon vertex outside the unit square".into()));
        }
        let n = vertices.len();
        if n < 3 {
            return Err(Error::DegeneratePolygon);
        }
        let origin = [Wide::ZERO; 2];
        let mut s = SWide { neg: false, mag: Wide::ZERO };
        for i in 0..n {
            s = s.add(cross(origin, vertices[i], vertices[(i + 1) % n]));
        }
        if s.signum() == 0 {
            return Err(Error::DegeneratePolygon);
        }
        if s.neg {
            vertices.reverse();
        }
        for i in 0..n {
            if cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]).signum() < 0 {
                return Err(Error::NonConvexPolygon);
            }
        }
        // All left turns but winding more than once: x-direction flips > 2 times.
        let signs: Vec<i32> = (0..n).map(|i| SWide::from_diff(vertices[(i + 1) % n][0], vertices[i][0]).signum()).filter(|&d| d != 0).collect();
        let flips = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
        if flips > 2 {
            return Err(Error::NonConvexPolygon);
        }
        // Closed iff the outward normal (dy, -dx) points left, or straight down.
        let closed_edge = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                b[1] < a[1] || (b[1] == a[1] && b[0] > a[0])
            })
            .collect();
        Ok(Polygon { vertices, closed_edge, area2: s.mag, bits })
    }

    pub fn from_units(vertices: &[Point]) -> Result<Self> {
        let bits = vertices.first().map(|p| p[0].bits()).ok_or(Error::DegeneratePolygon)?;
        Polygon::new(vertices.iter().map(|p| [p[0].wide(), p[1].wide()]).collect(), bits)
    }

    /// Vertices given as coordinates in [0,1]; 1 is represented exactly.
    pub fn from_f64(vertices: &[(f64, f64)], bits: u32) -> Result<Self> {
        let c = |x: f64| -> Result<Wide> {
            if x == 0.0 {
                Ok(Wide::ZERO)
            } else {
                Ok(Length::from_f64(x, bits)?.wide())
            }
        };
        let v = vertices.iter().map(|&(x, y)| Ok([c(x)?, c(y)?])).collect::<Result<Vec<_>>>()?;
        Polygon::new(v, bits)
    }

    pub fn volume(&self) -> Volume {
        Volume::new(self.area2, 2 * self.bits + 1)
    }

    pub fn vertices(&self) -> &[[Wide; 2]] {
        &self.vertices
    }

    /// Half-open membership: points on an edge count iff the polygon lies to
    /// their upper right.
    pub fn contains(&self, p: Point) -> bool {
        let q = [p[0].wide(), p[1].wide()];
        let n = self.vertices.len();
        (0..n).all(|i| match cross(self.vertices[i], self.vertices[(i + 1) % n], q).signum() {
            1 => true,
            0 => self.closed_edge[i],
            _ => false,
        })
    }
}

pub fn polygon_discrepancy(spec: &OrbitSpec, polygon: &Polygon) -> DiscrepancyTrace {
    region_trace(spec, polygon.volume(), |p| polygon.contains(p))
}
