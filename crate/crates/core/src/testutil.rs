//! Helpers shared by unit tests.

use crate::mesh::Polygon;
use crate::Point;
use rand::Rng;
use std::f64::consts::PI;

/// Random polygon star-shaped about `center`, vertices at sorted random angles.
pub fn random_star_polygon<R: Rng>(rng: &mut R, n: usize, center: Point, scale: f64) -> Polygon {
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    // keep angular gaps away from zero and below π
    for (k, a) in angles.iter_mut().enumerate() {
        *a = 0.7 * *a + 0.3 * 2.0 * PI * k as f64 / n as f64;
    }
    Polygon::new(
        angles
            .iter()
            .map(|&a| center + Point::new(a.cos(), a.sin()) * scale * rng.gen_range(0.55..1.0))
            .collect(),
    )
}

pub fn unit_square() -> Polygon {
    Polygon::new(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ])
}
