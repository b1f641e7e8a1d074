//! Seeded sampling of base points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{Domain, MetricField};
use crate::point::BasePoint;

/// Consecutive rejected draws before the domain is declared empty.
pub const MAX_REJECTIONS: usize = 100_000;

/// Minimum Euclidean length of a direction before normalization.
const MIN_DIRECTION: f64 = 1e-9;

fn uniform_in(rng: &mut ChaCha8Rng, domain: Domain, n: usize) -> Vec<f64> {
    match domain {
        Domain::Box { half_width } => (0..n).map(|_| rng.gen_range(-half_width..=half_width)).collect(),
        Domain::Ball { radius } => loop {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-radius..=radius)).collect();
            if (Domain::Ball { radius }).contains(&x) {
                break x;
            }
        },
    }
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<f64>> {
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < MIN_DIRECTION || norm > 1.0 {
        return None;
    }
    Some(y.into_iter().map(|v| v / norm).collect())
}

/// Draws `count` admissible base points: positions uniform in `domain`,
/// directions uniform on the Euclidean unit sphere. The same seed and
/// configuration always yield the same points.
pub fn sample_points(metric: &MetricField, domain: Domain, count: usize, seed: u64) -> Result<Vec<BasePoint>> {
    let n = metric.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut rejections = 0;
    while points.len() < count {
        if rejections >= MAX_REJECTIONS {
            return Err(Error::EmptyDomain(MAX_REJECTIONS));
        }
        let x = uniform_in(&mut rng, domain, n);
        let Some(y) = unit_direction(&mut rng, n) else {
            rejections += 1;
            continue;
        };
        if !metric.is_admissible(&x) {
            rejections += 1;
            continue;
        }
        let p = BasePoint::new(x, y)?;
        match metric.f2(p.x(), p.y()) {
            Ok(v) if v > 0.0 && v.is_finite() => {
                points.push(p);
                rejections = 0;
            }
            _ => rejections += 1,
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::load_metric;

    #[test]
    fn reproducible() {
        let m = load_metric("funk(2)").unwrap();
        let a = sample_points(&m, m.default_domain(), 10, 42).unwrap();
        let b = sample_points(&m, m.default_domain(), 10, 42).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| m.is_admissible(p.x())));
        let c = sample_points(&m, m.default_domain(), 10, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_request() {
        let m = load_metric("euclidean(2)").unwrap();
        assert!(sample_points(&m, m.default_domain(), 0, 1).unwrap().is_empty());
    }

    #[test]
    fn ball_radius_respected() {
        let m = load_metric("funk(3)").unwrap();
        let pts = sample_points(&m, Domain::Ball { radius: 0.85 }, 200, 9).unwrap();
        for p in &pts {
            let r = p.x().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(r <= 0.85);
            let ny = p.y().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((ny - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_domain_detected() {
        let spec = crate::dsl::parse_metric("custom(2) { (x[1]^2 - 4) * (y[1]^2 + y[2]^2) }").unwrap();
        let m = MetricField::unchecked(spec.clone());
        let err = sample_points(&m, m.default_domain(), 1, 0).unwrap_err();
        assert!(matches!(err, Error::EmptyDomain(MAX_REJECTIONS)));
        assert!(matches!(crate::metric::compile_metric(spec), Err(Error::EmptyDomain(_))));
    }
}
