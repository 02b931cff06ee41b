//! Gauss-Legendre rules and the polar lens-plane grid used for overlap integrals.

use std::f64::consts::PI;

use crate::error::{Result, VbgError};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order > 0, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on_interval(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on_interval(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product polar grid on a disk: Gauss-Legendre in radius (split at
/// the aperture edge when it falls inside the disk) and the periodic
/// trapezoid rule in angle.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// Transverse centre of the disk.
    pub center: [f64; 2],
    pub extent_m: f64,
    /// `(x, y, weight)` with the `r dr dphi` Jacobian folded into the weight.
    pub points: Vec<(f64, f64, f64)>,
}

impl PolarGrid {
    pub fn new(
        center: [f64; 2],
        extent_m: f64,
        aperture_m: Option<f64>,
        radial_order: usize,
        angular_points: usize,
    ) -> Self {
        let rule = GaussLegendre::new(radial_order);
        let mut radial: Vec<(f64, f64)> = Vec::with_capacity(2 * radial_order);
        match aperture_m {
            Some(edge) if edge < extent_m => {
                radial.extend(rule.on_interval(0.0, edge));
                radial.extend(rule.on_interval(edge, extent_m));
            }
            _ => radial.extend(rule.on_interval(0.0, extent_m)),
        }
        let dphi = 2.0 * PI / angular_points as f64;
        let mut points = Vec::with_capacity(radial.len() * angular_points);
        for &(r, wr) in &radial {
            for j in 0..angular_points {
                let (s, c) = (j as f64 * dphi).sin_cos();
                points.push((center[0] + r * c, center[1] + r * s, wr * r * dphi));
            }
        }
        Self {
            center,
            extent_m,
            points,
        }
    }

    /// Fails when the disk does not reach five beam radii.
    pub fn check_extent(&self, beam_radius_m: f64) -> Result<()> {
        let required = 5.0 * beam_radius_m;
        if self.extent_m < required * (1.0 - 1e-12) {
            return Err(VbgError::Quadrature {
                extent_m: self.extent_m,
                required_m: required,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // exact for degree <= 19
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(19) - 3.0 * x.powi(4));
        let exact = (2f64.powi(20) - 1.0) / 20.0 - 3.0 * (32.0 + 1.0) / 5.0;
        assert_relative_eq!(v, exact, max_relative = 1e-13);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn odd_order_has_centre_node() {
        let rule = GaussLegendre::new(5);
        assert!(rule.nodes[2].abs() < 1e-15);
        assert_relative_eq!(rule.weights[2], 128.0 / 225.0, max_relative = 1e-14);
    }

    #[test]
    fn disk_area_and_gaussian_power() {
        let grid = PolarGrid::new([0.0, 0.0], 2.0, None, 24, 16);
        let area: f64 = grid.points.iter().map(|p| p.2).sum();
        assert_relative_eq!(area, 4.0 * PI, max_relative = 1e-13);
        let w = 0.3;
        let power: f64 = grid
            .points
            .iter()
            .map(|&(x, y, wt)| wt * 2.0 / (PI * w * w) * (-2.0 * (x * x + y * y) / (w * w)).exp())
            .sum();
        assert_relative_eq!(power, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn extent_check() {
        let grid = PolarGrid::new([0.0, 0.0], 1.0, Some(0.5), 8, 8);
        assert_eq!(grid.len(), 2 * 8 * 8);
        assert!(grid.check_extent(0.2).is_ok());
        assert!(matches!(
            grid.check_extent(0.21),
            Err(VbgError::Quadrature { .. })
        ));
    }
}
