//! Dirichlet eigenpairs of the negative Laplacian on an interval or a
//! rectangle, in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{CompositeRule, DEFAULT_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

/// One eigenpair: w = sqrt(2/L) sin(i pi x / L) on an interval, or the
/// tensor product of two such factors on a rectangle (`j` = 0 for
/// intervals).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub lambda: f64,
    pub i: usize,
    pub j: usize,
}

/// A point of the domain; `y` is ignored on intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Quadrature nodes over the whole domain with their weights.
#[derive(Debug, Clone)]
pub struct DomainRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl DomainRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDomain {
    kind: DomainKind,
    modes: Vec<Mode>,
}

impl SpectralDomain {
    pub fn interval(length: f64, mode_count: usize) -> Result<Self> {
        Self::build(DomainKind::Interval { length }, mode_count)
    }

    pub fn rectangle(lx: f64, ly: f64, mode_count: usize) -> Result<Self> {
        Self::build(DomainKind::Rectangle { lx, ly }, mode_count)
    }

    /// Builds the first `mode_count` eigenpairs, sorted by eigenvalue.
    pub fn build(kind: DomainKind, mode_count: usize) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::config("mode count must be at least 1"));
        }
        let modes = match kind {
            DomainKind::Interval { length } => {
                if !(length > 0.0 && length.is_finite()) {
                    return Err(Error::config(format!("interval length must be positive, got {length}")));
                }
                (1..=mode_count)
                    .map(|i| {
                        let k = i as f64 * PI / length;
                        Mode { lambda: k * k, i, j: 0 }
                    })
                    .collect()
            }
            DomainKind::Rectangle { lx, ly } => {
                if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                    return Err(Error::config(format!(
                        "rectangle sides must be positive, got {lx} x {ly}"
                    )));
                }
                // The N smallest sums have both indices <= N.
                let mut all = Vec::with_capacity(mode_count * mode_count);
                for i in 1..=mode_count {
                    for j in 1..=mode_count {
                        let kx = i as f64 * PI / lx;
                        let ky = j as f64 * PI / ly;
                        all.push(Mode {
                            lambda: kx * kx + ky * ky,
                            i,
                            j,
                        });
                    }
                }
                all.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
                all.truncate(mode_count);
                all
            }
        };
        Ok(Self { kind, modes })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// Eigenvalue of the 1-based mode index `k`.
    pub fn lambda(&self, k: usize) -> f64 {
        self.modes[k - 1].lambda
    }

    pub fn measure(&self) -> f64 {
        match self.kind {
            DomainKind::Interval { length } => length,
            DomainKind::Rectangle { lx, ly } => lx * ly,
        }
    }

    pub fn is_interval(&self) -> bool {
        matches!(self.kind, DomainKind::Interval { .. })
    }

    /// Value of the 0-based mode `idx` at `p`.
    pub fn eigenfunction(&self, idx: usize, p: Point) -> f64 {
        let m = self.modes[idx];
        match self.kind {
            DomainKind::Interval { length } => (2.0 / length).sqrt() * (m.i as f64 * PI * p.x / length).sin(),
            DomainKind::Rectangle { lx, ly } => {
                2.0 / (lx * ly).sqrt() * (m.i as f64 * PI * p.x / lx).sin() * (m.j as f64 * PI * p.y / ly).sin()
            }
        }
    }

    /// Gradient of the 0-based mode `idx` at `p` (second component is 0
    /// on intervals).
    pub fn eigenfunction_grad(&self, idx: usize, p: Point) -> (f64, f64) {
        let m = self.modes[idx];
        match self.kind {
            DomainKind::Interval { length } => {
                let k = m.i as f64 * PI / length;
                ((2.0 / length).sqrt() * k * (k * p.x).cos(), 0.0)
            }
            DomainKind::Rectangle { lx, ly } => {
                let kx = m.i as f64 * PI / lx;
                let ky = m.j as f64 * PI / ly;
                let c = 2.0 / (lx * ly).sqrt();
                (
                    c * kx * (kx * p.x).cos() * (ky * p.y).sin(),
                    c * (kx * p.x).sin() * ky * (ky * p.y).cos(),
                )
            }
        }
    }

    /// Evaluates u = sum_k c_k w_k at `p`.
    pub fn evaluate(&self, coeffs: &[f64], p: Point) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if *c == 0.0 { 0.0 } else { c * self.eigenfunction(k, p) })
            .sum()
    }

    pub fn evaluate_grad(&self, coeffs: &[f64], p: Point) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for (k, c) in coeffs.iter().enumerate() {
            if *c != 0.0 {
                let (gx, gy) = self.eigenfunction_grad(k, p);
                g.0 += c * gx;
                g.1 += c * gy;
            }
        }
        g
    }

    /// Composite Gauss-Legendre rule with `nodes` points per dimension.
    pub fn rule(&self, nodes: usize) -> DomainRule {
        match self.kind {
            DomainKind::Interval { length } => {
                let r = CompositeRule::with_nodes(0.0, length, nodes);
                DomainRule {
                    points: r.points.iter().map(|&x| Point::new(x, 0.0)).collect(),
                    weights: r.weights,
                }
            }
            DomainKind::Rectangle { lx, ly } => {
                let rx = CompositeRule::with_nodes(0.0, lx, nodes);
                let ry = CompositeRule::with_nodes(0.0, ly, nodes);
                let mut points = Vec::with_capacity(rx.len() * ry.len());
                let mut weights = Vec::with_capacity(rx.len() * ry.len());
                for (x, wx) in rx.points.iter().zip(&rx.weights) {
                    for (y, wy) in ry.points.iter().zip(&ry.weights) {
                        points.push(Point::new(*x, *y));
                        weights.push(wx * wy);
                    }
                }
                DomainRule { points, weights }
            }
        }
    }

    pub fn default_rule(&self) -> DomainRule {
        self.rule(DEFAULT_NODES)
    }

    /// Uniform verification grid: 1024 points on intervals, 64 x 64 on
    /// rectangles, boundary included.
    pub fn verification_grid(&self) -> Vec<Point> {
        match self.kind {
            DomainKind::Interval { length } => (0..1024).map(|i| Point::new(length * i as f64 / 1023.0, 0.0)).collect(),
            DomainKind::Rectangle { lx, ly } => {
                let mut pts = Vec::with_capacity(4096);
                for i in 0..64 {
                    for j in 0..64 {
                        pts.push(Point::new(lx * i as f64 / 63.0, ly * j as f64 / 63.0));
                    }
                }
                pts
            }
        }
    }
}

/// Domain average (1/|Omega|) int_Omega field, by the default rule.
pub fn mean_coefficient(field: impl Fn(Point) -> f64, domain: &SpectralDomain) -> f64 {
    domain.default_rule().integrate(field) / domain.measure()
}

/// Modal coefficients of a projected field with its Parseval defect.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    /// ||u||^2 by quadrature minus sum of squared coefficients.
    pub parseval_defect: f64,
    pub norm_sq: f64,
}

/// Projects `field` onto the eigenbasis. Fails when the Parseval defect
/// exceeds `tolerance * max(1, ||u||^2)`.
pub fn project_initial(field: impl Fn(Point) -> f64, domain: &SpectralDomain, tolerance: f64) -> Result<Projection> {
    let rule = domain.default_rule();
    let values: Vec<f64> = rule.points.iter().map(|&p| field(p)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "initial field is not finite on the quadrature grid".into(),
        ));
    }
    let norm_sq: f64 = values.iter().zip(&rule.weights).map(|(v, w)| w * v * v).sum();
    let coefficients: Vec<f64> = (0..domain.mode_count())
        .map(|k| {
            rule.points
                .iter()
                .zip(&rule.weights)
                .zip(&values)
                .map(|((&p, &w), &v)| w * v * domain.eigenfunction(k, p))
                .sum()
        })
        .collect();
    let captured: f64 = coefficients.iter().map(|c| c * c).sum();
    let parseval_defect = norm_sq - captured;
    let allowed = tolerance * norm_sq.max(1.0);
    if parseval_defect.abs() > allowed {
        return Err(Error::Projection {
            defect: parseval_defect,
            tolerance: allowed,
        });
    }
    Ok(Projection {
        coefficients,
        parseval_defect,
        norm_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_eigenvalues() {
        let d = SpectralDomain::interval(PI, 3).unwrap();
        assert_eq!(d.eigenvalues(), vec![1.0, 4.0, 9.0]);
        let d = SpectralDomain::interval(1.0, 1).unwrap();
        assert_relative_eq!(d.lambda(1), PI * PI, max_relative = 1e-15);
    }

    #[test]
    fn unit_square_eigenvalues() {
        let d = SpectralDomain::rectangle(1.0, 1.0, 4).unwrap();
        let expect = [2.0, 5.0, 5.0, 8.0].map(|m| m * PI * PI);
        for (a, b) in d.eigenvalues().iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn bad_configuration_is_rejected() {
        assert!(matches!(SpectralDomain::interval(0.0, 3), Err(Error::Config(_))));
        assert!(matches!(SpectralDomain::interval(1.0, 0), Err(Error::Config(_))));
        assert!(matches!(SpectralDomain::rectangle(1.0, -2.0, 3), Err(Error::Config(_))));
    }

    #[test]
    fn eigenfunctions_are_orthonormal() {
        for d in [
            SpectralDomain::interval(2.5, 12).unwrap(),
            SpectralDomain::rectangle(1.0, 1.5, 10).unwrap(),
        ] {
            let rule = d.rule(128);
            for j in 0..d.mode_count() {
                for k in 0..d.mode_count() {
                    let v = rule.integrate(|p| d.eigenfunction(j, p) * d.eigenfunction(k, p));
                    let e = if j == k { 1.0 } else { 0.0 };
                    assert!((v - e).abs() < 1e-12, "<w{j}, w{k}> = {v}");
                }
            }
        }
    }

    #[test]
    fn means_of_simple_fields() {
        let d = SpectralDomain::interval(1.0, 1).unwrap();
        assert_relative_eq!(mean_coefficient(|_| 2.0, &d), 2.0, max_relative = 1e-14);
        assert_relative_eq!(mean_coefficient(|p| 1.0 + p.x, &d), 1.5, max_relative = 1e-14);
        assert_relative_eq!(
            mean_coefficient(|p| (PI * p.x).sin(), &d),
            2.0 / PI,
            max_relative = 1e-13
        );
    }

    #[test]
    fn projection_of_eigenfunction_combinations() {
        let d = SpectralDomain::interval(PI, 8).unwrap();
        let p = project_initial(|p| d.eigenfunction(0, p), &d, 1e-10).unwrap();
        assert_relative_eq!(p.coefficients[0], 1.0, epsilon = 1e-13);
        assert!(p.coefficients[1..].iter().all(|c| c.abs() < 1e-13));

        let p = project_initial(|x| 3.0 * d.eigenfunction(1, x) - d.eigenfunction(4, x), &d, 1e-10).unwrap();
        for (k, c) in p.coefficients.iter().enumerate() {
            let e = match k {
                1 => 3.0,
                4 => -1.0,
                _ => 0.0,
            };
            assert!((c - e).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_reports_truncation_defect() {
        // A step function is far from its 4-mode truncation.
        let d = SpectralDomain::interval(1.0, 4).unwrap();
        let err = project_initial(|p| if p.x < 0.5 { 1.0 } else { 0.0 }, &d, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Projection { .. }));
    }
}
