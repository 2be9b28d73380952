use std::f64::consts::PI;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::geometry::{Point, SphericalFrame};

/// One quadrature node on the measurement sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub theta: f64,
    pub phi: f64,
    /// Surface quadrature weight (units of area).
    pub weight: f64,
    pub position: Point,
    /// `theta_hat`.
    pub e1: Point,
    /// `phi_hat`.
    pub e2: Point,
    /// Outward normal `r_hat`.
    pub normal: Point,
}

/// Quadrature nodes, weights and tangent frames on a sphere of radius `radius`.
///
/// Nodes are ordered theta-major: node `j = i_theta * n_phi + i_phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    pub radius: f64,
    pub nodes: Vec<GridNode>,
}

impl SphereGrid {
    /// Gauss-Legendre in `cos(theta)` times the uniform rule in `phi`.
    pub fn new(n_theta: usize, n_phi: usize, radius: f64) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::InvalidArgument(format!(
                "sphere grid needs n_theta >= 2 and n_phi >= 4, got {n_theta} x {n_phi}"
            )));
        }
        check_radius(radius)?;
        let rule = GaussLegendre::new(n_theta.try_into().expect("n_theta >= 2"));
        let mut pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
        // theta ascending means cos(theta) descending
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for &(x, w) in &pairs {
            let theta = x.clamp(-1.0, 1.0).acos();
            for p in 0..n_phi {
                nodes.push(node(
                    radius,
                    theta,
                    p as f64 * dphi,
                    w * dphi * radius * radius,
                ));
            }
        }
        Ok(SphereGrid { radius, nodes })
    }

    /// Grid from explicit `(theta, phi, weight)` records, e.g. read from a file.
    pub fn from_nodes(radius: f64, records: &[(f64, f64, f64)]) -> Result<Self> {
        check_radius(radius)?;
        if records.is_empty() {
            return Err(Error::InvalidArgument(
                "sphere grid needs at least one node".into(),
            ));
        }
        let mut nodes = Vec::with_capacity(records.len());
        for (j, &(theta, phi, w)) in records.iter().enumerate() {
            if !(theta.is_finite() && phi.is_finite() && w.is_finite()) || !(w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "node {j}: invalid record (theta {theta}, phi {phi}, weight {w})"
                )));
            }
            if !(theta.sin() > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "node {j}: theta = {theta} is at a pole or outside (0, pi)"
                )));
            }
            nodes.push(node(radius, theta, phi, w));
        }
        Ok(SphereGrid { radius, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tangent vector `e_l` at node `j`, `l` in `{0, 1}`.
    #[inline]
    pub fn tangent(&self, j: usize, l: usize) -> &Point {
        if l == 0 {
            &self.nodes[j].e1
        } else {
            &self.nodes[j].e2
        }
    }

    /// Weights repeated per tangent component, length `2n`.
    pub fn component_weights(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .flat_map(|n| [n.weight, n.weight])
            .collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "sphere radius must be positive, got {radius}"
        )))
    }
}

fn node(radius: f64, theta: f64, phi: f64, weight: f64) -> GridNode {
    let f = SphericalFrame::from_angles(radius, theta, phi);
    GridNode {
        theta,
        phi,
        weight,
        position: f.r_hat * radius,
        e1: f.theta_hat,
        e2: f.phi_hat,
        normal: f.r_hat,
    }
}
