//! Vertex-perturbation radii below which an equilateral polygon keeps its
//! knot type, can only gain local trefoils, or can gain trefoils and
//! figure-eights.
//!
//! `k` consecutive vertices can coalesce into a small ball only when the
//! perturbation radius reaches half the minimal endpoint distance of a
//! `(k-1)`-edge arc whose turning is bounded by the thickness. That arc lies on
//! the circle of radius `rho = sqrt(R^2 + E^2/4)` through the vertices, giving
//! `t_k = rho * sin((k-1) theta / 2)` with `sin(theta/2) = E / (2 rho)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::PolygonalKnot;
use crate::io::Real;
use crate::thickness;

/// Tolerance on edge-length spread for inputs treated as equilateral.
pub const EQUILATERAL_TOL: f64 = 1e-6;

fn check_k(k: usize) -> Result<()> {
    if (4..=6).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("k must be 4, 5 or 6, got {k}")))
    }
}

fn check_edge_radius(edge: f64, radius: f64) -> Result<()> {
    if !(edge > 0.0 && radius > 0.0 && edge.is_finite() && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("need positive finite E and R, got E={edge}, R={radius}")));
    }
    if edge >= 2.0 * radius {
        return Err(Error::InvalidInput(format!("need E < 2R, got E={edge}, R={radius}")));
    }
    Ok(())
}

/// Coalescence threshold for `k` consecutive vertices via the circle through
/// the vertices.
pub fn coalesce_threshold(edge: f64, radius: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_edge_radius(edge, radius)?;
    let rho = (radius * radius + edge * edge / 4.0).sqrt();
    let half_theta = (edge / (2.0 * rho)).asin();
    Ok(rho * ((k - 1) as f64 * half_theta).sin())
}

/// The same thresholds as rational expressions in `E` and `R`.
pub fn coalesce_threshold_rational(edge: f64, radius: f64, k: usize) -> Result<f64> {
    check_k(k)?;
    check_edge_radius(edge, radius)?;
    let (e, r) = (edge, radius);
    let (e2, r2) = (e * e, r * r);
    let s = 4.0 * r2 + e2;
    Ok(match k {
        4 => 0.5 * e * (12.0 * r2 - e2) / s,
        5 => 4.0 * e * r * (4.0 * r2 - e2) / s.powf(1.5),
        _ => 0.5 * e * (80.0 * r2 * r2 - 40.0 * r2 * e2 + e2 * e2) / (s * s),
    })
}

/// Endpoint distance of a planar equilateral arc of `k - 1` edges of length
/// `edge` turning by `max_angle` at every interior vertex.
pub fn schur_min_distance(edge: f64, max_angle: f64, k: usize) -> Result<f64> {
    if !(edge > 0.0) || !(0.0..PI).contains(&max_angle) || k < 2 {
        return Err(Error::InvalidInput(format!(
            "need E > 0, 0 <= angle < pi, k >= 2; got E={edge}, angle={max_angle}, k={k}"
        )));
    }
    let m = (k - 1) as f64;
    if m * max_angle >= 2.0 * PI {
        return Err(Error::InvalidInput(format!("arc of {k} vertices at angle {max_angle} wraps past a full turn")));
    }
    if max_angle == 0.0 {
        return Ok(m * edge);
    }
    Ok(edge * (m * max_angle / 2.0).sin() / (max_angle / 2.0).sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub lower: Real,
    pub upper: Real,
}

impl Band {
    pub fn is_empty(&self) -> bool {
        self.lower.0 >= self.upper.0
    }
}

/// Thresholds expressed in units of the edge length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeUnits {
    pub radius: Real,
    pub t4: Real,
    pub t5: Real,
    pub t6: Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub edge: Real,
    pub radius: Real,
    pub t4: Real,
    pub t5: Real,
    pub t6: Real,
    pub equivalence_radius: Real,
    pub trefoil_band: Band,
    pub tref_fig8_band: Band,
    pub edge_units: EdgeUnits,
}

impl ThresholdReport {
    /// Builds the report from raw thresholds. Band limits are the running
    /// maximum of `t4, t5, t6` (if six vertices can meet, so can five), each
    /// capped at `R`.
    pub fn from_thresholds(edge: f64, radius: f64, t: [f64; 3]) -> Self {
        let l4 = t[0].min(radius);
        let l5 = t[0].max(t[1]).min(radius);
        let l6 = t[0].max(t[1]).max(t[2]).min(radius);
        ThresholdReport {
            edge: Real(edge),
            radius: Real(radius),
            t4: Real(t[0]),
            t5: Real(t[1]),
            t6: Real(t[2]),
            equivalence_radius: Real(l4),
            trefoil_band: Band { lower: Real(l4), upper: Real(l5) },
            tref_fig8_band: Band { lower: Real(l5), upper: Real(l6) },
            edge_units: EdgeUnits {
                radius: Real(radius / edge),
                t4: Real(t[0] / edge),
                t5: Real(t[1] / edge),
                t6: Real(t[2] / edge),
            },
        }
    }
}

/// Thresholds of the regular `n`-gon with circumradius 1.
pub fn regular_ngon_report(n: usize) -> Result<ThresholdReport> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("need n >= 3, got {n}")));
    }
    let a = PI / n as f64;
    let t = [(3.0 * a).sin(), (4.0 * a).sin(), (5.0 * a).sin()];
    Ok(ThresholdReport::from_thresholds(2.0 * a.sin(), a.cos(), t))
}

/// Thresholds of an equilateral polygon from its edge length and thickness
/// radius.
pub fn report(k: &PolygonalKnot) -> Result<ThresholdReport> {
    let deviation = k.equilateral_deviation();
    if deviation > EQUILATERAL_TOL {
        return Err(Error::NotEquilateral { deviation });
    }
    let edge = k.mean_edge();
    let radius = thickness::thickness_radius(k)?;
    let t = [
        coalesce_threshold(edge, radius, 4)?,
        coalesce_threshold(edge, radius, 5)?,
        coalesce_threshold(edge, radius, 6)?,
    ];
    Ok(ThresholdReport::from_thresholds(edge, radius, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Equivalent,
    TrefoilOnly,
    TrefoilFig8,
    ComplexLocal,
    BeyondTube,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Equivalent => "Equivalent",
            Regime::TrefoilOnly => "TrefoilOnly",
            Regime::TrefoilFig8 => "TrefoilFig8",
            Regime::ComplexLocal => "ComplexLocal",
            Regime::BeyondTube => "BeyondTube",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Regime of a perturbation radius. Intervals are half-open, `[lower, upper)`,
/// so a radius on a boundary falls in the more permissive regime.
pub fn classify_in(report: &ThresholdReport, r: f64) -> Regime {
    if r >= report.radius.0 {
        Regime::BeyondTube
    } else if r < report.trefoil_band.lower.0 {
        Regime::Equivalent
    } else if r < report.trefoil_band.upper.0 {
        Regime::TrefoilOnly
    } else if r < report.tref_fig8_band.upper.0 {
        Regime::TrefoilFig8
    } else {
        Regime::ComplexLocal
    }
}

pub fn classify_radius(k: &PolygonalKnot, r: f64) -> Result<Regime> {
    Ok(classify_in(&report(k)?, r))
}
