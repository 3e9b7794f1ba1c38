//! Closed-form functionals of cube shadows.
//!
//! A corank-1 shadow of the n-cube along U is the zonotope generated by the projected
//! unit edges, so its volume, area and mean width depend on U only through the
//! coordinates x_j. For the rank-2 shadow of the 4-cube along an orthonormal pair (U, V)
//! the perimeter is equally simple; the area is only known branch by branch.

use std::f64::consts::{FRAC_1_PI, PI};

use thiserror::Error;

use crate::geometry::{self, cube_vertex, dot, UnitVector};
use crate::hull::{self, convex_hull_2d, polygon_measures};
use crate::specfun::gamma_fn;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("directions are not orthogonal: u·v = {0}")]
    NotOrthogonal(f64),
    #[error("plane is degenerate for the coefficient system: c = {0}")]
    DegeneratePlane(f64),
    #[error("branch {0} does not exist (1..=6)")]
    NoSuchBranch(usize),
    #[error(transparent)]
    Geometry(#[from] geometry::GeometryError),
    #[error(transparent)]
    Hull(#[from] hull::HullError),
}

/// Volume, surface area and mean width of one corank-1 shadow.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShadowFunctionals {
    pub vl: f64,
    pub ar: f64,
    pub mw: f64,
}

/// Σ |x_j|.
pub fn shadow_volume(u: &UnitVector) -> f64 {
    u.coords().iter().map(|x| x.abs()).sum()
}

/// 2 Σ_{j<k} √(x_j² + x_k²).
pub fn shadow_area(u: &UnitVector) -> f64 {
    let c = u.coords();
    let mut s = 0.0;
    for j in 0..c.len() {
        for k in j + 1..c.len() {
            s += c[j].hypot(c[k]);
        }
    }
    2.0 * s
}

/// Mean width of a unit segment in ℝ^d: 2κ_{d−1}/(d·κ_d), κ_d the volume of the unit d-ball.
///
/// Exact for d ∈ {2, 3, 4} (2/π, 1/2, 4/3π); other d go through Gamma.
pub fn segment_mw_coeff(d: usize) -> f64 {
    match d {
        2 => 2.0 * FRAC_1_PI,
        3 => 0.5,
        4 => 4.0 / (3.0 * PI),
        _ => {
            let ball = |k: usize| {
                let h = k as f64 / 2.0;
                PI.powf(h) / gamma_fn(h + 1.0).expect("positive argument")
            };
            2.0 * ball(d - 1) / (d as f64 * ball(d))
        }
    }
}

/// c_{n−1} Σ √(1 − x_j²).
pub fn shadow_mean_width(u: &UnitVector) -> f64 {
    // 1 − x_j² is summed from the other coordinates to avoid cancellation near the axes
    let c = u.coords();
    let total: f64 = c.iter().map(|x| x * x).sum();
    let s: f64 = c.iter().map(|x| (total - x * x).max(0.0).sqrt()).sum();
    segment_mw_coeff(u.dim() - 1) * s
}

pub fn shadow_functionals(u: &UnitVector) -> ShadowFunctionals {
    ShadowFunctionals {
        vl: shadow_volume(u),
        ar: shadow_area(u),
        mw: shadow_mean_width(u),
    }
}

const ORTHO_TOL: f64 = 1e-10;

fn check_pair(u: &UnitVector, v: &UnitVector) -> Result<([f64; 4], [f64; 4]), FunctionalError> {
    let x = geometry::coords4(u)?;
    let p = geometry::coords4(v)?;
    let d = u.dot(v);
    if d.abs() > ORTHO_TOL {
        return Err(FunctionalError::NotOrthogonal(d));
    }
    Ok((x, p))
}

/// 2 Σ √(1 − p_j² − x_j²) for orthonormal U = (x_j), V = (p_j).
pub fn octagon_perimeter(u: &UnitVector, v: &UnitVector) -> Result<f64, FunctionalError> {
    let (x, p) = check_pair(u, v)?;
    Ok(2.0
        * (0..4)
            .map(|j| (1.0 - p[j] * p[j] - x[j] * x[j]).max(0.0).sqrt())
            .sum::<f64>())
}

/// Coefficients of the local octagon-area formulas, in U = (x, y, z, w), V = (p, q, r, s).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OctagonCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub c: f64,
}

/// Below this the area branches divide by ~0.
pub const DEGENERATE_C: f64 = 1e-10;

impl OctagonCoeffs {
    pub fn is_degenerate(&self) -> bool {
        self.c <= DEGENERATE_C
    }
}

pub fn octagon_coefficients(u: &UnitVector, v: &UnitVector) -> Result<OctagonCoeffs, FunctionalError> {
    let ([x, y, z, w], [p, q, r, s]) = check_pair(u, v)?;
    Ok(OctagonCoeffs {
        a1: r * y + s * y - q * z - s * z - q * w + r * w,
        a2: r * y - s * y - q * z - s * z + q * w + r * w,
        a3: r * y + s * y - q * z + s * z - q * w - r * w,
        b1: p * q - p * s + x * y - x * w,
        b2: p * q - p * r + x * y - x * z,
        b3: p * q + p * s + x * y + x * w,
        c: 2.0 * (1.0 - p * p - x * x),
    })
}

/// The six printed local area formulas. Branch k is valid near its anchor in
/// [`BRANCH_ANCHORS`]; elsewhere it is just a rational function of the coefficients.
pub fn octagon_area_branch(branch: usize, k: &OctagonCoeffs) -> Result<f64, FunctionalError> {
    if !(1..=6).contains(&branch) {
        return Err(FunctionalError::NoSuchBranch(branch));
    }
    if k.is_degenerate() {
        return Err(FunctionalError::DegeneratePlane(k.c));
    }
    let OctagonCoeffs { a1, a2, a3, b1, b2, c, .. } = *k;
    let bracket = match branch {
        1 => a1 * b2 + a2 * (c - b1 + b2) + a3 * b1,
        2 => a1 * b2 - a2 * (b1 - b2) + a3 * (c + b1),
        3 => a1 * b2 - a2 * (c + b1 - b2) + a3 * b1,
        4 => -a1 * (c - b2) - a2 * (b1 - b2) + a3 * b1,
        5 => a1 * b2 - a2 * (b1 - b2) - a3 * (c - b1),
        _ => a1 * (c + b2) - a2 * (b1 - b2) + a3 * b1,
    };
    Ok(bracket / c)
}

/// Angle anchors (θ, φ, ψ, κ, λ) in radians, one per branch.
pub const BRANCH_ANCHORS: [[f64; 5]; 6] = [
    [1.0, 1.0, 1.0, 1.0, 1.0],
    [0.5, 0.5, 0.5, 0.5, 0.5],
    [0.75, 0.75, 0.75, 0.75, 0.75],
    [5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0],
    [0.875, 0.875, 0.875, 0.875, 0.875],
    [0.8, 1.0, 0.4, 0.6, 0.2],
];

/// The orthonormal pair (U, V) at angles (θ, φ, ψ, κ, λ).
pub fn pair_from_angles(a: [f64; 5]) -> (UnitVector, UnitVector) {
    let u = geometry::spherical_to_cartesian4(geometry::Angles4 {
        theta: a[0],
        phi: a[1],
        psi: a[2],
    });
    let v = geometry::build_rank2_pair(&u, geometry::Rank2Angles { kappa: a[3], lambda: a[4] })
        .expect("n = 4");
    (u, v)
}

/// Orthonormal basis of span{u, v}⊥: Gram–Schmidt of the coordinate axes with the
/// largest residuals.
fn plane_basis(x: [f64; 4], p: [f64; 4]) -> [[f64; 4]; 2] {
    let mut basis: Vec<[f64; 4]> = Vec::with_capacity(2);
    for _ in 0..2 {
        let mut best = ([0.0; 4], -1.0);
        for j in 0..4 {
            let mut e = [0.0; 4];
            e[j] = 1.0;
            for b in [x, p].iter().chain(&basis) {
                let t = dot(&e, b);
                e.iter_mut().zip(b).for_each(|(ei, bi)| *ei -= t * bi);
            }
            let n = dot(&e, &e).sqrt();
            if n > best.1 {
                best = (e.map(|c| c / n), n);
            }
        }
        basis.push(best.0);
    }
    [basis[0], basis[1]]
}

/// (area, perimeter) of the rank-2 shadow from an explicit planar hull.
pub fn octagon_hull_measures(u: &UnitVector, v: &UnitVector) -> Result<(f64, f64), FunctionalError> {
    let (x, p) = check_pair(u, v)?;
    let [e1, e2] = plane_basis(x, p);
    let pts: Vec<[f64; 2]> = (0..16)
        .map(|k| {
            let c = cube_vertex(4, k);
            [dot(&c, &e1), dot(&c, &e2)]
        })
        .collect();
    Ok(polygon_measures(&convex_hull_2d(&pts)?))
}

/// Area of the rank-2 shadow from an explicit planar hull.
pub fn octagon_area_oracle(u: &UnitVector, v: &UnitVector) -> Result<f64, FunctionalError> {
    Ok(octagon_hull_measures(u, v)?.0)
}
