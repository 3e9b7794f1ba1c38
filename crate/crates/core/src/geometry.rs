//! Directions, spherical coordinates, projection frames and cube vertices.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension {got} not supported here (expected {expected})")]
    Dimension { got: usize, expected: &'static str },
    #[error("vector norm {0} is not 1")]
    NotUnit(f64),
    #[error("zero vector cannot be normalized")]
    Zero,
}

/// Tolerance on |‖u‖ − 1| accepted by [`UnitVector::new`].
pub const UNIT_TOL: f64 = 1e-12;

/// A point on the unit sphere S^{n−1}, n ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps coordinates that already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::Dimension {
                got: coords.len(),
                expected: "n ≥ 2",
            });
        }
        let norm = norm(&coords);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NotUnit(norm));
        }
        Ok(Self(coords))
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.len() < 2 {
            return Err(GeometryError::Dimension {
                got: coords.len(),
                expected: "n ≥ 2",
            });
        }
        let norm = norm(&coords);
        if norm <= 0.0 || !norm.is_finite() {
            return Err(GeometryError::Zero);
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Counter-based random stream: one independent ChaCha stream per (seed, sample index).
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform direction on S^{n−1} by normalizing n independent standard Gaussians.
pub fn sample_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitVector, GeometryError> {
    if n < 2 {
        return Err(GeometryError::Dimension {
            got: n,
            expected: "n ≥ 2",
        });
    }
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        // a zero draw has probability zero but would poison the normalization
        if let Ok(u) = UnitVector::normalize(v) {
            return Ok(u);
        }
    }
}

/// Spherical coordinates (θ, φ, ψ) on S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles4 {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Spherical coordinates on S^{n−1}: one azimuth and n−2 polar angles.
#[derive(Debug, Clone, PartialEq)]
pub struct AnglesN {
    pub theta: f64,
    pub phis: Vec<f64>,
}

/// (cos θ sin φ sin ψ, sin θ sin φ sin ψ, cos φ sin ψ, cos ψ).
pub fn spherical_to_cartesian4(a: Angles4) -> UnitVector {
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.phi.sin_cos();
    let (ss, cs) = a.psi.sin_cos();
    UnitVector(vec![ct * sp * ss, st * sp * ss, cp * ss, cs])
}

/// Joint density of the spherical angles of a uniform point on S^{n−1}, n ∈ {3, 4, 5}.
///
/// The j-th polar angle carries weight sin^j; the constants are 1/4π, 1/2π² and 3/8π².
pub fn spherical_density(n: usize, a: &AnglesN) -> Result<f64, GeometryError> {
    let normalizer = match n {
        3 => 1.0 / (4.0 * PI),
        4 => 1.0 / (2.0 * PI * PI),
        5 => 3.0 / (8.0 * PI * PI),
        _ => {
            return Err(GeometryError::Dimension {
                got: n,
                expected: "n ∈ {3, 4, 5}",
            })
        }
    };
    if a.phis.len() != n - 2 {
        return Err(GeometryError::Dimension {
            got: a.phis.len() + 2,
            expected: "n − 2 polar angles",
        });
    }
    let weight: f64 = a
        .phis
        .iter()
        .enumerate()
        .map(|(j, phi)| phi.sin().powi(j as i32 + 1))
        .product();
    Ok(normalizer * weight)
}

/// Orthonormal rows spanning the hyperplane orthogonal to `normal`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFrame {
    rows: Vec<Vec<f64>>,
    normal: UnitVector,
}

impl ProjectionFrame {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn normal(&self) -> &UnitVector {
        &self.normal
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn apply(&self, point: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, point)).collect()
    }
}

const DEGENERATE_TOL: f64 = 1e-12;

/// Projection frame for direction `u`.
///
/// For n = 4 the rows are the first three rows of the rotation
///
/// ```text
/// ( √(1−x²)   −xy/√(1−x²)          −xz/√(1−x²)                −xw/√(1−x²)              )
/// ( 0         √((z²+w²)/(1−x²))    −yz/√((1−x²)(z²+w²))       −yw/√((1−x²)(z²+w²))     )
/// ( 0         0                    w/√(z²+w²)                 −z/√(z²+w²)              )
/// ```
///
/// When 1−x² or z²+w² falls below 1e-12 the coordinates are permuted so that the
/// smallest |uⱼ| plays x and the two largest play z, w; the resulting rows are permuted
/// back. Any other n uses a Householder reflection.
pub fn build_frame(u: &UnitVector) -> ProjectionFrame {
    let rows = if u.dim() == 4 {
        frame4(u.coords())
    } else {
        householder_frame(u.coords())
    };
    ProjectionFrame {
        rows,
        normal: u.clone(),
    }
}

fn frame4(c: &[f64]) -> Vec<Vec<f64>> {
    let (y, z, w) = (c[1], c[2], c[3]);
    if y * y + z * z + w * w >= DEGENERATE_TOL && z * z + w * w >= DEGENERATE_TOL {
        return m4_rows([c[0], c[1], c[2], c[3]]);
    }
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()));
    let permuted = order.map(|i| c[i]);
    let local = m4_rows(permuted);
    local
        .into_iter()
        .map(|row| {
            let mut out = vec![0.0; 4];
            for (slot, &axis) in order.iter().enumerate() {
                out[axis] = row[slot];
            }
            out
        })
        .collect()
}

fn m4_rows([x, y, z, w]: [f64; 4]) -> Vec<Vec<f64>> {
    // 1 − x² without cancellation
    let rx = (y * y + z * z + w * w).sqrt();
    let rzw = (z * z + w * w).sqrt();
    vec![
        vec![rx, -x * y / rx, -x * z / rx, -x * w / rx],
        vec![0.0, rzw / rx, -y * z / (rx * rzw), -y * w / (rx * rzw)],
        vec![0.0, 0.0, w / rzw, -z / rzw],
    ]
}

/// Rows of the Householder reflection that maps `u` to ±e_k, with row k dropped.
fn householder_frame(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    // reflect along the largest coordinate for stability
    let k = (0..n)
        .max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs()))
        .expect("n ≥ 2");
    let sign = if u[k] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = u.to_vec();
    v[k] += sign;
    let vv = dot(&v, &v);
    (0..n)
        .filter(|&i| i != k)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - 2.0 * v[i] * v[j] / vv).collect())
        .collect()
}

/// Vertex `index` of the unit n-cube centred at the origin: coordinate j is +½ when bit j
/// of `index` is set, −½ otherwise.
pub fn cube_vertex(n: usize, index: usize) -> Vec<f64> {
    (0..n)
        .map(|j| if index >> j & 1 == 1 { 0.5 } else { -0.5 })
        .collect()
}

/// Images of the 2ⁿ cube vertices under the frame, in canonical vertex order.
pub fn project_vertices(frame: &ProjectionFrame) -> Vec<Vec<f64>> {
    let n = frame.dim();
    (0..1usize << n)
        .map(|k| frame.apply(&cube_vertex(n, k)))
        .collect()
}

/// [`project_vertices`] for n = 4, as points in ℝ³.
pub fn project_vertices_3d(frame: &ProjectionFrame) -> Result<Vec<[f64; 3]>, GeometryError> {
    if frame.dim() != 4 {
        return Err(GeometryError::Dimension {
            got: frame.dim(),
            expected: "n = 4",
        });
    }
    Ok(project_vertices(frame)
        .into_iter()
        .map(|p| [p[0], p[1], p[2]])
        .collect())
}

/// Angles (κ, λ) selecting a unit vector orthogonal to a given U ∈ S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank2Angles {
    pub kappa: f64,
    pub lambda: f64,
}

/// V = cos κ sin λ (−y, x, −w, z) + sin κ sin λ (−z, w, x, −y) + cos λ (−w, −z, y, x).
///
/// The three vectors are orthonormal and orthogonal to U = (x, y, z, w), so V is a unit
/// vector in U⊥.
pub fn build_rank2_pair(u: &UnitVector, r: Rank2Angles) -> Result<UnitVector, GeometryError> {
    let [x, y, z, w] = coords4(u)?;
    let (sk, ck) = r.kappa.sin_cos();
    let (sl, cl) = r.lambda.sin_cos();
    let (a, b, c) = (ck * sl, sk * sl, cl);
    Ok(UnitVector(vec![
        -a * y - b * z - c * w,
        a * x + b * w - c * z,
        -a * w + b * x + c * y,
        a * z - b * y + c * x,
    ]))
}

pub(crate) fn coords4(u: &UnitVector) -> Result<[f64; 4], GeometryError> {
    match u.coords() {
        &[x, y, z, w] => Ok([x, y, z, w]),
        other => Err(GeometryError::Dimension {
            got: other.len(),
            expected: "n = 4",
        }),
    }
}

/// A uniformly random orthonormal pair (U, V) in ℝ⁴: V is the normalized component of a
/// second uniform direction orthogonal to U.
pub fn sample_orthonormal_pair<R: Rng + ?Sized>(rng: &mut R) -> (UnitVector, UnitVector) {
    let u = sample_unit_vector(4, rng).expect("n = 4");
    loop {
        let g = sample_unit_vector(4, rng).expect("n = 4");
        let along = u.dot(&g);
        let residual: Vec<f64> = g
            .coords()
            .iter()
            .zip(u.coords())
            .map(|(gi, ui)| gi - along * ui)
            .collect();
        if norm(&residual) > 1e-8 {
            let v = UnitVector::normalize(residual).expect("nonzero residual");
            return (u, v);
        }
    }
}
