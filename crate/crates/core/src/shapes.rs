//! Initial surfaces: sums of harmonics, spheroids, random band-limited
//! perturbations and off-center balls.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Hypersurface;
use crate::harmonics::{self, harmonic_field};
use crate::oracle::{translated_ball_radius, SpheroidSpec};
use crate::spheregrid::{self, GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeType {
    Harmonic,
    Spheroid,
    RandomBand,
    TranslatedBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBand {
    pub l_min: usize,
    pub l_max: usize,
    pub target_c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslatedBall {
    pub center: [f64; 3],
    #[serde(default = "one")]
    pub radius: f64,
}

fn one() -> f64 {
    1.0
}

/// Description of an initial surface. Only the block named by `type` is
/// read; it must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    #[serde(rename = "type")]
    pub kind: ShapeType,
    /// `(l, m, amplitude)` triples; `u = sum amplitude * Y_{l,m}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonic: Option<Vec<(usize, i64, f64)>>,
    /// Semi-axes; on S^1 the ellipse with `a` along x and `c` along y.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spheroid: Option<SpheroidSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_band: Option<RandomBand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translated_ball: Option<TranslatedBall>,
    /// Average over coordinate reflections (random shapes are drawn
    /// reflection-symmetric to begin with).
    #[serde(default)]
    pub symmetrize: bool,
}

impl ShapeSpec {
    pub fn harmonic(modes: Vec<(usize, i64, f64)>) -> Self {
        ShapeSpec { kind: ShapeType::Harmonic, harmonic: Some(modes), ..Self::empty(ShapeType::Harmonic) }
    }

    pub fn spheroid(a: f64, c: f64) -> Self {
        ShapeSpec { spheroid: Some(SpheroidSpec { a, c }), ..Self::empty(ShapeType::Spheroid) }
    }

    pub fn random_band(l_min: usize, l_max: usize, target_c2: f64) -> Self {
        ShapeSpec { random_band: Some(RandomBand { l_min, l_max, target_c2 }), ..Self::empty(ShapeType::RandomBand) }
    }

    pub fn translated_ball(center: [f64; 3]) -> Self {
        ShapeSpec {
            translated_ball: Some(TranslatedBall { center, radius: 1.0 }),
            ..Self::empty(ShapeType::TranslatedBall)
        }
    }

    fn empty(kind: ShapeType) -> Self {
        ShapeSpec { kind, harmonic: None, spheroid: None, random_band: None, translated_ball: None, symmetrize: false }
    }

    pub fn symmetrized(mut self, on: bool) -> Self {
        self.symmetrize = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let missing = |name: &str| Err(Error::domain(format!("shape type {name} needs a \"{name}\" block")));
        match self.kind {
            ShapeType::Harmonic => match &self.harmonic {
                None => missing("harmonic"),
                Some(modes) => {
                    for &(l, m, a) in modes {
                        if m.unsigned_abs() as usize > l || !a.is_finite() {
                            return Err(Error::domain(format!("invalid harmonic mode ({l}, {m}, {a})")));
                        }
                    }
                    Ok(())
                }
            },
            ShapeType::Spheroid => match &self.spheroid {
                None => missing("spheroid"),
                Some(s) => SpheroidSpec::new(s.a, s.c).map(|_| ()),
            },
            ShapeType::RandomBand => match &self.random_band {
                None => missing("random_band"),
                Some(b) => {
                    if b.l_min > b.l_max || b.l_max == 0 {
                        return Err(Error::domain(format!("empty degree band [{}, {}]", b.l_min, b.l_max)));
                    }
                    if !(b.target_c2 > 0.0 && b.target_c2.is_finite()) {
                        return Err(Error::domain(format!("target_c2 must be positive, got {}", b.target_c2)));
                    }
                    Ok(())
                }
            },
            ShapeType::TranslatedBall => match &self.translated_ball {
                None => missing("translated_ball"),
                Some(b) => {
                    let c = b.center.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(b.radius > 0.0) || !(c < b.radius) {
                        return Err(Error::domain(format!(
                            "the origin must lie inside the ball: |center| = {c} vs radius {}",
                            b.radius
                        )));
                    }
                    Ok(())
                }
            },
        }
    }

    /// Builds the surface on `grid`; `seed` drives random shapes.
    pub fn build(&self, grid: &Arc<GridSpec>, seed: u64) -> Result<Hypersurface> {
        self.validate()?;
        let u = match self.kind {
            ShapeType::Harmonic => harmonic_sum(grid, self.harmonic.as_deref().unwrap_or(&[]))?,
            ShapeType::Spheroid => {
                let s = self.spheroid.expect("validated");
                spheroid(grid, s.a, s.c)?
            }
            ShapeType::RandomBand => {
                let b = self.random_band.expect("validated");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_band(grid, b.l_min, b.l_max, b.target_c2, self.symmetrize, &mut rng)?
            }
            ShapeType::TranslatedBall => {
                let b = self.translated_ball.expect("validated");
                translated_ball(grid, b.center, b.radius)?
            }
        };
        let u = if self.symmetrize { spheregrid::symmetrize(&u) } else { u };
        Hypersurface::new(u)
    }
}

pub fn harmonic_sum(grid: &Arc<GridSpec>, modes: &[(usize, i64, f64)]) -> Result<ScalarField> {
    let mut vals = vec![0.0; grid.len()];
    for &(l, m, a) in modes {
        let y = harmonic_field(grid, l, m)?;
        for (v, y) in vals.iter_mut().zip(y.values()) {
            *v += a * y;
        }
    }
    ScalarField::new(grid.clone(), vals)
}

/// `u = w - 1` for the spheroid (ellipse on S^1) centered at the origin.
pub fn spheroid(grid: &Arc<GridSpec>, a: f64, c: f64) -> Result<ScalarField> {
    let s = SpheroidSpec::new(a, c)?;
    if grid.n() == 1 {
        return Ok(ScalarField::from_fn(grid, |x| {
            1.0 / (x[0] * x[0] / (a * a) + x[1] * x[1] / (c * c)).sqrt() - 1.0
        }));
    }
    Ok(ScalarField::from_fn(grid, |x| s.radius(x) - 1.0))
}

/// `u = w - 1` for the ball of radius `radius` centered at `center`.
pub fn translated_ball(grid: &Arc<GridSpec>, center: [f64; 3], radius: f64) -> Result<ScalarField> {
    let c = if grid.n() == 1 { [center[0], center[1], 0.0] } else { center };
    if !(c.iter().map(|v| v * v).sum::<f64>().sqrt() < radius) {
        return Err(Error::domain("the origin must lie inside the translated ball"));
    }
    Ok(ScalarField::from_fn(grid, |x| translated_ball_radius(c, radius, x) - 1.0))
}

/// Whether a mode is invariant under every reflection `x_i -> -x_i`.
fn reflection_even(n: usize, l: usize, m: i64) -> bool {
    if n == 1 {
        m >= 0 && l % 2 == 0
    } else {
        m >= 0 && l % 2 == 0 && m % 2 == 0
    }
}

/// Random combination of degrees `l_min..=l_max` with coefficients decaying
/// like `1/(1 + l)^2`, scaled so that the C^2 norm equals `target_c2`.
/// With `symmetric` only reflection-invariant modes are drawn.
pub fn random_band(
    grid: &Arc<GridSpec>,
    l_min: usize,
    l_max: usize,
    target_c2: f64,
    symmetric: bool,
    rng: &mut impl Rng,
) -> Result<ScalarField> {
    let cap = harmonics::max_lmax(grid);
    if l_max > cap {
        return Err(Error::domain(format!("l_max = {l_max} exceeds what the grid resolves ({cap})")));
    }
    let n = grid.n();
    let mut spec = harmonics::HarmonicSpectrum::zeros(n, l_max);
    let mut any = false;
    for l in l_min..=l_max {
        let ms: Vec<i64> = if n == 1 {
            if l == 0 { vec![0] } else { vec![l as i64, -(l as i64)] }
        } else {
            (-(l as i64)..=l as i64).collect()
        };
        for m in ms {
            if l == 0 || (symmetric && !reflection_even(n, l, m)) {
                continue;
            }
            let a: f64 = rng.random_range(-1.0..1.0);
            spec.set(l, m, a / ((1 + l) * (1 + l)) as f64)?;
            any = true;
        }
    }
    if !any {
        return Err(Error::domain(format!(
            "no admissible modes with degree in [{l_min}, {l_max}]{}",
            if symmetric { " and reflection symmetry" } else { "" }
        )));
    }
    let u = harmonics::synthesize(&spec, grid)?;
    let c2 = spheregrid::sup_norms(&u)?.c2;
    if c2 <= 0.0 {
        return Err(Error::domain("random perturbation has no curvature content"));
    }
    Ok(u.map(|v| v * target_c2 / c2))
}
