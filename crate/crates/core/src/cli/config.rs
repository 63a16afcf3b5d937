use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolkitError};
use crate::kernels::KernelConvention;
use crate::norms::{ball_points, QuadratureSpec};
use crate::params::{Point, PointSeq, SpaceParams};
use crate::poly::PolyFn;

pub const DEFAULT_DEGREE_CAP: u32 = 12;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `1 - 2^{-k}` along the first axis, `k = 1..=count`.
    Dyadic,
    /// `radius * e^{2 pi i k / count}` in the first coordinate.
    Lattice,
    /// Seeded uniform points of the ball of the given radius.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub count: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_radius() -> f64 {
    0.9
}

fn default_cap() -> u32 {
    DEFAULT_DEGREE_CAP
}

/// Options read by individual commands; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CommandOptions {
    /// Target values `[re, im]`, one per point.
    pub lambda: Option<Vec<[f64; 2]>>,
    /// Second sequence for `glue`; the main sequence is halved when absent.
    pub second_points: Option<Vec<Vec<f64>>>,
    pub second_lambda: Option<Vec<[f64; 2]>>,
    /// Power `l` of the dual functions; smallest integer above `s` when absent.
    pub power: Option<u32>,
    /// Second exponent of weighted interpolation.
    pub q: f64,
    pub jmax: u32,
    pub lmax: u32,
    pub trials: usize,
    pub ha0_powers: Vec<u32>,
    pub ha0_samples: usize,
    pub identity_samples: usize,
    pub derivative_orders: u32,
    pub kernel_cap: u32,
    pub convention: KernelConvention,
    pub mu: Option<Vec<f64>>,
    pub instances: usize,
    pub family_size: usize,
    pub draws: usize,
    pub function: Option<PolyFn>,
}

impl Default for CommandOptions {
    fn default() -> Self {
        Self {
            lambda: None,
            second_points: None,
            second_lambda: None,
            power: None,
            q: 2.0,
            jmax: 3,
            lmax: 4,
            trials: 50,
            ha0_powers: vec![1, 2, 3],
            ha0_samples: 1000,
            identity_samples: 100,
            derivative_orders: 2,
            kernel_cap: crate::extension::DEFAULT_KERNEL_CAP,
            convention: KernelConvention::Exact,
            mu: None,
            instances: 50,
            family_size: 4,
            draws: 256,
            function: None,
        }
    }
}

/// One JSON document describing a run. Serializing it gives the effective
/// configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    #[serde(default)]
    pub override_sp_bound: bool,
    /// Points as flat `[re_1, im_1, ..., re_n, im_n]` arrays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default = "default_cap")]
    pub degree_cap: u32,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub options: CommandOptions,
}

impl RunConfig {
    /// Configuration without points, used by commands that need none.
    pub fn bare(n: usize, s: f64, p: f64) -> Self {
        Self {
            n,
            s,
            p,
            override_sp_bound: false,
            points: None,
            generator: None,
            degree_cap: DEFAULT_DEGREE_CAP,
            quadrature: QuadratureSpec::default(),
            seed: DEFAULT_SEED,
            strict: false,
            options: CommandOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ToolkitError::invalid(format!("config key `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ToolkitError::invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.quadrature.validate()?;
        if self.points.is_some() && self.generator.is_some() {
            return Err(ToolkitError::invalid("config keys `points` and `generator` are exclusive"));
        }
        if let Some(g) = &self.generator {
            if g.count == 0 {
                return Err(ToolkitError::invalid("config key `generator.count` must be positive"));
            }
            if !(g.radius > 0.0 && g.radius < 1.0) {
                return Err(ToolkitError::invalid("config key `generator.radius` must lie in (0, 1)"));
            }
        }
        if self.points.is_some() || self.generator.is_some() {
            self.sequence()?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SpaceParams> {
        SpaceParams::with_override(self.n, self.s, self.p, self.override_sp_bound)
    }

    pub fn sequence(&self) -> Result<PointSeq> {
        let params = self.params()?;
        match (&self.points, &self.generator) {
            (Some(flat), _) => points_from_flat(params, flat),
            (None, Some(g)) => generate(params, g),
            (None, None) => Err(ToolkitError::invalid("config needs `points` or `generator`")),
        }
    }

    pub fn lambda(&self, len: usize) -> Result<Vec<Complex64>> {
        values_or_default(self.options.lambda.as_deref(), len, "options.lambda")
    }
}

pub fn points_from_flat(params: SpaceParams, flat: &[Vec<f64>]) -> Result<PointSeq> {
    let pts = flat
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != 2 * params.n() {
                return Err(ToolkitError::invalid(format!(
                    "config key `points[{i}]` has {} numbers, expected {}",
                    v.len(),
                    2 * params.n()
                )));
            }
            Point::from_re_im(v)
        })
        .collect::<Result<Vec<_>>>()?;
    PointSeq::new(params, pts)
}

fn generate(params: SpaceParams, g: &GeneratorSpec) -> Result<PointSeq> {
    let n = params.n();
    match g.kind {
        GeneratorKind::Dyadic => PointSeq::dyadic(params, g.count),
        GeneratorKind::Lattice => {
            let pts = (0..g.count)
                .map(|k| {
                    let mut c = vec![Complex64::default(); n];
                    c[0] = Complex64::from_polar(g.radius, TAU * k as f64 / g.count as f64);
                    Point::new(c)
                })
                .collect::<Result<Vec<_>>>()?;
            PointSeq::new(params, pts)
        }
        GeneratorKind::Random => {
            let pts = ball_points(n, g.count, g.seed)
                .into_iter()
                .map(|z| Point::new(z.into_iter().map(|c| c * g.radius).collect()))
                .collect::<Result<Vec<_>>>()?;
            PointSeq::new(params, pts)
        }
    }
}

/// Values from `[re, im]` pairs, or `e^{2 pi i k / len} / 2` when absent.
pub fn values_or_default(values: Option<&[[f64; 2]]>, len: usize, key: &str) -> Result<Vec<Complex64>> {
    match values {
        Some(v) if v.len() != len => Err(ToolkitError::invalid(format!(
            "config key `{key}` has {} entries for {len} points",
            v.len()
        ))),
        Some(v) => Ok(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()),
        None => Ok((0..len)
            .map(|k| Complex64::from_polar(0.5, TAU * k as f64 / len as f64))
            .collect()),
    }
}
