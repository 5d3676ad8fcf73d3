//! Experiment configuration: the JSON schema, its validation, and the
//! builders that turn descriptors into core objects.
//!
//! A config file is a single JSON object:
//!
//! ```json
//! {
//!   "experiment": "favard-curve-decay",
//!   "family": {"type": "curve", "shape": "parabola",
//!              "coefficient": -0.5, "window": [-1.0, 1.0]},
//!   "set": {"ifs": "four-corner", "ratio": [1, 4], "generations": [1, 6]},
//!   "resolutions": {"param_nodes": 256},
//!   "seeds": [21],
//!   "output": {"csv": "curve-decay.csv", "json": "curve-decay.json"}
//! }
//! ```
//!
//! Unknown keys are rejected so typos fail loudly. Every field except
//! `experiment` and `set` has defaults; `seeds` may stay empty when the
//! binary receives `--seed`. Config values override command-line flags.

use favard_core::error::Error as CoreError;
use favard_core::family::{CurveSpec, ProjectionFamily, SurfaceSpec, VantageSet};
use favard_core::favard::SweepShape;
use favard_core::fractal::{self, SimilarityIFS};
use favard_core::geom::{BBox, CellSet, Point};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;
use std::path::PathBuf;

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Identifier used in artifact names and metadata: lowercase
    /// alphanumerics and dashes.
    pub experiment: String,
    /// Projection family or swept shape; experiments with a built-in
    /// geometry (counterexample) ignore it.
    #[serde(default)]
    pub family: Option<FamilyDescriptor>,
    pub set: SetDescriptor,
    #[serde(default)]
    pub resolutions: Resolutions,
    /// Seeds for randomized estimators; the first one drives the run.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let id_ok = !self.experiment.is_empty()
            && self
                .experiment
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-');
        if !id_ok {
            return Err(CliError::Config(format!(
                "experiment id {:?} must be lowercase alphanumerics and dashes",
                self.experiment
            )));
        }
        self.set.validate()?;
        self.resolutions.validate()?;
        if let Some(f) = &self.family {
            f.build()?;
        }
        Ok(())
    }

    /// The seed driving the run: the config's first seed when present
    /// (config overrides flags), the `--seed` flag otherwise.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64> {
        self.seeds.first().copied().or(flag).ok_or_else(|| {
            CliError::Config(
                "a seed is mandatory: pass --seed or set \"seeds\" in the config".into(),
            )
        })
    }
}

/// Which finite set the experiment sweeps: a similarity IFS plus either a
/// generation range or a list of neighborhood radii (an experiment may use
/// both, e.g. the counterexample suite).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDescriptor {
    pub ifs: IfsKind,
    /// Contraction ratio as (numerator, denominator).
    #[serde(default = "default_ratio")]
    pub ratio: (i64, i64),
    /// Inclusive generation range for generation sweeps.
    #[serde(default)]
    pub generations: Option<(u32, u32)>,
    /// Neighborhood radii for dilation sweeps.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IfsKind {
    FourCorner,
    Linear,
}

fn default_ratio() -> (i64, i64) {
    (1, 4)
}

impl SetDescriptor {
    pub fn validate(&self) -> Result<()> {
        let (p, q) = self.ratio;
        if p <= 0 || q <= 0 || p >= q {
            return Err(CliError::Config(format!(
                "contraction ratio {p}/{q} must lie in (0, 1)"
            )));
        }
        if let Some((lo, hi)) = self.generations {
            if lo > hi {
                return Err(CliError::Config(format!(
                    "generation range [{lo}, {hi}] is empty"
                )));
            }
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() {
                return Err(CliError::Config("radii list is empty".into()));
            }
            if radii.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
                return Err(CliError::Config("radii must be positive and finite".into()));
            }
        }
        self.ifs_system()?;
        Ok(())
    }

    pub fn ifs_system(&self) -> Result<SimilarityIFS> {
        let r = Ratio::new(self.ratio.0, self.ratio.1);
        let sys = match self.ifs {
            IfsKind::FourCorner => SimilarityIFS::four_corner(r)?,
            IfsKind::Linear => SimilarityIFS::linear(r)?,
        };
        Ok(sys)
    }

    pub fn generations(&self) -> Result<RangeInclusive<u32>> {
        let (lo, hi) = self.generations.ok_or_else(|| {
            CliError::Config("this experiment needs \"generations\" in the set descriptor".into())
        })?;
        Ok(lo..=hi)
    }

    pub fn radii_list(&self) -> Result<&[f64]> {
        self.radii.as_deref().ok_or_else(|| {
            CliError::Config("this experiment needs \"radii\" in the set descriptor".into())
        })
    }

    pub fn build(&self, n: u32) -> Result<CellSet> {
        let r = Ratio::new(self.ratio.0, self.ratio.1);
        let cells = match self.ifs {
            IfsKind::FourCorner => fractal::four_corner_cantor(r, n)?,
            IfsKind::Linear => fractal::linear_cantor(r, n)?,
        };
        Ok(cells)
    }

    /// The smallest generation whose cell side is at most `r`.
    pub fn generation_at_scale(&self, r: f64) -> u32 {
        let ratio = self.ratio.0 as f64 / self.ratio.1 as f64;
        ((r.ln() / ratio.ln()) - 1e-9).ceil().max(0.0) as u32
    }
}

/// Family descriptor, `{"type": ..., params...}` in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyDescriptor {
    Orthogonal,
    Radial {
        center: [f64; 2],
        radius: f64,
        /// Box the projected sets must stay inside.
        visible: ([f64; 2], [f64; 2]),
    },
    Curve {
        shape: CurveShape,
        /// Quadratic coefficient for the parabola, radius for the arc.
        coefficient: f64,
        window: (f64, f64),
    },
    /// Straight graph `t -> slope * t`: the degenerate comparison family.
    Line {
        slope: f64,
        window: (f64, f64),
    },
    Surface {
        /// Paraboloid profile coefficient.
        coefficient: f64,
        /// Disk radius of the swept surface patch.
        extent: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveShape {
    Parabola,
    CircleArc,
}

impl FamilyDescriptor {
    pub fn build(&self) -> Result<ProjectionFamily> {
        let fam = match self {
            FamilyDescriptor::Orthogonal => ProjectionFamily::orthogonal(),
            FamilyDescriptor::Radial {
                center,
                radius,
                visible,
            } => {
                let vantage = VantageSet::circle(Point::new2(center[0], center[1]), *radius)?;
                ProjectionFamily::radial(vantage, BBox::new2(visible.0, visible.1)?)?
            }
            FamilyDescriptor::Curve { .. } => ProjectionFamily::curve(self.curve_spec()?)?,
            FamilyDescriptor::Line { slope, window } => ProjectionFamily::line(*slope, *window)?,
            FamilyDescriptor::Surface {
                coefficient,
                extent,
            } => ProjectionFamily::surface(SurfaceSpec::paraboloid(*coefficient, *extent)?)?,
        };
        Ok(fam)
    }

    fn curve_spec(&self) -> Result<CurveSpec> {
        match self {
            FamilyDescriptor::Curve {
                shape,
                coefficient,
                window,
            } => {
                let spec = match shape {
                    CurveShape::Parabola => CurveSpec::parabola(*coefficient, *window)?,
                    CurveShape::CircleArc => CurveSpec::circle_arc(*coefficient, *window)?,
                };
                Ok(spec)
            }
            _ => Err(CoreError::invalid("not a curve family").into()),
        }
    }

    /// The shape `Γ` for the area-based estimators; orthogonal and radial
    /// families project instead of sweeping and have none.
    pub fn sweep_shape(&self) -> Result<SweepShape> {
        let shape =
            match self {
                FamilyDescriptor::Curve { .. } => SweepShape::Curve(self.curve_spec()?),
                FamilyDescriptor::Line { slope, window } => SweepShape::Line {
                    slope: *slope,
                    interval: *window,
                },
                FamilyDescriptor::Surface {
                    coefficient,
                    extent,
                } => SweepShape::Surface(SurfaceSpec::paraboloid(*coefficient, *extent)?),
                _ => return Err(CliError::Config(
                    "this family projects instead of sweeping; choose a curve, line, or surface"
                        .into(),
                )),
            };
        Ok(shape)
    }

    pub fn vantage(&self) -> Result<VantageSet> {
        match self {
            FamilyDescriptor::Radial { center, radius, .. } => Ok(VantageSet::circle(
                Point::new2(center[0], center[1]),
                *radius,
            )?),
            _ => Err(CliError::Config(
                "a visibility experiment needs a radial family".into(),
            )),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilyDescriptor::Orthogonal => "orthogonal",
            FamilyDescriptor::Radial { .. } => "radial",
            FamilyDescriptor::Curve { .. } => "curve",
            FamilyDescriptor::Line { .. } => "line",
            FamilyDescriptor::Surface { .. } => "surface",
        }
    }
}

/// Estimator selector for experiments where several apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    ParameterIntegral,
    Minkowski,
    Buffon,
}

/// Discretization knobs. Every field has a desk-scale default; `pitch` and
/// `image_resolution` default to tracking the cell side of the set at hand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Resolutions {
    /// Raster pitch for Minkowski sweeps; `None` uses cell side / 4.
    pub pitch: Option<f64>,
    /// Trapezoid nodes for parameter integrals.
    pub param_nodes: usize,
    /// Per-map image resolution; `None` uses the cell side.
    pub image_resolution: Option<f64>,
    /// Monte Carlo drops for Buffon estimates.
    pub drops: usize,
    /// Carrier nodes for visibility integrals.
    pub vantage_nodes: usize,
    /// Estimators to run where several apply; empty means the experiment's
    /// default.
    pub methods: Vec<MethodKind>,
    /// δ grid for transversality probes and tube checks.
    pub deltas: Option<Vec<f64>>,
    /// Point pairs sampled by transversality probes.
    pub pairs: usize,
    /// Stratified parameter samples per pair.
    pub psi_samples: usize,
    /// Lines sampled by the tube check.
    pub lines: usize,
    /// Riesz exponent s.
    pub exponent: f64,
    /// Gauss order per cell axis for natural measures.
    pub quadrature_order: u32,
}

impl Default for Resolutions {
    fn default() -> Resolutions {
        Resolutions {
            pitch: None,
            param_nodes: 256,
            image_resolution: None,
            drops: 200_000,
            vantage_nodes: 256,
            methods: Vec::new(),
            deltas: None,
            pairs: 2048,
            psi_samples: 20_000,
            lines: 64,
            exponent: 1.0,
            quadrature_order: 2,
        }
    }
}

impl Resolutions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pitch", self.pitch),
            ("image_resolution", self.image_resolution),
        ] {
            if let Some(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    return Err(CliError::Config(format!("{name} {x} must be positive")));
                }
            }
        }
        if let Some(deltas) = &self.deltas {
            if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
                return Err(CliError::Config(
                    "deltas must be a non-empty positive list".into(),
                ));
            }
        }
        if !(self.exponent > 0.0) || !self.exponent.is_finite() {
            return Err(CliError::Config(format!(
                "exponent {} must be positive",
                self.exponent
            )));
        }
        for (name, v) in [
            ("param_nodes", self.param_nodes),
            ("drops", self.drops),
            ("vantage_nodes", self.vantage_nodes),
            ("pairs", self.pairs),
            ("psi_samples", self.psi_samples),
            ("lines", self.lines),
        ] {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be at least 1")));
            }
        }
        if self.quadrature_order == 0 {
            return Err(CliError::Config(
                "quadrature_order must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Artifact paths, relative to `--out` unless absolute; `None` derives
/// `<experiment>.csv` / `<experiment>.json`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"experiment": "probe", "set": {{"ifs": "four-corner", "generations": [1, 3]}}{extra}}}"#
        )
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal("")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.set.ratio, (1, 4));
        assert_eq!(cfg.resolutions.param_nodes, 256);
        assert!(cfg.seeds.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = minimal(r#", "pitch": 0.1"#);
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn config_seed_overrides_the_flag() {
        let with: ExperimentConfig = serde_json::from_str(&minimal(r#", "seeds": [9]"#)).unwrap();
        assert_eq!(with.resolve_seed(Some(4)).unwrap(), 9);
        let without: ExperimentConfig = serde_json::from_str(&minimal("")).unwrap();
        assert_eq!(without.resolve_seed(Some(4)).unwrap(), 4);
        assert!(without.resolve_seed(None).is_err());
    }

    #[test]
    fn family_descriptors_build() {
        let curve: FamilyDescriptor = serde_json::from_str(
            r#"{"type": "curve", "shape": "parabola", "coefficient": -0.5, "window": [-1, 1]}"#,
        )
        .unwrap();
        curve.build().unwrap();
        curve.sweep_shape().unwrap();

        let radial: FamilyDescriptor = serde_json::from_str(
            r#"{"type": "radial", "center": [0.5, 0.5], "radius": 3.0,
                "visible": [[0, 0], [1, 1]]}"#,
        )
        .unwrap();
        radial.build().unwrap();
        assert!(
            radial.sweep_shape().is_err(),
            "radial maps project, not sweep"
        );

        let ortho: FamilyDescriptor = serde_json::from_str(r#"{"type": "orthogonal"}"#).unwrap();
        assert!(ortho.vantage().is_err());
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let empty_gens: ExperimentConfig = serde_json::from_str(
            r#"{"experiment": "probe", "set": {"ifs": "linear", "generations": [4, 2]}}"#,
        )
        .unwrap();
        assert!(empty_gens.validate().is_err());

        let bad_radii: ExperimentConfig = serde_json::from_str(
            r#"{"experiment": "probe", "set": {"ifs": "linear", "radii": [0.1, -0.5]}}"#,
        )
        .unwrap();
        assert!(bad_radii.validate().is_err());

        let bad_id: ExperimentConfig = serde_json::from_str(
            r#"{"experiment": "Probe!", "set": {"ifs": "linear", "radii": [0.1]}}"#,
        )
        .unwrap();
        assert!(bad_id.validate().is_err());
    }

    #[test]
    fn scale_matching_picks_the_finest_generation_not_finer_than_needed() {
        let set: SetDescriptor =
            serde_json::from_str(r#"{"ifs": "linear", "ratio": [1, 4], "radii": [0.0625]}"#)
                .unwrap();
        assert_eq!(set.generation_at_scale(0.0625), 2, "4^-2 exactly");
        assert_eq!(set.generation_at_scale(0.1), 2, "side 1/16 <= 0.1 < 1/4");
        assert_eq!(set.generation_at_scale(1.0), 0);
    }
}
