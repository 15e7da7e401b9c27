//! Run configuration: a TOML file with a mandatory `[units]` table, patched
//! by `--set section.key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use dgeeg::analytic::{Dipole, Orientation};
use dgeeg::evalmetrics::DEFAULT_ECCENTRICITIES;
use dgeeg::pipeline::{ForwardOptions, ModelSpec};
use dgeeg::schemes::{DgParameters, Scheme};
use dgeeg::solve::PreconditionerKind;
use dgeeg::voxelgeom::LabelEncoding;

/// Position and direction of the dipole used for flux visualization.
pub const FLUXVIS_POSITION: [f64; 3] = [1.0, 47.0, 47.0];
pub const FLUXVIS_DIRECTION: [f64; 3] = [0.0, 1.0, 1.0];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub units: Units,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub resolution: ResolutionSection,
    #[serde(default)]
    pub discretization: DiscretizationSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub sources: SourcesSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub transfer: TransferSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Units {
    pub length: String,
    pub conductivity: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Overrides the generated model name.
    pub name: Option<String>,
    /// Outer radii of brain, CSF, skull and skin.
    pub radii_mm: Option<Vec<f64>>,
    pub conductivities: Option<Vec<f64>>,
    pub skull_outer_mm: Option<f64>,
    #[serde(default)]
    pub padding_mm: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionSection {
    pub seg_mm: f64,
    /// Defaults to `seg_mm`.
    pub h_mm: Option<f64>,
}

impl Default for ResolutionSection {
    fn default() -> Self {
        Self { seg_mm: 4.0, h_mm: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationSection {
    pub scheme: String,
    pub eta: f64,
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self { scheme: "dg".into(), eta: DgParameters::<f64>::default().eta }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `none`, `diagonal`, `block-diagonal` or `multigrid`; per-scheme
    /// default when absent.
    pub preconditioner: Option<String>,
    pub single_precision_preconditioner: bool,
    pub deflation: bool,
    pub batch_size: usize,
    pub series_order: usize,
    pub series_tolerance: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 20_000,
            preconditioner: None,
            single_precision_preconditioner: false,
            deflation: true,
            batch_size: 8,
            series_order: 300,
            series_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourcesSection {
    pub eccentricities: Option<Vec<f64>>,
    pub count: usize,
    pub seed: u64,
    pub orientation: String,
    /// Explicit single dipole for `forward` and `fluxvis`.
    pub position: Option<[f64; 3]>,
    pub moment: Option<[f64; 3]>,
}

impl Default for SourcesSection {
    fn default() -> Self {
        Self { eccentricities: None, count: 10, seed: 42, orientation: "radial".into(), position: None, moment: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// Model names `seg-<s>-h-<h>[-R<r>]`; the `[model]` model when absent.
    pub models: Option<Vec<String>>,
    pub schemes: Vec<String>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { models: None, schemes: vec!["cg".into(), "dg".into()] }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransferSection {
    /// Number of sensors, spread evenly over the skin evaluation points.
    pub sensors: usize,
    pub reference: usize,
}

impl Default for TransferSection {
    fn default() -> Self {
        Self { sensors: 32, reference: 0 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Also write VTK files from `forward`.
    pub vtk: bool,
    /// `slab` (cells within one cell of the dipole's x plane) or `all`.
    pub vtk_region: String,
    /// `raw8` or `ascii`.
    pub seg_encoding: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into(), vtk: false, vtk_region: "slab".into(), seg_encoding: "raw8".into() }
    }
}

const DEFAULT_UNITS: &str = "[units]\nlength = \"mm\"\nconductivity = \"S/m\"\n";

impl RunConfig {
    /// Reads `path` (or starts from the defaults) and applies `overrides`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let t: toml::Table = text.parse().with_context(|| format!("parsing config {}", p.display()))?;
                if !t.contains_key("units") {
                    bail!("config {} lacks the mandatory [units] table", p.display());
                }
                t
            }
            None => DEFAULT_UNITS.parse()?,
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = table.try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.length != "mm" {
            bail!("units.length must be \"mm\", got {:?}", self.units.length);
        }
        if self.units.conductivity != "S/m" {
            bail!("units.conductivity must be \"S/m\", got {:?}", self.units.conductivity);
        }
        for (what, v) in [("radii_mm", &self.model.radii_mm), ("conductivities", &self.model.conductivities)] {
            if let Some(v) = v {
                if v.len() != 4 {
                    bail!("model.{what} needs four values (brain, csf, skull, skin), got {}", v.len());
                }
            }
        }
        self.scheme()?;
        self.orientation()?;
        self.encoding()?;
        if !matches!(self.output.vtk_region.as_str(), "slab" | "all") {
            bail!("output.vtk_region must be \"slab\" or \"all\"");
        }
        Ok(())
    }

    pub fn scheme(&self) -> Result<Scheme> {
        self.discretization.scheme.parse().map_err(anyhow::Error::msg)
    }

    pub fn sweep_schemes(&self) -> Result<Vec<Scheme>> {
        self.sweep.schemes.iter().map(|s| s.parse().map_err(anyhow::Error::msg)).collect()
    }

    pub fn orientation(&self) -> Result<Orientation> {
        match self.sources.orientation.as_str() {
            "radial" => Ok(Orientation::Radial),
            "tangential" => Ok(Orientation::Tangential),
            o => bail!("sources.orientation must be radial or tangential, got {o:?}"),
        }
    }

    pub fn encoding(&self) -> Result<LabelEncoding> {
        match self.output.seg_encoding.as_str() {
            "raw8" => Ok(LabelEncoding::Raw8),
            "ascii" => Ok(LabelEncoding::Ascii),
            e => bail!("output.seg_encoding must be raw8 or ascii, got {e:?}"),
        }
    }

    pub fn eccentricities(&self) -> (Vec<f64>, bool) {
        match &self.sources.eccentricities {
            Some(e) => (e.clone(), false),
            None => (DEFAULT_ECCENTRICITIES.to_vec(), true),
        }
    }

    /// The `[model]` / `[resolution]` model.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let seg = self.resolution.seg_mm;
        let h = self.resolution.h_mm.unwrap_or(seg);
        let mut spec = match self.model.skull_outer_mm {
            Some(r) => ModelSpec::reduced_skull(seg, h, r)?,
            None => ModelSpec::sphere(seg, h),
        };
        self.customize(&mut spec)?;
        if let Some(name) = &self.model.name {
            spec.name = name.clone();
        }
        Ok(spec)
    }

    /// Models swept by `sweep`.
    pub fn sweep_specs(&self) -> Result<Vec<ModelSpec>> {
        match &self.sweep.models {
            None => Ok(vec![self.model_spec()?]),
            Some(names) => names
                .iter()
                .map(|n| {
                    let mut spec: ModelSpec = n.parse()?;
                    self.customize(&mut spec)?;
                    Ok(spec)
                })
                .collect(),
        }
    }

    fn customize(&self, spec: &mut ModelSpec) -> Result<()> {
        let labels: Vec<u8> = spec.table.entries().iter().map(|c| c.label).collect();
        if let Some(radii) = &self.model.radii_mm {
            for (&l, &r) in labels.iter().zip(radii) {
                spec.table.set_outer_radius(l, r)?;
            }
            if let Some(r) = self.model.skull_outer_mm {
                let skull = spec.table.roles().skull.context("table has no skull")?;
                spec.table.set_outer_radius(skull, r)?;
            }
        }
        if let Some(sigma) = &self.model.conductivities {
            for (&l, &s) in labels.iter().zip(sigma) {
                spec.table.set_conductivity(l, s)?;
            }
        }
        spec.table.sphere_radii()?;
        spec.padding_mm = self.model.padding_mm;
        Ok(())
    }

    pub fn forward_options(&self) -> Result<ForwardOptions> {
        let mut opts = ForwardOptions::default();
        opts.dg.eta = self.discretization.eta;
        let s = &self.solver;
        opts.solve.tolerance = s.tolerance;
        opts.solve.max_iterations = s.max_iterations;
        opts.solve.preconditioner =
            s.preconditioner.as_deref().map(|p| p.parse::<PreconditionerKind>()).transpose().map_err(anyhow::Error::msg)?;
        opts.solve.single_precision_preconditioner = s.single_precision_preconditioner;
        opts.solve.deflation = s.deflation;
        opts.solve.batch_size = s.batch_size;
        opts.series_order = s.series_order;
        opts.series_tolerance = s.series_tolerance;
        Ok(opts)
    }

    /// The explicitly configured dipole, if any.
    pub fn explicit_dipole(&self) -> Result<Option<Dipole<f64>>> {
        match (self.sources.position, self.sources.moment) {
            (Some(p), Some(m)) => Ok(Some(Dipole::new(p, m)?)),
            (None, None) => Ok(None),
            _ => bail!("sources.position and sources.moment must be given together"),
        }
    }

    /// `output.dir`, below `root` when relative.
    pub fn output_dir(&self, root: Option<&Path>) -> PathBuf {
        match root {
            Some(r) if self.output.dir.is_relative() => r.join(&self.output.dir),
            _ => self.output.dir.clone(),
        }
    }
}

/// Applies `section.key=value`; the value is read as a TOML value and falls
/// back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').with_context(|| format!("override `{assignment}` lacks `=`"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override key `{key}` is malformed");
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("override `{key}`: `{p}` is not a table"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
