//! End-to-end experiment drivers shared by the command-line tool and the
//! acceptance suite: model construction, batched forward solves, metric
//! sweeps against the layered-sphere reference and flux comparisons.

use std::collections::HashMap;

use thiserror::Error;

use crate::analytic::{layered_sphere_reference, AnalyticError, Dipole, LayeredSphereModel};
use crate::evalmetrics::{
    ln_mag, local_flux_metrics, rdm, EvalError, FluxField, ForwardSolution, LocalFluxMetrics, MetricsRow,
    PlacedSource, SurfaceSampling,
};
use crate::hexmesh::{build_hex_mesh, compute_skeleton, HexMesh, MeshError, Skeleton};
use crate::schemes::{
    assemble_operator_cg, assemble_operator_dg, assemble_rhs_cg, assemble_rhs_dg, source_conductivity,
    AssemblyWarning, ConductivityField, DgParameters, DofLayout, RhsOptions, Scheme, SchemeError, SubtractionSplit,
};
use crate::solve::{SolveConfig, SolveError, Solver, SolverGeometry};
use crate::voxelgeom::{generate_sphere_segmentation, CompartmentTable, LabelGrid, SegmentationWarning, VoxelError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Voxel(#[from] VoxelError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("{0}")]
    Invalid(String),
}

/// Geometry recipe for a sphere model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub table: CompartmentTable,
    pub seg_mm: f64,
    pub h_mm: f64,
    pub padding_mm: f64,
}

fn mm(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

impl ModelSpec {
    /// Four-layer sphere segmented at `seg_mm` and meshed at `h_mm`
    /// (`seg-<s>-h-<h>`).
    pub fn sphere(seg_mm: f64, h_mm: f64) -> Self {
        Self {
            name: format!("seg-{}-h-{}", mm(seg_mm), mm(h_mm)),
            table: CompartmentTable::four_layer_sphere(),
            seg_mm,
            h_mm,
            padding_mm: 0.0,
        }
    }

    /// Four-layer sphere with the outer skull radius moved to
    /// `skull_outer_mm` (`seg-<s>-h-<h>-R<r>`).
    pub fn reduced_skull(seg_mm: f64, h_mm: f64, skull_outer_mm: f64) -> Result<Self, PipelineError> {
        let mut spec = Self::sphere(seg_mm, h_mm);
        let skull = spec.table.roles().skull.ok_or(VoxelError::MissingRole("skull"))?;
        spec.table.set_outer_radius(skull, skull_outer_mm)?;
        spec.name = format!("{}-R{}", spec.name, mm(skull_outer_mm));
        Ok(spec)
    }
}

impl std::str::FromStr for ModelSpec {
    type Err = PipelineError;

    /// Parses `seg-<s>-h-<h>` with an optional `-R<r>` skull override.
    fn from_str(name: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::Invalid(format!("model name `{name}` is not of the form seg-<s>-h-<h>[-R<r>]"));
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| *v > 0.0 && v.is_finite()).ok_or_else(bad);
        let parts: Vec<&str> = name.split('-').collect();
        match parts.as_slice() {
            ["seg", s, "h", h] => Ok(Self::sphere(num(s)?, num(h)?)),
            ["seg", s, "h", h, r] => {
                let r = r.strip_prefix('R').ok_or_else(bad)?;
                Self::reduced_skull(num(s)?, num(h)?, num(r)?)
            }
            _ => Err(bad()),
        }
    }
}

/// Options for everything after meshing.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardOptions {
    pub dg: DgParameters<f64>,
    pub rhs: RhsOptions,
    pub solve: SolveConfig,
    /// Terms of the layered-sphere series.
    pub series_order: usize,
    pub series_tolerance: f64,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        Self {
            dg: DgParameters::default(),
            rhs: RhsOptions::default(),
            solve: SolveConfig::default(),
            series_order: 100,
            series_tolerance: 1e-10,
        }
    }
}

/// A meshed model with its analytic counterpart and evaluation points.
pub struct HeadModel {
    pub spec: ModelSpec,
    pub grid: LabelGrid,
    pub mesh: HexMesh,
    pub skeleton: Skeleton,
    pub field: ConductivityField<f64>,
    pub sampling: SurfaceSampling,
    pub warnings: Vec<SegmentationWarning>,
}

impl HeadModel {
    pub fn build(spec: ModelSpec) -> Result<Self, PipelineError> {
        let seg = generate_sphere_segmentation(&spec.table, spec.seg_mm, spec.padding_mm)?;
        let mesh = build_hex_mesh(&seg.grid, spec.h_mm)?;
        let skeleton = compute_skeleton(&mesh);
        let field = ConductivityField::from_table(&mesh, &spec.table)?;
        let skin = spec.table.roles().skin.ok_or(VoxelError::MissingRole("skin"))?;
        let sampling = SurfaceSampling::boundary_faces(&mesh, &skeleton, skin)?;
        Ok(Self { spec, grid: seg.grid, mesh, skeleton, field, sampling, warnings: seg.warnings })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn sphere(&self, opts: &ForwardOptions) -> Result<LayeredSphereModel<f64>, PipelineError> {
        let model = LayeredSphereModel::new(self.spec.table.sphere_radii()?, self.spec.table.conductivities())?
            .with_max_order(opts.series_order)
            .with_tolerance(opts.series_tolerance);
        Ok(model)
    }

    pub fn layout(&self, scheme: Scheme) -> DofLayout {
        match scheme {
            Scheme::Cg => DofLayout::Cg { num_vertices: self.mesh.num_vertices() },
            Scheme::Dg => DofLayout::Dg { num_cells: self.mesh.num_cells() },
        }
    }

    /// Assembles the operator and sets up the solver.
    pub fn prepare(&self, scheme: Scheme, opts: &ForwardOptions) -> Result<Solver<f64>, PipelineError> {
        let a = match scheme {
            Scheme::Cg => assemble_operator_cg(&self.mesh, &self.field)?,
            Scheme::Dg => assemble_operator_dg(&self.mesh, &self.skeleton, &self.field, &opts.dg)?,
        };
        let geometry = SolverGeometry { mesh: &self.mesh, field: &self.field };
        Ok(Solver::new(a, self.layout(scheme), opts.solve, Some(geometry))?)
    }

    pub fn rhs(
        &self,
        scheme: Scheme,
        dipole: &Dipole<f64>,
        opts: &ForwardOptions,
    ) -> Result<(SubtractionSplit<f64>, Vec<f64>, Vec<AssemblyWarning>), PipelineError> {
        let split = source_conductivity(&self.mesh, &self.field, dipole)?;
        let rhs = match scheme {
            Scheme::Cg => assemble_rhs_cg(&self.mesh, &self.skeleton, &self.field, &split, dipole, &opts.rhs)?,
            Scheme::Dg => assemble_rhs_dg(&self.mesh, &self.skeleton, &self.field, &split, dipole, &opts.rhs)?,
        };
        Ok((split, rhs.values, rhs.warnings))
    }

    /// Forward solutions for several dipoles with one prepared solver; the
    /// right-hand sides are iterated together.
    pub fn solve_dipoles(
        &self,
        solver: &Solver<f64>,
        dipoles: &[Dipole<f64>],
        opts: &ForwardOptions,
    ) -> Vec<Result<ForwardSolution<'_, f64>, PipelineError>> {
        let scheme = solver.layout().scheme();
        let mut out: Vec<Option<Result<ForwardSolution<'_, f64>, PipelineError>>> =
            dipoles.iter().map(|_| None).collect();
        let mut pending = Vec::new();
        let mut rhs = Vec::new();
        for (i, d) in dipoles.iter().enumerate() {
            match self.rhs(scheme, d, opts) {
                Ok((split, b, warnings)) => {
                    for w in warnings {
                        log::warn!("dipole {i}: {w:?}");
                    }
                    pending.push((i, split));
                    rhs.push(b);
                }
                Err(e) => out[i] = Some(Err(e)),
            }
        }
        let results = solver.solve_many(&rhs);
        drop(rhs);
        for ((i, split), r) in pending.into_iter().zip(results) {
            out[i] = Some(r.map_err(PipelineError::from).and_then(|o| {
                log::debug!("{scheme} dipole {i}: {} iterations, residual {:e}", o.iterations, o.relative_residual);
                Ok(ForwardSolution::new(scheme, o.x, &self.mesh, &self.field, split, dipoles[i])?)
            }));
        }
        out.into_iter().map(|r| r.expect("every dipole has a result")).collect()
    }

    /// Mean-centered layered-sphere potential at the evaluation points.
    pub fn reference(&self, dipole: &Dipole<f64>, opts: &ForwardOptions) -> Result<Vec<f64>, PipelineError> {
        Ok(layered_sphere_reference(&self.sphere(opts)?, dipole, &self.sampling.points)?)
    }

    /// Whether the dipole sits outside the brain compartment of the
    /// discretized model.
    pub fn source_excluded(&self, dipole: &Dipole<f64>) -> bool {
        let brain = self.spec.table.roles().brain;
        match self.mesh.locate(dipole.position) {
            Ok(c) => Some(self.mesh.cell_label(c)) != brain,
            Err(_) => true,
        }
    }
}

/// Sweep output: one row per (scheme, dipole) and the failures.
#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<MetricsRow>,
    pub failures: Vec<String>,
}

impl SweepResult {
    /// Mean RDM per eccentricity for `scheme`, skipping excluded and failed
    /// dipoles.
    pub fn mean_rdm(&self, scheme: Scheme) -> Vec<(f64, f64)> {
        mean_by_eccentricity(&self.rows, scheme.as_str(), |r| r.rdm)
    }

    pub fn mean_lnmag(&self, scheme: Scheme) -> Vec<(f64, f64)> {
        mean_by_eccentricity(&self.rows, scheme.as_str(), |r| r.lnmag)
    }
}

fn mean_by_eccentricity(rows: &[MetricsRow], scheme: &str, value: impl Fn(&MetricsRow) -> f64) -> Vec<(f64, f64)> {
    let mut order = Vec::new();
    let mut acc: HashMap<u64, (f64, usize)> = HashMap::new();
    for r in rows.iter().filter(|r| r.scheme == scheme && !r.excluded && value(r).is_finite()) {
        let key = r.eccentricity.to_bits();
        let e = acc.entry(key).or_insert_with(|| {
            order.push(r.eccentricity);
            (0.0, 0)
        });
        e.0 += value(r);
        e.1 += 1;
    }
    order.sort_by(f64::total_cmp);
    order.into_iter().map(|e| (e, acc[&e.to_bits()].0 / acc[&e.to_bits()].1 as f64)).collect()
}

/// RDM and lnMAG of every source and scheme against the layered-sphere
/// reference. Per-dipole failures are recorded and the sweep continues.
pub fn run_sweep(
    model: &HeadModel,
    schemes: &[Scheme],
    sources: &[PlacedSource<f64>],
    seed: u64,
    opts: &ForwardOptions,
) -> Result<SweepResult, PipelineError> {
    let mut result = SweepResult::default();
    let references: Vec<Result<Vec<f64>, String>> =
        sources.iter().map(|s| model.reference(&s.dipole, opts).map_err(|e| e.to_string())).collect();
    for &scheme in schemes {
        let solver = model.prepare(scheme, opts)?;
        let batch = opts.solve.batch_size.max(1);
        let mut done = 0;
        for chunk in sources.chunks(batch) {
            let dipoles: Vec<Dipole<f64>> = chunk.iter().map(|s| s.dipole).collect();
            let solutions = model.solve_dipoles(&solver, &dipoles, opts);
            for (src, sol) in chunk.iter().zip(solutions) {
                let metrics = sol.map_err(|e| e.to_string()).and_then(|sol| {
                    let reference = references[src.dipole_id].as_ref().map_err(Clone::clone)?;
                    let u = sol.evaluate_potential(&model.sampling).map_err(|e| e.to_string())?;
                    Ok((rdm(&u, reference).map_err(|e| e.to_string())?, ln_mag(&u, reference).map_err(|e| e.to_string())?))
                });
                let (r, l) = match metrics {
                    Ok(v) => v,
                    Err(e) => {
                        let msg = format!("{} {scheme} dipole {}: {e}", model.name(), src.dipole_id);
                        log::error!("{msg}");
                        result.failures.push(msg);
                        (f64::NAN, f64::NAN)
                    }
                };
                result.rows.push(MetricsRow {
                    scheme: scheme.to_string(),
                    model: model.name().to_string(),
                    seed,
                    eccentricity: src.eccentricity,
                    dipole_id: src.dipole_id,
                    orientation: src.dipole.orientation.as_str().to_string(),
                    rdm: r,
                    lnmag: l,
                    excluded: model.source_excluded(&src.dipole),
                });
            }
            done += chunk.len();
            log::info!("{} {scheme}: {done} of {} dipoles done", model.name(), sources.len());
        }
    }
    Ok(result)
}

/// Current densities of both schemes for one dipole and their comparison.
pub struct FluxComparison {
    pub cg: FluxField<f64>,
    pub dg: FluxField<f64>,
    pub metrics: LocalFluxMetrics<f64>,
}

pub fn run_flux_comparison(
    model: &HeadModel,
    dipole: &Dipole<f64>,
    opts: &ForwardOptions,
) -> Result<FluxComparison, PipelineError> {
    let mut fields = Vec::with_capacity(2);
    for scheme in [Scheme::Cg, Scheme::Dg] {
        let solver = model.prepare(scheme, opts)?;
        let sol = model.solve_dipoles(&solver, std::slice::from_ref(dipole), opts).pop().expect("one result")?;
        fields.push(sol.flux_field());
    }
    let dg = fields.pop().expect("dg field");
    let cg = fields.pop().expect("cg field");
    let metrics = local_flux_metrics(&cg, &dg)?;
    Ok(FluxComparison { cg, dg, metrics })
}
