//! Null-space aware preconditioned conjugate gradients, preconditioners and
//! transfer matrices.

mod dense;
mod multigrid;
mod pcg;
mod precond;
mod transfer;

pub use dense::{Cholesky, NegativePivot};
pub use multigrid::{continuous_to_modal, DgTwoLevel, GeometricMultigrid, MultigridOptions};
pub use precond::{BlockJacobi, Identity, Jacobi, MixedPrecision, Preconditioner};
pub use transfer::{
    compute_transfer_matrix, read_transfer_matrix, write_transfer_matrix, TransferHeader, TransferMatrix,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::hexmesh::HexMesh;
use crate::schemes::{assemble_operator_cg, ConductivityField, DofLayout, LinearSystem};
use crate::sparse::{dot, norm2, CsrMatrix};
use crate::Real;
use pcg::{pcg, pcg_multi, project_out, PcgParams};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (last relative residual {:e})", residual_history.last().copied().unwrap_or(f64::NAN))]
    NotConverged { iterations: usize, residual_history: Vec<f64> },
    #[error("right-hand side is incompatible: constant-mode component {component:e} exceeds 1e-6 of its norm {norm:e}")]
    Incompatible { component: f64, norm: f64 },
    #[error("operator is numerically indefinite: {0}; for the DG scheme increase the penalty parameter eta")]
    Indefinite(String),
    #[error("invalid solver configuration: {0}")]
    Config(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreconditionerKind {
    None,
    Diagonal,
    /// 8×8 cell-block inverse (DG only).
    BlockDiagonal,
    /// Geometric multigrid (CG) or the two-level scheme with a multigrid
    /// coarse space (DG); needs the mesh.
    Multigrid,
}

impl PreconditionerKind {
    pub fn default_for(layout: &DofLayout) -> Self {
        match layout {
            DofLayout::Cg { .. } => PreconditionerKind::Diagonal,
            DofLayout::Dg { .. } => PreconditionerKind::BlockDiagonal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PreconditionerKind::None => "none",
            PreconditionerKind::Diagonal => "diagonal",
            PreconditionerKind::BlockDiagonal => "block-diagonal",
            PreconditionerKind::Multigrid => "multigrid",
        }
    }
}

impl fmt::Display for PreconditionerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreconditionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "diagonal" => Ok(Self::Diagonal),
            "block-diagonal" | "block_diagonal" => Ok(Self::BlockDiagonal),
            "multigrid" => Ok(Self::Multigrid),
            other => Err(format!("unknown preconditioner `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// `None` picks the per-scheme default.
    pub preconditioner: Option<PreconditionerKind>,
    pub deflation: bool,
    /// Build multigrid hierarchies in single precision.
    pub single_precision_preconditioner: bool,
    pub multigrid: MultigridOptions,
    /// Right-hand sides iterated together by [`Solver::solve_many`].
    pub batch_size: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            preconditioner: None,
            deflation: true,
            single_precision_preconditioner: false,
            multigrid: MultigridOptions::default(),
            batch_size: 8,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self, layout: &DofLayout) -> Result<(), SolveError> {
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(SolveError::Config(format!("tolerance {} outside (0, 1)", self.tolerance)));
        }
        if self.batch_size == 0 {
            return Err(SolveError::Config("batch size must be positive".into()));
        }
        if self.preconditioner == Some(PreconditionerKind::BlockDiagonal) && matches!(layout, DofLayout::Cg { .. }) {
            return Err(SolveError::Config("block-diagonal preconditioning needs a DG layout".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub relative_residual: f64,
}

/// Mesh information the multigrid preconditioners need.
#[derive(Clone, Copy)]
pub struct SolverGeometry<'a, T> {
    pub mesh: &'a HexMesh,
    pub field: &'a ConductivityField<T>,
}

/// A system matrix prepared for repeated solves.
pub struct Solver<T> {
    matrix: CsrMatrix<T>,
    layout: DofLayout,
    config: SolveConfig,
    kind: PreconditionerKind,
    preconditioner: Box<dyn Preconditioner<T>>,
    kernel: Vec<T>,
}

fn build_multigrid<T: Real, U: Real>(
    matrix: &CsrMatrix<T>,
    layout: &DofLayout,
    geometry: SolverGeometry<'_, T>,
    opts: MultigridOptions,
) -> Result<Box<dyn Preconditioner<U>>, SolveError> {
    let mesh = geometry.mesh;
    let ijk: Vec<[u32; 3]> = (0..mesh.num_vertices()).map(|v| mesh.vertex_ijk(v)).collect();
    match layout {
        DofLayout::Cg { .. } => Ok(Box::new(GeometricMultigrid::new(matrix.cast::<U>(), &ijk, opts)?)),
        DofLayout::Dg { .. } => {
            let cg = assemble_operator_cg(mesh, geometry.field)
                .map_err(|e| SolveError::Config(format!("coarse space assembly failed: {e}")))?;
            Ok(Box::new(DgTwoLevel::new(matrix.cast::<U>(), mesh.cells().to_vec(), cg.cast::<U>(), &ijk, opts)?))
        }
    }
}

impl<T: Real> Solver<T> {
    /// Sets up the preconditioner. `geometry` is required for
    /// [`PreconditionerKind::Multigrid`].
    pub fn new(
        matrix: CsrMatrix<T>,
        layout: DofLayout,
        config: SolveConfig,
        geometry: Option<SolverGeometry<'_, T>>,
    ) -> Result<Self, SolveError> {
        config.validate(&layout)?;
        if matrix.nrows() != layout.num_dofs() || matrix.ncols() != layout.num_dofs() {
            return Err(SolveError::Config(format!(
                "matrix is {}×{} but the layout has {} unknowns",
                matrix.nrows(),
                matrix.ncols(),
                layout.num_dofs()
            )));
        }
        let kind = config.preconditioner.unwrap_or_else(|| PreconditionerKind::default_for(&layout));
        let preconditioner: Box<dyn Preconditioner<T>> = match kind {
            PreconditionerKind::None => Box::new(Identity),
            PreconditionerKind::Diagonal => Box::new(Jacobi::new(&matrix)?),
            PreconditionerKind::BlockDiagonal => Box::new(BlockJacobi::new(&matrix, layout.block_size())?),
            PreconditionerKind::Multigrid => {
                let geometry = geometry.ok_or_else(|| SolveError::Config("multigrid needs the mesh".into()))?;
                if config.single_precision_preconditioner {
                    let inner = build_multigrid::<T, f32>(&matrix, &layout, geometry, config.multigrid)?;
                    Box::new(MixedPrecision::<_, f32>::new(inner))
                } else {
                    build_multigrid::<T, T>(&matrix, &layout, geometry, config.multigrid)?
                }
            }
        };
        // cheap setup-time screen: a negative diagonal entry can never occur
        // in a positive semidefinite operator
        if let Some(i) = matrix.diagonal().iter().position(|&d| d < T::zero()) {
            return Err(SolveError::Indefinite(format!("negative diagonal entry at row {i}")));
        }
        let kernel = layout.constant_mode();
        Ok(Self { matrix, layout, config, kind, preconditioner, kernel })
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn layout(&self) -> &DofLayout {
        &self.layout
    }

    pub fn preconditioner_kind(&self) -> PreconditionerKind {
        self.kind
    }

    pub fn config(&self) -> &SolveConfig {
        &self.config
    }

    /// Solves `A x = b` and returns the representative without constant-mode
    /// component.
    pub fn solve(&self, b: &[T]) -> Result<SolveOutcome<T>, SolveError> {
        self.solve_from(b, None)
    }

    pub fn solve_from(&self, b: &[T], x0: Option<&[T]>) -> Result<SolveOutcome<T>, SolveError> {
        let (b, kernel) = self.prepare_rhs(b)?;
        pcg(&self.matrix, &b, x0, self.preconditioner.as_ref(), &self.params(kernel))
    }

    /// Solves for several right-hand sides, iterating up to
    /// `batch_size` of them together. Results keep the input order.
    pub fn solve_many(&self, rhs: &[Vec<T>]) -> Vec<Result<SolveOutcome<T>, SolveError>> {
        let n = self.layout.num_dofs();
        let mut out: Vec<Option<Result<SolveOutcome<T>, SolveError>>> = (0..rhs.len()).map(|_| None).collect();
        let mut ready = Vec::new();
        for (i, b) in rhs.iter().enumerate() {
            match self.prepare_rhs(b) {
                Ok((b, _)) => ready.push((i, b)),
                Err(e) => out[i] = Some(Err(e)),
            }
        }
        let kernel = self.config.deflation.then_some(self.kernel.as_slice());
        let params = self.params(kernel);
        for chunk in ready.chunks(self.config.batch_size) {
            let k = chunk.len();
            if k == 1 {
                out[chunk[0].0] = Some(pcg(&self.matrix, &chunk[0].1, None, self.preconditioner.as_ref(), &params));
                continue;
            }
            let mut block = vec![T::zero(); n * k];
            for (j, (_, b)) in chunk.iter().enumerate() {
                for (i, &v) in b.iter().enumerate() {
                    block[i * k + j] = v;
                }
            }
            let results = pcg_multi(&self.matrix, k, &block, self.preconditioner.as_ref(), &params);
            for ((i, _), r) in chunk.iter().zip(results) {
                out[*i] = Some(r);
            }
        }
        out.into_iter().map(|r| r.expect("every right-hand side is solved")).collect()
    }

    fn params<'a>(&self, kernel: Option<&'a [T]>) -> PcgParams<'a, T> {
        PcgParams { tolerance: T::lit(self.config.tolerance), max_iterations: self.config.max_iterations, kernel }
    }

    /// Checks the length and compatibility of `b` and removes its
    /// constant-mode component.
    fn prepare_rhs(&self, b: &[T]) -> Result<(Vec<T>, Option<&[T]>), SolveError> {
        if b.len() != self.layout.num_dofs() {
            return Err(SolveError::Config(format!("rhs has {} entries, expected {}", b.len(), self.layout.num_dofs())));
        }
        let mut b = b.to_vec();
        let kernel = self.config.deflation.then_some(self.kernel.as_slice());
        if let Some(k) = kernel {
            let kk = dot(k, k);
            let component = (dot(k, &b) / kk.sqrt()).abs();
            let norm = norm2(&b);
            if component > T::lit(1e-6) * norm {
                return Err(SolveError::Incompatible { component: component.as_f64(), norm: norm.as_f64() });
            }
            project_out(Some(k), kk, &mut b);
        }
        Ok((b, kernel))
    }
}

/// One-shot solve of an assembled system.
pub fn solve<T: Real>(
    system: &LinearSystem<T>,
    config: &SolveConfig,
    geometry: Option<SolverGeometry<'_, T>>,
) -> Result<SolveOutcome<T>, SolveError> {
    Solver::new(system.matrix.clone(), system.layout, *config, geometry)?.solve(&system.rhs)
}
