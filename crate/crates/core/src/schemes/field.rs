use super::SchemeError;
use crate::analytic::Dipole;
use crate::hexmesh::HexMesh;
use crate::voxelgeom::CompartmentTable;
use crate::Real;

/// Cellwise isotropic conductivity (S/m).
#[derive(Clone, Debug, PartialEq)]
pub struct ConductivityField<T> {
    sigma: Vec<T>,
    h: T,
}

impl<T: Real> ConductivityField<T> {
    pub fn from_table(mesh: &HexMesh, table: &CompartmentTable) -> Result<Self, SchemeError> {
        let sigma = mesh
            .cell_labels()
            .iter()
            .map(|&l| table.conductivity(l).map(T::lit).ok_or(SchemeError::UnknownLabel(l)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { sigma, h: T::lit(mesh.cell_edge_mm()) })
    }

    /// Direct construction; `sigma` must be positive.
    pub fn from_values(mesh: &HexMesh, sigma: Vec<T>) -> Self {
        assert_eq!(sigma.len(), mesh.num_cells());
        assert!(sigma.iter().all(|&s| s > T::zero()));
        Self { sigma, h: T::lit(mesh.cell_edge_mm()) }
    }

    pub fn values(&self) -> &[T] {
        &self.sigma
    }

    #[inline]
    pub fn sigma(&self, cell: usize) -> T {
        self.sigma[cell]
    }

    /// `(ω_ef, ω_fe) = (σ_f, σ_e) / (σ_e + σ_f)`.
    #[inline]
    pub fn weights(&self, e: usize, f: usize) -> (T, T) {
        let (se, sf) = (self.sigma[e], self.sigma[f]);
        (sf / (se + sf), se / (se + sf))
    }

    /// Harmonic face conductivity `2 σ_e σ_f / (σ_e + σ_f)`.
    #[inline]
    pub fn harmonic(&self, e: usize, f: usize) -> T {
        let (se, sf) = (self.sigma[e], self.sigma[f]);
        T::lit(2.0) * se * sf / (se + sf)
    }

    /// `min(|E_e|, |E_f|) / |γ|`, which is the edge length on uniform cubes.
    #[inline]
    pub fn face_width(&self) -> T {
        self.h
    }

    pub fn h(&self) -> T {
        self.h
    }
}

/// Source-cell conductivity `σ∞` and the derived correction `σ - σ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubtractionSplit<T> {
    pub sigma_inf: T,
    pub source_cell: usize,
    pub source_label: u8,
    /// All face neighbors of the source cell exist and share its label.
    pub valid: bool,
}

impl<T: Real> SubtractionSplit<T> {
    #[inline]
    pub fn sigma_corr(&self, field: &ConductivityField<T>, cell: usize) -> T {
        field.sigma(cell) - self.sigma_inf
    }
}

pub fn source_conductivity<T: Real>(
    mesh: &HexMesh,
    field: &ConductivityField<T>,
    dipole: &Dipole<T>,
) -> Result<SubtractionSplit<T>, SchemeError> {
    let y = dipole.position.map(|v| v.as_f64());
    let cell = mesh.locate(y).map_err(SchemeError::SourceOutsideMesh)?;
    let label = mesh.cell_label(cell);
    let valid = (0..6u8).all(|f| mesh.neighbor(cell, f).is_some_and(|n| mesh.cell_label(n) == label));
    Ok(SubtractionSplit { sigma_inf: field.sigma(cell), source_cell: cell, source_label: label, valid })
}
