use std::io::{BufRead, Write};

use super::{SolveError, Solver};
use crate::schemes::Scheme;
use crate::Real;

/// Row `i` solves `A t_i = r_i` for the `i`-th sensor functional `r_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix<T> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub data: Vec<T>,
}

impl<T: Real> TransferMatrix<T> {
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Sensor values `T b` for a right-hand side.
    pub fn apply(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(b).map(|(&t, &v)| t * v).sum()).collect()
    }
}

/// One solve per functional. Functionals are `(dof, weight)` lists and must
/// annihilate the constant mode (e.g. point evaluation minus a reference
/// electrode).
pub fn compute_transfer_matrix<T: Real>(
    solver: &Solver<T>,
    restrictions: &[Vec<(usize, T)>],
) -> Result<TransferMatrix<T>, SolveError> {
    let n = solver.layout().num_dofs();
    let mut data = Vec::with_capacity(restrictions.len() * n);
    for (c, chunk) in restrictions.chunks(solver.config().batch_size).enumerate() {
        let mut rhs = Vec::with_capacity(chunk.len());
        for (i, f) in chunk.iter().enumerate() {
            let mut r = vec![T::zero(); n];
            for &(dof, w) in f {
                if dof >= n {
                    let i = c * solver.config().batch_size + i;
                    return Err(SolveError::Config(format!("functional {i} references dof {dof} of {n}")));
                }
                r[dof] += w;
            }
            rhs.push(r);
        }
        for out in solver.solve_many(&rhs) {
            data.extend_from_slice(&out?.x);
        }
    }
    Ok(TransferMatrix { rows: restrictions.len(), cols: n, data })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferHeader {
    pub sensors: usize,
    pub dofs: usize,
    pub scheme: Scheme,
    pub mesh_hash: String,
}

const MAGIC: &str = "DGEEG-TRANSFER 1";

/// Text header followed by little-endian `f64` values in row-major order.
pub fn write_transfer_matrix<T: Real, W: Write>(
    matrix: &TransferMatrix<T>,
    scheme: Scheme,
    mesh_hash: &str,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "sensors {}", matrix.rows)?;
    writeln!(out, "dofs {}", matrix.cols)?;
    writeln!(out, "scheme {scheme}")?;
    writeln!(out, "mesh {mesh_hash}")?;
    writeln!(out, "data f64le row-major")?;
    let mut buf = Vec::with_capacity(matrix.cols * 8);
    for i in 0..matrix.rows {
        buf.clear();
        for &v in matrix.row(i) {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_transfer_matrix<R: BufRead>(mut input: R) -> std::io::Result<(TransferHeader, TransferMatrix<f64>)> {
    let bad = |m: String| std::io::Error::new(std::io::ErrorKind::InvalidData, m);
    let mut line = String::new();
    let mut next = |input: &mut R| -> std::io::Result<String> {
        line.clear();
        input.read_line(&mut line)?;
        Ok(line.trim_end().to_string())
    };
    if next(&mut input)? != MAGIC {
        return Err(bad("not a transfer matrix file".into()));
    }
    let mut field = |input: &mut R, key: &str| -> std::io::Result<String> {
        let l = next(input)?;
        l.strip_prefix(key)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(format!("expected `{key}` line, got `{l}`")))
    };
    let sensors: usize = field(&mut input, "sensors")?.parse().map_err(|e| bad(format!("{e}")))?;
    let dofs: usize = field(&mut input, "dofs")?.parse().map_err(|e| bad(format!("{e}")))?;
    let scheme: Scheme = field(&mut input, "scheme")?.parse().map_err(bad)?;
    let mesh_hash = field(&mut input, "mesh")?;
    if field(&mut input, "data")? != "f64le row-major" {
        return Err(bad("unsupported data encoding".into()));
    }
    let mut bytes = vec![0u8; sensors * dofs * 8];
    input.read_exact(&mut bytes)?;
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((TransferHeader { sensors, dofs, scheme, mesh_hash }, TransferMatrix { rows: sensors, cols: dofs, data }))
}
