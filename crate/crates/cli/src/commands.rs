use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};

use dgeeg::analytic::Dipole;
use dgeeg::evalmetrics::{
    ln_mag, place_sources, rdm, sensor_functionals, write_metrics_csv, FluxField, PlacedSource, METRICS_HEADER,
};
use dgeeg::hexmesh::vtk::{label_array, write_vtk, write_vtk_subset, CellArray};
use dgeeg::hexmesh::{build_hex_mesh, HexMesh};
use dgeeg::pipeline::{run_flux_comparison, run_sweep, HeadModel, ModelSpec, SweepResult};
use dgeeg::schemes::Scheme;
use dgeeg::solve::{compute_transfer_matrix, write_transfer_matrix};
use dgeeg::voxelgeom::{detect_leaks, generate_sphere_segmentation, read_segmentation, write_segmentation, LabelGrid};

use crate::config::{RunConfig, FLUXVIS_DIRECTION, FLUXVIS_POSITION};
use crate::Completion;

pub struct Context {
    pub cfg: RunConfig,
    pub out: PathBuf,
    pub golden: bool,
}

impl Context {
    fn create(&self, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok((path, BufWriter::new(f)))
    }
}

fn load_grid(ctx: &Context, seg: Option<&Path>) -> Result<(ModelSpec, LabelGrid)> {
    let spec = ctx.cfg.model_spec()?;
    let grid = match seg {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            read_segmentation(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))?.0
        }
        None => generate_sphere_segmentation(&spec.table, spec.seg_mm, spec.padding_mm)?.grid,
    };
    Ok((spec, grid))
}

pub fn genseg(ctx: &Context) -> Result<Completion> {
    let spec = ctx.cfg.model_spec()?;
    let seg = generate_sphere_segmentation(&spec.table, spec.seg_mm, spec.padding_mm)?;
    let (path, mut w) = ctx.create(&format!("{}.seg", spec.name))?;
    write_segmentation(&seg.grid, ctx.cfg.encoding()?, &mut w)?;
    w.flush()?;
    let [nx, ny, nz] = seg.grid.dims();
    println!("{}: {nx}x{ny}x{nz} voxels, {} labeled", spec.name, seg.grid.count_nonzero());
    for warning in &seg.warnings {
        println!("warning: {warning}");
    }
    println!("wrote {}", path.display());
    Ok(Completion::Complete)
}

pub fn mesh(ctx: &Context, seg: Option<&Path>) -> Result<Completion> {
    let (spec, grid) = load_grid(ctx, seg)?;
    let mesh = build_hex_mesh(&grid, spec.h_mm)?;
    println!("{}: {} vertices, {} elements, digest {}", spec.name, mesh.num_vertices(), mesh.num_cells(), mesh.digest());
    let (path, mut w) = ctx.create(&format!("{}-mesh.vtk", spec.name))?;
    write_vtk(&mesh, &spec.name, &[label_array(&mesh)], &mut w)?;
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(Completion::Complete)
}

pub fn leaks(ctx: &Context, seg: Option<&Path>) -> Result<Completion> {
    let (spec, grid) = load_grid(ctx, seg)?;
    let report = detect_leaks(&grid, &spec.table)?;
    let (path, mut w) = ctx.create(&format!("{}-leaks.csv", spec.name))?;
    writeln!(w, "vertex,x_mm,y_mm,z_mm,labels")?;
    for (&v, labels) in report.leak_vertices.iter().zip(&report.incident_labels) {
        let [i, j, k] = grid.vertex_ijk(v);
        let x = grid.vertex_position(i, j, k);
        let labels: Vec<String> = labels.iter().map(u8::to_string).collect();
        writeln!(w, "{v},{},{},{},{}", x[0], x[1], x[2], labels.join(";"))?;
    }
    w.flush()?;
    println!("{}: {} leak vertices", spec.name, report.leak_vertex_count);
    println!("wrote {}", path.display());
    Ok(Completion::Complete)
}

/// The configured dipole, or the first placed source.
fn single_dipole(ctx: &Context, model: &HeadModel) -> Result<Dipole<f64>> {
    if let Some(d) = ctx.cfg.explicit_dipole()? {
        return Ok(d);
    }
    let opts = ctx.cfg.forward_options()?;
    let (ecc, _) = ctx.cfg.eccentricities();
    let e = *ecc.first().context("sources.eccentricities is empty")?;
    let placed = place_sources(&model.sphere(&opts)?, &[e], 1, ctx.cfg.orientation()?, ctx.cfg.sources.seed)?;
    Ok(placed[0].dipole)
}

fn build_model(spec: ModelSpec) -> Result<HeadModel> {
    let name = spec.name.clone();
    let model = HeadModel::build(spec).with_context(|| format!("building {name}"))?;
    for w in &model.warnings {
        log::warn!("{name}: {w}");
    }
    Ok(model)
}

fn write_surface_csv(
    ctx: &Context,
    name: &str,
    model: &HeadModel,
    columns: &[(&str, &[f64])],
) -> Result<PathBuf> {
    let (path, mut w) = ctx.create(name)?;
    let header: Vec<&str> = columns.iter().map(|c| c.0).collect();
    writeln!(w, "x_mm,y_mm,z_mm,cell,{}", header.join(","))?;
    for (i, (x, c)) in model.sampling.points.iter().zip(&model.sampling.cells).enumerate() {
        write!(w, "{},{},{},{c}", x[0], x[1], x[2])?;
        for (_, values) in columns {
            write!(w, ",{:.10e}", values[i])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(path)
}

pub fn forward(ctx: &Context) -> Result<Completion> {
    let model = build_model(ctx.cfg.model_spec()?)?;
    let opts = ctx.cfg.forward_options()?;
    let scheme = ctx.cfg.scheme()?;
    let dipole = single_dipole(ctx, &model)?;
    if model.source_excluded(&dipole) {
        log::warn!("dipole at {:?} lies outside the brain compartment of {}", dipole.position, model.name());
    }
    let solver = model.prepare(scheme, &opts)?;
    let sol = model.solve_dipoles(&solver, std::slice::from_ref(&dipole), &opts).pop().context("no solution")??;
    let u = sol.evaluate_potential(&model.sampling)?;
    let reference = model.reference(&dipole, &opts)?;
    println!(
        "{} {scheme}: {} skin points, rdm {:.6}, lnmag {:+.6}",
        model.name(),
        u.len(),
        rdm(&u, &reference)?,
        ln_mag(&u, &reference)?
    );
    let path =
        write_surface_csv(ctx, &format!("{}-{scheme}-forward.csv", model.name()), &model, &[("u", &u), ("u_ref", &reference)])?;
    println!("wrote {}", path.display());
    if ctx.cfg.output.vtk {
        let flux = sol.flux_field();
        let cells = vtk_cells(ctx, &model.mesh, &dipole);
        let path = write_flux_vtk(ctx, &format!("{}-{scheme}-flux.vtk", model.name()), &model.mesh, &cells, &flux, vec![])?;
        println!("wrote {}", path.display());
    }
    Ok(Completion::Complete)
}

pub fn reference(ctx: &Context) -> Result<Completion> {
    let model = build_model(ctx.cfg.model_spec()?)?;
    let opts = ctx.cfg.forward_options()?;
    let dipole = single_dipole(ctx, &model)?;
    let reference = model.reference(&dipole, &opts)?;
    let path = write_surface_csv(ctx, &format!("{}-reference.csv", model.name()), &model, &[("u_ref", &reference)])?;
    println!("{}: reference at {} skin points", model.name(), reference.len());
    println!("wrote {}", path.display());
    Ok(Completion::Complete)
}

pub fn sweep(ctx: &Context) -> Result<Completion> {
    let cfg = &ctx.cfg;
    let opts = cfg.forward_options()?;
    let schemes = cfg.sweep_schemes()?;
    let (ecc, assumed) = cfg.eccentricities();
    let orientation = cfg.orientation()?;
    let mut all = SweepResult::default();
    let mut names = Vec::new();
    for spec in cfg.sweep_specs()? {
        let model = build_model(spec)?;
        let sources: Vec<PlacedSource<f64>> =
            place_sources(&model.sphere(&opts)?, &ecc, cfg.sources.count, orientation, cfg.sources.seed)?;
        let result = run_sweep(&model, &schemes, &sources, cfg.sources.seed, &opts)?;
        println!("{}", model.name());
        print_means(&result, &schemes);
        names.push(model.name().to_string());
        all.rows.extend(result.rows);
        all.failures.extend(result.failures);
    }
    let (path, mut w) = ctx.create("metrics.csv")?;
    write_metrics_csv(&all.rows, &mut w)?;
    w.flush()?;
    println!("wrote {} ({} rows)", path.display(), all.rows.len());

    let (meta_path, mut m) = ctx.create("metrics.meta.toml")?;
    let list = |v: &[String]| v.iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ");
    writeln!(m, "columns = {:?}", METRICS_HEADER)?;
    writeln!(m, "models = [{}]", list(&names))?;
    writeln!(m, "schemes = [{}]", list(&schemes.iter().map(|s| s.to_string()).collect::<Vec<_>>()))?;
    writeln!(m, "eccentricities = {ecc:?}")?;
    writeln!(m, "eccentricities_assumed = {assumed}")?;
    writeln!(m, "count_per_eccentricity = {}", cfg.sources.count)?;
    writeln!(m, "seed = {}", cfg.sources.seed)?;
    writeln!(m, "orientation = {:?}", cfg.sources.orientation)?;
    writeln!(m, "solver_tolerance = {:e}", cfg.solver.tolerance)?;
    writeln!(m, "series_order = {}", cfg.solver.series_order)?;
    writeln!(m, "golden = {}", ctx.golden)?;
    writeln!(m, "failures = [{}]", list(&all.failures))?;
    m.flush()?;
    println!("wrote {}", meta_path.display());
    if all.failures.is_empty() {
        Ok(Completion::Complete)
    } else {
        for f in &all.failures {
            eprintln!("failed: {f}");
        }
        Ok(Completion::Partial)
    }
}

fn print_means(result: &SweepResult, schemes: &[Scheme]) {
    for &s in schemes {
        for ((e, r), (_, l)) in result.mean_rdm(s).into_iter().zip(result.mean_lnmag(s)) {
            println!("  {s} e={e:.3} mean rdm {r:.4} mean lnmag {l:+.4}");
        }
    }
}

/// Cells written to flux VTK files.
fn vtk_cells(ctx: &Context, mesh: &HexMesh, dipole: &Dipole<f64>) -> Vec<u32> {
    let all = 0..mesh.num_cells() as u32;
    if ctx.cfg.output.vtk_region == "all" {
        return all.collect();
    }
    let half = 0.5 * mesh.cell_edge_mm() * (1.0 + 1e-9);
    all.filter(|&c| (mesh.cell_centroid(c as usize)[0] - dipole.position[0]).abs() <= half).collect()
}

fn vector_with_validity(name: &str, values: &[Option<[f64; 3]>]) -> [CellArray; 2] {
    [
        CellArray::Vector { name: name.into(), values: values.iter().map(|v| v.unwrap_or([0.0; 3])).collect() },
        CellArray::Int { name: format!("{name}_valid"), values: values.iter().map(|v| v.is_some() as i64).collect() },
    ]
}

fn write_flux_vtk(
    ctx: &Context,
    name: &str,
    mesh: &HexMesh,
    cells: &[u32],
    flux: &FluxField<f64>,
    extra: Vec<CellArray>,
) -> Result<PathBuf> {
    let mut arrays = vec![label_array(mesh)];
    arrays.extend(vector_with_validity("j", &flux.vectors));
    arrays.extend(extra);
    let (path, mut w) = ctx.create(name)?;
    write_vtk_subset(mesh, cells, name, &arrays, &mut w)?;
    w.flush()?;
    Ok(path)
}

pub fn fluxvis(ctx: &Context) -> Result<Completion> {
    let model = build_model(ctx.cfg.model_spec()?)?;
    let opts = ctx.cfg.forward_options()?;
    let dipole = match ctx.cfg.explicit_dipole()? {
        Some(d) => d,
        None => Dipole::new(FLUXVIS_POSITION, FLUXVIS_DIRECTION)?,
    };
    let cmp = run_flux_comparison(&model, &dipole, &opts)?;
    let roles = model.spec.table.roles();
    let outer = |cells: &mut dyn Iterator<Item = usize>| -> Vec<usize> {
        cells
            .filter(|&c| {
                let l = Some(model.mesh.cell_label(c));
                l == roles.skin || l == roles.skull
            })
            .collect()
    };
    let half = 0.5 * model.mesh.cell_edge_mm() * (1.0 + 1e-9);
    let in_cut = outer(
        &mut (0..model.mesh.num_cells()).filter(|&c| (model.mesh.cell_centroid(c)[0] - dipole.position[0]).abs() <= half),
    );
    let everywhere = outer(&mut (0..model.mesh.num_cells()));
    for (scheme, flux) in [(Scheme::Cg, &cmp.cg), (Scheme::Dg, &cmp.dg)] {
        let describe = |hit: Option<(usize, f64)>| match hit {
            Some((c, m)) => format!("{m:.6e} in cell {c} (label {})", model.mesh.cell_label(c)),
            None => "none".into(),
        };
        println!(
            "{} {scheme}: max |j| over skin+skull in the x cut {}, in all skin+skull {}",
            model.name(),
            describe(flux.argmax(Some(&in_cut))),
            describe(flux.argmax(Some(&everywhere)))
        );
    }
    let cells = vtk_cells(ctx, &model.mesh, &dipole);
    let ln = &cmp.metrics.ln_mag_loc;
    let diff = vec![
        CellArray::Scalar { name: "lnMAGloc".into(), values: ln.iter().map(|v| v.unwrap_or(0.0)).collect() },
        CellArray::Int { name: "lnMAGloc_valid".into(), values: ln.iter().map(|v| v.is_some() as i64).collect() },
    ];
    let mut diff = diff;
    diff.extend(vector_with_validity("totDIFF", &cmp.metrics.tot_diff));
    for (scheme, flux) in [(Scheme::Cg, &cmp.cg), (Scheme::Dg, &cmp.dg)] {
        let path =
            write_flux_vtk(ctx, &format!("{}-fluxvis-{scheme}.vtk", model.name()), &model.mesh, &cells, flux, diff.clone())?;
        println!("wrote {}", path.display());
    }
    Ok(Completion::Complete)
}

pub fn transfer(ctx: &Context) -> Result<Completion> {
    let model = build_model(ctx.cfg.model_spec()?)?;
    let opts = ctx.cfg.forward_options()?;
    let scheme = ctx.cfg.scheme()?;
    let n = ctx.cfg.transfer.sensors.min(model.sampling.len());
    anyhow::ensure!(n > 0, "transfer.sensors must be positive");
    let sensors: Vec<[f64; 3]> = (0..n).map(|i| model.sampling.points[i * model.sampling.len() / n]).collect();
    let functionals = sensor_functionals(&model.mesh, scheme, &sensors, ctx.cfg.transfer.reference)?;
    let solver = model.prepare(scheme, &opts)?;
    let t = compute_transfer_matrix(&solver, &functionals)?;
    let (path, mut w) = ctx.create(&format!("{}-{scheme}.transfer", model.name()))?;
    write_transfer_matrix(&t, scheme, &model.mesh.digest(), &mut w)?;
    w.flush()?;
    let (spath, mut s) = ctx.create(&format!("{}-{scheme}-sensors.csv", model.name()))?;
    writeln!(s, "sensor,x_mm,y_mm,z_mm,reference")?;
    for (i, x) in sensors.iter().enumerate() {
        writeln!(s, "{i},{},{},{},{}", x[0], x[1], x[2], (i == ctx.cfg.transfer.reference) as u8)?;
    }
    s.flush()?;
    println!("{} {scheme}: {} x {} transfer matrix", model.name(), t.rows, t.cols);
    println!("wrote {}", path.display());
    println!("wrote {}", spath.display());
    Ok(Completion::Complete)
}
