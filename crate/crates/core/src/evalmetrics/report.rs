use std::io::Write;

pub const METRICS_HEADER: &str = "scheme,model,seed,eccentricity,dipole_id,orientation,rdm,lnmag,excluded_flag";

/// One line of the sweep output. Failed dipoles carry `NaN` metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub scheme: String,
    pub model: String,
    pub seed: u64,
    pub eccentricity: f64,
    pub dipole_id: usize,
    pub orientation: String,
    pub rdm: f64,
    pub lnmag: f64,
    /// Source outside the brain compartment of the discretized model.
    pub excluded: bool,
}

pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        for field in [&r.scheme, &r.model, &r.orientation] {
            if field.contains([',', '"', '\n']) {
                return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("field `{field}` needs quoting")));
            }
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{:.10e},{:.10e},{}",
            r.scheme, r.model, r.seed, r.eccentricity, r.dipole_id, r.orientation, r.rdm, r.lnmag, r.excluded as u8
        )?;
    }
    Ok(())
}
