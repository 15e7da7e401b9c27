//! `SEGv1` segmentation files.
//!
//! ```text
//! dims nx ny nz
//! spacing_mm s
//! origin_mm ox oy oz
//! labels ascii|raw8
//! <labels>
//! ```
//!
//! `ascii` payloads are whitespace-separated integers (written one `k` row
//! per line); `raw8` payloads are exactly `nx*ny*nz` bytes directly after the
//! header's final newline. Ordering is that of [`LabelGrid`].

use std::io::{BufRead, Write};

use super::{LabelGrid, VoxelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelEncoding {
    Ascii,
    Raw8,
}

impl LabelEncoding {
    fn as_str(self) -> &'static str {
        match self {
            Self::Ascii => "ascii",
            Self::Raw8 => "raw8",
        }
    }
}

const MAGIC: &str = "SEGv1";

pub fn write_segmentation<W: Write>(grid: &LabelGrid, encoding: LabelEncoding, mut out: W) -> Result<(), VoxelError> {
    let [nx, ny, nz] = grid.dims();
    let o = grid.origin_mm();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "dims {nx} {ny} {nz}")?;
    writeln!(out, "spacing_mm {}", grid.spacing_mm())?;
    writeln!(out, "origin_mm {} {} {}", o[0], o[1], o[2])?;
    writeln!(out, "labels {}", encoding.as_str())?;
    match encoding {
        LabelEncoding::Raw8 => out.write_all(grid.labels())?,
        LabelEncoding::Ascii => {
            let mut line = String::with_capacity(4 * nz);
            for row in grid.labels().chunks(nz) {
                line.clear();
                for (n, l) in row.iter().enumerate() {
                    if n > 0 {
                        line.push(' ');
                    }
                    line.push_str(&l.to_string());
                }
                line.push('\n');
                out.write_all(line.as_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn header_line<R: BufRead>(input: &mut R, key: &str, count: usize) -> Result<Vec<String>, VoxelError> {
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Err(VoxelError::Format(format!("missing `{key}` line")));
    }
    let mut parts = line.split_whitespace();
    match parts.next() {
        Some(k) if k == key => {}
        other => return Err(VoxelError::Format(format!("expected `{key}`, found {other:?}"))),
    }
    let values: Vec<String> = parts.map(str::to_owned).collect();
    if values.len() != count {
        return Err(VoxelError::Format(format!("`{key}` expects {count} values, got {}", values.len())));
    }
    Ok(values)
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, VoxelError> {
    s.parse().map_err(|_| VoxelError::Format(format!("cannot parse {what} from `{s}`")))
}

pub fn read_segmentation<R: BufRead>(mut input: R) -> Result<(LabelGrid, LabelEncoding), VoxelError> {
    header_line(&mut input, MAGIC, 0)?;
    let d = header_line(&mut input, "dims", 3)?;
    let dims = [parse(&d[0], "nx")?, parse(&d[1], "ny")?, parse(&d[2], "nz")?];
    let s = header_line(&mut input, "spacing_mm", 1)?;
    let spacing: f64 = parse(&s[0], "spacing")?;
    let o = header_line(&mut input, "origin_mm", 3)?;
    let origin = [parse(&o[0], "origin")?, parse(&o[1], "origin")?, parse(&o[2], "origin")?];
    let e = header_line(&mut input, "labels", 1)?;
    let encoding = match e[0].as_str() {
        "ascii" => LabelEncoding::Ascii,
        "raw8" => LabelEncoding::Raw8,
        other => return Err(VoxelError::Format(format!("unknown label encoding `{other}`"))),
    };
    let n: usize = dims.iter().product();
    let labels = match encoding {
        LabelEncoding::Raw8 => {
            let mut buf = Vec::with_capacity(n);
            input.read_to_end(&mut buf)?;
            if buf.len() != n {
                return Err(VoxelError::Format(format!("expected {n} label bytes, found {}", buf.len())));
            }
            buf
        }
        LabelEncoding::Ascii => {
            let mut text = String::new();
            input.read_to_string(&mut text)?;
            let labels: Vec<u8> = text
                .split_whitespace()
                .map(|t| parse::<u8>(t, "label"))
                .collect::<Result<_, _>>()?;
            if labels.len() != n {
                return Err(VoxelError::Format(format!("expected {n} labels, found {}", labels.len())));
            }
            labels
        }
    };
    Ok((LabelGrid::new(dims, spacing, origin, labels)?, encoding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip(grid: &LabelGrid, enc: LabelEncoding) -> (Vec<u8>, LabelGrid, Vec<u8>) {
        let mut bytes = Vec::new();
        write_segmentation(grid, enc, &mut bytes).unwrap();
        let (back, enc2) = read_segmentation(bytes.as_slice()).unwrap();
        assert_eq!(enc, enc2);
        let mut again = Vec::new();
        write_segmentation(&back, enc, &mut again).unwrap();
        (bytes, back, again)
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(
            dims in prop::array::uniform3(1usize..5),
            spacing in 0.1f64..10.0,
            origin in prop::array::uniform3(-200.0f64..200.0),
            seed in any::<u64>(),
            raw in any::<bool>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let labels = (0..dims.iter().product::<usize>()).map(|_| rng.gen::<u8>()).collect();
            let g = LabelGrid::new(dims, spacing, origin, labels).unwrap();
            let enc = if raw { LabelEncoding::Raw8 } else { LabelEncoding::Ascii };
            let (bytes, back, again) = roundtrip(&g, enc);
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(bytes, again);
        }
    }

    #[test]
    fn header_layout() {
        let g = LabelGrid::new([1, 1, 2], 2.0, [-2.0, 0.5, 0.0], vec![3, 4]).unwrap();
        let mut bytes = Vec::new();
        write_segmentation(&g, LabelEncoding::Ascii, &mut bytes).unwrap();
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "SEGv1\ndims 1 1 2\nspacing_mm 2\norigin_mm -2 0.5 0\nlabels ascii\n3 4\n"
        );
    }

    #[test]
    fn rejects_truncated_payload() {
        let text = "SEGv1\ndims 1 1 2\nspacing_mm 1\norigin_mm 0 0 0\nlabels ascii\n3\n";
        assert!(read_segmentation(text.as_bytes()).is_err());
        let text = "SEGv1\ndims 1 1 2\nspacing_mm 1\norigin_mm 0 0 0\nlabels raw8\n\x03";
        assert!(read_segmentation(text.as_bytes()).is_err());
        let text = "SEGv1\ndims 1 1\n";
        assert!(read_segmentation(text.as_bytes()).is_err());
    }

    #[test]
    fn requires_magic_line() {
        let text = "dims 1 1 1\nspacing_mm 1\norigin_mm 0 0 0\nlabels ascii\n3\n";
        assert!(read_segmentation(text.as_bytes()).is_err());
        assert!(read_segmentation(format!("SEGv1\n{text}").as_bytes()).is_ok());
    }
}
