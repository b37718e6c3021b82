//! Field snapshot files.
//!
//! Layout: one ASCII header line `GEOFLOW1 dim M L components\n` followed by
//! the site-major values as little-endian `f64`. `L` is written as the
//! shortest decimal that round-trips.

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};

pub const SNAPSHOT_MAGIC: &str = "GEOFLOW1";

pub fn write_snapshot<W: Write>(mut w: W, f: &Field) -> Result<()> {
    let g = f.grid();
    writeln!(
        w,
        "{} {} {} {} {}",
        SNAPSHOT_MAGIC,
        g.dim,
        g.points_per_axis,
        g.period,
        f.components()
    )?;
    let mut buf = Vec::with_capacity(f.values().len() * 8);
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: R) -> Result<Field> {
    let mut reader = BufReader::new(r);
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    let header = String::from_utf8(header).map_err(|_| Error::Format("header is not ASCII".into()))?;
    let parts: Vec<&str> = header.trim_end_matches('\n').split(' ').collect();
    if parts.len() != 5 || parts[0] != SNAPSHOT_MAGIC {
        return Err(Error::Format(format!("bad header {header:?}")));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad integer {s:?}")))
    };
    let dim = parse_usize(parts[1])?;
    let m = parse_usize(parts[2])?;
    let period: f64 = parts[3]
        .parse()
        .map_err(|_| Error::Format(format!("bad period {:?}", parts[3])))?;
    let l = parse_usize(parts[4])?;
    let grid = GridSpec::new(dim, m, period)?;
    let count = grid.sites() * l;
    let mut bytes = Vec::with_capacity(count * 8);
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, l, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_truncated_payload() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let f = Field::constant(g, &[1.0, 2.0]);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f).unwrap();
        buf.pop();
        assert!(matches!(read_snapshot(&buf[..]), Err(Error::Format(_))));
    }

    #[test]
    fn header_is_plain_ascii() {
        let g = GridSpec::new(2, 8, 0.1).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &Field::zeros(g, 3)).unwrap();
        let end = buf.iter().position(|&b| b == b'\n').unwrap();
        assert_eq!(&buf[..end], b"GEOFLOW1 2 8 0.1 3");
        assert_eq!(buf.len(), end + 1 + 64 * 3 * 8);
    }
}
