//! MatrixMarket coordinate dumps of symmetric operators.

use std::io::{self, BufRead, Write};

use super::sparse::SparseOperator;
use crate::scalar::Real;

pub const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Write the lower triangle of a symmetric operator, 1-based, values with 17
/// significant digits.
pub fn write_matrix_market<T: Real, W: Write>(op: &SparseOperator<T>, mut out: W) -> io::Result<()> {
    let n = op.dim();
    let lower: Vec<(usize, usize, T)> =
        (0..n).flat_map(|i| op.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v))).collect();
    writeln!(out, "{MM_HEADER}")?;
    writeln!(out, "{n} {n} {}", lower.len())?;
    for (i, j, v) in lower {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v.as_f64())?;
    }
    Ok(())
}

/// Read a symmetric coordinate file back into an operator with unit weight.
pub fn read_matrix_market<R: BufRead>(input: R) -> io::Result<SparseOperator<f64>> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    if header.trim() != MM_HEADER {
        return Err(bad("unsupported MatrixMarket header"));
    }
    let mut size: Option<usize> = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if size.is_none() {
            let n: usize = fields.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad size line"))?;
            size = Some(n);
            continue;
        }
        if fields.len() != 3 {
            return Err(bad("expected `row col value`"));
        }
        let i: usize = fields[0].parse().map_err(|_| bad("bad row index"))?;
        let j: usize = fields[1].parse().map_err(|_| bad("bad column index"))?;
        let v: f64 = fields[2].parse().map_err(|_| bad("bad value"))?;
        triplets.push((i - 1, j - 1, v));
        if i != j {
            triplets.push((j - 1, i - 1, v));
        }
    }
    let n = size.ok_or_else(|| bad("missing size line"))?;
    Ok(SparseOperator::from_triplets(n, &triplets, vec![1.0; n]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_lower_triangle_and_reads_back() {
        let a = SparseOperator::from_dense(
            &[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, 0.1], vec![0.0, 0.1, 3.0]],
            vec![1.0; 3],
        );
        let mut buf = Vec::new();
        write_matrix_market(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(MM_HEADER));
        assert_eq!(lines.next(), Some("3 3 5"));
        assert_eq!(lines.next(), Some("1 1 2.0000000000000000e0"));
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, a);
    }
}
