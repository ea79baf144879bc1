//! File formats for triangles and paths.
//!
//! JSON: `{"J": int, "mu0": num, "mu1": num, "levels": [[num, ...], ...]}` for
//! triangles and `{"J": int, "values": [...]}` for paths. Floats are written in
//! shortest round-trip form, so a write/read cycle is bit-exact.
//!
//! CSV: one `j,k,value` row per coefficient with 1-based `k`. The boundary
//! terms are stored as `j = -1`: `(-1, 0)` is `mu0` and `(-1, 1)` is `mu1`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dyadic::CoefficientTriangle;
use crate::error::{Error, Result};

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let r = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(r)?)
}

/// Loads a triangle either stored at the top level of a JSON document or
/// nested under a `"coefficients"` key (the layout written by `simulate-bm`).
pub fn read_triangle_json(path: &Path) -> Result<CoefficientTriangle> {
    let value: serde_json::Value = read_json(path)?;
    let inner = match value.get("coefficients") {
        Some(nested) if value.get("levels").is_none() => nested.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(inner)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    j: i64,
    k: u64,
    value: f64,
}

pub fn write_triangle_csv<W: Write>(writer: W, t: &CoefficientTriangle) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.serialize(CsvRow { j: -1, k: 0, value: t.mu0() })?;
    w.serialize(CsvRow { j: -1, k: 1, value: t.mu1() })?;
    for (j, level) in t.levels().iter().enumerate() {
        for (k, &value) in level.iter().enumerate() {
            w.serialize(CsvRow { j: j as i64, k: k as u64 + 1, value })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_triangle_csv<R: Read>(reader: R) -> Result<CoefficientTriangle> {
    let mut r = csv::Reader::from_reader(reader);
    let mut mu = [None, None];
    let mut levels: Vec<Vec<Option<f64>>> = Vec::new();
    for row in r.deserialize() {
        let row: CsvRow = row?;
        if row.j == -1 {
            let slot = mu
                .get_mut(row.k as usize)
                .ok_or_else(|| Error::Malformed(format!("boundary row with k = {}", row.k)))?;
            *slot = Some(row.value);
            continue;
        }
        let j = usize::try_from(row.j).map_err(|_| Error::Malformed(format!("negative level {}", row.j)))?;
        if j > crate::dyadic::MAX_LEVEL as usize {
            return Err(Error::Malformed(format!("level {j} too large")));
        }
        while levels.len() <= j {
            let len = 1usize << levels.len();
            levels.push(vec![None; len]);
        }
        let cell = row
            .k
            .checked_sub(1)
            .and_then(|i| levels[j].get_mut(i as usize))
            .ok_or_else(|| Error::Malformed(format!("cell (j={j}, k={}) out of range", row.k)))?;
        *cell = Some(row.value);
    }
    let [Some(mu0), Some(mu1)] = mu else {
        return Err(Error::Malformed("missing boundary rows".into()));
    };
    let levels = levels
        .into_iter()
        .enumerate()
        .map(|(j, level)| {
            level
                .into_iter()
                .enumerate()
                .map(|(k, v)| v.ok_or_else(|| Error::Malformed(format!("missing cell (j={j}, k={})", k + 1))))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientTriangle::new(mu0, mu1, levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle_strategy() -> impl Strategy<Value = CoefficientTriangle> {
        (0u32..6).prop_flat_map(|max_level| {
            let total = (1usize << (max_level + 1)) - 1;
            (
                any::<f64>().prop_filter("finite", |x| x.is_finite()),
                -1e300f64..1e300,
                prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), total),
            )
                .prop_map(move |(mu0, mu1, flat)| {
                    let mut it = flat.into_iter();
                    let levels = (0..=max_level).map(|j| it.by_ref().take(1 << j).collect()).collect();
                    CoefficientTriangle::new(mu0, mu1, levels).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(t in triangle_strategy()) {
            let s = serde_json::to_string(&t).unwrap();
            let back: CoefficientTriangle = serde_json::from_str(&s).unwrap();
            for (a, b) in t.levels().iter().flatten().zip(back.levels().iter().flatten()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(t.mu0().to_bits(), back.mu0().to_bits());
            prop_assert_eq!(t.mu1().to_bits(), back.mu1().to_bits());
        }

        #[test]
        fn csv_round_trip_is_bit_exact(t in triangle_strategy()) {
            let mut buf = Vec::new();
            write_triangle_csv(&mut buf, &t).unwrap();
            let back = read_triangle_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back, t);
        }
    }

    #[test]
    fn csv_layout() {
        let t = CoefficientTriangle::new(0.5, 1.5, vec![vec![2.0], vec![3.0, 4.0]]).unwrap();
        let mut buf = Vec::new();
        write_triangle_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "j,k,value\n-1,0,0.5\n-1,1,1.5\n0,1,2.0\n1,1,3.0\n1,2,4.0\n");
    }

    #[test]
    fn csv_missing_cell_rejected() {
        let text = "j,k,value\n-1,0,0\n-1,1,0\n0,1,1\n1,2,4\n";
        assert!(read_triangle_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn nested_triangle_is_found() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bm.json");
        let t = CoefficientTriangle::new(0.0, 1.0, vec![vec![0.5]]).unwrap();
        let doc = serde_json::json!({ "J": 1, "values": [0.0, 0.5, 1.0], "coefficients": t });
        write_json(&path, &doc).unwrap();
        assert_eq!(read_triangle_json(&path).unwrap(), t);
    }
}
