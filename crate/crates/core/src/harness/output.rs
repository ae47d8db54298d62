//! CSV records and JSON summary.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::experiment::{RealizationRecord, SummaryRow};
use crate::error::Result;

pub const CSV_HEADER: [&str; 11] = [
    "realization_id",
    "method",
    "k",
    "rate_bits_s_hz",
    "rate_rel_to_es",
    "n_siso_iter",
    "n_mimo_iter",
    "sel_i1",
    "sel_i2",
    "sel_j1",
    "sel_j2",
];

/// Formats with 9 significant digits, `%.9g` style.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let fixed = format!("{:.*}", (8 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes the records with sector IDs shifted to 1-based.
pub fn emit_csv(records: &[RealizationRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        let mut row = vec![
            r.realization_id.to_string(),
            r.method.as_str().to_string(),
            r.k.to_string(),
            sig9(r.rate_bits_s_hz),
            r.rate_rel_to_es.map(sig9).unwrap_or_default(),
            r.n_siso_iter.to_string(),
            r.n_mimo_iter.to_string(),
        ];
        row.extend(r.selection.iter().map(|i| (i + 1).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `{method: {K: {...}}}`, methods and K in ascending order.
pub fn summary_json(summary: &[SummaryRow]) -> Value {
    let mut root = Map::new();
    for row in summary {
        let entry = root
            .entry(row.method.as_str())
            .or_insert_with(|| Value::Object(Map::new()))
            .as_object_mut()
            .expect("method entry is an object");
        entry.insert(
            row.k.to_string(),
            json!({
                "realizations": row.n,
                "mean_rate_bits_s_hz": row.mean_rate,
                "mean_rate_rel_to_es": row.mean_rel_rate,
                "median_rate_rel_to_es": row.median_rel_rate,
                "mean_n_siso_iter": row.mean_n_siso_iter,
                "mean_n_mimo_iter": row.mean_n_mimo_iter,
                "mean_n_total_iter": row.mean_n_siso_iter + row.mean_n_mimo_iter,
            }),
        );
    }
    Value::Object(root)
}

pub fn emit_summary_json(summary: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&summary_json(summary))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_formatting() {
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(11.339850002884624), "11.33985");
        assert_eq!(sig9(0.987654321987), "0.987654322");
        assert_eq!(sig9(130321.0), "130321");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(123456789012.0), "1.23456789e11");
    }

    #[test]
    fn sig9_parses_back() {
        for x in [3.14159265358979, 1e-300, 7.6511, 0.000123456789123, 98765.4321987] {
            let y: f64 = sig9(x).parse().unwrap();
            assert!(((x - y) / x).abs() < 1e-8, "{x} -> {}", sig9(x));
        }
    }
}
