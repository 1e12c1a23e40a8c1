use std::collections::BTreeSet;

use super::{EvalError, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKey {
    NumInstructions,
    Shape,
}

impl CurveKey {
    fn column(self) -> &'static str {
        match self {
            CurveKey::NumInstructions => "num_instructions",
            CurveKey::Shape => "shape",
        }
    }

    fn of(self, report: &EvalReport) -> Result<f64, EvalError> {
        match self {
            CurveKey::NumInstructions => report
                .num_instructions
                .map(|n| n as f64)
                .ok_or(EvalError::MissingKey("num_instructions")),
            CurveKey::Shape => report.shape.ok_or(EvalError::MissingKey("shape")),
        }
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn write_rows(column: &str, mut rows: Vec<(f64, String, &EvalReport)>) -> Result<String, EvalError> {
    if rows.len() < 2 {
        return Err(EvalError::TooFewPoints);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(EvalError::DuplicateKey(w[0].1.clone()));
    }
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record([column, "total", "hasop", "noop"])?;
    for (_, key, r) in rows {
        out.write_record([
            key,
            r.total_accuracy.to_string(),
            cell(r.hasop_accuracy),
            cell(r.noop_accuracy),
        ])?;
    }
    let bytes = out.into_inner().map_err(|e| EvalError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Accuracy against training instruction count, sorted by count.
/// Header: `num_instructions,total,hasop,noop`.
pub fn curve(points: &[(usize, EvalReport)]) -> Result<String, EvalError> {
    write_rows(
        CurveKey::NumInstructions.column(),
        points.iter().map(|(n, r)| (*n as f64, n.to_string(), r)).collect(),
    )
}

/// Like [`curve`], keyed by the value recorded in each report.
pub fn curve_by(key: CurveKey, reports: &[EvalReport]) -> Result<String, EvalError> {
    let rows = reports
        .iter()
        .map(|r| {
            let k = key.of(r)?;
            let label = match key {
                CurveKey::NumInstructions => (k as usize).to_string(),
                CurveKey::Shape => k.to_string(),
            };
            Ok((k, label, r))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    write_rows(key.column(), rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceCell {
    /// Training occurrence set, e.g. `1` or `1,5,10,15,20`.
    pub train_occurrences: String,
    pub num_instructions: usize,
    pub accuracy: f64,
}

/// Rows by training occurrence set (first-seen order), columns by
/// instruction count (descending). Missing cells are left empty.
pub fn occurrence_table(cells: &[OccurrenceCell]) -> Result<String, EvalError> {
    let mut rows: Vec<&str> = Vec::new();
    for c in cells {
        if !rows.contains(&c.train_occurrences.as_str()) {
            rows.push(&c.train_occurrences);
        }
    }
    let columns: Vec<usize> = cells
        .iter()
        .map(|c| c.num_instructions)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .rev()
        .collect();
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["train_occurrences".to_string()];
    header.extend(columns.iter().map(|n| n.to_string()));
    out.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.to_string()];
        for &n in &columns {
            let hit = cells
                .iter()
                .find(|c| c.train_occurrences == row && c.num_instructions == n);
            record.push(hit.map(|c| format!("{:.2}", c.accuracy)).unwrap_or_default());
        }
        out.write_record(&record)?;
    }
    let bytes = out.into_inner().map_err(|e| EvalError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{score, PredictionRecord, ReferenceItem};

    fn report(accuracy_hits: usize) -> EvalReport {
        let reference: Vec<ReferenceItem> = (0..10)
            .map(|i| ReferenceItem {
                input: format!("in{i}"),
                target: format!("out{i}"),
                is_noop: false,
                instruction: "x->y".into(),
                occurrences: Some(1),
            })
            .collect();
        let preds: Vec<PredictionRecord> = (0..10)
            .map(|i| PredictionRecord {
                example_id: i,
                prediction: if i < accuracy_hits { format!("out{i}") } else { String::new() },
            })
            .collect();
        score(&reference, &preds).unwrap()
    }

    #[test]
    fn sorted_rows() {
        let csv = curve(&[(1000, report(9)), (100, report(0))]).unwrap();
        assert_eq!(csv, "num_instructions,total,hasop,noop\n100,0,0,\n1000,0.9,0.9,\n");
    }

    #[test]
    fn rejects_duplicates_and_single_points() {
        assert!(matches!(
            curve(&[(100, report(1)), (100, report(2))]),
            Err(EvalError::DuplicateKey(_))
        ));
        assert!(matches!(curve(&[(100, report(1))]), Err(EvalError::TooFewPoints)));
    }

    #[test]
    fn keyed_by_shape() {
        let mut a = report(2);
        a.shape = Some(2.0);
        let mut b = report(5);
        b.shape = Some(0.5);
        let csv = curve_by(CurveKey::Shape, &[a.clone(), b]).unwrap();
        assert!(csv.starts_with("shape,total,hasop,noop\n0.5,0.5,"), "{csv}");
        a.shape = None;
        assert!(matches!(
            curve_by(CurveKey::Shape, &[a.clone(), a]),
            Err(EvalError::MissingKey("shape"))
        ));
    }

    #[test]
    fn table_layout() {
        let cells: Vec<OccurrenceCell> = [("1", 2000, 0.71), ("1", 200, 0.0), ("1,5,10,15,20", 2000, 0.94)]
            .into_iter()
            .map(|(r, n, a)| OccurrenceCell {
                train_occurrences: r.into(),
                num_instructions: n,
                accuracy: a,
            })
            .collect();
        let csv = occurrence_table(&cells).unwrap();
        assert_eq!(
            csv,
            "train_occurrences,2000,200\n1,0.71,0.00\n\"1,5,10,15,20\",0.94,\n"
        );
    }
}
