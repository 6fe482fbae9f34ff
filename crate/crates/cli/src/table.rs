//! Feature tables: CSV with `trial,label,<feature columns>`; the label is
//! `-1` (left), `1` (right) or empty.

use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    pub trials: Vec<String>,
    pub labels: Vec<Option<f64>>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let mut header = vec!["trial".to_string(), "label".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(CliError::from_csv)?;
        for ((id, label), row) in self.trials.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![id.clone(), label.map_or(String::new(), |l| format!("{l}"))];
            rec.extend(row.iter().map(|v| format!("{v}")));
            w.write_record(&rec).map_err(CliError::from_csv)?;
        }
        w.flush().map_err(|e| CliError::data(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let header = r.headers().map_err(CliError::from_csv)?.clone();
        if header.len() < 3 || &header[0] != "trial" || &header[1] != "label" {
            return Err(CliError::data(format!(
                "{}: header must start with 'trial,label' and name at least one feature",
                path.display()
            )));
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let mut table = FeatureTable {
            columns,
            trials: Vec::new(),
            labels: Vec::new(),
            rows: Vec::new(),
        };
        for (k, rec) in r.records().enumerate() {
            let rec = rec.map_err(CliError::from_csv)?;
            let line = k + 2;
            let bad = |what: &str| CliError::data(format!("{}:{line}: {what}", path.display()));
            table.trials.push(rec[0].to_string());
            let label = match rec[1].trim() {
                "" => None,
                s => match s.parse::<f64>() {
                    Ok(v) if v == 1.0 || v == -1.0 => Some(v),
                    _ => return Err(bad(&format!("label '{s}' is not -1 or 1"))),
                },
            };
            table.labels.push(label);
            let row = rec
                .iter()
                .skip(2)
                .map(|f| f.trim().parse::<f64>().map_err(|_| bad(&format!("'{f}' is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    /// Labels as ±1, failing if any row is unlabeled.
    pub fn required_labels(&self) -> Result<Vec<f64>, CliError> {
        self.labels
            .iter()
            .enumerate()
            .map(|(k, l)| l.ok_or_else(|| CliError::data(format!("row {} ({}) has no label", k + 1, self.trials[k]))))
            .collect()
    }
}
