use std::io::{Read, Write};

use serde::Serialize;

use super::{ActionClusterModel, ClusterError, Dataset, PerturbationSample};
use crate::mesh::{Direction, VertexAction};

/// One line of the assignment table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub vertex: usize,
    pub direction: Direction,
    pub delta_mm: f64,
    pub cluster: usize,
    pub flagged: bool,
}

/// Assignment table plus the mean differential S11 curve of every cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub rows: Vec<ReportRow>,
    pub frequencies: Vec<f64>,
    /// `(cluster, flagged, mean dB(s11) difference per frequency)`.
    pub curves: Vec<(usize, bool, Vec<f64>)>,
}

pub fn cluster_report(model: &ActionClusterModel) -> ClusterReport {
    let n = model.frequencies.len();
    let rows = model
        .actions
        .iter()
        .zip(&model.assignments)
        .map(|(a, &c)| ReportRow {
            vertex: a.vertex,
            direction: a.direction,
            delta_mm: a.magnitude_mm(),
            cluster: c,
            flagged: model.negligible[c],
        })
        .collect();
    let curves = (0..model.k)
        .map(|c| (c, model.negligible[c], model.centroids[c][..n].to_vec()))
        .collect();
    ClusterReport {
        rows,
        frequencies: model.frequencies.clone(),
        curves,
    }
}

impl ClusterReport {
    pub fn write_assignments<W: Write>(&self, dest: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(dest);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// `frequency_hz, mean_ds11_db` for one cluster.
    pub fn write_curve<W: Write>(&self, cluster: usize, dest: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(dest);
        w.write_record(["frequency_hz", "mean_ds11_db"])?;
        let (_, _, curve) = &self.curves[cluster];
        for (f, v) in self.frequencies.iter().zip(curve) {
            w.write_record([f.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Header `vertex, direction, delta_mm, f_0 .. f_{m-1}`.
pub fn write_dataset_csv<W: Write>(dataset: &Dataset, dest: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(dest);
    let dim = dataset.samples.first().map_or(0, |s| s.feature.len());
    let mut header = vec!["vertex".to_string(), "direction".into(), "delta_mm".into()];
    header.extend((0..dim).map(|i| format!("f_{i}")));
    w.write_record(&header)?;
    for s in &dataset.samples {
        let mut rec = vec![
            s.action.vertex.to_string(),
            s.action.direction.to_string(),
            s.action.magnitude_mm().to_string(),
        ];
        rec.extend(s.feature.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_dataset_csv`] for the sample list.
pub fn read_dataset_csv<R: Read>(source: R) -> Result<Vec<PerturbationSample>, ClusterError> {
    let fmt = |e: &dyn std::fmt::Display| ClusterError::Format(e.to_string());
    let mut r = csv::Reader::from_reader(source);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| fmt(&e))?;
        if rec.len() < 3 {
            return Err(ClusterError::Format("short record".into()));
        }
        let vertex: usize = rec[0].parse().map_err(|e| fmt(&e))?;
        let direction = Direction::parse(&rec[1]).ok_or_else(|| ClusterError::Format(format!("direction {}", &rec[1])))?;
        let delta: f64 = rec[2].parse().map_err(|e| fmt(&e))?;
        let feature = rec
            .iter()
            .skip(3)
            .map(|v| v.parse::<f64>().map_err(|e| fmt(&e)))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(PerturbationSample {
            action: VertexAction::new(vertex, direction, delta).map_err(|e| fmt(&e))?,
            feature,
        });
    }
    Ok(out)
}
