//! CSV import/export for alignment problems and solver cost histories.

use std::io::{Read, Write};

use nalgebra::{Matrix4, Vector3};

use super::{AlignmentProblem, ExperimentReport, HomogeneousPoint, PointPair};
use crate::apps::fmt_f64;
use crate::error::{Error, Result};

const PAIR_COLUMNS: [&str; 6] = ["px", "py", "pz", "qx", "qy", "qz"];

/// Writes `px,py,pz,qx,qy,qz[,w00..w22]`. Weights are written when `with_weights`
/// is set; only the 3×3 block is stored since the homogeneous row is zero.
pub fn write_problem_csv<W: Write>(w: W, problem: &AlignmentProblem, with_weights: bool) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = PAIR_COLUMNS.iter().map(|s| s.to_string()).collect();
    if with_weights {
        header.extend((0..3).flat_map(|i| (0..3).map(move |j| format!("w{i}{j}"))));
    }
    wr.write_record(&header)?;
    for pair in problem.pairs() {
        let mut rec: Vec<String> = pair.p.v.iter().chain(pair.q.v.iter()).map(|&x| fmt_f64(x)).collect();
        if with_weights {
            for i in 0..3 {
                for j in 0..3 {
                    rec.push(fmt_f64(pair.w[(i, j)]));
                }
            }
        }
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads the format written by [`write_problem_csv`]; missing weights default to the 3×3 identity.
pub fn read_problem_csv<R: Read>(r: R) -> Result<AlignmentProblem> {
    let mut rd = csv::Reader::from_reader(r);
    let ncols = rd.headers()?.len();
    if ncols != 6 && ncols != 15 {
        return Err(Error::Parse(format!("expected 6 or 15 columns, found {ncols}")));
    }
    let mut pairs = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let vals = rec
            .iter()
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("row {}: invalid number '{s}'", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut w = Matrix4::identity();
        w[(3, 3)] = 0.0;
        if ncols == 15 {
            for i in 0..3 {
                for j in 0..3 {
                    w[(i, j)] = vals[6 + 3 * i + j];
                }
            }
        }
        pairs.push(PointPair {
            p: HomogeneousPoint::from(Vector3::new(vals[0], vals[1], vals[2])),
            q: HomogeneousPoint::from(Vector3::new(vals[3], vals[4], vals[5])),
            w,
        });
    }
    AlignmentProblem::new(pairs)
}

/// `trial,solver,iteration,cost` for every recorded cost of every run.
pub fn write_cost_history_csv<W: Write>(w: W, report: &ExperimentReport) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["trial", "solver", "iteration", "cost"])?;
    for t in &report.per_trial {
        for r in &t.results {
            for (k, c) in r.cost_history.iter().enumerate() {
                wr.write_record([t.trial.to_string(), r.solver.clone(), k.to_string(), fmt_f64(*c)])?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}
