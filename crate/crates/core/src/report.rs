//! CSV and JSON writers for traces, fronts and reference sets.
//!
//! CSV output uses a header row, LF line endings and 17 significant digits.

use std::io::{self, Write};

use serde_json::{json, Value};

use crate::scalarization::{FrontPoint, ReferenceVector};
use crate::solver::IterationTrace;

/// Coordinates are written only up to this dimension.
pub const MAX_THETA_COLUMNS: usize = 50;

/// Shortest form that still carries 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(trace: &IterationTrace, mut w: W) -> io::Result<()> {
    writeln!(w, "k,G,normP,alpha,accepted,kktResidual")?;
    for r in &trace.records {
        let accepted = match r.accepted {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k,
            fmt_f64(r.g_max),
            fmt_f64(r.norm_p),
            fmt_f64(r.alpha),
            accepted,
            fmt_f64(r.kkt_residual)
        )?;
    }
    Ok(())
}

/// Full trace as JSON. Iterates of dimension above [`MAX_THETA_COLUMNS`] are
/// replaced by the string `"elided"`.
pub fn trace_json(trace: &IterationTrace) -> Value {
    let records: Vec<Value> = trace
        .records
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("record serializes");
            if r.theta.len() > MAX_THETA_COLUMNS {
                v["theta"] = json!("elided");
            }
            v
        })
        .collect();
    json!({
        "summary": trace.summary,
        "records": records,
    })
}

pub fn write_front_csv<W: Write>(points: &[FrontPoint], mut w: W) -> io::Result<()> {
    let Some(first) = points.first() else {
        return writeln!(w, "refIndex");
    };
    let m = first.objectives.len();
    let n = first.theta.len();
    let with_theta = n <= MAX_THETA_COLUMNS;

    let mut header = vec!["refIndex".to_string()];
    header.extend((1..=m).map(|j| format!("u_{j}")));
    if with_theta {
        header.extend((1..=n).map(|j| format!("theta_{j}")));
    }
    header.extend((1..=m).map(|j| format!("g_{j}")));
    header.extend(["scalarValue", "stationarityResidual", "terminationReason", "iterations"].map(String::from));
    writeln!(w, "{}", header.join(","))?;

    for p in points {
        let mut row = vec![p.ref_index.to_string()];
        row.extend(p.reference.weights().iter().map(|&v| fmt_f64(v)));
        if with_theta {
            row.extend(p.theta.iter().map(|&v| fmt_f64(v)));
        }
        row.extend(p.objectives.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(p.scalar_value));
        row.push(fmt_f64(p.stationarity_residual));
        row.push(p.termination.to_string());
        row.push(p.iterations.to_string());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_refs_csv<W: Write>(refs: &[ReferenceVector], mut w: W) -> io::Result<()> {
    let m = refs.first().map_or(0, |r| r.len());
    let mut header = vec!["refIndex".to_string()];
    header.extend((1..=m).map(|j| format!("u_{j}")));
    writeln!(w, "{}", header.join(","))?;
    for (k, r) in refs.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(r.weights().iter().map(|&v| fmt_f64(v)));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Scatter-plot data: one objective vector per reference, plus the indices
/// that survive non-dominated filtering.
pub fn plot_json(problem: &str, points: &[FrontPoint], filtered: &[FrontPoint]) -> Value {
    json!({
        "problem": problem,
        "objectives": points.first().map_or(0, |p| p.objectives.len()),
        "points": points.iter().map(|p| json!({
            "refIndex": p.ref_index,
            "reference": p.reference,
            "objectives": p.objectives,
            "termination": p.termination,
        })).collect::<Vec<_>>(),
        "nonDominated": filtered.iter().map(|p| p.ref_index).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{IterationRecord, TerminationReason, TraceSummary};

    fn trace(n: usize) -> IterationTrace {
        IterationTrace {
            records: vec![IterationRecord {
                k: 0,
                theta: vec![0.5; n],
                g_max: 1.0,
                norm_p: 0.25,
                beta: 0.0,
                alpha: 1.0,
                accepted: Some(true),
                shrink_count: 0,
                active: vec![0],
                duals: vec![1.0],
                kkt_residual: 0.0,
                sp_converged: true,
            }],
            summary: TraceSummary {
                iterations: 1,
                shrink_events: 0,
                final_value: 1.0,
                final_stationarity_residual: 0.0,
                termination: TerminationReason::MaxIter,
            },
        }
    }

    #[test]
    fn full_precision() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn trace_csv_layout() {
        let mut buf = Vec::new();
        write_trace_csv(&trace(2), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(!s.contains('\r'));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "k,G,normP,alpha,accepted,kktResidual");
        assert!(lines[1].starts_with("0,1.0000000000000000e0,"));
        assert!(lines[1].contains(",true,"));
    }

    #[test]
    fn json_elides_large_theta() {
        assert_eq!(trace_json(&trace(51))["records"][0]["theta"], "elided");
        assert_eq!(
            trace_json(&trace(50))["records"][0]["theta"].as_array().unwrap().len(),
            50
        );
        assert_eq!(trace_json(&trace(2))["summary"]["termination"], "maxIter");
    }
}
