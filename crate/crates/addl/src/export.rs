//! Plot-ready CSV and JSON outputs.

use std::fmt::Write as _;

use addl_core::classifier::RocCurve;
use addl_core::diagnostics::BlockEnergyReport;
use addl_core::{Matrix, SoftLabels, TrainTrace};

pub const TRACE_HEADER: &str = "iter,total,recon,incoh,code_fit,code_null,sparsity,label_fit,label_null,dP_fro,millis";

pub fn trace_csv(trace: &TrainTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let o = &r.objective;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.iter, o.total, o.recon, o.incoh, o.code_fit, o.code_null, o.sparsity, o.label_fit, o.label_null, r.dp_fro, r.millis
        )
        .unwrap();
    }
    out
}

/// `index,predicted,true,score_0,…,score_{c−1}`.
pub fn predictions_csv(predicted: &[usize], truth: &[usize], scores: &SoftLabels) -> String {
    let c = scores.scores.nrows();
    let mut out = String::from("index,predicted,true");
    for l in 0..c {
        write!(out, ",score_{l}").unwrap();
    }
    out.push('\n');
    for (j, (p, t)) in predicted.iter().zip(truth).enumerate() {
        write!(out, "{j},{p},{t}").unwrap();
        for v in scores.scores.column(j).iter() {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr).unwrap();
    }
    out
}

/// Dense matrix, one row per line, no header.
pub fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn block_energy_csv(px: &BlockEnergyReport, wpx: &BlockEnergyReport) -> String {
    let mut out = String::from("class,on_px,off_px,on_wpx,off_wpx\n");
    for l in 0..px.on_block.len() {
        writeln!(out, "{l},{},{},{},{}", px.on_block[l], px.off_block[l], wpx.on_block[l], wpx.off_block[l]).unwrap();
    }
    out
}

pub fn table_csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
