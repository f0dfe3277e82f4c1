use std::fmt::Write as _;
use std::io::Write;

use super::{Confusion, ExperimentReport, Scores};
use crate::Result;

fn score_fields(s: &Scores) -> [String; 3] {
    [
        format!("{:.6}", s.precision),
        format!("{:.6}", s.recall),
        format!("{:.6}", s.f1),
    ]
}

fn count_fields(c: &Confusion) -> [String; 3] {
    [c.tp.to_string(), c.fp.to_string(), c.fn_.to_string()]
}

/// One row per fold, then `micro` (pooled counts) and `macro` (mean of fold
/// scores, no counts) rows.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "fold",
        "theta_concept",
        "theta_property",
        "tp",
        "fp",
        "fn",
        "precision",
        "recall",
        "f1",
    ])?;
    for f in &report.folds {
        let mut row = vec![
            f.fold.to_string(),
            format!("{:.2}", f.theta_concept),
            format!("{:.2}", f.theta_property),
        ];
        row.extend(count_fields(&f.confusion));
        row.extend(score_fields(&f.confusion.scores()));
        w.write_record(&row)?;
    }
    let pooled = report.pooled();
    let mut row = vec!["micro".to_string(), String::new(), String::new()];
    row.extend(count_fields(&pooled));
    row.extend(score_fields(&pooled.scores()));
    w.write_record(&row)?;
    let mut row = vec!["macro".to_string(); 1];
    row.extend(std::iter::repeat_n(String::new(), 5));
    row.extend(score_fields(&report.macro_scores()));
    w.write_record(&row)?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One row per ablation mode with micro metrics and macro F1.
pub fn write_ablation_csv<W: Write>(runs: &[(String, ExperimentReport)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["mode", "tp", "fp", "fn", "precision", "recall", "f1", "macro_f1"])?;
    for (name, r) in runs {
        let pooled = r.pooled();
        let mut row = vec![name.clone()];
        row.extend(count_fields(&pooled));
        row.extend(score_fields(&pooled.scores()));
        row.push(format!("{:.6}", r.macro_scores().f1));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn report_table(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>6} {:>8} {:>8} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}",
        "fold", "theta_c", "theta_p", "tp", "fp", "fn", "precision", "recall", "f1"
    );
    for f in &report.folds {
        let sc = f.confusion.scores();
        let _ = writeln!(
            s,
            "{:>6} {:>8.2} {:>8.2} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
            f.fold,
            f.theta_concept,
            f.theta_property,
            f.confusion.tp,
            f.confusion.fp,
            f.confusion.fn_,
            sc.precision,
            sc.recall,
            sc.f1
        );
    }
    let p = report.pooled();
    let m = p.scores();
    let _ = writeln!(
        s,
        "{:>6} {:>8} {:>8} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
        "micro", "", "", p.tp, p.fp, p.fn_, m.precision, m.recall, m.f1
    );
    let m = report.macro_scores();
    let _ = writeln!(
        s,
        "{:>6} {:>8} {:>8} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
        "macro", "", "", "", "", "", m.precision, m.recall, m.f1
    );
    s
}

pub fn ablation_table(runs: &[(String, ExperimentReport)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<18} {:>9} {:>9} {:>9} {:>9}", "mode", "precision", "recall", "f1", "macro_f1");
    for (name, r) in runs {
        let m = r.micro();
        let _ = writeln!(
            s,
            "{:<18} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            name,
            m.precision,
            m.recall,
            m.f1,
            r.macro_scores().f1
        );
    }
    s
}
