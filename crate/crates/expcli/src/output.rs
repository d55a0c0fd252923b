//! CSV writers and plot-script emission. Every file starts with the run
//! metadata (flattened config, code version) as `# key=value` comments and
//! a `schema` tag; numeric columns are written with the shortest
//! round-trip formatting, so re-running a config reproduces files byte for
//! byte.

use dda_core::dda::{RunMeta, Verdict};
use std::io::{self, Write};

pub fn write_meta<W: Write>(w: &mut W, meta: &RunMeta) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// bounds.csv: one row per reported constant with its defining formula.
pub fn write_bounds_csv<W: Write>(
    w: &mut W,
    meta: &RunMeta,
    rows: &[(&str, f64, &str)],
) -> io::Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "name,value,formula")?;
    for (name, value, formula) in rows {
        writeln!(w, "{name},{value},\"{formula}\"")?;
    }
    Ok(())
}

/// contraction.csv: the per-window contraction factor (and its exponential
/// majorant where one exists) on a tau grid.
pub fn write_contraction_csv<W: Write>(
    w: &mut W,
    meta: &RunMeta,
    rows: &[(f64, f64, Option<f64>)],
) -> io::Result<()> {
    write_meta(w, meta)?;
    let with_majorant = rows.first().map_or(false, |r| r.2.is_some());
    if with_majorant {
        writeln!(w, "tau,contraction,majorant")?;
    } else {
        writeln!(w, "tau,contraction")?;
    }
    for (tau, m, maj) in rows {
        if with_majorant {
            writeln!(w, "{tau},{m},{}", maj.unwrap_or(f64::NAN))?;
        } else {
            writeln!(w, "{tau},{m}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ThresholdReportRow {
    pub h: f64,
    pub converged: usize,
    pub total: usize,
}

/// threshold.csv: every probe plus the final bracket.
pub fn write_threshold_csv<W: Write>(
    w: &mut W,
    meta: &RunMeta,
    probes: &[ThresholdReportRow],
    bracket: (f64, f64),
) -> io::Result<()> {
    write_meta(w, meta)?;
    writeln!(w, "row,h,converged,total,majority")?;
    for p in probes {
        let majority = if 2 * p.converged > p.total {
            "converged"
        } else {
            "not-converged"
        };
        writeln!(w, "probe,{},{},{},{majority}", p.h, p.converged, p.total)?;
    }
    writeln!(w, "bracket_low,{},,,converged", bracket.0)?;
    writeln!(w, "bracket_high,{},,,not-converged", bracket.1)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub enum CellOutcome {
    Done {
        verdict: Verdict,
        err_initial: f64,
        err_final: f64,
        reduction: f64,
        updates_to_converge: Option<usize>,
    },
    Failed {
        message: String,
    },
}

#[derive(Debug, Clone)]
pub struct CellRow {
    pub h: f64,
    pub lambda: Option<f64>,
    pub seed: usize,
    pub outcome: CellOutcome,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub h: f64,
    pub lambda: Option<f64>,
    pub majority: String,
    pub converged: usize,
    pub total: usize,
    pub note: String,
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// sweep.csv: one `cell` row per (h, lambda, seed) and one `summary` row
/// per (h, lambda) with the majority verdict and any anomaly note.
pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    meta: &RunMeta,
    cells: &[CellRow],
    summaries: &[SummaryRow],
) -> io::Result<()> {
    write_meta(w, meta)?;
    writeln!(
        w,
        "row,h,lambda,seed,verdict,err_initial,err_final,reduction,updates_to_converge,converged,total,note"
    )?;
    for c in cells {
        match &c.outcome {
            CellOutcome::Done {
                verdict,
                err_initial,
                err_final,
                reduction,
                updates_to_converge,
            } => {
                writeln!(
                    w,
                    "cell,{},{},{},{verdict},{err_initial},{err_final},{reduction},{},,,",
                    c.h,
                    opt_f64(c.lambda),
                    c.seed,
                    updates_to_converge
                        .map(|u| u.to_string())
                        .unwrap_or_default(),
                )?;
            }
            CellOutcome::Failed { message } => {
                let clean = message.replace([',', '\n'], ";");
                writeln!(
                    w,
                    "cell,{},{},{},error,,,,,,,{clean}",
                    c.h,
                    opt_f64(c.lambda),
                    c.seed
                )?;
            }
        }
    }
    for s in summaries {
        writeln!(
            w,
            "summary,{},{},,{},,,,,{},{},{}",
            s.h,
            opt_f64(s.lambda),
            s.majority,
            s.converged,
            s.total,
            s.note
        )?;
    }
    Ok(())
}

/// gnuplot script drawing log error against time from series.csv.
pub fn gnuplot_script(with_h1: bool) -> String {
    let mut s = String::new();
    s.push_str("# render with: gnuplot plot_series.gnuplot (from the output directory)\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set logscale y\n");
    s.push_str("set format y '%.1e'\n");
    s.push_str("set xlabel 'time'\n");
    s.push_str("set ylabel 'assimilation error'\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'series.png'\n");
    if with_h1 {
        s.push_str(
            "plot 'series.csv' using 1:2 with lines title 'error l2', \\\n     'series.csv' using 1:3 with lines title 'error h1'\n",
        );
    } else {
        s.push_str("plot 'series.csv' using 1:2 with lines title 'error l2'\n");
    }
    s
}
