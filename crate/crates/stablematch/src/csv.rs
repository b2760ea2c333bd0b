//! CSV emission for every tabular artifact the harness produces.
//!
//! All writers share the same conventions: UTF-8, comma separators, a
//! mandatory header row, `\n` line endings, and floats rendered with Rust's
//! shortest-roundtrip `Display` (always a `.` decimal point, no locale
//! dependence). Writers are hand-rolled so the byte output is a stable
//! contract: two runs that compute equal values produce identical files.

use crate::engines::{TraceEvent, TraceOutcome};
use crate::experiments::{AggRow, CompareRow, HeatCell, HistRow, IdealRow, SweepRow};
use crate::market::Side;
use crate::prefgen::LatentDraw;
use crate::stability::BlockReport;
use crate::theory::OracleRow;
use std::io::{self, Write};

pub const SWEEP_HEADER: &str =
    "k,replication,match_rate,blocking_pairs,doctors_zero_interviews,mean_interviews_per_doctor";
pub const SWEEP_AGG_HEADER: &str =
    "k,mean_match_rate,sd_match_rate,mean_blocking_pairs,sd_blocking_pairs,n_reps";
pub const COMPARE_HEADER: &str = "replication,doctors_prefer_capped,doctors_prefer_uncapped,hospitals_prefer_capped,hospitals_prefer_uncapped,excess_blocking_pairs";
pub const HIST_HEADER: &str = "arm,interviews,doctor_count,replication";
pub const IDEAL_HEADER: &str = "replication,doctors_prefer_capped,doctors_prefer_ideal,hospitals_prefer_capped,hospitals_prefer_ideal";
pub const HEATMAP_HEADER: &str = "l,k,mean_match_rate,n_reps";
pub const ORACLE_HEADER: &str = "l,k,predicted_matched,observed_matched,predicted_blocking,observed_blocking,n_doctors,n_hospitals,naive_blocking";
pub const TRACE_HEADER: &str = "round,proposer_side,proposer,proposee,outcome";
pub const BLOCKING_HEADER: &str = "doctor,hospital";
pub const LATENTS_HEADER: &str = "side,index,xC,xF";

pub fn write_sweep<W: Write>(mut w: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k,
            r.replication,
            r.match_rate,
            r.blocking_pairs,
            r.doctors_zero_interviews,
            r.mean_interviews_per_doctor
        )?;
    }
    Ok(())
}

pub fn write_sweep_agg<W: Write>(mut w: W, rows: &[AggRow]) -> io::Result<()> {
    writeln!(w, "{SWEEP_AGG_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k, r.mean_match_rate, r.sd_match_rate, r.mean_blocking_pairs, r.sd_blocking_pairs, r.n_reps
        )?;
    }
    Ok(())
}

pub fn write_compare<W: Write>(mut w: W, rows: &[CompareRow]) -> io::Result<()> {
    writeln!(w, "{COMPARE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.replication,
            r.doctors_prefer_capped,
            r.doctors_prefer_uncapped,
            r.hospitals_prefer_capped,
            r.hospitals_prefer_uncapped,
            r.excess_blocking_pairs
        )?;
    }
    Ok(())
}

pub fn write_hist<W: Write>(mut w: W, rows: &[HistRow]) -> io::Result<()> {
    writeln!(w, "{HIST_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.arm, r.interviews, r.doctor_count, r.replication)?;
    }
    Ok(())
}

pub fn write_ideal<W: Write>(mut w: W, rows: &[IdealRow]) -> io::Result<()> {
    writeln!(w, "{IDEAL_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.replication,
            r.doctors_prefer_capped,
            r.doctors_prefer_ideal,
            r.hospitals_prefer_capped,
            r.hospitals_prefer_ideal
        )?;
    }
    Ok(())
}

pub fn write_heatmap<W: Write>(mut w: W, cells: &[HeatCell]) -> io::Result<()> {
    writeln!(w, "{HEATMAP_HEADER}")?;
    for c in cells {
        writeln!(w, "{},{},{},{}", c.l, c.k, c.mean_match_rate, c.n_reps)?;
    }
    Ok(())
}

pub fn write_oracle<W: Write>(mut w: W, rows: &[OracleRow]) -> io::Result<()> {
    writeln!(w, "{ORACLE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.l,
            r.k,
            r.predicted_matched,
            r.observed_matched,
            r.predicted_blocking,
            r.observed_blocking,
            r.n_doctors,
            r.n_hospitals,
            r.naive_blocking
        )?;
    }
    Ok(())
}

pub fn write_trace<W: Write>(mut w: W, events: &[TraceEvent]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for e in events {
        let side = match e.proposer.side {
            Side::Doctor => "doctor",
            Side::Hospital => "hospital",
        };
        let outcome = match e.outcome {
            TraceOutcome::Accepted => "accepted",
            TraceOutcome::Rejected => "rejected",
        };
        writeln!(w, "{},{},{},{},{}", e.round, side, e.proposer.index, e.proposee, outcome)?;
    }
    Ok(())
}

pub fn write_blocking<W: Write>(mut w: W, report: &BlockReport) -> io::Result<()> {
    writeln!(w, "{BLOCKING_HEADER}")?;
    for (d, h) in &report.pairs {
        writeln!(w, "{d},{h}")?;
    }
    Ok(())
}

pub fn write_latents<W: Write>(mut w: W, draw: &LatentDraw) -> io::Result<()> {
    writeln!(w, "{LATENTS_HEADER}")?;
    for (i, (xc, xf)) in draw.xc_doctors.iter().zip(&draw.xf_doctors).enumerate() {
        writeln!(w, "doctor,{i},{xc},{xf}")?;
    }
    for (i, (xc, xf)) in draw.xc_hospitals.iter().zip(&draw.xf_hospitals).enumerate() {
        writeln!(w, "hospital,{i},{xc},{xf}")?;
    }
    Ok(())
}
