use std::io::Write;

use super::LinearModel;
use crate::error::Result;
use crate::texture::{Channel, Family};

/// Absolute coefficient weight of one (family, feature, channel) category,
/// summed over windows, distances and cutoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownRow {
    pub family: Family,
    pub feature: &'static str,
    pub channel: Channel,
    pub abs_weight: f64,
    /// Fraction of the model's total absolute weight. All zero for an
    /// all-zero model.
    pub share: f64,
}

/// Rows in first-appearance manifest order.
pub fn weight_breakdown(m: &LinearModel) -> Vec<BreakdownRow> {
    let mut rows: Vec<BreakdownRow> = Vec::new();
    for (meta, w) in m.manifest().iter().zip(&m.weights) {
        let pos = rows
            .iter()
            .position(|r| r.family == meta.family && r.feature == meta.feature && r.channel == meta.channel);
        match pos {
            Some(i) => rows[i].abs_weight += w.abs(),
            None => rows.push(BreakdownRow {
                family: meta.family,
                feature: meta.feature,
                channel: meta.channel,
                abs_weight: w.abs(),
                share: 0.0,
            }),
        }
    }
    let total: f64 = rows.iter().map(|r| r.abs_weight).sum();
    if total > 0.0 {
        for r in &mut rows {
            r.share = r.abs_weight / total;
        }
    }
    rows
}

/// Share per (family, feature), summed over channels.
pub fn feature_shares(rows: &[BreakdownRow]) -> Vec<(Family, &'static str, f64)> {
    let mut out: Vec<(Family, &'static str, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(f, n, _)| *f == r.family && *n == r.feature) {
            Some(e) => e.2 += r.share,
            None => out.push((r.family, r.feature, r.share)),
        }
    }
    out
}

/// Share per (family, channel), summed over features.
pub fn family_channel_shares(rows: &[BreakdownRow]) -> Vec<(Family, Channel, f64)> {
    let mut out: Vec<(Family, Channel, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(f, c, _)| *f == r.family && *c == r.channel) {
            Some(e) => e.2 += r.share,
            None => out.push((r.family, r.channel, r.share)),
        }
    }
    out
}

pub fn write_breakdown_csv<W: Write>(rows: &[BreakdownRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "feature", "channel", "abs_weight", "share"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.family.name().to_string(),
            r.feature.to_string(),
            r.channel.name().to_string(),
            format!("{:e}", r.abs_weight),
            format!("{:.6}", r.share),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    std::io::Error::other(e).into()
}
