use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::Mode;
use super::EngineError;
use crate::error::{content_lines, parse_field, ParseError};
use crate::gospf::ProtocolEvent;

pub const METRICS_HEADER: &str = "t,active_links,power_w,throughput_bps,energy_j,ctrl_bytes,dropped_bits";

/// One sample window. `energy_j` is cumulative, the rest are per window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    /// Window start, seconds.
    pub t: f64,
    /// Links with at least one powered interface at the end of the window.
    pub active_links: usize,
    /// Mean power over the window.
    pub power_w: f64,
    pub throughput_bps: f64,
    pub energy_j: f64,
    pub ctrl_bytes: u64,
    pub dropped_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub mode: Mode,
    /// Hash of topology, traffic and horizon; runs are comparable only when it matches.
    pub fingerprint: u64,
    pub t_sample: f64,
    pub horizon: f64,
    pub windows: usize,
    pub total_energy_j: f64,
    pub avg_active_links: f64,
    pub offered_bits: f64,
    pub delivered_bits: f64,
    pub dropped_bits: f64,
    pub ctrl_bytes: u64,
    pub congestion_unresolved: usize,
}

impl Summary {
    pub fn loss_pct(&self) -> f64 {
        if self.offered_bits > 0.0 {
            self.dropped_bits / self.offered_bits * 100.0
        } else {
            0.0
        }
    }

    /// Control bytes over useful delivered bytes; infinite when control traffic flowed but no
    /// data did.
    pub fn overhead_pct(&self) -> f64 {
        let useful = self.delivered_bits / 8.0;
        if useful > 0.0 {
            self.ctrl_bytes as f64 / useful * 100.0
        } else if self.ctrl_bytes > 0 {
            f64::INFINITY
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub rows: Vec<MetricsRow>,
    pub summary: Summary,
}

pub fn write_metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.t, r.active_links, r.power_w, r.throughput_bps, r.energy_j, r.ctrl_bytes, r.dropped_bits
        )
        .unwrap();
    }
    out
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>, ParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => return Err(ParseError::new(1, format!("expected header `{METRICS_HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = raw.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(ParseError::new(line, "expected 7 comma-separated fields"));
        }
        rows.push(MetricsRow {
            t: parse_field(line, "t", f[0])?,
            active_links: parse_field(line, "active_links", f[1])?,
            power_w: parse_field(line, "power_w", f[2])?,
            throughput_bps: parse_field(line, "throughput_bps", f[3])?,
            energy_j: parse_field(line, "energy_j", f[4])?,
            ctrl_bytes: parse_field(line, "ctrl_bytes", f[5])?,
            dropped_bits: parse_field(line, "dropped_bits", f[6])?,
        });
    }
    Ok(rows)
}

pub fn write_summary(s: &Summary) -> String {
    let mut out = String::new();
    writeln!(out, "total_energy_j={}", s.total_energy_j).unwrap();
    writeln!(out, "avg_active_links={}", s.avg_active_links).unwrap();
    writeln!(out, "loss_pct={}", s.loss_pct()).unwrap();
    writeln!(out, "overhead_pct={}", s.overhead_pct()).unwrap();
    writeln!(out, "mode={}", s.mode).unwrap();
    writeln!(out, "fingerprint={:016x}", s.fingerprint).unwrap();
    writeln!(out, "t_sample={}", s.t_sample).unwrap();
    writeln!(out, "horizon={}", s.horizon).unwrap();
    writeln!(out, "windows={}", s.windows).unwrap();
    writeln!(out, "offered_bits={}", s.offered_bits).unwrap();
    writeln!(out, "delivered_bits={}", s.delivered_bits).unwrap();
    writeln!(out, "dropped_bits={}", s.dropped_bits).unwrap();
    writeln!(out, "ctrl_bytes={}", s.ctrl_bytes).unwrap();
    writeln!(out, "congestion_unresolved={}", s.congestion_unresolved).unwrap();
    out
}

fn key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>, ParseError> {
    let mut map = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, "expected `key=value`"))?;
        map.insert(k.trim().to_string(), (line, v.trim().to_string()));
    }
    Ok(map)
}

fn take<T: std::str::FromStr>(
    map: &BTreeMap<String, (usize, String)>,
    key: &str,
) -> Result<T, ParseError> {
    let (line, v) = map
        .get(key)
        .ok_or_else(|| ParseError::new(0, format!("missing key '{key}'")))?;
    parse_field(*line, key, v)
}

/// Reads a summary written by [`write_summary`]. The derived percentages are recomputed from the
/// totals.
pub fn parse_summary(text: &str) -> Result<Summary, ParseError> {
    let map = key_values(text)?;
    let (mline, mode) = map
        .get("mode")
        .ok_or_else(|| ParseError::new(0, "missing key 'mode'"))?;
    let (fline, fp) = map
        .get("fingerprint")
        .ok_or_else(|| ParseError::new(0, "missing key 'fingerprint'"))?;
    Ok(Summary {
        mode: mode.parse().map_err(|e: String| ParseError::new(*mline, e))?,
        fingerprint: u64::from_str_radix(fp, 16)
            .map_err(|_| ParseError::new(*fline, format!("invalid fingerprint '{fp}'")))?,
        t_sample: take(&map, "t_sample")?,
        horizon: take(&map, "horizon")?,
        windows: take(&map, "windows")?,
        total_energy_j: take(&map, "total_energy_j")?,
        avg_active_links: take(&map, "avg_active_links")?,
        offered_bits: take(&map, "offered_bits")?,
        delivered_bits: take(&map, "delivered_bits")?,
        dropped_bits: take(&map, "dropped_bits")?,
        ctrl_bytes: take(&map, "ctrl_bytes")?,
        congestion_unresolved: take(&map, "congestion_unresolved")?,
    })
}

pub fn write_event_log(events: &[ProtocolEvent]) -> String {
    let mut out = String::new();
    for e in events {
        writeln!(out, "{e}").unwrap();
    }
    out
}

pub fn parse_event_log(text: &str) -> Result<Vec<ProtocolEvent>, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            ProtocolEvent::parse(l).ok_or_else(|| ParseError::new(i + 1, "malformed event line"))
        })
        .collect()
}

/// Outcome of comparing a run (`a`, normally GOSPF) against a reference (`b`, normally the
/// all-links baseline).
#[derive(Debug, Clone, PartialEq)]
pub struct SavingReport {
    pub saving_pct: f64,
    pub energy_a_j: f64,
    pub energy_b_j: f64,
    pub loss_pct_a: f64,
    pub loss_pct_b: f64,
    pub overhead_pct_a: f64,
    pub overhead_pct_b: f64,
    pub avg_active_links_a: f64,
    pub avg_active_links_b: f64,
    /// `(window start, energy of a, energy of b)` per window, when both runs used the same
    /// windows.
    pub windows: Vec<(f64, f64, f64)>,
}

impl SavingReport {
    pub fn loss_delta_pct(&self) -> f64 {
        self.loss_pct_a - self.loss_pct_b
    }

    /// Saving over the windows starting in `[from, to)`, or `None` if there are none.
    pub fn saving_between(&self, from: f64, to: f64) -> Option<f64> {
        let (mut ea, mut eb) = (0.0, 0.0);
        let mut any = false;
        for &(t, a, b) in &self.windows {
            if t >= from && t < to {
                ea += a;
                eb += b;
                any = true;
            }
        }
        (any && eb > 0.0).then(|| (1.0 - ea / eb) * 100.0)
    }
}

fn per_window_energy(rows: &[MetricsRow]) -> Vec<f64> {
    let mut prev = 0.0;
    rows.iter()
        .map(|r| {
            let e = r.energy_j - prev;
            prev = r.energy_j;
            e
        })
        .collect()
}

/// Energy saving of `a` relative to `b`: `(1 - E_a / E_b) * 100`.
pub fn compare(a: &MetricsSeries, b: &MetricsSeries) -> Result<SavingReport, EngineError> {
    if a.summary.fingerprint != b.summary.fingerprint {
        return Err(EngineError::MismatchedScenarios(format!(
            "fingerprints differ: {:016x} vs {:016x}",
            a.summary.fingerprint, b.summary.fingerprint
        )));
    }
    let (sa, sb) = (&a.summary, &b.summary);
    let saving_pct = if sb.total_energy_j > 0.0 {
        (1.0 - sa.total_energy_j / sb.total_energy_j) * 100.0
    } else {
        0.0
    };
    let aligned = a.rows.len() == b.rows.len()
        && a.rows.iter().zip(&b.rows).all(|(x, y)| x.t == y.t);
    let windows = if aligned {
        a.rows
            .iter()
            .zip(per_window_energy(&a.rows))
            .zip(per_window_energy(&b.rows))
            .map(|((r, ea), eb)| (r.t, ea, eb))
            .collect()
    } else {
        Vec::new()
    };
    Ok(SavingReport {
        saving_pct,
        energy_a_j: sa.total_energy_j,
        energy_b_j: sb.total_energy_j,
        loss_pct_a: sa.loss_pct(),
        loss_pct_b: sb.loss_pct(),
        overhead_pct_a: sa.overhead_pct(),
        overhead_pct_b: sb.overhead_pct(),
        avg_active_links_a: sa.avg_active_links,
        avg_active_links_b: sb.avg_active_links,
        windows,
    })
}

pub fn write_comparison(r: &SavingReport) -> String {
    let mut out = String::new();
    writeln!(out, "saving_pct={:.1}", r.saving_pct).unwrap();
    writeln!(out, "energy_a_j={}", r.energy_a_j).unwrap();
    writeln!(out, "energy_b_j={}", r.energy_b_j).unwrap();
    writeln!(out, "loss_delta_pct={}", r.loss_delta_pct()).unwrap();
    writeln!(out, "loss_pct_a={}", r.loss_pct_a).unwrap();
    writeln!(out, "loss_pct_b={}", r.loss_pct_b).unwrap();
    writeln!(out, "overhead_pct_a={}", r.overhead_pct_a).unwrap();
    writeln!(out, "overhead_pct_b={}", r.overhead_pct_b).unwrap();
    writeln!(out, "avg_active_links_a={}", r.avg_active_links_a).unwrap();
    writeln!(out, "avg_active_links_b={}", r.avg_active_links_b).unwrap();
    out
}

/// Reads a comparison file. The per-window series is not part of the file and comes back empty;
/// `saving_pct` carries the one-decimal rounding of the file.
pub fn parse_comparison(text: &str) -> Result<SavingReport, ParseError> {
    let map = key_values(text)?;
    Ok(SavingReport {
        saving_pct: take(&map, "saving_pct")?,
        energy_a_j: take(&map, "energy_a_j")?,
        energy_b_j: take(&map, "energy_b_j")?,
        loss_pct_a: take(&map, "loss_pct_a")?,
        loss_pct_b: take(&map, "loss_pct_b")?,
        overhead_pct_a: take(&map, "overhead_pct_a")?,
        overhead_pct_b: take(&map, "overhead_pct_b")?,
        avg_active_links_a: take(&map, "avg_active_links_a")?,
        avg_active_links_b: take(&map, "avg_active_links_b")?,
        windows: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(total: f64) -> MetricsSeries {
        MetricsSeries {
            rows: vec![MetricsRow {
                t: 0.0,
                active_links: 3,
                power_w: total,
                throughput_bps: 0.0,
                energy_j: total,
                ctrl_bytes: 0,
                dropped_bits: 0.0,
            }],
            summary: Summary {
                mode: Mode::Gospf,
                fingerprint: 7,
                t_sample: 1.0,
                horizon: 1.0,
                windows: 1,
                total_energy_j: total,
                avg_active_links: 3.0,
                offered_bits: 100.0,
                delivered_bits: 80.0,
                dropped_bits: 20.0,
                ctrl_bytes: 1,
                congestion_unresolved: 0,
            },
        }
    }

    #[test]
    fn table_values_give_reported_saving() {
        let r = compare(&series(2035.94), &series(3121.38)).unwrap();
        assert!(write_comparison(&r).starts_with("saving_pct=34.8\n"));
        let same = compare(&series(10.0), &series(10.0)).unwrap();
        assert!(write_comparison(&same).starts_with("saving_pct=0.0\n"));
    }

    #[test]
    fn all_sleep_saving_closed_form() {
        // idle-dominated reference at 0.8 W versus everything asleep at 0.016 W
        let r = compare(&series(0.016), &series(0.8)).unwrap();
        assert!((r.saving_pct - (1.0 - 0.016 / 0.8) * 100.0).abs() < 1e-9);
    }

    #[test]
    fn mismatched_fingerprints_are_rejected() {
        let mut b = series(1.0);
        b.summary.fingerprint = 8;
        assert!(matches!(compare(&series(1.0), &b), Err(EngineError::MismatchedScenarios(_))));
    }

    #[test]
    fn files_round_trip() {
        let s = series(12.5);
        assert_eq!(parse_metrics_csv(&write_metrics_csv(&s.rows)).unwrap(), s.rows);
        assert_eq!(parse_summary(&write_summary(&s.summary)).unwrap(), s.summary);
        assert!((s.summary.loss_pct() - 20.0).abs() < 1e-12);
        assert!((s.summary.overhead_pct() - 10.0).abs() < 1e-12);
        let r = compare(&s, &series(25.0)).unwrap();
        let back = parse_comparison(&write_comparison(&r)).unwrap();
        assert_eq!(back.saving_pct, 50.0);
        assert_eq!(back.energy_b_j, 25.0);
        assert!(parse_metrics_csv("t,x\n").is_err());
    }
}
