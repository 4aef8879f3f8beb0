//! Trajectory tables: CSV with 17 significant digits and a minimal SVG
//! line plot.

use std::fmt::Write as _;
use std::io::Write;

use crate::CliError;

/// Named columns of equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// `d.ddddddddddddddddde±x`: 17 significant digits, round-trips `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.headers).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| fmt17(*v))).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

pub fn read_csv(text: &str) -> Result<Table, CliError> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd
        .headers()
        .map_err(io)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut t = Table::new(headers);
    for rec in rd.records() {
        let rec = rec.map_err(io)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| CliError::Io(format!("{s}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        t.push(row);
    }
    Ok(t)
}

fn io(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Plots each `ys` column against `x` as a polyline.
pub fn svg_plot(table: &Table, x: &str, ys: &[String], title: &str) -> Result<String, CliError> {
    let missing = |n: &str| {
        CliError::Config(format!(
            "no column `{n}` (have {})",
            table.headers.join(", ")
        ))
    };
    let xs = table.column(x).ok_or_else(|| missing(x))?;
    let series = ys
        .iter()
        .map(|n| {
            table
                .column(n)
                .map(|c| (n.as_str(), c))
                .ok_or_else(|| missing(n))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bounds = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v
            .filter(|a| a.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| {
                (l.min(a), h.max(a))
            });
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = bounds(&mut xs.iter().copied());
    let (y0, y1) = bounds(&mut series.iter().flat_map(|(_, c)| c.iter().copied()));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, t: &str| {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#,
            escape(t)
        );
    };
    label(
        &mut s,
        MARGIN,
        HEIGHT - MARGIN + 16.0,
        "start",
        &format!("{x0:.3}"),
    );
    label(
        &mut s,
        WIDTH - MARGIN,
        HEIGHT - MARGIN + 16.0,
        "end",
        &format!("{x1:.3}"),
    );
    label(&mut s, WIDTH / 2.0, HEIGHT - 12.0, "middle", x);
    label(
        &mut s,
        MARGIN - 4.0,
        HEIGHT - MARGIN,
        "end",
        &format!("{y0:.3}"),
    );
    label(
        &mut s,
        MARGIN - 4.0,
        MARGIN + 10.0,
        "end",
        &format!("{y1:.3}"),
    );
    for (k, (name, col)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (a, b) in xs.iter().zip(col) {
            if !(a.is_finite() && b.is_finite()) {
                pen_up = true;
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if pen_up { "M" } else { "L" },
                px(*a),
                py(*b)
            );
            pen_up = false;
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#,
            d.trim_end()
        );
        label(
            &mut s,
            WIDTH - MARGIN - 4.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            "end",
            name,
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
