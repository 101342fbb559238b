//! Trace overlays: input, folded and recovered against time.
//!
//! No text is drawn, so no font support is needed.

use std::path::Path;

use plotters::coord::Shift;
use plotters::prelude::*;

use crate::output::TraceRow;
use crate::CliError;

const SIZE: (u32, u32) = (1200, 600);

fn draw<DB: DrawingBackend>(area: DrawingArea<DB, Shift>, rows: &[TraceRow]) -> Result<(), String> {
    let err = |e: DrawingAreaErrorKind<DB::ErrorType>| e.to_string();
    area.fill(&WHITE).map_err(err)?;
    let (t0, t1) = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if b.t_s > a.t_s => (a.t_s, b.t_s),
        _ => return area.present().map_err(err),
    };
    let (lo, hi) = rows
        .iter()
        .flat_map(|r| [r.input_v, r.folded_v, r.recovered_v])
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = 0.05 * (hi - lo).max(1e-12);
    let mut chart = ChartBuilder::on(&area)
        .margin(20)
        .build_cartesian_2d(t0..t1, (lo - pad)..(hi + pad))
        .map_err(err)?;
    chart
        .draw_series(LineSeries::new([(t0, 0.0), (t1, 0.0)], BLACK.mix(0.3)))
        .map_err(err)?;
    let series: [(fn(&TraceRow) -> f64, RGBColor); 3] = [
        (|r| r.input_v, BLUE),
        (|r| r.recovered_v, GREEN),
        (|r| r.folded_v, RED),
    ];
    for (f, colour) in series {
        chart
            .draw_series(LineSeries::new(rows.iter().map(|r| (r.t_s, f(r))), colour.stroke_width(2)))
            .map_err(err)?;
    }
    area.present().map_err(err)
}

/// Writes an overlay; `.svg` gives vector output, `.png`/`.bmp` a bitmap.
pub fn emit_plot(rows: &[TraceRow], path: &Path) -> Result<(), CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let res = match ext.as_str() {
        "svg" => draw(SVGBackend::new(path, SIZE).into_drawing_area(), rows),
        "png" | "bmp" => draw(BitMapBackend::new(path, SIZE).into_drawing_area(), rows),
        other => {
            return Err(CliError::Config(format!(
                "unsupported plot extension `{other}` (use svg, png or bmp)"
            )))
        }
    };
    res.map_err(|message| CliError::Plot {
        path: path.to_path_buf(),
        message,
    })
}
