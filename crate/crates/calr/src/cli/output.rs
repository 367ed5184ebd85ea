//! Bit-stable result files.
//!
//! Every float is written as `{:.16e}` (17 significant digits) so identical
//! runs give identical bytes, in CSV as well as JSON.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CalrError, Result};
use crate::medium::LayeredMedium;
use crate::resonance::{power, shell_energy, SweepRow};
use crate::spectral::Field;

pub const CSV_HEADER: &str = "delta,power,shell_energy,u_farfield_h1,v_farfield_h1,c_delta";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sweep rows as CSV, in the given order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 150);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cols = [r.delta, r.power, r.shell_energy, r.u_farfield_h1, r.v_farfield_h1, r.c_delta];
        out.push_str(&cols.map(fmt_f64).join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON formatter writing floats with 17 significant digits.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as pretty JSON with fixed-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CalrError::Io(e.to_string()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CalrError::Io(format!("cannot write {}: {e}", path.display())))
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldDump {
    pub dimension: usize,
    pub delta: f64,
    pub omega_radius: f64,
    pub cutoff: usize,
    pub dropped_modes: usize,
    pub power: f64,
    pub shell_energy: f64,
    pub modes: Vec<ModeDump>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeDump {
    pub degree: usize,
    pub order: i64,
    pub layers: Vec<LayerDump>,
}

/// Coefficients `(c, d)` of the layer's fundamental pair, each as `[re, im]`.
#[derive(Clone, Debug, Serialize)]
pub struct LayerDump {
    pub inner: f64,
    pub outer: f64,
    pub plasmonic: bool,
    pub coefficients: [Complex64; 2],
}

impl FieldDump {
    pub fn new(field: &Field, medium: &LayeredMedium) -> Self {
        let modes = field
            .modes()
            .iter()
            .map(|m| ModeDump {
                degree: m.mode.degree,
                order: m.mode.order,
                layers: m
                    .layout()
                    .layers
                    .iter()
                    .zip(m.all_coefficients())
                    .map(|(l, c)| LayerDump { inner: l.inner, outer: l.outer, plasmonic: l.plasmonic, coefficients: *c })
                    .collect(),
            })
            .collect();
        FieldDump {
            dimension: field.dimension(),
            delta: field.delta(),
            omega_radius: field.omega_radius(),
            cutoff: field.cutoff(),
            dropped_modes: field.dropped_modes(),
            power: power(field, medium, field.delta()),
            shell_energy: shell_energy(field, medium),
            modes,
        }
    }
}

/// Log-log plot of `E_δ` and the normalized far field against δ.
pub fn sweep_svg(rows: &[SweepRow], path: &Path) -> Result<()> {
    use plotters::prelude::*;

    let pts = |f: fn(&SweepRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.valid && f(r) > 0.0 && f(r).is_finite())
            .map(|r| (r.delta.log10(), f(r).log10()))
            .collect()
    };
    let series = [("log10 E", pts(|r| r.power), RED), ("log10 v far field", pts(|r| r.v_farfield_h1), BLUE)];
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    if all.is_empty() {
        return Err(CalrError::Insufficient("nothing to plot".into()));
    }
    let (xmin, xmax) = all.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let (ymin, ymax) = all.iter().fold((f64::MAX, f64::MIN), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    let pad = 0.05 * (ymax - ymin).max(1.0);
    let draw = || -> std::result::Result<(), Box<dyn std::error::Error>> {
        let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .margin(20)
            .x_label_area_size(40)
            .y_label_area_size(50)
            .caption("delta sweep", ("sans-serif", 20))
            .build_cartesian_2d(xmax.max(xmin + 1e-9)..xmin, (ymin - pad)..(ymax + pad))?;
        chart.configure_mesh().x_desc("log10 delta").draw()?;
        for (label, data, color) in series.iter() {
            chart
                .draw_series(LineSeries::new(data.iter().copied(), color))?
                .label(*label)
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
        }
        chart.configure_series_labels().border_style(BLACK).background_style(WHITE).draw()?;
        root.present()?;
        Ok(())
    };
    draw().map_err(|e| CalrError::Io(format!("cannot write plot {}: {e}", path.display())))
}
