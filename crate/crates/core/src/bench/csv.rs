use std::io::{self, Write};

use crate::sim::{ContextRow, SimulationTrace};

use super::{ConvergenceStudy, ErrorReport};

/// Formats like C's `printf("%.17g", x)`.
///
/// Seventeen significant digits round-trip every `f64`, so a value written
/// and read back is bit-identical.
pub fn format_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (P - 1 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn escape(field: &str) -> std::borrow::Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\"")).into()
    } else {
        field.into()
    }
}

/// Comma-separated writer with a header row. Fields containing commas,
/// quotes or line breaks are quoted.
pub struct CsvWriter<W: Write> {
    out: W,
    columns: usize,
}

impl<W: Write> CsvWriter<W> {
    pub fn new<S: AsRef<str>>(mut out: W, header: &[S]) -> io::Result<Self> {
        let line: Vec<_> = header.iter().map(|h| escape(h.as_ref())).collect();
        writeln!(out, "{}", line.join(","))?;
        Ok(CsvWriter {
            out,
            columns: header.len(),
        })
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> io::Result<()> {
        debug_assert_eq!(fields.len(), self.columns);
        let line: Vec<_> = fields.iter().map(|f| escape(f.as_ref())).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn numbers(&mut self, values: &[f64]) -> io::Result<()> {
        let fields: Vec<String> = values.iter().map(|&v| format_g17(v)).collect();
        self.row(&fields)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// One row per output-grid point: time, then each block's states and
/// outputs.
pub fn write_trace_csv<W: Write>(out: W, trace: &SimulationTrace) -> io::Result<()> {
    let mut header = vec!["time".to_string()];
    for b in &trace.blocks {
        let n_states = b.states.first().map_or(0, Vec::len);
        header.extend((0..n_states).map(|i| format!("{}.x{}", b.name, i)));
        header.extend(b.output_names.iter().map(|p| format!("{}.{}", b.name, p)));
    }
    let mut w = CsvWriter::new(out, &header)?;
    let mut row = Vec::with_capacity(header.len());
    for (k, &t) in trace.times.iter().enumerate() {
        row.clear();
        row.push(t);
        for b in &trace.blocks {
            row.extend_from_slice(&b.states[k]);
            row.extend_from_slice(&b.outputs[k]);
        }
        w.numbers(&row)?;
    }
    Ok(())
}

pub fn write_context_csv<W: Write>(
    out: W,
    rows: &[ContextRow],
    channel_names: &[String],
) -> io::Result<()> {
    let header = [
        "time", "channel", "context", "context_id", "rho", "gamma", "omega_best", "prediction",
        "actual",
    ];
    let mut w = CsvWriter::new(out, &header)?;
    for r in rows {
        let channel = channel_names
            .get(r.channel)
            .cloned()
            .unwrap_or_else(|| r.channel.to_string());
        w.row(&[
            format_g17(r.time),
            channel,
            r.context.name().to_string(),
            r.context.id().to_string(),
            format_g17(r.rho),
            format_g17(r.gamma),
            format_g17(r.omega_best),
            format_g17(r.prediction),
            format_g17(r.actual),
        ])?;
    }
    Ok(())
}

pub fn write_errors_csv<W: Write>(out: W, rows: &[(String, ErrorReport)]) -> io::Result<()> {
    let header = ["series", "er_percent", "cumulative_abs_error", "max_abs_error", "n", "excluded"];
    let mut w = CsvWriter::new(out, &header)?;
    for (name, r) in rows {
        w.row(&[
            name.clone(),
            format_g17(r.er_percent),
            format_g17(r.cumulative_abs_error),
            format_g17(r.max_abs_error()),
            r.n.to_string(),
            r.excluded.to_string(),
        ])?;
    }
    Ok(())
}

/// One row per ladder level; the fitted slope repeats on every row of its
/// policy, or reads `saturated`.
pub fn write_convergence_csv<W: Write>(out: W, rows: &[(String, ConvergenceStudy)]) -> io::Result<()> {
    let header = ["policy", "level", "h", "error", "slope"];
    let mut w = CsvWriter::new(out, &header)?;
    for (policy, study) in rows {
        let slope = study
            .slope
            .map_or_else(|| "saturated".to_string(), format_g17);
        for (level, (h, e)) in study.steps.iter().zip(&study.errors).enumerate() {
            w.row(&[
                policy.clone(),
                level.to_string(),
                format_g17(*h),
                format_g17(*e),
                slope.clone(),
            ])?;
        }
    }
    Ok(())
}

/// Row-major matrix, no header.
pub fn write_pi_csv<W: Write>(mut out: W, rows: &[Vec<f64>]) -> io::Result<()> {
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g17() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1.0 / 3.0, "0.33333333333333331"),
            (5.0 / 6.0, "0.83333333333333337"),
            (1e-5, "1.0000000000000001e-05"),
            (1.5e-7, "1.4999999999999999e-07"),
            (123456789.0, "123456789"),
            (1e17, "1e+17"),
            (1e16, "10000000000000000"),
            (0.0001, "0.0001"),
            (6.02214076e23, "6.0221407599999999e+23"),
            (f64::INFINITY, "inf"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g17(x), want, "{x:e}");
        }
    }

    #[test]
    fn round_trips() {
        for &x in &[0.1, 1.0 / 7.0, -3.25e-300, 1.7976931348623157e308, 4.9e-324] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn quotes_fields_with_separators() {
        let mut w = CsvWriter::new(Vec::new(), &["policy", "note"]).unwrap();
        w.row(&["poly(1,3,0)", "say \"hi\""]).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text, "policy,note\n\"poly(1,3,0)\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn pi_rows() {
        let mut buf = Vec::new();
        write_pi_csv(&mut buf, &[vec![1.0, 0.5], vec![-0.25, 2.0]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,0.5\n-0.25,2\n");
    }
}
