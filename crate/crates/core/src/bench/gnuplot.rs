//! Gnuplot scripts for the CSV artifacts.

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Plots the named columns of a trace CSV against time.
pub fn trace_script(csv: &str, columns: &[String], image: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 1200,700\n");
    s.push_str(&format!("set output {}\n", quote(image)));
    s.push_str("set key outside right\nset grid\nset xlabel 'time (s)'\n");
    let plots: Vec<String> = columns
        .iter()
        .map(|c| {
            format!(
                "{} using 'time':{} with lines title {}",
                quote(csv),
                quote(c),
                quote(c)
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

/// Log-log error against period, one line per policy.
pub fn convergence_script(csv: &str, policies: &[String], image: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,700\n");
    s.push_str(&format!("set output {}\n", quote(image)));
    s.push_str("set logscale xy\nset grid\nset key left top\n");
    s.push_str("set xlabel 'communication period H'\nset ylabel 'max state error'\n");
    let plots: Vec<String> = policies
        .iter()
        .map(|p| {
            format!(
                "{} using (strcol(1) eq {} ? $3 : NaN):4 with linespoints title {}",
                quote(csv),
                quote(p),
                quote(p)
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
