//! Gnuplot scripts for the CSV files written by [`crate::scenario`].

use std::path::Path;

use thiserror::Error;

use crate::dynamics::Motion;
use crate::scenario::Mode;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

/// What the script needs to know about a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvLayout {
    pub mode: Mode,
    pub motion: Motion,
    pub columns: Vec<String>,
    pub rows: usize,
}

/// Reads the metadata and header of a scenario CSV and checks that the data
/// rows match the header. `mode_hint` (a mode name) overrides the `# mode`
/// line.
pub fn inspect_csv(text: &str, mode_hint: Option<&str>) -> Result<CsvLayout, String> {
    let mut meta_mode = None;
    let mut header: Option<Vec<String>> = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((k, v)) = meta.split_once('=') {
                if k.trim() == "mode" {
                    meta_mode = Some(v.trim().to_string());
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        match &header {
            None => header = Some(line.split(',').map(|c| c.trim().to_string()).collect()),
            Some(h) => {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != h.len() {
                    return Err(format!("line {}: expected {} fields, found {}", i + 1, h.len(), fields.len()));
                }
                if let Some(f) = fields.iter().find(|f| f.trim().parse::<f64>().is_err()) {
                    return Err(format!("line {}: '{}' is not a number", i + 1, f.trim()));
                }
                rows += 1;
            }
        }
    }
    let columns = header.ok_or("no header row")?;
    let name = mode_hint.map(str::to_string).or(meta_mode).ok_or("no '# mode' line and no mode given")?;
    let (mode, motion) = Mode::parse(&name).ok_or_else(|| format!("unknown mode '{name}'"))?;
    let expected = mode.columns(motion);
    if columns != expected {
        return Err(format!("header '{}' does not match mode {name} (expected '{}')", columns.join(","), expected.join(",")));
    }
    if rows == 0 {
        return Err("no data rows".into());
    }
    Ok(CsvLayout { mode, motion, columns, rows })
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Script text plotting the figure-style curve of one CSV file. The image is
/// written next to the data with a `.png` extension.
pub fn plot_script(csv_path: &Path, layout: &CsvLayout) -> String {
    let (y_col, y_label, y_range) = match layout.mode {
        Mode::SingleCoherence | Mode::SingleCoherenceExcited => ("zeta", "l1 coherence", Some("[0:1]")),
        Mode::ModeCorrelation => ("cross_corr", "cross-correlation C(t)", None),
        Mode::Concurrence => ("value", "concurrence", Some("[0:1]")),
        Mode::Tqc => ("value", "two-qubit coherence", Some("[0:*]")),
    };
    let x_col = &layout.columns[1];
    let x_label = match layout.motion {
        Motion::Vibrating => "{/Symbol h}{/Symbol k}t",
        Motion::Stationary => "gt",
    };
    let col = |name: &str| layout.columns.iter().position(|c| c == name).expect("validated header") + 1;
    let data = csv_path.to_string_lossy();
    let image = csv_path.with_extension("png");

    let mut s = String::new();
    s.push_str(&format!("# {} ({} rows)\n", data, layout.rows));
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set terminal pngcairo enhanced size 900,600\n");
    s.push_str(&format!("set output {}\n", quote(&image.to_string_lossy())));
    s.push_str(&format!("set title {}\n", quote(&layout.mode.full_name(layout.motion))));
    s.push_str(&format!("set xlabel {}\n", quote(x_label)));
    s.push_str(&format!("set ylabel {}\n", quote(y_label)));
    if let Some(r) = y_range {
        s.push_str(&format!("set yrange {r}\n"));
    }
    if layout.mode == Mode::ModeCorrelation {
        s.push_str("set xzeroaxis\n");
    }
    s.push_str("set key off\n");
    s.push_str("set grid\n");
    s.push_str(&format!(
        "plot {} using {}:{} title columnheader with lines lw 1.5 # {} vs {}\n",
        quote(&data),
        col(x_col),
        col(y_col),
        y_col,
        x_col
    ));
    s
}

/// Reads `csv_path`, validates it, and returns the script.
pub fn emit_plot_script(csv_path: &Path, mode_hint: Option<&str>) -> Result<String, PlotError> {
    let path = csv_path.display().to_string();
    let text = std::fs::read_to_string(csv_path).map_err(|source| PlotError::Io { path: path.clone(), source })?;
    let layout = inspect_csv(&text, mode_hint).map_err(|message| PlotError::Malformed { path, message })?;
    Ok(plot_script(csv_path, &layout))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModeParams;
    use crate::scenario::{run_scenario, Scenario};

    fn csv(mode: Mode, motion: Motion) -> String {
        let p = ModeParams::from_mean_excitations(0.02, 1.0, 1.0, 1.0).unwrap();
        let mut s = Scenario::new(mode, motion, p);
        s.n_steps = 5;
        run_scenario(&s).unwrap().to_csv_string()
    }

    #[test]
    fn coherence_script() {
        let layout = inspect_csv(&csv(Mode::SingleCoherence, Motion::Vibrating), None).unwrap();
        assert_eq!(layout.rows, 5);
        let script = plot_script(Path::new("out/zeta.csv"), &layout);
        assert!(script.contains("set yrange [0:1]\n"));
        assert!(script.contains("plot 'out/zeta.csv' using 2:3 "));
        assert!(script.contains("set output 'out/zeta.png'"));
    }

    #[test]
    fn correlation_plots_cross_corr() {
        let layout = inspect_csv(&csv(Mode::ModeCorrelation, Motion::Vibrating), None).unwrap();
        let script = plot_script(Path::new("c.csv"), &layout);
        assert!(script.contains("using 2:6 "));
        assert!(script.contains("cross_corr vs eta_kappa_t"));
        assert!(!script.contains("yrange"));
    }

    #[test]
    fn concurrence_and_stationary() {
        let layout = inspect_csv(&csv(Mode::Concurrence, Motion::Stationary), None).unwrap();
        assert_eq!(layout.motion, Motion::Stationary);
        let script = plot_script(Path::new("c.csv"), &layout);
        assert!(script.contains("set yrange [0:1]"));
        assert!(script.contains("set xlabel 'gt'"));
    }

    #[test]
    fn malformed_inputs() {
        assert!(inspect_csv("", None).is_err());
        assert!(inspect_csv("# mode = tqc\n", None).unwrap_err().contains("header"));
        assert!(inspect_csv("t,eta_kappa_t,value\n0,0,1\n", None).unwrap_err().contains("mode"));
        assert!(inspect_csv("t,eta_kappa_t,value\n0,0,1\n", Some("tqc")).is_ok());
        assert!(inspect_csv("# mode = tqc\nt,eta_kappa_t,zeta\n0,0,1\n", None).unwrap_err().contains("does not match"));
        assert!(inspect_csv("# mode = tqc\nt,eta_kappa_t,value\n0,0\n", None).unwrap_err().contains("fields"));
        assert!(inspect_csv("# mode = tqc\nt,eta_kappa_t,value\n0,0,x\n", None).unwrap_err().contains("not a number"));
        assert!(inspect_csv("# mode = tqc\nt,eta_kappa_t,value\n", None).unwrap_err().contains("no data"));
        assert!(matches!(emit_plot_script(Path::new("/nonexistent/x.csv"), None), Err(PlotError::Io { .. })));
    }

    #[test]
    fn quotes_are_escaped() {
        assert_eq!(quote("it's"), "'it''s'");
    }
}
