use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use momentmap::measure::DensityEstimate;
use serde::Serialize;

use crate::CliError;

/// Writes the plot table: header then one row per bin (center coordinates,
/// density, stderr, count). Floats use the shortest round-trip form.
pub fn write_plot_rows<W, I>(w: &mut W, dim: usize, rows: I) -> io::Result<()>
where
    W: Write + ?Sized,
    I: IntoIterator<Item = (Vec<f64>, f64, f64, u64)>,
{
    let mut header: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    header.extend(["density", "stderr", "count"].map(String::from));
    writeln!(w, "# columns: {}", header.join(","))?;
    for (center, density, stderr, count) in rows {
        for x in &center {
            write!(w, "{x},")?;
        }
        writeln!(w, "{density},{stderr},{count}")?;
    }
    Ok(())
}

pub fn plot_rows(est: &DensityEstimate) -> impl Iterator<Item = (Vec<f64>, f64, f64, u64)> + '_ {
    let g = est.grid();
    (0..g.total_bins()).map(move |b| (g.bin_center(b), est.density()[b], est.stderr()[b], est.counts()[b]))
}

pub fn write_plot_data<W: Write + ?Sized>(w: &mut W, est: &DensityEstimate) -> io::Result<()> {
    write_plot_rows(w, est.grid().dim(), plot_rows(est))
}

/// Writes the estimate as CSV at `path`.
pub fn emit_plot_data(est: &DensityEstimate, path: &Path) -> Result<(), CliError> {
    if est.density().iter().chain(est.stderr()).any(|x| !x.is_finite()) {
        return Err(CliError::config("estimate", "density estimate has non-finite entries"));
    }
    write_file(path, |w| write_plot_data(w, est))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_file<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_without_rows() {
        let mut buf = Vec::new();
        write_plot_rows(&mut buf, 2, std::iter::empty()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# columns: x1,x2,density,stderr,count\n");
    }

    #[test]
    fn floats_round_trip() {
        let x = 0.1 + 0.2;
        let mut buf = Vec::new();
        write_plot_rows(&mut buf, 1, [(vec![x], 1.0 / 3.0, 1e-300, 7)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), x);
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(row[2].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(row[3], "7");
        assert!(!text.contains('\r'));
    }
}
