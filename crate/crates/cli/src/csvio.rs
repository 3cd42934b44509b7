//! Trajectory CSV: header `t,S,I,P`, LF endings, 17 significant digits.

use std::io::{Read, Write};
use std::path::Path;

use ecoepi_core::Trajectory;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 4] = ["t", "S", "I", "P"];

/// Scientific notation with 17 significant digits, which round-trips every f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn writer<W: Write>(inner: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(inner)
}

pub fn write_trajectory<W: Write>(traj: &Trajectory, inner: W) -> csv::Result<()> {
    let mut w = writer(inner);
    w.write_record(HEADER)?;
    for (t, x) in traj.times.iter().zip(traj.states()) {
        w.write_record([
            fmt_float(*t),
            fmt_float(x[0]),
            fmt_float(x[1]),
            fmt_float(x[2]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_trajectory(traj: &Trajectory, path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(CliError::io(path))?;
    write_trajectory(traj, std::io::BufWriter::new(file)).map_err(CliError::csv(path))
}

/// Reads a trajectory written by [`write_trajectory`]; `alpha` is not stored in the file.
pub fn read_trajectory<R: Read>(alpha: f64, inner: R) -> CliResult<Trajectory> {
    let mut r = csv::ReaderBuilder::new().from_reader(inner);
    let header = r.headers().map_err(CliError::csv("<input>"))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(CliError::Validation(format!(
            "expected header t,S,I,P, found {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(CliError::csv("<input>"))?;
        let values: Vec<f64> = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Validation(format!("row {}: `{field}` is not a number", line + 2))
                })
            })
            .collect::<CliResult<_>>()?;
        times.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    Ok(Trajectory::from_rows(alpha, times, &rows)?)
}

pub fn load_trajectory(alpha: f64, path: &Path) -> CliResult<Trajectory> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    read_trajectory(alpha, std::io::BufReader::new(file))
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ecoepi_core::{EcoEpiModel, Preset, SolverConfig, State};

    #[test]
    fn round_trip_is_bit_exact() {
        let model = EcoEpiModel::new(Preset::Example1.params()).unwrap();
        let traj = model
            .simulate(
                0.9,
                State::new(30.0, 5.0, 10.0),
                &SolverConfig::new(0.05, 20.0),
            )
            .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,S,I,P\n"));
        assert!(!text.contains('\r'));
        let back = read_trajectory(0.9, buf.as_slice()).unwrap();
        assert_eq!(back.times, traj.times);
        assert_eq!(back.raw_states(), traj.raw_states());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(22.272727272727273), "2.2272727272727273e1");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
        for v in [
            std::f64::consts::PI,
            -1e-300,
            123456789.123,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_trajectory(0.9, "a,b,c,d\n1,2,3,4\n".as_bytes()).is_err());
    }
}
