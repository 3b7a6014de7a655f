//! Sample dumps: `sample_index,x0,..,x{d-1},bayes_label`.

use std::io::{self, Write};

use crate::metrics::clean_mixtures;
use crate::{bayes_label, DiffusionError, MixtureTarget, SamplePoint};

pub fn write_samples_csv<W: Write>(
    mut out: W,
    samples: &[SamplePoint],
    target: &MixtureTarget,
) -> Result<(), DiffusionError> {
    let clean = clean_mixtures(target)?;
    let io_err = |e: io::Error| DiffusionError::Io(e.to_string());
    let header: Vec<String> = std::iter::once("sample_index".to_string())
        .chain((0..target.dim()).map(|i| format!("x{i}")))
        .chain(std::iter::once("bayes_label".to_string()))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for (i, s) in samples.iter().enumerate() {
        let coords: Vec<String> = s.coords.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(
            out,
            "{i},{},{}",
            coords.join(","),
            bayes_label(&s.coords, &clean)
        )
        .map_err(io_err)?;
    }
    Ok(())
}
