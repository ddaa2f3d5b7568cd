//! Readout spectra for plotting.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::model::{dominant_mass, prob, FactoringParams};
use crate::numtheory::OrderOracle;
use crate::sampler::{BinTable, SamplerConfig};

/// Above this many readouts only dominant readouts and their rings are
/// listed.
pub const FULL_DUMP_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub c: u128,
    pub prob: f64,
    /// Running mass in ascending `c`; only present for truncated spectra.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub n: u64,
    pub qubits: u32,
    pub y: u64,
    pub order: u64,
    pub dominant_mass: f64,
    pub truncated: bool,
    /// Rings listed around each dominant readout (truncated spectra only).
    pub rings: u128,
    pub covered_mass: f64,
    #[serde(skip)]
    pub rows: Vec<SpectrumRow>,
}

/// Probabilities of every readout with nonzero mass (`q <= 2^20`), or of the
/// dominant readouts plus `rings` neighbors on each side.
pub fn spectrum(n: u64, qubits: u32, y: u64, rings: u128) -> Result<Spectrum> {
    let params = FactoringParams::new(n, Some(qubits))?;
    let order = OrderOracle::new(n).order(y)?;
    let q = params.q();
    let mut out = Spectrum {
        n,
        qubits,
        y,
        order,
        dominant_mass: dominant_mass(order, q),
        truncated: q > FULL_DUMP_LIMIT,
        rings: 0,
        covered_mass: 0.0,
        rows: Vec::new(),
    };
    if !out.truncated {
        out.rows = (0..q)
            .map(|c| SpectrumRow {
                c,
                prob: prob(c, order, q),
                coverage: None,
            })
            .filter(|row| row.prob > 0.0)
            .collect();
        out.covered_mass = out.rows.iter().map(|r| r.prob).sum();
        return Ok(out);
    }

    let config = SamplerConfig {
        tail_threshold: 0.0,
        materialized_rings: u128::MAX,
    };
    let mut table = BinTable::with_config(y, order, q, config);
    table.extend_to(rings);
    out.rings = table.ring_radius();
    let mut rows: Vec<SpectrumRow> = table
        .bins()
        .map(|b| SpectrumRow {
            c: b.readout,
            prob: prob(b.readout, order, q),
            coverage: None,
        })
        .collect();
    rows.sort_by_key(|r| r.c);
    let mut running = 0.0;
    for row in &mut rows {
        running += row.prob;
        row.coverage = Some(running);
    }
    out.covered_mass = running;
    out.rows = rows;
    Ok(out)
}

fn fmt_prob(p: f64) -> String {
    if p == 0.0 || p >= 1e-4 {
        format!("{p}")
    } else {
        format!("{p:e}")
    }
}

impl Spectrum {
    /// `# N=..,L=..,y=..,r=..,dominant_mass=..` header, then `c,prob` rows
    /// (`c,prob,coverage` when truncated).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write!(
            out,
            "# N={},L={},y={},r={},dominant_mass={}",
            self.n, self.qubits, self.y, self.order, self.dominant_mass
        )?;
        if self.truncated {
            writeln!(
                out,
                ",rings={},covered_mass={}",
                self.rings, self.covered_mass
            )?;
            writeln!(out, "c,prob,coverage")?;
        } else {
            writeln!(out)?;
            writeln!(out, "c,prob")?;
        }
        for row in &self.rows {
            match row.coverage {
                Some(cov) => writeln!(out, "{},{},{}", row.c, fmt_prob(row.prob), cov)?,
                None => writeln!(out, "{},{}", row.c, fmt_prob(row.prob))?,
            }
        }
        Ok(())
    }

    /// Header object on the first line, one row object per line after it.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> Result<()> {
        serde_json::to_writer(&mut *out, self)?;
        writeln!(out)?;
        for row in &self.rows {
            serde_json::to_writer(&mut *out, row)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::numtheory::OrderError;

    #[test]
    fn order_dividing_q_gives_sixteen_spikes() {
        let s = spectrum(187, 16, 56, 0).unwrap();
        assert_eq!(s.order, 16);
        assert!(!s.truncated);
        assert_eq!(s.rows.len(), 16);
        assert!(s.rows.iter().all(|r| r.prob == 1.0 / 16.0));
        assert_eq!(s.covered_mass, 1.0);
    }

    #[test]
    fn header_carries_dominant_mass() {
        let s = spectrum(187, 16, 36, 0).unwrap();
        assert_eq!(s.order, 40);
        assert!((s.dominant_mass - 0.7792).abs() < 1e-4);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("# N=187,L=16,y=36,r=40,dominant_mass=0.7791"));
        assert_eq!(text.lines().nth(1), Some("c,prob"));
    }

    #[test]
    fn order_one_is_a_single_row() {
        let s = spectrum(187, 16, 1, 0).unwrap();
        assert_eq!(
            s.rows,
            vec![SpectrumRow {
                c: 0,
                prob: 1.0,
                coverage: None
            }]
        );
    }

    #[test]
    fn non_coprime_y_rejected() {
        let err = spectrum(187, 16, 22, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::Order(OrderError::NotCoprime { gcd: 11, .. })
        ));
        assert!(err.to_string().contains("gcd = 11"));
    }

    #[test]
    fn large_registers_are_truncated_with_coverage() {
        let s = spectrum(1328881, 41, 205920, 3).unwrap();
        assert!(s.truncated);
        assert_eq!(s.rings, 3);
        assert!(s.rows.len() <= 1038 * 7);
        assert!(s.rows.windows(2).all(|w| w[0].c < w[1].c));
        let last = s.rows.last().unwrap().coverage.unwrap();
        assert_eq!(last, s.covered_mass);
        assert!(s.covered_mass > s.dominant_mass && s.covered_mass < 1.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text
            .lines()
            .next()
            .unwrap()
            .contains(",rings=3,covered_mass="));
        assert_eq!(text.lines().nth(1), Some("c,prob,coverage"));
    }
}
