//! Machine-readable spectrum reports: JSON (round-trips byte for byte) and
//! CSV with one state per row.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bethe::{complex_pairs, BetheState};
use crate::error::{Error, Result};
use crate::model::SectorLabels;
use crate::rational::Rational;
use crate::verify::VerifyReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub sectors: Vec<SectorReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub labels: SectorLabels,
    pub states: Vec<StateReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub index: usize,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(with = "complex_pairs")]
    pub roots: Vec<Complex64>,
    /// Scaled Bethe-equation residual; `null` when undefined (coincident roots).
    pub residual: Option<f64>,
    pub verified: bool,
    pub degenerate: bool,
}

impl From<&BetheState> for StateReport {
    fn from(s: &BetheState) -> Self {
        StateReport {
            index: s.index,
            energy: s.energy,
            roots: s.roots.clone(),
            residual: s.bae_residual.is_finite().then_some(s.bae_residual),
            verified: s.verified,
            degenerate: s.degenerate_roots,
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    j: String,
    p: u32,
    lambda: u32,
    kappa: String,
    q: String,
    l: String,
    #[serde(rename = "N")]
    n_max: usize,
    dim: usize,
    index: usize,
    #[serde(rename = "E")]
    energy: f64,
    roots: &'a str,
    residual: Option<f64>,
    verified: bool,
    degenerate: bool,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn format_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

impl SpectrumReport {
    pub fn from_solved(solved: Vec<(SectorLabels, Vec<BetheState>)>) -> Self {
        let sectors = solved
            .into_iter()
            .map(|(labels, states)| SectorReport {
                labels,
                states: states.iter().map(StateReport::from).collect(),
            })
            .collect();
        SpectrumReport { sectors }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Sector labels are repeated on every row; roots are `;`-separated.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Output(e.to_string());
        for sector in &self.sectors {
            let lab = &sector.labels;
            for st in &sector.states {
                let roots = st.roots.iter().map(format_complex).collect::<Vec<_>>().join(";");
                w.serialize(CsvRow {
                    j: lab.j.to_string(),
                    p: lab.p,
                    lambda: lab.lambda,
                    kappa: lab.kappa.to_string(),
                    q: join(&lab.q),
                    l: join(&lab.l),
                    n_max: lab.n_max(),
                    dim: lab.dim,
                    index: st.index,
                    energy: st.energy,
                    roots: &roots,
                    residual: st.residual,
                    verified: st.verified,
                    degenerate: st.degenerate,
                })
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| Error::Output(e.to_string()))
    }
}

/// One line of a sector listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRow {
    pub j: Rational,
    pub p: u32,
    pub lambda: u32,
    pub kappa: Rational,
    pub q: Vec<Rational>,
    pub l: Vec<Rational>,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub dim: usize,
}

impl From<&SectorLabels> for SectorRow {
    fn from(s: &SectorLabels) -> Self {
        SectorRow {
            j: s.j,
            p: s.p,
            lambda: s.lambda,
            kappa: s.kappa,
            q: s.q.clone(),
            l: s.l.clone(),
            n_max: s.n_max(),
            dim: s.dim,
        }
    }
}

pub fn sectors_json(sectors: &[SectorLabels]) -> String {
    let rows: Vec<SectorRow> = sectors.iter().map(SectorRow::from).collect();
    serde_json::to_string_pretty(&rows).expect("sector rows serialize")
}

pub fn write_sectors_csv<W: Write>(sectors: &[SectorLabels], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["j", "p", "lambda", "kappa", "q", "l", "N", "dim"])
        .map_err(|e| Error::Output(e.to_string()))?;
    for s in sectors {
        w.write_record([
            s.j.to_string(),
            s.p.to_string(),
            s.lambda.to_string(),
            s.kappa.to_string(),
            join(&s.q),
            join(&s.l),
            s.n_max().to_string(),
            s.dim.to_string(),
        ])
        .map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}

/// One row per criterion, then one per erratum.
pub fn write_verify_csv<W: Write>(report: &VerifyReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(["kind", "name", "passed", "metric", "threshold", "detail"]).map_err(err)?;
    for c in &report.criteria {
        w.write_record([
            "criterion",
            &c.name,
            &c.passed.to_string(),
            &c.metric.to_string(),
            &c.threshold.to_string(),
            &c.detail,
        ])
        .map_err(err)?;
    }
    for e in &report.errata {
        let detail = format!("printed {:e}, corrected {:e}", e.printed_metric, e.corrected_metric);
        w.write_record(["erratum", &e.id, &e.confirmed().to_string(), "", "", &detail])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}
