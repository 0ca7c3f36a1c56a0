//! The trace table emitted by the CLI: one row per step, exact rationals
//! serialized as `p/q`, optional bound and timeout columns present only
//! when a subcommand computes them.
//!
//! CSV layout: header row, comma separators, UTF-8, LF line endings.
//! Base columns `step,sample,srtt,rttvar,rto`; then `L,H,rttvar_upper`
//! when bounds were computed, then `timeout`, then decimal-approximation
//! columns when requested.

use std::io;

use crate::exactnum::Rational;
use crate::rtocalc::RtoState;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub sample: Rational,
    pub srtt: Rational,
    pub rttvar: Rational,
    pub rto: Rational,
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
    pub rttvar_upper: Option<Rational>,
    pub timeout: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    /// Plain trace: zips samples with their states, no optional columns.
    pub fn from_run(samples: &[Rational], states: &[RtoState]) -> Trace {
        debug_assert_eq!(samples.len(), states.len());
        let rows = samples
            .iter()
            .zip(states)
            .map(|(sample, st)| TraceRow {
                step: st.step,
                sample: sample.clone(),
                srtt: st.srtt.clone(),
                rttvar: st.rttvar.clone(),
                rto: st.rto.clone(),
                lower: None,
                upper: None,
                rttvar_upper: None,
                timeout: None,
            })
            .collect();
        Trace { rows }
    }

    fn has_bounds(&self) -> bool {
        self.rows.first().is_some_and(|r| r.lower.is_some())
    }

    fn has_timeout(&self) -> bool {
        self.rows.first().is_some_and(|r| r.timeout.is_some())
    }

    pub fn header(&self, decimals: Option<u32>) -> Vec<String> {
        let mut cols: Vec<String> = ["step", "sample", "srtt", "rttvar", "rto"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if self.has_bounds() {
            cols.extend(["L".into(), "H".into(), "rttvar_upper".into()]);
        }
        if self.has_timeout() {
            cols.push("timeout".into());
        }
        if decimals.is_some() {
            cols.extend(["srtt_dec".into(), "rttvar_dec".into(), "rto_dec".into()]);
        }
        cols
    }

    pub fn write_csv<W: io::Write>(&self, writer: W, decimals: Option<u32>) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let to_err = |e: csv::Error| Error::InvalidParams(format!("csv write failed: {e}"));
        w.write_record(self.header(decimals)).map_err(to_err)?;
        for row in &self.rows {
            let mut rec = vec![
                row.step.to_string(),
                row.sample.to_string(),
                row.srtt.to_string(),
                row.rttvar.to_string(),
                row.rto.to_string(),
            ];
            if self.has_bounds() {
                rec.push(render_opt(&row.lower));
                rec.push(render_opt(&row.upper));
                rec.push(render_opt(&row.rttvar_upper));
            }
            if self.has_timeout() {
                rec.push(row.timeout.unwrap_or(false).to_string());
            }
            if let Some(k) = decimals {
                rec.push(row.srtt.to_decimal_string(k));
                rec.push(row.rttvar.to_decimal_string(k));
                rec.push(row.rto.to_decimal_string(k));
            }
            w.write_record(&rec).map_err(to_err)?;
        }
        w.flush()
            .map_err(|e| Error::InvalidParams(format!("csv flush failed: {e}")))?;
        Ok(())
    }

    /// Parses a trace back from CSV, recognizing the optional columns by
    /// their header names. Decimal-approximation columns are ignored.
    pub fn read_csv<R: io::Read>(reader: R) -> Result<Trace> {
        let mut r = csv::Reader::from_reader(reader);
        let to_err = |e: csv::Error| Error::InvalidParams(format!("csv read failed: {e}"));
        let headers = r.headers().map_err(to_err)?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (step_c, sample_c, srtt_c, rttvar_c, rto_c) = match (
            col("step"),
            col("sample"),
            col("srtt"),
            col("rttvar"),
            col("rto"),
        ) {
            (Some(a), Some(b), Some(c), Some(d), Some(e)) => (a, b, c, d, e),
            _ => return Err(Error::InvalidParams("missing trace columns".into())),
        };
        let lower_c = col("L");
        let upper_c = col("H");
        let rv_upper_c = col("rttvar_upper");
        let timeout_c = col("timeout");

        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(to_err)?;
            let field = |i: usize| -> Result<&str> {
                record
                    .get(i)
                    .ok_or_else(|| Error::InvalidParams("short csv record".into()))
            };
            let rational = |i: usize| -> Result<Rational> { field(i)?.parse() };
            let opt_rational = |c: Option<usize>| -> Result<Option<Rational>> {
                match c {
                    Some(i) => {
                        let s = field(i)?;
                        if s.is_empty() {
                            Ok(None)
                        } else {
                            Ok(Some(s.parse()?))
                        }
                    }
                    None => Ok(None),
                }
            };
            let step_text = field(step_c)?;
            rows.push(TraceRow {
                step: step_text
                    .parse()
                    .map_err(|_| Error::ParseRational(step_text.to_string()))?,
                sample: rational(sample_c)?,
                srtt: rational(srtt_c)?,
                rttvar: rational(rttvar_c)?,
                rto: rational(rto_c)?,
                lower: opt_rational(lower_c)?,
                upper: opt_rational(upper_c)?,
                rttvar_upper: opt_rational(rv_upper_c)?,
                timeout: match timeout_c {
                    Some(i) => Some(field(i)? == "true"),
                    None => None,
                },
            });
        }
        Ok(Trace { rows })
    }
}

fn render_opt(v: &Option<Rational>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}
