//! Long-format CSV rows shared by every experiment.

use std::io::Write;

use crate::channel::SystemConfig;
use crate::error::Result;
use crate::report::{HardwareCase, Method};

/// Column order of every CSV the driver writes. Cells that do not apply to
/// a row are empty.
pub const CSV_COLUMNS: [&str; 18] = [
    "experiment",
    "series",
    "method",
    "hw_case",
    "pilot",
    "user",
    "M",
    "K",
    "tau_c",
    "tau_p",
    "p_S",
    "p_R",
    "p_p",
    "P_T",
    "x",
    "metric",
    "value",
    "std_err",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: String,
    pub series: String,
    pub method: Option<Method>,
    pub hw_case: Option<HardwareCase>,
    pub pilot: Option<String>,
    /// Zero-based user index.
    pub user: Option<usize>,
    pub m: usize,
    pub k: usize,
    pub tau_c: usize,
    pub tau_p: usize,
    pub p_s: Option<f64>,
    pub p_r: Option<f64>,
    pub p_p: f64,
    pub p_t: Option<f64>,
    pub x: f64,
    pub metric: String,
    pub value: f64,
    pub std_err: Option<f64>,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Record {
    /// Row for `config` at sweep value `x`. `p_S` is filled when all users
    /// share one source power.
    pub fn new(experiment: &str, config: &SystemConfig, x: f64, metric: &str, value: f64) -> Self {
        let common = config.p_s.first().copied().filter(|&p| config.p_s.iter().all(|&q| q == p));
        Record {
            experiment: experiment.to_string(),
            series: String::new(),
            method: None,
            hw_case: None,
            pilot: None,
            user: None,
            m: config.m,
            k: config.k,
            tau_c: config.tau_c,
            tau_p: config.tau_p,
            p_s: common,
            p_r: Some(config.p_r),
            p_p: config.p_p,
            p_t: None,
            x,
            metric: metric.to_string(),
            value,
            std_err: None,
        }
    }

    pub fn series(mut self, s: &str) -> Self {
        self.series = s.to_string();
        self
    }

    pub fn method(mut self, m: Method) -> Self {
        self.method = Some(m);
        self
    }

    pub fn hw_case(mut self, c: HardwareCase) -> Self {
        self.hw_case = Some(c);
        self
    }

    pub fn pilot(mut self, p: &str) -> Self {
        self.pilot = Some(p.to_string());
        self
    }

    pub fn user(mut self, j: usize) -> Self {
        self.user = Some(j);
        self
    }

    pub fn std_err(mut self, se: f64) -> Self {
        self.std_err = Some(se);
        self
    }

    pub fn powers(mut self, p_s: Option<f64>, p_r: Option<f64>) -> Self {
        self.p_s = p_s;
        self.p_r = p_r;
        self
    }

    pub fn total_power(mut self, p_t: f64) -> Self {
        self.p_t = Some(p_t);
        self
    }

    pub fn to_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            self.experiment.clone(),
            self.series.clone(),
            self.method.map(|m| m.as_str().to_string()).unwrap_or_default(),
            self.hw_case.map(|c| c.as_str().to_string()).unwrap_or_default(),
            self.pilot.clone().unwrap_or_default(),
            self.user.map(|u| u.to_string()).unwrap_or_default(),
            self.m.to_string(),
            self.k.to_string(),
            self.tau_c.to_string(),
            self.tau_p.to_string(),
            opt(self.p_s),
            opt(self.p_r),
            num(self.p_p),
            opt(self.p_t),
            num(self.x),
            self.metric.clone(),
            num(self.value),
            opt(self.std_err),
        ]
    }
}

/// Writes the header and `records` in order.
pub fn write_records<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_empty_cells() {
        let cfg = SystemConfig::symmetric(8, 2, 1.0, 2.0, 3.0);
        let r = Record::new("rate-vs-m", &cfg, 8.0, "sum_rate", 1.5).method(Method::ClosedForm);
        let mut buf = Vec::new();
        write_records(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "rate-vs-m,,closed-form,,,,8,2,200,2,1.0,2.0,3.0,,8.0,sum_rate,1.5,"
        );
    }

    #[test]
    fn mixed_source_powers_leave_cell_empty() {
        let mut cfg = SystemConfig::symmetric(8, 2, 1.0, 2.0, 3.0);
        cfg.p_s = vec![1.0, 2.0];
        assert_eq!(Record::new("e", &cfg, 0.0, "m", 0.0).p_s, None);
    }
}
