//! Plain CSV emission: header row, comma separated, LF line endings, numbers
//! with 17 significant digits.

use std::fmt::Write as _;

use qtm_core::{ModelParams, SweepRecord, Temperature};

pub const RECORD_COLUMNS: &[&str] = &[
    "model",
    "energy",
    "g",
    "coupling_c",
    "coupling_h",
    "t_c",
    "t_h",
    "u",
    "concurrence",
    "purity",
    "q_c",
    "q_h",
    "residual",
    "uniqueness_gap",
];

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn temp(t: Temperature) -> String {
    match t {
        Temperature::Infinite => "inf".into(),
        Temperature::Finite(v) => num(v),
    }
}

pub fn param_fields(p: &ModelParams) -> Vec<String> {
    let [g, c, h] = p.couplings();
    let (t_c, t_h) = p.temperatures();
    vec![
        p.kind().as_str().into(),
        num(p.energy()),
        num(g),
        num(c),
        num(h),
        temp(t_c),
        temp(t_h),
        num(p.coulomb().unwrap_or(f64::NAN)),
    ]
}

pub fn record_fields(r: &SweepRecord) -> Vec<String> {
    let mut f = param_fields(&r.params);
    f.extend([r.concurrence, r.purity, r.q_c, r.q_h, r.residual, r.uniqueness_gap].map(num));
    f
}

#[derive(Debug, Default)]
pub struct Table {
    out: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Table { out: String::new() };
        t.row(header.iter().map(|s| s.to_string()));
        t
    }

    pub fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        for (i, f) in fields.into_iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            let _ = write!(self.out, "{f}");
        }
        self.out.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.out
    }
}
