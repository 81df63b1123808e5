//! Check reports: one JSON object per identity or test, grouped into suites.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Outcome of one check. Rows are aligned on `grid`; a row passes when
/// `|lhs - rhs| ≤ 3·se + allowance`, plus a 1e-12 relative rounding slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckReport {
    pub check: String,
    pub params: BTreeMap<String, Value>,
    #[serde(with = "floats")]
    pub grid: Vec<f64>,
    #[serde(with = "floats")]
    pub lhs: Vec<f64>,
    #[serde(with = "floats")]
    pub se: Vec<f64>,
    #[serde(with = "floats")]
    pub rhs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "floats")]
    pub allowance: Vec<f64>,
    /// p-value for hypothesis-test checks; these are Holm-adjusted across the suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>) -> Self {
        CheckReport {
            check: check.into(),
            params: BTreeMap::new(),
            grid: Vec::new(),
            lhs: Vec::new(),
            se: Vec::new(),
            rhs: Vec::new(),
            allowance: Vec::new(),
            p_value: None,
            pass: true,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Adds a row judged at `3·se + allowance`.
    pub fn row(&mut self, x: f64, lhs: f64, se: f64, rhs: f64, allowance: f64) {
        let slack = 1e-12 * lhs.abs().max(rhs.abs());
        let ok = (lhs - rhs).abs() <= 3.0 * se + allowance + slack;
        self.grid.push(x);
        self.lhs.push(lhs);
        self.se.push(se);
        self.rhs.push(rhs);
        self.allowance.push(allowance);
        self.pass &= ok;
    }

    /// Adds a row with an externally decided verdict.
    pub fn row_with(&mut self, x: f64, lhs: f64, se: f64, rhs: f64, ok: bool) {
        self.grid.push(x);
        self.lhs.push(lhs);
        self.se.push(se);
        self.rhs.push(rhs);
        if !self.allowance.is_empty() {
            self.allowance.push(0.0);
        }
        self.pass &= ok;
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.pass = false;
            self.notes.push(msg.into());
        }
    }

    /// Records a hypothesis test with null-rejection level `level`; `lhs` is
    /// the p-value, `rhs` the level.
    pub fn with_p_value(mut self, statistic: f64, p: f64, level: f64) -> Self {
        self.grid.push(statistic);
        self.lhs.push(p);
        self.se.push(0.0);
        self.rhs.push(level);
        self.p_value = Some(p);
        self.pass &= p > level;
        self
    }
}

/// JSON has no infinities: non-finite entries are written as the strings
/// `"inf"`, `"-inf"` and `"nan"`.
mod floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
        Null(()),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let r: Vec<Repr> = v
            .iter()
            .map(|&x| if x.is_finite() { Repr::Num(x) } else { Repr::Text(super::csv_f64(x)) })
            .collect();
        r.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Num(x) => Ok(x),
                Repr::Null(()) => Ok(f64::NAN),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    _ => Err(serde::de::Error::custom(format!("bad float '{t}'"))),
                },
            })
            .collect()
    }
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p[i].total_cmp(&p[j]).then(i.cmp(&j)));
    let mut adj = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        let v = ((m - rank) as f64 * p[i]).min(1.0);
        running = running.max(v);
        adj[i] = running;
    }
    adj
}

/// A named collection of checks with a suite-level verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    #[serde(default)]
    pub config: Value,
    pub checks: Vec<CheckReport>,
    /// Number of p-value tests entering the Holm correction.
    pub holm_m: usize,
    pub level: f64,
    pub pass: bool,
}

impl SuiteReport {
    /// Checks carrying a p-value are judged on their Holm-adjusted value at
    /// `level`; the rest keep their own verdict.
    pub fn assemble(suite: &str, seed: u64, config: Value, mut checks: Vec<CheckReport>, level: f64) -> Self {
        let idx: Vec<usize> = (0..checks.len()).filter(|&i| checks[i].p_value.is_some()).collect();
        let raw: Vec<f64> = idx.iter().map(|&i| checks[i].p_value.unwrap_or(1.0)).collect();
        let adj = holm_adjust(&raw);
        for (&i, &a) in idx.iter().zip(&adj) {
            let c = &mut checks[i];
            c.pass = a > level && c.notes.iter().all(|n| !n.starts_with("FAIL"));
            c.params.insert("holm_p".into(), Value::from(a));
        }
        let pass = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.to_string(), seed, config, holm_m: idx.len(), level, checks, pass }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row per grid point: `suite,check,x,lhs,se,rhs,allowance,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check,x,lhs,se,rhs,allowance,pass\n");
        for c in &self.checks {
            for i in 0..c.grid.len() {
                let allow = c.allowance.get(i).copied().unwrap_or(0.0);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    self.suite,
                    c.check,
                    csv_f64(c.grid[i]),
                    csv_f64(c.lhs[i]),
                    csv_f64(c.se[i]),
                    csv_f64(c.rhs[i]),
                    csv_f64(allow),
                    c.pass
                );
            }
        }
        out
    }
}

/// 17 significant digits, '.' decimal, no locale.
pub fn csv_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holm_matches_hand_values() {
        let adj = holm_adjust(&[0.01, 0.04, 0.03, 0.005]);
        let expect = [0.03, 0.06, 0.06, 0.02];
        for (a, e) in adj.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15, "{adj:?}");
        }
        assert_eq!(holm_adjust(&[0.9, 0.8]), vec![1.0, 1.0]);
    }

    #[test]
    fn rows_judged_at_three_se() {
        let mut r = CheckReport::new("x");
        r.row(1.0, 1.0, 0.1, 1.29, 0.0);
        assert!(r.pass);
        r.row(2.0, 1.0, 0.1, 1.31, 0.0);
        assert!(!r.pass);
        let mut r = CheckReport::new("y");
        r.row(1.0, 1.0, 0.1, 1.35, 0.06);
        assert!(r.pass);
    }

    #[test]
    fn suite_uses_holm_and_roundtrips() {
        let a = CheckReport::new("a").with_p_value(0.1, 0.004, 0.01);
        let b = CheckReport::new("b").with_p_value(0.1, 0.5, 0.01);
        let s = SuiteReport::assemble("s", 1, Value::Null, vec![a, b], 0.01);
        assert!(!s.pass);
        assert_eq!(s.holm_m, 2);
        let back: SuiteReport = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(s.to_csv().starts_with("suite,check,x,lhs,se,rhs,allowance,pass\n"));
    }

    #[test]
    fn non_finite_values_roundtrip() {
        let mut r = CheckReport::new("x");
        r.row_with(1.0, f64::INFINITY, 0.0, f64::NEG_INFINITY, true);
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.contains(r#""lhs":["inf"]"#), "{js}");
        let back: CheckReport = serde_json::from_str(&js).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_floats_have_17_digits() {
        assert_eq!(csv_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_f64(f64::NAN), "nan");
    }
}
