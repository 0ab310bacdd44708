use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestMode {
    #[default]
    Paired,
    /// Welch's unequal-variance test on the two samples.
    Unpaired,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
    pub significant: bool,
}

impl TTest {
    fn from_t(t: f64, df: f64) -> Result<Self> {
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(format!("t distribution: {e}")))?;
        let p = (2.0 * dist.sf(t.abs())).min(1.0);
        Ok(TTest {
            t,
            p,
            df,
            significant: is_significant(p),
        })
    }
}

pub fn is_significant(p: f64) -> bool {
    p < ALPHA
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided paired t-test on `a - b`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired t-test needs at least 2 pairs"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let df = (d.len() - 1) as f64;
    if d.iter().all(|&x| x == 0.0) {
        return Ok(TTest {
            t: 0.0,
            p: 1.0,
            df,
            significant: false,
        });
    }
    let (mean, var) = mean_var(&d);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    TTest::from_t(mean / (var / d.len() as f64).sqrt(), df)
}

pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("unpaired t-test needs at least 2 values per sample"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    if sa + sb == 0.0 {
        if ma == mb {
            return Ok(TTest {
                t: 0.0,
                p: 1.0,
                df: na + nb - 2.0,
                significant: false,
            });
        }
        return Err(Error::ZeroVariance);
    }
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    TTest::from_t((ma - mb) / (sa + sb).sqrt(), df)
}

pub fn ttest(a: &[f64], b: &[f64], mode: TestMode) -> Result<TTest> {
    match mode {
        TestMode::Paired => paired_ttest(a, b),
        TestMode::Unpaired => welch_ttest(a, b),
    }
}
