//! Filters, their dilations, and filtered quadratic variations.
//!
//! A coefficient vector `a = (a_0, …, a_k)` has order `L` when
//! `Σ a_i i^l = 0` for `0 ≤ l < L` and `Σ a_i i^L ≠ 0`. The order is always
//! computed from the coefficients, never declared.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::path::Path;

/// Moments below this fraction of their absolute scale count as zero.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Filter {
    coeffs: Vec<f64>,
    order: usize,
    name: Option<String>,
}

impl Filter {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `k`, one less than the number of taps.
    pub fn span(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ_i Σ_j a_i a_j |i-j|^{2H}`. Negative for every valid filter and `H ∈ (0, 1)`.
    pub fn double_sum(&self, hurst: f64) -> f64 {
        let a = &self.coeffs;
        let mut total = 0.0;
        for (i, ai) in a.iter().enumerate() {
            for (j, aj) in a.iter().enumerate() {
                if i != j {
                    total += ai * aj * (i.abs_diff(j) as f64).powf(2.0 * hurst);
                }
            }
        }
        total
    }

    /// Parse `binomial:k`, `daub2`, or a comma-separated coefficient list.
    pub fn parse(s: &str) -> Result<Filter> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("binomial:") {
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad binomial filter order `{k}`")))?;
            if k == 0 {
                return Err(Error::InvalidParameter("binomial filter order must be >= 1".into()));
            }
            return Ok(binomial_filter(k));
        }
        if s == "daub2" {
            return Ok(daubechies2_filter());
        }
        let coeffs = s
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidParameter(format!("bad filter coefficient `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        validate_filter(&coeffs)
    }
}

impl FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Filter::parse(s)
    }
}

/// Named filters print their name, others their coefficient list; both
/// forms parse back.
impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            return f.write_str(name);
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl Serialize for Filter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Filter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Filter::parse(&s).map_err(de::Error::custom)
    }
}

/// Compute the order of `coeffs` and wrap them as a [`Filter`].
///
/// Moments are taken about the midpoint of the support. Vanishing of the
/// first `L` moments does not depend on the origin, and centering keeps the
/// powers small enough that long filters (e.g. 27 binomial taps) stay
/// resolvable in double precision.
pub fn validate_filter(coeffs: &[f64]) -> Result<Filter> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a filter needs at least 2 coefficients, got {}",
            coeffs.len()
        )));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("filter coefficients must be finite".into()));
    }
    let center = (coeffs.len() - 1) as f64 / 2.0;
    for l in 0..coeffs.len() {
        let (moment, scale) = centered_moment(coeffs, center, l as i32);
        let vanishes = moment.abs() <= MOMENT_TOLERANCE * scale;
        if l == 0 && !vanishes {
            return Err(Error::NotAFilter { zeroth_moment: moment });
        }
        if !vanishes {
            return Ok(Filter {
                coeffs: coeffs.to_vec(),
                order: l,
                name: None,
            });
        }
    }
    Err(Error::NotAFilter { zeroth_moment: 0.0 })
}

fn centered_moment(coeffs: &[f64], center: f64, l: i32) -> (f64, f64) {
    let mut moment = 0.0;
    let mut scale = 0.0;
    for (i, a) in coeffs.iter().enumerate() {
        let x = i as f64 - center;
        // 0^0 = 1
        let p = if l == 0 { 1.0 } else { x.powi(l) };
        moment += a * p;
        scale += (a * p).abs();
    }
    (moment, scale)
}

/// `a_j = (-1)^{j+1} C(k, j)` for `j = 0..=k`: order `k`, length `k+1`.
pub fn binomial_filter(k: usize) -> Filter {
    assert!(k >= 1, "binomial filter needs k >= 1");
    let mut c: u128 = 1;
    let mut coeffs = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            c = c * (k - j + 1) as u128 / j as u128;
        }
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        coeffs.push(sign * c as f64);
    }
    Filter {
        coeffs,
        order: k,
        name: Some(format!("binomial:{k}")),
    }
}

/// Four-tap Daubechies filter of order 2, scaled by `1/√2`.
pub fn daubechies2_filter() -> Filter {
    const TAPS: [f64; 4] = [
        0.482_962_913_144_534_1,
        -0.836_516_303_737_807_7,
        0.224_143_868_042_013_4,
        0.129_409_522_551_260_3,
    ];
    let coeffs = TAPS.iter().map(|c| c / std::f64::consts::SQRT_2).collect();
    Filter {
        coeffs,
        order: 2,
        name: Some("daub2".into()),
    }
}

/// `(a_0, 0, a_1, 0, …, a_k)`: same order, length `2k+1`.
pub fn dilate(filter: &Filter) -> Filter {
    let mut coeffs = Vec::with_capacity(2 * filter.coeffs.len() - 1);
    for (i, &a) in filter.coeffs.iter().enumerate() {
        if i > 0 {
            coeffs.push(0.0);
        }
        coeffs.push(a);
    }
    validate_filter(&coeffs).expect("dilation of a filter is a filter")
}

/// `V_{n,a} = (1/n) Σ_i (Σ_j a_j X_{i+j})²` over every full window of the path.
pub fn quadratic_variation(path: &Path, filter: &Filter) -> Result<f64> {
    quadratic_variation_of(path.values(), filter)
}

pub(crate) fn quadratic_variation_of(xs: &[f64], filter: &Filter) -> Result<f64> {
    let taps = filter.coeffs.len();
    let n = xs.len();
    if n < taps {
        return Err(Error::PathTooShort { needed: taps, got: n });
    }
    let total: f64 = xs
        .windows(taps)
        .map(|w| {
            let v: f64 = w.iter().zip(&filter.coeffs).map(|(x, a)| a * x).sum();
            v * v
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_examples() {
        assert_eq!(validate_filter(&[-1.0, 1.0]).unwrap().order(), 1);
        assert_eq!(validate_filter(&[-1.0, 2.0, -1.0]).unwrap().order(), 2);
        assert!(matches!(validate_filter(&[1.0, 1.0]), Err(Error::NotAFilter { .. })));
        assert!(validate_filter(&[1.0]).is_err());
        assert!(matches!(validate_filter(&[0.0, 0.0, 0.0]), Err(Error::NotAFilter { .. })));
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_filter(1).coeffs(), &[-1.0, 1.0]);
        assert_eq!(binomial_filter(2).coeffs(), &[-1.0, 2.0, -1.0]);
        assert_eq!(binomial_filter(3).coeffs(), &[-1.0, 3.0, -3.0, 1.0]);
        let a26 = binomial_filter(26);
        assert_eq!(a26.coeffs().len(), 27);
        assert_eq!(validate_filter(a26.coeffs()).unwrap().order(), 26);
        for k in 1..=30 {
            assert_eq!(validate_filter(binomial_filter(k).coeffs()).unwrap().order(), k);
        }
    }

    #[test]
    fn daubechies_taps() {
        let d = daubechies2_filter();
        assert_eq!(d.coeffs()[0], 0.482_962_913_144_534_1 / 2f64.sqrt());
        let sum: f64 = d.coeffs().iter().sum();
        let first: f64 = d.coeffs().iter().enumerate().map(|(i, a)| i as f64 * a).sum();
        assert!(sum.abs() < 1e-12);
        assert!(first.abs() < 1e-10);
        assert_eq!(validate_filter(d.coeffs()).unwrap().order(), 2);
    }

    #[test]
    fn dilation() {
        assert_eq!(dilate(&binomial_filter(1)).coeffs(), &[-1.0, 0.0, 1.0]);
        assert_eq!(dilate(&binomial_filter(2)).coeffs(), &[-1.0, 0.0, 2.0, 0.0, -1.0]);
        for k in 1..=10 {
            let d = dilate(&binomial_filter(k));
            assert_eq!(d.order(), k);
            assert_eq!(d.coeffs().len(), 2 * k + 1);
        }
        assert_eq!(dilate(&daubechies2_filter()).order(), 2);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(Filter::parse("binomial:3").unwrap(), binomial_filter(3));
        assert_eq!(Filter::parse("daub2").unwrap(), daubechies2_filter());
        assert_eq!(Filter::parse("-1, 2, -1").unwrap().order(), 2);
        assert!(Filter::parse("binomial:0").is_err());
        assert!(Filter::parse("1,1").is_err());
        assert!(Filter::parse("x").is_err());
    }

    #[test]
    fn double_sum_is_negative() {
        let filters = [
            binomial_filter(1),
            binomial_filter(2),
            binomial_filter(5),
            binomial_filter(26),
            daubechies2_filter(),
            dilate(&binomial_filter(2)),
        ];
        for f in &filters {
            for i in 1..100 {
                let h = i as f64 / 100.0;
                assert!(f.double_sum(h) < 0.0, "{f} at H={h}");
            }
        }
    }

    #[test]
    fn variation_examples() {
        let flat = Path::new(vec![3.0; 20], 1.0).unwrap();
        let line = Path::new((0..20).map(|i| 2.0 + 0.5 * i as f64).collect(), 1.0).unwrap();
        let a2 = binomial_filter(2);
        assert_eq!(quadratic_variation(&flat, &a2).unwrap(), 0.0);
        assert_eq!(quadratic_variation(&flat, &binomial_filter(1)).unwrap(), 0.0);
        assert_eq!(quadratic_variation(&line, &a2).unwrap(), 0.0);
        let short = Path::new(vec![1.0, 2.0], 1.0).unwrap();
        assert_eq!(
            quadratic_variation(&short, &a2),
            Err(Error::PathTooShort { needed: 3, got: 2 })
        );
        // hand computed: windows (1,4,2), (4,2,8): (-1+8-2)² + (-4+4-8)² = 25 + 64
        let p = Path::new(vec![1.0, 4.0, 2.0, 8.0], 1.0).unwrap();
        assert_eq!(quadratic_variation(&p, &a2).unwrap(), 89.0 / 4.0);
    }
}
