//! Value parsers for list-shaped flags.

use reftrade::allocator::VendorLevel;

/// A budget in cost units, or `<k>x` for `k` times the segment count.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    Absolute(f64),
    PerSegment(f64),
}

impl Budget {
    pub fn resolve(self, segments: usize) -> f64 {
        match self {
            Budget::Absolute(b) => b,
            Budget::PerSegment(k) => k * segments as f64,
        }
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a finite number")),
    }
}

pub fn budget(s: &str) -> Result<Budget, String> {
    match s.trim().strip_suffix('x') {
        Some(k) => finite(k).map(Budget::PerSegment),
        None => finite(s).map(Budget::Absolute),
    }
}

pub fn number(s: &str) -> Result<f64, String> {
    finite(s)
}

/// Comma-separated counts and inclusive ranges, e.g. `1-10` or `1,4-5`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct Counts(pub Vec<usize>);

pub fn counts(s: &str) -> Result<Counts, String> {
    let bad = || format!("`{s}` is not a count or range like 1-10");
    let mut out = Vec::new();
    for part in s.split(',') {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.trim().parse().map_err(|_| bad())?,
                    b.trim().parse().map_err(|_| bad())?,
                );
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(Counts(out))
}

/// `id:cost:utility`.
pub fn level(s: &str) -> Result<VendorLevel, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [id, cost, utility] if !id.is_empty() => Ok(VendorLevel::new(*id, finite(cost)?, finite(utility)?)),
        _ => Err(format!("`{s}` is not a level like R3:2:4 (id:cost:utility)")),
    }
}
