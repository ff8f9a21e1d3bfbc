//! Symmetry-adapted coefficient tables.
//!
//! Plain text, whitespace separated columns `l rep lambda m re im`; lines
//! starting with `#` are comments. Each `(l, rep, lambda)` triple defines one
//! substate `sum_m C_m Y_lm`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryState {
    pub rep: String,
    pub substate: usize,
    /// Indexed by `m + l`.
    pub coefficients: Vec<Complex64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymmetryTable {
    states: BTreeMap<usize, Vec<SymmetryState>>,
}

impl SymmetryTable {
    /// Substates for angular momentum `l`, grouped by representation in order
    /// of first appearance in the file.
    pub fn states(&self, l: usize) -> Option<&[SymmetryState]> {
        self.states.get(&l).map(Vec::as_slice)
    }

    pub fn angular_momenta(&self) -> impl Iterator<Item = usize> + '_ {
        self.states.keys().copied()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        load_symmetry_coefficients(&text)
    }
}

pub fn load_symmetry_coefficients(text: &str) -> Result<SymmetryTable> {
    // (l) -> ordered list of (rep, lambda) keys plus coefficient vectors
    let mut order: BTreeMap<usize, Vec<(String, usize)>> = BTreeMap::new();
    let mut coeffs: BTreeMap<(usize, String, usize), Vec<Complex64>> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected 6 columns `l rep lambda m re im`, found {}", cols.len()),
            });
        }
        let parse_err = |what: &str, v: &str| Error::Parse {
            line: line_no,
            reason: format!("cannot parse {what} from `{v}`"),
        };
        let l: usize = cols[0].parse().map_err(|_| parse_err("l", cols[0]))?;
        let rep = cols[1].to_string();
        let lambda: usize = cols[2].parse().map_err(|_| parse_err("lambda", cols[2]))?;
        let m: i64 = cols[3].parse().map_err(|_| parse_err("m", cols[3]))?;
        let re: f64 = cols[4].parse().map_err(|_| parse_err("re", cols[4]))?;
        let im: f64 = cols[5].parse().map_err(|_| parse_err("im", cols[5]))?;
        if m.unsigned_abs() as usize > l {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("|m| = {} exceeds l = {l}", m.abs()),
            });
        }
        let key = (l, rep.clone(), lambda);
        let entry = coeffs.entry(key).or_insert_with(|| {
            order.entry(l).or_default().push((rep.clone(), lambda));
            vec![Complex64::new(0.0, 0.0); 2 * l + 1]
        });
        entry[(m + l as i64) as usize] += Complex64::new(re, im);
    }

    let mut states: BTreeMap<usize, Vec<SymmetryState>> = BTreeMap::new();
    for (l, keys) in order {
        // group substates of the same representation together
        let mut reps: Vec<String> = Vec::new();
        for (rep, _) in &keys {
            if !reps.contains(rep) {
                reps.push(rep.clone());
            }
        }
        let mut list = Vec::with_capacity(keys.len());
        for rep in &reps {
            for (r, lambda) in keys.iter().filter(|(r, _)| r == rep) {
                let c = coeffs.remove(&(l, r.clone(), *lambda)).expect("key recorded");
                let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                if (norm - 1.0).abs() > NORM_TOLERANCE {
                    return Err(Error::Normalization {
                        l,
                        rep: r.clone(),
                        substate: *lambda,
                        norm,
                    });
                }
                list.push(SymmetryState {
                    rep: r.clone(),
                    substate: *lambda,
                    coefficients: c,
                });
            }
        }
        if list.len() > 2 * l + 1 {
            return Err(Error::Config(format!(
                "symmetry table lists {} substates for l = {l}, at most {} allowed",
                list.len(),
                2 * l + 1
            )));
        }
        states.insert(l, list);
    }
    Ok(SymmetryTable { states })
}
