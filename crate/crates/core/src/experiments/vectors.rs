//! Test-vector families and random orthonormal frames.

use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{config_err, ExperimentError};
use crate::arithmetic::l2_norm;
use crate::rng::{CounterRng, Domain};

/// A family of test vectors, expanded for a given dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSpec {
    /// `(1, …, 1)/√n`.
    Constant,
    /// Standard basis vector `e_index`.
    Basis {
        #[serde(default)]
        index: usize,
    },
    /// First `⌈split·n⌉` coordinates equal `ratio`, the rest `1`, normalized.
    TwoLevel { split: f64, ratio: f64 },
    /// `count` uniformly random unit vectors.
    RandomUnit { count: usize, seed: u64 },
    Explicit {
        values: Vec<f64>,
        #[serde(default)]
        structured: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub label: String,
    /// Built to have small LCD; the small-ball study expects these to concentrate.
    pub structured: bool,
    pub values: Vec<f64>,
}

impl VectorSpec {
    pub fn expand(&self, n: usize) -> Result<Vec<LabeledVector>, ExperimentError> {
        if n == 0 {
            return config_err("vector dimension must be positive");
        }
        let one = |label: String, structured: bool, values: Vec<f64>| vec![LabeledVector { label, structured, values }];
        Ok(match self {
            VectorSpec::Constant => one("constant".into(), true, vec![1.0 / (n as f64).sqrt(); n]),
            VectorSpec::Basis { index } => {
                if *index >= n {
                    return config_err(format!("basis index {index} out of range for n = {n}"));
                }
                let mut v = vec![0.0; n];
                v[*index] = 1.0;
                one(format!("e{index}"), true, v)
            }
            VectorSpec::TwoLevel { split, ratio } => {
                if !(*split > 0.0 && *split < 1.0) || !(ratio.is_finite() && *ratio > 0.0) {
                    return config_err("two_level needs split in (0, 1) and a positive ratio");
                }
                let k = ((split * n as f64).ceil() as usize).min(n);
                let raw: Vec<f64> = (0..n).map(|i| if i < k { *ratio } else { 1.0 }).collect();
                one(format!("two_level_{split}_{ratio}"), true, normalized(&raw))
            }
            VectorSpec::RandomUnit { count, seed } => (0..*count)
                .map(|i| LabeledVector {
                    label: format!("random_{i}"),
                    structured: false,
                    values: random_unit(n, *seed, i as u64),
                })
                .collect(),
            VectorSpec::Explicit { values, structured } => {
                if values.len() != n {
                    return config_err(format!("explicit vector has length {}, expected {n}", values.len()));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return config_err("explicit vector must be finite");
                }
                one("explicit".into(), *structured, values.clone())
            }
        })
    }
}

pub fn expand_all(specs: &[VectorSpec], n: usize) -> Result<Vec<LabeledVector>, ExperimentError> {
    let mut out = Vec::new();
    for s in specs {
        out.extend(s.expand(n)?);
    }
    if out.is_empty() {
        return config_err("vector family is empty");
    }
    // Disambiguate repeated labels so table rows stay distinct.
    for i in 0..out.len() {
        if out[..i].iter().any(|v| v.label == out[i].label) {
            out[i].label = format!("{}_{i}", out[i].label);
        }
    }
    Ok(out)
}

pub fn normalized(v: &[f64]) -> Vec<f64> {
    let s = l2_norm(v);
    v.iter().map(|x| x / s).collect()
}

/// Standard gaussian vector drawn from the auxiliary stream `(seed, index)`.
pub fn gaussian_vector(n: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = CounterRng::new(seed, Domain::Auxiliary, index, n as u64);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Uniform point of the unit sphere.
pub fn random_unit(n: usize, seed: u64, index: u64) -> Vec<f64> {
    normalized(&gaussian_vector(n, seed, index))
}

/// `k` orthonormal vectors in `R^n` by Gram–Schmidt on gaussian draws, with
/// optional vectors they must also be orthogonal to.
pub fn orthonormal_rows(k: usize, n: usize, seed: u64, avoid: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ExperimentError> {
    if k + avoid.len() > n {
        return config_err(format!("cannot fit {k} orthonormal rows in dimension {n}"));
    }
    let mut basis: Vec<Vec<f64>> = avoid.iter().map(|v| normalized(v)).collect();
    let fixed = basis.len();
    let mut draw = 0u64;
    while basis.len() < fixed + k {
        let mut w = gaussian_vector(n, seed, 1_000_000 + draw);
        draw += 1;
        // Two passes keep the rows orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = l2_norm(&w);
        if norm > 1e-6 {
            basis.push(w.iter().map(|x| x / norm).collect());
        }
    }
    Ok(basis.split_off(fixed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_are_unit_vectors() {
        let specs = [
            VectorSpec::Constant,
            VectorSpec::Basis { index: 2 },
            VectorSpec::TwoLevel { split: 0.5, ratio: 2.0 },
            VectorSpec::RandomUnit { count: 3, seed: 4 },
        ];
        let vs = expand_all(&specs, 10).unwrap();
        assert_eq!(vs.len(), 6);
        for v in &vs {
            assert!((l2_norm(&v.values) - 1.0).abs() < 1e-12, "{}", v.label);
        }
        assert!(vs[0].structured && !vs[5].structured);
        assert!(VectorSpec::Basis { index: 10 }.expand(10).is_err());
    }

    #[test]
    fn frames_are_orthonormal() {
        let v = random_unit(20, 1, 0);
        let rows = orthonormal_rows(5, 20, 2, std::slice::from_ref(&v)).unwrap();
        for (i, a) in rows.iter().enumerate() {
            let dv: f64 = a.iter().zip(&v).map(|(x, y)| x * y).sum();
            assert!(dv.abs() < 1e-12);
            for (j, b) in rows.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(orthonormal_rows(20, 20, 2, &[v]).is_err());
    }
}
