//! Text-file description of Hamiltonians (TOML tables).
//!
//! ```toml
//! kind = "sum"
//! [[terms]]
//! kind = "radial_bump"
//! A = 2.5            # B omitted: use B0(A)
//! [[terms]]
//! kind = "quadratic_core"
//! a = 2.0
//! cutoff_radius = 1.0
//! transition_width = 2.0
//! center = [3.0, 0.0]
//! weight = -1.0
//! ```

use serde::{Deserialize, Serialize};

use super::{compute_b0_auto, Hamiltonian, Term, WeightedTerm};
use crate::error::{domain, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSpec {
    Zero {},
    RadialBump {
        #[serde(rename = "B", default)]
        b: Option<f64>,
        #[serde(rename = "A")]
        a: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        weight: f64,
    },
    QuadraticCore {
        a: f64,
        cutoff_radius: f64,
        transition_width: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        weight: f64,
    },
    /// `c (y_1 - c_y) chi_x chi_y`; plateau and width are given as `[x-axes, y-axes]`.
    Shear {
        c: f64,
        plateau: [f64; 2],
        width: [f64; 2],
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        weight: f64,
    },
    Sum { terms: Vec<HamiltonianSpec> },
}

impl HamiltonianSpec {
    /// Builds the Hamiltonian on R^{2n}; `grid_resolution` is used only when B0 must be computed.
    pub fn build(&self, n: usize, grid_resolution: usize) -> Result<Hamiltonian> {
        let mut terms = Vec::new();
        self.collect(n, grid_resolution, 1.0, &mut terms)?;
        Hamiltonian::from_terms(n, terms)
    }

    fn collect(&self, n: usize, res: usize, outer: f64, out: &mut Vec<WeightedTerm>) -> Result<()> {
        let center = |c: &Option<Vec<f64>>| -> Result<Vec<f64>> {
            match c {
                None => Ok(vec![0.0; 2 * n]),
                Some(c) if c.len() == 2 * n => Ok(c.clone()),
                Some(c) => domain(format!("centre has {} coordinates, expected {}", c.len(), 2 * n)),
            }
        };
        match self {
            HamiltonianSpec::Zero {} => {}
            HamiltonianSpec::RadialBump { b, a, center: c, weight } => {
                let b = match b {
                    Some(b) => *b,
                    None => compute_b0_auto(*a, n, res)?.b0,
                };
                out.push(WeightedTerm { weight: outer * weight, term: Term::radial_bump(b, *a, center(c)?)? });
            }
            HamiltonianSpec::QuadraticCore { a, cutoff_radius, transition_width, center: c, weight } => {
                out.push(WeightedTerm {
                    weight: outer * weight,
                    term: Term::quadratic_core(*a, *cutoff_radius, *transition_width, center(c)?)?,
                });
            }
            HamiltonianSpec::Shear { c: k, plateau, width, center: c, weight } => {
                let axis = |v: &[f64; 2]| (0..2 * n).map(|i| if i < n { v[0] } else { v[1] }).collect();
                out.push(WeightedTerm {
                    weight: outer * weight,
                    term: Term::shear(*k, axis(plateau), axis(width), center(c)?)?,
                });
            }
            HamiltonianSpec::Sum { terms } => {
                for t in terms {
                    t.collect(n, res, outer, out)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sum_of_terms() {
        let src = r#"
            kind = "sum"
            [[terms]]
            kind = "radial_bump"
            B = 4.0
            A = 2.5
            [[terms]]
            kind = "quadratic_core"
            a = 2.0
            cutoff_radius = 1.0
            transition_width = 2.0
            center = [5.0, 0.0]
            weight = -1.0
        "#;
        let spec: HamiltonianSpec = toml::from_str(src).unwrap();
        let h = spec.build(1, 64).unwrap();
        assert_eq!(h.terms().len(), 2);
        assert!((h.value(&[0.0, 0.0]) - 2.5).abs() < 1e-14);
        assert!((h.value(&[5.5, 0.0]) + 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_unknown_keys() {
        let src = "kind = \"radial_bump\"\nB = 4.0\nA = 2.5\nheight = 3.0\n";
        assert!(toml::from_str::<HamiltonianSpec>(src).is_err());
    }

    #[test]
    fn wrong_centre_dimension() {
        let spec = HamiltonianSpec::RadialBump { b: Some(1.0), a: 1.0, center: Some(vec![0.0; 3]), weight: 1.0 };
        assert!(spec.build(1, 64).is_err());
    }
}
