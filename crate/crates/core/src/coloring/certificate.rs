use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{is_clique, is_odd_cycle, search, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    ProperColoring,
    CliqueWitness,
    OddCycleWitness,
    ExhaustiveUnsat,
}

/// One preorder step of a refutation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofStep {
    /// Branch on this vertex over every color it may still take; no
    /// admissible color makes it a dead end.
    Branch(usize),
    /// Same subproblem as the closed subtree rooted at this step index.
    Same(usize),
}

/// Exhaustive-search transcript showing that `colors` colors do not
/// suffice, with `seed` pinned to colors `0..seed.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    pub colors: usize,
    pub seed: Vec<usize>,
    pub steps: Vec<ProofStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate is missing its {0}")]
    Missing(&'static str),
    #[error("coloring leaves vertex {0} uncolored")]
    Uncolored(usize),
    #[error("edge ({0}, {1}) is monochromatic")]
    Monochromatic(usize, usize),
    #[error("witness vertices do not form a clique")]
    NotClique,
    #[error("witness is not an odd cycle")]
    NotOddCycle,
    #[error("refutation step {step}: {reason}")]
    BadRefutation { step: usize, reason: String },
    #[error("declared {declared} colors but certificate proves {actual}")]
    CountMismatch { declared: usize, actual: usize },
    #[error("bounds do not meet: lower {lower}, upper {upper}")]
    BoundMismatch { lower: usize, upper: usize },
}

/// Upper (proper coloring) or lower (clique, odd cycle, exhaustive search)
/// bound on a chromatic number. For lower-bound kinds `colors_used` is the
/// number of colors shown to be necessary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringCertificate {
    pub kind: CertificateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<BTreeMap<usize, usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_vertices: Option<Vec<usize>>,
    pub colors_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refutation: Option<Refutation>,
}

impl ColoringCertificate {
    pub fn proper(colors: &[usize]) -> Self {
        let used = colors.iter().collect::<std::collections::BTreeSet<_>>().len();
        ColoringCertificate {
            kind: CertificateKind::ProperColoring,
            colors: Some(colors.iter().copied().enumerate().collect()),
            witness_vertices: None,
            colors_used: used,
            refutation: None,
        }
    }

    pub fn clique(vertices: Vec<usize>) -> Self {
        ColoringCertificate {
            kind: CertificateKind::CliqueWitness,
            colors: None,
            colors_used: vertices.len(),
            witness_vertices: Some(vertices),
            refutation: None,
        }
    }

    pub fn odd_cycle(cycle: Vec<usize>) -> Self {
        ColoringCertificate {
            kind: CertificateKind::OddCycleWitness,
            colors: None,
            witness_vertices: Some(cycle),
            colors_used: 3,
            refutation: None,
        }
    }

    pub fn exhaustive(r: Refutation) -> Self {
        ColoringCertificate {
            kind: CertificateKind::ExhaustiveUnsat,
            colors: None,
            witness_vertices: None,
            colors_used: r.colors + 1,
            refutation: Some(r),
        }
    }

    /// Dense color vector for a proper-coloring certificate.
    pub fn color_vector(&self, n: usize) -> Result<Vec<usize>, CertificateError> {
        let map = self.colors.as_ref().ok_or(CertificateError::Missing("colors"))?;
        (0..n)
            .map(|v| map.get(&v).copied().ok_or(CertificateError::Uncolored(v)))
            .collect()
    }

    /// Checks the certificate against `g` and returns the bound it proves:
    /// an upper bound for proper colorings, a lower bound otherwise.
    pub fn verify(&self, g: &Graph) -> Result<usize, CertificateError> {
        let proven = match self.kind {
            CertificateKind::ProperColoring => {
                let colors = self.color_vector(g.vertex_count())?;
                if let Some((u, v)) = g.edges().find(|&(u, v)| colors[u] == colors[v]) {
                    return Err(CertificateError::Monochromatic(u, v));
                }
                colors.iter().collect::<std::collections::BTreeSet<_>>().len()
            }
            CertificateKind::CliqueWitness => {
                let w = self.witness_vertices.as_ref().ok_or(CertificateError::Missing("witness vertices"))?;
                if !is_clique(g, w) {
                    return Err(CertificateError::NotClique);
                }
                w.len()
            }
            CertificateKind::OddCycleWitness => {
                let w = self.witness_vertices.as_ref().ok_or(CertificateError::Missing("witness vertices"))?;
                if !is_odd_cycle(g, w) {
                    return Err(CertificateError::NotOddCycle);
                }
                3
            }
            CertificateKind::ExhaustiveUnsat => {
                let r = self.refutation.as_ref().ok_or(CertificateError::Missing("refutation"))?;
                search::check_refutation(g, r)?;
                r.colors + 1
            }
        };
        if proven != self.colors_used {
            return Err(CertificateError::CountMismatch {
                declared: self.colors_used,
                actual: proven,
            });
        }
        Ok(proven)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = ColoringCertificate::proper(&[0, 1, 2, 0]);
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with("{\"kind\":\"proper_coloring\",\"colors\":{\"0\":0"));
        let back: ColoringCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn forged_certificates_rejected() {
        let c5 = Graph::cycle(5);
        assert_eq!(
            ColoringCertificate::proper(&[0, 1, 0, 1, 0]).verify(&c5),
            Err(CertificateError::Monochromatic(0, 4))
        );
        assert_eq!(ColoringCertificate::clique(vec![0, 2]).verify(&c5), Err(CertificateError::NotClique));
        assert_eq!(
            ColoringCertificate::odd_cycle(vec![0, 1, 2]).verify(&c5),
            Err(CertificateError::NotOddCycle)
        );
        let mut lie = ColoringCertificate::clique(vec![0, 1]);
        lie.colors_used = 3;
        assert!(matches!(lie.verify(&c5), Err(CertificateError::CountMismatch { .. })));
    }
}
