use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// An ordered tensor product of labeled factors. Factor order is fixed at
/// construction and determines the composite index layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let factors: Vec<Factor> = factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect();
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptySelection);
        }
        for (i, f) in factors.iter().enumerate() {
            if f.dim == 0 {
                return Err(Error::ZeroDimension(f.label.clone()));
            }
            if factors[..i].iter().any(|g| g.label == f.label) {
                return Err(Error::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(Self { factors })
    }

    /// A single factor of the given dimension.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn qubit(label: &str) -> Self {
        Self::single(label, 2).expect("nonzero dimension")
    }

    /// `n` qubits labeled `{prefix}0 … {prefix}{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), 2)))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertSpace) -> Result<Self> {
        if let Some(f) = other.factors.iter().find(|f| self.contains(&f.label)) {
            return Err(Error::LabelClash(f.label.clone()));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self { factors })
    }

    /// Positions (ascending) of the given labels.
    pub fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self
                .position(l.as_ref())
                .ok_or_else(|| Error::UnknownSubsystem(l.as_ref().to_string()))?;
            if pos.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// The subspace spanned by the given labels, in this space's factor order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySelection);
        }
        let pos = self.positions_of(labels)?;
        Ok(Self {
            factors: pos.iter().map(|&p| self.factors[p].clone()).collect(),
        })
    }

    /// Labels not in `labels`, in factor order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.factors
            .iter()
            .filter(|f| !labels.iter().any(|l| l.as_ref() == f.label))
            .map(|f| f.label.clone())
            .collect()
    }

    /// Checks that `groups` partition the labels of this space.
    pub fn check_partition<S: AsRef<str>>(&self, groups: &[Vec<S>]) -> Result<()> {
        let mut seen: Vec<&str> = Vec::new();
        for g in groups {
            if g.is_empty() {
                return Err(Error::BadPartition("empty subsystem group".into()));
            }
            for l in g {
                let l = l.as_ref();
                if !self.contains(l) {
                    return Err(Error::BadPartition(format!("unknown label `{l}`")));
                }
                if seen.contains(&l) {
                    return Err(Error::BadPartition(format!("label `{l}` used twice")));
                }
                seen.push(l);
            }
        }
        if seen.len() != self.factors.len() {
            let missing = self.complement(&seen);
            return Err(Error::BadPartition(format!(
                "labels not covered: {}",
                missing.join(",")
            )));
        }
        Ok(())
    }

    /// Factor order (old positions) that lists `groups` one after another,
    /// each group in this space's order.
    pub fn grouped_order<S: AsRef<str>>(&self, groups: &[Vec<S>]) -> Result<Vec<usize>> {
        self.check_partition(groups)?;
        let mut order = Vec::with_capacity(self.factors.len());
        for g in groups {
            order.extend(self.positions_of(g)?);
        }
        Ok(order)
    }

    /// The space with factors reordered by `order` (old positions).
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            factors: order.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    /// Same factors, possibly in another order.
    pub fn same_factors(&self, other: &HilbertSpace) -> bool {
        self.factors.len() == other.factors.len() && self.factors.iter().all(|f| other.factors.contains(f))
    }

    /// Old positions in `self` of `target`'s factors, in `target` order.
    pub fn order_for(&self, target: &HilbertSpace) -> Result<Vec<usize>> {
        if !self.same_factors(target) {
            return Err(Error::SpaceMismatch(format!("{self} vs {target}")));
        }
        Ok(target
            .factors
            .iter()
            .map(|f| self.position(&f.label).expect("checked"))
            .collect())
    }
}

impl fmt::Display for HilbertSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| format!("{}:{}", x.label, x.dim)).collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}
