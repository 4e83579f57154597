//! Ordered subsystem layouts. The leg order fixed here is the tensor-leg order
//! used by every operator, state and channel built on the layout.

use std::fmt;

use crate::error::{Error, Result};

pub const LABEL_A: &str = "A";
pub const LABEL_G: &str = "G";
pub const LABEL_B: &str = "B";

/// One tensor leg: a label, a dimension and whether its algebra is commutative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
    pub classical: bool,
}

impl Subsystem {
    pub fn quantum(label: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            label: label.into(),
            dim,
            classical: false,
        }
    }

    pub fn classical(label: impl Into<String>, dim: usize) -> Self {
        Subsystem {
            label: label.into(),
            dim,
            classical: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemLayout {
    subsystems: Vec<Subsystem>,
}

impl SystemLayout {
    /// Validates dimensions and label uniqueness.
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        for (k, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::ZeroDimension(s.label.clone()));
            }
            if subsystems[..k].iter().any(|o| o.label == s.label) {
                return Err(Error::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(SystemLayout { subsystems })
    }

    /// The canonical `[A, G, B]` layout.
    pub fn tripartite(da: usize, dg: usize, db: usize, g_classical: bool) -> Result<Self> {
        SystemLayout::new(vec![
            Subsystem::quantum(LABEL_A, da),
            Subsystem {
                label: LABEL_G.into(),
                dim: dg,
                classical: g_classical,
            },
            Subsystem::quantum(LABEL_B, db),
        ])
    }

    pub fn single(subsystem: Subsystem) -> Result<Self> {
        SystemLayout::new(vec![subsystem])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn subsystem(&self, label: &str) -> Result<&Subsystem> {
        Ok(&self.subsystems[self.index_of(label)?])
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystem(label)?.dim)
    }

    pub fn classical_legs(&self) -> Vec<usize> {
        self.subsystems
            .iter()
            .enumerate()
            .filter(|(_, s)| s.classical)
            .map(|(i, _)| i)
            .collect()
    }

    /// Leg indices of `labels`, sorted into layout order.
    pub fn leg_indices(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut idx = labels
            .iter()
            .map(|l| self.index_of(l))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// The sub-layout on the given legs, keeping layout order.
    pub fn restrict(&self, legs: &[usize]) -> SystemLayout {
        SystemLayout {
            subsystems: legs.iter().map(|&l| self.subsystems[l].clone()).collect(),
        }
    }

    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        let mut subs = self.subsystems.clone();
        subs.extend(other.subsystems.iter().cloned());
        SystemLayout::new(subs)
    }

    /// Position in `self` of each leg of `target`, provided both carry the same
    /// legs. `target` leg `t` is `self` leg `perm[t]`.
    pub fn permutation_to(&self, target: &SystemLayout) -> Result<Vec<usize>> {
        if self.len() != target.len() {
            return Err(Error::LayoutMismatch(format!("{self} cannot be reordered into {target}")));
        }
        target
            .subsystems
            .iter()
            .map(|t| {
                let i = self.index_of(&t.label)?;
                if self.subsystems[i] != *t {
                    return Err(Error::LayoutMismatch(format!(
                        "leg `{}` differs between {self} and {target}",
                        t.label
                    )));
                }
                Ok(i)
            })
            .collect()
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.subsystems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}{}", s.label, s.dim, if s.classical { "c" } else { "" })?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_dim_is_product() {
        let l = SystemLayout::new(vec![
            Subsystem::quantum("A", 2),
            Subsystem::classical("G", 3),
            Subsystem::quantum("B", 2),
        ])
        .unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.classical_legs(), vec![1]);
    }

    #[test]
    fn trivial_algebra() {
        let l = SystemLayout::single(Subsystem::classical("G", 1)).unwrap();
        assert_eq!(l.total_dim(), 1);
    }

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        let dup = SystemLayout::new(vec![Subsystem::quantum("A", 2), Subsystem::quantum("A", 2)]);
        assert_eq!(dup.unwrap_err(), Error::DuplicateLabel("A".into()));
        let zero = SystemLayout::new(vec![Subsystem::quantum("A", 0)]);
        assert_eq!(zero.unwrap_err(), Error::ZeroDimension("A".into()));
    }

    #[test]
    fn permutation_between_orderings() {
        let gba = SystemLayout::new(vec![
            Subsystem::classical("G", 3),
            Subsystem::quantum("B", 2),
            Subsystem::quantum("A", 4),
        ])
        .unwrap();
        let agb = SystemLayout::tripartite(4, 3, 2, true).unwrap();
        assert_eq!(gba.permutation_to(&agb).unwrap(), vec![2, 0, 1]);
        assert!(matches!(
            gba.permutation_to(&SystemLayout::tripartite(4, 3, 2, false).unwrap()),
            Err(Error::LayoutMismatch(_))
        ));
    }
}
