//! Orderings, ordering families and their verifiers.

mod rooted;
mod verify;

pub use rooted::{build_rooted_lso_tree, build_rooted_lso_treewidth, ClusterRecord, TreeDecomposition, TreewidthLso};
pub use verify::{
    classic_window_stretch, verify_classic, verify_classic_with_hint, verify_rooted, verify_triangle,
    window_diameter_table, PairViolation, VerificationReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ABSENT: u32 = u32::MAX;

/// The three flavors of locality-sensitive ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LsoKind {
    Classic,
    Triangle,
    Rooted,
}

impl std::fmt::Display for LsoKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LsoKind::Classic => "classic",
            LsoKind::Triangle => "triangle",
            LsoKind::Rooted => "rooted",
        };
        f.write_str(s)
    }
}

/// A linear order over a subset of point ids, optionally rooted at its first
/// element.
#[derive(Debug, Clone, PartialEq)]
pub struct Ordering {
    perm: Vec<usize>,
    root: Option<usize>,
    pos: Vec<u32>,
}

impl Ordering {
    /// `perm` lists distinct ids below `universe`; a root, if given, must be
    /// the first element.
    pub fn new(perm: Vec<usize>, root: Option<usize>, universe: usize) -> Result<Self> {
        let mut pos = vec![ABSENT; universe];
        for (k, &x) in perm.iter().enumerate() {
            if x >= universe {
                return Err(Error::OutOfRange {
                    index: x,
                    size: universe,
                });
            }
            if pos[x] != ABSENT {
                return Err(Error::InvalidOrdering {
                    ordering: 0,
                    reason: format!("point {x} repeated"),
                });
            }
            pos[x] = k as u32;
        }
        if let Some(r) = root {
            if perm.first() != Some(&r) {
                return Err(Error::InvalidOrdering {
                    ordering: 0,
                    reason: format!("root {r} is not the first element"),
                });
            }
        }
        Ok(Ordering { perm, root, pos })
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Position of `x`, if it belongs to the ordering.
    #[inline]
    pub fn position(&self, x: usize) -> Option<usize> {
        match self.pos.get(x) {
            Some(&p) if p != ABSENT => Some(p as usize),
            _ => None,
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.position(x).is_some()
    }
}

/// A family of orderings of one kind with its declared stretch and size.
#[derive(Debug, Clone)]
pub struct OrderingFamily {
    kind: LsoKind,
    universe: usize,
    rho: f64,
    tau: usize,
    orderings: Vec<Ordering>,
}

impl OrderingFamily {
    /// Builds and validates a family. Classic and triangle orderings must be
    /// permutations of the whole universe; rooted orderings must carry a root.
    /// The declared `tau` defaults to the number of orderings (classic,
    /// triangle) or the largest per-point membership (rooted).
    pub fn new(kind: LsoKind, universe: usize, rho: f64, perms: Vec<(Option<usize>, Vec<usize>)>) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::InvalidParameter(format!("stretch {rho} must be non-negative")));
        }
        let mut orderings = Vec::with_capacity(perms.len());
        for (i, (root, perm)) in perms.into_iter().enumerate() {
            let o = Ordering::new(perm, root, universe).map_err(|e| match e {
                Error::InvalidOrdering { reason, .. } => Error::InvalidOrdering { ordering: i, reason },
                other => other,
            })?;
            match kind {
                LsoKind::Classic | LsoKind::Triangle => {
                    if o.len() != universe {
                        return Err(Error::InvalidOrdering {
                            ordering: i,
                            reason: format!("covers {} of {} points", o.len(), universe),
                        });
                    }
                }
                LsoKind::Rooted => {
                    if o.root.is_none() {
                        return Err(Error::InvalidOrdering {
                            ordering: i,
                            reason: "rooted ordering without a root".into(),
                        });
                    }
                }
            }
            orderings.push(o);
        }
        let mut fam = OrderingFamily {
            kind,
            universe,
            rho,
            tau: 0,
            orderings,
        };
        fam.tau = fam.measured_tau();
        Ok(fam)
    }

    /// Overrides the declared size bound.
    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn kind(&self) -> LsoKind {
        self.kind
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Declared size bound.
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn orderings(&self) -> &[Ordering] {
        &self.orderings
    }

    pub fn len(&self) -> usize {
        self.orderings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orderings.is_empty()
    }

    /// Number of orderings each point belongs to.
    pub fn memberships(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.universe];
        for o in &self.orderings {
            for &x in &o.perm {
                c[x] += 1;
            }
        }
        c
    }

    /// Orderings (and positions) containing each point, in ordering order.
    pub fn membership_lists(&self) -> Vec<Vec<(usize, usize)>> {
        let mut lists = vec![Vec::new(); self.universe];
        for (s, o) in self.orderings.iter().enumerate() {
            for (k, &x) in o.perm.iter().enumerate() {
                lists[x].push((s, k));
            }
        }
        lists
    }

    /// The size parameter actually realized by the orderings.
    pub fn measured_tau(&self) -> usize {
        match self.kind {
            LsoKind::Rooted => self.memberships().into_iter().max().unwrap_or(0),
            _ => self.orderings.len(),
        }
    }

    /// Serializes to the ordering-family JSON format.
    pub fn to_json(&self) -> String {
        let file = FamilyFile {
            kind: self.kind,
            rho: self.rho,
            tau: self.tau,
            orderings: self
                .orderings
                .iter()
                .map(|o| OrderingEntry {
                    root: o.root,
                    perm: o.perm.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("family serializes")
    }

    /// Parses the ordering-family JSON format. The universe is one more than
    /// the largest id mentioned.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        let universe = file
            .orderings
            .iter()
            .flat_map(|o| o.perm.iter())
            .max()
            .map_or(0, |m| m + 1);
        let fam = OrderingFamily::new(
            file.kind,
            universe,
            file.rho,
            file.orderings.into_iter().map(|o| (o.root, o.perm)).collect(),
        )?;
        Ok(fam.with_tau(file.tau))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    kind: LsoKind,
    rho: f64,
    tau: usize,
    orderings: Vec<OrderingEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OrderingEntry {
    root: Option<usize>,
    perm: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let fam = OrderingFamily::new(
            LsoKind::Rooted,
            4,
            1.0,
            vec![(Some(2), vec![2, 0, 3]), (Some(1), vec![1, 3])],
        )
        .unwrap();
        let back = OrderingFamily::from_json(&fam.to_json()).unwrap();
        assert_eq!(back.kind(), LsoKind::Rooted);
        assert_eq!(back.tau(), 2);
        assert_eq!(back.orderings(), fam.orderings());
    }

    #[test]
    fn rejects_partial_permutation_for_triangle() {
        let e = OrderingFamily::new(LsoKind::Triangle, 3, 1.0, vec![(None, vec![0, 1])]).unwrap_err();
        assert!(matches!(e, Error::InvalidOrdering { ordering: 0, .. }));
    }

    #[test]
    fn rejects_misplaced_root() {
        let e = OrderingFamily::new(LsoKind::Rooted, 3, 1.0, vec![(Some(1), vec![0, 1])]).unwrap_err();
        assert!(matches!(e, Error::InvalidOrdering { .. }));
    }
}
