//! Shortest circuit walks by breadth-first search on tiny instances.

use std::collections::{HashMap, VecDeque};

use crate::circuits::{enumerate_circuits, ElementaryVector};
use crate::error::{Error, Result};
use crate::linalg::RationalVector;
use crate::polyhedron::{AugmentationResult, PolyhedronInstance};

/// One explored point of the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkGraphNode {
    pub point: RationalVector,
    pub depth: usize,
    /// Arena index of the predecessor.
    pub parent: Option<usize>,
    pub via: Option<ElementaryVector>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleStep {
    pub direction: ElementaryVector,
    pub augmentation: AugmentationResult,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleWalk {
    pub start: RationalVector,
    pub steps: Vec<OracleStep>,
    /// Number of points the search visited.
    pub explored: usize,
}

impl OracleWalk {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn points(&self) -> Vec<RationalVector> {
        let mut points = vec![self.start.clone()];
        points.extend(self.steps.iter().map(|s| s.augmentation.new_point.clone()));
        points
    }
}

/// Maximal augmentations from `x` along both orientations of every circuit;
/// orientations with a zero or unbounded step are skipped.
pub fn successors(p: &PolyhedronInstance, x: &RationalVector, circuits: &[ElementaryVector]) -> Vec<(ElementaryVector, AugmentationResult)> {
    circuits
        .iter()
        .flat_map(|g| [g.clone(), g.negated()])
        .filter_map(|g| p.max_step(x, &g).ok().map(|result| (g, result)))
        .collect()
}

/// [`shortest_walk_with`] over all circuits of `A`, enumerated within
/// `enumeration_budget` candidate supports.
pub fn shortest_walk(
    p: &PolyhedronInstance,
    start: &RationalVector,
    target: &RationalVector,
    depth_budget: usize,
    node_budget: usize,
    enumeration_budget: u128,
) -> Result<OracleWalk> {
    let circuits = enumerate_circuits(p.a(), enumeration_budget)?;
    shortest_walk_with(p, start, target, &circuits, depth_budget, node_budget)
}

/// Breadth-first search from `start` with exact-point deduplication.
/// [`Error::NotFoundWithinBudget`] is inconclusive: no walk of length at most
/// `depth_budget` was found among the first `node_budget` points.
pub fn shortest_walk_with(
    p: &PolyhedronInstance,
    start: &RationalVector,
    target: &RationalVector,
    circuits: &[ElementaryVector],
    depth_budget: usize,
    node_budget: usize,
) -> Result<OracleWalk> {
    if !p.is_feasible(start) {
        return Err(Error::StartInfeasible);
    }
    if !p.is_feasible(target) {
        return Err(Error::TargetInvalid("target is not in P".into()));
    }
    let mut nodes = vec![WalkGraphNode { point: start.clone(), depth: 0, parent: None, via: None }];
    let mut seen: HashMap<RationalVector, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([0usize]);
    let mut found = (start == target).then_some(0);
    while found.is_none() {
        let Some(index) = queue.pop_front() else { break };
        if nodes[index].depth >= depth_budget {
            continue;
        }
        for (g, result) in successors(p, &nodes[index].point.clone(), circuits) {
            if seen.contains_key(&result.new_point) {
                continue;
            }
            if nodes.len() >= node_budget {
                return Err(Error::NotFoundWithinBudget);
            }
            let child = nodes.len();
            seen.insert(result.new_point.clone(), child);
            let reached = result.new_point == *target;
            nodes.push(WalkGraphNode { point: result.new_point, depth: nodes[index].depth + 1, parent: Some(index), via: Some(g) });
            queue.push_back(child);
            if reached {
                found = Some(child);
                break;
            }
        }
    }
    let Some(end) = found else { return Err(Error::NotFoundWithinBudget) };
    let mut chain = vec![end];
    while let Some(parent) = nodes[*chain.last().expect("nonempty")].parent {
        chain.push(parent);
    }
    chain.reverse();
    let mut steps = Vec::with_capacity(chain.len() - 1);
    for pair in chain.windows(2) {
        let g = nodes[pair[1]].via.clone().expect("non-root nodes record their circuit");
        let augmentation = p.max_step(&nodes[pair[0]].point, &g)?;
        steps.push(OracleStep { direction: g, augmentation });
    }
    Ok(OracleWalk { start: start.clone(), steps, explored: nodes.len() })
}
