//! Graph isomorphism up to blank node renaming.
//!
//! Ground triples are compared as sets. Blank nodes are first partitioned by
//! an iteratively refined signature (incident predicates, roles and
//! neighbour classes); a backtracking search then tries bijections only
//! between nodes of equal class, checking every triple as soon as all of its
//! blank nodes are mapped.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use super::graph::Graph;
use super::term::{BlankNode, Term, Triple};

pub const DEFAULT_MAX_BLANK_NODES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("graph has {found} blank nodes; isomorphism check is limited to {limit}")]
pub struct CapacityError {
    pub found: usize,
    pub limit: usize,
}

pub fn graph_isomorphic(a: &Graph, b: &Graph) -> Result<bool, CapacityError> {
    isomorphic_with_limit(a, b, DEFAULT_MAX_BLANK_NODES)
}

pub fn isomorphic_with_limit(a: &Graph, b: &Graph, max_blank_nodes: usize) -> Result<bool, CapacityError> {
    if a.len() != b.len() {
        return Ok(false);
    }
    let (ground_a, open_a): (Vec<&Triple>, Vec<&Triple>) = a.iter().partition(|t| !t.has_blank());
    let (ground_b, open_b): (Vec<&Triple>, Vec<&Triple>) = b.iter().partition(|t| !t.has_blank());
    // both are sorted, so slice equality is set equality
    if ground_a != ground_b {
        return Ok(false);
    }
    let blanks_a: Vec<&BlankNode> = a.blank_nodes().into_iter().collect();
    let blanks_b: Vec<&BlankNode> = b.blank_nodes().into_iter().collect();
    if blanks_a.len() != blanks_b.len() {
        return Ok(false);
    }
    let found = blanks_a.len();
    if found > max_blank_nodes {
        return Err(CapacityError {
            found,
            limit: max_blank_nodes,
        });
    }
    if found == 0 {
        return Ok(true);
    }

    let Some((colors_a, colors_b)) = refine_colors(&open_a, &blanks_a, &open_b, &blanks_b) else {
        return Ok(false);
    };

    let mut class_size: HashMap<usize, usize> = HashMap::new();
    for c in colors_a.values() {
        *class_size.entry(*c).or_default() += 1;
    }
    let mut order = blanks_a.clone();
    order.sort_by_key(|x| (class_size[&colors_a[x]], *x));

    let candidates: HashMap<&BlankNode, Vec<&BlankNode>> = blanks_a
        .iter()
        .map(|x| {
            let c = colors_a[x];
            (*x, blanks_b.iter().copied().filter(|y| colors_b[y] == c).collect())
        })
        .collect();
    let mut incident: HashMap<&BlankNode, Vec<&Triple>> = HashMap::new();
    for t in &open_a {
        for term in [t.subject(), t.object()] {
            if let Term::BlankNode(bn) = term {
                let list = incident.entry(bn).or_default();
                if !list.contains(t) {
                    list.push(t);
                }
            }
        }
    }
    let target: HashSet<&Triple> = open_b.iter().copied().collect();
    let mut search = Search {
        order: &order,
        candidates: &candidates,
        incident: &incident,
        target: &target,
        mapping: HashMap::new(),
        used: HashSet::new(),
    };
    Ok(search.run(0))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Neighbour {
    Ground(Term),
    Blank(usize),
    Itself,
}

type Signature = (usize, Vec<(u8, Term, Neighbour)>);

fn signature(node: &BlankNode, triples: &[&Triple], colors: &BTreeMap<&BlankNode, usize>, prev: usize) -> Signature {
    let neighbour = |term: &Term| match term {
        Term::BlankNode(other) if other == node => Neighbour::Itself,
        Term::BlankNode(other) => Neighbour::Blank(colors.get(other).copied().unwrap_or(0)),
        ground => Neighbour::Ground(ground.clone()),
    };
    let mut edges = Vec::new();
    for t in triples {
        let as_subject = t.subject().as_blank() == Some(node);
        let as_object = t.object().as_blank() == Some(node);
        match (as_subject, as_object) {
            (true, true) => edges.push((2, t.predicate().clone(), Neighbour::Itself)),
            (true, false) => edges.push((0, t.predicate().clone(), neighbour(t.object()))),
            (false, true) => edges.push((1, t.predicate().clone(), neighbour(t.subject()))),
            (false, false) => {}
        }
    }
    edges.sort();
    (prev, edges)
}

type Coloring<'g> = BTreeMap<&'g BlankNode, usize>;

/// Colour refinement over both graphs with a shared signature table. Returns
/// `None` as soon as the colour histograms diverge.
fn refine_colors<'g>(
    open_a: &[&'g Triple],
    blanks_a: &[&'g BlankNode],
    open_b: &[&'g Triple],
    blanks_b: &[&'g BlankNode],
) -> Option<(Coloring<'g>, Coloring<'g>)> {
    let mut colors_a: Coloring<'g> = blanks_a.iter().map(|b| (*b, 0)).collect();
    let mut colors_b: Coloring<'g> = blanks_b.iter().map(|b| (*b, 0)).collect();
    let mut classes = 1;
    for _ in 0..=blanks_a.len() {
        let mut table: BTreeMap<Signature, usize> = BTreeMap::new();
        let mut recolor = |blanks: &[&'g BlankNode], triples: &[&'g Triple], colors: &Coloring<'g>| -> Coloring<'g> {
            blanks
                .iter()
                .map(|b| {
                    let sig = signature(b, triples, colors, colors[b]);
                    let next = table.len();
                    (*b, *table.entry(sig).or_insert(next))
                })
                .collect()
        };
        let next_a = recolor(blanks_a, open_a, &colors_a);
        let next_b = recolor(blanks_b, open_b, &colors_b);
        if histogram(&next_a) != histogram(&next_b) {
            return None;
        }
        let next_classes = next_a.values().collect::<BTreeSet<_>>().len();
        colors_a = next_a;
        colors_b = next_b;
        if next_classes == classes {
            break;
        }
        classes = next_classes;
    }
    Some((colors_a, colors_b))
}

fn histogram(colors: &Coloring<'_>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for c in colors.values() {
        *h.entry(*c).or_insert(0) += 1;
    }
    h
}

struct Search<'s, 'g> {
    order: &'s [&'g BlankNode],
    candidates: &'s HashMap<&'g BlankNode, Vec<&'g BlankNode>>,
    incident: &'s HashMap<&'g BlankNode, Vec<&'g Triple>>,
    target: &'s HashSet<&'g Triple>,
    mapping: HashMap<&'g BlankNode, &'g BlankNode>,
    used: HashSet<&'g BlankNode>,
}

impl<'g> Search<'_, 'g> {
    fn run(&mut self, depth: usize) -> bool {
        let Some(&node) = self.order.get(depth) else {
            return true;
        };
        for &candidate in &self.candidates[node] {
            if self.used.contains(candidate) {
                continue;
            }
            self.mapping.insert(node, candidate);
            self.used.insert(candidate);
            if self.consistent(node) && self.run(depth + 1) {
                return true;
            }
            self.mapping.remove(node);
            self.used.remove(candidate);
        }
        false
    }

    /// Every triple touching `node` whose blank nodes are all mapped must
    /// land in the target graph.
    fn consistent(&self, node: &BlankNode) -> bool {
        let Some(triples) = self.incident.get(node) else {
            return true;
        };
        triples.iter().all(|t| {
            let fully_mapped = [t.subject(), t.object()]
                .iter()
                .all(|term| term.as_blank().is_none_or(|b| self.mapping.contains_key(b)));
            if !fully_mapped {
                return true;
            }
            let image = t.map_blanks(|b| (*self.mapping[b]).clone());
            self.target.contains(&image)
        })
    }
}
