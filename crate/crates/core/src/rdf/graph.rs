use std::collections::{BTreeMap, BTreeSet};

use super::term::{BlankNode, Iri, Term, Triple};

/// A finite set of triples, iterated in the fixed term order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a triple. Returns false when it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    /// Consuming variant of [`Graph::insert`].
    pub fn with(mut self, triple: Triple) -> Self {
        self.triples.insert(triple);
        self
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Triple> + ExactSizeIterator + '_ {
        self.triples.iter()
    }

    /// Triples matching every bound position, in graph order. `None` is a wildcard.
    pub fn query<'g: 'q, 'q>(
        &'g self,
        subject: Option<&'q Term>,
        predicate: Option<&'q Term>,
        object: Option<&'q Term>,
    ) -> impl Iterator<Item = &'g Triple> + 'q {
        self.triples.iter().filter(move |t| {
            subject.is_none_or(|s| t.subject() == s)
                && predicate.is_none_or(|p| t.predicate() == p)
                && object.is_none_or(|o| t.object() == o)
        })
    }

    /// Objects of `(subject, predicate, ·)`, in graph order.
    pub fn objects<'g: 'q, 'q>(
        &'g self,
        subject: &'q Term,
        predicate: &'q Term,
    ) -> impl Iterator<Item = &'g Term> + 'q {
        self.query(Some(subject), Some(predicate), None).map(Triple::object)
    }

    /// Distinct blank nodes, in label order.
    pub fn blank_nodes(&self) -> BTreeSet<&BlankNode> {
        self.triples
            .iter()
            .flat_map(|t| [t.subject(), t.object()])
            .filter_map(Term::as_blank)
            .collect()
    }

    pub fn is_subset(&self, other: &Graph) -> bool {
        self.triples.is_subset(&other.triples)
    }

    /// Triples of `self` not in `other`.
    pub fn difference(&self, other: &Graph) -> Graph {
        self.triples.difference(&other.triples).cloned().collect()
    }

    /// Renames blank nodes through `rename`; labels absent from the map are kept.
    pub fn rename_blanks(&self, rename: &BTreeMap<BlankNode, BlankNode>) -> Graph {
        self.triples
            .iter()
            .map(|t| t.map_blanks(|b| rename.get(b).cloned().unwrap_or_else(|| b.clone())))
            .collect()
    }

    /// Rewrites every IRI that starts with `old` to start with `new` instead.
    pub fn rebase(&self, old: &str, new: &str) -> Graph {
        self.triples
            .iter()
            .map(|t| {
                t.map_iris(|i| match i.as_str().strip_prefix(old) {
                    Some(rest) => Iri::new(format!("{new}{rest}")).unwrap_or_else(|_| i.clone()),
                    None => i.clone(),
                })
            })
            .collect()
    }

    /// Set union after renaming `other`'s blank nodes apart from `self`'s.
    pub fn merge(&self, other: &Graph) -> Graph {
        let ours: BTreeSet<BlankNode> = self.blank_nodes().into_iter().cloned().collect();
        let theirs: BTreeSet<BlankNode> = other.blank_nodes().into_iter().cloned().collect();
        let mut taken: BTreeSet<BlankNode> = ours.union(&theirs).cloned().collect();
        let mut rename = BTreeMap::new();
        for label in theirs.iter().filter(|b| ours.contains(*b)) {
            let mut n = 1usize;
            let fresh = loop {
                let candidate =
                    BlankNode::new(format!("{}{n}", label.label())).expect("alphanumeric suffix keeps label valid");
                if !taken.contains(&candidate) {
                    break candidate;
                }
                n += 1;
            };
            taken.insert(fresh.clone());
            rename.insert(label.clone(), fresh);
        }
        let mut merged = self.clone();
        merged.extend(other.rename_blanks(&rename));
        merged
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
        }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        self.triples.extend(iter);
    }
}

impl IntoIterator for Graph {
    type Item = Triple;
    type IntoIter = std::collections::btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::ore;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn t(s: Term, p: &str, o: Term) -> Triple {
        Triple::new(s, iri(p), o).unwrap()
    }

    #[test]
    fn rebase_rewrites_matching_iris_only() {
        let g: Graph = [
            t(iri("http://a.org/rem"), "http://a.org/p", iri("http://b.org/x")),
            t(
                iri("http://a.org/x"),
                "http://c.org/p",
                Term::string("http://a.org/lit"),
            ),
        ]
        .into_iter()
        .collect();
        let expected: Graph = [
            t(iri("http://n.net/v/rem"), "http://n.net/v/p", iri("http://b.org/x")),
            t(
                iri("http://n.net/v/x"),
                "http://c.org/p",
                Term::string("http://a.org/lit"),
            ),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.rebase("http://a.org/", "http://n.net/v/"), expected);
        assert_eq!(g.rebase("urn:none:", "http://n.net/"), g);
    }

    fn sample() -> (Graph, Vec<Triple>) {
        let a = iri("http://x.org/A");
        let all = vec![
            t(iri("http://x.org/R"), ore::DESCRIBES, a.clone()),
            t(a.clone(), ore::AGGREGATES, iri("http://x.org/r1")),
            t(a.clone(), ore::AGGREGATES, iri("http://x.org/r2")),
            t(a.clone(), "http://x.org/title", Term::string("T")),
            t(iri("http://x.org/r1"), "http://x.org/rel", iri("http://x.org/r3")),
        ];
        (all.iter().cloned().collect(), all)
    }

    #[test]
    fn insert_is_set_insertion() {
        let (_, all) = sample();
        let mut g = Graph::new();
        assert!(g.insert(all[0].clone()));
        assert_eq!(g.len(), 1);
        assert!(!g.insert(all[0].clone()));
        assert_eq!(g.len(), 1);
        g.insert(all[1].clone());
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn query_wildcards() {
        let (g, all) = sample();
        assert_eq!(g.query(None, None, None).count(), 5);
        assert_eq!(
            Graph::new().query(Some(&all[0].subject().clone()), None, None).count(),
            0
        );
    }

    #[test]
    fn query_by_predicate_matches_linear_scan() {
        let (g, all) = sample();
        let p = iri(ore::AGGREGATES);
        let mut expected: Vec<&Triple> = all.iter().filter(|t| t.predicate() == &p).collect();
        expected.sort();
        let got: Vec<&Triple> = g.query(None, Some(&p), None).collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn iteration_is_sorted() {
        let (g, _) = sample();
        let v: Vec<_> = g.iter().collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v, g.iter().collect::<Vec<_>>());
    }

    #[test]
    fn merge_identity() {
        let (g, _) = sample();
        assert_eq!(g.merge(&Graph::new()), g);
        assert_eq!(Graph::new().merge(&g), g);
    }

    #[test]
    fn merge_renames_shared_blank_apart() {
        let x = Term::blank("x").unwrap();
        let a: Graph = [t(x.clone(), "http://x.org/p", Term::string("a"))]
            .into_iter()
            .collect();
        let b: Graph = [t(x.clone(), "http://x.org/q", Term::string("b"))]
            .into_iter()
            .collect();
        let m = a.merge(&b);
        assert_eq!(m.len(), a.len() + b.len());
        assert_eq!(m.blank_nodes().len(), 2);
        assert!(m.is_subset(&m));
        assert!(a.is_subset(&m));
    }

    #[test]
    fn merge_fresh_label_avoids_existing_labels() {
        let x = Term::blank("x").unwrap();
        let x1 = Term::blank("x1").unwrap();
        let a: Graph = [t(x.clone(), "http://x.org/p", x1.clone())].into_iter().collect();
        let b: Graph = [t(x.clone(), "http://x.org/q", Term::string("b"))]
            .into_iter()
            .collect();
        let m = a.merge(&b);
        assert_eq!(m.blank_nodes().len(), 3);
    }
}
