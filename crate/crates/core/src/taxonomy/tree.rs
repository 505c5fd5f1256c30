use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::CategoryPath;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub path: CategoryPath,
    pub parent: Option<NodeId>,
    pub children: BTreeMap<String, NodeId>,
    /// Some input path terminates at this node.
    pub observed: bool,
}

/// Category forest built from observed paths.
///
/// Children are kept in name order so traversal, and therefore seeded
/// sampling, is independent of input order.
#[derive(Debug, Clone, Default)]
pub struct TaxonomyTree {
    nodes: Vec<Node>,
    roots: BTreeMap<String, NodeId>,
}

pub fn build_taxonomy<'a, I>(paths: I) -> TaxonomyTree
where
    I: IntoIterator<Item = &'a CategoryPath>,
{
    let mut tree = TaxonomyTree::default();
    for path in paths {
        tree.insert(path);
    }
    tree
}

impl TaxonomyTree {
    pub fn insert(&mut self, path: &CategoryPath) -> NodeId {
        let levels = path.levels();
        let mut current = self.child_or_insert(None, &levels[..1]);
        for depth in 2..=levels.len() {
            current = self.child_or_insert(Some(current), &levels[..depth]);
        }
        self.nodes[current].observed = true;
        current
    }

    fn child_or_insert(&mut self, parent: Option<NodeId>, levels: &[String]) -> NodeId {
        let name = levels.last().expect("non-empty prefix");
        let existing = match parent {
            None => self.roots.get(name),
            Some(p) => self.nodes[p].children.get(name),
        };
        if let Some(&id) = existing {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            name: name.clone(),
            path: CategoryPath::from_levels_unchecked(levels.to_vec()),
            parent,
            children: BTreeMap::new(),
            observed: false,
        });
        match parent {
            None => self.roots.insert(name.clone(), id),
            Some(p) => self.nodes[p].children.insert(name.clone(), id),
        };
        id
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roots.values().copied()
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    pub fn find(&self, path: &CategoryPath) -> Option<NodeId> {
        let mut levels = path.levels().iter();
        let mut current = *self.roots.get(levels.next()?)?;
        for name in levels {
            current = *self.nodes[current].children.get(name)?;
        }
        Some(current)
    }

    pub fn contains_observed(&self, path: &CategoryPath) -> bool {
        self.find(path).is_some_and(|id| self.nodes[id].observed)
    }

    /// Observed nodes in the subtree rooted at `root` (inclusive), pre-order.
    pub fn observed_in_subtree(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.observed {
                out.push(id);
            }
            stack.extend(node.children.values().rev());
        }
        out
    }

    pub fn observed_leaves(&self) -> Vec<&CategoryPath> {
        self.roots()
            .flat_map(|r| self.observed_in_subtree(r))
            .map(|id| &self.nodes[id].path)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct JsonNode {
            children: Vec<JsonNode>,
            name: String,
            observed: bool,
            path: String,
        }
        fn convert(tree: &TaxonomyTree, id: NodeId) -> JsonNode {
            let node = &tree.nodes[id];
            JsonNode {
                children: node.children.values().map(|&c| convert(tree, c)).collect(),
                name: node.name.clone(),
                observed: node.observed,
                path: node.path.render(),
            }
        }
        let roots: Vec<JsonNode> = self.roots().map(|r| convert(self, r)).collect();
        serde_json::json!({
            "nodes": self.len(),
            "observed_paths": self.observed_leaves().len(),
            "roots": roots,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PathSeparator;

    fn p(s: &str) -> CategoryPath {
        CategoryPath::parse(s, PathSeparator::Angle).unwrap()
    }

    #[test]
    fn one_root_three_leaves() {
        let paths = [p("E > A > H"), p("E > A > S"), p("E > T")];
        let tree = build_taxonomy(&paths);
        assert_eq!(tree.root_count(), 1);
        assert_eq!(tree.observed_leaves().len(), 3);
    }

    #[test]
    fn single_path_is_a_chain() {
        let tree = build_taxonomy(&[p("A > B > C > D")]);
        assert_eq!(tree.len(), 4);
        let leaf = tree.find(&p("A > B > C > D")).unwrap();
        assert_eq!(tree.node(leaf).path.depth(), 4);
        assert!(!tree.contains_observed(&p("A > B")));
    }

    #[test]
    fn duplicate_paths_collapse() {
        let a = build_taxonomy(&[p("E > A > H"), p("E > A > H")]);
        let b = build_taxonomy(&[p("E > A > H")]);
        assert_eq!(a.len(), b.len());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn observed_set_reconstructs_input() {
        let mut paths = vec![p("E > A"), p("E > A > H"), p("F > X"), p("E > B > C > D")];
        let tree = build_taxonomy(&paths);
        let mut observed: Vec<CategoryPath> = tree.observed_leaves().into_iter().cloned().collect();
        observed.sort();
        paths.sort();
        assert_eq!(observed, paths);
    }

    #[test]
    fn order_independent() {
        let a = build_taxonomy(&[p("B > X"), p("A > Y"), p("A > Z")]);
        let b = build_taxonomy(&[p("A > Z"), p("B > X"), p("A > Y")]);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.observed_leaves(), b.observed_leaves());
    }
}
