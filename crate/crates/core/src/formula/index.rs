use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::Formula;

/// Position of a distinct subformula in post-order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct FormulaId(pub usize);

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One subformula with its operands replaced by ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    Atom(String),
    NegAtom(String),
    Or(FormulaId, FormulaId),
    And(FormulaId, FormulaId),
    Until(FormulaId, FormulaId),
    Next(FormulaId),
    WeakNext(FormulaId),
    Eventually(FormulaId),
    Always(FormulaId),
}

impl Node {
    pub fn operands(&self) -> Vec<FormulaId> {
        match *self {
            Node::True | Node::Atom(_) | Node::NegAtom(_) => vec![],
            Node::Or(l, r) | Node::And(l, r) | Node::Until(l, r) => vec![l, r],
            Node::Next(s) | Node::WeakNext(s) | Node::Eventually(s) | Node::Always(s) => vec![s],
        }
    }
}

/// Distinct subformulae of a formula in post-order. Structurally equal
/// subformulae share one entry, and every operand id is smaller than the id of
/// the formula using it, so the root has the largest id.
#[derive(Debug, Clone)]
pub struct SubformulaIndex {
    formulas: Vec<Formula>,
    nodes: Vec<Node>,
    ids: HashMap<Formula, FormulaId>,
}

impl SubformulaIndex {
    pub fn new(root: &Formula) -> Self {
        let mut index = SubformulaIndex { formulas: Vec::new(), nodes: Vec::new(), ids: HashMap::new() };
        index.insert(root);
        index
    }

    fn insert(&mut self, f: &Formula) -> FormulaId {
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        let node = match f {
            Formula::True => Node::True,
            Formula::Atom(a) => Node::Atom(a.clone()),
            Formula::NegAtom(a) => Node::NegAtom(a.clone()),
            Formula::Or(l, r) => Node::Or(self.insert(l), self.insert(r)),
            Formula::And(l, r) => Node::And(self.insert(l), self.insert(r)),
            Formula::Until(l, r) => Node::Until(self.insert(l), self.insert(r)),
            Formula::Next(s) => Node::Next(self.insert(s)),
            Formula::WeakNext(s) => Node::WeakNext(self.insert(s)),
            Formula::Eventually(s) => Node::Eventually(self.insert(s)),
            Formula::Always(s) => Node::Always(self.insert(s)),
        };
        let id = FormulaId(self.formulas.len());
        self.formulas.push(f.clone());
        self.nodes.push(node);
        self.ids.insert(f.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn root(&self) -> FormulaId {
        FormulaId(self.formulas.len() - 1)
    }

    pub fn formula(&self, id: FormulaId) -> &Formula {
        &self.formulas[id.0]
    }

    pub fn node(&self, id: FormulaId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn id_of(&self, f: &Formula) -> Option<FormulaId> {
        self.ids.get(f).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = FormulaId> {
        (0..self.formulas.len()).map(FormulaId)
    }

    /// Subformulae in post-order.
    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }
}

/// Post-order enumeration of the distinct subformulae of `f`.
pub fn subformulas(f: &Formula) -> SubformulaIndex {
    SubformulaIndex::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn post_order_of_worked_example() {
        let idx = subformulas(&parse_formula("a | F b").unwrap());
        let shown: Vec<String> = idx.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["a", "b", "F b", "a | F b"]);
        assert_eq!(idx.root(), FormulaId(3));
        assert_eq!(idx.node(FormulaId(2)), &Node::Eventually(FormulaId(1)));
    }

    #[test]
    fn single_atom() {
        let idx = subformulas(&Formula::atom("a"));
        assert_eq!(idx.len(), 1);
        assert_eq!(idx.root(), FormulaId(0));
    }

    #[test]
    fn duplicates_share_an_entry() {
        let idx = subformulas(&parse_formula("a & a").unwrap());
        let shown: Vec<String> = idx.formulas().iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, ["a", "a & a"]);
        assert_eq!(idx.node(FormulaId(1)), &Node::And(FormulaId(0), FormulaId(0)));

        let idx = subformulas(&parse_formula("X a | F X a").unwrap());
        assert_eq!(idx.len(), 4);
    }
}
