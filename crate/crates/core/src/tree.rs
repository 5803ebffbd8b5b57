//! Finite full-binary labeled trees, their validity rules, and convolution.
//!
//! A tree domain is a finite, nonempty, prefix-closed set of binary paths in
//! which every node has either no children or both children. A [`SigmaTree`]
//! labels every node of such a domain. Convolution overlays a tuple of trees
//! into a single tree whose labels are [`ConvSymbol`]s, padding coordinates
//! that are absent at a node with the pad marker (`~` in text).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A base alphabet symbol.
pub type Symbol = String;

/// Text spelling of the pad marker.
pub const PAD: &str = "~";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("node {0} is present but its parent is not")]
    NotPrefixClosed(NodePath),
    #[error("node {0} is missing although its sibling is present")]
    MissingSibling(NodePath),
    #[error("the empty tree is not a valid tree")]
    EmptyTree,
    #[error("coordinate {index} does not project to a valid tree: {reason}")]
    InvalidProjection { index: usize, reason: String },
    #[error("convolution needs at least one tree")]
    EmptyTuple,
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
}

/// Path from the root: `false` is the left child, `true` the right child.
///
/// The derived order is lexicographic with prefixes first, i.e. preorder.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodePath(Vec<bool>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        NodePath(bits.to_vec())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, right: bool) -> Self {
        let mut bits = self.0.clone();
        bits.push(right);
        NodePath(bits)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(NodePath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn sibling(&self) -> Option<Self> {
        let (last, init) = self.0.split_last()?;
        let mut bits = init.to_vec();
        bits.push(!last);
        Some(NodePath(bits))
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for NodePath {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "λ" || s.is_empty() {
            return Ok(NodePath::root());
        }
        s.bytes()
            .enumerate()
            .map(|(pos, b)| match b {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(TreeError::Syntax {
                    pos,
                    msg: "path bits must be 0 or 1".into(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(NodePath)
    }
}

/// A validated tree domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDomain(BTreeSet<NodePath>);

impl TreeDomain {
    /// Checks nonemptiness, prefix closure and the full-binary rule.
    pub fn validate<I: IntoIterator<Item = NodePath>>(nodes: I) -> Result<Self, TreeError> {
        let nodes: BTreeSet<NodePath> = nodes.into_iter().collect();
        if nodes.is_empty() {
            return Err(TreeError::EmptyTree);
        }
        for node in &nodes {
            if let Some(parent) = node.parent() {
                if !nodes.contains(&parent) {
                    return Err(TreeError::NotPrefixClosed(node.clone()));
                }
                let sibling = node.sibling().expect("non-root has a sibling");
                if !nodes.contains(&sibling) {
                    return Err(TreeError::MissingSibling(sibling));
                }
            }
        }
        Ok(TreeDomain(nodes))
    }

    pub fn nodes(&self) -> &BTreeSet<NodePath> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, p: &NodePath) -> bool {
        self.0.contains(p)
    }

    pub fn is_leaf(&self, p: &NodePath) -> bool {
        self.0.contains(p) && !self.0.contains(&p.child(false))
    }

    pub fn leaf_count(&self) -> usize {
        self.0.iter().filter(|p| self.is_leaf(p)).count()
    }
}

/// A finite full-binary tree with labels of type `S` on every node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SigmaTree<S> {
    Leaf(S),
    Node(S, Box<SigmaTree<S>>, Box<SigmaTree<S>>),
}

impl<S> SigmaTree<S> {
    pub fn leaf(label: S) -> Self {
        SigmaTree::Leaf(label)
    }

    pub fn node(label: S, left: SigmaTree<S>, right: SigmaTree<S>) -> Self {
        SigmaTree::Node(label, Box::new(left), Box::new(right))
    }

    pub fn label(&self) -> &S {
        match self {
            SigmaTree::Leaf(s) | SigmaTree::Node(s, _, _) => s,
        }
    }

    pub fn children(&self) -> Option<(&SigmaTree<S>, &SigmaTree<S>)> {
        match self {
            SigmaTree::Leaf(_) => None,
            SigmaTree::Node(_, l, r) => Some((l, r)),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, SigmaTree::Leaf(_))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            SigmaTree::Leaf(_) => 1,
            SigmaTree::Node(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SigmaTree::Leaf(_) => 0,
            SigmaTree::Node(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Nodes with their labels, in preorder (which is path order).
    pub fn preorder(&self) -> Vec<(NodePath, &S)> {
        fn go<'a, S>(t: &'a SigmaTree<S>, path: &mut Vec<bool>, out: &mut Vec<(NodePath, &'a S)>) {
            out.push((NodePath(path.clone()), t.label()));
            if let Some((l, r)) = t.children() {
                path.push(false);
                go(l, path, out);
                path.pop();
                path.push(true);
                go(r, path, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn domain(&self) -> TreeDomain {
        TreeDomain(self.preorder().into_iter().map(|(p, _)| p).collect())
    }

    pub fn subtree(&self, path: &NodePath) -> Option<&SigmaTree<S>> {
        let mut t = self;
        for &b in path.bits() {
            let (l, r) = t.children()?;
            t = if b { r } else { l };
        }
        Some(t)
    }

    pub fn get(&self, path: &NodePath) -> Option<&S> {
        self.subtree(path).map(|t| t.label())
    }

    pub fn map<T>(&self, f: &mut impl FnMut(&S) -> T) -> SigmaTree<T> {
        match self {
            SigmaTree::Leaf(s) => SigmaTree::Leaf(f(s)),
            SigmaTree::Node(s, l, r) => {
                let s = f(s);
                let l = l.map(f);
                let r = r.map(f);
                SigmaTree::node(s, l, r)
            }
        }
    }

    /// Builds a tree over a validated domain.
    pub fn from_domain(domain: &TreeDomain, label: &mut impl FnMut(&NodePath) -> S) -> Self {
        fn go<S>(d: &TreeDomain, p: NodePath, label: &mut impl FnMut(&NodePath) -> S) -> SigmaTree<S> {
            let s = label(&p);
            if d.contains(&p.child(false)) {
                let l = go(d, p.child(false), label);
                let r = go(d, p.child(true), label);
                SigmaTree::node(s, l, r)
            } else {
                SigmaTree::Leaf(s)
            }
        }
        go(domain, NodePath::root(), label)
    }
}

impl<S: fmt::Display> fmt::Display for SigmaTree<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaTree::Leaf(s) => write!(f, "{s}"),
            SigmaTree::Node(s, l, r) => write!(f, "{s}({l},{r})"),
        }
    }
}

fn is_symbol_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'~' || b == b'|'
}

/// Parses the term syntax `sym` / `sym(left,right)`, mapping every symbol
/// through `label`.
pub fn parse_tree_with<S>(
    text: &str,
    label: &mut impl FnMut(&str, usize) -> Result<S, TreeError>,
) -> Result<SigmaTree<S>, TreeError> {
    struct P<'a> {
        s: &'a [u8],
        pos: usize,
    }
    impl P<'_> {
        fn err<T>(&self, msg: &str) -> Result<T, TreeError> {
            Err(TreeError::Syntax {
                pos: self.pos,
                msg: msg.into(),
            })
        }
        fn expect(&mut self, c: u8) -> Result<(), TreeError> {
            if self.s.get(self.pos) == Some(&c) {
                self.pos += 1;
                Ok(())
            } else {
                self.err(&format!("expected '{}'", c as char))
            }
        }
        fn tree<S>(
            &mut self,
            label: &mut impl FnMut(&str, usize) -> Result<S, TreeError>,
        ) -> Result<SigmaTree<S>, TreeError> {
            let start = self.pos;
            while self.pos < self.s.len() && is_symbol_byte(self.s[self.pos]) {
                self.pos += 1;
            }
            if self.pos == start {
                return self.err("expected a symbol");
            }
            let sym = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
            let sym = label(sym, start)?;
            if self.s.get(self.pos) == Some(&b'(') {
                self.pos += 1;
                let l = self.tree(label)?;
                self.expect(b',')?;
                let r = self.tree(label)?;
                self.expect(b')')?;
                Ok(SigmaTree::node(sym, l, r))
            } else {
                Ok(SigmaTree::Leaf(sym))
            }
        }
    }
    let mut p = P {
        s: text.as_bytes(),
        pos: 0,
    };
    let t = p.tree(label)?;
    if p.pos != p.s.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

impl FromStr for SigmaTree<Symbol> {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tree_with(s, &mut |sym, pos| {
            if sym.bytes().any(|b| b == b'~' || b == b'|') {
                Err(TreeError::Syntax {
                    pos,
                    msg: format!("'{sym}' is not a base symbol"),
                })
            } else {
                Ok(sym.to_string())
            }
        })
    }
}

impl FromStr for SigmaTree<ConvSymbol> {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_tree_with(s, &mut |sym, pos| {
            sym.parse::<ConvSymbol>().map_err(|e| match e {
                TreeError::Syntax { msg, .. } => TreeError::Syntax { pos, msg },
                other => other,
            })
        })
    }
}

/// A convolution symbol: one part per coordinate, `None` being the pad.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConvSymbol(pub Vec<Option<Symbol>>);

impl ConvSymbol {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn part(&self, i: usize) -> Option<&Symbol> {
        self.0.get(i).and_then(|p| p.as_ref())
    }
}

impl fmt::Display for ConvSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, part) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            f.write_str(part.as_deref().unwrap_or(PAD))?;
        }
        Ok(())
    }
}

impl FromStr for ConvSymbol {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = Vec::new();
        for part in s.split('|') {
            if part == PAD {
                parts.push(None);
            } else if !part.is_empty() && part.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                parts.push(Some(part.to_string()));
            } else {
                return Err(TreeError::Syntax {
                    pos: 0,
                    msg: format!("bad convolution part '{part}'"),
                });
            }
        }
        if parts.iter().all(Option::is_none) {
            return Err(TreeError::Syntax {
                pos: 0,
                msg: "convolution symbol with only pads".into(),
            });
        }
        Ok(ConvSymbol(parts))
    }
}

/// Overlays the trees; a coordinate absent at a node is padded.
pub fn convolve(trees: &[&SigmaTree<Symbol>]) -> Result<SigmaTree<ConvSymbol>, TreeError> {
    fn go(nodes: &[Option<&SigmaTree<Symbol>>]) -> SigmaTree<ConvSymbol> {
        let label = ConvSymbol(nodes.iter().map(|t| t.map(|t| t.label().clone())).collect());
        let kids: Vec<Option<(&SigmaTree<Symbol>, &SigmaTree<Symbol>)>> =
            nodes.iter().map(|t| t.and_then(|t| t.children())).collect();
        if kids.iter().all(Option::is_none) {
            return SigmaTree::Leaf(label);
        }
        let left: Vec<_> = kids.iter().map(|k| k.map(|(l, _)| l)).collect();
        let right: Vec<_> = kids.iter().map(|k| k.map(|(_, r)| r)).collect();
        SigmaTree::node(label, go(&left), go(&right))
    }
    if trees.is_empty() {
        return Err(TreeError::EmptyTuple);
    }
    let nodes: Vec<_> = trees.iter().map(|t| Some(*t)).collect();
    Ok(go(&nodes))
}

/// Recovers coordinate `index` of a convolution.
pub fn split(conv: &SigmaTree<ConvSymbol>, index: usize) -> Result<SigmaTree<Symbol>, TreeError> {
    let mut nodes = Vec::new();
    let mut labels = std::collections::BTreeMap::new();
    for (path, sym) in conv.preorder() {
        if index >= sym.arity() {
            return Err(TreeError::InvalidProjection {
                index,
                reason: format!("symbol {sym} has only {} parts", sym.arity()),
            });
        }
        if let Some(s) = sym.part(index) {
            labels.insert(path.clone(), s.clone());
            nodes.push(path);
        }
    }
    let domain = TreeDomain::validate(nodes).map_err(|e| match e {
        TreeError::EmptyTree => TreeError::EmptyTree,
        other => TreeError::InvalidProjection {
            index,
            reason: other.to_string(),
        },
    })?;
    Ok(SigmaTree::from_domain(&domain, &mut |p| labels[p].clone()))
}

/// All full-binary shapes with exactly `n` nodes, in path-list order.
pub fn shapes(n: usize) -> Vec<SigmaTree<()>> {
    fn all(n: usize) -> Vec<SigmaTree<()>> {
        if n == 1 {
            return vec![SigmaTree::Leaf(())];
        }
        let mut out = Vec::new();
        let mut nl = 1;
        while nl + 1 < n {
            for l in all(nl) {
                for r in all(n - 1 - nl) {
                    out.push(SigmaTree::node((), l.clone(), r));
                }
            }
            nl += 2;
        }
        out
    }
    if n % 2 == 0 {
        return Vec::new();
    }
    let mut v: Vec<(Vec<NodePath>, SigmaTree<()>)> = all(n)
        .into_iter()
        .map(|t| (t.preorder().into_iter().map(|(p, _)| p).collect(), t))
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v.into_iter().map(|(_, t)| t).collect()
}

/// Every tree over `alphabet` with at most `max_nodes` nodes, ordered by
/// node count, then path list, then the label sequence in preorder.
pub fn enumerate_trees(alphabet: &[Symbol], max_nodes: usize) -> Vec<SigmaTree<Symbol>> {
    let mut alpha: Vec<Symbol> = alphabet.to_vec();
    alpha.sort();
    alpha.dedup();
    let mut out = Vec::new();
    if alpha.is_empty() {
        return out;
    }
    let mut n = 1;
    while n <= max_nodes {
        for shape in shapes(n) {
            let mut digits = vec![0usize; n];
            loop {
                let mut it = digits.iter();
                out.push(shape.map(&mut |_| alpha[*it.next().expect("one digit per node")].clone()));
                // odometer, last preorder position fastest
                let Some(pos) = (0..n).rev().find(|&i| digits[i] + 1 < alpha.len()) else {
                    break;
                };
                digits[pos] += 1;
                digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
            }
        }
        n += 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> NodePath {
        s.parse().unwrap()
    }

    fn t(s: &str) -> SigmaTree<Symbol> {
        s.parse().unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(TreeDomain::validate([p("")]).is_ok());
        assert!(TreeDomain::validate([p(""), p("0"), p("1")]).is_ok());
        assert_eq!(
            TreeDomain::validate([p(""), p("0")]),
            Err(TreeError::MissingSibling(p("1")))
        );
        assert_eq!(
            TreeDomain::validate([p(""), p("00"), p("01")]),
            Err(TreeError::NotPrefixClosed(p("00")))
        );
        assert_eq!(TreeDomain::validate([]), Err(TreeError::EmptyTree));
    }

    #[test]
    fn term_syntax_round_trip() {
        let tree = t("1(0,1)");
        assert_eq!(tree.size(), 3);
        assert_eq!(tree.to_string(), "1(0,1)");
        assert_eq!(tree.get(&p("1")), Some(&"1".to_string()));
        assert!("1(0,1".parse::<SigmaTree<Symbol>>().is_err());
        assert!("1(0,1)x".parse::<SigmaTree<Symbol>>().is_err());
        assert!("~".parse::<SigmaTree<Symbol>>().is_err());
    }

    #[test]
    fn convolve_pads_missing_nodes() {
        let a = t("a");
        let b = t("b(c,d)");
        let c = convolve(&[&a, &b]).unwrap();
        assert_eq!(c.to_string(), "a|b(~|c,~|d)");
        let same = convolve(&[&b, &b]).unwrap();
        for (_, sym) in same.preorder() {
            assert_eq!(sym.0[0], sym.0[1]);
        }
    }

    #[test]
    fn split_recovers_coordinates() {
        let a = t("a");
        let b = t("b(c,d(e,f))");
        let c = convolve(&[&a, &b]).unwrap();
        assert_eq!(split(&c, 0).unwrap(), a);
        assert_eq!(split(&c, 1).unwrap(), b);
        let bad: SigmaTree<ConvSymbol> = "a|~(b|~,c|~)".parse().unwrap();
        assert_eq!(split(&bad, 1), Err(TreeError::EmptyTree));
        let broken: SigmaTree<ConvSymbol> = "a|~(b|x,c|~)".parse().unwrap();
        assert!(matches!(split(&broken, 1), Err(TreeError::InvalidProjection { .. })));
    }

    #[test]
    fn enumeration_counts() {
        let a = vec!["a".to_string()];
        assert_eq!(enumerate_trees(&a, 1).len(), 1);
        let trees = enumerate_trees(&a, 3);
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[1].to_string(), "a(a,a)");
        let ab = vec!["a".to_string(), "b".to_string()];
        assert_eq!(enumerate_trees(&ab, 3).len(), 10);
        // catalan(j) * 2^(2j+1) for j = 0..=3
        assert_eq!(enumerate_trees(&ab, 7).len(), 2 + 8 + 2 * 32 + 5 * 128);
    }

    #[test]
    fn enumeration_order_prefers_left_deep_shapes() {
        let s = shapes(5);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].map(&mut |_| "x").to_string(), "x(x(x,x),x)");
        let ab = vec!["b".to_string(), "a".to_string()];
        let trees = enumerate_trees(&ab, 3);
        assert_eq!(trees[0].to_string(), "a");
        assert_eq!(trees[2].to_string(), "a(a,a)");
        assert_eq!(trees[3].to_string(), "a(a,b)");
    }

    #[test]
    fn leaves_exceed_internal_nodes_by_one() {
        let ab = vec!["a".to_string(), "b".to_string()];
        for tree in enumerate_trees(&ab, 7) {
            let d = tree.domain();
            assert_eq!(d.leaf_count(), d.len() - d.leaf_count() + 1);
        }
    }
}
