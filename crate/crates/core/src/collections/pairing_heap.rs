/// A max pairing heap with O(1) insert and merge and O(log n) amortized
/// extract-max.
///
/// Propagations that meet at a saddle hand their heaps over in constant time,
/// which keeps the overall region discovery linearithmic. Equal priorities are
/// tolerated (heaps merged from propagations may hold the same vertex twice);
/// extraction order is then non-increasing.
pub struct MergeableHeap<P: Ord, T> {
    root: Option<Box<Node<P, T>>>,
    len: usize,
}

struct Node<P, T> {
    priority: P,
    payload: T,
    children: Vec<Box<Node<P, T>>>,
}

fn link<P: Ord, T>(mut a: Box<Node<P, T>>, mut b: Box<Node<P, T>>) -> Box<Node<P, T>> {
    if a.priority >= b.priority {
        a.children.push(b);
        a
    } else {
        b.children.push(a);
        b
    }
}

impl<P: Ord, T> Default for MergeableHeap<P, T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<P: Ord, T> MergeableHeap<P, T> {
    pub fn new() -> Self {
        Self { root: None, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn peek(&self) -> Option<(&P, &T)> {
        self.root.as_ref().map(|r| (&r.priority, &r.payload))
    }

    pub fn insert(&mut self, priority: P, payload: T) {
        let node = Box::new(Node { priority, payload, children: Vec::new() });
        self.root = Some(match self.root.take() {
            None => node,
            Some(root) => link(root, node),
        });
        self.len += 1;
    }

    /// Absorbs `other`; it is consumed.
    pub fn merge(&mut self, mut other: Self) {
        let Some(theirs) = other.root.take() else {
            return;
        };
        self.len += std::mem::take(&mut other.len);
        self.root = Some(match self.root.take() {
            None => theirs,
            Some(ours) => link(ours, theirs),
        });
    }

    pub fn pop(&mut self) -> Option<(P, T)> {
        let root = self.root.take()?;
        self.len -= 1;
        let Node { priority, payload, children } = *root;
        self.root = Self::combine(children);
        Some((priority, payload))
    }

    /// Standard two-pass pairing: link neighbours left to right, then fold the
    /// pairs right to left.
    fn combine(children: Vec<Box<Node<P, T>>>) -> Option<Box<Node<P, T>>> {
        let mut pairs = Vec::with_capacity(children.len() / 2 + 1);
        let mut it = children.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => pairs.push(link(a, b)),
                None => pairs.push(a),
            }
        }
        let mut acc = pairs.pop()?;
        while let Some(p) = pairs.pop() {
            acc = link(p, acc);
        }
        Some(acc)
    }
}

impl<P: Ord, T> Drop for MergeableHeap<P, T> {
    // The default recursive drop overflows the stack on long child chains.
    fn drop(&mut self) {
        let mut stack: Vec<Box<Node<P, T>>> = self.root.take().into_iter().collect();
        while let Some(mut node) = stack.pop() {
            stack.append(&mut node.children);
        }
    }
}
