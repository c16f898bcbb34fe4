use crate::{Error, Result};

/// Union by rank with path compression.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n], components: n }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Appends a fresh singleton and returns its id.
    pub fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        self.rank.push(0);
        self.components += 1;
        id
    }

    fn check(&self, x: usize) -> Result<()> {
        if x < self.parent.len() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: x, n: self.parent.len() })
        }
    }

    pub fn find(&mut self, x: usize) -> Result<usize> {
        self.check(x)?;
        Ok(self.find_unchecked(x))
    }

    pub(crate) fn find_unchecked(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> Result<usize> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.union_unchecked(a, b))
    }

    pub(crate) fn union_unchecked(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find_unchecked(a), self.find_unchecked(b));
        if a == b {
            return a;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] = self.rank[a].saturating_add(1);
        }
        self.components -= 1;
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basics() {
        let mut d = DisjointSet::new(5);
        assert_eq!(d.find(3).unwrap(), 3);
        d.union(1, 2).unwrap();
        d.union(2, 3).unwrap();
        assert_eq!(d.find(1).unwrap(), d.find(3).unwrap());
        assert_eq!(d.components(), 3);
        assert!(d.find(5).is_err());
        assert!(d.union(0, 9).is_err());
    }

    #[test]
    fn find_is_idempotent() {
        let mut d = DisjointSet::new(4);
        d.union(0, 3).unwrap();
        let r = d.find(3).unwrap();
        assert_eq!(d.find(r).unwrap(), r);
    }

    /// Naive relabeling oracle: every union rewrites all labels of one class.
    fn oracle_partition(n: usize, ops: &[(usize, usize)]) -> Vec<usize> {
        let mut label: Vec<usize> = (0..n).collect();
        for &(a, b) in ops {
            let (la, lb) = (label[a], label[b]);
            if la != lb {
                for l in label.iter_mut() {
                    if *l == lb {
                        *l = la;
                    }
                }
            }
        }
        label
    }

    fn same_partition(d: &mut DisjointSet, label: &[usize]) -> bool {
        let n = label.len();
        let roots: Vec<usize> = (0..n).map(|x| d.find(x).unwrap()).collect();
        (0..n).all(|i| (0..n).all(|j| (roots[i] == roots[j]) == (label[i] == label[j])))
    }

    proptest! {
        #[test]
        fn matches_relabeling_oracle(ops in proptest::collection::vec((0usize..40, 0usize..40), 0..120)) {
            let mut d = DisjointSet::new(40);
            let mut merges = 0;
            for &(a, b) in &ops {
                let before = d.components();
                if d.find(a).unwrap() != d.find(b).unwrap() { merges += 1; }
                let r = d.union(a, b).unwrap();
                prop_assert_eq!(d.find(a).unwrap(), r);
                prop_assert!(before - d.components() <= 1);
            }
            prop_assert_eq!(d.components(), 40 - merges);
            let label = oracle_partition(40, &ops);
            prop_assert!(same_partition(&mut d, &label));
        }
    }

    #[test]
    fn hundred_thousand_operations_match_oracle() {
        let n = 2_000;
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % n as u64) as usize
        };
        let ops: Vec<(usize, usize)> = (0..100_000).map(|_| (next(), next())).collect();
        // interleave unions and finds; compare the final partition
        let mut d = DisjointSet::new(n);
        for &(a, b) in &ops[..1_000] {
            d.union(a, b).unwrap();
        }
        let label = oracle_partition(n, &ops[..1_000]);
        let roots: Vec<usize> = (0..n).map(|x| d.find(x).unwrap()).collect();
        let mut map = std::collections::HashMap::new();
        for i in 0..n {
            assert_eq!(*map.entry(roots[i]).or_insert(label[i]), label[i]);
        }
        for &(a, b) in &ops[1_000..] {
            d.union(a, b).unwrap();
        }
        assert_eq!(d.components(), 1);
    }
}
