use crate::egraph::EClassId;

/// Union-find over dense e-class ids. The lower id always becomes the root.
#[derive(Clone, Debug, Default)]
pub struct UnionFind {
    parents: Vec<EClassId>,
}

impl UnionFind {
    pub fn make_set(&mut self) -> EClassId {
        let id = EClassId::from_index(self.parents.len());
        self.parents.push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn contains(&self, id: EClassId) -> bool {
        id.index() < self.parents.len()
    }

    pub fn parent(&self, id: EClassId) -> EClassId {
        self.parents[id.index()]
    }

    /// Finds the root without mutating.
    pub fn find(&self, mut id: EClassId) -> EClassId {
        loop {
            let parent = self.parents[id.index()];
            if parent == id {
                return id;
            }
            id = parent;
        }
    }

    /// Finds the root, halving the path on the way.
    pub fn find_mut(&mut self, mut id: EClassId) -> EClassId {
        loop {
            let parent = self.parents[id.index()];
            if parent == id {
                return id;
            }
            let grand = self.parents[parent.index()];
            self.parents[id.index()] = grand;
            id = grand;
        }
    }

    /// Merges the sets of `a` and `b`, returning `(root, merged)` where
    /// `merged` is the old root that was attached below `root`, if any.
    pub fn union(&mut self, a: EClassId, b: EClassId) -> (EClassId, Option<EClassId>) {
        let a = self.find_mut(a);
        let b = self.find_mut(b);
        if a == b {
            return (a, None);
        }
        let (root, child) = if a < b { (a, b) } else { (b, a) };
        self.parents[child.index()] = root;
        (root, Some(child))
    }
}
