//! Triangulation connectivity.
//!
//! Regular grids use the Freudenthal (Kuhn) triangulation: every square is cut
//! along its `(+x, +y)` diagonal and every cube into six tetrahedra sharing the
//! main diagonal `(x, y, z) -> (x + 1, y + 1, z + 1)`. The connectivity is
//! implicit, so grids of 10^8 vertices cost nothing beyond their dimensions.
//! Explicit meshes are 2-manifold triangle soups with precomputed stars.

mod off;
pub mod shapes;

use std::collections::HashMap;
use std::sync::OnceLock;

use smallvec::SmallVec;

use crate::{Error, Result};

pub use off::{load_off, write_off};

pub type VertexId = usize;

/// Neighbor list of one vertex. 14 covers the 3D Freudenthal stencil.
pub type Neighbors = SmallVec<[VertexId; 14]>;

/// The star of a vertex: its neighbors, and the link edges expressed as
/// index pairs into `neighbors`.
#[derive(Debug, Clone, Default)]
pub struct Star {
    pub neighbors: Neighbors,
    pub link: SmallVec<[(u8, u8); 36]>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshKind {
    Grid { dims: Vec<usize> },
    Explicit { coords: Vec<[f64; 3]>, triangles: Vec<[VertexId; 3]> },
}

#[derive(Debug, Clone)]
struct ExplicitStars {
    offsets: Vec<usize>,
    neighbors: Vec<VertexId>,
    link_offsets: Vec<usize>,
    link: Vec<(u8, u8)>,
    closed: bool,
}

#[derive(Debug, Clone)]
pub struct Triangulation {
    kind: MeshKind,
    n: usize,
    spacing: f64,
    stars: Option<ExplicitStars>,
}

const OFFSETS_2D: [[i64; 3]; 6] = [
    [-1, 0, 0],
    [-1, -1, 0],
    [0, -1, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
];

const OFFSETS_3D: [[i64; 3]; 14] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
    [1, 1, 0],
    [-1, -1, 0],
    [1, 0, 1],
    [-1, 0, -1],
    [0, 1, 1],
    [0, -1, -1],
    [1, 1, 1],
    [-1, -1, -1],
];

fn link_pairs_2d() -> &'static [(u8, u8)] {
    static PAIRS: OnceLock<Vec<(u8, u8)>> = OnceLock::new();
    PAIRS.get_or_init(|| (0..6u8).map(|i| (i, (i + 1) % 6)).collect())
}

/// Offset pairs (a, b) whose difference is itself a stencil offset. The
/// Freudenthal triangulation is a flag complex, so these are exactly the link
/// edges of an interior vertex.
fn link_pairs_3d() -> &'static [(u8, u8)] {
    static PAIRS: OnceLock<Vec<(u8, u8)>> = OnceLock::new();
    PAIRS.get_or_init(|| {
        let mut pairs = Vec::new();
        for a in 0..OFFSETS_3D.len() {
            for b in a + 1..OFFSETS_3D.len() {
                let d = [
                    OFFSETS_3D[b][0] - OFFSETS_3D[a][0],
                    OFFSETS_3D[b][1] - OFFSETS_3D[a][1],
                    OFFSETS_3D[b][2] - OFFSETS_3D[a][2],
                ];
                if OFFSETS_3D.contains(&d) {
                    pairs.push((a as u8, b as u8));
                }
            }
        }
        pairs
    })
}

impl Triangulation {
    /// Implicit Freudenthal triangulation of a 2D or 3D regular grid.
    pub fn grid(dims: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) || dims.iter().any(|&d| d < 2) {
            return Err(Error::InvalidDims(dims.to_vec()));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidDims(dims.to_vec()))?;
        Ok(Self {
            kind: MeshKind::Grid { dims: dims.to_vec() },
            n,
            spacing: 1.0,
            stars: None,
        })
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.spacing = spacing;
        self
    }

    /// Explicit triangle mesh. Every edge may be shared by at most two
    /// triangles and every vertex link must be a single cycle or path.
    pub fn from_triangles(coords: Vec<[f64; 3]>, triangles: Vec<[VertexId; 3]>) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::SizeMismatch { expected: 2, got: n });
        }
        let mut edge_faces: HashMap<(VertexId, VertexId), u32> = HashMap::new();
        let mut link_lists: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
        for tri in &triangles {
            for &v in tri {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            let [a, b, c] = *tri;
            if a == b || b == c || a == c {
                return Err(Error::NonManifoldVertex(a));
            }
            for (u, w) in [(a, b), (b, c), (a, c)] {
                let key = (u.min(w), u.max(w));
                let count = edge_faces.entry(key).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(Error::NonManifoldEdge(key.0, key.1));
                }
            }
            link_lists[a].push((b, c));
            link_lists[b].push((a, c));
            link_lists[c].push((a, b));
        }
        let closed = edge_faces.values().all(|&c| c == 2);

        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut link_offsets = Vec::with_capacity(n + 1);
        let mut link = Vec::new();
        offsets.push(0);
        link_offsets.push(0);
        for (v, edges) in link_lists.iter().enumerate() {
            if edges.is_empty() {
                return Err(Error::NonManifoldVertex(v));
            }
            let mut nbrs: Vec<VertexId> = edges.iter().flat_map(|&(u, w)| [u, w]).collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            if nbrs.len() > u8::MAX as usize {
                return Err(Error::NonManifoldVertex(v));
            }
            let index = |u: VertexId| nbrs.binary_search(&u).unwrap() as u8;
            let local: Vec<(u8, u8)> = edges.iter().map(|&(u, w)| (index(u), index(w))).collect();
            if !is_cycle_or_path(nbrs.len(), &local) {
                return Err(Error::NonManifoldVertex(v));
            }
            neighbors.extend_from_slice(&nbrs);
            link.extend_from_slice(&local);
            offsets.push(neighbors.len());
            link_offsets.push(link.len());
        }

        Ok(Self {
            kind: MeshKind::Explicit { coords, triangles },
            n,
            spacing: 1.0,
            stars: Some(ExplicitStars { offsets, neighbors, link_offsets, link, closed }),
        })
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            MeshKind::Grid { dims } => dims.len(),
            MeshKind::Explicit { .. } => 2,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn grid_dims(&self) -> Option<&[usize]> {
        match &self.kind {
            MeshKind::Grid { dims } => Some(dims),
            MeshKind::Explicit { .. } => None,
        }
    }

    /// True for explicit meshes where every edge has two incident triangles.
    pub fn is_closed(&self) -> bool {
        self.stars.as_ref().is_some_and(|s| s.closed)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange { vertex: v, n: self.n })
        }
    }

    pub fn grid_coords(&self, v: VertexId) -> Option<[usize; 3]> {
        let dims = self.grid_dims()?;
        let nx = dims[0];
        let ny = dims[1];
        Some([v % nx, (v / nx) % ny, v / (nx * ny)])
    }

    pub fn grid_vertex(&self, x: usize, y: usize, z: usize) -> Option<VertexId> {
        let dims = self.grid_dims()?;
        let nz = dims.get(2).copied().unwrap_or(1);
        (x < dims[0] && y < dims[1] && z < nz).then(|| x + dims[0] * (y + dims[1] * z))
    }

    fn grid_offset(dims: &[usize], c: [usize; 3], off: [i64; 3]) -> Option<VertexId> {
        let nz = dims.get(2).copied().unwrap_or(1);
        let x = c[0] as i64 + off[0];
        let y = c[1] as i64 + off[1];
        let z = c[2] as i64 + off[2];
        if x < 0 || y < 0 || z < 0 || x >= dims[0] as i64 || y >= dims[1] as i64 || z >= nz as i64 {
            return None;
        }
        Some(x as usize + dims[0] * (y as usize + dims[1] * z as usize))
    }

    /// Calls `visit` for every neighbor of `v`.
    #[inline]
    pub fn for_each_neighbor(&self, v: VertexId, mut visit: impl FnMut(VertexId)) {
        match &self.kind {
            MeshKind::Grid { dims } => {
                let nx = dims[0];
                let ny = dims[1];
                let c = [v % nx, (v / nx) % ny, v / (nx * ny)];
                let offsets: &[[i64; 3]] = if dims.len() == 2 { &OFFSETS_2D } else { &OFFSETS_3D };
                for &off in offsets {
                    if let Some(u) = Self::grid_offset(dims, c, off) {
                        visit(u);
                    }
                }
            }
            MeshKind::Explicit { .. } => {
                let s = self.stars.as_ref().expect("explicit mesh has stars");
                for &u in &s.neighbors[s.offsets[v]..s.offsets[v + 1]] {
                    visit(u);
                }
            }
        }
    }

    pub fn neighbors(&self, v: VertexId) -> Neighbors {
        let mut out = Neighbors::new();
        self.for_each_neighbor(v, |u| out.push(u));
        out
    }

    /// Neighbors plus link edges of `v`.
    pub fn star(&self, v: VertexId) -> Star {
        let mut star = Star::default();
        match &self.kind {
            MeshKind::Grid { dims } => {
                let nx = dims[0];
                let ny = dims[1];
                let c = [v % nx, (v / nx) % ny, v / (nx * ny)];
                let (offsets, pairs): (&[[i64; 3]], &[(u8, u8)]) = if dims.len() == 2 {
                    (&OFFSETS_2D, link_pairs_2d())
                } else {
                    (&OFFSETS_3D, link_pairs_3d())
                };
                // slot[i] = position in star.neighbors of stencil offset i
                let mut slot = [u8::MAX; 14];
                for (i, &off) in offsets.iter().enumerate() {
                    if let Some(u) = Self::grid_offset(dims, c, off) {
                        slot[i] = star.neighbors.len() as u8;
                        star.neighbors.push(u);
                    }
                }
                for &(a, b) in pairs {
                    let (sa, sb) = (slot[a as usize], slot[b as usize]);
                    if sa != u8::MAX && sb != u8::MAX {
                        star.link.push((sa, sb));
                    }
                }
            }
            MeshKind::Explicit { .. } => {
                let s = self.stars.as_ref().expect("explicit mesh has stars");
                star.neighbors.extend_from_slice(&s.neighbors[s.offsets[v]..s.offsets[v + 1]]);
                star.link.extend_from_slice(&s.link[s.link_offsets[v]..s.link_offsets[v + 1]]);
            }
        }
        star
    }

    /// Edges of the link of `v`, as vertex pairs.
    pub fn link_adjacency(&self, v: VertexId) -> Result<Vec<(VertexId, VertexId)>> {
        self.check_vertex(v)?;
        let star = self.star(v);
        Ok(star
            .link
            .iter()
            .map(|&(a, b)| (star.neighbors[a as usize], star.neighbors[b as usize]))
            .collect())
    }
}

/// Connected graph with every degree at most two, i.e. a single cycle or path.
fn is_cycle_or_path(count: usize, edges: &[(u8, u8)]) -> bool {
    let mut degree = vec![0u32; count];
    let mut parent: Vec<usize> = (0..count).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in edges {
        degree[a as usize] += 1;
        degree[b as usize] += 1;
        let (ra, rb) = (root(&mut parent, a as usize), root(&mut parent, b as usize));
        parent[ra] = rb;
    }
    if degree.iter().any(|&d| d > 2) {
        return false;
    }
    let r0 = root(&mut parent, 0);
    (1..count).all(|x| root(&mut parent, x) == r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn sorted(mut v: Vec<VertexId>) -> Vec<VertexId> {
        v.sort_unstable();
        v
    }

    #[test]
    fn smallest_grid() {
        let m = Triangulation::grid(&[2, 2]).unwrap();
        assert_eq!(m.vertex_count(), 4);
        assert_eq!(sorted(m.neighbors(0).to_vec()), vec![1, 2, 3]);
    }

    #[test]
    fn interior_stencil_2d() {
        let m = Triangulation::grid(&[5, 5]).unwrap();
        let v = m.grid_vertex(2, 2, 0).unwrap();
        let expect: BTreeSet<_> = [(1, 2), (3, 2), (2, 1), (2, 3), (3, 3), (1, 1)]
            .iter()
            .map(|&(x, y)| m.grid_vertex(x, y, 0).unwrap())
            .collect();
        let got: BTreeSet<_> = m.neighbors(v).into_iter().collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn interior_link_is_hexagon() {
        let m = Triangulation::grid(&[5, 5]).unwrap();
        let id = |x, y| m.grid_vertex(x, y, 0).unwrap();
        let cycle = [id(1, 2), id(1, 1), id(2, 1), id(3, 2), id(3, 3), id(2, 3)];
        let mut expect: Vec<_> = (0..6)
            .map(|i| {
                let (a, b) = (cycle[i], cycle[(i + 1) % 6]);
                (a.min(b), a.max(b))
            })
            .collect();
        expect.sort_unstable();
        let mut got: Vec<_> = m
            .link_adjacency(id(2, 2))
            .unwrap()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        got.sort_unstable();
        assert_eq!(got, expect);
    }

    #[test]
    fn corner_link_is_path() {
        let m = Triangulation::grid(&[2, 2]).unwrap();
        let mut got: Vec<_> = m
            .link_adjacency(0)
            .unwrap()
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        got.sort_unstable();
        assert_eq!(got, vec![(1, 3), (2, 3)]);
    }

    #[test]
    fn degrees_2d() {
        let m = Triangulation::grid(&[6, 4]).unwrap();
        for v in 0..m.vertex_count() {
            let [x, y, _] = m.grid_coords(v).unwrap();
            let deg = m.neighbors(v).len();
            let interior = x > 0 && y > 0 && x < 5 && y < 3;
            if interior {
                assert_eq!(deg, 6);
            }
            if (x, y) == (0, 0) || (x, y) == (5, 3) {
                assert_eq!(deg, 3);
            }
            if (x, y) == (5, 0) || (x, y) == (0, 3) {
                assert_eq!(deg, 2);
            }
        }
    }

    #[test]
    fn invalid_dims() {
        assert!(Triangulation::grid(&[1, 4]).is_err());
        assert!(Triangulation::grid(&[0, 4]).is_err());
        assert!(Triangulation::grid(&[4]).is_err());
        assert!(Triangulation::grid(&[2, 2, 2, 2]).is_err());
        assert!(matches!(
            Triangulation::grid(&[3, 3]).unwrap().link_adjacency(9),
            Err(Error::VertexOutOfRange { vertex: 9, n: 9 })
        ));
    }

    /// Brute force: cut every cube into the six tetrahedra along the main
    /// diagonal and collect edges and link edges from the tetrahedra.
    fn kuhn_tets(dims: [usize; 3]) -> Vec<[VertexId; 4]> {
        let id = |x: usize, y: usize, z: usize| x + dims[0] * (y + dims[1] * z);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut tets = Vec::new();
        for z in 0..dims[2] - 1 {
            for y in 0..dims[1] - 1 {
                for x in 0..dims[0] - 1 {
                    for p in perms {
                        let mut c = [x, y, z];
                        let mut tet = [id(c[0], c[1], c[2]); 4];
                        for (k, &axis) in p.iter().enumerate() {
                            c[axis] += 1;
                            tet[k + 1] = id(c[0], c[1], c[2]);
                        }
                        tets.push(tet);
                    }
                }
            }
        }
        tets
    }

    #[test]
    fn freudenthal_3d_matches_tetrahedra() {
        let dims = [3, 4, 3];
        let m = Triangulation::grid(&dims).unwrap();
        let tets = kuhn_tets(dims);
        let mut nbrs: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); m.vertex_count()];
        let mut links: Vec<BTreeSet<(VertexId, VertexId)>> = vec![BTreeSet::new(); m.vertex_count()];
        for t in &tets {
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        nbrs[t[i]].insert(t[j]);
                    }
                }
                let others: Vec<_> = (0..4).filter(|&j| j != i).map(|j| t[j]).collect();
                for a in 0..3 {
                    for b in a + 1..3 {
                        let (u, w) = (others[a], others[b]);
                        links[t[i]].insert((u.min(w), u.max(w)));
                    }
                }
            }
        }
        for v in 0..m.vertex_count() {
            let got: BTreeSet<_> = m.neighbors(v).into_iter().collect();
            assert_eq!(got, nbrs[v], "neighbors of {v}");
            let got: BTreeSet<_> = m
                .link_adjacency(v)
                .unwrap()
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect();
            assert_eq!(got, links[v], "link of {v}");
        }
        let center = m.grid_vertex(1, 1, 1).unwrap();
        assert_eq!(m.neighbors(center).len(), 14);
        assert_eq!(m.link_adjacency(center).unwrap().len(), 36);
    }

    #[test]
    fn center_of_3x3x3_has_14_neighbors() {
        let m = Triangulation::grid(&[3, 3, 3]).unwrap();
        assert_eq!(m.neighbors(13).len(), 14);
    }

    #[test]
    fn neighbor_symmetry_exhaustive() {
        for dims in [vec![16, 16], vec![2, 9], vec![16, 16, 16], vec![2, 3, 5]] {
            let m = Triangulation::grid(&dims).unwrap();
            let sets: Vec<BTreeSet<VertexId>> =
                (0..m.vertex_count()).map(|v| m.neighbors(v).into_iter().collect()).collect();
            for v in 0..m.vertex_count() {
                for &u in &sets[v] {
                    assert!(sets[u].contains(&v), "{dims:?}: {u} <-> {v}");
                }
                if dims.len() == 3 {
                    let [x, y, z] = m.grid_coords(v).unwrap();
                    let interior = (0..3).all(|a| [x, y, z][a] > 0 && [x, y, z][a] < dims[a] - 1);
                    if interior {
                        assert_eq!(sets[v].len(), 14);
                    }
                }
                for (a, b) in m.link_adjacency(v).unwrap() {
                    assert!(sets[v].contains(&a) && sets[v].contains(&b));
                }
            }
        }
    }

    #[test]
    fn explicit_rejects_non_manifold_edge() {
        let coords = vec![[0.0; 3]; 5];
        let tris = vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        assert_eq!(
            Triangulation::from_triangles(coords, tris).unwrap_err(),
            Error::NonManifoldEdge(0, 1)
        );
    }

    #[test]
    fn explicit_rejects_bowtie() {
        // two triangles sharing only vertex 0: its link is two disjoint edges
        let coords = vec![[0.0; 3]; 5];
        let tris = vec![[0, 1, 2], [0, 3, 4]];
        assert_eq!(
            Triangulation::from_triangles(coords, tris).unwrap_err(),
            Error::NonManifoldVertex(0)
        );
    }
}
