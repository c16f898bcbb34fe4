//! Vertex classification from lower/upper link connectivity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mesh::{Triangulation, VertexId};
use crate::order::{OrderField, Rank, ScalarField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CriticalKind {
    Regular,
    Minimum,
    Maximum,
    Saddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criticality {
    pub kind: CriticalKind,
    pub lower_components: u32,
    pub upper_components: u32,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CriticalSet {
    pub minima: Vec<VertexId>,
    pub maxima: Vec<VertexId>,
    /// `(vertex, lower components, upper components)`
    pub saddles: Vec<(VertexId, u32, u32)>,
}

/// Components of the neighbors selected by `mask` under the link edges.
fn components(count: usize, mask: u16, link: &[(u8, u8)]) -> u32 {
    let mut parent = [0u8; 16];
    for (i, p) in parent.iter_mut().enumerate().take(count) {
        *p = i as u8;
    }
    fn root(parent: &mut [u8; 16], mut x: u8) -> u8 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    let mut comps = mask.count_ones();
    for &(a, b) in link {
        if mask & (1 << a) != 0 && mask & (1 << b) != 0 {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra != rb {
                parent[ra as usize] = rb;
                comps -= 1;
            }
        }
    }
    comps
}

pub(crate) fn classify_ranks(mesh: &Triangulation, rank: &[Rank], v: VertexId) -> Criticality {
    let star = mesh.star(v);
    let rv = rank[v];
    let mut lower = 0u16;
    for (i, &u) in star.neighbors.iter().enumerate() {
        if rank[u] < rv {
            lower |= 1 << i;
        }
    }
    let all = if star.neighbors.len() >= 16 { u16::MAX } else { (1u16 << star.neighbors.len()) - 1 };
    let upper = all & !lower;
    let lc = components(star.neighbors.len(), lower, &star.link);
    let uc = components(star.neighbors.len(), upper, &star.link);
    let kind = match (lc, uc) {
        (0, _) => CriticalKind::Minimum,
        (_, 0) => CriticalKind::Maximum,
        (1, 1) => CriticalKind::Regular,
        _ => CriticalKind::Saddle,
    };
    Criticality { kind, lower_components: lc, upper_components: uc, degenerate: lc > 2 || uc > 2 }
}

pub fn classify_vertex(mesh: &Triangulation, order: &OrderField, v: VertexId) -> Result<Criticality> {
    mesh.check_vertex(v)?;
    if order.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: order.len() });
    }
    Ok(classify_ranks(mesh, order.ranks(), v))
}

/// Every neighbor of `v` is lower. Cheaper than a full classification.
#[inline]
pub fn is_maximum(mesh: &Triangulation, rank: &[Rank], v: VertexId) -> bool {
    let mut all_lower = true;
    mesh.for_each_neighbor(v, |u| all_lower &= rank[u] < rank[v]);
    all_lower
}

#[inline]
pub fn is_minimum(mesh: &Triangulation, rank: &[Rank], v: VertexId) -> bool {
    let mut all_higher = true;
    mesh.for_each_neighbor(v, |u| all_higher &= rank[u] > rank[v]);
    all_higher
}

/// Minima and maxima only, in increasing vertex id.
pub fn extrema(mesh: &Triangulation, order: &OrderField) -> (Vec<VertexId>, Vec<VertexId>) {
    let rank = order.ranks();
    let kinds: Vec<u8> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| is_minimum(mesh, rank, v) as u8 | ((is_maximum(mesh, rank, v) as u8) << 1))
        .collect();
    let pick = |bit: u8| kinds.iter().enumerate().filter(|(_, &k)| k & bit != 0).map(|(v, _)| v).collect();
    (pick(1), pick(2))
}

pub fn extract_critical_points(mesh: &Triangulation, order: &OrderField) -> CriticalSet {
    let rank = order.ranks();
    let all: Vec<Criticality> =
        (0..mesh.vertex_count()).into_par_iter().map(|v| classify_ranks(mesh, rank, v)).collect();
    let mut set = CriticalSet::default();
    for (v, c) in all.into_iter().enumerate() {
        match c.kind {
            CriticalKind::Minimum => set.minima.push(v),
            CriticalKind::Maximum => set.maxima.push(v),
            CriticalKind::Saddle => set.saddles.push((v, c.lower_components, c.upper_components)),
            CriticalKind::Regular => {}
        }
    }
    set
}

/// `#min - sum(lower - 1 over saddles) + #max`, which equals the Euler
/// characteristic on a closed surface.
pub fn morse_count_check(mesh: &Triangulation, order: &OrderField) -> Result<i64> {
    if mesh.grid_dims().is_some() {
        return Err(Error::NotExplicit);
    }
    if !mesh.is_closed() {
        return Err(Error::MeshHasBoundary);
    }
    let set = extract_critical_points(mesh, order);
    let saddles: i64 = set.saddles.iter().map(|&(_, l, _)| l as i64 - 1).sum();
    Ok(set.minima.len() as i64 - saddles + set.maxima.len() as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CriticalPointRecord {
    pub vertex_id: VertexId,
    pub kind: CriticalKind,
    pub order: Rank,
    pub value: f64,
}

/// JSON-ready records of all critical vertices, sorted by vertex id.
pub fn critical_point_records(set: &CriticalSet, order: &OrderField, field: &ScalarField) -> Vec<CriticalPointRecord> {
    let mut out: Vec<CriticalPointRecord> = set
        .minima
        .iter()
        .map(|&v| (v, CriticalKind::Minimum))
        .chain(set.maxima.iter().map(|&v| (v, CriticalKind::Maximum)))
        .chain(set.saddles.iter().map(|&(v, _, _)| (v, CriticalKind::Saddle)))
        .map(|(v, kind)| CriticalPointRecord { vertex_id: v, kind, order: order.rank(v), value: field.get(v) })
        .collect();
    out.sort_by_key(|r| r.vertex_id);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::shapes;
    use crate::order::compute_order_field;

    fn two_bumps() -> (Triangulation, ScalarField) {
        let mut vals = vec![0.0; 25];
        for y in 0..5 {
            for x in 0..5 {
                vals[x + 5 * y] = 0.25 * (x + y) as f64;
            }
        }
        vals[0] = 0.0;
        vals[6] = 9.0;
        vals[18] = 6.0;
        vals[12] = 4.0;
        (Triangulation::grid(&[5, 5]).unwrap(), ScalarField::new(vals).unwrap())
    }

    #[test]
    fn two_bumps_classification() {
        let (mesh, f) = two_bumps();
        let o = compute_order_field(&f);
        assert_eq!(classify_vertex(&mesh, &o, 6).unwrap().kind, CriticalKind::Maximum);
        let s = classify_vertex(&mesh, &o, 12).unwrap();
        assert_eq!(s.kind, CriticalKind::Saddle);
        assert_eq!(s.upper_components, 2);
        let set = extract_critical_points(&mesh, &o);
        assert_eq!(set.maxima, vec![6, 18]);
        assert_eq!(set.minima, vec![0]);
        assert!(set.saddles.iter().any(|&(v, _, _)| v == 12));
        assert!(classify_vertex(&mesh, &o, 25).is_err());
    }

    #[test]
    fn constant_field_has_one_min_one_max() {
        let mesh = Triangulation::grid(&[3, 3]).unwrap();
        let o = compute_order_field(&ScalarField::new(vec![1.0; 9]).unwrap());
        let set = extract_critical_points(&mesh, &o);
        assert_eq!(set.minima, vec![0]);
        assert_eq!(set.maxima, vec![8]);
    }

    #[test]
    fn octahedron_height() {
        let mesh = shapes::octahedron();
        let crate::mesh::MeshKind::Explicit { coords, .. } = mesh.kind().clone() else { unreachable!() };
        let f = ScalarField::new(coords.iter().map(|c| c[2]).collect()).unwrap();
        let o = compute_order_field(&f);
        let set = extract_critical_points(&mesh, &o);
        assert_eq!(set.minima.len() + set.maxima.len(), 2);
        assert_eq!(morse_count_check(&mesh, &o).unwrap(), 2);
    }

    #[test]
    fn morse_check_requires_closed_explicit_mesh() {
        let grid = Triangulation::grid(&[3, 3]).unwrap();
        assert_eq!(morse_count_check(&grid, &OrderField::identity(9)), Err(Error::NotExplicit));
        let patch = shapes::hexagon_patch();
        assert_eq!(morse_count_check(&patch, &OrderField::identity(24)), Err(Error::MeshHasBoundary));
    }

    #[test]
    fn degenerate_monkey_saddle() {
        // alternate high/low around the hexagon link of the centre
        let mesh = Triangulation::grid(&[3, 3]).unwrap();
        // link cycle of 4: 3, 0, 1, 5, 8, 7
        let mut vals = [0.0; 9];
        vals[4] = 5.0;
        for (i, v) in [3, 0, 1, 5, 8, 7].into_iter().enumerate() {
            vals[v] = if i % 2 == 0 { 10.0 + i as f64 } else { i as f64 * 0.1 };
        }
        vals[2] = 5.5;
        vals[6] = 5.5;
        let o = compute_order_field(&ScalarField::new(vals.to_vec()).unwrap());
        let c = classify_vertex(&mesh, &o, 4).unwrap();
        assert_eq!((c.lower_components, c.upper_components), (3, 3));
        assert!(c.degenerate);
        assert_eq!(c.kind, CriticalKind::Saddle);
    }
}
