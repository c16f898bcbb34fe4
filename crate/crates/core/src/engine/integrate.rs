//! Splicing local orders back into the global order.

use crate::mesh::VertexId;
use crate::order::{OrderField, Rank};
use crate::{Error, Result};

use super::{LocalOrder, Region};

/// Sort key of a vertex: region vertices sit just below their saddle, in local
/// order, siblings sharing a saddle interleaved by region id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntegrationKey {
    pub primary: Rank,
    pub secondary: u64,
    pub tertiary: u64,
}

const TOP: u64 = u64::MAX;

fn check(f: &OrderField, regions: &[Region], locals: &[LocalOrder]) -> Result<()> {
    if regions.len() != locals.len() {
        return Err(Error::SizeMismatch { expected: regions.len(), got: locals.len() });
    }
    for (r, l) in regions.iter().zip(locals) {
        if r.vertices != l.vertices {
            return Err(Error::InvalidOption(format!("local order does not match region {}", r.id)));
        }
        if let Some(&v) = r.vertices.iter().find(|&&v| v >= f.len()) {
            return Err(Error::VertexOutOfRange { vertex: v, n: f.len() });
        }
    }
    Ok(())
}

/// Keys for every vertex, in vertex order.
pub fn integration_keys(f: &OrderField, regions: &[Region], locals: &[LocalOrder]) -> Result<Vec<IntegrationKey>> {
    check(f, regions, locals)?;
    let mut keys: Vec<Option<IntegrationKey>> = vec![None; f.len()];
    let mut set = |v: VertexId, key: IntegrationKey| -> Result<()> {
        match keys[v] {
            Some(old) if old != key => Err(Error::KeyCollision(v)),
            _ => {
                keys[v] = Some(key);
                Ok(())
            }
        }
    };
    for (region, local) in regions.iter().zip(locals) {
        let top = f.rank(region.saddle);
        for (&v, &l) in local.vertices.iter().zip(&local.ranks) {
            if v == region.saddle {
                set(v, IntegrationKey { primary: top, secondary: TOP, tertiary: TOP })?;
            } else {
                set(v, IntegrationKey { primary: top, secondary: l as u64, tertiary: region.id })?;
            }
        }
    }
    Ok(keys
        .into_iter()
        .enumerate()
        .map(|(v, k)| k.unwrap_or(IntegrationKey { primary: f.rank(v), secondary: 0, tertiary: 0 }))
        .collect())
}

/// Reference route: sort all vertices by their integration keys.
pub fn integrate_by_keys(f: &OrderField, regions: &[Region], locals: &[LocalOrder]) -> Result<OrderField> {
    let keys = integration_keys(f, regions, locals)?;
    let mut order: Vec<VertexId> = (0..f.len()).collect();
    order.sort_unstable_by_key(|&v| keys[v]);
    if let Some(w) = order.windows(2).find(|w| keys[w[0]] == keys[w[1]]) {
        return Err(Error::KeyCollision(w[1]));
    }
    OrderField::from_sorted(order)
}

/// Same result as [`integrate_by_keys`] with one linear merge over the sorted
/// vertex list instead of a full sort.
pub fn integrate_local_orders(f: &OrderField, regions: &[Region], locals: &[LocalOrder]) -> Result<OrderField> {
    check(f, regions, locals)?;
    const NONE: u32 = u32::MAX;
    const SADDLE: u32 = u32::MAX - 1;
    let n = f.len();
    let mut role = vec![NONE; n];
    for (i, region) in regions.iter().enumerate() {
        for &v in &region.vertices {
            let want = if v == region.saddle { SADDLE } else { i as u32 };
            match role[v] {
                NONE => role[v] = want,
                SADDLE if want == SADDLE => {}
                _ => return Err(Error::KeyCollision(v)),
            }
        }
    }
    // sibling regions by saddle, blocks interleaved by (local rank, region id)
    let mut by_saddle: Vec<(VertexId, usize)> = regions.iter().enumerate().map(|(i, r)| (r.saddle, i)).collect();
    by_saddle.sort_unstable();
    let mut order = Vec::with_capacity(n);
    let mut block: Vec<(u32, u64, VertexId)> = Vec::new();
    for &v in f.sorted() {
        match role[v] {
            NONE => order.push(v),
            SADDLE => {
                let start = by_saddle.partition_point(|&(s, _)| s < v);
                block.clear();
                for &(s, i) in &by_saddle[start..] {
                    if s != v {
                        break;
                    }
                    let local = &locals[i];
                    block.extend(
                        local.vertices.iter().zip(&local.ranks).filter(|(&u, _)| u != v).map(|(&u, &l)| (l, regions[i].id, u)),
                    );
                }
                block.sort_unstable();
                if block.windows(2).any(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
                    return Err(Error::KeyCollision(v));
                }
                order.extend(block.iter().map(|&(_, _, u)| u));
                order.push(v);
            }
            _ => {}
        }
    }
    OrderField::from_sorted(order)
}
