//! Baseline reverse skyline search: products are expanded in distance
//! order while the optimistic (min-corner) and pessimistic (minmax-corner)
//! frontiers of all live product entries are kept as skylines; every live
//! customer entry is re-examined against both frontiers after each
//! expansion.
//!
//! Frontier members carry a creation sequence number. A waiting customer
//! remembers the last number it was tested against and the lower-frontier
//! member that kept it waiting, so a re-examination only looks at what
//! changed since.

use std::collections::{BTreeMap, HashSet};

use super::{check_query_dims, DirectReader, InfluenceSet, NodeReader, PqKey, QueryStats};
use crate::error::Result;
use crate::geometry::{dynamically_dominates_coords, Point};
use crate::index::{ChildRef, NodeEntries, NodeId, RTree, TreeRole};
use crate::region::{
    corner_supersedes, covers, guarantee_supersedes, is_useful_guarantee, may_dominate_from_corner,
    surely_dominates, OffsetBox,
};

struct ProductNode {
    child: ChildRef,
    offsets: OffsetBox,
    corner: Vec<f64>,
    guarantees: Vec<(OffsetBox, u64)>,
}

struct FoundProduct {
    coords: Vec<f64>,
    offsets: OffsetBox,
    seq: u64,
}

enum CustomerEntry {
    Point(Point),
    Node(ChildRef),
}

/// What last kept a customer entry waiting.
#[derive(Clone, Copy)]
enum Witness {
    Lower(NodeId),
    Found(u64),
}

struct Waiting {
    entry: CustomerEntry,
    offsets: OffsetBox,
    /// Near corner for nodes, the point itself for points.
    probe: OffsetBox,
    /// Found products and guarantees up to this sequence number were tested.
    checked: u64,
    witness: Option<Witness>,
}

/// Skyline of the min-corners of live product nodes.
#[derive(Default)]
struct LowerSky {
    members: Vec<(Vec<f64>, NodeId)>,
    ids: HashSet<NodeId>,
}

/// Skyline of the guaranteed face boxes of live product nodes, ordered by
/// sequence number.
#[derive(Default)]
struct UpperSky {
    members: Vec<(OffsetBox, NodeId, u64)>,
}

impl LowerSky {
    fn insert(&mut self, corner: &[f64], id: NodeId, checks: &mut u64) {
        if self.members.iter().any(|(m, _)| {
            *checks += 1;
            corner_supersedes(m, corner)
        }) {
            return;
        }
        let ids = &mut self.ids;
        self.members.retain(|(m, s)| {
            *checks += 1;
            let keep = !corner_supersedes(corner, m);
            if !keep {
                ids.remove(s);
            }
            keep
        });
        self.members.push((corner.to_vec(), id));
        self.ids.insert(id);
    }

    fn contains_source(&self, id: NodeId) -> bool {
        self.ids.contains(&id)
    }
}

impl UpperSky {
    fn insert(&mut self, g: &OffsetBox, id: NodeId, seq: u64, checks: &mut u64) {
        if self.members.iter().any(|(m, _, _)| {
            *checks += 1;
            guarantee_supersedes(m, g)
        }) {
            return;
        }
        self.members.retain(|(m, _, _)| {
            *checks += 1;
            !guarantee_supersedes(g, m)
        });
        self.members.push((g.clone(), id, seq));
    }

    fn contains_source(&self, id: NodeId) -> bool {
        self.members.iter().any(|(_, s, _)| *s == id)
    }

    fn newer_than(&self, seq: u64) -> &[(OffsetBox, NodeId, u64)] {
        let at = self.members.partition_point(|m| m.2 <= seq);
        &self.members[at..]
    }
}

struct BrsState<'a> {
    q: Vec<f64>,
    products: &'a RTree,
    customers: &'a RTree,
    product_queue: BTreeMap<PqKey, ProductNode>,
    found: Vec<FoundProduct>,
    lower: LowerSky,
    upper: UpperSky,
    customer_entries: Vec<Waiting>,
    next_seq: u64,
    result: InfluenceSet,
    stats: QueryStats,
}

impl<'a> BrsState<'a> {
    fn seq(&mut self) -> u64 {
        self.next_seq += 1;
        self.next_seq
    }

    fn product_node(&mut self, child: ChildRef) -> ProductNode {
        let offsets = OffsetBox::of_rect(&child.rect, &self.q);
        let corner = offsets.near_corner();
        let guarantees = (0..offsets.dim())
            .map(|j| offsets.nearest_face(j))
            .filter(is_useful_guarantee)
            .collect::<Vec<_>>()
            .into_iter()
            .map(|g| (g, self.seq()))
            .collect();
        ProductNode {
            child,
            offsets,
            corner,
            guarantees,
        }
    }

    fn push_product_node(&mut self, child: ChildRef) {
        let node = self.product_node(child);
        let id = node.child.id;
        self.lower.insert(&node.corner, id, &mut self.stats.dominance_checks);
        for (g, seq) in &node.guarantees {
            self.upper.insert(g, id, *seq, &mut self.stats.dominance_checks);
        }
        let key = PqKey::by_distance(node.child.rect.mindist(&self.q), id.0 as u64);
        self.product_queue.insert(key, node);
    }

    fn rebuild_skies(&mut self) {
        let checks = &mut self.stats.dominance_checks;
        self.lower = LowerSky::default();
        self.upper = UpperSky::default();
        for node in self.product_queue.values() {
            self.lower.insert(&node.corner, node.child.id, checks);
            for (g, seq) in &node.guarantees {
                self.upper.insert(g, node.child.id, *seq, checks);
            }
        }
        self.upper.members.sort_by_key(|m| m.2);
    }

    /// Whether a node contributes to either skyline. Removing such a node
    /// requires a rebuild, since entries it superseded may be needed again.
    fn feeds_skies(&self, id: NodeId) -> bool {
        self.lower.contains_source(id) || self.upper.contains_source(id)
    }

    fn add_found(&mut self, p: &Point) {
        let offsets = OffsetBox::of_point(&p.coords, &self.q);
        let checks = &mut self.stats.dominance_checks;
        if self.found.iter().any(|f| {
            *checks += 1;
            covers(&f.offsets, &offsets)
        }) {
            return;
        }
        self.found.retain(|f| {
            *checks += 1;
            !covers(&offsets, &f.offsets)
        });
        let seq = self.seq();
        self.found.push(FoundProduct {
            coords: p.coords.clone(),
            offsets,
            seq,
        });
    }

    fn expand_nearest_product(&mut self, reader: &mut impl NodeReader) -> Result<()> {
        let Some((_, node)) = self.product_queue.pop_first() else {
            return Ok(());
        };
        let mut stale = self.feeds_skies(node.child.id);
        let page = reader.read(self.products, TreeRole::Product, node.child.id, &mut self.stats)?;
        match &page.entries {
            NodeEntries::Points(ps) => {
                for p in ps {
                    self.add_found(p);
                }
            }
            NodeEntries::Children(cs) => {
                if stale {
                    // Insert children into a rebuilt skyline below.
                    for c in cs {
                        let n = self.product_node(c.clone());
                        let key = PqKey::by_distance(n.child.rect.mindist(&self.q), n.child.id.0 as u64);
                        self.product_queue.insert(key, n);
                    }
                } else {
                    for c in cs {
                        self.push_product_node(c.clone());
                    }
                }
            }
        }

        // Discard product nodes whose every point is covered by a point
        // that is guaranteed to remain reachable.
        let mut removed = HashSet::from([node.child.id]);
        let keys: Vec<PqKey> = self.product_queue.keys().copied().collect();
        for key in keys {
            let node = &self.product_queue[&key];
            if !coverable(&node.offsets) {
                continue;
            }
            let id = node.child.id;
            let checks = &mut self.stats.dominance_checks;
            let by_found = self.found.iter().any(|f| {
                *checks += 1;
                covers(&f.offsets, &node.offsets)
            });
            let covered = by_found
                || self.upper.members.iter().any(|(g, src, _)| {
                    *src != id && !removed.contains(src) && {
                        *checks += 1;
                        covers(g, &node.offsets)
                    }
                });
            if covered {
                stale |= self.feeds_skies(id);
                removed.insert(id);
                self.product_queue.remove(&key);
            }
        }
        if stale {
            self.rebuild_skies();
        }
        Ok(())
    }

    fn found_newer_than(&self, seq: u64) -> &[FoundProduct] {
        let at = self.found.partition_point(|f| f.seq <= seq);
        &self.found[at..]
    }

    fn surely_out(&mut self, customer: &OffsetBox, since: u64) -> bool {
        let mut checks = 0;
        let out = self.found_newer_than(since).iter().any(|f| {
            checks += 1;
            surely_dominates(&f.offsets, customer)
        }) || self.upper.newer_than(since).iter().any(|(g, _, _)| {
            checks += 1;
            surely_dominates(g, customer)
        });
        self.stats.dominance_checks += checks;
        out
    }

    fn witness_alive(&self, w: Witness) -> bool {
        match w {
            Witness::Lower(id) => self.lower.contains_source(id),
            Witness::Found(seq) => self.found.binary_search_by_key(&seq, |f| f.seq).is_ok(),
        }
    }

    /// A lower-frontier member, or for nodes a found product, that may
    /// dominate `probe`.
    fn find_witness(&mut self, probe: &OffsetBox, with_found: bool) -> Option<Witness> {
        let checks = &mut self.stats.dominance_checks;
        if with_found {
            if let Some(f) = self.found.iter().find(|f| {
                *checks += 1;
                may_dominate_from_corner(&f.offsets.lo, probe)
            }) {
                return Some(Witness::Found(f.seq));
            }
        }
        self.lower
            .members
            .iter()
            .find(|(l, _)| {
                *checks += 1;
                may_dominate_from_corner(l, probe)
            })
            .map(|(_, id)| Witness::Lower(*id))
    }

    fn waiting(&self, entry: CustomerEntry) -> Waiting {
        let (offsets, probe) = match &entry {
            CustomerEntry::Point(c) => {
                let o = OffsetBox::of_point(&c.coords, &self.q);
                (o.clone(), o)
            }
            CustomerEntry::Node(r) => {
                let o = OffsetBox::of_rect(&r.rect, &self.q);
                let near = o.near_corner();
                let probe = OffsetBox {
                    lo: near.clone(),
                    hi: near,
                };
                (o, probe)
            }
        };
        Waiting {
            entry,
            offsets,
            probe,
            checked: 0,
            witness: None,
        }
    }

    fn sweep_customers(
        &mut self,
        reader: &mut impl NodeReader,
        emit: &mut dyn FnMut(u64),
    ) -> Result<()> {
        let products_exhausted = self.product_queue.is_empty();
        let entries = std::mem::take(&mut self.customer_entries);
        let mut waiting = Vec::with_capacity(entries.len());
        for mut w in entries {
            let since = w.checked;
            w.checked = self.next_seq;
            if let CustomerEntry::Point(c) = &w.entry {
                let mut checks = 0;
                let exact_out = self.found_newer_than(since).iter().any(|f| {
                    checks += 1;
                    dynamically_dominates_coords(&f.coords, &self.q, &c.coords)
                });
                self.stats.dominance_checks += checks;
                if exact_out {
                    continue;
                }
            }
            if self.surely_out(&w.offsets, since) {
                continue;
            }
            let is_node = matches!(w.entry, CustomerEntry::Node(_));
            if !products_exhausted {
                if w.witness.is_some_and(|x| self.witness_alive(x)) {
                    waiting.push(w);
                    continue;
                }
                w.witness = self.find_witness(&w.probe, is_node);
                if w.witness.is_some() {
                    waiting.push(w);
                    continue;
                }
            }
            match w.entry {
                CustomerEntry::Point(c) => {
                    self.result.insert(c.id);
                    self.stats.record_emit();
                    emit(c.id);
                }
                CustomerEntry::Node(r) => {
                    let page = reader.read(self.customers, TreeRole::Customer, r.id, &mut self.stats)?;
                    match &page.entries {
                        NodeEntries::Points(ps) => waiting.extend(
                            ps.iter().cloned().map(|p| self.waiting(CustomerEntry::Point(p))),
                        ),
                        NodeEntries::Children(cs) => waiting.extend(
                            cs.iter().cloned().map(|c| self.waiting(CustomerEntry::Node(c))),
                        ),
                    }
                }
            }
        }
        self.customer_entries = waiting;
        Ok(())
    }
}

fn coverable(b: &OffsetBox) -> bool {
    (0..b.dim()).all(|k| b.lo[k] > 0.0 || b.hi[k] < 0.0 || (b.lo[k] == 0.0 && b.hi[k] == 0.0))
}

/// Reverse skyline of `q` by iterative refinement of the influence region
/// bounds.
pub fn brs(
    q: &Point,
    products: &RTree,
    customers: &RTree,
    emit: Option<&mut dyn FnMut(u64)>,
) -> Result<(InfluenceSet, QueryStats)> {
    brs_with_reader(q, products, customers, &mut DirectReader, emit)
}

pub(crate) fn brs_with_reader(
    q: &Point,
    products: &RTree,
    customers: &RTree,
    reader: &mut impl NodeReader,
    emit: Option<&mut dyn FnMut(u64)>,
) -> Result<(InfluenceSet, QueryStats)> {
    check_query_dims(q, products, customers)?;
    let mut noop = |_: u64| {};
    let emit: &mut dyn FnMut(u64) = match emit {
        Some(f) => f,
        None => &mut noop,
    };
    let mut state = BrsState {
        q: q.coords.clone(),
        products,
        customers,
        product_queue: BTreeMap::new(),
        found: Vec::new(),
        lower: LowerSky::default(),
        upper: UpperSky::default(),
        customer_entries: Vec::new(),
        next_seq: 0,
        result: InfluenceSet::new(),
        stats: QueryStats::default(),
    };
    let root = state.waiting(CustomerEntry::Node(customers.root_ref()));
    state.customer_entries.push(root);
    state.push_product_node(products.root_ref());
    while !state.customer_entries.is_empty() {
        state.expand_nearest_product(reader)?;
        state.sweep_customers(reader, emit)?;
    }
    Ok((state.result, state.stats))
}
