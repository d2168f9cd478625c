//! Average-linkage agglomerative clustering with arm estimates carried across
//! merge steps.
//!
//! Every unordered pair of current clusters is an arm whose value is the
//! average squared coordinate difference over all cross-cluster point pairs
//! and coordinates. A pull draws one point from each cluster and one
//! coordinate. Each step races the current arms for the smallest value,
//! merges the winning pair, deletes every arm touching either merged cluster
//! and adds one arm between the new cluster and each survivor. Arms that
//! survive keep their samples.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::{
    race, ArmCost, ArmRng, ArmSource, BanditConfig, EvalLedger, Observation, PullRecord, Slot,
};
use crate::data::DenseMatrix;
use crate::error::{Error, Result};
use crate::estimators::CoordMetric;

/// One agglomeration step. Leaves are `0..n`; the cluster formed at step `t`
/// (0-based) gets id `n + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    /// Estimated (or exact) average-linkage value of the merged pair.
    pub value: f64,
    pub new_id: usize,
    pub size: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Checks the binary-tree structure: `n - 1` merges of live clusters with
    /// fresh sequential ids.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if self.merges.len() != n.saturating_sub(1) {
            return Err(Error::state(format!(
                "{} merges for {n} leaves",
                self.merges.len()
            )));
        }
        let mut live: HashSet<usize> = (0..n).collect();
        for (t, m) in self.merges.iter().enumerate() {
            if m.new_id != n + t || m.a == m.b || !live.remove(&m.a) || !live.remove(&m.b) {
                return Err(Error::state(format!("merge {t} is not a valid join")));
            }
            live.insert(m.new_id);
        }
        Ok(())
    }

    /// Leaf members of every cluster id, leaves included.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let n = self.n_leaves;
        let mut out: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut v = out[m.a].clone();
            v.extend_from_slice(&out[m.b]);
            v.sort_unstable();
            out.push(v);
        }
        out
    }

    /// Path length in edges between every pair of leaves, row-major `n x n`.
    pub fn leaf_distances(&self) -> Vec<u32> {
        let n = self.n_leaves;
        let total = n + self.merges.len();
        let mut parent = vec![usize::MAX; total];
        for m in &self.merges {
            parent[m.a] = m.new_id;
            parent[m.b] = m.new_id;
        }
        // depth from the root
        let mut depth = vec![0u32; total];
        for id in (0..total).rev() {
            if parent[id] != usize::MAX {
                depth[id] = depth[parent[id]] + 1;
            }
        }
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            let mut anc = HashSet::new();
            let mut x = i;
            anc.insert(x);
            while parent[x] != usize::MAX {
                x = parent[x];
                anc.insert(x);
            }
            for j in (i + 1)..n {
                let mut y = j;
                while !anc.contains(&y) {
                    y = parent[y];
                }
                let dist = depth[i] + depth[j] - 2 * depth[y];
                out[i * n + j] = dist;
                out[j * n + i] = dist;
            }
        }
        out
    }

    /// Rows `a,b,value,size`.
    pub fn write_linkage_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::state(format!("cannot write linkage: {e}"));
        w.write_record(["a", "b", "value", "size"]).map_err(err)?;
        for m in &self.merges {
            w.write_record([
                m.a.to_string(),
                m.b.to_string(),
                m.value.to_string(),
                m.size.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::io("<linkage>", e))
    }
}

/// One draw of a cluster-pair arm: a point from each cluster and a coordinate.
pub fn pair_sample<R: Rng + ?Sized>(
    data: &DenseMatrix,
    c: &[usize],
    c2: &[usize],
    rng: &mut R,
) -> Result<f64> {
    if c.is_empty() || c2.is_empty() {
        return Err(Error::invalid("cluster pair arm with an empty cluster"));
    }
    let x = c[rng.random_range(0..c.len())];
    let y = c2[rng.random_range(0..c2.len())];
    let t = rng.random_range(0..data.d());
    Ok(CoordMetric::SqEuclidean.term(data.get(x, t), data.get(y, t)))
}

/// Average-linkage value: mean squared coordinate difference over all
/// cross pairs and coordinates.
pub fn linkage_exact(data: &DenseMatrix, c: &[usize], c2: &[usize]) -> Result<f64> {
    if c.is_empty() || c2.is_empty() {
        return Err(Error::invalid("cluster pair arm with an empty cluster"));
    }
    let mut acc = 0.0;
    for &x in c {
        for &y in c2 {
            acc += CoordMetric::SqEuclidean.row_sum(data.row(x), data.row(y));
        }
    }
    Ok(acc / (c.len() * c2.len() * data.d()) as f64)
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Arm-set edit for merging `winner` into `new_id`: the arms to delete (the
/// winner and every arm touching either merged cluster) and the arms to add
/// (the new cluster against every surviving cluster), both sorted.
#[allow(clippy::type_complexity)]
pub fn arm_set_update(
    active: &[(usize, usize)],
    winner: (usize, usize),
    new_id: usize,
) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let winner = ordered(winner.0, winner.1);
    if !active.iter().any(|&(a, b)| ordered(a, b) == winner) {
        return Err(Error::state(format!("arm {winner:?} is not active")));
    }
    let merged = [winner.0, winner.1];
    let mut deleted = Vec::new();
    let mut survivors = std::collections::BTreeSet::new();
    for &(a, b) in active {
        let p = ordered(a, b);
        if merged.contains(&p.0) || merged.contains(&p.1) {
            deleted.push(p);
        }
        for c in [p.0, p.1] {
            if !merged.contains(&c) {
                survivors.insert(c);
            }
        }
    }
    deleted.sort_unstable();
    let added = survivors.into_iter().map(|c| ordered(c, new_id)).collect();
    Ok((deleted, added))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct HierOptions {
    /// Give a new arm the exact value `(|C| mu(C,D) + |C'| mu(C',D)) / (|C| + |C'|)`
    /// when both parent arms are already exact, instead of warming it up.
    pub pooled_init: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierResult {
    pub dendrogram: Dendrogram,
    pub ledger: EvalLedger,
    /// Distinct arms created over the run.
    pub arms_created: usize,
}

struct PairArms<'a> {
    data: &'a DenseMatrix,
    members: &'a BTreeMap<usize, Vec<usize>>,
    pairs: &'a [(usize, usize)],
}

impl PairArms<'_> {
    fn clusters(&self, arm: usize) -> (&[usize], &[usize]) {
        let (a, b) = self.pairs[arm];
        (&self.members[&a], &self.members[&b])
    }
}

impl ArmSource for PairArms<'_> {
    fn num_arms(&self) -> usize {
        self.pairs.len()
    }

    fn max_pulls(&self, arm: usize) -> u64 {
        let (c, c2) = self.clusters(arm);
        (self.data.d() * c.len() * c2.len()) as u64
    }

    fn cost(&self, arm: usize) -> ArmCost {
        let full = self.max_pulls(arm);
        ArmCost {
            pull_touches: 1,
            exact_touches: full,
            full_touches: full,
            unit: self.data.d() as f64,
        }
    }

    fn pull(&mut self, arm: usize, rng: &mut ArmRng) -> Result<Observation> {
        let (c, c2) = self.clusters(arm);
        pair_sample(self.data, c, c2, rng).map(Observation::Sample)
    }

    fn exact(&mut self, arm: usize) -> Result<f64> {
        let (c, c2) = self.clusters(arm);
        linkage_exact(self.data, c, c2)
    }

    fn arm_id(&self, arm: usize) -> u64 {
        let (a, b) = self.pairs[arm];
        (a * 2 * self.data.n() + b) as u64
    }
}

pub fn cluster(data: &DenseMatrix, cfg: &BanditConfig) -> Result<HierResult> {
    cluster_with(data, HierOptions::default(), cfg, None)
}

/// Full agglomeration. When `log` is given, every engine event of every step
/// is appended to it.
pub fn cluster_with(
    data: &DenseMatrix,
    opts: HierOptions,
    cfg: &BanditConfig,
    mut log: Option<&mut Vec<PullRecord>>,
) -> Result<HierResult> {
    cfg.validate()?;
    let n = data.n();
    if n < 2 {
        return Err(Error::invalid("clustering needs at least two points"));
    }
    if data.d() == 0 {
        return Err(Error::invalid("points have zero dimension"));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            pairs.push((a, b));
        }
    }
    let mut slots: Vec<Slot> = {
        let src = PairArms {
            data,
            members: &members,
            pairs: &pairs,
        };
        (0..pairs.len())
            .map(|i| Slot::new(cfg.seed, &src, i))
            .collect()
    };
    let mut arms_created = pairs.len();
    let mut ledger = EvalLedger::default();
    let mut merges = Vec::with_capacity(n - 1);

    for t in 0..n - 1 {
        let winner = {
            let mut src = PairArms {
                data,
                members: &members,
                pairs: &pairs,
            };
            race(
                cfg,
                &mut src,
                &mut slots,
                1,
                &mut ledger,
                log.as_deref_mut(),
            )?[0]
        };
        let (a, b) = pairs[winner];
        let new_id = n + t;
        let state = &slots[winner].state;
        let mut joined = members[&a].clone();
        joined.extend_from_slice(&members[&b]);
        merges.push(Merge {
            a,
            b,
            value: state.mean(),
            new_id,
            size: joined.len(),
            exact: state.exact,
        });

        let (deleted, added) = arm_set_update(&pairs, (a, b), new_id)?;
        // Exact parent values, for pooled initialization.
        let mut exact_parent: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        if opts.pooled_init {
            for (p, s) in pairs.iter().zip(&slots) {
                if s.state.exact && deleted.binary_search(p).is_ok() {
                    exact_parent.insert(*p, s.state.mean());
                }
            }
        }
        let (size_a, size_b) = (members[&a].len() as f64, members[&b].len() as f64);
        let mut keep = pairs.iter().map(|p| deleted.binary_search(p).is_err());
        let mut kept_slots = Vec::with_capacity(slots.len());
        for s in slots.drain(..) {
            if keep.next() == Some(true) {
                kept_slots.push(s);
            }
        }
        slots = kept_slots;
        pairs.retain(|p| deleted.binary_search(p).is_err());
        members.remove(&a);
        members.remove(&b);
        members.insert(new_id, joined);

        let start = pairs.len();
        pairs.extend_from_slice(&added);
        arms_created += added.len();
        let src = PairArms {
            data,
            members: &members,
            pairs: &pairs,
        };
        for (i, pair) in pairs.iter().enumerate().skip(start) {
            let mut slot = Slot::new(cfg.seed, &src, i);
            let other = if pair.0 == new_id { pair.1 } else { pair.0 };
            let pa = exact_parent.get(&ordered(a, other));
            let pb = exact_parent.get(&ordered(b, other));
            if let (Some(&ma), Some(&mb)) = (pa, pb) {
                slot.state.exact = true;
                slot.state.estimate.mean = (size_a * ma + size_b * mb) / (size_a + size_b);
                slot.warmed = true;
            }
            slots.push(slot);
        }
    }
    ledger.brute_total = (n * (n - 1) / 2) as f64;
    Ok(HierResult {
        dendrogram: Dendrogram {
            n_leaves: n,
            merges,
        },
        ledger,
        arms_created,
    })
}

/// `C(n, 2) + C(n - 1, 2)`.
pub fn expected_arm_count(n: usize) -> usize {
    n * (n - 1) / 2 + (n.saturating_sub(1)) * n.saturating_sub(2) / 2
}
