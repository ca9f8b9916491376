//! Block models for sharpness examples: symbolic constructions with block sizes
//! affine in `m`, their instantiation, sharpness verification with the exact
//! solver, and a small exhaustive search.

use crate::generate::rng;
use crate::graph::{ColouredGraph, Mark};
use crate::hamiltonicity::{HamError, DP_CAP};
use crate::solver::solve;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::{BTreeMap, HashSet};
use std::hash::{DefaultHasher, Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtremalError {
    #[error("block {block} has negative size {size} at m = {m}")]
    NegativeSize { block: usize, size: i64, m: i64 },
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ham(#[from] HamError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "B")]
    Blue,
    #[serde(rename = "E")]
    Empty,
    #[serde(rename = "A")]
    Arbitrary,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::Red, Rule::Blue, Rule::Empty, Rule::Arbitrary];

    fn present(self) -> bool {
        self != Rule::Empty
    }

    fn swapped(self) -> Rule {
        match self {
            Rule::Red => Rule::Blue,
            Rule::Blue => Rule::Red,
            r => r,
        }
    }
}

/// Size `a·m + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Affine {
    pub a: i64,
    pub b: i64,
}

impl Affine {
    pub fn at(self, m: i64) -> i64 {
        self.a * m + self.b
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockModel {
    pub blocks: Vec<Affine>,
    /// Symmetric rules between blocks; diagonal entries are ignored.
    pub rules: Vec<Vec<Rule>>,
    pub intra: Vec<Rule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// How `Arbitrary` regions are coloured.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fill {
    Seeded(u64),
    AllRed,
    AllBlue,
}

impl BlockModel {
    pub fn new(blocks: Vec<Affine>, rules: Vec<Vec<Rule>>, intra: Vec<Rule>) -> Result<BlockModel, ExtremalError> {
        let k = blocks.len();
        if rules.len() != k || rules.iter().any(|r| r.len() != k) || intra.len() != k {
            return Err(ExtremalError::Malformed("rule matrix must be square and match the blocks".into()));
        }
        for i in 0..k {
            for j in 0..k {
                if i != j && rules[i][j] != rules[j][i] {
                    return Err(ExtremalError::Malformed(format!("rules not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(BlockModel { blocks, rules, intra, provenance: None })
    }

    pub fn from_json(s: &str) -> Result<BlockModel, ExtremalError> {
        let m: BlockModel = serde_json::from_str(s).map_err(|e| ExtremalError::Malformed(e.to_string()))?;
        let provenance = m.provenance.clone();
        let mut out = BlockModel::new(m.blocks, m.rules, m.intra)?;
        out.provenance = provenance;
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("block models serialise")
    }

    pub fn rule(&self, i: usize, j: usize) -> Rule {
        if i == j {
            self.intra[i]
        } else {
            self.rules[i][j]
        }
    }

    pub fn sizes(&self, m: i64) -> Result<Vec<usize>, ExtremalError> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let s = f.at(m);
                if s < 0 {
                    Err(ExtremalError::NegativeSize { block: i, size: s, m })
                } else {
                    Ok(s as usize)
                }
            })
            .collect()
    }

    pub fn order(&self, m: i64) -> Result<usize, ExtremalError> {
        Ok(self.sizes(m)?.iter().sum())
    }

    /// Minimum degree read off the rules, without building the graph.
    pub fn min_degree(&self, m: i64) -> Result<Option<usize>, ExtremalError> {
        let sizes = self.sizes(m)?;
        Ok((0..sizes.len())
            .filter(|&i| sizes[i] > 0)
            .map(|i| {
                (0..sizes.len())
                    .filter(|&j| self.rule(i, j).present())
                    .map(|j| if i == j { sizes[j] - 1 } else { sizes[j] })
                    .sum()
            })
            .min())
    }

    pub fn colour_swapped(&self) -> BlockModel {
        BlockModel {
            blocks: self.blocks.clone(),
            rules: self.rules.iter().map(|r| r.iter().map(|x| x.swapped()).collect()).collect(),
            intra: self.intra.iter().map(|x| x.swapped()).collect(),
            provenance: self.provenance.clone(),
        }
    }

    fn has_arbitrary(&self) -> bool {
        self.intra.contains(&Rule::Arbitrary) || self.rules.iter().flatten().any(|&r| r == Rule::Arbitrary)
    }
}

/// Builds the graph at `m`: blocks are consecutive vertex ranges.
pub fn instantiate(model: &BlockModel, m: i64, fill: Fill) -> Result<ColouredGraph, ExtremalError> {
    let sizes = model.sizes(m)?;
    let n: usize = sizes.iter().sum();
    let mut starts = vec![0usize; sizes.len()];
    for i in 1..sizes.len() {
        starts[i] = starts[i - 1] + sizes[i - 1];
    }
    let block_of: Vec<usize> = (0..sizes.len()).flat_map(|i| std::iter::repeat_n(i, sizes[i])).collect();
    let mut g = ColouredGraph::empty(n);
    let mut r = match fill {
        Fill::Seeded(s) => Some(rng(s)),
        _ => None,
    };
    for u in 0..n {
        for v in u + 1..n {
            let mark = match model.rule(block_of[u], block_of[v]) {
                Rule::Red => Mark::Red,
                Rule::Blue => Mark::Blue,
                Rule::Empty => continue,
                Rule::Arbitrary => match (&mut r, fill) {
                    (Some(r), _) => {
                        if r.random_bool(0.5) {
                            Mark::Red
                        } else {
                            Mark::Blue
                        }
                    }
                    (None, Fill::AllBlue) => Mark::Blue,
                    _ => Mark::Red,
                },
            };
            g.set_mark(u, v, mark);
        }
    }
    Ok(g)
}

pub fn target_degree(n: usize) -> usize {
    (3 * n).div_ceil(4).saturating_sub(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharpnessReport {
    pub m: i64,
    pub n: usize,
    pub min_degree: usize,
    pub target: usize,
    pub degree_matches: bool,
    pub fills_checked: usize,
    /// Fills (seed or "red"/"blue") under which a partition exists.
    pub partitioned_fills: Vec<String>,
    pub pass: bool,
}

fn fills(seeds: usize) -> Vec<Fill> {
    let mut out = vec![Fill::AllRed, Fill::AllBlue];
    out.extend((0..seeds as u64).map(Fill::Seeded));
    out
}

fn fill_name(f: Fill) -> String {
    match f {
        Fill::AllRed => "red".into(),
        Fill::AllBlue => "blue".into(),
        Fill::Seeded(s) => format!("seed {s}"),
    }
}

/// Checks `δ = ⌈3n/4⌉ - 1` and that no fill admits a partition. Models without
/// arbitrary regions are solved once.
pub fn verify_sharpness(model: &BlockModel, m: i64, seeds: usize) -> Result<SharpnessReport, ExtremalError> {
    let n = model.order(m)?;
    if n > DP_CAP {
        return Err(HamError::Capacity { n, cap: DP_CAP }.into());
    }
    let min_degree = model.min_degree(m)?.unwrap_or(0);
    let target = target_degree(n);
    let fs = if model.has_arbitrary() { fills(seeds) } else { vec![Fill::AllRed] };
    let mut partitioned = Vec::new();
    for &f in &fs {
        if solve(&instantiate(model, m, f)?)?.is_some() {
            partitioned.push(fill_name(f));
        }
    }
    let degree_matches = min_degree == target;
    Ok(SharpnessReport {
        m,
        n,
        min_degree,
        target,
        degree_matches,
        fills_checked: fs.len(),
        pass: degree_matches && partitioned.is_empty(),
        partitioned_fills: partitioned,
    })
}

/// Solver verdict after deleting each single vertex of the instance at `m`
/// (`true` = still no partition).
pub fn hereditary_check(model: &BlockModel, m: i64, fill: Fill) -> Result<Vec<bool>, ExtremalError> {
    let g = instantiate(model, m, fill)?;
    (0..g.n()).map(|v| Ok(solve(&g.delete_vertex(v))?.is_none())).collect()
}

/// Caption target: order `4m + order_offset`, minimum degree `3m + degree_offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Target {
    pub order_offset: i64,
    pub degree_offset: i64,
}

impl Target {
    pub fn parse(s: &str) -> Option<Target> {
        // "4m+1,3m" style.
        let (o, d) = s.split_once(',')?;
        let off = |t: &str, lead: &str| -> Option<i64> {
            let t = t.trim().strip_prefix(lead)?;
            if t.is_empty() {
                Some(0)
            } else {
                t.replace('+', "").parse().ok()
            }
        };
        Some(Target { order_offset: off(o, "4m")?, degree_offset: off(d, "3m")? })
    }
}

#[derive(Clone, Debug)]
pub struct SearchParams {
    pub max_blocks: usize,
    pub probes: Vec<i64>,
    pub target: Target,
    /// Largest `|b|` in block sizes `a·m + b`.
    pub max_offset: i64,
    pub seeds: usize,
    /// Stop after this many distinct models.
    pub limit: usize,
    /// Also try arbitrary regions on non-empty slots.
    pub arbitrary: bool,
}

fn wl_hash(g: &ColouredGraph, arbitrary: &[Vec<bool>]) -> u64 {
    let n = g.n();
    let kind = |u: usize, v: usize| -> u8 {
        if arbitrary[u][v] {
            3
        } else {
            match g.mark(u, v) {
                Mark::None => 0,
                Mark::Red => 1,
                Mark::Blue => 2,
                Mark::Both => 4,
            }
        }
    };
    let mut labels = vec![0u64; n];
    for _ in 0..n.max(1) {
        labels = (0..n)
            .map(|u| {
                let mut nb: Vec<(u8, u64)> = (0..n).filter(|&v| v != u).map(|v| (kind(u, v), labels[v])).collect();
                nb.sort_unstable();
                let mut h = DefaultHasher::new();
                (labels[u], nb).hash(&mut h);
                h.finish()
            })
            .collect();
    }
    labels.sort_unstable();
    let mut h = DefaultHasher::new();
    labels.hash(&mut h);
    h.finish()
}

/// Isomorphism hash of the instance at `m`, invariant under swapping colours.
pub fn canonical_hash(model: &BlockModel, m: i64) -> Result<u64, ExtremalError> {
    let one = |mdl: &BlockModel| -> Result<u64, ExtremalError> {
        let g = instantiate(mdl, m, Fill::AllRed)?;
        let sizes = mdl.sizes(m)?;
        let block_of: Vec<usize> = (0..sizes.len()).flat_map(|i| std::iter::repeat_n(i, sizes[i])).collect();
        let arb: Vec<Vec<bool>> = (0..g.n())
            .map(|u| (0..g.n()).map(|v| u != v && mdl.rule(block_of[u], block_of[v]) == Rule::Arbitrary).collect())
            .collect();
        Ok(wl_hash(&g, &arb))
    };
    Ok(one(model)?.min(one(&model.colour_swapped())?))
}

/// Size vectors `(a_i, b_i)` with `Σa = 4`, `Σb = order_offset`, listed in
/// non-increasing order, positive at every probe.
fn size_vectors(k: usize, target: Target, max_offset: i64, probes: &[i64]) -> Vec<Vec<Affine>> {
    let mut forms: Vec<Affine> = (0..=4).flat_map(|a| (-max_offset..=max_offset).map(move |b| Affine { a, b })).collect();
    forms.retain(|f| probes.iter().all(|&m| f.at(m) > 0));
    forms.sort_unstable_by(|x, y| y.cmp(x));
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(forms: &[Affine], start: usize, k: usize, a_left: i64, b_left: i64, cur: &mut Vec<Affine>, out: &mut Vec<Vec<Affine>>) {
        if cur.len() == k {
            if a_left == 0 && b_left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for (i, f) in forms.iter().enumerate().skip(start) {
            if f.a <= a_left {
                cur.push(*f);
                rec(forms, i, k, a_left - f.a, b_left - f.b, cur, out);
                cur.pop();
            }
        }
    }
    rec(&forms, 0, k, 4, target.order_offset, &mut cur, &mut out);
    out
}

/// Searches block models with at most `max_blocks` blocks whose instances at
/// every probe have order `4m + order_offset`, minimum degree
/// `3m + degree_offset` (which must equal `⌈3n/4⌉ - 1`), and no partition under
/// any fill. Deduplicated by canonical hash at the smallest probe.
///
/// Empty slots are enumerated first: every vertex may miss at most
/// `n - 1 - δ` others, which prunes most patterns before colours are tried.
pub fn search_models(params: &SearchParams) -> Result<Vec<BlockModel>, ExtremalError> {
    let mut found = Vec::new();
    let mut hashes = HashSet::new();
    let probes = &params.probes;
    let m0 = *probes.iter().min().ok_or_else(|| ExtremalError::Malformed("no probes".into()))?;
    let alphabet: &[Rule] = if params.arbitrary { &[Rule::Red, Rule::Blue, Rule::Arbitrary] } else { &[Rule::Red, Rule::Blue] };
    for k in 1..=params.max_blocks {
        let slots: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
        for sizes in size_vectors(k, params.target, params.max_offset, probes) {
            let at: Vec<Vec<i64>> = probes.iter().map(|&m| sizes.iter().map(|f| f.at(m)).collect()).collect();
            for empty in 0u32..(1 << slots.len()) {
                let is_empty = |t: usize| empty >> t & 1 == 1;
                // Singleton blocks have no inner pairs; keep their slot canonical.
                if slots.iter().enumerate().any(|(t, &(i, j))| i == j && sizes[i] == (Affine { a: 0, b: 1 }) && !is_empty(t)) {
                    continue;
                }
                let budget_ok = probes.iter().enumerate().all(|(p, &m)| {
                    let n = 4 * m + params.target.order_offset;
                    let budget = n - 1 - (3 * m + params.target.degree_offset);
                    let missing: Vec<i64> = (0..k)
                        .map(|i| {
                            slots
                                .iter()
                                .enumerate()
                                .filter(|&(t, &(a, b))| is_empty(t) && (a == i || b == i))
                                .map(|(_, &(a, b))| if a == b { at[p][a] - 1 } else { at[p][a + b - i] })
                                .sum()
                        })
                        .collect();
                    missing.iter().all(|&x| x <= budget) && missing.contains(&budget)
                });
                if !budget_ok {
                    continue;
                }
                let open: Vec<usize> = (0..slots.len()).filter(|&t| !is_empty(t)).collect();
                let combos = (alphabet.len() as u64).pow(open.len() as u32);
                for mut code in 0..combos {
                    let mut rules = vec![vec![Rule::Empty; k]; k];
                    let mut intra = vec![Rule::Empty; k];
                    for &t in &open {
                        let r = alphabet[(code % alphabet.len() as u64) as usize];
                        code /= alphabet.len() as u64;
                        let (i, j) = slots[t];
                        if i == j {
                            intra[i] = r;
                        } else {
                            rules[i][j] = r;
                            rules[j][i] = r;
                        }
                    }
                    // Colour swap gives an equivalent model; keep one of each pair.
                    if open.first().is_some_and(|&t| {
                        let (i, j) = slots[t];
                        (if i == j { intra[i] } else { rules[i][j] }) == Rule::Blue
                    }) {
                        continue;
                    }
                    let model = BlockModel { blocks: sizes.clone(), rules, intra, provenance: None };
                    if !symmetry_canonical(&model) {
                        continue;
                    }
                    let mut pass = true;
                    for &m in probes {
                        if !verify_sharpness(&model, m, params.seeds)?.pass {
                            pass = false;
                            break;
                        }
                    }
                    if pass && hashes.insert(canonical_hash(&model, m0)?) {
                        let mut model = model;
                        model.provenance = Some(format!(
                            "search: target (4m{:+}, 3m{:+}), probes {:?}, {} seeded fills",
                            params.target.order_offset, params.target.degree_offset, probes, params.seeds
                        ));
                        found.push(model);
                        if found.len() >= params.limit {
                            return Ok(found);
                        }
                    }
                }
            }
        }
    }
    Ok(found)
}

/// Among blocks of equal size, keeps only assignments whose per-block
/// signatures are non-increasing, removing most relabelled duplicates.
fn symmetry_canonical(model: &BlockModel) -> bool {
    let k = model.blocks.len();
    let sig = |i: usize| -> (Rule, Vec<Rule>) {
        let mut row: Vec<Rule> = (0..k).filter(|&j| j != i).map(|j| model.rules[i][j]).collect();
        row.sort_unstable();
        (model.intra[i], row)
    };
    (1..k).all(|i| model.blocks[i] != model.blocks[i - 1] || sig(i - 1) >= sig(i))
}

/// Models stored with the crate, each checked by the test suite.
pub fn known_models() -> BTreeMap<&'static str, BlockModel> {
    let mut out = BTreeMap::new();
    let a = |a, b| Affine { a, b };
    use Rule::*;
    let mut m1 = BlockModel::new(
        vec![a(1, 1), a(1, 1), a(1, 0), a(1, -1)],
        vec![
            vec![Empty, Blue, Red, Red],
            vec![Blue, Empty, Red, Red],
            vec![Red, Red, Empty, Blue],
            vec![Red, Red, Blue, Empty],
        ],
        vec![Empty; 4],
    )
    .expect("valid model");
    m1.provenance = Some("hand construction: red K_{2m+2,2m-1} with blue K_{m+1,m+1} and K_{m,m-1}".into());
    out.insert("4m+1", m1);
    out
}

pub fn report_json(model: &BlockModel, reports: &[SharpnessReport]) -> Value {
    json!({ "model": model.to_json(), "reports": reports, "pass": reports.iter().all(|r| r.pass) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::View;

    fn one_block(rule: Rule) -> BlockModel {
        BlockModel::new(vec![Affine { a: 1, b: 0 }], vec![vec![Rule::Empty]], vec![rule]).unwrap()
    }

    #[test]
    fn instantiate_examples() {
        let g = instantiate(&one_block(Rule::Red), 5, Fill::AllRed).unwrap();
        assert_eq!(g.edge_count(View::Red), 10);
        let two = BlockModel::new(
            vec![Affine { a: 1, b: 0 }; 2],
            vec![vec![Rule::Empty, Rule::Blue], vec![Rule::Blue, Rule::Empty]],
            vec![Rule::Empty; 2],
        )
        .unwrap();
        let g = instantiate(&two, 3, Fill::AllRed).unwrap();
        assert_eq!((g.edge_count(View::Blue), g.edge_count(View::Red)), (9, 0));
        assert_eq!(instantiate(&two, 0, Fill::AllRed).unwrap().n(), 0);
        let neg = BlockModel::new(vec![Affine { a: 1, b: -3 }], vec![vec![Rule::Empty]], vec![Rule::Red]).unwrap();
        assert!(matches!(instantiate(&neg, 2, Fill::AllRed), Err(ExtremalError::NegativeSize { .. })));
    }

    #[test]
    fn known_model_is_sharp() {
        let model = &known_models()["4m+1"];
        for m in [2, 3] {
            let r = verify_sharpness(model, m, 16).unwrap();
            assert!(r.pass, "{r:?}");
            assert_eq!(r.min_degree as i64, 3 * m);
        }
    }

    #[test]
    fn complete_graph_fails() {
        let r = verify_sharpness(&one_block(Rule::Red), 5, 16).unwrap();
        assert!(!r.pass && !r.partitioned_fills.is_empty());
        assert!(!r.degree_matches);
    }

    #[test]
    fn one_block_search_is_empty() {
        let p = SearchParams {
            max_blocks: 1,
            probes: vec![2, 3],
            target: Target { order_offset: 1, degree_offset: 0 },
            max_offset: 2,
            seeds: 16,
            limit: 10,
            arbitrary: true,
        };
        assert!(search_models(&p).unwrap().is_empty());
    }

    #[test]
    fn hash_ignores_colour_swap() {
        let m = &known_models()["4m+1"];
        assert_eq!(canonical_hash(m, 2).unwrap(), canonical_hash(&m.colour_swapped(), 2).unwrap());
        let json = m.to_json().to_string();
        assert_eq!(&BlockModel::from_json(&json).unwrap(), m);
    }

    #[test]
    fn target_parsing() {
        assert_eq!(Target::parse("4m+1,3m"), Some(Target { order_offset: 1, degree_offset: 0 }));
        assert_eq!(Target::parse("4m,3m-1"), Some(Target { order_offset: 0, degree_offset: -1 }));
    }
}
