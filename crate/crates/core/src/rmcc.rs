//! Regular multicolored clique instances.
//!
//! Vertices are `v_{j,i}` with color `j` in `1..=k` and index `i` in `1..=n`,
//! written `j.i` in files. The edge order is significant: the reduction to
//! f-MSCS numbers edges `e_1..e_m` in list order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Guard, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub color: usize,
    pub index: usize,
}

impl Vertex {
    pub fn new(color: usize, index: usize) -> Self {
        Vertex { color, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.color, self.index)
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}.{}", self.color, self.index)
    }
}

impl FromStr for Vertex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("vertex {s:?} is not of the form color.index"));
        let (c, i) = s.split_once('.').ok_or_else(bad)?;
        Ok(Vertex {
            color: c.parse().map_err(|_| bad())?,
            index: i.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for Vertex {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(de)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RmccGraph {
    pub k: usize,
    pub n: usize,
    pub d: usize,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(Vertex, Vertex)>,
}

/// One vertex index per color: `indices[j-1]` is `i_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MulticoloredClique {
    pub indices: Vec<usize>,
}

impl MulticoloredClique {
    pub fn vertices(&self) -> Vec<Vertex> {
        self.indices
            .iter()
            .enumerate()
            .map(|(j, &i)| Vertex::new(j + 1, i))
            .collect()
    }
}

impl fmt::Display for MulticoloredClique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.vertices().iter().map(|v| format!("v{v}")).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

impl RmccGraph {
    /// Graph on the full vertex set `V_1 .. V_k` of size `n` each.
    pub fn new(k: usize, n: usize, d: usize, edges: Vec<(Vertex, Vertex)>) -> Self {
        let vertices = (1..=k)
            .flat_map(|j| (1..=n).map(move |i| Vertex::new(j, i)))
            .collect();
        RmccGraph {
            k,
            n,
            d,
            vertices,
            edges,
        }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_set(&self) -> HashSet<(Vertex, Vertex)> {
        self.edges.iter().map(|&(u, v)| ordered(u, v)).collect()
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.iter().any(|&(a, b)| ordered(a, b) == ordered(u, v))
    }

    /// Every problem with the instance; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut per_color: BTreeMap<usize, usize> = BTreeMap::new();
        for v in &self.vertices {
            if v.color == 0 || v.color > self.k || v.index == 0 || v.index > self.n {
                out.push(format!("vertex {v} outside colors 1..={} / indices 1..={}", self.k, self.n));
            }
            if !seen.insert(*v) {
                out.push(format!("vertex {v} listed twice"));
            }
            *per_color.entry(v.color).or_default() += 1;
        }
        for j in 1..=self.k {
            let c = per_color.get(&j).copied().unwrap_or(0);
            if c != self.n {
                out.push(format!("color class {j} has {c} vertices, expected {}", self.n));
            }
        }
        let mut degree: BTreeMap<Vertex, usize> = seen.iter().map(|&v| (v, 0)).collect();
        let mut edges = HashSet::new();
        for (h, &(u, v)) in self.edges.iter().enumerate() {
            if u == v {
                out.push(format!("edge e_{} is a self-loop at {u}", h + 1));
                continue;
            }
            if !edges.insert(ordered(u, v)) {
                out.push(format!("edge e_{} = {u} {v} is a duplicate", h + 1));
            }
            for w in [u, v] {
                match degree.get_mut(&w) {
                    Some(d) => *d += 1,
                    None => out.push(format!("edge e_{} uses unknown vertex {w}", h + 1)),
                }
            }
        }
        let irregular: Vec<String> = degree
            .iter()
            .filter(|(_, &d)| d != self.d)
            .map(|(v, d)| format!("{v}:{d}"))
            .collect();
        if !irregular.is_empty() {
            out.push(format!("degrees differ from d = {}: {}", self.d, irregular.join(" ")));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(v))
        }
    }

    /// Checks that `c` picks one in-range vertex per color and all pairs are edges.
    pub fn check_clique(&self, c: &MulticoloredClique) -> Result<()> {
        if c.indices.len() != self.k {
            return Err(Error::InvalidClique(format!(
                "{} vertices given for {} colors",
                c.indices.len(),
                self.k
            )));
        }
        if let Some(&i) = c.indices.iter().find(|&&i| i == 0 || i > self.n) {
            return Err(Error::InvalidClique(format!("index {i} outside 1..={}", self.n)));
        }
        let edges = self.edge_set();
        let vs = c.vertices();
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                if !edges.contains(&ordered(vs[a], vs[b])) {
                    return Err(Error::InvalidClique(format!("{} and {} are not adjacent", vs[a], vs[b])));
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("rmcc {} {} {}\n", self.k, self.n, self.d);
        for v in &self.vertices {
            s.push_str(&format!("{} {}\n", v.color, v.index));
        }
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    /// Parse the plain-text format: `rmcc k n d`, then one `color index` line
    /// per vertex, then one `j.i j.i` line per edge. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(no, l)| (no + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let err = |no: usize, msg: String| Error::Parse(format!("line {no}: {msg}"));
        let (no, header) = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 4 || head[0] != "rmcc" {
            return Err(err(no, format!("expected header \"rmcc k n d\", found {header:?}")));
        }
        let num = |s: &str, what: &str| s.parse::<usize>().map_err(|_| err(no, format!("{what} {s:?} is not a natural number")));
        let (k, n, d) = (num(head[1], "k")?, num(head[2], "n")?, num(head[3], "d")?);
        let mut vertices = Vec::with_capacity(k * n);
        let mut edges = Vec::new();
        for (no, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(err(no, format!("expected two fields, found {}", parts.len())));
            }
            if parts[0].contains('.') || parts[1].contains('.') {
                let u: Vertex = parts[0].parse().map_err(|e: Error| err(no, e.to_string()))?;
                let v: Vertex = parts[1].parse().map_err(|e: Error| err(no, e.to_string()))?;
                edges.push((u, v));
            } else {
                if !edges.is_empty() {
                    return Err(err(no, "vertex line after the first edge line".into()));
                }
                let c = parts[0].parse().map_err(|_| err(no, format!("bad color {:?}", parts[0])))?;
                let i = parts[1].parse().map_err(|_| err(no, format!("bad index {:?}", parts[1])))?;
                vertices.push(Vertex::new(c, i));
            }
        }
        Ok(RmccGraph {
            k,
            n,
            d,
            vertices,
            edges,
        })
    }
}

fn ordered(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Lexicographically first multicolored clique `(i_1, .., i_k)`, if any.
pub fn solve_clique_bruteforce(g: &RmccGraph, guard: &Guard) -> Result<Option<MulticoloredClique>> {
    let needed = (g.n as u128).checked_pow(g.k as u32).unwrap_or(u128::MAX);
    guard.check_states("clique candidates", needed)?;
    if g.k == 0 {
        return Ok(Some(MulticoloredClique { indices: vec![] }));
    }
    let (k, n) = (g.k, g.n);
    // adj[j][i][j'] = bitset of neighbours of v_{j,i} in class j'.
    let mut adj = vec![vec![vec![vec![false; n + 1]; k + 1]; n + 1]; k + 1];
    for &(u, v) in &g.edges {
        let ok = |w: Vertex| w.color >= 1 && w.color <= k && w.index >= 1 && w.index <= n;
        if ok(u) && ok(v) {
            adj[u.color][u.index][v.color][v.index] = true;
            adj[v.color][v.index][u.color][u.index] = true;
        }
    }
    fn extend(adj: &[Vec<Vec<Vec<bool>>>], k: usize, n: usize, cur: &mut Vec<usize>) -> bool {
        let j = cur.len() + 1;
        if j > k {
            return true;
        }
        for i in 1..=n {
            if cur.iter().enumerate().all(|(jj, &ii)| adj[jj + 1][ii][j][i]) {
                cur.push(i);
                if extend(adj, k, n, cur) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    let found = (1..=n).into_par_iter().find_map_first(|i1| {
        let mut cur = vec![i1];
        extend(&adj, k, n, &mut cur).then_some(cur)
    });
    let out = found.map(|indices| MulticoloredClique { indices });
    if let Some(c) = &out {
        g.check_clique(c)?;
    }
    Ok(out)
}

/// Colored cycle on `k*n` vertices, colors `1..k` repeating; 2-regular and
/// free of multicolored cliques once `k >= 3` and `k*n > 3`.
pub fn colored_cycle(k: usize, n: usize) -> Result<RmccGraph> {
    if k < 2 || k * n < 4 {
        return Err(Error::Infeasible(format!("colored cycle needs k >= 2 and k*n >= 4, got k={k}, n={n}")));
    }
    let at = |t: usize| Vertex::new(t % k + 1, t / k + 1);
    let len = k * n;
    let edges = (0..len).map(|t| (at(t), at((t + 1) % len))).collect();
    Ok(RmccGraph::new(k, n, 2, edges))
}

/// Class-pair multiplicities: symmetric, zero diagonal, row sums `d`, entries
/// in `lo..=n`. Found by seeded backtracking.
fn class_multiplicities(k: usize, n: usize, d: usize, lo: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let mut m = vec![vec![0usize; k]; k];
    let mut row = vec![0usize; k];
    // Pairs still to assign touching each class.
    let mut open = vec![k - 1; k];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        p: usize,
        pairs: &[(usize, usize)],
        n: usize,
        d: usize,
        lo: usize,
        m: &mut Vec<Vec<usize>>,
        row: &mut Vec<usize>,
        open: &mut Vec<usize>,
        rng: &mut ChaCha8Rng,
        budget: &mut u64,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if p == pairs.len() {
            return row.iter().all(|&r| r == d);
        }
        let (a, b) = pairs[p];
        let mut choices: Vec<usize> = (lo..=n).collect();
        choices.shuffle(rng);
        for x in choices {
            let fits = |c: usize, row: &[usize], open: &[usize]| {
                let r = row[c] + x;
                let left = open[c] - 1;
                r <= d && r + left * n >= d && r + left * lo <= d
            };
            if !fits(a, row, open) || !fits(b, row, open) {
                continue;
            }
            m[a][b] = x;
            m[b][a] = x;
            row[a] += x;
            row[b] += x;
            open[a] -= 1;
            open[b] -= 1;
            if rec(p + 1, pairs, n, d, lo, m, row, open, rng, budget) {
                return true;
            }
            row[a] -= x;
            row[b] -= x;
            open[a] += 1;
            open[b] += 1;
        }
        false
    }
    let mut budget = 2_000_000u64;
    rec(0, &pairs, n, d, lo, &mut m, &mut row, &mut open, rng, &mut budget).then_some(m)
}

/// Generated instance together with its planted clique, if one was requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generated {
    pub graph: RmccGraph,
    pub planted: Option<MulticoloredClique>,
}

/// Seeded generator built from circulant matchings between color classes.
///
/// Classes `j` and `j'` are joined by `M[j][j']` shifted matchings
/// `v_{j,i} ~ v_{j',i+t}`, which keeps every vertex at degree `d`. A planted
/// clique fixes one shift per class pair. Color-preserving double edge swaps
/// that avoid the planted edges then scramble the structure.
pub fn generate(k: usize, n: usize, d: usize, planted: bool, seed: u64) -> Result<Generated> {
    if k < 2 || n < 1 {
        return Err(Error::Infeasible(format!("need k >= 2 and n >= 1, got k={k}, n={n}")));
    }
    if (k * d) % 2 == 1 {
        return Err(Error::Infeasible(format!("k*d = {} is odd", k * d)));
    }
    if d > (k - 1) * n {
        return Err(Error::Infeasible(format!("d = {d} exceeds (k-1)n = {}", (k - 1) * n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = usize::from(planted);
    let mult = class_multiplicities(k, n, d, lo, &mut rng).ok_or_else(|| {
        Error::Infeasible(format!(
            "no class-pair multiplicities with row sums {d} in {lo}..={n} for k={k}"
        ))
    })?;
    // 0-based planted indices.
    let centre: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
    let mut edges = Vec::new();
    let mut protected = HashSet::new();
    for a in 0..k {
        for b in a + 1..k {
            let mut shifts: Vec<usize> = (0..n).collect();
            shifts.shuffle(&mut rng);
            let mut chosen: Vec<usize> = Vec::new();
            if planted {
                chosen.push((centre[b] + n - centre[a]) % n);
            }
            for t in shifts {
                if chosen.len() == mult[a][b] {
                    break;
                }
                if !chosen.contains(&t) {
                    chosen.push(t);
                }
            }
            for t in chosen {
                for i in 0..n {
                    edges.push((Vertex::new(a + 1, i + 1), Vertex::new(b + 1, (i + t) % n + 1)));
                }
            }
            if planted {
                protected.insert((Vertex::new(a + 1, centre[a] + 1), Vertex::new(b + 1, centre[b] + 1)));
            }
        }
    }
    // Per-class relabelling.
    let perms: Vec<Vec<usize>> = (0..k)
        .map(|_| {
            let mut p: Vec<usize> = (1..=n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    let relabel = |v: Vertex| Vertex::new(v.color, perms[v.color - 1][v.index - 1]);
    let mut edges: Vec<(Vertex, Vertex)> = edges.into_iter().map(|(u, v)| ordered(relabel(u), relabel(v))).collect();
    let protected: HashSet<(Vertex, Vertex)> = protected.into_iter().map(|(u, v)| ordered(relabel(u), relabel(v))).collect();

    let mut present: HashSet<(Vertex, Vertex)> = edges.iter().copied().collect();
    for _ in 0..4 * edges.len() {
        let x = rng.gen_range(0..edges.len());
        let y = rng.gen_range(0..edges.len());
        let ((a, b), (c, e)) = (edges[x], edges[y]);
        if x == y || a.color != c.color || b.color != e.color || a == c || b == e {
            continue;
        }
        if protected.contains(&edges[x]) || protected.contains(&edges[y]) {
            continue;
        }
        let (n1, n2) = (ordered(a, e), ordered(c, b));
        if present.contains(&n1) || present.contains(&n2) {
            continue;
        }
        present.remove(&edges[x]);
        present.remove(&edges[y]);
        present.insert(n1);
        present.insert(n2);
        edges[x] = n1;
        edges[y] = n2;
    }
    edges.sort();
    let graph = RmccGraph::new(k, n, d, edges);
    let planted = planted.then(|| MulticoloredClique {
        indices: (0..k).map(|j| perms[j][centre[j]]).collect(),
    });
    graph.ensure_valid()?;
    if let Some(c) = &planted {
        graph.check_clique(c)?;
    }
    Ok(Generated { graph, planted })
}

/// A certified no-instance: the colored cycle when `d = 2`, otherwise seeded
/// unplanted generations until the brute-force solver finds no clique.
pub fn generate_no_instance(k: usize, n: usize, d: usize, seed: u64, guard: &Guard) -> Result<RmccGraph> {
    if d == 2 {
        let g = colored_cycle(k, n)?;
        if solve_clique_bruteforce(&g, guard)?.is_none() {
            return Ok(g);
        }
    }
    for attempt in 0..2000u64 {
        let g = generate(k, n, d, false, seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9)))?.graph;
        if solve_clique_bruteforce(&g, guard)?.is_none() {
            return Ok(g);
        }
    }
    Err(Error::Infeasible(format!(
        "no clique-free instance found for k={k}, n={n}, d={d}"
    )))
}

/// Small sample graph: 3 colors of 3 vertices, 4-regular, whose
/// lexicographically first multicolored clique is `{v1.1, v2.3, v3.2}`.
/// Besides the clique edges it uses a completion with the fewest other
/// multicolored triangles (there are three in total).
pub fn sample_graph() -> RmccGraph {
    let e = |a: &str, b: &str| (a.parse().unwrap(), b.parse().unwrap());
    RmccGraph::new(
        3,
        3,
        4,
        vec![
            e("1.1", "2.3"),
            e("1.1", "3.1"),
            e("1.1", "3.2"),
            e("1.1", "3.3"),
            e("1.2", "2.2"),
            e("1.2", "2.3"),
            e("1.2", "3.1"),
            e("1.2", "3.3"),
            e("1.3", "2.1"),
            e("1.3", "2.2"),
            e("1.3", "2.3"),
            e("1.3", "3.3"),
            e("2.1", "3.1"),
            e("2.1", "3.2"),
            e("2.1", "3.3"),
            e("2.2", "3.1"),
            e("2.2", "3.2"),
            e("2.3", "3.2"),
        ],
    )
}
