//! Total unimodularity checks.
//!
//! Camion's criterion: a `{-1, 0, 1}` matrix is totally unimodular iff every
//! Eulerian square submatrix (all row and column sums even) has an entry sum
//! divisible by four. A single Eulerian square submatrix with sum `2 mod 4` is
//! therefore a certificate of non-unimodularity.
//!
//! [`search_eulerian_violation`] looks for such certificates with a bounded
//! search. Not finding one proves nothing unless the search was exhaustive.
//! [`minor_determinant_scan`] checks determinants directly and is meant for
//! small matrices only.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{ConstraintSystem, RowLabel, Variable};
use crate::lattice::{TriangleDictionary, TriangleId};
use crate::par::{self, Execution};
use crate::{Error, Result};

/// Sparse integer matrix with row and column access.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    row_entries: Vec<Vec<(usize, i64)>>,
    col_entries: Vec<Vec<(usize, i64)>>,
}

impl IntMatrix {
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, i64)]) -> Self {
        let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
        for &(i, j, v) in triplets {
            assert!(i < rows && j < cols, "entry ({i}, {j}) out of range");
            *acc.entry((i, j)).or_default() += v;
        }
        let mut row_entries = vec![Vec::new(); rows];
        let mut col_entries = vec![Vec::new(); cols];
        let mut keys: Vec<_> = acc.into_iter().filter(|(_, v)| *v != 0).collect();
        keys.sort_unstable();
        for ((i, j), v) in keys {
            row_entries[i].push((j, v));
            col_entries[j].push((i, v));
        }
        for c in &mut col_entries {
            c.sort_unstable();
        }
        IntMatrix {
            rows,
            cols,
            row_entries,
            col_entries,
        }
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let t: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                assert_eq!(r.len(), cols, "ragged matrix");
                r.iter().enumerate().map(move |(j, &v)| (i, j, v))
            })
            .collect();
        IntMatrix::from_triplets(rows.len(), cols, &t)
    }

    pub fn from_system(system: &ConstraintSystem) -> Self {
        let t: Vec<_> = system
            .triplets()
            .into_iter()
            .map(|(i, j, v)| (i, j, v as i64))
            .collect();
        IntMatrix::from_triplets(system.rows, system.cols(), &t)
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        let r = &self.row_entries[i];
        r.binary_search_by_key(&j, |e| e.0).map_or(0, |k| r[k].1)
    }

    pub fn row(&self, i: usize) -> &[(usize, i64)] {
        &self.row_entries[i]
    }

    pub fn column(&self, j: usize) -> &[(usize, i64)] {
        &self.col_entries[j]
    }

    pub fn dense(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0; self.cols]; self.rows];
        for (i, r) in self.row_entries.iter().enumerate() {
            for &(j, v) in r {
                d[i][j] = v;
            }
        }
        d
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<i64>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.get(i, j)).collect())
            .collect()
    }

    pub fn row_sums(&self) -> Vec<i64> {
        self.row_entries.iter().map(|r| r.iter().map(|e| e.1).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<i64> {
        self.col_entries.iter().map(|c| c.iter().map(|e| e.1).sum()).collect()
    }
}

/// Square submatrix selection claimed to be Eulerian with the given entry sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerianCertificate {
    pub row_ids: Vec<usize>,
    pub col_ids: Vec<usize>,
    pub entry_sum: i64,
}

impl EulerianCertificate {
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "rows: {}\ncols: {}\nsum: {}\n",
            join(&self.row_ids),
            join(&self.col_ids),
            self.entry_sum
        )
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut rows = None;
        let mut cols = None;
        let mut sum = None;
        for (k, line) in text.lines().enumerate() {
            let ln = k + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(path, ln, "expected `key: value`"))?;
            let ids = || -> Result<Vec<usize>> {
                value
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|e| Error::parse(path, ln, format!("bad index: {e}"))))
                    .collect()
            };
            match key.trim() {
                "rows" => rows = Some(ids()?),
                "cols" => cols = Some(ids()?),
                "sum" => {
                    sum = Some(
                        value
                            .trim()
                            .parse()
                            .map_err(|e| Error::parse(path, ln, format!("bad sum: {e}")))?,
                    )
                }
                other => return Err(Error::parse(path, ln, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::parse(path, 0, format!("missing `{k}`"));
        Ok(EulerianCertificate {
            row_ids: rows.ok_or_else(|| missing("rows"))?,
            col_ids: cols.ok_or_else(|| missing("cols"))?,
            entry_sum: sum.ok_or_else(|| missing("sum"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertificateCheck {
    pub is_eulerian: bool,
    pub sum: i64,
    pub divisible_by_four: bool,
    /// The recomputed sum equals the claimed one.
    pub sum_matches: bool,
}

impl CertificateCheck {
    /// Eulerian with sum `2 mod 4`: the matrix is not totally unimodular.
    pub fn proves_not_tu(&self) -> bool {
        self.is_eulerian && !self.divisible_by_four
    }
}

pub fn verify_certificate(m: &IntMatrix, cert: &EulerianCertificate) -> Result<CertificateCheck> {
    if cert.row_ids.len() != cert.col_ids.len() {
        return Err(Error::Dimension(format!(
            "certificate selects {} rows and {} columns",
            cert.row_ids.len(),
            cert.col_ids.len()
        )));
    }
    let distinct = |v: &[usize], n: usize, what: &str| -> Result<()> {
        let mut s = v.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != v.len() || v.iter().any(|&x| x >= n) {
            return Err(Error::Dimension(format!("{what} indices repeated or out of range")));
        }
        Ok(())
    };
    distinct(&cert.row_ids, m.rows, "row")?;
    distinct(&cert.col_ids, m.cols, "column")?;
    let sub = m.submatrix(&cert.row_ids, &cert.col_ids);
    let rows_even = sub.iter().all(|r| r.iter().sum::<i64>() % 2 == 0);
    let cols_even = (0..cert.col_ids.len()).all(|j| sub.iter().map(|r| r[j]).sum::<i64>() % 2 == 0);
    let sum: i64 = sub.iter().flatten().sum();
    Ok(CertificateCheck {
        is_eulerian: rows_even && cols_even,
        sum,
        divisible_by_four: sum.rem_euclid(4) == 0,
        sum_matches: sum == cert.entry_sum,
    })
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Largest connected block of rows considered.
    pub max_size: usize,
    /// Row sets examined per seed row.
    pub budget: usize,
    /// Shuffle the seed order; `None` keeps natural row order.
    pub seed: Option<u64>,
    pub exec: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_size: 6,
            budget: 100_000,
            seed: None,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub certificate: Option<EulerianCertificate>,
    pub row_sets: usize,
    pub kernel_vectors: usize,
    /// Every connected row set up to `max_size` was examined in full. Only then
    /// does a missing certificate mean "no violation up to that size".
    pub exhaustive: bool,
}

const KERNEL_CAP: usize = 14;

#[derive(Default)]
struct SeedResult {
    certificate: Option<EulerianCertificate>,
    row_sets: usize,
    kernel_vectors: usize,
    truncated: bool,
}

/// Bounded search for an Eulerian square submatrix with sum `2 mod 4`.
///
/// Enumerates connected row sets (rows linked through shared columns), solves
/// the column parity conditions over GF(2), and pads the block to a square
/// with zero rows or columns of the matrix. Restricting to connected blocks
/// loses nothing: some connected component of any violating submatrix is
/// itself violating and can be padded back to a square.
pub fn search_eulerian_violation(m: &IntMatrix, max_size: usize, budget: usize) -> SearchOutcome {
    search_eulerian_violation_with(
        m,
        &SearchOptions {
            max_size,
            budget,
            ..SearchOptions::default()
        },
    )
}

pub fn search_eulerian_violation_with(m: &IntMatrix, opts: &SearchOptions) -> SearchOutcome {
    let max_size = opts.max_size.min(63);
    let mut order: Vec<usize> = (0..m.rows).filter(|&i| !m.row(i).is_empty()).collect();
    if let Some(seed) = opts.seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut rank = vec![usize::MAX; m.rows];
    for (k, &r) in order.iter().enumerate() {
        rank[r] = k;
    }
    let neighbors: Vec<Vec<usize>> = (0..m.rows)
        .map(|r| {
            let mut n: Vec<usize> = m
                .row(r)
                .iter()
                .flat_map(|&(c, _)| m.column(c).iter().map(|e| e.0))
                .filter(|&u| u != r)
                .collect();
            n.sort_unstable_by_key(|&u| rank[u]);
            n.dedup();
            n
        })
        .collect();

    let winner = AtomicUsize::new(usize::MAX);
    let results = par::map_range(opts.exec, order.len(), |s| {
        if winner.load(Ordering::Relaxed) < s {
            return None;
        }
        let r = search_seed(m, &order, &rank, &neighbors, s, max_size, opts.budget);
        if r.certificate.is_some() {
            winner.fetch_min(s, Ordering::Relaxed);
        }
        Some(r)
    });
    let mut out = SearchOutcome {
        certificate: None,
        row_sets: 0,
        kernel_vectors: 0,
        exhaustive: true,
    };
    for r in results.into_iter() {
        let Some(r) = r else { break };
        out.row_sets += r.row_sets;
        out.kernel_vectors += r.kernel_vectors;
        out.exhaustive &= !r.truncated;
        if r.certificate.is_some() {
            out.certificate = r.certificate;
            break;
        }
    }
    out
}

struct SeedSearch<'a> {
    m: &'a IntMatrix,
    rank: &'a [usize],
    neighbors: &'a [Vec<usize>],
    seed_rank: usize,
    max_size: usize,
    budget: usize,
    marks: Vec<u32>,
    result: SeedResult,
}

fn search_seed(
    m: &IntMatrix,
    order: &[usize],
    rank: &[usize],
    neighbors: &[Vec<usize>],
    s: usize,
    max_size: usize,
    budget: usize,
) -> SeedResult {
    let mut st = SeedSearch {
        m,
        rank,
        neighbors,
        seed_rank: s,
        max_size,
        budget,
        marks: vec![0; m.rows],
        result: SeedResult::default(),
    };
    let v = order[s];
    st.mark(v, 1);
    let ext: Vec<usize> = neighbors[v].iter().copied().filter(|&u| rank[u] > s).collect();
    st.extend(&mut vec![v], ext);
    st.result
}

impl SeedSearch<'_> {
    fn mark(&mut self, w: usize, delta: i32) {
        let apply = |x: &mut u32| *x = (*x as i32 + delta) as u32;
        apply(&mut self.marks[w]);
        for &u in &self.neighbors[w] {
            apply(&mut self.marks[u]);
        }
    }

    /// Returns true when the search for this seed should stop.
    fn extend(&mut self, sub: &mut Vec<usize>, mut ext: Vec<usize>) -> bool {
        if self.result.row_sets >= self.budget {
            self.result.truncated = true;
            return true;
        }
        self.result.row_sets += 1;
        if let Some(cert) = self.evaluate(sub) {
            self.result.certificate = Some(cert);
            return true;
        }
        if sub.len() == self.max_size {
            return false;
        }
        while let Some(w) = ext.pop() {
            let mut next = ext.clone();
            for &u in &self.neighbors[w] {
                if self.rank[u] > self.seed_rank && self.marks[u] == 0 {
                    next.push(u);
                }
            }
            self.mark(w, 1);
            sub.push(w);
            let stop = self.extend(sub, next);
            sub.pop();
            self.mark(w, -1);
            if stop {
                return true;
            }
        }
        false
    }

    fn evaluate(&mut self, sub: &[usize]) -> Option<EulerianCertificate> {
        let m = self.m;
        let full: u64 = if sub.len() == 64 { u64::MAX } else { (1u64 << sub.len()) - 1 };
        let mut cand: HashMap<usize, (u64, i64)> = HashMap::new();
        for (bit, &r) in sub.iter().enumerate() {
            for &(c, v) in m.row(r) {
                let e = cand.entry(c).or_default();
                e.0 |= 1 << bit;
                e.1 += v;
            }
        }
        let mut cands: Vec<(usize, u64, i64)> = cand
            .into_iter()
            .filter(|(_, (mask, _))| mask.count_ones() % 2 == 0)
            .map(|(c, (mask, sum))| (c, mask, sum))
            .collect();
        cands.sort_unstable();
        let kernel = gf2_kernel(&cands.iter().map(|c| c.1).collect::<Vec<_>>());
        let k = kernel.len().min(KERNEL_CAP);
        if kernel.len() > KERNEL_CAP {
            self.result.truncated = true;
        }
        let words = cands.len().div_ceil(64);
        for combo in 1u64..(1u64 << k) {
            self.result.kernel_vectors += 1;
            let mut sel = vec![0u64; words];
            for (b, kv) in kernel.iter().enumerate().take(k) {
                if combo >> b & 1 == 1 {
                    for (s, x) in sel.iter_mut().zip(kv) {
                        *s ^= x;
                    }
                }
            }
            let mut cover = 0u64;
            let mut sum = 0i64;
            let mut cols = Vec::new();
            for (idx, &(c, mask, s)) in cands.iter().enumerate() {
                if sel[idx / 64] >> (idx % 64) & 1 == 1 {
                    cover |= mask;
                    sum += s;
                    cols.push(c);
                }
            }
            if cover != full || sum.rem_euclid(4) != 2 {
                continue;
            }
            if let Some(cert) = pad_to_square(m, sub, &cols, sum) {
                return Some(cert);
            }
        }
        None
    }
}

/// Basis of `{S : XOR of masks in S = 0}` as bitsets over the mask indices.
fn gf2_kernel(masks: &[u64]) -> Vec<Vec<u64>> {
    let words = masks.len().div_ceil(64);
    let mut pivots: HashMap<u32, (u64, Vec<u64>)> = HashMap::new();
    let mut kernel = Vec::new();
    for (j, &mask) in masks.iter().enumerate() {
        let mut v = mask;
        let mut comb = vec![0u64; words];
        comb[j / 64] |= 1 << (j % 64);
        loop {
            if v == 0 {
                kernel.push(comb);
                break;
            }
            let b = v.trailing_zeros();
            match pivots.get(&b) {
                Some((pv, pc)) => {
                    v ^= pv;
                    for (c, p) in comb.iter_mut().zip(pc) {
                        *c ^= p;
                    }
                }
                None => {
                    pivots.insert(b, (v, comb));
                    break;
                }
            }
        }
    }
    kernel
}

fn pad_to_square(m: &IntMatrix, rows: &[usize], cols: &[usize], sum: i64) -> Option<EulerianCertificate> {
    let mut rows = rows.to_vec();
    let mut cols = cols.to_vec();
    if cols.len() < rows.len() {
        let need = rows.len() - cols.len();
        let extra: Vec<usize> = (0..m.cols)
            .filter(|j| !cols.contains(j) && m.column(*j).iter().all(|e| !rows.contains(&e.0)))
            .take(need)
            .collect();
        if extra.len() < need {
            return None;
        }
        cols.extend(extra);
    } else if rows.len() < cols.len() {
        let need = cols.len() - rows.len();
        let extra: Vec<usize> = (0..m.rows)
            .filter(|i| !rows.contains(i) && m.row(*i).iter().all(|e| !cols.contains(&e.0)))
            .take(need)
            .collect();
        if extra.len() < need {
            return None;
        }
        rows.extend(extra);
    }
    rows.sort_unstable();
    cols.sort_unstable();
    Some(EulerianCertificate {
        row_ids: rows,
        col_ids: cols,
        entry_sum: sum,
    })
}

/// A square submatrix and its determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Minor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: i64,
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    (sign * m[n - 1][n - 1]) as i64
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> bool) -> bool {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return false;
    }
    loop {
        if f(&idx) {
            return true;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return false;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// First square submatrix (by order, then lexicographic rows and columns) with
/// `|det| >= 2`, scanning all orders up to `max_order`.
pub fn minor_determinant_scan(m: &IntMatrix, max_order: usize) -> Option<Minor> {
    let dense = m.dense();
    let mut found = None;
    for k in 1..=max_order.min(m.rows).min(m.cols) {
        combinations(m.rows, k, |rows| {
            combinations(m.cols, k, |cols| {
                let sub: Vec<Vec<i64>> =
                    rows.iter().map(|&i| cols.iter().map(|&j| dense[i][j]).collect()).collect();
                let det = determinant(&sub);
                if det.abs() >= 2 {
                    found = Some(Minor {
                        rows: rows.to_vec(),
                        cols: cols.to_vec(),
                        det,
                    });
                    return true;
                }
                false
            })
        });
        if found.is_some() {
            break;
        }
    }
    found
}

/// Camion's criterion by brute force over every square submatrix; small matrices only.
pub fn camion_scan(m: &IntMatrix) -> Option<EulerianCertificate> {
    let dense = m.dense();
    let mut found = None;
    for k in 1..=m.rows.min(m.cols) {
        combinations(m.rows, k, |rows| {
            combinations(m.cols, k, |cols| {
                let sub: Vec<Vec<i64>> =
                    rows.iter().map(|&i| cols.iter().map(|&j| dense[i][j]).collect()).collect();
                let even_rows = sub.iter().all(|r| r.iter().sum::<i64>() % 2 == 0);
                let even_cols = (0..k).all(|j| sub.iter().map(|r| r[j]).sum::<i64>() % 2 == 0);
                let sum: i64 = sub.iter().flatten().sum();
                if even_rows && even_cols && sum.rem_euclid(4) == 2 {
                    found = Some(EulerianCertificate {
                        row_ids: rows.to_vec(),
                        col_ids: cols.to_vec(),
                        entry_sum: sum,
                    });
                    return true;
                }
                false
            })
        });
        if found.is_some() {
            break;
        }
    }
    found
}

/// The counterexample matrix built from fans of triangles around three edges.
#[derive(Debug, Clone)]
pub struct Table1 {
    pub matrix: IntMatrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// The whole matrix, zero rows included.
    pub certificate: EulerianCertificate,
}

/// Fans of `(edge, triangles on it, adjacent pairs used as columns)`.
type Fan = (usize, &'static [usize], &'static [(usize, usize)]);

const TABLE1_FANS: [Fan; 3] = [
    (
        1,
        &[1, 2, 3, 4, 5, 6, 7, 8],
        &[(1, 2), (2, 3), (3, 4), (4, 5), (2, 5), (5, 6), (1, 6), (1, 7), (7, 8), (2, 8)],
    ),
    (
        2,
        &[1, 9, 10, 11, 12, 13],
        &[(1, 9), (9, 10), (10, 11), (1, 11), (1, 12), (12, 13), (9, 13)],
    ),
    (
        3,
        &[9, 5, 14, 15, 16, 17],
        &[(9, 5), (5, 14), (14, 15), (9, 15), (9, 16), (16, 17), (5, 17)],
    ),
];

/// Triangles carried as columns: the three that each lie on two of the edges.
const TABLE1_TRIANGLES: [usize; 3] = [1, 5, 9];
const TABLE1_ZERO_ROWS: usize = 7;

/// Build the 27 x 27 counterexample from the pair-form incidence rule:
/// a triangle column has `+1` in every row `(T, e)` of its triangle, a pair
/// column has `-1` in the rows of its two triangles at the shared edge.
pub fn table1() -> Table1 {
    let mut row_labels = Vec::new();
    let mut rows: Vec<(usize, usize)> = Vec::new();
    for &(e, tris, _) in &TABLE1_FANS {
        for &t in tris {
            rows.push((t, e));
            row_labels.push(format!("(T{t},e{e})"));
        }
    }
    for k in 0..TABLE1_ZERO_ROWS {
        row_labels.push(format!("(T{},e3)", 18 + k));
    }
    let mut col_labels: Vec<String> = TABLE1_TRIANGLES.iter().map(|t| format!("T{t}")).collect();
    let mut triplets = Vec::new();
    for (c, &t) in TABLE1_TRIANGLES.iter().enumerate() {
        for (r, &(rt, _)) in rows.iter().enumerate() {
            if rt == t {
                triplets.push((r, c, 1));
            }
        }
    }
    for &(e, _, pairs) in &TABLE1_FANS {
        for &(a, b) in pairs {
            let c = col_labels.len();
            col_labels.push(format!("T{a},{b}"));
            for (r, &(rt, re)) in rows.iter().enumerate() {
                if re == e && (rt == a || rt == b) {
                    triplets.push((r, c, -1));
                }
            }
        }
    }
    let n = row_labels.len();
    let matrix = IntMatrix::from_triplets(n, col_labels.len(), &triplets);
    let certificate = EulerianCertificate {
        row_ids: (0..n).collect(),
        col_ids: (0..col_labels.len()).collect(),
        entry_sum: triplets.iter().map(|t| t.2).sum(),
    };
    Table1 {
        matrix,
        row_labels,
        col_labels,
        certificate,
    }
}

/// Rows and columns of a pair system realizing the counterexample, in table order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table1Embedding {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Dictionary triangle playing `T1 .. T17`.
    pub triangles: Vec<TriangleId>,
}

/// Locate the counterexample inside a pair system built on `dict`.
///
/// Picks three triangles meeting pairwise along edges `ab`, `ac`, `ad` and
/// fills the fans with further dictionary triangles by backtracking. Returns
/// `None` if the dictionary is too poor.
pub fn embed_table1(dict: &TriangleDictionary, system: &ConstraintSystem) -> Option<Table1Embedding> {
    let mut row_of: HashMap<(TriangleId, usize), usize> = HashMap::new();
    for (r, label) in system.row_labels.iter().enumerate() {
        if let RowLabel::TriangleEdge { triangle, edge } = *label {
            row_of.insert((triangle, edge), r);
        }
    }
    let mut col_of: HashMap<Variable, usize> = HashMap::new();
    let mut quad_of: HashMap<(TriangleId, TriangleId), usize> = HashMap::new();
    for (c, v) in system.variables.iter().enumerate() {
        col_of.insert(*v, c);
        if let Variable::Quadrangle { first, second, .. } = *v {
            quad_of.insert((first, second), c);
        }
    }
    let quad = |a: TriangleId, b: TriangleId| quad_of.get(&(a.min(b), a.max(b))).copied();

    for t1 in 0..dict.triangle_count() {
        let [g1, g2, _] = dict.triangle_edges(t1);
        let (e1, e2) = (g1, g2);
        // T1 = (a, b, c) with e1 = ab, e2 = ac: the shared vertex of the two edges is a.
        let [p, q] = dict.geometric_edge(e1);
        let [r, s] = dict.geometric_edge(e2);
        let a = if p == r || p == s { p } else { q };
        let b = if a == p { q } else { p };
        for &t5 in dict.triangles_on_edge(e1) {
            if t5 == t1 || t5 == dict.opposite_triangle(t1) {
                continue;
            }
            let d = *dict.triangle(t5).vertices.iter().find(|&&v| v != a && v != b).unwrap();
            let Some(e3) = dict.find_geometric_edge(a, d) else { continue };
            let [g, h] = dict.geometric_edge(e2);
            let c = if g == a { h } else { g };
            if d == c {
                continue;
            }
            for &t9 in dict.triangles_on_edge(e2) {
                if !dict.triangle(t9).contains(d) {
                    continue;
                }
                if let Some(found) = fill_fans(dict, system, [t1, t5, t9], [e1, e2, e3], &row_of, &col_of, &quad) {
                    return Some(found);
                }
            }
        }
    }
    None
}

fn fill_fans(
    dict: &TriangleDictionary,
    system: &ConstraintSystem,
    anchors: [TriangleId; 3],
    edges: [usize; 3],
    row_of: &HashMap<(TriangleId, usize), usize>,
    col_of: &HashMap<Variable, usize>,
    quad: &dyn Fn(TriangleId, TriangleId) -> Option<usize>,
) -> Option<Table1Embedding> {
    // Slot k holds the dictionary triangle for T_k.
    let mut slot: Vec<Option<TriangleId>> = vec![None; 18];
    slot[1] = Some(anchors[0]);
    slot[5] = Some(anchors[1]);
    slot[9] = Some(anchors[2]);
    for (f, &(_, tris, _)) in TABLE1_FANS.iter().enumerate() {
        let free: Vec<usize> = tris.iter().copied().filter(|&k| slot[k].is_none()).collect();
        if !assign(dict, edges[f], &free, 0, &mut slot, f, quad) {
            return None;
        }
    }
    let mut rows = Vec::new();
    for (f, &(_, tris, _)) in TABLE1_FANS.iter().enumerate() {
        for &k in tris {
            rows.push(*row_of.get(&(slot[k]?, edges[f]))?);
        }
    }
    let mut cols: Vec<usize> = Vec::new();
    for &k in &TABLE1_TRIANGLES {
        cols.push(*col_of.get(&Variable::Triangle(slot[k]?))?);
    }
    for &(_, _, pairs) in &TABLE1_FANS {
        for &(x, y) in pairs {
            cols.push(quad(slot[x]?, slot[y]?)?);
        }
    }
    // Zero rows: rows missing every selected column.
    let mut touched = vec![false; system.rows];
    for &c in &cols {
        for (r, _) in system.column(c) {
            touched[r] = true;
        }
    }
    let zero: Vec<usize> = (0..system.rows)
        .filter(|&r| !touched[r] && !rows.contains(&r))
        .take(TABLE1_ZERO_ROWS)
        .collect();
    if zero.len() < TABLE1_ZERO_ROWS {
        return None;
    }
    rows.extend(zero);
    Some(Table1Embedding {
        rows,
        cols,
        triangles: slot[1..].iter().map(|s| s.unwrap()).collect(),
    })
}

fn assign(
    dict: &TriangleDictionary,
    edge: usize,
    free: &[usize],
    k: usize,
    slot: &mut [Option<TriangleId>],
    fan: usize,
    quad: &dyn Fn(TriangleId, TriangleId) -> Option<usize>,
) -> bool {
    if k == free.len() {
        return TABLE1_FANS[fan]
            .2
            .iter()
            .all(|&(x, y)| quad(slot[x].unwrap(), slot[y].unwrap()).is_some());
    }
    let used: Vec<TriangleId> = slot.iter().flatten().copied().collect();
    for &t in dict.triangles_on_edge(edge) {
        if used.iter().any(|&u| u == t || u == dict.opposite_triangle(t)) {
            continue;
        }
        slot[free[k]] = Some(t);
        // Check pairs whose both ends are assigned.
        let ok = TABLE1_FANS[fan].2.iter().all(|&(x, y)| match (slot[x], slot[y]) {
            (Some(p), Some(q)) => quad(p, q).is_some(),
            _ => true,
        });
        if ok && assign(dict, edge, free, k + 1, slot, fan, quad) {
            return true;
        }
        slot[free[k]] = None;
    }
    false
}

/// Row and column sums, and the total, as printed next to the table.
pub fn table_text(t: &Table1) -> String {
    let d = t.matrix.dense();
    let mut s = String::new();
    let _ = writeln!(s, "{:>10} {}", "", t.col_labels.join(" "));
    for (label, row) in t.row_labels.iter().zip(&d) {
        let cells: Vec<String> = row
            .iter()
            .zip(&t.col_labels)
            .map(|(v, l)| format!("{:>w$}", if *v == 0 { String::new() } else { v.to_string() }, w = l.len()))
            .collect();
        let _ = writeln!(s, "{label:>10} {}  | {}", cells.join(" "), row.iter().sum::<i64>());
    }
    let sums: Vec<String> = t
        .matrix
        .col_sums()
        .iter()
        .zip(&t.col_labels)
        .map(|(v, l)| format!("{:>w$}", v, w = l.len()))
        .collect();
    let total: i64 = d.iter().flatten().sum();
    let _ = writeln!(s, "{:>10} {}  | {}", "sum", sums.join(" "), total);
    s
}


#[cfg(test)]
mod embedding_tests {
    use super::*;
    use crate::constraints::{build_pair_system, BoundaryProblem};
    use crate::lattice::{generate_dictionary, LatticeSpec};

    #[test]
    fn table1_appears_in_a_generated_pair_system() {
        let spec = LatticeSpec::new(1, [2, 2, 2], 2f64.sqrt()).unwrap();
        let dict = generate_dictionary(&spec).unwrap();
        let sys = build_pair_system(&dict, &BoundaryProblem::empty("none")).unwrap();
        let emb = embed_table1(&dict, &sys).expect("configuration fits in a 2x2x2 box");
        let m = IntMatrix::from_system(&sys);
        assert_eq!(m.submatrix(&emb.rows, &emb.cols), table1().matrix.dense());
        let cert = EulerianCertificate {
            row_ids: emb.rows.clone(),
            col_ids: emb.cols.clone(),
            entry_sum: -42,
        };
        let check = verify_certificate(&m, &cert).unwrap();
        assert!(check.proves_not_tu() && check.sum_matches);
    }

    #[test]
    fn search_finds_violation_in_rich_pair_system() {
        let spec = LatticeSpec::new(1, [1, 1, 1], 2f64.sqrt()).unwrap();
        let dict = generate_dictionary(&spec).unwrap();
        let sys = build_pair_system(&dict, &BoundaryProblem::empty("none")).unwrap();
        let m = IntMatrix::from_system(&sys);
        let out = search_eulerian_violation(&m, 4, 10_000);
        let cert = out.certificate.clone().expect("fans of three triangles give odd cycles");
        assert!(verify_certificate(&m, &cert).unwrap().proves_not_tu());
        let seq = search_eulerian_violation_with(
            &m,
            &SearchOptions {
                max_size: 4,
                budget: 10_000,
                exec: Execution::Sequential,
                ..Default::default()
            },
        );
        assert_eq!(seq, out);
    }
}
