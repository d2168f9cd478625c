//! Dense and sparse datasets: loading, writing and synthetic generators.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;
use crate::util::mix_seed;

/// Row-major `n x d` matrix of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n.checked_mul(d) != Some(data.len()) {
            return Err(Error::DimensionMismatch {
                expected: n.saturating_mul(d),
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at row {}, column {}",
                pos / d.max(1),
                pos % d.max(1)
            )));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} values, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), d, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.data[i * self.d + t]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Column `t` as a vector.
    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, t)).collect()
    }

    /// The matrix without column `t`.
    pub fn without_column(&self, t: usize) -> Result<Self> {
        if t >= self.d {
            return Err(Error::OutOfRange {
                index: t,
                len: self.d,
            });
        }
        let data = self
            .rows()
            .flat_map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != t)
                    .map(|(_, &x)| x)
            })
            .collect();
        Self::new(self.n, self.d - 1, data)
    }

    pub fn to_sparse(&self) -> Result<Vec<SparseVector>> {
        self.rows().map(SparseVector::from_dense).collect()
    }
}

/// Reads a comma-separated file. A first line that does not parse as numbers
/// is taken as a header.
pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut data = Vec::new();
    let mut d: Option<usize> = None;
    let mut n = 0;
    for (lineno, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if lineno == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    msg: e.to_string(),
                })
            }
        };
        if let Some(bad) = row.iter().position(|x| !x.is_finite()) {
            return Err(Error::Parse {
                path: path.into(),
                line: lineno + 1,
                msg: format!("non-finite value in column {bad}"),
            });
        }
        match d {
            None => d = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    msg: format!("expected {d} values, found {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        n += 1;
    }
    DenseMatrix::new(n, d.unwrap_or(0), data)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.into(),
            line: 0,
            msg: format!("{other:?}"),
        },
    }
}

pub fn write_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads whitespace-separated triplets `row col value` after a header line
/// `n d nnz`. Rows with no triplets are zero vectors.
pub fn load_sparse(path: impl AsRef<Path>) -> Result<Vec<SparseVector>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let mut lines = BufReader::new(file).lines().enumerate();
    let (n, d, nnz) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(parse_err(0, "missing header `n d nnz`".into()));
        };
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let nums: std::result::Result<Vec<usize>, _> = f.iter().map(|s| s.parse()).collect();
        match nums {
            Ok(v) if v.len() == 3 => break (v[0], v[1], v[2]),
            _ => return Err(parse_err(i + 1, format!("bad header `{line}`"))),
        }
    };
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(parse_err(
                i + 1,
                format!("expected `row col value`, got `{line}`"),
            ));
        }
        let r: usize = f[0]
            .parse()
            .map_err(|e| parse_err(i + 1, format!("row: {e}")))?;
        let c: usize = f[1]
            .parse()
            .map_err(|e| parse_err(i + 1, format!("col: {e}")))?;
        let v: f64 = f[2]
            .parse()
            .map_err(|e| parse_err(i + 1, format!("value: {e}")))?;
        if r >= n || c >= d {
            return Err(parse_err(
                i + 1,
                format!("entry ({r}, {c}) outside {n} x {d}"),
            ));
        }
        if !v.is_finite() {
            return Err(parse_err(i + 1, "non-finite value".into()));
        }
        if !seen.insert((r, c)) {
            return Err(parse_err(i + 1, format!("duplicate entry ({r}, {c})")));
        }
        count += 1;
        entries[r].push((c, v));
    }
    if count != nnz {
        return Err(parse_err(
            1,
            format!("header promises {nnz} entries, found {count}"),
        ));
    }
    entries
        .into_iter()
        .map(|e| SparseVector::from_pairs(d, e))
        .collect()
}

pub fn write_sparse(path: impl AsRef<Path>, rows: &[SparseVector]) -> Result<()> {
    let path = path.as_ref();
    let d = rows.first().map_or(0, SparseVector::dim);
    if let Some(bad) = rows.iter().find(|r| r.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: bad.dim(),
        });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let nnz: usize = rows.iter().map(SparseVector::nnz).sum();
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {} {}", rows.len(), d, nnz).map_err(io)?;
    for (r, row) in rows.iter().enumerate() {
        let mut entries: Vec<_> = row.iter().collect();
        entries.sort_by_key(|&(c, _)| c);
        for (c, v) in entries {
            writeln!(w, "{r} {c} {v}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Points with their generating cluster labels.
#[derive(Debug, Clone)]
pub struct Labeled {
    pub data: DenseMatrix,
    pub labels: Vec<usize>,
}

/// Isotropic Gaussian blobs around centers drawn from `N(0, center_scale^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub n: usize,
    pub d: usize,
    pub centers: usize,
    pub center_scale: f64,
    pub spread: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            n: 200,
            d: 100,
            centers: 4,
            center_scale: 1.0,
            spread: 0.3,
        }
    }
}

/// Point `i` belongs to center `i % centers`.
pub fn blobs(spec: &BlobSpec, seed: u64) -> Result<Labeled> {
    if spec.centers == 0 || spec.d == 0 {
        return Err(Error::invalid(
            "blobs need at least one center and one dimension",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0xB10B));
    let centers: Vec<f64> = (0..spec.centers * spec.d)
        .map(|_| spec.center_scale * normal(&mut rng))
        .collect();
    let mut data = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let c = i % spec.centers;
        labels.push(c);
        let center = &centers[c * spec.d..(c + 1) * spec.d];
        data.extend(center.iter().map(|&m| m + spec.spread * normal(&mut rng)));
    }
    Ok(Labeled {
        data: DenseMatrix::new(spec.n, spec.d, data)?,
        labels,
    })
}

/// Two-level blobs: `top` groups, each split into `sub` subclusters.
/// Labels are subcluster ids `group * sub + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NestedSpec {
    pub n: usize,
    pub d: usize,
    pub top: usize,
    pub sub: usize,
    pub top_scale: f64,
    pub sub_scale: f64,
    pub spread: f64,
}

impl Default for NestedSpec {
    fn default() -> Self {
        Self {
            n: 200,
            d: 500,
            top: 4,
            sub: 5,
            top_scale: 1.0,
            sub_scale: 0.4,
            spread: 0.15,
        }
    }
}

pub fn nested_blobs(spec: &NestedSpec, seed: u64) -> Result<Labeled> {
    if spec.top == 0 || spec.sub == 0 || spec.d == 0 {
        return Err(Error::invalid(
            "nested blobs need nonzero group counts and dimension",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x2E57));
    let d = spec.d;
    let tops: Vec<f64> = (0..spec.top * d)
        .map(|_| spec.top_scale * normal(&mut rng))
        .collect();
    let k = spec.top * spec.sub;
    let mut subs = Vec::with_capacity(k * d);
    for c in 0..k {
        let g = c / spec.sub;
        subs.extend((0..d).map(|t| tops[g * d + t] + spec.sub_scale * normal(&mut rng)));
    }
    let mut data = Vec::with_capacity(spec.n * d);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let c = i % k;
        labels.push(c);
        data.extend((0..d).map(|t| subs[c * d + t] + spec.spread * normal(&mut rng)));
    }
    Ok(Labeled {
        data: DenseMatrix::new(spec.n, d, data)?,
        labels,
    })
}

/// A nearest-neighbor query with known per-arm gaps.
#[derive(Debug, Clone)]
pub struct GapFixture {
    /// Row 0 is the query (all zeros); rows `1..` are the candidates.
    pub data: DenseMatrix,
    /// Exact mean squared coordinate distance of candidate `i + 1` to the query.
    pub means: Vec<f64>,
    /// `means[i]` minus the `k`-th smallest mean (zero or negative for the
    /// true neighbors).
    pub gaps: Vec<f64>,
}

/// Candidate `i` has squared coordinates `base + offsets[i] + sigma * z`
/// (clipped at zero), so its per-coordinate samples are Gaussian around a
/// known level. Gaps are computed from the realized exact means.
pub fn gap_gaussian(
    offsets: &[f64],
    d: usize,
    base: f64,
    sigma: f64,
    k: usize,
    seed: u64,
) -> Result<GapFixture> {
    if k == 0 || k > offsets.len() || d == 0 {
        return Err(Error::invalid(
            "gap fixture needs 1 <= k <= arms and d >= 1",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x6A9));
    let n = offsets.len() + 1;
    let mut data = vec![0.0; n * d];
    for (i, &off) in offsets.iter().enumerate() {
        for t in 0..d {
            let sq = (base + off + sigma * normal(&mut rng)).max(0.0);
            data[(i + 1) * d + t] = sq.sqrt();
        }
    }
    let data = DenseMatrix::new(n, d, data)?;
    let means: Vec<f64> = (1..n)
        .map(|i| data.row(i).iter().map(|x| x * x).sum::<f64>() / d as f64)
        .collect();
    let mut sorted = means.clone();
    sorted.sort_by(f64::total_cmp);
    let kth = sorted[k - 1];
    let gaps = means.iter().map(|m| m - kth).collect();
    Ok(GapFixture { data, means, gaps })
}

/// Features with one planted feature that determines the target.
#[derive(Debug, Clone)]
pub struct MmiFixture {
    pub features: DenseMatrix,
    pub target: Vec<f64>,
    pub planted: usize,
}

/// Features are standard normal. The target is `x_planted + noise * z`.
/// Each of the `distractors` features after the planted one is replaced by
/// `0.5 * target + z`, so it carries some but less information.
pub fn mmi_planted(
    n: usize,
    d: usize,
    planted: usize,
    noise: f64,
    distractors: usize,
    seed: u64,
) -> Result<MmiFixture> {
    if planted >= d {
        return Err(Error::OutOfRange {
            index: planted,
            len: d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x33));
    let mut data: Vec<f64> = (0..n * d).map(|_| normal(&mut rng)).collect();
    let target: Vec<f64> = (0..n)
        .map(|i| data[i * d + planted] + noise * normal(&mut rng))
        .collect();
    for j in 1..=distractors {
        let f = (planted + j) % d;
        if f == planted {
            break;
        }
        for i in 0..n {
            data[i * d + f] = 0.5 * target[i] + normal(&mut rng);
        }
    }
    Ok(MmiFixture {
        features: DenseMatrix::new(n, d, data)?,
        target,
        planted,
    })
}

/// Sparse blobs. Each center owns a random active set of `2 * density * d`
/// coordinates; a point keeps each active coordinate with probability 1/2, so
/// the expected nonzero fraction is `density`.
pub fn sparse_blobs(
    n: usize,
    d: usize,
    centers: usize,
    density: f64,
    spread: f64,
    seed: u64,
) -> Result<(Vec<SparseVector>, Vec<usize>)> {
    if centers == 0 || d == 0 || !(0.0..=0.5).contains(&density) {
        return Err(Error::invalid(
            "sparse blobs need centers >= 1, d >= 1 and density in [0, 0.5]",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x5BA));
    let active = ((2.0 * density * d as f64).round() as usize).min(d);
    let mut sets = Vec::with_capacity(centers);
    for _ in 0..centers {
        let coords = rand::seq::index::sample(&mut rng, d, active).into_vec();
        let vals: Vec<f64> = coords
            .iter()
            .map(|_| 1.0 + normal(&mut rng).abs())
            .collect();
        sets.push((coords, vals));
    }
    let mut out = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centers;
        labels.push(c);
        let (coords, vals) = &sets[c];
        let mut pairs = Vec::new();
        for (&t, &v) in coords.iter().zip(vals) {
            if rng.random::<f64>() < 0.5 {
                let x = v + spread * normal(&mut rng);
                pairs.push((t, if x == 0.0 { v } else { x }));
            }
        }
        out.push(SparseVector::from_pairs(d, pairs)?);
    }
    Ok((out, labels))
}

/// Points near a `rank`-dimensional subspace: `x_i = A u_i + noise * z_i` with
/// `u_i` standard normal in `rank` dimensions and `A` a random `d x rank`
/// map with entries of variance `1 / rank`. Per-coordinate squared distances
/// then track `|u_i - u_j|^2 / rank`, whatever `d` is.
pub fn latent(n: usize, d: usize, rank: usize, noise: f64, seed: u64) -> Result<DenseMatrix> {
    if rank == 0 || d == 0 {
        return Err(Error::invalid("latent points need rank >= 1 and d >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x1A7));
    let scale = (rank as f64).sqrt().recip();
    let map: Vec<f64> = (0..d * rank).map(|_| scale * normal(&mut rng)).collect();
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let u: Vec<f64> = (0..rank).map(|_| normal(&mut rng)).collect();
        for t in 0..d {
            let a = &map[t * rank..(t + 1) * rank];
            let x: f64 = a.iter().zip(&u).map(|(a, u)| a * u).sum();
            data.push(x + noise * normal(&mut rng));
        }
    }
    DenseMatrix::new(n, d, data)
}
