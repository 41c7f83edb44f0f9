//! Problem data: OPLib/TSPLIB parsing, TSPLIB distance functions, and the
//! vertex/edge set helpers used throughout the solver.
//!
//! Vertices are 0-based internally; vertex 0 is the depot (label 1 in the
//! file). Edges of the complete graph are addressed by a dense triangular
//! index, see [`Edge::id`].

use std::fmt;
use std::path::Path;

use thiserror::Error;

/// Vertices above this count get distances on demand instead of a matrix.
const MATRIX_CACHE_LIMIT: usize = 2000;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unsupported EDGE_WEIGHT_TYPE {0}")]
    UnsupportedMetric(String),
    #[error("unsupported EDGE_WEIGHT_FORMAT {0}")]
    UnsupportedFormat(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Metric {
    Euc2d,
    Ceil2d,
    Att,
    Geo,
    Explicit,
}

impl Metric {
    fn parse(s: &str) -> Result<Self, InstanceError> {
        match s {
            "EUC_2D" => Ok(Metric::Euc2d),
            "CEIL_2D" => Ok(Metric::Ceil2d),
            "ATT" => Ok(Metric::Att),
            "GEO" => Ok(Metric::Geo),
            "EXPLICIT" => Ok(Metric::Explicit),
            other => Err(InstanceError::UnsupportedMetric(other.to_string())),
        }
    }

    pub fn tsplib_name(self) -> &'static str {
        match self {
            Metric::Euc2d => "EUC_2D",
            Metric::Ceil2d => "CEIL_2D",
            Metric::Att => "ATT",
            Metric::Geo => "GEO",
            Metric::Explicit => "EXPLICIT",
        }
    }

    /// Coordinate metrics whose ordering agrees with planar Euclidean distance.
    pub fn is_planar(self) -> bool {
        matches!(self, Metric::Euc2d | Metric::Ceil2d | Metric::Att)
    }
}

/// Undirected edge `{u, v}` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

pub type EdgeId = usize;

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b, "self loops are not edges");
        if a < b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    /// Dense index in the complete graph: `v * (v - 1) / 2 + u`.
    pub fn id(self) -> EdgeId {
        self.v * (self.v - 1) / 2 + self.u
    }

    pub fn from_id(id: EdgeId) -> Self {
        // largest v with v(v-1)/2 <= id
        let mut v = ((1.0 + (1.0 + 8.0 * id as f64).sqrt()) / 2.0) as usize;
        while v * (v - 1) / 2 > id {
            v -= 1;
        }
        while (v + 1) * v / 2 <= id {
            v += 1;
        }
        Edge { u: id - v * (v - 1) / 2, v }
    }

    pub fn other(self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(self, w: usize) -> bool {
        self.u == w || self.v == w
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.u + 1, self.v + 1)
    }
}

pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Sorted, duplicate-free set of vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, serde::Serialize, serde::Deserialize)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(vec![v])
    }

    pub fn from_sorted_unchecked(v: Vec<usize>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn insert(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, v);
                true
            }
        }
    }

    pub fn remove(&mut self, v: usize) -> bool {
        match self.0.binary_search(&v) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn complement(&self, n: usize) -> VertexSet {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.0.iter().peekable();
        for v in 0..n {
            if it.peek() == Some(&&v) {
                it.next();
            } else {
                out.push(v);
            }
        }
        VertexSet(out)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    /// Boolean membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    /// Whether exactly one endpoint of `e` lies in the set.
    pub fn crosses(&self, e: Edge) -> bool {
        self.contains(e.u) != self.contains(e.v)
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("degenerate vertex set: star set needs a nonempty proper subset")]
pub struct DegenerateSet;

/// Edges of `edges` with exactly one endpoint in `set` (the coboundary).
pub fn star_set(set: &VertexSet, n: usize, edges: &[Edge]) -> Result<Vec<Edge>, DegenerateSet> {
    if set.is_empty() || set.len() >= n {
        return Err(DegenerateSet);
    }
    let mask = set.mask(n);
    Ok(edges.iter().copied().filter(|e| mask[e.u] != mask[e.v]).collect())
}

/// An Orienteering Problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    n: usize,
    scores: Vec<i64>,
    budget: i64,
    metric: Metric,
    coords: Vec<(f64, f64)>,
    matrix: Option<Vec<i64>>,
}

impl Instance {
    /// Build an instance from planar or geographic coordinates.
    pub fn from_coords(
        name: impl Into<String>,
        metric: Metric,
        coords: Vec<(f64, f64)>,
        scores: Vec<i64>,
        budget: i64,
    ) -> Result<Self, InstanceError> {
        if metric == Metric::Explicit {
            return Err(InstanceError::Invalid("explicit metric needs a matrix".into()));
        }
        if coords.len() != scores.len() {
            return Err(InstanceError::Invalid(format!(
                "{} coordinates but {} scores",
                coords.len(),
                scores.len()
            )));
        }
        let mut inst = Instance {
            name: name.into(),
            n: coords.len(),
            scores,
            budget,
            metric,
            coords,
            matrix: None,
        };
        inst.validate()?;
        if inst.n <= MATRIX_CACHE_LIMIT {
            let n = inst.n;
            let mut m = vec![0i64; n * n];
            for u in 0..n {
                for v in (u + 1)..n {
                    let d = inst.coord_distance(u, v);
                    m[u * n + v] = d;
                    m[v * n + u] = d;
                }
            }
            inst.matrix = Some(m);
        }
        Ok(inst)
    }

    /// Build an instance from a full symmetric distance matrix (row-major).
    pub fn from_matrix(
        name: impl Into<String>,
        matrix: Vec<i64>,
        scores: Vec<i64>,
        budget: i64,
    ) -> Result<Self, InstanceError> {
        let n = scores.len();
        if matrix.len() != n * n {
            return Err(InstanceError::Invalid(format!("matrix has {} entries, expected {}", matrix.len(), n * n)));
        }
        for u in 0..n {
            if matrix[u * n + u] != 0 {
                return Err(InstanceError::Invalid(format!("nonzero diagonal at vertex {}", u + 1)));
            }
            for v in (u + 1)..n {
                if matrix[u * n + v] != matrix[v * n + u] {
                    return Err(InstanceError::Invalid(format!("asymmetric distance {}-{}", u + 1, v + 1)));
                }
                if matrix[u * n + v] < 0 {
                    return Err(InstanceError::Invalid(format!("negative distance {}-{}", u + 1, v + 1)));
                }
            }
        }
        let inst = Instance {
            name: name.into(),
            n,
            scores,
            budget,
            metric: Metric::Explicit,
            coords: Vec::new(),
            matrix: Some(matrix),
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        if self.n < 3 {
            return Err(InstanceError::Invalid(format!("need at least 3 vertices, got {}", self.n)));
        }
        if let Some(v) = self.scores.iter().position(|&s| s < 0) {
            return Err(InstanceError::Invalid(format!("negative score at vertex {}", v + 1)));
        }
        if self.budget <= 0 {
            return Err(InstanceError::Invalid(format!("cost limit must be positive, got {}", self.budget)));
        }
        Ok(())
    }

    pub fn parse_file(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path)?;
        parse_instance(&text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depot(&self) -> usize {
        0
    }

    pub fn score(&self, v: usize) -> i64 {
        self.scores[v]
    }

    pub fn scores(&self) -> &[i64] {
        &self.scores
    }

    /// Route length budget `d0`.
    pub fn budget(&self) -> i64 {
        self.budget
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// Node coordinates; empty for explicit instances.
    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }

    pub fn total_score(&self) -> i64 {
        self.scores.iter().sum()
    }

    pub fn set_score(&self, set: impl IntoIterator<Item = usize>) -> i64 {
        set.into_iter().map(|v| self.scores[v]).sum()
    }

    pub fn num_edges(&self) -> usize {
        edge_count(self.n)
    }

    pub fn distance(&self, u: usize, v: usize) -> i64 {
        if u == v {
            return 0;
        }
        match &self.matrix {
            Some(m) => m[u * self.n + v],
            None => self.coord_distance(u, v),
        }
    }

    pub fn edge_length(&self, e: Edge) -> i64 {
        self.distance(e.u, e.v)
    }

    fn coord_distance(&self, u: usize, v: usize) -> i64 {
        let (x1, y1) = self.coords[u];
        let (x2, y2) = self.coords[v];
        match self.metric {
            Metric::Euc2d => nint(((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt()),
            Metric::Ceil2d => ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt().ceil() as i64,
            Metric::Att => att_distance((x1, y1), (x2, y2)),
            Metric::Geo => geo_distance((x1, y1), (x2, y2)),
            Metric::Explicit => unreachable!("explicit instances always carry a matrix"),
        }
    }

    /// Length of the closed walk visiting `seq` in order.
    pub fn cycle_length(&self, seq: &[usize]) -> i64 {
        if seq.len() < 2 {
            return 0;
        }
        let mut len = 0;
        for w in seq.windows(2) {
            len += self.distance(w[0], w[1]);
        }
        len + self.distance(seq[seq.len() - 1], seq[0])
    }

    /// The `k` nearest neighbours of every vertex, symmetrized, as sorted edges.
    pub fn knn_edges(&self, k: usize) -> Vec<Edge> {
        let n = self.n;
        let mut set = std::collections::BTreeSet::new();
        let mut row: Vec<(i64, usize)> = Vec::with_capacity(n);
        for u in 0..n {
            row.clear();
            row.extend((0..n).filter(|&v| v != u).map(|v| (self.distance(u, v), v)));
            let k = k.min(row.len());
            if k < row.len() {
                row.select_nth_unstable(k - 1);
            }
            for &(_, v) in &row[..k] {
                set.insert(Edge::new(u, v));
            }
        }
        set.into_iter().collect()
    }

    /// Render the semantic fields in OPLib format.
    pub fn to_oplib(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "NAME : {}", self.name);
        let _ = writeln!(s, "TYPE : OP");
        let _ = writeln!(s, "DIMENSION : {}", self.n);
        let _ = writeln!(s, "COST_LIMIT : {}", self.budget);
        let _ = writeln!(s, "EDGE_WEIGHT_TYPE : {}", self.metric.tsplib_name());
        if self.metric == Metric::Explicit {
            let _ = writeln!(s, "EDGE_WEIGHT_FORMAT : FULL_MATRIX");
            let _ = writeln!(s, "EDGE_WEIGHT_SECTION");
            for u in 0..self.n {
                let row: Vec<String> = (0..self.n).map(|v| self.distance(u, v).to_string()).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        } else {
            let _ = writeln!(s, "NODE_COORD_SECTION");
            for (i, (x, y)) in self.coords.iter().enumerate() {
                let _ = writeln!(s, "{} {} {}", i + 1, x, y);
            }
        }
        let _ = writeln!(s, "NODE_SCORE_SECTION");
        for (i, sc) in self.scores.iter().enumerate() {
            let _ = writeln!(s, "{} {}", i + 1, sc);
        }
        let _ = writeln!(s, "DEPOT_SECTION\n 1\n -1\nEOF");
        s
    }
}

fn nint(x: f64) -> i64 {
    (x + 0.5) as i64
}

/// TSPLIB pseudo-Euclidean distance.
pub fn att_distance(a: (f64, f64), b: (f64, f64)) -> i64 {
    let xd = a.0 - b.0;
    let yd = a.1 - b.1;
    let r = ((xd * xd + yd * yd) / 10.0).sqrt();
    let t = nint(r);
    if (t as f64) < r {
        t + 1
    } else {
        t
    }
}

/// TSPLIB geographical distance (reference constants, `PI = 3.141592`).
pub fn geo_distance(a: (f64, f64), b: (f64, f64)) -> i64 {
    const PI: f64 = 3.141592;
    const RRR: f64 = 6378.388;
    let rad = |c: f64| {
        let deg = c.trunc();
        let min = c - deg;
        PI * (deg + 5.0 * min / 3.0) / 180.0
    };
    let (lat_a, lon_a) = (rad(a.0), rad(a.1));
    let (lat_b, lon_b) = (rad(b.0), rad(b.1));
    let q1 = (lon_a - lon_b).cos();
    let q2 = (lat_a - lat_b).cos();
    let q3 = (lat_a + lat_b).cos();
    (RRR * (0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3)).acos() + 1.0) as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WeightFormat {
    FullMatrix,
    UpperRow,
    LowerRow,
    UpperDiagRow,
    LowerDiagRow,
}

impl WeightFormat {
    fn parse(s: &str) -> Result<Self, InstanceError> {
        match s {
            "FULL_MATRIX" => Ok(WeightFormat::FullMatrix),
            "UPPER_ROW" => Ok(WeightFormat::UpperRow),
            "LOWER_ROW" => Ok(WeightFormat::LowerRow),
            "UPPER_DIAG_ROW" => Ok(WeightFormat::UpperDiagRow),
            "LOWER_DIAG_ROW" => Ok(WeightFormat::LowerDiagRow),
            other => Err(InstanceError::UnsupportedFormat(other.to_string())),
        }
    }

    fn expected_len(self, n: usize) -> usize {
        match self {
            WeightFormat::FullMatrix => n * n,
            WeightFormat::UpperRow | WeightFormat::LowerRow => n * (n - 1) / 2,
            WeightFormat::UpperDiagRow | WeightFormat::LowerDiagRow => n * (n + 1) / 2,
        }
    }

    fn expand(self, n: usize, vals: &[i64]) -> Vec<i64> {
        let mut m = vec![0i64; n * n];
        let mut it = vals.iter().copied();
        let mut set = |i: usize, j: usize, d: i64| {
            m[i * n + j] = d;
            m[j * n + i] = d;
        };
        match self {
            WeightFormat::FullMatrix => {
                for i in 0..n {
                    for j in 0..n {
                        let d = it.next().unwrap_or(0);
                        if i < j {
                            set(i, j, d);
                        }
                    }
                }
            }
            WeightFormat::UpperRow => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        set(i, j, it.next().unwrap_or(0));
                    }
                }
            }
            WeightFormat::UpperDiagRow => {
                for i in 0..n {
                    for j in i..n {
                        let d = it.next().unwrap_or(0);
                        if i != j {
                            set(i, j, d);
                        }
                    }
                }
            }
            WeightFormat::LowerRow => {
                for i in 0..n {
                    for j in 0..i {
                        set(i, j, it.next().unwrap_or(0));
                    }
                }
            }
            WeightFormat::LowerDiagRow => {
                for i in 0..n {
                    for j in 0..=i {
                        let d = it.next().unwrap_or(0);
                        if i != j {
                            set(i, j, d);
                        }
                    }
                }
            }
        }
        m
    }
}

const SECTION_KEYWORDS: &[&str] = &[
    "NODE_COORD_SECTION",
    "EDGE_WEIGHT_SECTION",
    "NODE_SCORE_SECTION",
    "DEPOT_SECTION",
    "DISPLAY_DATA_SECTION",
    "EOF",
];

fn is_header_line(line: &str) -> bool {
    let key = line.split(':').next().unwrap_or("").trim();
    !key.is_empty() && key.chars().all(|c| c.is_ascii_uppercase() || c == '_' || c.is_ascii_digit()) && line.contains(':')
}

fn is_section_start(line: &str) -> bool {
    let t = line.trim();
    SECTION_KEYWORDS.iter().any(|k| t == *k || t.starts_with(&format!("{k} "))) || is_header_line(t)
}

/// Parse OPLib text (TSPLIB dialect with `COST_LIMIT` and `NODE_SCORE_SECTION`).
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut name = String::new();
    let mut dim: Option<usize> = None;
    let mut budget: Option<f64> = None;
    let mut metric: Option<Metric> = None;
    let mut format: Option<WeightFormat> = None;
    let mut coords: Option<Vec<(f64, f64)>> = None;
    let mut weights: Option<Vec<i64>> = None;
    let mut scores: Option<Vec<i64>> = None;

    let malformed = |line: usize, msg: String| InstanceError::Malformed { line: line + 1, msg };

    let mut i = 0;
    while i < lines.len() {
        let raw = lines[i].trim();
        if raw.is_empty() {
            i += 1;
            continue;
        }
        if raw == "EOF" {
            break;
        }
        let section = raw.split_whitespace().next().unwrap_or("");
        match section {
            "NODE_COORD_SECTION" | "EDGE_WEIGHT_SECTION" | "NODE_SCORE_SECTION" | "DEPOT_SECTION"
            | "DISPLAY_DATA_SECTION" => {
                let start = i;
                i += 1;
                let mut tokens: Vec<(usize, &str)> = Vec::new();
                while i < lines.len() && !is_section_start(lines[i]) {
                    for tok in lines[i].split_whitespace() {
                        tokens.push((i, tok));
                    }
                    i += 1;
                }
                let n = dim.ok_or_else(|| malformed(start, format!("{section} before DIMENSION")))?;
                match section {
                    "NODE_COORD_SECTION" => {
                        if tokens.len() != 3 * n {
                            return Err(malformed(
                                start,
                                format!("NODE_COORD_SECTION has {} values, expected {} for {} nodes", tokens.len(), 3 * n, n),
                            ));
                        }
                        let mut c = vec![(0.0, 0.0); n];
                        let mut seen = vec![false; n];
                        for chunk in tokens.chunks(3) {
                            let id = parse_index(chunk[0], n)?;
                            let x = parse_f64(chunk[1])?;
                            let y = parse_f64(chunk[2])?;
                            if seen[id] {
                                return Err(malformed(chunk[0].0, format!("duplicate node {}", id + 1)));
                            }
                            seen[id] = true;
                            c[id] = (x, y);
                        }
                        coords = Some(c);
                    }
                    "EDGE_WEIGHT_SECTION" => {
                        let fmt = format.unwrap_or(WeightFormat::FullMatrix);
                        let want = fmt.expected_len(n);
                        if tokens.len() != want {
                            return Err(malformed(
                                start,
                                format!("EDGE_WEIGHT_SECTION has {} values, expected {}", tokens.len(), want),
                            ));
                        }
                        let vals = tokens
                            .iter()
                            .map(|t| parse_f64(*t).map(|v| v.round() as i64))
                            .collect::<Result<Vec<_>, _>>()?;
                        weights = Some(fmt.expand(n, &vals));
                    }
                    "NODE_SCORE_SECTION" => {
                        if tokens.len() != 2 * n {
                            return Err(malformed(
                                start,
                                format!("NODE_SCORE_SECTION has {} values, expected {}", tokens.len(), 2 * n),
                            ));
                        }
                        let mut s = vec![0i64; n];
                        for chunk in tokens.chunks(2) {
                            let id = parse_index(chunk[0], n)?;
                            let v = parse_f64(chunk[1])?;
                            if v.fract() != 0.0 {
                                return Err(malformed(chunk[1].0, format!("non-integer score {}", chunk[1].1)));
                            }
                            s[id] = v as i64;
                        }
                        scores = Some(s);
                    }
                    // Depot is always node 1; display data is ignored.
                    _ => {}
                }
            }
            _ => {
                let (key, value) = match raw.split_once(':') {
                    Some((k, v)) => (k.trim(), v.trim()),
                    None => return Err(malformed(i, format!("unrecognized line `{raw}`"))),
                };
                match key {
                    "NAME" => name = value.to_string(),
                    "DIMENSION" => {
                        dim = Some(value.parse().map_err(|_| malformed(i, format!("bad DIMENSION `{value}`")))?)
                    }
                    "COST_LIMIT" => {
                        budget = Some(value.parse().map_err(|_| malformed(i, format!("bad COST_LIMIT `{value}`")))?)
                    }
                    "EDGE_WEIGHT_TYPE" => metric = Some(Metric::parse(value)?),
                    "EDGE_WEIGHT_FORMAT" => format = Some(WeightFormat::parse(value)?),
                    _ => {}
                }
                i += 1;
            }
        }
    }

    dim.ok_or(InstanceError::MissingSection("DIMENSION"))?;
    let budget = budget.ok_or(InstanceError::MissingSection("COST_LIMIT"))?;
    let metric = metric.ok_or(InstanceError::MissingSection("EDGE_WEIGHT_TYPE"))?;
    let scores = scores.ok_or(InstanceError::MissingSection("NODE_SCORE_SECTION"))?;
    // Integer distances: a fractional limit admits exactly the tours within its floor.
    let budget = budget.floor() as i64;
    match metric {
        Metric::Explicit => {
            let m = weights.ok_or(InstanceError::MissingSection("EDGE_WEIGHT_SECTION"))?;
            Instance::from_matrix(name, m, scores, budget)
        }
        _ => {
            let c = coords.ok_or(InstanceError::MissingSection("NODE_COORD_SECTION"))?;
            Instance::from_coords(name, metric, c, scores, budget)
        }
    }
}

fn parse_index((line, tok): (usize, &str), n: usize) -> Result<usize, InstanceError> {
    let id: usize = tok.parse().map_err(|_| InstanceError::Malformed {
        line: line + 1,
        msg: format!("bad node index `{tok}`"),
    })?;
    if id == 0 || id > n {
        return Err(InstanceError::Malformed { line: line + 1, msg: format!("node index {id} out of range 1..={n}") });
    }
    Ok(id - 1)
}

fn parse_f64((line, tok): (usize, &str)) -> Result<f64, InstanceError> {
    tok.parse()
        .map_err(|_| InstanceError::Malformed { line: line + 1, msg: format!("bad number `{tok}`") })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "NAME : tiny\nTYPE : OP\nDIMENSION : 3\nCOST_LIMIT : 20\nEDGE_WEIGHT_TYPE : EUC_2D\n\
NODE_COORD_SECTION\n1 0 0\n2 3 4\n3 0 4\nNODE_SCORE_SECTION\n1 0\n2 5\n3 7\nDEPOT_SECTION\n 1\n -1\nEOF\n";

    #[test]
    fn parses_minimal_instance() {
        let inst = parse_instance(TINY).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.budget(), 20);
        assert_eq!(inst.scores(), &[0, 5, 7]);
        assert_eq!(inst.distance(0, 1), 5);
        assert_eq!(inst.distance(1, 1), 0);
        assert_eq!(inst.distance(1, 2), 3);
    }

    #[test]
    fn short_coord_section_is_an_error() {
        let text = "NAME: x\nDIMENSION: 5\nCOST_LIMIT: 10\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n\
1 0 0\n2 1 0\n3 2 0\n4 3 0\nNODE_SCORE_SECTION\n1 0\n2 1\n3 1\n4 1\n5 1\nEOF\n";
        assert!(matches!(parse_instance(text), Err(InstanceError::Malformed { .. })));
    }

    #[test]
    fn missing_sections_are_named() {
        let no_scores = TINY.replace("NODE_SCORE_SECTION\n1 0\n2 5\n3 7\n", "");
        match parse_instance(&no_scores) {
            Err(InstanceError::MissingSection(s)) => assert_eq!(s, "NODE_SCORE_SECTION"),
            other => panic!("unexpected {other:?}"),
        }
        let no_limit = TINY.replace("COST_LIMIT : 20\n", "");
        assert!(matches!(parse_instance(&no_limit), Err(InstanceError::MissingSection("COST_LIMIT"))));
    }

    #[test]
    fn unsupported_metric() {
        let t = TINY.replace("EUC_2D", "MAN_2D");
        assert!(matches!(parse_instance(&t), Err(InstanceError::UnsupportedMetric(m)) if m == "MAN_2D"));
    }

    #[test]
    fn explicit_formats_agree() {
        // 4 nodes, distances d(i,j) = i + j (1-based labels) for i != j
        let full = "0 3 4 5\n3 0 5 6\n4 5 0 7\n5 6 7 0";
        let upper = "3 4 5\n5 6\n7";
        let lower_diag = "0\n3 0\n4 5 0\n5 6 7 0";
        let mk = |fmt: &str, body: &str| {
            format!(
                "NAME: e\nDIMENSION: 4\nCOST_LIMIT: 9\nEDGE_WEIGHT_TYPE: EXPLICIT\nEDGE_WEIGHT_FORMAT: {fmt}\n\
EDGE_WEIGHT_SECTION\n{body}\nNODE_SCORE_SECTION\n1 0\n2 1\n3 1\n4 1\nEOF\n"
            )
        };
        for (fmt, body) in [("FULL_MATRIX", full), ("UPPER_ROW", upper), ("LOWER_DIAG_ROW", lower_diag)] {
            let inst = parse_instance(&mk(fmt, body)).unwrap();
            for u in 0..4 {
                for v in 0..4 {
                    let want = if u == v { 0 } else { (u + v + 2) as i64 };
                    assert_eq!(inst.distance(u, v), want, "{fmt} {u} {v}");
                }
            }
        }
    }

    #[test]
    fn edge_ids_roundtrip() {
        for v in 1..60 {
            for u in 0..v {
                let e = Edge::new(v, u);
                assert_eq!(Edge::from_id(e.id()), e);
            }
        }
        assert_eq!(Edge::new(0, 1).id(), 0);
        assert_eq!(edge_count(5), 10);
        assert_eq!(Edge::new(3, 4).id(), 9);
    }

    #[test]
    fn star_set_of_single_vertex_in_k4() {
        let edges: Vec<Edge> = (0..4).flat_map(|u| ((u + 1)..4).map(move |v| Edge::new(u, v))).collect();
        let s = star_set(&VertexSet::singleton(2), 4, &edges).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|e| e.touches(2)));
        assert_eq!(star_set(&VertexSet::new(), 4, &edges), Err(DegenerateSet));
        assert_eq!(star_set(&(0..4).collect(), 4, &edges), Err(DegenerateSet));
    }

    #[test]
    fn star_set_of_disconnected_side_is_empty() {
        let edges = vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2), Edge::new(3, 4), Edge::new(4, 5), Edge::new(3, 5)];
        let s: VertexSet = [0, 1, 2].into_iter().collect();
        assert!(star_set(&s, 6, &edges).unwrap().is_empty());
    }

    #[test]
    fn knn_on_triangle_is_complete() {
        let inst = parse_instance(TINY).unwrap();
        assert_eq!(inst.knn_edges(10).len(), 3);
    }

    #[test]
    fn oplib_roundtrip() {
        let inst = parse_instance(TINY).unwrap();
        let again = parse_instance(&inst.to_oplib()).unwrap();
        assert_eq!(again.n(), inst.n());
        assert_eq!(again.budget(), inst.budget());
        assert_eq!(again.scores(), inst.scores());
        assert_eq!(again.coords(), inst.coords());
    }

    #[test]
    fn vertex_set_ops() {
        let a: VertexSet = [5, 1, 3, 3].into_iter().collect();
        assert_eq!(a.as_slice(), &[1, 3, 5]);
        assert_eq!(a.complement(7).as_slice(), &[0, 2, 4, 6]);
        assert!(a.crosses(Edge::new(1, 2)));
        assert!(!a.crosses(Edge::new(1, 3)));
        let mut b = a.clone();
        b.insert(0);
        b.remove(5);
        assert_eq!(b.as_slice(), &[0, 1, 3]);
        assert_eq!(a.difference(&b).as_slice(), &[5]);
    }
}
