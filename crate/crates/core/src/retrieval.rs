//! Scene description, text embedding and exact nearest-neighbour lookup of
//! impedance parameters.
//!
//! The scene describer works from scenario ground truth and renders a
//! canonical sentence; any other producer of descriptor text (for example a
//! vision-language model) can be swapped in as long as it emits text. The
//! text is embedded by signed feature hashing and matched against the case
//! database by brute-force Euclidean distance.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::impedance::{ImpedanceParams, InvalidParams};
use crate::world::{Scenario, Vec2};

pub const DEFAULT_DIMENSION: usize = 384;
pub const MIN_DIMENSION: usize = 8;

/// The six-case database shipped with the crate.
pub const DEFAULT_DATABASE: &str = include_str!("../data/default.db");

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("text has no hashable features")]
    NoFeatures,
    #[error("embedding dimension {0} is below the minimum of {MIN_DIMENSION}")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("case database is empty")]
    EmptyDatabase,
    #[error("duplicate case_id `{0}`")]
    DuplicateCase(String),
    #[error("case `{case_id}`: {source}")]
    InvalidCase {
        case_id: String,
        #[source]
        source: InvalidParams,
    },
    #[error("unknown embedder `{0}`")]
    UnknownEmbedder(String),
    #[error("malformed database at line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unrecognised arrangement `{0}`")]
    UnknownArrangement(String),
    #[error("descriptor is not canonical: `{0}`")]
    BadDescriptor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = RetrievalError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrangement {
    Line,
    Cluster,
    Scattered,
    Corridor,
}

impl Arrangement {
    pub fn as_str(self) -> &'static str {
        match self {
            Arrangement::Line => "line",
            Arrangement::Cluster => "cluster",
            Arrangement::Scattered => "scattered",
            Arrangement::Corridor => "corridor",
        }
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arrangement {
    type Err = RetrievalError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "line" => Ok(Arrangement::Line),
            "cluster" => Ok(Arrangement::Cluster),
            "scattered" => Ok(Arrangement::Scattered),
            "corridor" => Ok(Arrangement::Corridor),
            other => Err(RetrievalError::UnknownArrangement(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SceneDescriptor {
    pub text: String,
    pub n_tall: usize,
    pub n_short: usize,
    pub arrangement: Arrangement,
}

impl SceneDescriptor {
    pub fn new(n_tall: usize, n_short: usize, arrangement: Arrangement) -> Self {
        Self {
            text: format!(
                "{n_tall} tall obstacles, {n_short} short obstacles, arrangement: {arrangement}"
            ),
            n_tall,
            n_short,
            arrangement,
        }
    }

    /// Parses canonical descriptor text back into its parts.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || RetrievalError::BadDescriptor(text.to_owned());
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let [tall, short, arr] = parts.as_slice() else {
            return Err(bad());
        };
        let count = |clause: &str, kind: &str| -> Option<usize> {
            clause
                .strip_suffix(&format!(" {kind} obstacles"))?
                .parse()
                .ok()
        };
        let n_tall = count(tall, "tall").ok_or_else(bad)?;
        let n_short = count(short, "short").ok_or_else(bad)?;
        let arrangement = arr
            .strip_prefix("arrangement:")
            .ok_or_else(bad)?
            .parse()?;
        let d = Self::new(n_tall, n_short, arrangement);
        if d.text != text.trim() {
            return Err(bad());
        }
        Ok(d)
    }
}

const LINE_RESIDUAL_FRACTION: f64 = 0.2;
const CLUSTER_SPAN_FRACTION: f64 = 0.25;
const CORRIDOR_WIDTH: f64 = 1.5;

/// Largest perpendicular residual of `points` to their total-least-squares line.
fn max_line_residual(points: &[Vec2]) -> f64 {
    let n = points.len() as f64;
    let c = points.iter().copied().sum::<Vec2>() * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let q = *p - c;
        sxx += q.x * q.x;
        sxy += q.x * q.y;
        syy += q.y * q.y;
    }
    // principal axis of the scatter matrix
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let normal = Vec2::new(-theta.sin(), theta.cos());
    points
        .iter()
        .map(|p| (*p - c).dot(normal).abs())
        .fold(0.0, f64::max)
}

fn max_pairwise_distance(points: &[Vec2]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.distance(*b));
        }
    }
    best
}

/// Signed perpendicular offset of `p` from segment `a -> b`, if `p` lies
/// within `width` of the segment.
fn side_of_segment(p: Vec2, a: Vec2, b: Vec2, width: f64) -> Option<f64> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let closest = a + ab * t;
    if p.distance(closest) > width {
        return None;
    }
    Some(ab.x * (p.y - a.y) - ab.y * (p.x - a.x))
}

/// Classifies obstacle layout. Rules are tried in order: line (three or
/// more obstacles), cluster, corridor, scattered.
pub fn classify_arrangement(scenario: &Scenario) -> Arrangement {
    let points: Vec<Vec2> = scenario.obstacles.iter().map(|o| o.position).collect();
    let diag = scenario.bounds.diagonal();
    if points.len() >= 3 && max_line_residual(&points) < LINE_RESIDUAL_FRACTION * diag {
        return Arrangement::Line;
    }
    if points.len() >= 2 && max_pairwise_distance(&points) < CLUSTER_SPAN_FRACTION * diag {
        return Arrangement::Cluster;
    }
    let sides: Vec<f64> = points
        .iter()
        .filter_map(|p| side_of_segment(*p, scenario.drone_start, scenario.goal, CORRIDOR_WIDTH))
        .collect();
    if sides.iter().any(|s| *s > 0.0) && sides.iter().any(|s| *s < 0.0) {
        return Arrangement::Corridor;
    }
    Arrangement::Scattered
}

/// Deterministic scene description from scenario ground truth.
pub fn describe_scene(scenario: &Scenario) -> SceneDescriptor {
    SceneDescriptor::new(
        scenario.tall_obstacles().count(),
        scenario.short_obstacles().count(),
        classify_arrangement(scenario),
    )
}

/// A unit-norm embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// L2-normalises `values`; rejects zero and non-finite vectors.
    pub fn from_raw(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RetrievalError::NonFinite);
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(RetrievalError::NoFeatures);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

/// Exact Euclidean distance between two embeddings of equal dimension.
pub fn euclidean_distance(x: &Embedding, y: &Embedding) -> Result<f64> {
    if x.dimension() != y.dimension() {
        return Err(RetrievalError::DimensionMismatch {
            left: x.dimension(),
            right: y.dimension(),
        });
    }
    Ok(x.0
        .iter()
        .zip(&y.0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

pub trait Embedder {
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Embedding>;
}

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET_BASIS;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Signed feature-hashing embedder over words and character trigrams.
///
/// Text is lowercased and split into clauses at `,`, `;`, `.` and newlines.
/// Every word contributes one feature; every character trigram of a clause
/// (words joined by single spaces, space-padded) contributes another.
/// Trigrams never cross clause boundaries, so reordering clauses leaves the
/// vector unchanged.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

pub const HASH_EMBEDDER_ID: &str = "fnv1a-signed-hash";

impl HashEmbedder {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension < MIN_DIMENSION {
            return Err(RetrievalError::DimensionTooSmall(dimension));
        }
        Ok(Self { dimension })
    }

    fn features(text: &str) -> Vec<String> {
        let lower = text.to_lowercase();
        let mut out = Vec::new();
        for clause in lower.split([',', ';', '.', '\n']) {
            let words: Vec<&str> = clause
                .split(|c: char| !c.is_alphanumeric())
                .filter(|w| !w.is_empty())
                .collect();
            if words.is_empty() {
                continue;
            }
            out.extend(words.iter().map(|w| format!("w:{w}")));
            let padded: Vec<char> = format!(" {} ", words.join(" ")).chars().collect();
            out.extend(
                padded
                    .windows(3)
                    .map(|t| format!("c:{}", t.iter().collect::<String>())),
            );
        }
        out
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        Self {
            dimension: DEFAULT_DIMENSION,
        }
    }
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        HASH_EMBEDDER_ID
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Embedding> {
        if text.trim().is_empty() {
            return Err(RetrievalError::EmptyText);
        }
        // integer counts keep the result independent of feature order
        let mut counts = vec![0i64; self.dimension];
        for f in Self::features(text) {
            let h = fnv1a(f.as_bytes());
            let idx = (h % self.dimension as u64) as usize;
            counts[idx] += if h >> 63 == 0 { 1 } else { -1 };
        }
        Embedding::from_raw(counts.into_iter().map(|c| c as f64).collect())
    }
}

/// Embeds `text` with the default hashing embedder at `dimension`.
pub fn embed(text: &str, dimension: usize) -> Result<Embedding> {
    HashEmbedder::new(dimension)?.embed(text)
}

/// Case identifier. Roman numerals order numerically; anything else lexically after them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CaseId(pub String);

fn roman_value(s: &str) -> Option<u32> {
    let digit = |c| match c {
        'I' => Some(1),
        'V' => Some(5),
        'X' => Some(10),
        'L' => Some(50),
        'C' => Some(100),
        'D' => Some(500),
        'M' => Some(1000),
        _ => None,
    };
    let vals: Vec<u32> = s.chars().map(digit).collect::<Option<_>>()?;
    if vals.is_empty() {
        return None;
    }
    let mut total = 0i64;
    for (i, v) in vals.iter().enumerate() {
        match vals.get(i + 1) {
            Some(next) if next > v => total -= i64::from(*v),
            _ => total += i64::from(*v),
        }
    }
    u32::try_from(total).ok()
}

impl Ord for CaseId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (roman_value(&self.0), roman_value(&other.0)) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for CaseId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRecord {
    pub case_id: CaseId,
    pub descriptor: SceneDescriptor,
    pub embedding: Embedding,
    pub params: ImpedanceParams,
}

#[derive(Debug, Clone)]
pub struct CaseDatabase {
    pub records: Vec<CaseRecord>,
    pub embedder_id: String,
    pub dimension: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatabaseFile {
    #[serde(default = "default_embedder")]
    embedder: String,
    #[serde(default = "default_dimension")]
    dimension: usize,
    #[serde(rename = "case", default)]
    cases: Vec<CaseEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseEntry {
    case_id: String,
    descriptor: String,
    m: f64,
    k: f64,
    d: f64,
    f_coeff: f64,
}

fn default_embedder() -> String {
    HASH_EMBEDDER_ID.to_owned()
}

fn default_dimension() -> usize {
    DEFAULT_DIMENSION
}

impl CaseDatabase {
    /// Parses a database file and embeds every descriptor.
    pub fn parse(text: &str) -> Result<Self> {
        let file: DatabaseFile = toml::from_str(text).map_err(|e| {
            let (_, line, column) = crate::world::classify_toml_error(text, &e);
            RetrievalError::Malformed {
                line,
                column,
                message: e.message().to_owned(),
            }
        })?;
        if file.embedder != HASH_EMBEDDER_ID {
            return Err(RetrievalError::UnknownEmbedder(file.embedder));
        }
        let embedder = HashEmbedder::new(file.dimension)?;
        let mut records: Vec<CaseRecord> = Vec::with_capacity(file.cases.len());
        for c in file.cases {
            if records.iter().any(|r| r.case_id.0 == c.case_id) {
                return Err(RetrievalError::DuplicateCase(c.case_id));
            }
            let params = ImpedanceParams::new(c.m, c.k, c.d, c.f_coeff).map_err(|source| {
                RetrievalError::InvalidCase {
                    case_id: c.case_id.clone(),
                    source,
                }
            })?;
            let descriptor = SceneDescriptor::parse(&c.descriptor)?;
            let embedding = embedder.embed(&descriptor.text)?;
            records.push(CaseRecord {
                case_id: CaseId(c.case_id),
                descriptor,
                embedding,
                params,
            });
        }
        if records.is_empty() {
            return Err(RetrievalError::EmptyDatabase);
        }
        Ok(Self {
            records,
            embedder_id: embedder.id().to_owned(),
            dimension: embedder.dimension(),
        })
    }

    /// The bundled six-case database.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_DATABASE).expect("bundled database is valid")
    }

    pub fn embedder(&self) -> HashEmbedder {
        HashEmbedder::new(self.dimension).expect("database dimension validated at load")
    }

    pub fn get(&self, case_id: &str) -> Option<&CaseRecord> {
        self.records.iter().find(|r| r.case_id.0 == case_id)
    }
}

/// Reads and parses a database file.
pub fn load_database(path: impl AsRef<Path>) -> Result<CaseDatabase> {
    CaseDatabase::parse(&std::fs::read_to_string(path)?)
}

/// Exact nearest neighbour by Euclidean distance; ties go to the lowest case id.
pub fn nearest_case<'a>(db: &'a CaseDatabase, query: &Embedding) -> Result<&'a CaseRecord> {
    let mut best: Option<(&CaseRecord, f64)> = None;
    for r in &db.records {
        let d = euclidean_distance(&r.embedding, query)?;
        best = match best {
            Some((b, bd)) if bd < d || (bd == d && b.case_id <= r.case_id) => Some((b, bd)),
            _ => Some((r, d)),
        };
    }
    best.map(|(r, _)| r).ok_or(RetrievalError::EmptyDatabase)
}

/// describe → embed → nearest case.
pub fn retrieve_case<'a>(scenario: &Scenario, db: &'a CaseDatabase) -> Result<&'a CaseRecord> {
    let descriptor = describe_scene(scenario);
    let query = db.embedder().embed(&descriptor.text)?;
    nearest_case(db, &query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Bounds, Obstacle};
    use proptest::prelude::*;

    fn scenario(obstacles: Vec<Obstacle>) -> Scenario {
        Scenario {
            name: "t".into(),
            drone_start: Vec2::new(0.0, 0.0),
            robot_start: Vec2::new(0.0, 0.0),
            goal: Vec2::new(4.0, 0.0),
            goal_tolerance: 0.25,
            bounds: Bounds {
                min_x: -1.0,
                min_y: -2.0,
                max_x: 5.0,
                max_y: 2.0,
            },
            obstacles,
        }
    }

    #[test]
    fn describe_examples() {
        let s = scenario(vec![
            Obstacle::tall("T1", Vec2::new(1.0, 0.4), 0.2),
            Obstacle::short("S1", Vec2::new(3.0, 0.3), 0.1),
        ]);
        let d = describe_scene(&s);
        assert_eq!(
            d.text,
            "1 tall obstacles, 1 short obstacles, arrangement: scattered"
        );
        assert_eq!(d, describe_scene(&s));
        assert_eq!(
            describe_scene(&scenario(vec![])).text,
            "0 tall obstacles, 0 short obstacles, arrangement: scattered"
        );
    }

    #[test]
    fn arrangement_rules() {
        let line = scenario(vec![
            Obstacle::tall("A", Vec2::new(0.5, 1.0), 0.1),
            Obstacle::tall("B", Vec2::new(2.0, 1.05), 0.1),
            Obstacle::short("C", Vec2::new(3.5, 0.95), 0.1),
        ]);
        assert_eq!(classify_arrangement(&line), Arrangement::Line);
        let cluster = scenario(vec![
            Obstacle::tall("A", Vec2::new(2.0, 1.0), 0.1),
            Obstacle::tall("B", Vec2::new(2.5, 1.3), 0.1),
        ]);
        assert_eq!(classify_arrangement(&cluster), Arrangement::Cluster);
        let corridor = scenario(vec![
            Obstacle::tall("A", Vec2::new(1.0, 0.8), 0.1),
            Obstacle::short("B", Vec2::new(3.0, -0.8), 0.1),
        ]);
        assert_eq!(classify_arrangement(&corridor), Arrangement::Corridor);
    }

    #[test]
    fn descriptor_parse_round_trip() {
        let d = SceneDescriptor::new(2, 3, Arrangement::Corridor);
        assert_eq!(SceneDescriptor::parse(&d.text).unwrap(), d);
        assert!(SceneDescriptor::parse("two tall obstacles").is_err());
        assert!(SceneDescriptor::parse("1 tall obstacles, 1 short obstacles, arrangement: ring").is_err());
    }

    #[test]
    fn embed_examples() {
        let a = embed("1 tall obstacles", 384).unwrap();
        let b = embed("1 tall obstacles", 384).unwrap();
        assert_eq!(euclidean_distance(&a, &b).unwrap(), 0.0);
        assert_eq!(a.dimension(), 384);
        let c = embed("2 tall obstacles", 384).unwrap();
        assert!(euclidean_distance(&a, &c).unwrap() > 0.0);
        let n: f64 = a.values().iter().map(|v| v * v).sum();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embed_errors() {
        assert!(matches!(embed("", 384), Err(RetrievalError::EmptyText)));
        assert!(matches!(embed("   ", 384), Err(RetrievalError::EmptyText)));
        assert!(matches!(embed("abc", 4), Err(RetrievalError::DimensionTooSmall(4))));
        assert!(matches!(embed(",,,", 16), Err(RetrievalError::NoFeatures)));
    }

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 64 test vectors
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn distance_examples() {
        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        let mut e2 = vec![0.0; 8];
        e2[1] = 1.0;
        let (x, y) = (
            Embedding::from_raw(e1).unwrap(),
            Embedding::from_raw(e2).unwrap(),
        );
        let d = euclidean_distance(&x, &y).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(d, euclidean_distance(&y, &x).unwrap());
        assert_eq!(euclidean_distance(&x, &x).unwrap(), 0.0);
        let z = Embedding::from_raw(vec![1.0; 9]).unwrap();
        assert!(matches!(
            euclidean_distance(&x, &z),
            Err(RetrievalError::DimensionMismatch { left: 8, right: 9 })
        ));
    }

    #[test]
    fn builtin_database_matches_table() {
        let db = CaseDatabase::builtin();
        assert_eq!(db.records.len(), 6);
        assert_eq!(db.dimension, 384);
        let expected = [
            ("I", 1.0, 5.0, 2.5, 0.68),
            ("II", 1.5, 3.0, 3.5, 0.35),
            ("III", 1.2, 3.5, 3.0, 0.45),
            ("IV", 1.3, 3.4, 3.6, 0.45),
            ("V", 1.4, 3.3, 3.7, 0.15),
            ("VI", 1.2, 3.8, 4.0, 0.65),
        ];
        for (r, (id, m, k, d, f)) in db.records.iter().zip(expected) {
            assert_eq!(r.case_id.0, id);
            assert_eq!(r.params, ImpedanceParams { m, k, d, f_coeff: f });
        }
    }

    #[test]
    fn self_retrieval() {
        let db = CaseDatabase::builtin();
        for r in &db.records {
            let q = embed(&r.descriptor.text, db.dimension).unwrap();
            assert_eq!(nearest_case(&db, &q).unwrap().case_id, r.case_id);
        }
        let q = db.get("V").unwrap().embedding.clone();
        let hit = nearest_case(&db, &q).unwrap();
        assert_eq!(hit.params, ImpedanceParams { m: 1.4, k: 3.3, d: 3.7, f_coeff: 0.15 });
    }

    #[test]
    fn single_record_database() {
        let text = r#"
[[case]]
case_id = "X1"
descriptor = "3 tall obstacles, 0 short obstacles, arrangement: line"
m = 1.0
k = 2.0
d = 0.5
f_coeff = 0.1
"#;
        let db = CaseDatabase::parse(text).unwrap();
        let q = embed("completely unrelated words", db.dimension).unwrap();
        assert_eq!(nearest_case(&db, &q).unwrap().case_id.0, "X1");
    }

    #[test]
    fn database_errors() {
        let bad_mass = DEFAULT_DATABASE.replacen("m = 1.0", "m = -1.0", 1);
        assert!(matches!(
            CaseDatabase::parse(&bad_mass),
            Err(RetrievalError::InvalidCase { .. })
        ));
        let dup = DEFAULT_DATABASE.replacen("case_id = \"II\"", "case_id = \"I\"", 1);
        assert!(matches!(
            CaseDatabase::parse(&dup),
            Err(RetrievalError::DuplicateCase(id)) if id == "I"
        ));
        assert!(matches!(
            CaseDatabase::parse("dimension = 384\n"),
            Err(RetrievalError::EmptyDatabase)
        ));
        assert!(matches!(
            CaseDatabase::parse("[[case]]\ncase_id = 3\n"),
            Err(RetrievalError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            CaseDatabase::parse("embedder = \"minilm\"\n"),
            Err(RetrievalError::UnknownEmbedder(_))
        ));
    }

    #[test]
    fn reload_is_identical() {
        let a = CaseDatabase::builtin();
        let b = CaseDatabase::builtin();
        for (x, y) in a.records.iter().zip(&b.records) {
            let bx: Vec<u64> = x.embedding.values().iter().map(|v| v.to_bits()).collect();
            let by: Vec<u64> = y.embedding.values().iter().map(|v| v.to_bits()).collect();
            assert_eq!(bx, by);
        }
    }

    #[test]
    fn ties_go_to_lowest_case_id() {
        let text = r#"
[[case]]
case_id = "IV"
descriptor = "1 tall obstacles, 0 short obstacles, arrangement: line"
m = 1.0
k = 1.0
d = 1.0
f_coeff = 0.4

[[case]]
case_id = "II"
descriptor = "1 tall obstacles, 0 short obstacles, arrangement: line"
m = 2.0
k = 1.0
d = 1.0
f_coeff = 0.2
"#;
        let db = CaseDatabase::parse(text).unwrap();
        let q = db.records[0].embedding.clone();
        assert_eq!(nearest_case(&db, &q).unwrap().case_id.0, "II");
    }

    #[test]
    fn case_id_ordering() {
        let ids = ["I", "II", "III", "IV", "V", "VI", "IX", "X"];
        for w in ids.windows(2) {
            assert!(CaseId(w[0].into()) < CaseId(w[1].into()), "{w:?}");
        }
        assert!(CaseId("VI".into()) < CaseId("custom".into()));
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            a in proptest::collection::vec(-1.0f64..1.0, 16),
            b in proptest::collection::vec(-1.0f64..1.0, 16),
            c in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            prop_assume!(a.iter().any(|v| *v != 0.0) && b.iter().any(|v| *v != 0.0) && c.iter().any(|v| *v != 0.0));
            let (x, y, z) = (
                Embedding::from_raw(a).unwrap(),
                Embedding::from_raw(b).unwrap(),
                Embedding::from_raw(c).unwrap(),
            );
            let dxy = euclidean_distance(&x, &y).unwrap();
            prop_assert_eq!(euclidean_distance(&x, &x).unwrap(), 0.0);
            prop_assert!((dxy - euclidean_distance(&y, &x).unwrap()).abs() <= 1e-9);
            prop_assert!(dxy <= euclidean_distance(&x, &z).unwrap() + euclidean_distance(&z, &y).unwrap() + 1e-9);
            if dxy == 0.0 {
                prop_assert_eq!(x.values(), y.values());
            }
        }

        #[test]
        fn clause_order_does_not_change_embedding(perm in 0usize..6) {
            let clauses = ["2 tall obstacles", "1 short obstacles", "arrangement: corridor"];
            let orders = [[0,1,2],[0,2,1],[1,0,2],[1,2,0],[2,0,1],[2,1,0]];
            let text: Vec<&str> = orders[perm].iter().map(|i| clauses[*i]).collect();
            let a = embed(&clauses.join(", "), 384).unwrap();
            let b = embed(&text.join(", "), 384).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
