//! Metric spaces, candidate sets, and the zone structure of the line.
//!
//! Everything downstream (mechanisms, audits, compression) works on top of
//! three primitives defined here: distances, favorite candidates, and the
//! partition of the line into voting / ranking zones delimited by midpoint
//! borders.

use serde::Deserialize;
use thiserror::Error;

/// Relative tolerance for distance ties: `d1` and `d2` are tied iff
/// `|d1 - d2| <= TIE_REL * max(1, d1 + d2)`. Borders are computed midpoints,
/// so exact equality would be too brittle.
pub const TIE_REL: f64 = 1e-9;

/// Absolute slack allowed when validating explicit metrics (symmetry and
/// triangle inequality).
pub const METRIC_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("point has {got} coordinates, metric expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("explicit metric has {size} points, index {index} is out of range")]
    UnknownExplicitIndex { index: usize, size: usize },
    #[error("point kind does not match the metric (coordinates vs explicit index)")]
    PointKindMismatch,
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("agent profile is empty")]
    EmptyAgents,
    #[error("line candidates must be strictly increasing (and therefore distinct)")]
    CandidatesNotAscending,
    #[error("explicit metric matrix must be square")]
    MatrixNotSquare,
    #[error("explicit metric matrix must have a zero diagonal")]
    MatrixNonzeroDiagonal,
    #[error("explicit metric matrix must be symmetric")]
    MatrixAsymmetric,
    #[error("explicit metric distances must be finite and nonnegative")]
    MatrixBadEntry,
    #[error("triangle inequality violated by more than {METRIC_TOL}: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    TriangleViolation { i: usize, j: usize, k: usize },
    #[error("euclidean dimension must be at least 1")]
    BadDimension,
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("operation requires the line metric")]
    NotLineMetric,
    #[error("instance JSON is invalid: {0}")]
    BadInstanceJson(String),
}

/// A location: coordinates for line/Euclidean metrics, or an index into an
/// explicit metric's point set.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Coords(Vec<f64>),
    Index(usize),
}

impl Point {
    /// Convenience constructor for a point on the line.
    pub fn line(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    /// The single coordinate of a line point. Panics on other point kinds;
    /// line-only call sites validate the metric first.
    pub fn x(&self) -> f64 {
        match self {
            Point::Coords(c) if c.len() == 1 => c[0],
            _ => panic!("not a line point"),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Point::Coords(c) => c.iter().all(|v| v.is_finite()),
            Point::Index(_) => true,
        }
    }
}

/// Pairwise distances over a finite named point set, validated to be a
/// genuine metric (zero diagonal, symmetric, triangle inequality within
/// [`METRIC_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMetric {
    matrix: Vec<Vec<f64>>,
}

impl ExplicitMetric {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let k = matrix.len();
        if matrix.iter().any(|row| row.len() != k) {
            return Err(GeometryError::MatrixNotSquare);
        }
        for (i, row) in matrix.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(GeometryError::MatrixBadEntry);
                }
                if i == j && d != 0.0 {
                    return Err(GeometryError::MatrixNonzeroDiagonal);
                }
                if (d - matrix[j][i]).abs() > METRIC_TOL {
                    return Err(GeometryError::MatrixAsymmetric);
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    if matrix[i][l] > matrix[i][j] + matrix[j][l] + METRIC_TOL {
                        return Err(GeometryError::TriangleViolation { i, j: j, k: l });
                    }
                }
            }
        }
        Ok(ExplicitMetric { matrix })
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Result<f64, GeometryError> {
        let size = self.matrix.len();
        if i >= size {
            return Err(GeometryError::UnknownExplicitIndex { index: i, size });
        }
        if j >= size {
            return Err(GeometryError::UnknownExplicitIndex { index: j, size });
        }
        Ok(self.matrix[i][j])
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }
}

/// The universe agents and candidates live in.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpace {
    Line,
    Euclidean(usize),
    Explicit(ExplicitMetric),
}

impl MetricSpace {
    pub fn euclidean(d: usize) -> Result<Self, GeometryError> {
        if d == 0 {
            return Err(GeometryError::BadDimension);
        }
        Ok(MetricSpace::Euclidean(d))
    }

    pub fn is_line(&self) -> bool {
        matches!(self, MetricSpace::Line)
    }

    fn check_point(&self, p: &Point) -> Result<(), GeometryError> {
        if !p.is_finite() {
            return Err(GeometryError::NonFiniteCoordinate);
        }
        match (self, p) {
            (MetricSpace::Line, Point::Coords(c)) => {
                if c.len() != 1 {
                    return Err(GeometryError::DimensionMismatch { expected: 1, got: c.len() });
                }
                Ok(())
            }
            (MetricSpace::Euclidean(d), Point::Coords(c)) => {
                if c.len() != *d {
                    return Err(GeometryError::DimensionMismatch { expected: *d, got: c.len() });
                }
                Ok(())
            }
            (MetricSpace::Explicit(m), Point::Index(i)) => {
                if *i >= m.len() {
                    return Err(GeometryError::UnknownExplicitIndex { index: *i, size: m.len() });
                }
                Ok(())
            }
            _ => Err(GeometryError::PointKindMismatch),
        }
    }
}

/// Distance between two points of the same metric. Symmetric, zero iff the
/// points coincide, and triangle-consistent (explicit matrices are validated
/// at construction).
pub fn distance(metric: &MetricSpace, p: &Point, q: &Point) -> Result<f64, GeometryError> {
    metric.check_point(p)?;
    metric.check_point(q)?;
    match (metric, p, q) {
        (MetricSpace::Line, Point::Coords(a), Point::Coords(b)) => Ok((a[0] - b[0]).abs()),
        (MetricSpace::Euclidean(_), Point::Coords(a), Point::Coords(b)) => {
            let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            Ok(sq.sqrt())
        }
        (MetricSpace::Explicit(m), Point::Index(i), Point::Index(j)) => m.get(*i, *j),
        _ => Err(GeometryError::PointKindMismatch),
    }
}

/// Two distances are considered tied under the relative tolerance.
pub fn distances_tied(d1: f64, d2: f64) -> bool {
    (d1 - d2).abs() <= TIE_REL * f64::max(1.0, d1 + d2)
}

/// The fixed public candidate locations y_1..y_m. On the line they are kept
/// strictly increasing, so candidate indices double as the left-to-right
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    points: Vec<Point>,
}

impl CandidateSet {
    pub fn new(metric: &MetricSpace, points: Vec<Point>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyCandidates);
        }
        for p in &points {
            metric.check_point(p)?;
        }
        if metric.is_line() {
            let ascending = points.windows(2).all(|w| w[0].x() < w[1].x());
            if !ascending {
                return Err(GeometryError::CandidatesNotAscending);
            }
        }
        Ok(CandidateSet { points })
    }

    /// Line candidates from raw coordinates.
    pub fn on_line(xs: &[f64]) -> Result<Self, GeometryError> {
        Self::new(&MetricSpace::Line, xs.iter().map(|&x| Point::line(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, j: usize) -> &Point {
        &self.points[j]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Candidate x-coordinates (line metric only).
    pub fn line_coords(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x()).collect()
    }
}

/// A candidate set plus an agent location profile in one metric space.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub metric: MetricSpace,
    pub candidates: CandidateSet,
    pub agents: Vec<Point>,
}

impl Instance {
    pub fn new(
        metric: MetricSpace,
        candidates: CandidateSet,
        agents: Vec<Point>,
    ) -> Result<Self, GeometryError> {
        if agents.is_empty() {
            return Err(GeometryError::EmptyAgents);
        }
        for p in &agents {
            metric.check_point(p)?;
        }
        for p in candidates.points() {
            metric.check_point(p)?;
        }
        Ok(Instance { metric, candidates, agents })
    }

    /// Line instance from raw coordinates.
    pub fn line(candidates: &[f64], agents: &[f64]) -> Result<Self, GeometryError> {
        Instance::new(
            MetricSpace::Line,
            CandidateSet::on_line(candidates)?,
            agents.iter().map(|&x| Point::line(x)).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    /// Agent x-coordinates (line metric only).
    pub fn agent_coords(&self) -> Vec<f64> {
        self.agents.iter().map(|p| p.x()).collect()
    }
}

/// Midpoints between consecutive candidates on the line; the boundaries of
/// the voting zones. Length m-1 (empty for a single candidate).
pub fn voting_borders(candidates: &CandidateSet) -> Vec<f64> {
    let xs = candidates.line_coords();
    xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Indices of the candidates nearest to `x` (the argmin set under the tie
/// tolerance). Nonempty; more than one entry exactly when `x` is equidistant
/// from two or more nearest candidates.
pub fn favorite_candidates(
    metric: &MetricSpace,
    candidates: &CandidateSet,
    x: &Point,
) -> Result<Vec<usize>, GeometryError> {
    let m = candidates.len();
    let mut best = f64::INFINITY;
    let mut dists = Vec::with_capacity(m);
    for j in 0..m {
        let d = distance(metric, x, candidates.point(j))?;
        best = best.min(d);
        dists.push(d);
    }
    Ok((0..m).filter(|&j| distances_tied(dists[j], best)).collect())
}

/// All orderings of the candidates by nondecreasing distance from `x`; more
/// than one exactly when some distances tie. Tied blocks are expanded into
/// every permutation, so the result is the full truthful-ranking set.
pub fn true_rankings(
    metric: &MetricSpace,
    candidates: &CandidateSet,
    x: &Point,
) -> Result<Vec<Vec<usize>>, GeometryError> {
    let m = candidates.len();
    let mut order: Vec<usize> = (0..m).collect();
    let mut dists = Vec::with_capacity(m);
    for j in 0..m {
        dists.push(distance(metric, x, candidates.point(j))?);
    }
    order.sort_by(|&a, &b| dists[a].partial_cmp(&dists[b]).unwrap().then(a.cmp(&b)));

    // Group consecutive tied distances, then expand each group into all of
    // its permutations.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &j in &order {
        match groups.last_mut() {
            Some(g) if distances_tied(dists[*g.last().unwrap()], dists[j]) => g.push(j),
            _ => groups.push(vec![j]),
        }
    }
    let mut rankings: Vec<Vec<usize>> = vec![Vec::new()];
    for g in &groups {
        let perms = permutations(g);
        let mut next = Vec::with_capacity(rankings.len() * perms.len());
        for r in &rankings {
            for p in &perms {
                let mut r2 = r.clone();
                r2.extend_from_slice(p);
                next.push(r2);
            }
        }
        rankings = next;
    }
    Ok(rankings)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &head) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// One maximal open interval of the line on which the true ranking is
/// constant, together with a designated interior representative.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingZone {
    /// Lower border (`None` for the left-unbounded zone).
    pub lo: Option<f64>,
    /// Upper border (`None` for the right-unbounded zone).
    pub hi: Option<f64>,
    /// Interval midpoint for bounded zones; nearest border offset by 1.0 for
    /// unbounded ones.
    pub representative: f64,
    /// The ranking shared by every interior point, read off at the
    /// representative.
    pub ranking: Vec<usize>,
}

/// The borders and zones induced by a candidate set on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonePartition {
    /// Consecutive-pair midpoints b_1..b_{m-1}.
    pub voting_borders: Vec<f64>,
    /// Midpoints of all candidate pairs, sorted and deduplicated (distinct
    /// pairs can share a midpoint, e.g. equally spaced candidates).
    pub ranking_borders: Vec<f64>,
    pub zones: Vec<RankingZone>,
}

/// Partition the line into ranking zones: the open intervals between
/// consecutive distinct pair midpoints plus the two unbounded end zones.
/// Requires line candidates (one coordinate each, strictly increasing).
pub fn ranking_zones_line(candidates: &CandidateSet) -> Result<ZonePartition, GeometryError> {
    let line_shaped = candidates
        .points()
        .iter()
        .all(|p| matches!(p, Point::Coords(c) if c.len() == 1));
    if !line_shaped {
        return Err(GeometryError::NotLineMetric);
    }
    let xs = candidates.line_coords();
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GeometryError::CandidatesNotAscending);
    }
    let m = xs.len();
    let mut borders = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            borders.push(0.5 * (xs[i] + xs[j]));
        }
    }
    borders.sort_by(|a, b| a.partial_cmp(b).unwrap());
    borders.dedup_by(|a, b| distances_tied(*a, *b));

    let mut zones = Vec::with_capacity(borders.len() + 1);
    for k in 0..=borders.len() {
        let lo = if k == 0 { None } else { Some(borders[k - 1]) };
        let hi = if k == borders.len() { None } else { Some(borders[k]) };
        let representative = match (lo, hi) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (None, Some(b)) => b - 1.0,
            (Some(a), None) => a + 1.0,
            // Single candidate: the whole line is one zone.
            (None, None) => xs[0],
        };
        let ranking =
            true_rankings(&MetricSpace::Line, candidates, &Point::line(representative))?
                .into_iter()
                .next()
                .expect("representative lies strictly inside its zone");
        zones.push(RankingZone { lo, hi, representative, ranking });
    }
    Ok(ZonePartition {
        voting_borders: voting_borders(candidates),
        ranking_borders: borders,
        zones,
    })
}

impl ZonePartition {
    /// The zone whose shared ranking equals `ranking`, if any. Rankings not
    /// realized by any interior point of the line have no zone.
    pub fn zone_of_ranking(&self, ranking: &[usize]) -> Option<&RankingZone> {
        self.zones.iter().find(|z| z.ranking == ranking)
    }

    /// The zone containing `x`, treating zones as half-open `[lo, hi)` so
    /// every point gets exactly one zone (border points are attributed to
    /// the zone on their right; callers that care about border ties use
    /// `true_rankings` instead).
    pub fn zone_containing(&self, x: f64) -> &RankingZone {
        let k = self.ranking_borders.partition_point(|&b| b <= x);
        &self.zones[k]
    }
}

// ---------------------------------------------------------------------------
// JSON instance schema
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct MetricSchema {
    kind: String,
    dim: Option<usize>,
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
struct InstanceSchema {
    metric: MetricSchema,
    candidates: Vec<Vec<f64>>,
    agents: Vec<Vec<f64>>,
}

fn schema_points(
    raw: &[Vec<f64>],
    metric: &MetricSpace,
) -> Result<Vec<Point>, GeometryError> {
    raw.iter()
        .map(|entry| match metric {
            MetricSpace::Explicit(_) => {
                if entry.len() != 1 || entry[0].fract() != 0.0 || entry[0] < 0.0 {
                    return Err(GeometryError::BadInstanceJson(
                        "explicit-metric points must be single nonnegative integer indices".into(),
                    ));
                }
                Ok(Point::Index(entry[0] as usize))
            }
            _ => Ok(Point::Coords(entry.clone())),
        })
        .collect()
}

impl Instance {
    /// Parse an instance from the JSON schema
    /// `{"metric": {"kind": "line"|"euclidean"|"explicit", "dim"?, "matrix"?},
    ///   "candidates": [[..], ..], "agents": [[..], ..]}`.
    /// Explicit metrics name points by index: `[[0], [2]]`.
    pub fn from_json_str(s: &str) -> Result<Self, GeometryError> {
        let schema: InstanceSchema =
            serde_json::from_str(s).map_err(|e| GeometryError::BadInstanceJson(e.to_string()))?;
        let metric = match schema.metric.kind.as_str() {
            "line" => MetricSpace::Line,
            "euclidean" => {
                let d = schema.metric.dim.ok_or_else(|| {
                    GeometryError::BadInstanceJson("euclidean metric requires \"dim\"".into())
                })?;
                MetricSpace::euclidean(d)?
            }
            "explicit" => {
                let matrix = schema.metric.matrix.ok_or_else(|| {
                    GeometryError::BadInstanceJson("explicit metric requires \"matrix\"".into())
                })?;
                MetricSpace::Explicit(ExplicitMetric::new(matrix)?)
            }
            other => {
                return Err(GeometryError::BadInstanceJson(format!(
                    "unknown metric kind {other:?}"
                )))
            }
        };
        let candidates = CandidateSet::new(&metric, schema_points(&schema.candidates, &metric)?)?;
        let agents = schema_points(&schema.agents, &metric)?;
        Instance::new(metric, candidates, agents)
    }

    /// Serialize back to the JSON schema accepted by [`Instance::from_json_str`].
    pub fn to_json(&self) -> serde_json::Value {
        let metric = match &self.metric {
            MetricSpace::Line => serde_json::json!({"kind": "line"}),
            MetricSpace::Euclidean(d) => serde_json::json!({"kind": "euclidean", "dim": d}),
            MetricSpace::Explicit(m) => {
                serde_json::json!({"kind": "explicit", "matrix": m.matrix()})
            }
        };
        let dump = |ps: &[Point]| -> Vec<Vec<f64>> {
            ps.iter()
                .map(|p| match p {
                    Point::Coords(c) => c.clone(),
                    Point::Index(i) => vec![*i as f64],
                })
                .collect()
        };
        serde_json::json!({
            "metric": metric,
            "candidates": dump(self.candidates.points()),
            "agents": dump(&self.agents),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_distance_matches_hand_values() {
        let m = MetricSpace::Line;
        let eps = 1e-3;
        let d = distance(&m, &Point::line(-1.0), &Point::line(eps)).unwrap();
        assert_eq!(d, 1.0 + eps);
        assert_eq!(distance(&m, &Point::line(2.5), &Point::line(2.5)).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_distance_pythagorean() {
        let m = MetricSpace::euclidean(2).unwrap();
        let d = distance(
            &m,
            &Point::Coords(vec![0.0, 0.0]),
            &Point::Coords(vec![3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn explicit_metric_is_validated() {
        let ok = ExplicitMetric::new(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ]);
        assert!(ok.is_ok());

        let asym = ExplicitMetric::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(asym.unwrap_err(), GeometryError::MatrixAsymmetric);

        // 5 > 1 + 1: a triangle violation beyond tolerance is rejected.
        let tri = ExplicitMetric::new(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ]);
        assert!(matches!(tri.unwrap_err(), GeometryError::TriangleViolation { .. }));
    }

    #[test]
    fn voting_borders_are_consecutive_midpoints() {
        let c = CandidateSet::on_line(&[-1.0, 1.0]).unwrap();
        assert_eq!(voting_borders(&c), vec![0.0]);
        let c = CandidateSet::on_line(&[4.0, 14.0, 22.0, 30.0]).unwrap();
        assert_eq!(voting_borders(&c), vec![9.0, 18.0, 26.0]);
        let c = CandidateSet::on_line(&[0.0, 10.0, 20.0]).unwrap();
        assert_eq!(voting_borders(&c), vec![5.0, 15.0]);
        let single = CandidateSet::on_line(&[3.0]).unwrap();
        assert!(voting_borders(&single).is_empty());
    }

    #[test]
    fn favorites_detect_midpoint_ties() {
        let m = MetricSpace::Line;
        let c = CandidateSet::on_line(&[-1.0, 1.0]).unwrap();
        assert_eq!(favorite_candidates(&m, &c, &Point::line(0.0)).unwrap(), vec![0, 1]);
        assert_eq!(favorite_candidates(&m, &c, &Point::line(0.3)).unwrap(), vec![1]);
    }

    #[test]
    fn centroid_of_equilateral_triangle_ties_all_three() {
        let h = 3f64.sqrt() / 2.0;
        let metric = MetricSpace::euclidean(2).unwrap();
        let cands = CandidateSet::new(
            &metric,
            vec![
                Point::Coords(vec![0.0, 0.0]),
                Point::Coords(vec![1.0, 0.0]),
                Point::Coords(vec![0.5, h]),
            ],
        )
        .unwrap();
        let centroid = Point::Coords(vec![0.5, h / 3.0]);
        assert_eq!(
            favorite_candidates(&metric, &cands, &centroid).unwrap(),
            vec![0, 1, 2]
        );
    }

    #[test]
    fn true_rankings_expand_ties() {
        let m = MetricSpace::Line;
        let c = CandidateSet::on_line(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(
            true_rankings(&m, &c, &Point::line(-0.9)).unwrap(),
            vec![vec![0, 1, 2]]
        );
        // x = 0.5 sits on the midpoint of candidates 2 and 3.
        let r = true_rankings(&m, &c, &Point::line(0.5)).unwrap();
        assert_eq!(r, vec![vec![1, 2, 0], vec![2, 1, 0]]);
    }

    #[test]
    fn ranking_zone_count_and_contents() {
        let zp = ranking_zones_line(&CandidateSet::on_line(&[0.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(zp.ranking_borders, vec![0.5, 1.0, 1.5]);
        assert_eq!(zp.zones.len(), 4);
        let rankings: Vec<&[usize]> = zp.zones.iter().map(|z| z.ranking.as_slice()).collect();
        assert_eq!(
            rankings,
            vec![&[0, 1, 2][..], &[1, 0, 2][..], &[1, 2, 0][..], &[2, 1, 0][..]]
        );
        // Unbounded-zone representatives sit one unit past the extreme borders.
        assert_eq!(zp.zones[0].representative, -0.5);
        assert_eq!(zp.zones[3].representative, 2.5);

        let two = CandidateSet::on_line(&[-1.0, 1.0]).unwrap();
        assert_eq!(ranking_zones_line(&two).unwrap().zones.len(), 2);
        let one = CandidateSet::on_line(&[5.0]).unwrap();
        assert_eq!(ranking_zones_line(&one).unwrap().zones.len(), 1);
    }

    #[test]
    fn coincident_ranking_borders_are_merged() {
        // Equally spaced candidates: midpoint of (1,4) equals midpoint of (2,3).
        let c = CandidateSet::on_line(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let zp = ranking_zones_line(&c).unwrap();
        assert_eq!(zp.ranking_borders, vec![0.5, 1.0, 1.5, 2.0, 2.5]);
        assert_eq!(zp.zones.len(), 6);
    }

    #[test]
    fn ascending_candidates_enforced_on_line() {
        assert_eq!(
            CandidateSet::on_line(&[1.0, 1.0]).unwrap_err(),
            GeometryError::CandidatesNotAscending
        );
        assert_eq!(
            CandidateSet::on_line(&[2.0, 1.0]).unwrap_err(),
            GeometryError::CandidatesNotAscending
        );
    }

    #[test]
    fn instance_json_round_trip() {
        let src = r#"{
            "metric": {"kind": "line"},
            "candidates": [[-1.0], [1.0]],
            "agents": [[-1.0], [0.001]]
        }"#;
        let inst = Instance::from_json_str(src).unwrap();
        assert_eq!(inst.m(), 2);
        assert_eq!(inst.agent_coords(), vec![-1.0, 0.001]);
        let back = Instance::from_json_str(&inst.to_json().to_string()).unwrap();
        assert_eq!(back, inst);

        let explicit = r#"{
            "metric": {"kind": "explicit", "matrix": [[0,1],[1,0]]},
            "candidates": [[0]],
            "agents": [[1]]
        }"#;
        let inst = Instance::from_json_str(explicit).unwrap();
        assert_eq!(inst.agents, vec![Point::Index(1)]);
    }
}
