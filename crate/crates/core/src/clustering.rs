//! Recovers the per-source-image cliques from the similarity graph: the
//! greedy insert/create procedure, then k-means over the candidate sets
//! under Jaccard distance with medoid centers.

use crate::error::{Error, Result};
use crate::similarity::SimilarityGraph;

/// A set of encoding indices believed to share one source image. Members
/// are kept sorted and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliqueSet {
    members: Vec<usize>,
}

impl CliqueSet {
    pub fn singleton(encoding: usize) -> Self {
        CliqueSet {
            members: vec![encoding],
        }
    }

    pub fn from_members(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        let before = members.len();
        members.dedup();
        if members.is_empty() || members.len() != before {
            return Err(Error::Invalid("clique members must be nonempty and distinct".into()));
        }
        Ok(CliqueSet { members })
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, encoding: usize) -> bool {
        self.members.binary_search(&encoding).is_ok()
    }
}

/// Jaccard distance `1 - |s ∩ t| / |s ∪ t|` between two sets. The ratio
/// itself is a similarity; k-means runs on its complement.
pub fn jaccard_distance(s: &CliqueSet, t: &CliqueSet) -> f64 {
    let (mut i, mut j) = (0usize, 0usize);
    let (a, b) = (s.members(), t.members());
    let mut intersection = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                intersection += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - intersection;
    1.0 - intersection as f64 / union as f64
}

/// Greedy growth step: adds the encoding outside `set` with the highest
/// total weight to the members, ties broken by lowest index.
pub fn insert(set: &CliqueSet, graph: &SimilarityGraph) -> Result<CliqueSet> {
    let candidate = best_candidate(set.members(), graph)?;
    let mut members = set.members().to_vec();
    members.push(candidate);
    members.sort_unstable();
    Ok(CliqueSet { members })
}

fn best_candidate(members: &[usize], graph: &SimilarityGraph) -> Result<usize> {
    if members.len() >= graph.len() {
        return Err(Error::InsertExhausted);
    }
    let mut best: Option<(usize, f64)> = None;
    for e in 0..graph.len() {
        if members.binary_search(&e).is_ok() {
            continue;
        }
        let score: f64 = members.iter().map(|&u| graph.weight(e, u) as f64).sum();
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((e, score)),
        }
    }
    Ok(best.expect("at least one candidate").0)
}

/// `create`: grows a singleton by `m` successive inserts. Scores are
/// maintained incrementally, which is equivalent to repeated [`insert`].
pub fn create(seed_encoding: usize, m: usize, graph: &SimilarityGraph) -> Result<CliqueSet> {
    let n = graph.len();
    if seed_encoding >= n {
        return Err(Error::Invalid(format!("seed encoding {seed_encoding} out of range")));
    }
    if m >= n {
        return Err(Error::InsertExhausted);
    }
    let mut members = vec![seed_encoding];
    let mut in_set = vec![false; n];
    in_set[seed_encoding] = true;
    let mut scores: Vec<f64> = (0..n).map(|e| graph.weight(e, seed_encoding) as f64).collect();
    for _ in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for e in 0..n {
            if in_set[e] {
                continue;
            }
            match best {
                Some((_, s)) if scores[e] <= s => {}
                _ => best = Some((e, scores[e])),
            }
        }
        let (chosen, _) = best.expect("m < n leaves a candidate");
        in_set[chosen] = true;
        members.push(chosen);
        for (e, sc) in scores.iter_mut().enumerate() {
            *sc += graph.weight(e, chosen) as f64;
        }
    }
    members.sort_unstable();
    Ok(CliqueSet { members })
}

/// Default growth count: `floor(N / 4)`, at least 1.
pub fn default_clique_growth(epochs: usize) -> usize {
    (epochs / 4).max(1)
}

/// Runs `create` from every encoding as the seed; parallel and order-stable.
pub fn create_all(graph: &SimilarityGraph, m: usize) -> Result<Vec<CliqueSet>> {
    let results = crate::par::map_indexed(graph.len(), |e| create(e, m, graph));
    results.into_iter().collect()
}

/// k-means over candidate sets under Jaccard distance. Centers are
/// medoids (the member set minimizing total within-cluster distance);
/// seeding is the first set plus farthest-point traversal; runs to a
/// fixed point or 50 iterations. Returns one medoid per cluster.
pub fn cluster_sets(all_sets: &[CliqueSet], num_clusters: usize) -> Result<Vec<CliqueSet>> {
    if num_clusters == 0 || num_clusters > all_sets.len() {
        return Err(Error::Clustering(format!(
            "cannot form {num_clusters} clusters from {} sets",
            all_sets.len()
        )));
    }
    // Duplicates carry no extra information for medoid selection; dedup
    // keeps the first occurrence order.
    let mut distinct: Vec<CliqueSet> = Vec::new();
    {
        let mut seen = std::collections::HashSet::new();
        for s in all_sets {
            if seen.insert(s.members().to_vec()) {
                distinct.push(s.clone());
            }
        }
    }
    let n = distinct.len();
    if n < num_clusters {
        return Err(Error::Clustering(format!(
            "only {n} distinct candidate sets for {num_clusters} clusters"
        )));
    }
    if n == num_clusters {
        return Ok(distinct);
    }

    // Farthest-point seeding from the first set.
    let mut medoids: Vec<usize> = vec![0];
    let mut nearest: Vec<f64> = crate::par::map_indexed(n, |i| jaccard_distance(&distinct[i], &distinct[0]));
    while medoids.len() < num_clusters {
        let mut far = (0usize, -1.0f64);
        for (i, &d) in nearest.iter().enumerate() {
            if d > far.1 {
                far = (i, d);
            }
        }
        medoids.push(far.0);
        let new_dists = crate::par::map_indexed(n, |i| jaccard_distance(&distinct[i], &distinct[far.0]));
        for (cur, nd) in nearest.iter_mut().zip(new_dists) {
            if nd < *cur {
                *cur = nd;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for _iter in 0..50 {
        // Assignment step.
        let new_assignment = crate::par::map_indexed(n, |i| {
            let mut best = (0usize, f64::INFINITY);
            for (c, &m) in medoids.iter().enumerate() {
                let d = jaccard_distance(&distinct[i], &distinct[m]);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best.0
        });
        assignment = new_assignment;

        // Refill any emptied cluster with the set farthest from its medoid.
        loop {
            let mut counts = vec![0usize; num_clusters];
            for &a in &assignment {
                counts[a] += 1;
            }
            let empty = match counts.iter().position(|&c| c == 0) {
                Some(e) => e,
                None => break,
            };
            let mut far = (usize::MAX, -1.0f64);
            for i in 0..n {
                if medoids.contains(&i) {
                    continue;
                }
                let d = jaccard_distance(&distinct[i], &distinct[medoids[assignment[i]]]);
                if d > far.1 {
                    far = (i, d);
                }
            }
            if far.0 == usize::MAX {
                return Err(Error::Clustering("cannot refill empty cluster".into()));
            }
            medoids[empty] = far.0;
            assignment[far.0] = empty;
        }

        // Medoid step.
        let members_of: Vec<Vec<usize>> = {
            let mut m = vec![Vec::new(); num_clusters];
            for (i, &a) in assignment.iter().enumerate() {
                m[a].push(i);
            }
            m
        };
        let new_medoids = crate::par::map_indexed(num_clusters, |c| {
            let members = &members_of[c];
            let mut best = (members[0], f64::INFINITY);
            for &cand in members {
                let total: f64 = members
                    .iter()
                    .map(|&other| jaccard_distance(&distinct[cand], &distinct[other]))
                    .sum();
                if total < best.1 {
                    best = (cand, total);
                }
            }
            best.0
        });
        if new_medoids == medoids {
            break;
        }
        medoids = new_medoids;
    }
    Ok(medoids.into_iter().map(|m| distinct[m].clone()).collect())
}
