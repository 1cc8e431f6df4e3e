//! Ranking statistics: tie-aware Spearman correlation, the `theta = 1 - rho`
//! ranking distance, and retrieval-list scoring over precomputed dumps.

use std::collections::HashMap;

use crate::Error;

/// Ordered `(item id, score)` pairs with unique ids. Higher score means
/// better rank.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingList {
    items: Vec<(String, f64)>,
}

impl RankingList {
    pub fn new(items: Vec<(String, f64)>) -> Result<Self, Error> {
        let mut seen = HashMap::with_capacity(items.len());
        for (id, _) in &items {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(Error::DuplicateItem(id.clone()));
            }
        }
        Ok(RankingList { items })
    }

    pub fn items(&self) -> &[(String, f64)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Tie-averaged ranks with rank 1 for the highest score. Tied scores receive
/// the mean of the rank positions they span.
pub fn ranks_with_ties(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut ranks = vec![0.0; scores.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Positions start..end (0-based) share the average 1-based rank.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho between two rankings of the same item set: the Pearson
/// correlation of their tie-averaged rank vectors. A constant rank vector
/// carries no ordering information and yields 0.
pub fn spearman_rho(a: &RankingList, b: &RankingList) -> Result<f64, Error> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::RankingTooShort(a.len().min(b.len())));
    }
    if a.len() != b.len() {
        return Err(Error::MismatchedItems(format!(
            "lists have {} and {} items",
            a.len(),
            b.len()
        )));
    }
    let b_index: HashMap<&str, usize> = b
        .items
        .iter()
        .enumerate()
        .map(|(i, (id, _))| (id.as_str(), i))
        .collect();

    let a_scores: Vec<f64> = a.items.iter().map(|(_, s)| *s).collect();
    let b_scores: Vec<f64> = b.items.iter().map(|(_, s)| *s).collect();
    let a_ranks = ranks_with_ties(&a_scores);
    let b_ranks_unaligned = ranks_with_ties(&b_scores);

    // Pair the rank vectors by item id, in a's order.
    let mut paired = Vec::with_capacity(a.len());
    for ((id, _), &rank_a) in a.items.iter().zip(&a_ranks) {
        let &pos = b_index
            .get(id.as_str())
            .ok_or_else(|| Error::MismatchedItems(id.clone()))?;
        paired.push((rank_a, b_ranks_unaligned[pos]));
    }

    let n = paired.len() as f64;
    let mean_a = paired.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_b = paired.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in &paired {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0))
}

/// Ranking distance `theta = 1 - rho` in `[0, 2]`: 0 for identical orders,
/// 2 for completely reversed orders.
pub fn theta(a: &RankingList, b: &RankingList) -> Result<f64, Error> {
    Ok(1.0 - spearman_rho(a, b)?)
}

/// One precomputed retrieval result: the query id and up to 100 result ids
/// in rank order with their similarity scores.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalDump {
    pub query_id: String,
    pub results: Vec<(String, f64)>,
}

/// Maximum result-list length in a retrieval dump.
pub const MAX_RETRIEVAL_RESULTS: usize = 100;

impl RetrievalDump {
    pub fn new(query_id: String, results: Vec<(String, f64)>) -> Result<Self, Error> {
        if results.len() > MAX_RETRIEVAL_RESULTS {
            return Err(Error::DumpParse {
                line: 0,
                message: format!(
                    "query {query_id:?} has {} results, limit is {MAX_RETRIEVAL_RESULTS}",
                    results.len()
                ),
            });
        }
        let mut seen = HashMap::with_capacity(results.len());
        for (id, _) in &results {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(Error::DuplicateItem(id.clone()));
            }
        }
        Ok(RetrievalDump { query_id, results })
    }

    /// 1-based rank and score of `target` if it appears in the result list.
    pub fn find(&self, target: &str) -> Option<(usize, f64)> {
        self.results
            .iter()
            .position(|(id, _)| id == target)
            .map(|pos| (pos + 1, self.results[pos].1))
    }
}

/// Retrieval score for one query: when the sought image appears in the
/// foreground-map retrieval list at 1-based rank `k` with similarity `s`,
/// the score is `s + 1/k + intersection/100`; otherwise only the
/// intersection term remains.
pub fn retrieval_score(found: Option<(usize, f64)>, intersection_size: usize) -> f64 {
    assert!(
        intersection_size <= MAX_RETRIEVAL_RESULTS,
        "intersection size {intersection_size} exceeds {MAX_RETRIEVAL_RESULTS}"
    );
    let overlap = intersection_size as f64 / MAX_RETRIEVAL_RESULTS as f64;
    match found {
        Some((rank, score)) => {
            assert!(rank >= 1, "rank is 1-based");
            score + 1.0 / rank as f64 + overlap
        }
        None => overlap,
    }
}

/// Scores a query from its two dumps: the GT-combined image (identified by
/// the GT dump's query id) is sought in the FM result list, and the
/// intersection counts result ids common to both lists.
pub fn score_from_dumps(gt: &RetrievalDump, fm: &RetrievalDump) -> f64 {
    let fm_ids: std::collections::HashSet<&str> =
        fm.results.iter().map(|(id, _)| id.as_str()).collect();
    let intersection = gt
        .results
        .iter()
        .filter(|(id, _)| fm_ids.contains(id.as_str()))
        .count();
    retrieval_score(fm.find(&gt.query_id), intersection)
}

/// Parses retrieval dumps from their on-disk text form.
///
/// Grammar, one token row per line:
///
/// ```text
/// # comment or blank line: ignored
/// query <query-id>
/// <result-id> <score>
/// ```
///
/// Each `query` line opens a record; the following id/score lines are its
/// results in rank order (at most 100, unique ids).
pub fn parse_retrieval_dumps(text: &str) -> Result<Vec<RetrievalDump>, Error> {
    let mut dumps: Vec<RetrievalDump> = Vec::new();
    let mut current: Option<(String, Vec<(String, f64)>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(id) = line.strip_prefix("query ") {
            if let Some((query_id, results)) = current.take() {
                dumps.push(RetrievalDump::new(query_id, results)?);
            }
            current = Some((id.trim().to_string(), Vec::new()));
            continue;
        }
        let Some((_, results)) = current.as_mut() else {
            return Err(Error::DumpParse {
                line: line_no,
                message: "result line before any `query` line".to_string(),
            });
        };
        let mut parts = line.split_whitespace();
        let (id, score) = match (parts.next(), parts.next(), parts.next()) {
            (Some(id), Some(score), None) => (id, score),
            _ => {
                return Err(Error::DumpParse {
                    line: line_no,
                    message: format!("expected `<result-id> <score>`, got {line:?}"),
                });
            }
        };
        let score: f64 = score.parse().map_err(|_| Error::DumpParse {
            line: line_no,
            message: format!("invalid score {score:?}"),
        })?;
        results.push((id.to_string(), score));
    }
    if let Some((query_id, results)) = current.take() {
        dumps.push(RetrievalDump::new(query_id, results)?);
    }
    Ok(dumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn list(pairs: &[(&str, f64)]) -> RankingList {
        RankingList::new(pairs.iter().map(|(id, s)| (id.to_string(), *s)).collect()).unwrap()
    }

    #[test]
    fn ranks_simple_and_ties() {
        assert_eq!(ranks_with_ties(&[3.0, 2.0, 1.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(ranks_with_ties(&[1.0, 1.0]), vec![1.5, 1.5]);
        assert_eq!(ranks_with_ties(&[5.0, 5.0, 2.0, 9.0]), vec![2.5, 2.5, 4.0, 1.0]);
    }

    #[test]
    fn ranking_list_rejects_duplicates() {
        let err = RankingList::new(vec![("a".into(), 1.0), ("a".into(), 2.0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateItem(_)));
    }

    #[test]
    fn spearman_endpoints_and_swap() {
        let a = list(&[("x", 3.0), ("y", 2.0), ("z", 1.0)]);
        assert_eq!(spearman_rho(&a, &a).unwrap(), 1.0);

        let reversed = list(&[("x", 1.0), ("y", 2.0), ("z", 3.0)]);
        assert_eq!(spearman_rho(&a, &reversed).unwrap(), -1.0);

        // Ranks (1,2,3) vs (1,3,2).
        let swapped = list(&[("x", 3.0), ("y", 1.0), ("z", 2.0)]);
        assert_abs_diff_eq!(spearman_rho(&a, &swapped).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn spearman_item_order_is_irrelevant() {
        let a = list(&[("x", 3.0), ("y", 2.0), ("z", 1.0)]);
        let same_shuffled = list(&[("z", 0.1), ("x", 0.9), ("y", 0.5)]);
        assert_eq!(spearman_rho(&a, &same_shuffled).unwrap(), 1.0);
    }

    #[test]
    fn spearman_constant_vector_is_zero() {
        let a = list(&[("x", 1.0), ("y", 1.0), ("z", 1.0)]);
        let b = list(&[("x", 3.0), ("y", 2.0), ("z", 1.0)]);
        assert_eq!(spearman_rho(&a, &b).unwrap(), 0.0);
        assert_eq!(theta(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn spearman_errors() {
        let a = list(&[("x", 1.0)]);
        assert!(matches!(spearman_rho(&a, &a), Err(Error::RankingTooShort(1))));

        let a = list(&[("x", 1.0), ("y", 2.0)]);
        let b = list(&[("x", 1.0), ("q", 2.0)]);
        assert!(matches!(spearman_rho(&a, &b), Err(Error::MismatchedItems(_))));
    }

    #[test]
    fn theta_endpoints() {
        let a = list(&[("x", 3.0), ("y", 2.0), ("z", 1.0)]);
        let reversed = list(&[("x", 1.0), ("y", 2.0), ("z", 3.0)]);
        let swapped = list(&[("x", 3.0), ("y", 1.0), ("z", 2.0)]);
        assert_eq!(theta(&a, &a).unwrap(), 0.0);
        assert_eq!(theta(&a, &reversed).unwrap(), 2.0);
        assert_abs_diff_eq!(theta(&a, &swapped).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn retrieval_score_spot_checks() {
        assert_abs_diff_eq!(
            retrieval_score(Some((1, 0.9)), 100),
            2.9,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(retrieval_score(None, 50), 0.5, epsilon = 1e-12);
        assert_eq!(retrieval_score(None, 0), 0.0);
    }

    #[test]
    fn score_from_dumps_membership_and_overlap() {
        let gt = RetrievalDump::new(
            "q1".into(),
            vec![("a".into(), 0.9), ("b".into(), 0.8), ("c".into(), 0.7)],
        )
        .unwrap();
        // q1 itself appears at rank 2 in the FM list; overlap is {a, b}.
        let fm = RetrievalDump::new(
            "q1f".into(),
            vec![("a".into(), 0.95), ("q1".into(), 0.6), ("b".into(), 0.5)],
        )
        .unwrap();
        let expected = 0.6 + 0.5 + 2.0 / 100.0;
        assert_abs_diff_eq!(score_from_dumps(&gt, &fm), expected, epsilon = 1e-12);

        // Not found: only the overlap term.
        let fm2 = RetrievalDump::new("q1f".into(), vec![("c".into(), 0.4)]).unwrap();
        assert_abs_diff_eq!(score_from_dumps(&gt, &fm2), 0.01, epsilon = 1e-12);
    }

    #[test]
    fn parse_dump_round_trip() {
        let text = "# demo\nquery q1\na 0.9\nb 0.8\n\nquery q2\nc 1.5\n";
        let dumps = parse_retrieval_dumps(text).unwrap();
        assert_eq!(dumps.len(), 2);
        assert_eq!(dumps[0].query_id, "q1");
        assert_eq!(dumps[0].results.len(), 2);
        assert_eq!(dumps[1].results, vec![("c".to_string(), 1.5)]);
    }

    #[test]
    fn parse_dump_rejects_orphan_results() {
        assert!(matches!(
            parse_retrieval_dumps("a 0.9\n"),
            Err(Error::DumpParse { line: 1, .. })
        ));
    }

    #[test]
    fn dump_rejects_oversized_result_list() {
        let results: Vec<(String, f64)> = (0..101).map(|i| (format!("r{i}"), 0.5)).collect();
        assert!(RetrievalDump::new("q".into(), results).is_err());
    }
}
