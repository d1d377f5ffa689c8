//! Test-only oracles. Nothing here calls into the code under test beyond
//! reading plain graph data (node ids, edge triples).

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::PathBuf;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture readable")
}

/// Counts gathered by walking the raw XML tree.
#[derive(Debug, Default)]
pub struct FixtureCounts {
    pub roads: usize,
    pub junctions: usize,
    pub connections: usize,
    pub traffic_lights: usize,
    pub crosswalks: usize,
    /// Sum over driving lanes of their lane-section length.
    pub driving_length: f64,
}

pub fn walk_fixture(xml: &str) -> FixtureCounts {
    let doc = roxmltree::Document::parse(xml).unwrap();
    let mut c = FixtureCounts::default();
    for n in doc.descendants() {
        match n.tag_name().name() {
            "road" => {
                c.roads += 1;
                let len: f64 = n.attribute("length").unwrap().parse().unwrap();
                let sections: Vec<_> = n.descendants().filter(|d| d.has_tag_name("laneSection")).collect();
                for (i, sec) in sections.iter().enumerate() {
                    let start: f64 = sec.attribute("s").unwrap().parse().unwrap();
                    let end: f64 = sections
                        .get(i + 1)
                        .map(|x| x.attribute("s").unwrap().parse().unwrap())
                        .unwrap_or(len);
                    let driving = sec
                        .descendants()
                        .filter(|l| l.has_tag_name("lane") && l.attribute("type") == Some("driving"))
                        .count();
                    c.driving_length += driving as f64 * (end - start);
                }
            }
            "junction" => c.junctions += 1,
            "connection" => c.connections += 1,
            "signal" if n.attribute("type") == Some("1000001") => c.traffic_lights += 1,
            "object" if n.attribute("type") == Some("crosswalk") => c.crosswalks += 1,
            _ => {}
        }
    }
    c
}

/// Plain adjacency built from (from, to, relation) triples. `undirected`
/// relations are inserted both ways; `ignored` relations are skipped.
pub fn adjacency(
    edges: &[(String, String, String)],
    undirected: &[&str],
    ignored: &[&str],
) -> BTreeMap<String, Vec<String>> {
    let mut adj: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (a, b, rel) in edges {
        if ignored.contains(&rel.as_str()) {
            continue;
        }
        adj.entry(a.clone()).or_default().push(b.clone());
        if undirected.contains(&rel.as_str()) {
            adj.entry(b.clone()).or_default().push(a.clone());
        }
    }
    adj
}

pub fn bfs(adj: &BTreeMap<String, Vec<String>>, from: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    let mut q = VecDeque::from([from.to_string()]);
    while let Some(n) = q.pop_front() {
        for m in adj.get(&n).into_iter().flatten() {
            if seen.insert(m.clone()) {
                q.push_back(m.clone());
            }
        }
    }
    seen
}

/// Nodes with no outgoing successor/left/right triple.
pub fn out_degree_zero(nodes: &[String], edges: &[(String, String, String)]) -> BTreeSet<String> {
    let sources: BTreeSet<&String> = edges
        .iter()
        .filter(|(_, _, r)| matches!(r.as_str(), "successor" | "left" | "right"))
        .map(|(a, _, _)| a)
        .collect();
    nodes.iter().filter(|n| !sources.contains(n)).cloned().collect()
}

/// Exhaustive enumeration of simple paths; returns the minimum total weight
/// and every path that attains it (within `tol`).
pub fn enumerate_shortest(
    weighted: &BTreeMap<String, Vec<(String, f64)>>,
    from: &str,
    to: &str,
    tol: f64,
) -> Option<(f64, Vec<Vec<String>>)> {
    let mut all: Vec<(f64, Vec<String>)> = Vec::new();
    let mut path = vec![from.to_string()];
    fn dfs(
        w: &BTreeMap<String, Vec<(String, f64)>>,
        to: &str,
        path: &mut Vec<String>,
        cost: f64,
        all: &mut Vec<(f64, Vec<String>)>,
    ) {
        let here = path.last().unwrap().clone();
        if here == to {
            all.push((cost, path.clone()));
            return;
        }
        for (next, c) in w.get(&here).into_iter().flatten() {
            if path.contains(next) {
                continue;
            }
            path.push(next.clone());
            dfs(w, to, path, cost + c, all);
            path.pop();
        }
    }
    dfs(weighted, to, &mut path, 0.0, &mut all);
    let best = all.iter().map(|(c, _)| *c).reduce(f64::min)?;
    let paths = all
        .into_iter()
        .filter(|(c, _)| (c - best).abs() <= tol)
        .map(|(_, p)| p)
        .collect();
    Some((best, paths))
}
