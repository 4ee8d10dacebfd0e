//! Pairwise correlation networks over selected columns, exportable as DOT
//! (thickness from |rho|, color from sign) and JSON.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassFilter {
    All,
    Class0,
    Class1,
}

impl ClassFilter {
    pub fn parse(raw: &str) -> std::result::Result<Self, String> {
        Ok(match raw {
            "all" => ClassFilter::All,
            "0" => ClassFilter::Class0,
            "1" => ClassFilter::Class1,
            _ => return Err(format!("class filter must be 0, 1, or all, got '{raw}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub source: String,
    pub target: String,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneNetwork {
    pub nodes: Vec<String>,
    /// Undirected edges, one entry per pair, source index < target index in
    /// `nodes` order.
    pub edges: Vec<NetworkEdge>,
    pub threshold: f64,
}

impl GeneNetwork {
    pub fn edge_pairs(&self) -> Vec<(&str, &str)> {
        self.edges
            .iter()
            .map(|e| (e.source.as_str(), e.target.as_str()))
            .collect()
    }

    /// DOT export. Line thickness grows linearly from 1 at the threshold to
    /// 5 at |rho| = 1; green edges are positive, red negative.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph genes {\n  layout=neato;\n  node [shape=ellipse, fontsize=10];\n");
        for node in &self.nodes {
            let _ = writeln!(out, "  \"{node}\";");
        }
        for e in &self.edges {
            let penwidth = 1.0 + 4.0 * (e.rho.abs() - self.threshold) / (1.0 - self.threshold);
            let color = if e.rho >= 0.0 { "green" } else { "red" };
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [penwidth={:.3}, color={}, label=\"{:.2}\"];",
                e.source, e.target, penwidth, color, e.rho
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pearson correlation over jointly finite pairs; 0 when fewer than 3 such
/// pairs or either side is constant.
fn pairwise_pearson(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (x, y) in a.iter().zip(b.iter()) {
        if x.is_finite() && y.is_finite() {
            xs.push(*x);
            ys.push(*y);
        }
    }
    if xs.len() < 3 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Build the correlation network among `genes` over the rows selected by
/// `filter` (class filters require a response). An edge appears only when
/// `|rho|` strictly exceeds `threshold`.
pub fn correlation_network(
    data: &Dataset,
    genes: &[String],
    filter: ClassFilter,
    threshold: f64,
) -> Result<GeneNetwork> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "network threshold must lie in [0, 1), got {threshold}"
        )));
    }
    if genes.is_empty() {
        return Err(Error::EmptySelection("network gene list"));
    }
    let cols: Vec<usize> = genes
        .iter()
        .map(|g| data.col_index(g))
        .collect::<Result<_>>()?;

    let rows: Vec<usize> = match filter {
        ClassFilter::All => (0..data.n_rows()).collect(),
        ClassFilter::Class0 | ClassFilter::Class1 => {
            let y = data.require_y()?;
            let want = if filter == ClassFilter::Class1 { 1.0 } else { 0.0 };
            (0..data.n_rows()).filter(|&i| y[i] == want).collect()
        }
    };
    if rows.len() < 3 {
        return Err(Error::Invalid(format!(
            "need at least 3 rows after class filtering, got {}",
            rows.len()
        )));
    }

    let series: Vec<Vec<f64>> = cols
        .iter()
        .map(|&j| rows.iter().map(|&i| data.x()[[i, j]]).collect())
        .collect();

    let mut edges = Vec::new();
    for a in 0..genes.len() {
        for b in (a + 1)..genes.len() {
            let rho = pairwise_pearson(&series[a], &series[b]);
            if rho.abs() > threshold {
                edges.push(NetworkEdge {
                    source: genes[a].clone(),
                    target: genes[b].clone(),
                    rho,
                });
            }
        }
    }

    Ok(GeneNetwork {
        nodes: genes.to_vec(),
        edges,
        threshold,
    })
}
