//! Estimator outputs.

use serde::{Deserialize, Serialize};

use crate::schema::{Scalar, Task};

/// Adjacency over named nodes. `adjacency[i][j] == 1` means an edge i→j;
/// an undirected edge is stored as both 1s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    pub nodes: Vec<String>,
    pub adjacency: Vec<Vec<u8>>,
    /// Optional symmetric edge strengths; larger is more significant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<Vec<Vec<f64>>>,
}

impl Graph {
    pub fn empty(nodes: Vec<String>) -> Self {
        let n = nodes.len();
        Self { nodes, adjacency: vec![vec![0; n]; n], strength: None }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j] == 1
    }

    pub fn is_directed(&self, i: usize, j: usize) -> bool {
        self.has_edge(i, j) && !self.has_edge(j, i)
    }

    /// Unordered adjacent pairs `(i, j)` with `i < j`.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if self.has_edge(i, j) || self.has_edge(j, i) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Each adjacent pair once, oriented `from → to`; undirected pairs keep
    /// column order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.skeleton().into_iter().map(|(i, j)| if self.is_directed(j, i) { (j, i) } else { (i, j) }).collect()
    }

    /// Edges ordered by decreasing strength (stable on ties, so graphs
    /// without strengths keep [`Graph::edges`] order).
    pub fn ranked_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges();
        if let Some(s) = &self.strength {
            e.sort_by(|a, b| s[b.0][b.1].total_cmp(&s[a.0][a.1]));
        }
        e
    }

    /// True when the directed part contains no cycle.
    pub fn directed_part_is_acyclic(&self) -> bool {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for i in 0..n {
            for j in 0..n {
                if self.is_directed(i, j) {
                    indeg[j] += 1;
                }
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = stack.pop() {
            seen += 1;
            for j in 0..n {
                if self.is_directed(i, j) {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        stack.push(j);
                    }
                }
            }
        }
        seen == n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToolResult {
    Graph(Graph),
    Effect { value: f64 },
    Mediation { total: f64, direct: f64, indirect: f64 },
    Action { level: Scalar },
}

impl ToolResult {
    pub fn mediation(direct: f64, indirect: f64) -> Self {
        ToolResult::Mediation { total: direct + indirect, direct, indirect }
    }

    /// Whether this result has the output shape of `task`.
    pub fn fits(&self, task: Task) -> bool {
        matches!(
            (task, self),
            (Task::Cgl, ToolResult::Graph(_))
                | (Task::Ate | Task::Hte, ToolResult::Effect { .. })
                | (Task::Ma, ToolResult::Mediation { .. })
                | (Task::Opo, ToolResult::Action { .. })
        )
    }

    /// Every number the result carries.
    pub fn numbers(&self) -> Vec<f64> {
        match self {
            ToolResult::Graph(_) => Vec::new(),
            ToolResult::Effect { value } => vec![*value],
            ToolResult::Mediation { total, direct, indirect } => vec![*total, *direct, *indirect],
            ToolResult::Action { level } => level.as_f64().into_iter().collect(),
        }
    }
}
