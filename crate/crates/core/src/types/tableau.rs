use crate::error::{MerbError, Result};

/// Explicit Runge–Kutta coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: &'static str,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: usize,
}

impl ButcherTableau {
    /// Builds a tableau from a strictly lower-triangular `a` (rows may be
    /// ragged; row `i` holds `a[i][0..i]`).
    pub fn new(
        name: &'static str,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: usize,
    ) -> Result<Self> {
        let s = b.len();
        if s == 0 || c.len() != s || a.len() != s {
            return Err(MerbError::InvalidArgument(format!(
                "tableau {name}: inconsistent stage counts"
            )));
        }
        let mut full = vec![vec![0.0; s]; s];
        for (i, row) in a.iter().enumerate() {
            if row.len() > i && row[i..].iter().any(|&x| x != 0.0) {
                return Err(MerbError::InvalidArgument(format!(
                    "tableau {name}: row {i} is not strictly lower triangular"
                )));
            }
            for (j, &x) in row.iter().enumerate().take(i) {
                full[i][j] = x;
            }
        }
        Ok(Self {
            name,
            a: full,
            b,
            c,
            order,
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Largest `|c_i - Σ_j a_ij|`.
    pub fn row_sum_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.c)
            .map(|(row, c)| (row.iter().sum::<f64>() - c).abs())
            .fold(0.0, f64::max)
    }

    /// Residuals `|b·Φ(t) - 1/γ(t)|` for every rooted tree `t` with at most
    /// `max_order` vertices, grouped by tree order.
    pub fn order_residuals(&self, max_order: usize) -> Vec<(usize, f64)> {
        let trees = RootedTrees::up_to(max_order);
        let s = self.stages();
        let mut weights: Vec<Vec<f64>> = Vec::with_capacity(trees.len());
        let mut out = Vec::with_capacity(trees.len());
        for t in &trees.trees {
            let mut phi = vec![1.0; s];
            for &child in &t.children {
                let cw = &weights[child];
                for (i, p) in phi.iter_mut().enumerate() {
                    let ac: f64 = (0..i).map(|j| self.a[i][j] * cw[j]).sum();
                    *p *= ac;
                }
            }
            let lhs: f64 = self.b.iter().zip(&phi).map(|(b, p)| b * p).sum();
            out.push((t.order, (lhs - 1.0 / t.density).abs()));
            weights.push(phi);
        }
        out
    }

    /// Largest order-condition residual through the declared order.
    pub fn max_order_residual(&self) -> f64 {
        self.order_residuals(self.order)
            .into_iter()
            .map(|(_, r)| r)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
struct Tree {
    order: usize,
    density: f64,
    children: Vec<usize>,
}

/// Catalog of unlabeled rooted trees ordered by vertex count.
struct RootedTrees {
    trees: Vec<Tree>,
}

impl RootedTrees {
    fn up_to(max_order: usize) -> Self {
        let mut trees: Vec<Tree> = Vec::new();
        for n in 1..=max_order {
            let mut forests = Vec::new();
            Self::forests(&trees, n - 1, 0, &mut Vec::new(), &mut forests);
            for children in forests {
                let density =
                    n as f64 * children.iter().map(|&c| trees[c].density).product::<f64>();
                trees.push(Tree {
                    order: n,
                    density,
                    children,
                });
            }
        }
        Self { trees }
    }

    // Multisets of catalog trees (non-decreasing index) with total order `remaining`.
    fn forests(
        catalog: &[Tree],
        remaining: usize,
        min_index: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for idx in min_index..catalog.len() {
            let o = catalog[idx].order;
            if o > remaining {
                continue;
            }
            current.push(idx);
            Self::forests(catalog, remaining - o, idx, current, out);
            current.pop();
        }
    }

    fn len(&self) -> usize {
        self.trees.len()
    }
}
