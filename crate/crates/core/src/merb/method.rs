use serde::Serialize;

use crate::error::{MerbError, Result};

/// One term `weight · φ_k(c·Z)` of a coefficient function. The argument
/// scaling `c` is implied by where the term lives: the stage node for
/// internal-stage coefficients, 1 for the update weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiTerm {
    pub k: usize,
    pub weight: f64,
}

const fn phi(k: usize, weight: f64) -> PhiTerm {
    PhiTerm { k, weight }
}

/// Coefficient function `Σ weight·φ_k(·)` multiplying the stage difference
/// of stage `stage`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFn {
    pub stage: usize,
    pub terms: Vec<PhiTerm>,
}

/// Stages that share one fast solve. The solve runs to `ivp_node·H` and each
/// member is read off at its own node along the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageGroup {
    pub ivp_node: f64,
    pub members: Vec<usize>,
}

/// Monomial forcing weight: the stage difference of `stage` enters as
/// `weight · τ^power / H^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolyTerm {
    pub stage: usize,
    pub power: usize,
    pub weight: f64,
}

/// A multirate exponential Rosenbrock method.
///
/// Stage `0` is the base point (node 0, zero stage difference); stages
/// `1..s` are internal stages. `a[i]` lists the coefficient functions of
/// stage `i` and `b` those of the update, each evaluated on `c_i·Z` and `Z`
/// respectively.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerbMethod {
    name: &'static str,
    order: usize,
    nodes: Vec<f64>,
    a: Vec<Vec<CoefficientFn>>,
    b: Vec<CoefficientFn>,
    groups: Vec<StageGroup>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn check_node(name: &str, c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(MerbError::InvalidNodes(format!("{name} = {c} violates 0 < {name} <= 1")));
    }
    Ok(())
}

impl MerbMethod {
    fn assemble(
        name: &'static str,
        order: usize,
        nodes: Vec<f64>,
        a: Vec<Vec<CoefficientFn>>,
        b: Vec<CoefficientFn>,
        groups: Vec<StageGroup>,
    ) -> Result<Self> {
        let m = Self {
            name,
            order,
            nodes,
            a,
            b,
            groups,
        };
        for g in 0..m.groups.len() {
            m.shared_stage_terms(g)?;
        }
        Ok(m)
    }

    /// Second order: exponential Euler, one fast solve over `[0, H]`.
    pub fn merb2() -> Self {
        Self::assemble("merb2", 2, vec![0.0], vec![vec![]], vec![], vec![])
            .expect("merb2 is well formed")
    }

    /// Third-order family with free node `c2`.
    pub fn merb3(c2: f64) -> Result<Self> {
        check_node("c2", c2)?;
        Self::assemble(
            "merb3",
            3,
            vec![0.0, c2],
            vec![vec![], vec![]],
            vec![CoefficientFn {
                stage: 1,
                terms: vec![phi(3, 2.0 / (c2 * c2))],
            }],
            vec![StageGroup {
                ivp_node: c2,
                members: vec![1],
            }],
        )
    }

    /// Fourth order, `c2 = 3/4`.
    pub fn merb4() -> Self {
        let c2 = 0.75;
        Self::assemble(
            "merb4",
            4,
            vec![0.0, c2],
            vec![vec![], vec![]],
            // 2/c2^2 = 32/9, forced by Σ b_i c_i^2 = 2φ3
            vec![CoefficientFn {
                stage: 1,
                terms: vec![phi(3, 32.0 / 9.0)],
            }],
            vec![StageGroup {
                ivp_node: c2,
                members: vec![1],
            }],
        )
        .expect("merb4 is well formed")
    }

    /// `c4 = 3(5c3 - 4) / (5(4c3 - 3))`, tied to `c3` by the fifth-order conditions.
    pub fn merb5_c4(c3: f64) -> f64 {
        3.0 * (5.0 * c3 - 4.0) / (5.0 * (4.0 * c3 - 3.0))
    }

    /// Fifth-order family with free nodes `c2, c3`.
    pub fn merb5(c2: f64, c3: f64) -> Result<Self> {
        check_node("c2", c2)?;
        check_node("c3", c3)?;
        if c3 == 0.75 {
            return Err(MerbError::InvalidNodes("c3 = 3/4 makes c4 undefined".into()));
        }
        let c4 = Self::merb5_c4(c3);
        check_node("c4", c4)?;
        if c4 == c3 {
            return Err(MerbError::InvalidNodes(format!("c4 = c3 = {c3}, nodes must differ")));
        }
        let a_row = |ci: f64| {
            vec![CoefficientFn {
                stage: 1,
                terms: vec![phi(3, 2.0 * ci.powi(3) / (c2 * c2))],
            }]
        };
        let d3 = c3 * c3 * (c4 - c3);
        let d4 = c4 * c4 * (c3 - c4);
        Self::assemble(
            "merb5",
            5,
            vec![0.0, c2, c3, c4],
            vec![vec![], vec![], a_row(c3), a_row(c4)],
            vec![
                CoefficientFn {
                    stage: 2,
                    terms: vec![phi(3, 2.0 * c4 / d3), phi(4, -6.0 / d3)],
                },
                CoefficientFn {
                    stage: 3,
                    terms: vec![phi(3, 2.0 * c3 / d4), phi(4, -6.0 / d4)],
                },
            ],
            vec![
                StageGroup {
                    ivp_node: c2,
                    members: vec![1],
                },
                StageGroup {
                    ivp_node: c3.max(c4),
                    members: vec![2, 3],
                },
            ],
        )
    }

    /// Sixth-order family; `c = [c2, c3, c4, c5, c6, c7]`.
    pub fn merb6(c: [f64; 6]) -> Result<Self> {
        let names = ["c2", "c3", "c4", "c5", "c6", "c7"];
        for (n, &ci) in names.iter().zip(&c) {
            check_node(n, ci)?;
        }
        let [c2, c3, c4, c5, c6, c7] = c;
        if c3 >= c2 {
            return Err(MerbError::InvalidNodes(format!("c3 < c2 violated ({c3} >= {c2})")));
        }
        for (n, ci) in [("c5", c5), ("c6", c6), ("c7", c7)] {
            if ci >= c4 {
                return Err(MerbError::InvalidNodes(format!("{n} < c4 violated ({ci} >= {c4})")));
            }
        }
        let late = [c4, c5, c6, c7];
        for i in 0..4 {
            for j in i + 1..4 {
                if late[i] == late[j] {
                    return Err(MerbError::InvalidNodes(format!(
                        "{} and {} must be distinct",
                        names[i + 2],
                        names[j + 2]
                    )));
                }
            }
        }

        let a_row = |ci: f64| {
            let d2 = c2 * c2 * (c3 - c2);
            let d3 = c3 * c3 * (c2 - c3);
            vec![
                CoefficientFn {
                    stage: 1,
                    terms: vec![
                        phi(3, 2.0 * ci.powi(3) * c3 / d2),
                        phi(4, -6.0 * ci.powi(4) / d2),
                    ],
                },
                CoefficientFn {
                    stage: 2,
                    terms: vec![
                        phi(3, 2.0 * ci.powi(3) * c2 / d3),
                        phi(4, -6.0 * ci.powi(4) / d3),
                    ],
                },
            ]
        };
        let b = (0..4)
            .map(|i| {
                let ci = late[i];
                let others: Vec<f64> = (0..4).filter(|&j| j != i).map(|j| late[j]).collect();
                let (ck, cl, cm) = (others[0], others[1], others[2]);
                let gamma = 1.0 / (ci * ci * (ci - ck) * (ci - cl) * (ci - cm));
                let alpha = ck * cl * cm * gamma;
                let beta = (ck + cl + cm) * gamma;
                let eta = (ck * cl + cl * cm + ck * cm) * gamma;
                CoefficientFn {
                    stage: i + 3,
                    terms: vec![
                        phi(3, -2.0 * alpha),
                        phi(4, 6.0 * eta),
                        phi(5, -24.0 * beta),
                        phi(6, 120.0 * gamma),
                    ],
                }
            })
            .collect();
        let mut a = vec![vec![], vec![], vec![]];
        a.extend(late.iter().map(|&ci| a_row(ci)));
        Self::assemble(
            "merb6",
            6,
            vec![0.0, c2, c3, c4, c5, c6, c7],
            a,
            b,
            vec![
                StageGroup {
                    ivp_node: c2,
                    members: vec![1, 2],
                },
                StageGroup {
                    ivp_node: c4,
                    members: vec![3, 4, 5, 6],
                },
            ],
        )
    }

    pub fn merb3_default() -> Self {
        Self::merb3(0.5).expect("default nodes are valid")
    }

    pub fn merb5_default() -> Self {
        Self::merb5(0.25, 33.0 / 40.0).expect("default nodes are valid")
    }

    pub fn merb6_default() -> Self {
        Self::merb6([1.0 / 9.0, 0.1, 1.0 / 7.0, 0.1, 1.0 / 9.0, 0.125])
            .expect("default nodes are valid")
    }

    /// Default-node method for order 2..=6.
    pub fn by_order(order: usize) -> Option<Self> {
        match order {
            2 => Some(Self::merb2()),
            3 => Some(Self::merb3_default()),
            4 => Some(Self::merb4()),
            5 => Some(Self::merb5_default()),
            6 => Some(Self::merb6_default()),
            _ => None,
        }
    }

    /// Parses `merb2` ... `merb6`.
    pub fn by_name(name: &str) -> Option<Self> {
        let order = name.strip_prefix("merb")?.parse().ok()?;
        Self::by_order(order)
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes `c_1 = 0, c_2, ..., c_s`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn stages(&self) -> usize {
        self.nodes.len()
    }

    pub fn stage_coefficients(&self, i: usize) -> &[CoefficientFn] {
        &self.a[i]
    }

    pub fn update_coefficients(&self) -> &[CoefficientFn] {
        &self.b
    }

    pub fn groups(&self) -> &[StageGroup] {
        &self.groups
    }

    /// Fast solves per step: one per stage group plus the update.
    pub fn num_fast_ivps(&self) -> usize {
        self.groups.len() + 1
    }

    /// Total fast integration length per step, in units of `H`.
    pub fn traversal(&self) -> f64 {
        1.0 + self.groups.iter().map(|g| g.ivp_node).sum::<f64>()
    }

    /// Slow evaluations per step: the linearization plus one per internal stage.
    pub fn slow_calls_per_step(&self) -> usize {
        self.nodes.len()
    }

    /// `(q, r)`: inner order for internal-stage solves and for the update.
    pub fn inner_orders(&self, drop_stage_order: bool) -> (usize, usize) {
        let q = if drop_stage_order {
            (self.order - 1).max(2)
        } else {
            self.order
        };
        (q, self.order)
    }

    /// Largest φ index appearing in any coefficient.
    pub fn max_phi_index(&self) -> usize {
        self.a
            .iter()
            .flatten()
            .chain(&self.b)
            .flat_map(|c| c.terms.iter().map(|t| t.k))
            .max()
            .unwrap_or(2)
            .max(2)
    }

    fn terms_to_poly(coeffs: &[CoefficientFn], node: f64) -> Vec<PolyTerm> {
        // a term α φ_k(cZ) is reproduced by forcing α τ^{k-1} / (c^k H^{k-1} (k-1)!)
        let mut out = Vec::new();
        for cf in coeffs {
            for t in &cf.terms {
                out.push(PolyTerm {
                    stage: cf.stage,
                    power: t.k - 1,
                    weight: t.weight / (node.powi(t.k as i32) * factorial(t.k - 1)),
                });
            }
        }
        out
    }

    /// Forcing terms of stage group `g`, checked to be identical for all members.
    pub fn shared_stage_terms(&self, g: usize) -> Result<Vec<PolyTerm>> {
        let group = &self.groups[g];
        let first = group.members[0];
        let reference = Self::terms_to_poly(&self.a[first], self.nodes[first]);
        for &i in &group.members[1..] {
            let other = Self::terms_to_poly(&self.a[i], self.nodes[i]);
            let same = other.len() == reference.len()
                && other.iter().zip(&reference).all(|(x, y)| {
                    x.stage == y.stage
                        && x.power == y.power
                        && (x.weight - y.weight).abs() <= 1e-12 * (1.0 + y.weight.abs())
                });
            if !same {
                return Err(MerbError::InvalidNodes(format!(
                    "stages {first} and {i} do not share a forcing polynomial"
                )));
            }
        }
        Ok(reference)
    }

    /// Forcing terms of the final update solve.
    pub fn update_terms(&self) -> Vec<PolyTerm> {
        Self::terms_to_poly(&self.b, 1.0)
    }

    /// Group index that produces stage `i`, if any.
    pub fn group_of(&self, i: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.members.contains(&i))
    }
}
