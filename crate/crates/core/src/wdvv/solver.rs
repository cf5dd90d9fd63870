//! Order-by-order solution of a WDVV system from its seeds.
//!
//! Every residual `lhs - rhs` is compiled once into a shared graph whose nodes
//! hold dense coefficient vectors. Once the constant terms are fixed, the
//! coefficient of `q^n` in each residual is affine in the unknowns' `q^n`
//! coefficients: a product contributes `a_0 * db_n + b_0 * da_n` and
//! `theta_q` contributes `n * dx_n`. Each order is therefore one exact
//! linear solve, singular exactly at the resonant orders.

use std::collections::{BTreeMap, HashMap};

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::system::{rational, OdeSystem};
use super::WdvvError;
use crate::expr::Expr;
use crate::rat::format_rat;
use crate::series::{QSeries, Rat};

/// Solved unknowns together with every definition evaluated on them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub trunc: i64,
    pub series: BTreeMap<String, QSeries>,
}

#[derive(Debug, Clone)]
enum Node {
    Const(Rat),
    Var(usize),
    Add(Vec<usize>),
    Scale(Rat, usize),
    Mul(usize, usize),
    Theta(usize),
}

struct Graph<'a> {
    nodes: Vec<Node>,
    named: HashMap<String, usize>,
    defs: HashMap<&'a str, &'a Expr>,
    active: Vec<String>,
}

impl<'a> Graph<'a> {
    fn new(sys: &'a OdeSystem) -> Self {
        let mut g = Graph {
            nodes: Vec::new(),
            named: HashMap::new(),
            defs: sys.definitions.iter().map(|(n, e)| (n.as_str(), e)).collect(),
            active: Vec::new(),
        };
        for (i, u) in sys.unknowns.iter().enumerate() {
            let id = g.push(Node::Var(i));
            g.named.insert(u.clone(), id);
        }
        g
    }

    fn push(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn name(&mut self, v: &str) -> Result<usize, WdvvError> {
        if let Some(&id) = self.named.get(v) {
            return Ok(id);
        }
        let e = *self.defs.get(v).ok_or_else(|| WdvvError::UnknownVariable(v.to_string()))?;
        if self.active.iter().any(|a| a == v) {
            return Err(WdvvError::Cycle(v.to_string()));
        }
        self.active.push(v.to_string());
        let id = self.compile(e)?;
        self.active.pop();
        self.named.insert(v.to_string(), id);
        Ok(id)
    }

    fn compile(&mut self, e: &Expr) -> Result<usize, WdvvError> {
        Ok(match e {
            Expr::Num(c) => self.push(Node::Const(rational(c)?)),
            Expr::Var(v) => self.name(v)?,
            Expr::Add(xs) => {
                let ids = xs.iter().map(|x| self.compile(x)).collect::<Result<_, _>>()?;
                self.push(Node::Add(ids))
            }
            Expr::Mul(xs) => {
                let mut acc: Option<usize> = None;
                let mut scale = Rat::one();
                for x in xs {
                    if let Expr::Num(c) = x {
                        scale *= rational(c)?;
                        continue;
                    }
                    let id = self.compile(x)?;
                    acc = Some(match acc {
                        None => id,
                        Some(a) => self.push(Node::Mul(a, id)),
                    });
                }
                match acc {
                    None => self.push(Node::Const(scale)),
                    Some(a) if scale.is_one() => a,
                    Some(a) => self.push(Node::Scale(scale, a)),
                }
            }
            Expr::Neg(x) => {
                let id = self.compile(x)?;
                self.push(Node::Scale(-Rat::one(), id))
            }
            Expr::Pow(x, k) => {
                let base = self.compile(x)?;
                if *k == 0 {
                    return Ok(self.push(Node::Const(Rat::one())));
                }
                let mut acc = base;
                for _ in 1..*k {
                    acc = self.push(Node::Mul(acc, base));
                }
                acc
            }
            Expr::Theta(k, x) => {
                let mut acc = self.compile(x)?;
                for _ in 0..*k {
                    acc = self.push(Node::Theta(acc));
                }
                acc
            }
        })
    }

    /// Coefficient of `q^n` at every node, given all lower orders in `vals`.
    fn eval_order(&self, vals: &mut [Vec<Rat>], unknowns: &[Rat], n: usize) {
        for (id, node) in self.nodes.iter().enumerate() {
            let c = match node {
                Node::Const(c) => {
                    if n == 0 {
                        c.clone()
                    } else {
                        Rat::zero()
                    }
                }
                Node::Var(i) => unknowns[*i].clone(),
                Node::Add(xs) => xs.iter().fold(Rat::zero(), |acc, x| acc + &vals[*x][n]),
                Node::Scale(c, x) => c * &vals[*x][n],
                Node::Mul(a, b) => {
                    let (a, b) = (&vals[*a], &vals[*b]);
                    let mut s = Rat::zero();
                    for i in 0..=n {
                        if !a[i].is_zero() && !b[n - i].is_zero() {
                            s += &a[i] * &b[n - i];
                        }
                    }
                    s
                }
                Node::Theta(x) => Rat::from_integer(n.into()) * &vals[*x][n],
            };
            vals[id].push(c);
        }
    }

    /// Derivative of every node's `q^n` coefficient with respect to the
    /// unknowns' `q^n` coefficients; at `n = 0` it is taken
    /// at the provisional constants.
    fn jacobian(&self, vals: &[Vec<Rat>], n: usize, k: usize) -> Vec<Vec<Rat>> {
        let mut d: Vec<Vec<Rat>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let row = match node {
                Node::Const(_) => vec![Rat::zero(); k],
                Node::Var(i) => {
                    let mut r = vec![Rat::zero(); k];
                    r[*i] = Rat::one();
                    r
                }
                Node::Add(xs) => {
                    let mut r = vec![Rat::zero(); k];
                    for x in xs {
                        for (ri, v) in r.iter_mut().zip(&d[*x]) {
                            *ri += v;
                        }
                    }
                    r
                }
                Node::Scale(c, x) => d[*x].iter().map(|v| c * v).collect(),
                Node::Mul(a, b) => {
                    let (a0, b0) = (&vals[*a][0], &vals[*b][0]);
                    d[*a].iter().zip(&d[*b]).map(|(da, db)| b0 * da + a0 * db).collect()
                }
                Node::Theta(x) => {
                    let f = Rat::from_integer(n.into());
                    d[*x].iter().map(|v| &f * v).collect()
                }
            };
            d.push(row);
        }
        d
    }
}

/// Reduced row echelon form of `[a | b]`; returns pivot columns.
fn eliminate(a: &mut [Vec<Rat>], b: &mut [Rat]) -> Vec<usize> {
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        b[r] *= &inv;
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let (row_r, row_b) = (a[r].clone(), b[r].clone());
                for (x, y) in a[i].iter_mut().zip(&row_r) {
                    *x -= &f * y;
                }
                b[i] -= &f * &row_b;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solve `sys` below `q^trunc`, starting from its seeds.
///
/// Orders where `n I - J` is singular must be seeded, otherwise
/// [`WdvvError::ResonantOrder`] is returned. Seeds that contradict the
/// equations give [`WdvvError::SeedInconsistency`].
pub fn solve_ode(sys: &OdeSystem, trunc: i64) -> Result<Solution, WdvvError> {
    let mut g = Graph::new(sys);
    let mut eqs = Vec::new();
    for eq in sys.solving_equations() {
        let l = g.compile(&eq.lhs)?;
        let r = g.compile(&eq.rhs)?;
        let neg = g.push(Node::Scale(-Rat::one(), r));
        eqs.push((eq.label.clone(), g.push(Node::Add(vec![l, neg]))));
    }
    let defs: Vec<(String, usize)> = sys
        .definitions
        .iter()
        .map(|(name, _)| Ok((name.clone(), g.name(name)?)))
        .collect::<Result<_, WdvvError>>()?;

    let k = sys.unknowns.len();
    let seeds: Vec<Option<&QSeries>> = sys.unknowns.iter().map(|u| sys.seeds.get(u)).collect();
    let seeded = |i: usize, n: i64| seeds[i].and_then(|s| s.trunc()).is_some_and(|t| Rational64::from(n) < t);
    let seed_at = |i: usize, n: i64| seeds[i].map(|s| s.coeff(Rational64::from(n))).unwrap_or_default();

    let mut vals: Vec<Vec<Rat>> = vec![Vec::new(); g.nodes.len()];
    let upto = trunc.max(0) as usize;
    for n in 0..upto {
        let ni = n as i64;
        let mut cur: Vec<Rat> = (0..k).map(|i| seed_at(i, ni)).collect();
        let free: Vec<usize> = (0..k).filter(|&i| !seeded(i, ni)).collect();
        if !free.is_empty() {
            // At n = 0 this linearizes at zero constants; exact when the
            // constant terms enter linearly, which the residual check confirms.
            g.eval_order(&mut vals, &cur, n);
            let d = g.jacobian(&vals, n, k);
            let mut a: Vec<Vec<Rat>> = eqs.iter().map(|(_, id)| free.iter().map(|&j| d[*id][j].clone()).collect()).collect();
            let mut b: Vec<Rat> = eqs.iter().map(|(_, id)| -vals[*id][n].clone()).collect();
            for v in vals.iter_mut() {
                v.pop();
            }
            let pivots = eliminate(&mut a, &mut b);
            if pivots.len() < free.len() {
                if n == 0 {
                    return Err(WdvvError::UnseededConstant(sys.unknowns[free[0]].clone()));
                }
                return Err(WdvvError::ResonantOrder(ni));
            }
            for (row, &c) in pivots.iter().enumerate() {
                cur[free[c]] = b[row].clone();
            }
        }
        g.eval_order(&mut vals, &cur, n);
        if let Some((label, id)) = eqs.iter().find(|(_, id)| !vals[*id][n].is_zero()) {
            let residual = format_rat(&vals[*id][n]);
            let (order, equation) = (ni, label.clone());
            if n == 0 && !free.is_empty() {
                return Err(WdvvError::UnseededConstant(sys.unknowns[free[0]].clone()));
            }
            return Err(if free.len() < k {
                WdvvError::SeedInconsistency { order, equation, residual }
            } else {
                WdvvError::Inconsistent { order, equation, residual }
            });
        }
    }

    let to_series = |id: usize| QSeries::from_dense(vals[id].clone()).truncate(Rational64::from(trunc));
    let mut series = BTreeMap::new();
    for (i, u) in sys.unknowns.iter().enumerate() {
        series.insert(u.clone(), to_series(i));
    }
    for (name, id) in defs {
        series.insert(name, to_series(id));
    }
    Ok(Solution { trunc, series })
}
