//! Input distributions, the induced full joint, and information measures.
//!
//! The joint is kept factored: a table over the input configurations
//! `(Q, U_1, X_1, U_2, X_2, U_3, X_3)` with every deterministic coordinate
//! (`X_{lk}`, `S_l`) precomputed per configuration, while `S'_l` and `Y_l`
//! are enumerated through the noise kernels only when a measure asks for
//! them. Marginals, entropies and mutual informations are memoized.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{interferers, ValidatedChannel, USERS};
use crate::error::{Error, Result};
use crate::logform::LogForm;
use crate::rational::{sum_probs, sums_to_one, Prob};
use crate::vars::{Var, VarSet};

/// Values whose magnitude is below this are reported as exactly zero.
pub const SNAP_TOL: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    if x.abs() < SNAP_TOL {
        0.0
    } else {
        x
    }
}

/// `p(q) Π_l p(u_l, x_l | q)`; the product structure is the type itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputPmf {
    pub p_q: Vec<Prob>,
    /// `p_ux_given_q[l][q][u][x]`
    pub p_ux_given_q: Vec<Vec<Vec<Vec<Prob>>>>,
}

impl InputPmf {
    pub fn q_size(&self) -> usize {
        self.p_q.len()
    }

    pub fn u_size(&self, l: usize) -> usize {
        self.p_ux_given_q[l][0].len()
    }

    pub fn x_size(&self, l: usize) -> usize {
        self.p_ux_given_q[l][0].first().map_or(0, Vec::len)
    }

    pub fn is_exact(&self) -> bool {
        self.p_q.iter().chain(self.p_ux_given_q.iter().flatten().flatten().flatten()).all(Prob::is_exact)
    }

    /// Checks shapes and that every conditional table is stochastic.
    pub fn validate(&self) -> Result<()> {
        if self.p_q.is_empty() {
            return Err(Error::DimensionMismatch("p_q is empty".into()));
        }
        if !sums_to_one(&sum_probs(&self.p_q)) || self.p_q.iter().any(Prob::is_negative) {
            return Err(Error::NonStochastic { kernel: "p_q".into(), row: 0, sum: sum_probs(&self.p_q).to_string() });
        }
        if self.p_ux_given_q.len() != USERS {
            return Err(Error::DimensionMismatch(format!("expected {USERS} conditional tables")));
        }
        for (l, per_q) in self.p_ux_given_q.iter().enumerate() {
            if per_q.len() != self.q_size() {
                return Err(Error::DimensionMismatch(format!(
                    "p_ux_given_q[{l}] has {} slices for |Q| = {}",
                    per_q.len(),
                    self.q_size()
                )));
            }
            let (nu, nx) = (per_q[0].len(), per_q[0].first().map_or(0, Vec::len));
            if nu == 0 || nx == 0 {
                return Err(Error::DimensionMismatch(format!("p_ux_given_q[{l}] is empty")));
            }
            for (q, table) in per_q.iter().enumerate() {
                if table.len() != nu || table.iter().any(|row| row.len() != nx) {
                    return Err(Error::DimensionMismatch(format!("p_ux_given_q[{l}][{q}] is not {nu}x{nx}")));
                }
                let flat: Vec<&Prob> = table.iter().flatten().collect();
                let sum = sum_probs(flat.iter().copied());
                if !sums_to_one(&sum) || flat.iter().any(|p| p.is_negative()) {
                    return Err(Error::NonStochastic { kernel: format!("p_ux_given_q[{l}]"), row: q, sum: sum.to_string() });
                }
            }
        }
        Ok(())
    }

    /// `|Q| = 1` and `U_l = X_l` with the given input marginals.
    pub fn u_equals_x(p_x: [Vec<Prob>; USERS]) -> Self {
        let p_ux_given_q = p_x
            .iter()
            .map(|px| {
                let n = px.len();
                vec![(0..n).map(|u| (0..n).map(|x| if u == x { px[x].clone() } else { Prob::zero() }).collect()).collect()]
            })
            .collect();
        InputPmf { p_q: vec![Prob::one()], p_ux_given_q }
    }

    /// `|Q| = 1`, `U_l = map_l(X_l)` deterministically.
    pub fn u_function_of_x(p_x: [Vec<Prob>; USERS], maps: [Vec<usize>; USERS]) -> Self {
        let p_ux_given_q = (0..USERS)
            .map(|l| {
                let nu = maps[l].iter().copied().max().unwrap_or(0) + 1;
                let nx = p_x[l].len();
                vec![(0..nu)
                    .map(|u| (0..nx).map(|x| if maps[l][x] == u { p_x[l][x].clone() } else { Prob::zero() }).collect())
                    .collect()]
            })
            .collect();
        InputPmf { p_q: vec![Prob::one()], p_ux_given_q }
    }

    pub fn uniform_u_equals_x(x_sizes: [usize; USERS]) -> Self {
        InputPmf::u_equals_x(x_sizes.map(|n| vec![Prob::ratio(1, n as i64); n]))
    }

    /// Random rational `p(q) p(u_l, x_l | q)` with small integer weights.
    pub fn random_rational<R: Rng>(rng: &mut R, q_size: usize, u_sizes: [usize; USERS], x_sizes: [usize; USERS]) -> Self {
        let p_q = crate::channel::random_row(rng, q_size, true);
        let p_ux_given_q = (0..USERS)
            .map(|l| {
                (0..q_size)
                    .map(|_| {
                        let flat = crate::channel::random_row(rng, u_sizes[l] * x_sizes[l], true);
                        flat.chunks(x_sizes[l]).map(<[Prob]>::to_vec).collect()
                    })
                    .collect()
            })
            .collect();
        InputPmf { p_q, p_ux_given_q }
    }

    /// Random rational input marginals with `U_l = X_l` and `|Q| = 1`.
    pub fn random_u_equals_x<R: Rng>(rng: &mut R, x_sizes: [usize; USERS]) -> Self {
        InputPmf::u_equals_x(x_sizes.map(|n| crate::channel::random_row(rng, n, true)))
    }

    /// Dirichlet(1) draws (normalized exponentials) as float tables.
    pub fn random_dirichlet<R: Rng>(rng: &mut R, q_size: usize, u_sizes: [usize; USERS], x_sizes: [usize; USERS]) -> Self {
        fn draw<R: Rng>(rng: &mut R, n: usize) -> Vec<Prob> {
            let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = e.iter().sum();
            e.into_iter().map(|v| Prob::Float(v / total)).collect()
        }
        let p_q = draw(rng, q_size);
        let p_ux_given_q = (0..USERS)
            .map(|l| {
                (0..q_size)
                    .map(|_| draw(rng, u_sizes[l] * x_sizes[l]).chunks(x_sizes[l]).map(<[Prob]>::to_vec).collect())
                    .collect()
            })
            .collect();
        InputPmf { p_q, p_ux_given_q }
    }

    /// Dirichlet(1) draws of `p(q)` and `p(x_l | q)` with `U_l = X_l`.
    pub fn random_dirichlet_u_equals_x<R: Rng>(rng: &mut R, q_size: usize, x_sizes: [usize; USERS]) -> Self {
        let base = InputPmf::random_dirichlet(rng, q_size, [1; USERS], x_sizes);
        let p_ux_given_q = base
            .p_ux_given_q
            .iter()
            .map(|per_q| {
                per_q
                    .iter()
                    .map(|t| {
                        let px = &t[0];
                        (0..px.len()).map(|u| (0..px.len()).map(|x| if u == x { px[x].clone() } else { Prob::zero() }).collect()).collect()
                    })
                    .collect()
            })
            .collect();
        InputPmf { p_q: base.p_q, p_ux_given_q }
    }

    /// True when `U_l` is almost surely equal to `X_l` for every `l`.
    pub fn has_u_equal_x(&self) -> bool {
        self.p_ux_given_q
            .iter()
            .all(|per_q| per_q.iter().all(|t| t.iter().enumerate().all(|(u, row)| row.iter().enumerate().all(|(x, p)| u == x || p.is_zero()))))
    }
}

/// Slot of a deterministic coordinate inside [`Cell::vals`].
fn slot(v: Var) -> Option<usize> {
    match v {
        Var::Q => Some(0),
        Var::U(l) => Some(1 + l),
        Var::X(l) => Some(4 + l),
        Var::Link(l, k) => Some(7 + 3 * l + k),
        Var::S(l) => Some(16 + l),
        Var::SNoisy(_) | Var::Y(_) => None,
    }
}

const SLOTS: usize = 19;

#[derive(Clone, Debug)]
struct Cell {
    p: f64,
    exact: Option<BigRational>,
    vals: [u16; SLOTS],
}

/// Arithmetic used to accumulate marginals.
trait Mass: Clone {
    fn zero() -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn is_zero(&self) -> bool;
}

impl Mass for f64 {
    fn zero() -> Self {
        0.0
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Mass for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

const DENSE_LIMIT: usize = 1 << 18;

/// Probability table over the full set of channel and input variables.
#[derive(Debug)]
pub struct FullJoint {
    channel: Arc<ValidatedChannel>,
    input: InputPmf,
    cells: Vec<Cell>,
    exact: bool,
    noise_exact: Vec<Vec<Vec<BigRational>>>,
    entropy_cache: Mutex<HashMap<VarSet, f64>>,
    exact_cache: Mutex<HashMap<VarSet, Arc<LogForm>>>,
}

impl Clone for FullJoint {
    fn clone(&self) -> Self {
        FullJoint {
            channel: self.channel.clone(),
            input: self.input.clone(),
            cells: self.cells.clone(),
            exact: self.exact,
            noise_exact: self.noise_exact.clone(),
            entropy_cache: Mutex::new(HashMap::new()),
            exact_cache: Mutex::new(HashMap::new()),
        }
    }
}

/// Builds the joint induced by `input` and `channel`. The exact path is
/// enabled automatically when both are rational.
pub fn build_full_joint(input: &InputPmf, channel: &ValidatedChannel) -> Result<FullJoint> {
    FullJoint::new(input.clone(), Arc::new(channel.clone()))
}

impl FullJoint {
    pub fn new(input: InputPmf, channel: Arc<ValidatedChannel>) -> Result<Self> {
        input.validate()?;
        let a = channel.alphabets();
        for l in 0..USERS {
            if input.x_size(l) != a.x[l] {
                return Err(Error::DimensionMismatch(format!(
                    "pmf gives |X{}| = {}, channel declares {}",
                    l + 1,
                    input.x_size(l),
                    a.x[l]
                )));
            }
        }
        let exact = input.is_exact() && channel.is_exact();
        let mut cells = Vec::new();
        let nq = input.q_size();
        let ux: [usize; USERS] = std::array::from_fn(|l| input.u_size(l) * input.x_size(l));
        for q in 0..nq {
            for c0 in 0..ux[0] {
                for c1 in 0..ux[1] {
                    for c2 in 0..ux[2] {
                        let combo = [c0, c1, c2];
                        let probs: Vec<&Prob> = std::iter::once(&input.p_q[q])
                            .chain((0..USERS).map(|l| {
                                let nx = input.x_size(l);
                                &input.p_ux_given_q[l][q][combo[l] / nx][combo[l] % nx]
                            }))
                            .collect();
                        if probs.iter().any(|p| p.is_zero()) {
                            continue;
                        }
                        let p: f64 = probs.iter().map(|p| p.to_f64()).product();
                        let exact_p = if exact {
                            Some(probs.iter().fold(BigRational::one(), |acc, p| acc * p.exact().unwrap()))
                        } else {
                            None
                        };
                        let mut vals = [0u16; SLOTS];
                        vals[0] = q as u16;
                        for l in 0..USERS {
                            let nx = input.x_size(l);
                            vals[1 + l] = (combo[l] / nx) as u16;
                            vals[4 + l] = (combo[l] % nx) as u16;
                        }
                        for l in 0..USERS {
                            for k in 0..USERS {
                                vals[7 + 3 * l + k] = channel.link(l, k, vals[4 + l] as usize) as u16;
                            }
                        }
                        for l in 0..USERS {
                            let (m, n) = interferers(l);
                            let a_ = vals[7 + 3 * m + l] as usize;
                            let b_ = vals[7 + 3 * n + l] as usize;
                            vals[16 + l] = channel.combine(l, a_, b_) as u16;
                        }
                        cells.push(Cell { p, exact: exact_p, vals });
                    }
                }
            }
        }
        let noise_exact = if exact {
            (0..USERS)
                .map(|l| channel.noise(l).iter().map(|row| row.iter().map(|p| p.exact().unwrap().clone()).collect()).collect())
                .collect()
        } else {
            Vec::new()
        };
        Ok(FullJoint {
            channel,
            input,
            cells,
            exact,
            noise_exact,
            entropy_cache: Mutex::new(HashMap::new()),
            exact_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn channel(&self) -> &ValidatedChannel {
        &self.channel
    }

    pub fn input(&self) -> &InputPmf {
        &self.input
    }

    /// Whether exact rational measures are available.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn alphabet_size(&self, v: Var) -> usize {
        let a = self.channel.alphabets();
        match v {
            Var::Q => self.input.q_size(),
            Var::U(l) => self.input.u_size(l),
            Var::X(l) => a.x[l],
            Var::Link(l, k) => a.x_link[l][k],
            Var::S(l) => a.s[l],
            Var::SNoisy(l) => a.s_noisy[l],
            Var::Y(l) => a.y[l],
        }
    }

    /// Every variable of the joint, in canonical order.
    pub fn all_vars() -> VarSet {
        let mut v = vec![Var::Q];
        for l in 0..USERS {
            v.extend([Var::U(l), Var::X(l), Var::S(l), Var::SNoisy(l), Var::Y(l)]);
            v.extend((0..USERS).map(|k| Var::Link(l, k)));
        }
        VarSet::of(v)
    }

    /// Accumulates the marginal of `vars` as `(flat index, mass)` pairs.
    fn marginal<T: Mass>(&self, vars: &VarSet, cell_mass: impl Fn(&Cell) -> T, kernel: impl Fn(usize, usize, usize) -> T) -> Vec<T> {
        let sizes: Vec<usize> = vars.vars().iter().map(|&v| self.alphabet_size(v)).collect();
        let total: usize = sizes.iter().product();
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let mut noisy: Vec<usize> = vars
            .vars()
            .iter()
            .filter_map(|v| match *v {
                Var::SNoisy(l) | Var::Y(l) => Some(l),
                _ => None,
            })
            .collect();
        noisy.sort_unstable();
        noisy.dedup();
        let fixed: Vec<(usize, usize)> =
            vars.vars().iter().zip(&strides).filter_map(|(&v, &st)| slot(v).map(|s| (s, st))).collect();
        let noisy_vars: Vec<(Var, usize)> =
            vars.vars().iter().zip(&strides).filter(|(v, _)| slot(**v).is_none()).map(|(&v, &st)| (v, st)).collect();
        let s_sizes: Vec<usize> = noisy.iter().map(|&l| self.channel.alphabets().s_noisy[l]).collect();

        let dense = total <= DENSE_LIMIT;
        let mut dense_out: Vec<T> = if dense { vec![T::zero(); total] } else { Vec::new() };
        let mut sparse_out: BTreeMap<usize, T> = BTreeMap::new();
        let mut deposit = |idx: usize, m: T| {
            if dense {
                dense_out[idx].add_assign(&m);
            } else {
                sparse_out.entry(idx).or_insert_with(T::zero).add_assign(&m);
            }
        };
        let mut choice = vec![0usize; noisy.len()];
        for cell in &self.cells {
            let base_mass = cell_mass(cell);
            let base: usize = fixed.iter().map(|&(s, st)| cell.vals[s] as usize * st).sum();
            if noisy.is_empty() {
                deposit(base, base_mass);
                continue;
            }
            choice.iter_mut().for_each(|c| *c = 0);
            'outer: loop {
                let mut m = base_mass.clone();
                for (i, &l) in noisy.iter().enumerate() {
                    m = m.mul(&kernel(l, cell.vals[16 + l] as usize, choice[i]));
                }
                if !m.is_zero() {
                    let mut idx = base;
                    for &(v, st) in &noisy_vars {
                        let val = match v {
                            Var::SNoisy(l) => choice[noisy.binary_search(&l).unwrap()],
                            Var::Y(l) => {
                                let sp = choice[noisy.binary_search(&l).unwrap()];
                                self.channel.receive(l, cell.vals[7 + 4 * l] as usize, sp)
                            }
                            _ => unreachable!(),
                        };
                        idx += val * st;
                    }
                    deposit(idx, m);
                }
                for i in (0..choice.len()).rev() {
                    choice[i] += 1;
                    if choice[i] < s_sizes[i] {
                        continue 'outer;
                    }
                    choice[i] = 0;
                }
                break;
            }
        }
        if dense {
            dense_out.into_iter().filter(|m| !m.is_zero()).collect()
        } else {
            sparse_out.into_values().filter(|m| !m.is_zero()).collect()
        }
    }

    /// Nonzero masses of the marginal pmf of `vars` (floats).
    pub fn marginal_masses(&self, vars: &VarSet) -> Vec<f64> {
        let ch = &self.channel;
        self.marginal(vars, |c| c.p, |l, s, t| ch.noise_f64(l)[s][t])
    }

    /// Nonzero masses of the marginal pmf of `vars` (exact), if available.
    pub fn marginal_masses_exact(&self, vars: &VarSet) -> Option<Vec<BigRational>> {
        if !self.exact {
            return None;
        }
        Some(self.marginal(vars, |c| c.exact.clone().unwrap(), |l, s, t| self.noise_exact[l][s][t].clone()))
    }

    /// `H(vars)` in bits.
    pub fn entropy(&self, vars: &VarSet) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        if let Some(h) = self.entropy_cache.lock().unwrap().get(vars) {
            return *h;
        }
        let h: f64 = self.marginal_masses(vars).iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
        self.entropy_cache.lock().unwrap().insert(vars.clone(), h);
        h
    }

    /// `H(vars)` as an exact log-form, if the joint is rational.
    pub fn entropy_exact(&self, vars: &VarSet) -> Option<Arc<LogForm>> {
        if !self.exact {
            return None;
        }
        if vars.is_empty() {
            return Some(Arc::new(LogForm::zero()));
        }
        if let Some(h) = self.exact_cache.lock().unwrap().get(vars) {
            return Some(h.clone());
        }
        let masses = self.marginal_masses_exact(vars)?;
        let h = Arc::new(LogForm::entropy(&masses));
        self.exact_cache.lock().unwrap().insert(vars.clone(), h.clone());
        Some(h)
    }

    /// `H(A | C)` in bits. `A` and `C` must be disjoint.
    pub fn cond_entropy(&self, a: &VarSet, c: &VarSet) -> Result<f64> {
        disjoint(a, c)?;
        Ok(snap(self.entropy(&a.union(c)) - self.entropy(c)))
    }

    /// `I(A; B | C)` in bits. The three sets must be pairwise disjoint.
    pub fn cond_mutual_info(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
        disjoint(a, b)?;
        disjoint(a, c)?;
        disjoint(b, c)?;
        let ac = a.union(c);
        let bc = b.union(c);
        let abc = ac.union(b);
        Ok(snap(self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)))
    }

    /// Exact `H(A | C)`.
    pub fn cond_entropy_exact(&self, a: &VarSet, c: &VarSet) -> Result<Option<LogForm>> {
        disjoint(a, c)?;
        let (Some(ac), Some(cc)) = (self.entropy_exact(&a.union(c)), self.entropy_exact(c)) else {
            return Ok(None);
        };
        Ok(Some(LogForm::combine([(1, ac.as_ref()), (-1, cc.as_ref())])))
    }

    /// Exact `I(A; B | C)`.
    pub fn cond_mutual_info_exact(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<Option<LogForm>> {
        disjoint(a, b)?;
        disjoint(a, c)?;
        disjoint(b, c)?;
        if !self.exact {
            return Ok(None);
        }
        let ac = self.entropy_exact(&a.union(c)).unwrap();
        let bc = self.entropy_exact(&b.union(c)).unwrap();
        let abc = self.entropy_exact(&a.union(b).union(c)).unwrap();
        let cc = self.entropy_exact(c).unwrap();
        Ok(Some(LogForm::combine([(1, ac.as_ref()), (1, bc.as_ref()), (-1, abc.as_ref()), (-1, cc.as_ref())])))
    }

    /// Total probability mass (should be one).
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().map(|c| c.p).sum()
    }
}

fn disjoint(a: &VarSet, b: &VarSet) -> Result<()> {
    let common = a.intersection(b);
    if common.is_empty() {
        Ok(())
    } else {
        Err(Error::OverlappingSets(common.to_string()))
    }
}
