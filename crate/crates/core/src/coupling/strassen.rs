//! Optimal couplings with deficiency on finite spaces, via max-flow.

use std::collections::VecDeque;
use std::fmt::Display;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::enumeration::{FiniteDistribution, Weight};
use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Largest product space accepted.
pub const PRODUCT_CAP: usize = 10_000_000;

/// Materialised relation on `Ω_X × Ω_Y`, stored as a row-major `bad` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    nx: usize,
    ny: usize,
    bad: Vec<bool>,
}

impl Relation {
    pub fn from_fn<F: FnMut(usize, usize) -> bool>(nx: usize, ny: usize, mut bad: F) -> Result<Self> {
        if nx.saturating_mul(ny) > PRODUCT_CAP {
            return Err(crate::Error::TooLarge {
                what: "product space".into(),
                size: format!("{nx}x{ny}"),
                cap: PRODUCT_CAP.to_string(),
            });
        }
        let mut m = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                m.push(bad(x, y));
            }
        }
        Ok(Relation { nx, ny, bad: m })
    }

    /// Relation over two distributions' keys.
    pub fn from_keys<W: Weight, F: FnMut(&str, &str) -> bool>(
        mu_x: &FiniteDistribution<W>,
        mu_y: &FiniteDistribution<W>,
        mut bad: F,
    ) -> Result<Self> {
        let (xs, ys) = (mu_x.outcomes(), mu_y.outcomes());
        Self::from_fn(xs.len(), ys.len(), |i, j| bad(&xs[i], &ys[j]))
    }

    /// `bad = inequality of keys`.
    pub fn inequality<W: Weight>(mu_x: &FiniteDistribution<W>, mu_y: &FiniteDistribution<W>) -> Result<Self> {
        Self::from_keys(mu_x, mu_y, |a, b| a != b)
    }

    pub fn is_bad(&self, x: usize, y: usize) -> bool {
        self.bad[x * self.ny + y]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// `N(A)`: the `y` with some `x ∈ A` such that `(x, y)` is not bad.
    pub fn neighbourhood(&self, a: &[usize]) -> Vec<usize> {
        (0..self.ny).filter(|&y| a.iter().any(|&x| !self.is_bad(x, y))).collect()
    }
}

#[derive(Clone, Debug)]
struct Arc<W> {
    to: usize,
    cap: W,
    rev: usize,
}

/// Dinic max-flow over any weight type.
struct FlowNet<W> {
    g: Vec<Vec<Arc<W>>>,
}

impl<W: Weight> FlowNet<W> {
    fn new(nodes: usize) -> Self {
        FlowNet { g: (0..nodes).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, a: usize, b: usize, cap: W) -> (usize, usize) {
        let ia = self.g[a].len();
        let ib = self.g[b].len();
        self.g[a].push(Arc { to: b, cap, rev: ib });
        self.g[b].push(Arc { to: a, cap: W::zero(), rev: ia });
        (a, ia)
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.g.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for e in &self.g[v] {
                if e.cap > W::zero() && level[e.to] == usize::MAX {
                    level[e.to] = level[v] + 1;
                    q.push_back(e.to);
                }
            }
        }
        level
    }

    fn push(&mut self, v: usize, t: usize, f: W, level: &[usize], it: &mut [usize]) -> W {
        if v == t {
            return f;
        }
        while it[v] < self.g[v].len() {
            let i = it[v];
            let (to, cap) = (self.g[v][i].to, self.g[v][i].cap.clone());
            if cap > W::zero() && level[to] == level[v] + 1 {
                let want = if cap < f { cap } else { f.clone() };
                let got = self.push(to, t, want, level, it);
                if got > W::zero() {
                    self.g[v][i].cap = self.g[v][i].cap.clone() - got.clone();
                    let r = self.g[v][i].rev;
                    self.g[to][r].cap = self.g[to][r].cap.clone() + got.clone();
                    return got;
                }
            }
            it[v] += 1;
        }
        W::zero()
    }

    fn max_flow(&mut self, s: usize, t: usize, bound: W) -> W {
        let mut total = W::zero();
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0; self.g.len()];
            loop {
                let f = self.push(s, t, bound.clone(), &level, &mut it);
                if f.is_zero() {
                    break;
                }
                total = total + f;
            }
        }
    }
}

/// Result of the deficiency computation.
#[derive(Clone, Debug)]
pub struct Deficiency<W> {
    /// Minimal achievable `P((X,Y) ∈ bad)`.
    pub value: W,
    /// Indices of a set `A ⊆ Ω_X` with `μ_X(A) − μ_Y(N(A)) = value`.
    pub witness: Vec<usize>,
}

struct Solved<W> {
    net: FlowNet<W>,
    arcs: Vec<(usize, usize, (usize, usize))>,
    flow: W,
    nx: usize,
}

fn solve<W: Weight>(mu_x: &[W], mu_y: &[W], bad: &Relation) -> Result<Solved<W>> {
    let (nx, ny) = bad.dims();
    if nx != mu_x.len() || ny != mu_y.len() {
        return Err(invalid(format!("relation is {nx}x{ny}, distributions are {}x{}", mu_x.len(), mu_y.len())));
    }
    let (s, t) = (nx + ny, nx + ny + 1);
    let mut net = FlowNet::new(nx + ny + 2);
    let inf = W::one() + W::one();
    for (x, w) in mu_x.iter().enumerate() {
        net.add(s, x, w.clone());
    }
    for (y, w) in mu_y.iter().enumerate() {
        net.add(nx + y, t, w.clone());
    }
    let mut arcs = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            if !bad.is_bad(x, y) {
                let h = net.add(x, nx + y, inf.clone());
                arcs.push((x, y, h));
            }
        }
    }
    let flow = net.max_flow(s, t, inf);
    Ok(Solved { net, arcs, flow, nx })
}

/// Deficiency on raw weight vectors.
pub fn strassen_deficiency_weights<W: Weight>(mu_x: &[W], mu_y: &[W], bad: &Relation) -> Result<Deficiency<W>> {
    let sol = solve(mu_x, mu_y, bad)?;
    let one = W::one();
    let mut value = one - sol.flow.clone();
    if value < W::zero() {
        value = W::zero();
    }
    // source side of the minimum cut
    let s = sol.net.g.len() - 2;
    let level = sol.net.levels(s);
    let witness = (0..sol.nx).filter(|&x| level[x] != usize::MAX).collect();
    Ok(Deficiency { value, witness })
}

pub fn strassen_deficiency<W: Weight>(
    mu_x: &FiniteDistribution<W>,
    mu_y: &FiniteDistribution<W>,
    bad: &Relation,
) -> Result<Deficiency<W>> {
    strassen_deficiency_weights(mu_x.probs(), mu_y.probs(), bad)
}

/// Joint law on `Ω_X × Ω_Y`, stored sparsely by `(x, y)` index.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCoupling<W = BigRational> {
    pub x_keys: Vec<String>,
    pub y_keys: Vec<String>,
    /// Sorted `(x, y, weight)` entries with positive weight.
    pub entries: Vec<(usize, usize, W)>,
    pub failure_mass: W,
}

impl<W: Weight + Display> JointCoupling<W> {
    pub fn x_marginal(&self) -> Vec<W> {
        let mut m = vec![W::zero(); self.x_keys.len()];
        for (x, _, w) in &self.entries {
            m[*x] = m[*x].clone() + w.clone();
        }
        m
    }

    pub fn y_marginal(&self) -> Vec<W> {
        let mut m = vec![W::zero(); self.y_keys.len()];
        for (_, y, w) in &self.entries {
            m[*y] = m[*y].clone() + w.clone();
        }
        m
    }

    /// Mass on pairs marked bad by `rel`.
    pub fn mass_on(&self, rel: &Relation) -> W {
        self.entries.iter().filter(|(x, y, _)| rel.is_bad(*x, *y)).fold(W::zero(), |a, (_, _, w)| a + w.clone())
    }

    pub fn sample(&self, rng: &mut RngStream) -> (usize, usize) {
        let u = rng.uniform();
        let mut acc = 0.0;
        for (x, y, w) in &self.entries {
            acc += w.to_f64().unwrap_or(0.0);
            if u < acc {
                return (*x, *y);
            }
        }
        let last = self.entries.last().expect("coupling has mass");
        (last.0, last.1)
    }

    /// Draws `y` from the conditional law given `x`.
    pub fn sample_y_given_x(&self, x: usize, rng: &mut RngStream) -> Option<usize> {
        let row: Vec<(usize, f64)> =
            self.entries.iter().filter(|e| e.0 == x).map(|e| (e.1, e.2.to_f64().unwrap_or(0.0))).collect();
        let total: f64 = row.iter().map(|r| r.1).sum();
        if row.is_empty() || total <= 0.0 {
            return None;
        }
        let u = rng.uniform() * total;
        let mut acc = 0.0;
        for &(y, w) in &row {
            acc += w;
            if u < acc {
                return Some(y);
            }
        }
        row.last().map(|r| r.0)
    }

    /// A line `failure <mass>`, then lines `x-key y-key weight`.
    pub fn write<Wr: Write>(&self, mut w: Wr) -> Result<()> {
        writeln!(w, "failure {}", self.failure_mass)?;
        for (x, y, p) in &self.entries {
            writeln!(w, "{} {} {}", self.x_keys[*x], self.y_keys[*y], p)?;
        }
        Ok(())
    }
}

impl JointCoupling<BigRational> {
    pub fn read<R: std::io::BufRead>(r: R) -> Result<Self> {
        use std::collections::BTreeMap;
        let mut raw = Vec::new();
        let mut failure_mass = BigRational::zero();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let err = |m: &str| crate::Error::Parse { line: i + 1, msg: m.to_string() };
            if f.len() == 2 && f[0] == "failure" {
                if !raw.is_empty() {
                    return Err(err("failure line must come first"));
                }
                failure_mass = f[1].parse().map_err(|_| err("bad rational failure mass"))?;
                continue;
            }
            if f.len() != 3 {
                return Err(err("expected 'x-key y-key weight'"));
            }
            let w: BigRational = f[2].parse().map_err(|_| err("bad rational weight"))?;
            raw.push((f[0].to_string(), f[1].to_string(), w));
        }
        let mut xs: BTreeMap<String, usize> = raw.iter().map(|r| (r.0.clone(), 0)).collect();
        let mut ys: BTreeMap<String, usize> = raw.iter().map(|r| (r.1.clone(), 0)).collect();
        for (i, v) in xs.values_mut().enumerate() {
            *v = i;
        }
        for (i, v) in ys.values_mut().enumerate() {
            *v = i;
        }
        let mut entries: Vec<(usize, usize, BigRational)> =
            raw.into_iter().map(|(x, y, w)| (xs[&x], ys[&y], w)).collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(JointCoupling {
            x_keys: xs.into_keys().collect(),
            y_keys: ys.into_keys().collect(),
            entries,
            failure_mass,
        })
    }
}

/// Optimal coupling on raw weights: the max-flow plan plus a northwest-corner
/// completion of the leftover row and column masses.
pub fn build_optimal_coupling_weights<W: Weight + Display>(
    mu_x: &[W],
    mu_y: &[W],
    bad: &Relation,
    x_keys: Vec<String>,
    y_keys: Vec<String>,
) -> Result<JointCoupling<W>> {
    let sol = solve(mu_x, mu_y, bad)?;
    let (nx, ny) = bad.dims();
    let inf = W::one() + W::one();
    let mut cell: std::collections::BTreeMap<(usize, usize), W> = std::collections::BTreeMap::new();
    let mut row_left: Vec<W> = mu_x.to_vec();
    let mut col_left: Vec<W> = mu_y.to_vec();
    for &(x, y, (a, i)) in &sol.arcs {
        let used = inf.clone() - sol.net.g[a][i].cap.clone();
        if used > W::zero() {
            row_left[x] = row_left[x].clone() - used.clone();
            col_left[y] = col_left[y].clone() - used.clone();
            cell.insert((x, y), used);
        }
    }
    let mut failure = W::zero();
    let (mut x, mut y) = (0, 0);
    while x < nx && y < ny {
        if !(row_left[x] > W::zero()) {
            x += 1;
            continue;
        }
        if !(col_left[y] > W::zero()) {
            y += 1;
            continue;
        }
        let m = if row_left[x] < col_left[y] { row_left[x].clone() } else { col_left[y].clone() };
        row_left[x] = row_left[x].clone() - m.clone();
        col_left[y] = col_left[y].clone() - m.clone();
        if bad.is_bad(x, y) {
            failure = failure + m.clone();
        }
        let e = cell.entry((x, y)).or_insert_with(W::zero);
        *e = e.clone() + m;
    }
    let entries = cell.into_iter().filter(|(_, w)| *w > W::zero()).map(|((x, y), w)| (x, y, w)).collect();
    let jc = JointCoupling { x_keys, y_keys, entries, failure_mass: failure };
    check_marginals(&jc, mu_x, mu_y)?;
    Ok(jc)
}

fn check_marginals<W: Weight + Display>(jc: &JointCoupling<W>, mu_x: &[W], mu_y: &[W]) -> Result<()> {
    let close = |a: &W, b: &W| {
        let (fa, fb) = (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN));
        (fa - fb).abs() <= 1e-9
    };
    let ok = jc.x_marginal().iter().zip(mu_x).all(|(a, b)| close(a, b))
        && jc.y_marginal().iter().zip(mu_y).all(|(a, b)| close(a, b));
    if !ok {
        return Err(crate::Error::Unknown("coupling marginals drifted beyond tolerance".into()));
    }
    Ok(())
}

pub fn build_optimal_coupling<W: Weight + Display>(
    mu_x: &FiniteDistribution<W>,
    mu_y: &FiniteDistribution<W>,
    bad: &Relation,
) -> Result<JointCoupling<W>> {
    build_optimal_coupling_weights(mu_x.probs(), mu_y.probs(), bad, mu_x.outcomes().to_vec(), mu_y.outcomes().to_vec())
}

/// Output of [`degree_coupling`].
#[derive(Clone, Debug)]
pub struct DegreeCoupling {
    pub delta: f64,
    pub eps: f64,
    /// `2δ + ε/(1−ε)`.
    pub bound: f64,
    pub coupling: JointCoupling<BigRational>,
}

/// Uniform-marginal coupling landing in `D` (a bipartite graph on `S × T`
/// given as index pairs), together with the degree-regularity bound. Among
/// the admissible `(δ, ε)` the pair with the smallest bound is reported.
pub fn degree_coupling(s: usize, t: usize, d: &[(usize, usize)]) -> Result<DegreeCoupling> {
    if d.is_empty() || s == 0 || t == 0 {
        return Err(invalid("degree coupling needs a nonempty relation"));
    }
    let mut in_d = vec![false; s * t];
    for &(a, b) in d {
        if a >= s || b >= t {
            return Err(invalid(format!("pair ({a},{b}) outside {s}x{t}")));
        }
        in_d[a * t + b] = true;
    }
    let edges = in_d.iter().filter(|&&x| x).count() as f64;
    let mut deg_s = vec![0usize; s];
    let mut deg_t = vec![0usize; t];
    for a in 0..s {
        for b in 0..t {
            if in_d[a * t + b] {
                deg_s[a] += 1;
                deg_t[b] += 1;
            }
        }
    }
    let need = |deg: usize, side: usize| (1.0 - deg as f64 * side as f64 / edges).max(0.0);
    let mut candidates: Vec<f64> = deg_s.iter().map(|&g| need(g, s)).chain(deg_t.iter().map(|&g| need(g, t))).collect();
    candidates.push(0.0);
    candidates.retain(|&e| e < 1.0);
    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup();
    let mut best = (f64::INFINITY, 1.0, 1.0);
    for &eps in &candidates {
        let bad_s = deg_s.iter().filter(|&&g| (g as f64) < (1.0 - eps) * edges / s as f64 - 1e-12).count();
        let bad_t = deg_t.iter().filter(|&&g| (g as f64) < (1.0 - eps) * edges / t as f64 - 1e-12).count();
        let delta = (bad_s as f64 / s as f64).max(bad_t as f64 / t as f64);
        let bound = 2.0 * delta + eps / (1.0 - eps);
        if bound < best.0 {
            best = (bound, delta, eps);
        }
    }
    let ux = vec![BigRational::new(BigInt::one(), BigInt::from(s)); s];
    let uy = vec![BigRational::new(BigInt::one(), BigInt::from(t)); t];
    let rel = Relation::from_fn(s, t, |a, b| !in_d[a * t + b])?;
    let width = s.max(t).to_string().len();
    let coupling = build_optimal_coupling_weights(
        &ux,
        &uy,
        &rel,
        (0..s).map(|i| format!("s{i:0width$}")).collect(),
        (0..t).map(|i| format!("t{i:0width$}")).collect(),
    )?;
    Ok(DegreeCoupling { delta: best.1, eps: best.2, bound: best.0, coupling })
}
