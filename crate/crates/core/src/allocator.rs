//! Integer allocation of quantization levels and binomial trials.
//!
//! Chooses `(l_i, m_i)` per client minimizing
//! `Σ_i d·G²/(l_i-1)² · (p(1-p)·m_i + 1/4)` subject to
//!
//! 1. `ε_i ≤ Δ_ε` (the per-round accountant bound),
//! 2. the accountant gate `m_i·p(1-p) ≥ max(23·ln(10d/δ), (l_i²-1)/G)`,
//! 3. `Σ_{i∈S} d·log₂(l_i + m_i) ≤ N·C_S` for every nonempty `S`,
//! 4. `l_i ≥ 2`, `m_i ≥ 1` integers.
//!
//! The level term of constraint 2 is `2Δ∞/s = 2(l+1)(l-1)/(2G)`, i.e.
//! `(l²-1)/G`. The objective is non-convex in the integers, so both solvers
//! are exact searches over a finite grid: [`solve_exhaustive`] visits every
//! point, [`solve_pruned`] keeps only the smallest admissible `m` per `l` and
//! runs a branch-and-bound over clients. Ties are broken towards the
//! lexicographically smallest `(l_1, m_1, l_2, m_2, …)`.

use serde::{Deserialize, Serialize};

use crate::channel::{alphabet_rate, capacity, max_alphabet, ChannelConfig, ClientSet, RateVector, SubsetSlack};
use crate::config::Experiment;
use crate::error::{invalid, Error, Result};
use crate::privacy::{Accountant, GateFailure};

/// Default cap on `l` when the rate region alone would allow more.
pub const DEFAULT_LEVEL_CAP: u64 = 4096;

/// Exhaustive search refuses grids with more tuples than this.
pub const EXHAUSTIVE_TUPLE_LIMIT: u128 = 2_000_000_000;

const PRUNE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub d: usize,
    pub channel: ChannelConfig,
    pub accountant: Accountant,
    pub eps_budget: f64,
    pub l_max: u64,
    pub m_max: u64,
}

impl AllocationProblem {
    /// Derives the search grid from the rate region: client `i` can never use
    /// an alphabet `l + m` larger than what fits in `N·C_{i}`. Optional caps
    /// shrink it further; `l` defaults to at most [`DEFAULT_LEVEL_CAP`].
    pub fn new(
        d: usize,
        channel: ChannelConfig,
        accountant: Accountant,
        eps_budget: f64,
        l_cap: Option<u64>,
        m_cap: Option<u64>,
    ) -> Result<Self> {
        if eps_budget.is_nan() || eps_budget <= 0.0 {
            return Err(invalid("eps_budget", format!("must be > 0, got {eps_budget}")));
        }
        let widest = (0..channel.clients())
            .map(|i| {
                capacity(ClientSet::singleton(i), &channel)
                    .map(|c| max_alphabet(c, d, channel.uses()))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        let l_max = widest
            .saturating_sub(1)
            .max(2)
            .min(l_cap.unwrap_or(DEFAULT_LEVEL_CAP));
        let m_max = widest.saturating_sub(2).max(1).min(m_cap.unwrap_or(u64::MAX));
        Self::with_bounds(d, channel, accountant, eps_budget, l_max, m_max)
    }

    /// A problem with explicit grid bounds `{2..=l_max} × {1..=m_max}`.
    pub fn with_bounds(
        d: usize,
        channel: ChannelConfig,
        accountant: Accountant,
        eps_budget: f64,
        l_max: u64,
        m_max: u64,
    ) -> Result<Self> {
        if l_max < 2 {
            return Err(Error::EmptySearchSpace(format!("l_max = {l_max} < 2")));
        }
        if m_max < 1 {
            return Err(Error::EmptySearchSpace("m_max = 0".into()));
        }
        if accountant.d != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: accountant.d,
            });
        }
        Ok(Self {
            d,
            channel,
            accountant,
            eps_budget,
            l_max,
            m_max,
        })
    }

    pub fn from_experiment(e: &Experiment) -> Result<Self> {
        let acc = Accountant::new(e.d, e.delta, e.p, e.bound, e.clip, e.consts)?;
        Self::new(e.d, e.channel.clone(), acc, e.eps_budget, e.l_max, e.m_max)
    }

    pub fn clients(&self) -> usize {
        self.channel.clients()
    }

    /// One client's objective term `d·G²/(l-1)²·(p(1-p)·m + 1/4)`.
    pub fn term(&self, levels: u64, trials: u64) -> f64 {
        let p = self.accountant.p;
        let g = self.accountant.bound;
        let lm1 = (levels - 1) as f64;
        self.d as f64 * g * g / (lm1 * lm1) * (p * (1.0 - p) * trials as f64 + 0.25)
    }

    fn rate(&self, levels: u64, trials: u64) -> f64 {
        alphabet_rate(levels + trials, self.d, self.channel.uses())
    }

    /// Gate and privacy budget for one client.
    fn admissible(&self, levels: u64, trials: u64) -> bool {
        match self.accountant.gate(levels, trials) {
            Ok(g) if g.ok => {}
            _ => return false,
        }
        if self.eps_budget.is_infinite() {
            return true;
        }
        self.accountant
            .epsilon(levels, trials)
            .is_ok_and(|e| e <= self.eps_budget)
    }

    fn capacities(&self) -> Vec<f64> {
        let n = self.clients();
        let mut caps = vec![f64::NAN; 1 << n];
        for s in self.channel.subsets() {
            caps[s.0 as usize] = capacity(s, &self.channel).expect("valid subset");
        }
        caps
    }

    /// Client `i` may be treated as interchangeable with client `i - 1`.
    fn same_as_previous(&self, i: usize) -> bool {
        i > 0 && self.channel.powers()[i] == self.channel.powers()[i - 1]
    }

    fn infeasible_family(&self) -> ConstraintFamily {
        let gate_reachable = (2..=self.l_max)
            .any(|l| self.accountant.gate(l, self.m_max).is_ok_and(|g| g.ok));
        if !gate_reachable {
            return ConstraintFamily::Gate;
        }
        if !(2..=self.l_max).any(|l| self.admissible(l, self.m_max)) {
            return ConstraintFamily::Privacy;
        }
        ConstraintFamily::Rate
    }
}

/// Sum of client terms. Terms are added in ascending order so that the value
/// does not depend on client order.
pub fn objective(levels: &[u64], trials: &[u64], problem: &AllocationProblem) -> Result<f64> {
    check_shape(levels, trials, problem)?;
    if let Some(i) = levels.iter().position(|&l| l < 2) {
        return Err(invalid("l", format!("client {} has l = {} < 2", i + 1, levels[i])));
    }
    let mut terms: Vec<f64> = levels
        .iter()
        .zip(trials)
        .map(|(&l, &m)| problem.term(l, m))
        .collect();
    Ok(ordered_sum(&mut terms))
}

fn ordered_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn check_shape(levels: &[u64], trials: &[u64], problem: &AllocationProblem) -> Result<()> {
    let n = problem.clients();
    for len in [levels.len(), trials.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintFamily {
    Privacy,
    Gate,
    Rate,
    Integrality,
}

impl std::fmt::Display for ConstraintFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Privacy => "privacy budget",
            Self::Gate => "accountant gate",
            Self::Rate => "MAC rate region",
            Self::Integrality => "integrality",
        })
    }
}

/// Client indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Integrality { client: usize, levels: u64, trials: u64 },
    Gate { client: usize, failure: GateFailure },
    Privacy { client: usize, epsilon: f64, budget: f64 },
    Rate { subset: ClientSet, load: f64, capacity: f64 },
}

impl Violation {
    pub fn family(&self) -> ConstraintFamily {
        match self {
            Self::Integrality { .. } => ConstraintFamily::Integrality,
            Self::Gate { .. } => ConstraintFamily::Gate,
            Self::Privacy { .. } => ConstraintFamily::Privacy,
            Self::Rate { .. } => ConstraintFamily::Rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every constraint family and lists every violation. A client below
/// the gate has no ε guarantee, so its privacy check is skipped.
pub fn is_feasible(
    levels: &[u64],
    trials: &[u64],
    problem: &AllocationProblem,
) -> Result<FeasibilityReport> {
    check_shape(levels, trials, problem)?;
    let mut violations = Vec::new();
    for (client, (&l, &m)) in levels.iter().zip(trials).enumerate() {
        if l < 2 || m < 1 {
            violations.push(Violation::Integrality {
                client,
                levels: l,
                trials: m,
            });
            continue;
        }
        let gate = problem.accountant.gate(l, m)?;
        if let Some(failure) = gate.failure() {
            violations.push(Violation::Gate { client, failure });
            continue;
        }
        let epsilon = problem.accountant.epsilon(l, m)?;
        if epsilon > problem.eps_budget {
            violations.push(Violation::Privacy {
                client,
                epsilon,
                budget: problem.eps_budget,
            });
        }
    }
    if violations
        .iter()
        .all(|v| v.family() != ConstraintFamily::Integrality)
    {
        let rates: Vec<f64> = levels
            .iter()
            .zip(trials)
            .map(|(&l, &m)| problem.rate(l, m))
            .collect();
        let f = crate::channel::feasible(&RateVector::new(rates)?, &problem.channel)?;
        violations.extend(f.violated().map(|s| Violation::Rate {
            subset: s.subset,
            load: s.load,
            capacity: s.capacity,
        }));
    }
    Ok(FeasibilityReport { violations })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub levels: Vec<u64>,
    pub trials: Vec<u64>,
    pub objective: f64,
    /// Worst client ε; infinite if any client is below the gate.
    pub epsilon: f64,
    pub per_client_epsilon: Vec<Option<f64>>,
    pub rates: RateVector,
    pub slack: Vec<SubsetSlack>,
    pub feasible: bool,
}

impl Allocation {
    pub fn evaluate(levels: &[u64], trials: &[u64], problem: &AllocationProblem) -> Result<Self> {
        let objective = objective(levels, trials, problem)?;
        let report = is_feasible(levels, trials, problem)?;
        let privacy = problem.accountant.report(levels, trials)?;
        let rates: Vec<f64> = levels
            .iter()
            .zip(trials)
            .map(|(&l, &m)| problem.rate(l, m))
            .collect();
        let rates = RateVector::new(rates)?;
        let slack = crate::channel::feasible(&rates, &problem.channel)?.subsets;
        Ok(Self {
            levels: levels.to_vec(),
            trials: trials.to_vec(),
            objective,
            epsilon: privacy.epsilon,
            per_client_epsilon: privacy.per_client,
            rates,
            slack,
            feasible: report.ok(),
        })
    }

    fn key(&self) -> Vec<u64> {
        lex_key(&self.levels, &self.trials)
    }
}

fn lex_key(levels: &[u64], trials: &[u64]) -> Vec<u64> {
    levels.iter().zip(trials).flat_map(|(&l, &m)| [l, m]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Optimal(Allocation),
    /// No grid point satisfies all constraints; `binding` names the family
    /// that rules out every candidate first.
    Infeasible { binding: ConstraintFamily },
}

impl Verdict {
    pub fn allocation(&self) -> Option<&Allocation> {
        match self {
            Self::Optimal(a) => Some(a),
            Self::Infeasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub verdict: Verdict,
    /// Complete allocations whose objective and constraints were examined.
    pub evaluations: u64,
}

struct Incumbent {
    objective: f64,
    key: Vec<u64>,
}

impl Incumbent {
    fn offer(&mut self, objective: f64, key: &[u64]) {
        if objective < self.objective
            || (objective == self.objective && key < self.key.as_slice())
        {
            self.objective = objective;
            self.key = key.to_vec();
        }
    }
}

fn finish(problem: &AllocationProblem, best: Incumbent, evaluations: u64) -> Result<SolveReport> {
    let verdict = if best.key.is_empty() {
        Verdict::Infeasible {
            binding: problem.infeasible_family(),
        }
    } else {
        let levels: Vec<u64> = best.key.iter().step_by(2).copied().collect();
        let trials: Vec<u64> = best.key.iter().skip(1).step_by(2).copied().collect();
        Verdict::Optimal(Allocation::evaluate(&levels, &trials, problem)?)
    };
    Ok(SolveReport {
        verdict,
        evaluations,
    })
}

/// Visits every grid point, restricted to non-decreasing `(l, m)` across
/// adjacent clients with equal power.
pub fn solve_exhaustive(problem: &AllocationProblem) -> Result<SolveReport> {
    let n = problem.clients();
    let ls = problem.l_max - 1;
    let points = u128::from(ls) * u128::from(problem.m_max);
    let tuples = points.checked_pow(n as u32).unwrap_or(u128::MAX);
    if tuples > EXHAUSTIVE_TUPLE_LIMIT {
        return Err(Error::SearchSpaceTooLarge(points.min(u128::from(u64::MAX)) as u64));
    }
    let points = points as usize;
    let m_max = problem.m_max as usize;
    let grid = |k: usize| -> (u64, u64) { ((k / m_max) as u64 + 2, (k % m_max) as u64 + 1) };

    // per-point data, shared by all clients since only power differs
    let mut term = Vec::with_capacity(points);
    let mut admissible = Vec::with_capacity(points);
    let mut rate = Vec::with_capacity(points);
    for k in 0..points {
        let (l, m) = grid(k);
        term.push(problem.term(l, m));
        admissible.push(problem.admissible(l, m));
        rate.push(problem.rate(l, m));
    }
    let caps = problem.capacities();

    let mut best = Incumbent {
        objective: f64::INFINITY,
        key: Vec::new(),
    };
    let mut evaluations = 0u64;
    let mut idx = vec![0usize; n];
    let mut terms = vec![0.0; n];
    let mut key = vec![0u64; 2 * n];

    // odometer over idx in lexicographic order
    'outer: loop {
        evaluations += 1;
        let ok = idx.iter().all(|&k| admissible[k])
            && (1usize..1 << n).all(|s| {
                let load: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| rate[idx[i]]).sum();
                load <= caps[s]
            });
        if ok {
            for (t, &k) in terms.iter_mut().zip(&idx) {
                *t = term[k];
            }
            let obj = ordered_sum(&mut terms);
            for (i, &k) in idx.iter().enumerate() {
                let (l, m) = grid(k);
                key[2 * i] = l;
                key[2 * i + 1] = m;
            }
            best.offer(obj, &key);
        }

        let mut i = n;
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if idx[i] + 1 < points {
                idx[i] += 1;
                for j in i + 1..n {
                    idx[j] = if problem.same_as_previous(j) { idx[j - 1] } else { 0 };
                }
                break;
            }
        }
    }
    finish(problem, best, evaluations)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    levels: u64,
    trials: u64,
    term: f64,
    rate: f64,
}

/// Smallest admissible `m` for each `l`, or `None` when even `m_max` fails.
fn minimal_trials(problem: &AllocationProblem, levels: u64) -> Option<u64> {
    if !problem.admissible(levels, problem.m_max) {
        return None;
    }
    let (mut lo, mut hi) = (1u64, problem.m_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if problem.admissible(levels, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    // guard against a non-monotone step right at the budget
    while lo > 1 && problem.admissible(levels, lo - 1) {
        lo -= 1;
    }
    Some(lo)
}

/// Exact search over the reduced grid. For fixed `l` the objective and the
/// rate both increase with `m` while admissibility only improves, so only the
/// smallest admissible `m` can be optimal. The remaining per-client lists are
/// combined by depth-first branch-and-bound, bounding each partial allocation
/// by the best possible term of every unassigned client.
pub fn solve_pruned(problem: &AllocationProblem) -> Result<SolveReport> {
    let n = problem.clients();
    let caps = problem.capacities();
    let base: Vec<Candidate> = (2..=problem.l_max)
        .filter_map(|l| {
            minimal_trials(problem, l).map(|m| Candidate {
                levels: l,
                trials: m,
                term: problem.term(l, m),
                rate: problem.rate(l, m),
            })
        })
        .collect();

    let lists: Vec<Vec<Candidate>> = (0..n)
        .map(|i| {
            let single = caps[1 << i];
            let mut list: Vec<Candidate> =
                base.iter().filter(|c| c.rate <= single).copied().collect();
            list.sort_by(|a, b| a.term.total_cmp(&b.term).then(a.levels.cmp(&b.levels)));
            list
        })
        .collect();

    let mut best = Incumbent {
        objective: f64::INFINITY,
        key: Vec::new(),
    };
    let mut evaluations = 0u64;
    if lists.iter().all(|l| !l.is_empty()) {
        let mut rest = vec![0.0; n + 1];
        for i in (0..n).rev() {
            rest[i] = rest[i + 1] + lists[i][0].term;
        }
        let mut search = Search {
            problem,
            lists: &lists,
            caps: &caps,
            rest: &rest,
            chosen: Vec::with_capacity(n),
            best: &mut best,
            evaluations: &mut evaluations,
        };
        search.descend(0.0);
    }
    finish(problem, best, evaluations)
}

struct Search<'a> {
    problem: &'a AllocationProblem,
    lists: &'a [Vec<Candidate>],
    caps: &'a [f64],
    rest: &'a [f64],
    chosen: Vec<Candidate>,
    best: &'a mut Incumbent,
    evaluations: &'a mut u64,
}

impl Search<'_> {
    fn descend(&mut self, partial: f64) {
        let k = self.chosen.len();
        let n = self.lists.len();
        if k == n {
            *self.evaluations += 1;
            let mut terms: Vec<f64> = self.chosen.iter().map(|c| c.term).collect();
            let obj = ordered_sum(&mut terms);
            let key: Vec<u64> = self.chosen.iter().flat_map(|c| [c.levels, c.trials]).collect();
            self.best.offer(obj, &key);
            return;
        }
        for cand in &self.lists[k] {
            let bound = partial + cand.term + self.rest[k + 1];
            if bound > self.best.objective * (1.0 + PRUNE_SLACK) {
                break;
            }
            if self.problem.same_as_previous(k) && cand.levels < self.chosen[k - 1].levels {
                continue;
            }
            if !self.rates_fit(k, cand.rate) {
                continue;
            }
            self.chosen.push(*cand);
            self.descend(partial + cand.term);
            self.chosen.pop();
        }
    }

    /// Every subset whose highest member is `k` stays within capacity.
    fn rates_fit(&self, k: usize, rate: f64) -> bool {
        let top = 1usize << k;
        (0..top).all(|lower| {
            let load = rate
                + (0..k)
                    .filter(|i| lower >> i & 1 == 1)
                    .map(|i| self.chosen[i].rate)
                    .sum::<f64>();
            load <= self.caps[top | lower]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    RaiseLevels,
    LowerTrials,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMove {
    pub client: usize,
    pub kind: MoveKind,
    pub objective: f64,
    /// The moved point lies outside the solver's search grid.
    pub outside_grid: bool,
}

/// Single-coordinate moves (`l_i + 1` or `m_i - 1`) that stay feasible and
/// lower the objective. Empty for a locally optimal allocation.
pub fn improving_moves(alloc: &Allocation, problem: &AllocationProblem) -> Result<Vec<LocalMove>> {
    let mut moves = Vec::new();
    for client in 0..alloc.levels.len() {
        for kind in [MoveKind::RaiseLevels, MoveKind::LowerTrials] {
            let mut levels = alloc.levels.clone();
            let mut trials = alloc.trials.clone();
            match kind {
                MoveKind::RaiseLevels => levels[client] += 1,
                MoveKind::LowerTrials if trials[client] > 1 => trials[client] -= 1,
                MoveKind::LowerTrials => continue,
            }
            if !is_feasible(&levels, &trials, problem)?.ok() {
                continue;
            }
            let obj = objective(&levels, &trials, problem)?;
            if obj < alloc.objective {
                moves.push(LocalMove {
                    client,
                    kind,
                    objective: obj,
                    outside_grid: levels[client] > problem.l_max,
                });
            }
        }
    }
    Ok(moves)
}

/// Lexicographic order on `(l_1, m_1, …)`, used by the tie-break.
pub fn lexicographic_key(alloc: &Allocation) -> Vec<u64> {
    alloc.key()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::privacy::MechanismConstants;

    fn accountant(d: usize, g: f64) -> Accountant {
        Accountant::new(d, 0.01, 0.5, g, g, MechanismConstants::for_p(0.5)).unwrap()
    }

    fn section4(eps: f64) -> AllocationProblem {
        let ch = ChannelConfig::new(40, vec![10.0, 10.0]).unwrap();
        AllocationProblem::new(10, ch, accountant(10, 4.0), eps, None, None).unwrap()
    }

    #[test]
    fn objective_examples() {
        let ch = ChannelConfig::new(1, vec![1.0]).unwrap();
        let acc = Accountant::new(1, 0.01, 0.5, 1.0, 1.0, MechanismConstants::for_p(0.5)).unwrap();
        let prob = AllocationProblem::with_bounds(1, ch, acc, 1.0, 8, 8).unwrap();
        assert_eq!(objective(&[2], &[1], &prob).unwrap(), 0.5);
        assert!(objective(&[3], &[1], &prob).unwrap() < 0.5);
        assert!(objective(&[2], &[2], &prob).unwrap() > 0.5);
        assert!(objective(&[1], &[1], &prob).is_err());
        assert!(objective(&[2, 2], &[1, 1], &prob).is_err());
    }

    #[test]
    fn section4_bounds_come_from_rate() {
        let p = section4(4.0);
        // N·C_{i}/d = 2·log2(11) bits per symbol → alphabet ≤ 121
        let a = max_alphabet(capacity(ClientSet::singleton(0), &p.channel).unwrap(), 10, 40);
        assert_eq!(p.l_max, a - 1);
        assert_eq!(p.m_max, a - 2);
    }

    #[test]
    fn gate_violation_skips_privacy_check() {
        let p = section4(4.0);
        let r = is_feasible(&[2, 2], &[10, 848], &p).unwrap();
        assert!(matches!(r.violations[0], Violation::Gate { client: 0, .. }));
        assert!(r
            .violations
            .iter()
            .all(|v| !matches!(v, Violation::Privacy { client: 0, .. })));
    }

    #[test]
    fn single_sum_rate_violation() {
        // gate and privacy satisfied, only the joint constraint broken
        let ch = ChannelConfig::new(400, vec![10.0, 10.0]).unwrap();
        let p = AllocationProblem::with_bounds(10, ch, accountant(10, 4.0), 4.0, 64, 1 << 20).unwrap();
        // N·C_12/d ≈ 87.8 bits total, N·C_1/d ≈ 69.2 bits per client
        let m = (1u64 << 44) - 2;
        let r = is_feasible(&[2, 2], &[m, m], &p).unwrap();
        assert_eq!(r.violations.len(), 1, "{:?}", r.violations);
        match r.violations[0] {
            Violation::Rate { subset, .. } => assert_eq!(subset, ClientSet::from_ids(&[0, 1])),
            ref v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn per_user_rate_violation_at_section4() {
        let p = section4(4.0);
        let r = is_feasible(&[2, 2], &[200, 1], &p).unwrap();
        assert!(r.violations.iter().any(
            |v| matches!(v, Violation::Rate { subset, .. } if *subset == ClientSet::singleton(0))
        ));
    }

    #[test]
    fn section4_instance_is_infeasible() {
        // the gate alone needs m ≥ 848 while the sum-rate constraint allows
        // l + m ≤ 21 per client
        let p = section4(4.0);
        let pruned = solve_pruned(&p).unwrap();
        assert_eq!(pruned.verdict, Verdict::Infeasible { binding: ConstraintFamily::Gate });
        assert_eq!(pruned.evaluations, 0);
    }

    #[test]
    fn tiny_budget_is_privacy_bound() {
        let ch = ChannelConfig::new(1000, vec![10.0]).unwrap();
        let p = AllocationProblem::new(10, ch, accountant(10, 4.0), 1e-6, Some(16), Some(1 << 16)).unwrap();
        let r = solve_pruned(&p).unwrap();
        assert_eq!(r.verdict, Verdict::Infeasible { binding: ConstraintFamily::Privacy });
    }

    #[test]
    fn unlimited_budget_takes_max_levels_min_gate_trials() {
        let ch = ChannelConfig::new(10_000, vec![10.0]).unwrap();
        let p = AllocationProblem::new(10, ch, accountant(10, 4.0), f64::INFINITY, Some(12), Some(1 << 20)).unwrap();
        let r = solve_pruned(&p).unwrap();
        let a = r.verdict.allocation().unwrap();
        assert_eq!(a.levels, vec![12]);
        let gate = p.accountant.gate(12, 1).unwrap().required();
        let m_gate = (gate / 0.25).ceil() as u64;
        assert_eq!(a.trials, vec![m_gate]);
    }

    #[test]
    fn explicit_empty_grid_rejected() {
        let ch = ChannelConfig::new(40, vec![10.0]).unwrap();
        assert!(matches!(
            AllocationProblem::with_bounds(10, ch.clone(), accountant(10, 4.0), 4.0, 1, 10),
            Err(Error::EmptySearchSpace(_))
        ));
        assert!(matches!(
            AllocationProblem::with_bounds(10, ch, accountant(10, 4.0), 4.0, 4, 0),
            Err(Error::EmptySearchSpace(_))
        ));
    }
}
