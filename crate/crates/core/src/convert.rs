//! Reductions from other game classes into bilinear form.
//!
//! Five sources are supported: bimatrix games, two-player Bayesian games,
//! polymatrix games (through the induced symmetric game), ranking duels
//! over the Birkhoff polytope, and two-player perfect-recall extensive-form
//! games via the sequence form. Where a reduction reshapes strategies, the
//! inverse extraction lives next to it.

use crate::game::{simplex_constraints, uniform, BilinearGame, GameError, Player, StrategyProfile};
use crate::linalg::{dot, RatMatrix, RatVector};
use crate::lp::{solve_lp, LinearProgram, LpOutcome, Sense};
use crate::rational::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConvertError {
    #[error("payoff matrices have different dimensions")]
    DimensionMismatch,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("profile is not symmetric; it does not correspond to a polymatrix equilibrium")]
    NotSymmetric,
    #[error("tree violates perfect recall at information set {0}")]
    NotPerfectRecall(usize),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Bimatrix game: both strategy sets become probability simplices.
pub fn from_bimatrix(a: RatMatrix, b: RatMatrix) -> Result<BilinearGame, ConvertError> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(ConvertError::DimensionMismatch);
    }
    let (e_mat, e_rhs) = simplex_constraints(a.rows());
    let (f_mat, f_rhs) = simplex_constraints(a.cols());
    Ok(BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)?)
}

/// Two-player Bayesian game with finitely many types per player and a
/// joint prior over type pairs. Every type of a player has the same
/// action count.
#[derive(Debug, Clone)]
pub struct BayesianSpec {
    /// Joint type distribution, `t1 x t2`.
    pub prior: RatMatrix,
    /// Row-player payoffs per type pair, indexed `t * t2 + s`, each `m1 x m2`.
    pub payoff_row: Vec<RatMatrix>,
    pub payoff_col: Vec<RatMatrix>,
}

impl BayesianSpec {
    pub fn type_counts(&self) -> (usize, usize) {
        (self.prior.rows(), self.prior.cols())
    }

    pub fn action_counts(&self) -> (usize, usize) {
        (self.payoff_row[0].rows(), self.payoff_row[0].cols())
    }

    fn check(&self) -> Result<(), ConvertError> {
        let (t1, t2) = self.type_counts();
        if t1 == 0 || t2 == 0 || self.payoff_row.len() != t1 * t2 || self.payoff_col.len() != t1 * t2 {
            return Err(ConvertError::MalformedTree(
                "payoff block count must equal t1*t2".into(),
            ));
        }
        let (m1, m2) = self.action_counts();
        for blk in self.payoff_row.iter().chain(&self.payoff_col) {
            if blk.rows() != m1 || blk.cols() != m2 {
                return Err(ConvertError::DimensionMismatch);
            }
        }
        let mut total = Rat::zero();
        for p in self.prior.entries() {
            if p.is_negative() {
                return Err(ConvertError::InvalidPrior("negative probability".into()));
            }
            total += p;
        }
        if total != Rat::one() {
            return Err(ConvertError::InvalidPrior("prior does not sum to 1".into()));
        }
        Ok(())
    }

    /// Expected utility of both players given per-type mixed strategies.
    pub fn expected_payoffs(&self, xs: &[RatVector], ys: &[RatVector]) -> (Rat, Rat) {
        let (t1, t2) = self.type_counts();
        let mut u = Rat::zero();
        let mut v = Rat::zero();
        for t in 0..t1 {
            for s in 0..t2 {
                let p = &self.prior[(t, s)];
                let ay = self.payoff_row[t * t2 + s].mul_vec(&ys[s]);
                let by = self.payoff_col[t * t2 + s].mul_vec(&ys[s]);
                u += p * dot(&xs[t], &ay);
                v += p * dot(&xs[t], &by);
            }
        }
        (u, v)
    }
}

/// Bayesian game as a bilinear game over type-stacked strategies: the
/// payoff blocks are `p_ts A^{ts}`, and each player's constraint matrix is
/// block diagonal with one simplex row per type.
pub fn from_bayesian(spec: &BayesianSpec) -> Result<BilinearGame, ConvertError> {
    spec.check()?;
    let (t1, t2) = spec.type_counts();
    let (m1, m2) = spec.action_counts();
    let mut a = RatMatrix::zeros(t1 * m1, t2 * m2);
    let mut b = RatMatrix::zeros(t1 * m1, t2 * m2);
    for t in 0..t1 {
        for s in 0..t2 {
            let p = &spec.prior[(t, s)];
            for i in 0..m1 {
                for j in 0..m2 {
                    a[(t * m1 + i, s * m2 + j)] = p * &spec.payoff_row[t * t2 + s][(i, j)];
                    b[(t * m1 + i, s * m2 + j)] = p * &spec.payoff_col[t * t2 + s][(i, j)];
                }
            }
        }
    }
    let (e_mat, e_rhs) = per_type_simplices(t1, m1);
    let (f_mat, f_rhs) = per_type_simplices(t2, m2);
    Ok(BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)?)
}

fn per_type_simplices(types: usize, actions: usize) -> (RatMatrix, RatVector) {
    let mut e = RatMatrix::zeros(types, types * actions);
    for t in 0..types {
        for i in 0..actions {
            e[(t, t * actions + i)] = Rat::one();
        }
    }
    (e, vec![Rat::one(); types])
}

/// Stacks one per-type strategy vector per type into the bilinear
/// strategy coordinates.
pub fn stack_strategies(per_type: &[RatVector]) -> RatVector {
    per_type.concat()
}

/// Polymatrix game: n players, pairwise payoff blocks.
#[derive(Debug, Clone)]
pub struct PolymatrixSpec {
    pub strategy_counts: Vec<usize>,
    /// Block `A^{ij}` of size `|S_i| x |S_j|` for every ordered pair `i != j`.
    pub blocks: BTreeMap<(usize, usize), RatMatrix>,
}

impl PolymatrixSpec {
    pub fn players(&self) -> usize {
        self.strategy_counts.len()
    }

    fn check(&self) -> Result<(), ConvertError> {
        let n = self.players();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let blk = self
                    .blocks
                    .get(&(i, j))
                    .ok_or(ConvertError::DimensionMismatch)?;
                if blk.rows() != self.strategy_counts[i] || blk.cols() != self.strategy_counts[j] {
                    return Err(ConvertError::DimensionMismatch);
                }
            }
        }
        Ok(())
    }

    /// Player `i`'s total payoff under the given per-player strategies.
    pub fn payoff(&self, strategies: &[RatVector], i: usize) -> Rat {
        let mut total = Rat::zero();
        for j in 0..self.players() {
            if j == i {
                continue;
            }
            let ay = self.blocks[&(i, j)].mul_vec(&strategies[j]);
            total += dot(&strategies[i], &ay);
        }
        total
    }

    /// Exact per-player best-response check: no pure deviation gains.
    pub fn is_equilibrium(&self, strategies: &[RatVector]) -> bool {
        (0..self.players()).all(|i| {
            let current = self.payoff(strategies, i);
            // Payoff is linear in player i's strategy, so pure strategies
            // suffice as deviations.
            let mut gains = vec![Rat::zero(); self.strategy_counts[i]];
            for j in 0..self.players() {
                if j == i {
                    continue;
                }
                let ay = self.blocks[&(i, j)].mul_vec(&strategies[j]);
                for (g, c) in gains.iter_mut().zip(ay) {
                    *g += c;
                }
            }
            gains.iter().all(|g| g <= &current)
        })
    }
}

/// Induced symmetric bilinear game `(A, A^T, E, e, E, e)`: `A` has the
/// pairwise blocks off the diagonal and zeros on it; `E` stacks one
/// simplex row per player.
pub fn from_polymatrix(spec: &PolymatrixSpec) -> Result<BilinearGame, ConvertError> {
    spec.check()?;
    let n = spec.players();
    let total: usize = spec.strategy_counts.iter().sum();
    let offsets: Vec<usize> = spec
        .strategy_counts
        .iter()
        .scan(0, |acc, &c| {
            let o = *acc;
            *acc += c;
            Some(o)
        })
        .collect();
    let mut a = RatMatrix::zeros(total, total);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let blk = &spec.blocks[&(i, j)];
            for r in 0..blk.rows() {
                for c in 0..blk.cols() {
                    a[(offsets[i] + r, offsets[j] + c)] = blk[(r, c)].clone();
                }
            }
        }
    }
    let mut e = RatMatrix::zeros(n, total);
    for i in 0..n {
        for r in 0..spec.strategy_counts[i] {
            e[(i, offsets[i] + r)] = Rat::one();
        }
    }
    let e_rhs = vec![Rat::one(); n];
    let at = a.transpose();
    Ok(BilinearGame::validate(
        a,
        at,
        e.clone(),
        e_rhs.clone(),
        e,
        e_rhs,
    )?)
}

/// Splits a symmetric equilibrium of the induced game back into one
/// strategy per polymatrix player. Asymmetric profiles are rejected:
/// they do not correspond to polymatrix equilibria.
pub fn extract_polymatrix_ne(
    spec: &PolymatrixSpec,
    profile: &StrategyProfile,
) -> Result<Vec<RatVector>, ConvertError> {
    if profile.x != profile.y {
        return Err(ConvertError::NotSymmetric);
    }
    let mut out = Vec::with_capacity(spec.players());
    let mut at = 0;
    for &c in &spec.strategy_counts {
        out.push(profile.x[at..at + c].to_vec());
        at += c;
    }
    Ok(out)
}

/// Constraint system of the Birkhoff polytope of `m x m` doubly
/// stochastic matrices, flattened row-major into `m^2` variables. All `m`
/// row sums plus the first `m-1` column sums; the last column sum is
/// implied, so the rows are independent.
pub fn ranking_duel_polytope(m: usize) -> (RatMatrix, RatVector) {
    assert!(m >= 1);
    let rows = 2 * m - 1;
    let mut e = RatMatrix::zeros(rows, m * m);
    for i in 0..m {
        for j in 0..m {
            e[(i, i * m + j)] = Rat::one();
        }
    }
    for j in 0..m - 1 {
        for i in 0..m {
            e[(m + j, i * m + j)] = Rat::one();
        }
    }
    (e, vec![Rat::one(); rows])
}

// ---------------------------------------------------------------------
// Extensive form.

#[derive(Debug, Clone)]
pub enum Node {
    Leaf {
        payoff_row: Rat,
        payoff_col: Rat,
    },
    Chance {
        /// `(probability, child node index)`; probabilities sum to 1.
        children: Vec<(Rat, usize)>,
    },
    Decision {
        player: Player,
        /// Global information-set id; sets never span players.
        info_set: usize,
        /// One child node per action, in action order.
        children: Vec<usize>,
    },
}

/// Game tree in node-array form; node 0 is the root.
#[derive(Debug, Clone)]
pub struct ExtensiveFormTree {
    pub nodes: Vec<Node>,
}

/// Sequence-form translation: the bilinear game plus enough structure to
/// move between behavior strategies and realization plans.
#[derive(Debug, Clone)]
pub struct SequenceForm {
    pub game: BilinearGame,
    pub row: PlayerSequences,
    pub col: PlayerSequences,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayerSequences {
    /// Includes the empty sequence at index 0.
    pub num_sequences: usize,
    /// One entry per information set, in discovery order.
    pub info_sets: Vec<InfoSetSeq>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoSetSeq {
    /// The tree's global information-set id.
    pub id: usize,
    /// The player's own sequence on the path into this set.
    pub parent_seq: usize,
    /// Sequence index produced by each action.
    pub seqs: Vec<usize>,
}

/// Behavior strategy: per information set, a distribution over actions.
pub type BehaviorStrategy = BTreeMap<usize, RatVector>;

struct SeqBuilder {
    num_sequences: usize,
    info_sets: Vec<InfoSetSeq>,
    by_id: BTreeMap<usize, usize>,
}

impl SeqBuilder {
    fn new() -> Self {
        SeqBuilder {
            num_sequences: 1,
            info_sets: Vec::new(),
            by_id: BTreeMap::new(),
        }
    }

    /// Registers (or re-checks) an information set reached with the given
    /// own-sequence; returns its index or a perfect-recall violation.
    fn visit(
        &mut self,
        id: usize,
        parent_seq: usize,
        actions: usize,
    ) -> Result<usize, ConvertError> {
        if let Some(&idx) = self.by_id.get(&id) {
            let is = &self.info_sets[idx];
            if is.parent_seq != parent_seq || is.seqs.len() != actions {
                return Err(ConvertError::NotPerfectRecall(id));
            }
            return Ok(idx);
        }
        let seqs: Vec<usize> = (0..actions).map(|a| self.num_sequences + a).collect();
        self.num_sequences += actions;
        self.info_sets.push(InfoSetSeq {
            id,
            parent_seq,
            seqs,
        });
        self.by_id.insert(id, self.info_sets.len() - 1);
        Ok(self.info_sets.len() - 1)
    }
}

/// Two-player perfect-recall extensive-form game in sequence form. The
/// strategy variables are realization plans over sequences; payoff
/// entries accumulate chance-weighted leaf payoffs.
pub fn from_extensive_form(tree: &ExtensiveFormTree) -> Result<SequenceForm, ConvertError> {
    if tree.nodes.is_empty() {
        return Err(ConvertError::MalformedTree("empty tree".into()));
    }
    let mut row = SeqBuilder::new();
    let mut col = SeqBuilder::new();
    // (node, row sequence, col sequence, chance weight)
    let mut stack = vec![(0usize, 0usize, 0usize, Rat::one())];
    let mut leaves: Vec<(usize, usize, Rat, Rat, Rat)> = Vec::new();
    let mut visits = vec![0usize; tree.nodes.len()];
    while let Some((at, rs, cs, w)) = stack.pop() {
        let node = tree
            .nodes
            .get(at)
            .ok_or_else(|| ConvertError::MalformedTree(format!("missing node {at}")))?;
        visits[at] += 1;
        if visits[at] > 1 {
            return Err(ConvertError::MalformedTree(format!(
                "node {at} has multiple parents"
            )));
        }
        match node {
            Node::Leaf {
                payoff_row,
                payoff_col,
            } => leaves.push((rs, cs, w, payoff_row.clone(), payoff_col.clone())),
            Node::Chance { children } => {
                let total: Rat = children.iter().map(|(p, _)| p.clone()).sum();
                if total != Rat::one() || children.iter().any(|(p, _)| p.is_negative()) {
                    return Err(ConvertError::MalformedTree(
                        "chance probabilities must be a distribution".into(),
                    ));
                }
                // Reversed so the stack visits children left to right,
                // keeping sequence numbering in tree order.
                for (p, child) in children.iter().rev() {
                    stack.push((*child, rs, cs, &w * p));
                }
            }
            Node::Decision {
                player,
                info_set,
                children,
            } => {
                if children.is_empty() {
                    return Err(ConvertError::MalformedTree(format!(
                        "decision node {at} has no actions"
                    )));
                }
                let builder = match player {
                    Player::Row => &mut row,
                    Player::Col => &mut col,
                };
                let parent = match player {
                    Player::Row => rs,
                    Player::Col => cs,
                };
                let idx = builder.visit(*info_set, parent, children.len())?;
                let seqs = builder.info_sets[idx].seqs.clone();
                for (a, child) in children.iter().enumerate().rev() {
                    match player {
                        Player::Row => stack.push((*child, seqs[a], cs, w.clone())),
                        Player::Col => stack.push((*child, rs, seqs[a], w.clone())),
                    }
                }
            }
        }
    }
    let row_seqs = PlayerSequences {
        num_sequences: row.num_sequences,
        info_sets: row.info_sets,
    };
    let col_seqs = PlayerSequences {
        num_sequences: col.num_sequences,
        info_sets: col.info_sets,
    };
    let mut a = RatMatrix::zeros(row_seqs.num_sequences, col_seqs.num_sequences);
    let mut b = RatMatrix::zeros(row_seqs.num_sequences, col_seqs.num_sequences);
    for (rs, cs, w, pr, pc) in leaves {
        a[(rs, cs)] = &a[(rs, cs)] + &(&w * pr);
        b[(rs, cs)] = &b[(rs, cs)] + &(w * pc);
    }
    let (e_mat, e_rhs) = sequence_constraints(&row_seqs);
    let (f_mat, f_rhs) = sequence_constraints(&col_seqs);
    let game = BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)?;
    Ok(SequenceForm {
        game,
        row: row_seqs,
        col: col_seqs,
    })
}

/// `x(root) = 1` plus flow conservation at every information set.
fn sequence_constraints(ps: &PlayerSequences) -> (RatMatrix, RatVector) {
    let rows = 1 + ps.info_sets.len();
    let mut e = RatMatrix::zeros(rows, ps.num_sequences);
    let mut rhs = vec![Rat::zero(); rows];
    e[(0, 0)] = Rat::one();
    rhs[0] = Rat::one();
    for (r, is) in ps.info_sets.iter().enumerate() {
        e[(r + 1, is.parent_seq)] = -Rat::one();
        for &s in &is.seqs {
            e[(r + 1, s)] = Rat::one();
        }
    }
    (e, rhs)
}

/// Realization plan of a behavior strategy: `x(root) = 1`, and each
/// sequence carries the product of its action probabilities.
pub fn behavior_to_realization(ps: &PlayerSequences, behavior: &BehaviorStrategy) -> RatVector {
    let mut x = vec![Rat::zero(); ps.num_sequences];
    x[0] = Rat::one();
    // Discovery order guarantees parent sequences are filled first.
    for is in &ps.info_sets {
        let probs = &behavior[&is.id];
        for (a, &s) in is.seqs.iter().enumerate() {
            x[s] = &x[is.parent_seq] * &probs[a];
        }
    }
    x
}

/// Inverse map; information sets the plan never reaches get the uniform
/// distribution.
pub fn realization_to_behavior(ps: &PlayerSequences, x: &[Rat]) -> BehaviorStrategy {
    let mut out = BehaviorStrategy::new();
    for is in &ps.info_sets {
        let parent = &x[is.parent_seq];
        let probs = if parent.is_zero() {
            uniform(is.seqs.len())
        } else {
            is.seqs.iter().map(|&s| &x[s] / parent).collect()
        };
        out.insert(is.id, probs);
    }
    out
}

/// Expected payoffs of both players from a direct tree walk under
/// behavior strategies; the independent check for the sequence form.
pub fn tree_expected_payoffs(
    tree: &ExtensiveFormTree,
    row: &BehaviorStrategy,
    col: &BehaviorStrategy,
) -> (Rat, Rat) {
    fn walk(
        tree: &ExtensiveFormTree,
        at: usize,
        w: Rat,
        row: &BehaviorStrategy,
        col: &BehaviorStrategy,
        acc: &mut (Rat, Rat),
    ) {
        match &tree.nodes[at] {
            Node::Leaf {
                payoff_row,
                payoff_col,
            } => {
                acc.0 += &w * payoff_row;
                acc.1 += &w * payoff_col;
            }
            Node::Chance { children } => {
                for (p, child) in children {
                    walk(tree, *child, &w * p, row, col, acc);
                }
            }
            Node::Decision {
                player,
                info_set,
                children,
            } => {
                let probs = match player {
                    Player::Row => &row[info_set],
                    Player::Col => &col[info_set],
                };
                for (a, child) in children.iter().enumerate() {
                    walk(tree, *child, &w * &probs[a], row, col, acc);
                }
            }
        }
    }
    let mut acc = (Rat::zero(), Rat::zero());
    walk(tree, 0, Rat::one(), row, col, &mut acc);
    acc
}

/// Lemke's algorithm on the LCP formulation terminates at a solution
/// (never at a ray) when both payoff matrices are non-positive and the
/// strategy systems admit no nonzero nonnegative recession direction.
/// No pivoting solver is built here; this only checks the conditions.
pub fn lemke_termination_predicate(g: &BilinearGame) -> bool {
    let nonpositive = g
        .a
        .entries()
        .iter()
        .chain(g.b.entries())
        .all(|v| !v.is_positive());
    nonpositive && trivial_recession(&g.e_mat) && trivial_recession(&g.f_mat)
}

/// True iff `{x >= 0 : Ex = 0}` is just the origin.
fn trivial_recession(e: &RatMatrix) -> bool {
    let n = e.cols();
    let mut lp = LinearProgram::with_equalities(
        Sense::Max,
        vec![Rat::one(); n],
        e.clone(),
        vec![Rat::zero(); e.rows()],
        vec![true; n],
    );
    lp.ineq_lhs = RatMatrix::new(1, n, vec![Rat::one(); n]);
    lp.ineq_rhs = vec![Rat::one()];
    match solve_lp(&lp).expect("well-formed") {
        LpOutcome::Optimal(opt) => opt.value.is_zero(),
        _ => false,
    }
}
