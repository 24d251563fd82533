//! JSON (de)serialization: the on-disk game file with keys
//! `A,B,E,F,e,f`, converter input schemas, strategy profiles, and
//! certificate output. Rationals are written as bare integers when the
//! denominator is 1 and as canonical lowest-term strings `"p/q"`
//! otherwise, so files never contain floating point. Serialization is
//! deterministic and byte-stable: `parse(serialize(g)) == g`.

use crate::convert::{
    BayesianSpec, ConvertError, ExtensiveFormTree, Node, PolymatrixSpec, ranking_duel_polytope,
};
use crate::game::{BilinearGame, EquilibriumCertificate, GameError, Player, StrategyProfile};
use crate::linalg::{RatMatrix, RatVector};
use crate::rational::{format_rat, parse_rat, Rat};
use num_traits::One;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Convert(#[from] ConvertError),
}

fn parse_err(msg: impl Into<String>) -> IoError {
    IoError::Parse(msg.into())
}

// ---------------------------------------------------------------------
// Rationals, vectors, matrices.

pub fn rat_to_value(r: &Rat) -> Value {
    if r.denom().is_one() {
        if let Ok(n) = i64::try_from(r.numer().clone()) {
            return json!(n);
        }
    }
    json!(format_rat(r))
}

pub fn value_to_rat(v: &Value) -> Result<Rat, IoError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i.into()))
            } else {
                Err(parse_err(format!("non-integer number {n}")))
            }
        }
        Value::String(s) => parse_rat(s).ok_or_else(|| parse_err(format!("bad rational {s:?}"))),
        other => Err(parse_err(format!("expected rational, got {other}"))),
    }
}

pub fn vector_to_value(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_to_value).collect())
}

pub fn value_to_vector(v: &Value) -> Result<RatVector, IoError> {
    v.as_array()
        .ok_or_else(|| parse_err("expected an array of rationals"))?
        .iter()
        .map(value_to_rat)
        .collect()
}

pub fn matrix_to_value(m: &RatMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_to_value(m.row(i))).collect())
}

pub fn value_to_matrix(v: &Value) -> Result<RatMatrix, IoError> {
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err("expected an array of matrix rows"))?;
    if rows.is_empty() {
        return Err(parse_err("matrix must have at least one row"));
    }
    let parsed: Vec<RatVector> = rows.iter().map(value_to_vector).collect::<Result<_, _>>()?;
    let cols = parsed[0].len();
    if parsed.iter().any(|r| r.len() != cols) {
        return Err(parse_err("ragged matrix rows"));
    }
    Ok(RatMatrix::new(parsed.len(), cols, parsed.concat()))
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value, IoError> {
    obj.get(key)
        .ok_or_else(|| parse_err(format!("missing key {key:?}")))
}

// ---------------------------------------------------------------------
// Game files.

/// The game file document. `serde_json::Map` is ordered, so the keys
/// come out exactly as inserted: A, B, E, F, e, f.
pub fn game_to_value(g: &BilinearGame) -> Value {
    let mut map = Map::new();
    map.insert("A".into(), matrix_to_value(&g.a));
    map.insert("B".into(), matrix_to_value(&g.b));
    map.insert("E".into(), matrix_to_value(&g.e_mat));
    map.insert("F".into(), matrix_to_value(&g.f_mat));
    map.insert("e".into(), vector_to_value(&g.e_rhs));
    map.insert("f".into(), vector_to_value(&g.f_rhs));
    Value::Object(map)
}

pub fn game_from_value(v: &Value) -> Result<BilinearGame, IoError> {
    let a = value_to_matrix(field(v, "A")?)?;
    let b = value_to_matrix(field(v, "B")?)?;
    let e_mat = value_to_matrix(field(v, "E")?)?;
    let e_rhs = value_to_vector(field(v, "e")?)?;
    let f_mat = value_to_matrix(field(v, "F")?)?;
    let f_rhs = value_to_vector(field(v, "f")?)?;
    Ok(BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)?)
}

pub fn serialize_game(g: &BilinearGame) -> String {
    let mut s = serde_json::to_string_pretty(&game_to_value(g)).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_game(text: &str) -> Result<BilinearGame, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    game_from_value(&v)
}

// ---------------------------------------------------------------------
// Strategy profiles and certificates.

pub fn parse_profile(text: &str) -> Result<StrategyProfile, IoError> {
    let v: Value = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    Ok(StrategyProfile {
        x: value_to_vector(field(&v, "x")?)?,
        y: value_to_vector(field(&v, "y")?)?,
    })
}

pub fn profile_to_value(p: &StrategyProfile) -> Value {
    let mut map = Map::new();
    map.insert("x".into(), vector_to_value(&p.x));
    map.insert("y".into(), vector_to_value(&p.y));
    Value::Object(map)
}

/// Certificate output for the CLI: strategies, duals, the three error
/// measures, plus which algorithm produced it and how many iterations
/// it took (when the algorithm counts them).
pub fn certificate_to_value(
    cert: &EquilibriumCertificate,
    algorithm: &str,
    iterations: Option<u64>,
) -> Value {
    let mut map = Map::new();
    map.insert("x".into(), vector_to_value(&cert.profile.x));
    map.insert("y".into(), vector_to_value(&cert.profile.y));
    map.insert("p".into(), vector_to_value(&cert.p));
    map.insert("q".into(), vector_to_value(&cert.q));
    map.insert("abs_eps".into(), rat_to_value(&cert.abs_eps));
    map.insert(
        "rel_eps".into(),
        cert.rel_eps.as_ref().map_or(Value::Null, rat_to_value),
    );
    map.insert("qp_residual".into(), rat_to_value(&cert.qp_residual));
    map.insert("algorithm".into(), json!(algorithm));
    map.insert(
        "iterations".into(),
        iterations.map_or(Value::Null, |n| json!(n)),
    );
    Value::Object(map)
}

// ---------------------------------------------------------------------
// Converter input schemas.

/// `{"A": matrix, "B": matrix}`
pub fn parse_bimatrix_input(v: &Value) -> Result<(RatMatrix, RatMatrix), IoError> {
    Ok((
        value_to_matrix(field(v, "A")?)?,
        value_to_matrix(field(v, "B")?)?,
    ))
}

/// `{"prior": t1 x t2 matrix, "payoff_row": [matrix; t1*t2],
///   "payoff_col": [matrix; t1*t2]}` — payoff matrices in row-major
/// type-pair order, index `t*t2 + s`.
pub fn parse_bayesian_input(v: &Value) -> Result<BayesianSpec, IoError> {
    let matrices = |key: &str| -> Result<Vec<RatMatrix>, IoError> {
        field(v, key)?
            .as_array()
            .ok_or_else(|| parse_err(format!("{key} must be an array of matrices")))?
            .iter()
            .map(value_to_matrix)
            .collect()
    };
    Ok(BayesianSpec {
        prior: value_to_matrix(field(v, "prior")?)?,
        payoff_row: matrices("payoff_row")?,
        payoff_col: matrices("payoff_col")?,
    })
}

/// `{"strategy_counts": [n_0, ...],
///   "blocks": [{"i": 0, "j": 1, "matrix": ...}, ...]}` with one
/// `strategy_counts[i] x strategy_counts[j]` block per ordered player
/// pair i != j.
pub fn parse_polymatrix_input(v: &Value) -> Result<PolymatrixSpec, IoError> {
    let counts: Vec<usize> = field(v, "strategy_counts")?
        .as_array()
        .ok_or_else(|| parse_err("strategy_counts must be an array"))?
        .iter()
        .map(|n| {
            n.as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| parse_err("strategy_counts entries must be nonnegative integers"))
        })
        .collect::<Result<_, _>>()?;
    let mut blocks = BTreeMap::new();
    for b in field(v, "blocks")?
        .as_array()
        .ok_or_else(|| parse_err("blocks must be an array"))?
    {
        let idx = |key: &str| -> Result<usize, IoError> {
            field(b, key)?
                .as_u64()
                .map(|n| n as usize)
                .ok_or_else(|| parse_err(format!("block {key} must be an integer")))
        };
        let (i, j) = (idx("i")?, idx("j")?);
        if blocks
            .insert((i, j), value_to_matrix(field(b, "matrix")?)?)
            .is_some()
        {
            return Err(parse_err(format!("duplicate block ({i}, {j})")));
        }
    }
    Ok(PolymatrixSpec {
        strategy_counts: counts,
        blocks,
    })
}

/// `{"m": 3, "A": m^2 x m^2 matrix, "B": ...}`: a game over two Birkhoff
/// polytopes of m x m doubly stochastic matrices, strategies flattened
/// row-major.
pub fn parse_ranking_duel_input(v: &Value) -> Result<BilinearGame, IoError> {
    let m = field(v, "m")?
        .as_u64()
        .ok_or_else(|| parse_err("m must be a positive integer"))? as usize;
    let a = value_to_matrix(field(v, "A")?)?;
    let b = value_to_matrix(field(v, "B")?)?;
    if a.rows() != m * m || a.cols() != m * m {
        return Err(parse_err("payoff matrices must be m^2 x m^2"));
    }
    let (e_mat, e_rhs) = ranking_duel_polytope(m);
    let (f_mat, f_rhs) = ranking_duel_polytope(m);
    Ok(BilinearGame::validate(a, b, e_mat, e_rhs, f_mat, f_rhs)?)
}

/// `{"nodes": [...]}` with node 0 the root and each node one of
/// `{"type": "leaf", "payoff_row": r, "payoff_col": r}`,
/// `{"type": "chance", "children": [[prob, index], ...]}`, or
/// `{"type": "decision", "player": "row"|"col", "info_set": k,
///   "children": [index, ...]}`.
pub fn parse_extensive_input(v: &Value) -> Result<ExtensiveFormTree, IoError> {
    let mut nodes = Vec::new();
    for node in field(v, "nodes")?
        .as_array()
        .ok_or_else(|| parse_err("nodes must be an array"))?
    {
        let kind = field(node, "type")?
            .as_str()
            .ok_or_else(|| parse_err("node type must be a string"))?;
        nodes.push(match kind {
            "leaf" => Node::Leaf {
                payoff_row: value_to_rat(field(node, "payoff_row")?)?,
                payoff_col: value_to_rat(field(node, "payoff_col")?)?,
            },
            "chance" => {
                let mut children = Vec::new();
                for c in field(node, "children")?
                    .as_array()
                    .ok_or_else(|| parse_err("chance children must be an array"))?
                {
                    let pair = c
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .ok_or_else(|| parse_err("chance child must be [prob, index]"))?;
                    let idx = pair[1]
                        .as_u64()
                        .ok_or_else(|| parse_err("child index must be an integer"))?;
                    children.push((value_to_rat(&pair[0])?, idx as usize));
                }
                Node::Chance { children }
            }
            "decision" => {
                let player = match field(node, "player")?.as_str() {
                    Some("row") => Player::Row,
                    Some("col") => Player::Col,
                    _ => return Err(parse_err("player must be \"row\" or \"col\"")),
                };
                let info_set = field(node, "info_set")?
                    .as_u64()
                    .ok_or_else(|| parse_err("info_set must be an integer"))?
                    as usize;
                let children = field(node, "children")?
                    .as_array()
                    .ok_or_else(|| parse_err("decision children must be an array"))?
                    .iter()
                    .map(|c| {
                        c.as_u64()
                            .map(|n| n as usize)
                            .ok_or_else(|| parse_err("child index must be an integer"))
                    })
                    .collect::<Result<_, _>>()?;
                Node::Decision {
                    player,
                    info_set,
                    children,
                }
            }
            other => return Err(parse_err(format!("unknown node type {other:?}"))),
        });
    }
    Ok(ExtensiveFormTree { nodes })
}
