use std::time::Instant;

use super::exact::{Constraint, ExactModel};
use super::solution::AssignmentSolution;
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_SEARCHERS: usize = 10;

/// Exhaustive enumeration of all assignments that satisfy the model's constraint
/// rows. Options are tried in target-id order and only strictly better
/// assignments replace the best one, so ties resolve to the lexicographically
/// smallest target vector.
pub fn brute_force_solve(model: &ExactModel) -> Result<AssignmentSolution> {
    let n = model.searchers.len();
    if n > BRUTE_FORCE_MAX_SEARCHERS {
        return Err(Error::InstanceTooLarge {
            searchers: n,
            max: BRUTE_FORCE_MAX_SEARCHERS,
        });
    }
    let start = Instant::now();

    // For each variable: the rows it counts towards.
    let mut at_most_one: Vec<Vec<usize>> = vec![Vec::new(); model.variables.len()];
    let mut as_incoming: Vec<Vec<usize>> = vec![Vec::new(); model.variables.len()];
    let mut as_outgoing: Vec<Vec<usize>> = vec![Vec::new(); model.variables.len()];
    for (row, c) in model.constraints.iter().enumerate() {
        match c {
            Constraint::ExactlyOne { .. } => {}
            Constraint::AtMostOneIncoming { vars, .. } => {
                for &v in vars {
                    at_most_one[v].push(row);
                }
            }
            Constraint::JoinExcludesReceive {
                incoming, outgoing, ..
            } => {
                for &v in incoming {
                    as_incoming[v].push(row);
                }
                for &v in outgoing {
                    as_outgoing[v].push(row);
                }
            }
        }
    }

    struct State {
        row_count: Vec<usize>,
        row_in: Vec<usize>,
        row_out: Vec<usize>,
        choice: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
        leaves: u64,
    }
    let rows = model.constraints.len();
    let mut st = State {
        row_count: vec![0; rows],
        row_in: vec![0; rows],
        row_out: vec![0; rows],
        choice: Vec::with_capacity(n),
        best: None,
        leaves: 0,
    };

    fn go(
        k: usize,
        model: &ExactModel,
        amo: &[Vec<usize>],
        inc: &[Vec<usize>],
        out: &[Vec<usize>],
        st: &mut State,
    ) {
        if k == model.searchers.len() {
            st.leaves += 1;
            let obj = model.objective_of(&st.choice);
            if st.best.as_ref().is_none_or(|(b, _)| obj < *b) {
                st.best = Some((obj, st.choice.clone()));
            }
            return;
        }
        for &v in model.options(k) {
            let feasible = amo[v].iter().all(|&r| st.row_count[r] == 0)
                && inc[v].iter().all(|&r| st.row_out[r] == 0)
                && out[v].iter().all(|&r| st.row_in[r] == 0);
            if !feasible {
                continue;
            }
            amo[v].iter().for_each(|&r| st.row_count[r] += 1);
            inc[v].iter().for_each(|&r| st.row_in[r] += 1);
            out[v].iter().for_each(|&r| st.row_out[r] += 1);
            st.choice.push(v);
            go(k + 1, model, amo, inc, out, st);
            st.choice.pop();
            amo[v].iter().for_each(|&r| st.row_count[r] -= 1);
            inc[v].iter().for_each(|&r| st.row_in[r] -= 1);
            out[v].iter().for_each(|&r| st.row_out[r] -= 1);
        }
    }
    go(0, model, &at_most_one, &as_incoming, &as_outgoing, &mut st);

    let (_, choice) = st.best.expect("all-self assignment is always feasible");
    Ok(model.solution_from_choice(&choice, 0.0, start.elapsed(), st.leaves, true))
}
