use std::collections::BTreeSet;

use super::candidates::CandidateEntry;
use crate::model::VehicleId;

/// Walks searchers in list order (ascending id) and lets each take its best
/// remaining target; both vehicles of a chosen pair drop out of the list.
/// Ties on deviation go to the lower target id.
pub fn greedy_select(candidates: &[CandidateEntry]) -> Vec<(VehicleId, VehicleId)> {
    let mut blocked: BTreeSet<VehicleId> = BTreeSet::new();
    let mut chosen = Vec::new();
    let mut i = 0;
    while i < candidates.len() {
        let searcher = candidates[i].searcher;
        let mut j = i;
        while j < candidates.len() && candidates[j].searcher == searcher {
            j += 1;
        }
        if !blocked.contains(&searcher) {
            let best = candidates[i..j]
                .iter()
                .filter(|e| !blocked.contains(&e.target))
                .min_by(|a, b| {
                    a.deviation
                        .total
                        .total_cmp(&b.deviation.total)
                        .then(a.target.cmp(&b.target))
                });
            if let Some(best) = best {
                chosen.push((searcher, best.target));
                blocked.insert(searcher);
                blocked.insert(best.target);
            }
        }
        i = j;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::collect_candidates_centralized;
    use crate::similarity::Deviation;
    use crate::testing::{four_vehicle_params, four_vehicle_world};

    fn entry(s: u32, t: u32, total: f64) -> CandidateEntry {
        CandidateEntry {
            searcher: VehicleId(s),
            target: VehicleId(t),
            deviation: Deviation {
                speed_dev: total,
                position_dev: total,
                total,
            },
        }
    }

    #[test]
    fn four_vehicle_greedy_choice() {
        let entries = collect_candidates_centralized(&four_vehicle_world(), &four_vehicle_params());
        let chosen = greedy_select(&entries);
        assert_eq!(
            chosen,
            vec![
                (VehicleId(13), VehicleId(5)),
                (VehicleId(37), VehicleId(20))
            ]
        );
    }

    #[test]
    fn single_candidate_is_taken() {
        assert_eq!(
            greedy_select(&[entry(1, 2, 0.4)]),
            vec![(VehicleId(1), VehicleId(2))]
        );
        assert!(greedy_select(&[]).is_empty());
    }

    #[test]
    fn first_searcher_wins_a_shared_target() {
        let chosen = greedy_select(&[entry(1, 9, 0.2), entry(2, 9, 0.1)]);
        assert_eq!(chosen, vec![(VehicleId(1), VehicleId(9))]);
    }

    #[test]
    fn ties_go_to_lowest_target() {
        let chosen = greedy_select(&[entry(1, 4, 0.3), entry(1, 7, 0.3)]);
        assert_eq!(chosen, vec![(VehicleId(1), VehicleId(4))]);
    }

    #[test]
    fn chosen_target_cannot_search_later() {
        // 2 is picked as a target by 1, so its own entry disappears.
        let chosen = greedy_select(&[entry(1, 2, 0.5), entry(2, 3, 0.1)]);
        assert_eq!(chosen, vec![(VehicleId(1), VehicleId(2))]);
    }
}
