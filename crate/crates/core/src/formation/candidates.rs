use crate::error::{Error, Result};
use crate::model::{FormationParams, PlatoonableEntity, VehicleId};
use crate::similarity::{eligible_deviation, Deviation};
use crate::traffic::WorldState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateEntry {
    pub searcher: VehicleId,
    pub target: VehicleId,
    pub deviation: Deviation,
}

/// Per-searcher counts: eligible options and entities skipped only because they
/// are followers or take part in a maneuver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearcherTally {
    pub searcher: VehicleId,
    pub found: usize,
    pub filtered: usize,
}

#[derive(Debug, Clone, Default)]
pub struct CandidateScan {
    pub entries: Vec<CandidateEntry>,
    pub tallies: Vec<SearcherTally>,
}

impl CandidateScan {
    pub fn searchers(&self) -> Vec<VehicleId> {
        self.tallies.iter().map(|t| t.searcher).collect()
    }

    pub fn found(&self) -> usize {
        self.entries.len()
    }

    pub fn filtered(&self) -> usize {
        self.tallies.iter().map(|t| t.filtered).sum()
    }
}

/// Eligible non-self pairs, ordered by searcher id then target id.
///
/// Only targets whose rear lies within `[p_c, p_c + r]` can satisfy both the
/// "target ahead" and the search-range constraint, so targets are indexed by rear
/// position before scanning.
pub fn candidates_between(
    searchers: &[PlatoonableEntity],
    targets: &[PlatoonableEntity],
    params: &FormationParams,
) -> Vec<CandidateEntry> {
    let mut by_rear: Vec<&PlatoonableEntity> = targets.iter().collect();
    by_rear.sort_by(|a, b| {
        a.rear_position
            .total_cmp(&b.rear_position)
            .then(a.id.cmp(&b.id))
    });
    let mut ordered: Vec<&PlatoonableEntity> = searchers.iter().collect();
    ordered.sort_by_key(|s| s.id);

    let mut entries = Vec::new();
    let mut row = Vec::new();
    for c in ordered {
        let lo = by_rear.partition_point(|t| t.rear_position < c.front_position);
        let hi = by_rear.partition_point(|t| {
            t.rear_position <= c.front_position + params.position_range * (1.0 + 1e-9) + 1e-9
        });
        row.clear();
        for t in &by_rear[lo..hi] {
            if t.id == c.id {
                continue;
            }
            if let Some(deviation) = eligible_deviation(c, t, params) {
                row.push(CandidateEntry {
                    searcher: c.id,
                    target: t.id,
                    deviation,
                });
            }
        }
        row.sort_by_key(|e| e.target);
        entries.extend_from_slice(&row);
    }
    entries
}

fn tally(
    entries: &[CandidateEntry],
    searchers: &[VehicleId],
    filtered: impl Fn(VehicleId) -> usize,
) -> Vec<SearcherTally> {
    let mut tallies = Vec::with_capacity(searchers.len());
    let mut i = 0;
    for &s in searchers {
        let start = i;
        while i < entries.len() && entries[i].searcher == s {
            i += 1;
        }
        tallies.push(SearcherTally {
            searcher: s,
            found: i - start,
            filtered: filtered(s),
        });
    }
    tallies
}

/// Candidate scan with global knowledge of the road.
pub fn scan_centralized(world: &WorldState, params: &FormationParams) -> CandidateScan {
    let searchers = world.searchers();
    let targets = world.targets();
    let entries = candidates_between(&searchers, &targets, params);
    let unavailable = world
        .vehicles
        .values()
        .filter(|v| !v.can_be_target())
        .count();
    let ids: Vec<VehicleId> = searchers.iter().map(|s| s.id).collect();
    let tallies = tally(&entries, &ids, |_| unavailable);
    CandidateScan { entries, tallies }
}

pub fn collect_candidates_centralized(
    world: &WorldState,
    params: &FormationParams,
) -> Vec<CandidateEntry> {
    scan_centralized(world, params).entries
}

/// Candidate scan restricted to entities whose front is within communication range.
pub fn scan_distributed(
    ego: VehicleId,
    world: &WorldState,
    params: &FormationParams,
) -> Result<CandidateScan> {
    let vehicle = world.vehicles.get(&ego).ok_or(Error::UnknownVehicle(ego))?;
    if !vehicle.can_search() {
        return Err(Error::Unavailable(ego));
    }
    let origin = vehicle.position;
    let in_range = |p: f64| (p - origin).abs() <= params.comm_range;
    let me = PlatoonableEntity::individual(ego, vehicle.desired_speed, origin);
    let targets: Vec<PlatoonableEntity> = world
        .targets()
        .into_iter()
        .filter(|t| t.id != ego && in_range(t.front_position))
        .collect();
    let filtered = world
        .vehicles
        .values()
        .filter(|v| v.id != ego && !v.can_be_target() && in_range(v.position))
        .count();
    let entries = candidates_between(&[me], &targets, params);
    let tallies = tally(&entries, &[ego], |_| filtered);
    Ok(CandidateScan { entries, tallies })
}

pub fn collect_candidates_distributed(
    ego: VehicleId,
    world: &WorldState,
    params: &FormationParams,
) -> Result<Vec<CandidateEntry>> {
    Ok(scan_distributed(ego, world, params)?.entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScenarioConfig;
    use crate::testing::{four_vehicle_params, four_vehicle_world};

    fn pairs(entries: &[CandidateEntry]) -> Vec<(u32, u32)> {
        entries.iter().map(|e| (e.searcher.0, e.target.0)).collect()
    }

    #[test]
    fn four_vehicle_candidates() {
        let world = four_vehicle_world();
        let scan = scan_centralized(&world, &four_vehicle_params());
        assert_eq!(
            pairs(&scan.entries),
            vec![(13, 5), (20, 5), (20, 13), (37, 5), (37, 13), (37, 20)]
        );
        let totals: Vec<f64> = scan.entries.iter().map(|e| e.deviation.total).collect();
        for (got, want) in totals.iter().zip([0.519, 0.31, 0.188, 0.66, 0.242, 0.33]) {
            assert!((got - want).abs() < 1.5e-3, "{got} vs {want}");
        }
        assert_eq!(scan.found(), 6);
        assert_eq!(scan.filtered(), 0);
        assert_eq!(scan.tallies.len(), 4);
    }

    #[test]
    fn empty_and_single_vehicle_worlds() {
        let mut world = WorldState::new(ScenarioConfig::desk());
        let p = FormationParams::default();
        assert!(collect_candidates_centralized(&world, &p).is_empty());
        world.insert_individual(30.0, 100.0, 0);
        assert!(collect_candidates_centralized(&world, &p).is_empty());
    }

    #[test]
    fn distributed_scan_respects_comm_range() {
        let world = four_vehicle_world();
        let mut p = four_vehicle_params();
        p.comm_range = 500.0;
        let e = collect_candidates_distributed(VehicleId(37), &world, &p).unwrap();
        assert_eq!(pairs(&e), vec![(37, 5), (37, 13), (37, 20)]);
        p.comm_range = 250.0;
        let e = collect_candidates_distributed(VehicleId(37), &world, &p).unwrap();
        assert_eq!(pairs(&e), vec![(37, 13), (37, 20)]);
        p.comm_range = 10.0;
        assert!(collect_candidates_distributed(VehicleId(37), &world, &p)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn distributed_scan_rejects_unavailable_ego() {
        let mut world = four_vehicle_world();
        world.form_platoon(&[VehicleId(13), VehicleId(20)]).unwrap();
        let p = four_vehicle_params();
        assert!(matches!(
            collect_candidates_distributed(VehicleId(20), &world, &p),
            Err(Error::Unavailable(_))
        ));
    }

    #[test]
    fn followers_are_filtered_not_found() {
        let mut world = WorldState::new(ScenarioConfig::desk());
        let p = FormationParams::default();
        let s = world.insert_individual(30.0, 0.0, 0);
        let a = world.insert_individual(30.0, 300.0, 1);
        let b = world.insert_individual(30.0, 290.0, 1);
        let c = world.insert_individual(30.0, 280.0, 1);
        world.form_platoon(&[a, b, c]).unwrap();
        let scan = scan_centralized(&world, &p);
        assert_eq!(
            scan.tallies,
            vec![SearcherTally {
                searcher: s,
                found: 1,
                filtered: 2
            }]
        );
        assert_eq!(scan.entries[0].target, a);
    }

    #[test]
    fn world_of_followers_finds_nothing() {
        let mut world = WorldState::new(ScenarioConfig::desk());
        let a = world.insert_individual(30.0, 300.0, 1);
        let b = world.insert_individual(30.0, 290.0, 1);
        world.form_platoon(&[a, b]).unwrap();
        let scan = scan_centralized(&world, &FormationParams::default());
        assert_eq!(scan.found(), 0);
    }
}
