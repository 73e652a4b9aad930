//! Summary column subsets matching the published result figures.

pub const FIGURES: std::ops::RangeInclusive<u32> = 3..=13;

const KEY_COLUMNS: [&str; 4] = ["approach", "speed_window", "density", "seed"];

fn data_columns(figure: u32) -> Option<&'static [&'static str]> {
    Some(match figure {
        3 => &["found_mean", "found_std"],
        4 => &["filtered_mean", "filtered_std"],
        5 => &[
            "time_to_platoon_mean",
            "time_to_platoon_std",
            "platooned_share",
        ],
        6 => &[
            "platoon_size_mean",
            "platoon_size_median",
            "platoon_size_q3",
            "platoon_size_max",
            "platoon_share",
        ],
        7 => &["observed_density", "flow", "departure_flow"],
        8 => &["mean_speed"],
        9 => &[
            "deviation_mean",
            "deviation_q1",
            "deviation_median",
            "deviation_q3",
            "abs_deviation_mean",
        ],
        10 => &["window_violation"],
        11 => &[
            "travel_time_ratio_mean",
            "travel_time_ratio_q1",
            "travel_time_ratio_median",
            "travel_time_ratio_q3",
        ],
        12 => &["fuel_l_per_100km_mean", "fuel_l_per_100km_std"],
        13 => &[
            "solve_time_mean",
            "solve_time_std",
            "solve_time_max",
            "gap_max",
        ],
        _ => return None,
    })
}

/// Key columns followed by the data columns of figure `n`.
pub fn figure_columns(figure: u32) -> Option<Vec<&'static str>> {
    data_columns(figure).map(|data| KEY_COLUMNS.iter().chain(data).copied().collect())
}
