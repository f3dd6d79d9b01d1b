"""Synthetic borough table shaped like the London stop-and-search application.

Confounders are independent clipped-normal draws matched to published
ranges and moments. The treatment is unrelated to the outcome, so the true
effect is zero.
"""

import numpy as np

# (column, min, max, mean, sd)
COLUMNS = [
    ("pop_density", 2198, 15703, 7291, 3670.89),
    ("prop_male", 0.47, 0.55, 0.49, 0.01),
    ("prop_migrant", 0.57, 6.42, 1.94, 1.30),
    ("n_unemployed", 2653, 123179, 83149, 24860.92),
    ("prop_unhealthy", 2.72, 5.55, 4.23, 0.63),
    ("prop_disabled", 21.41, 32.38, 26.41, 2.37),
    ("prop_students", 13.90, 28.54, 21.90, 2.53),
    ("prop_no_car", 21.53, 77.20, 42.90, 16.71),
    ("prop_renting", 29.54, 74.26, 53.37, 13.84),
    ("room_occupation", 9.39, 45.02, 27.40, 7.62),
    ("prop_higher_ed", 29.52, 74.18, 47.95, 9.93),
    ("prop_deprived", 38.96, 62.41, 51.46, 5.45),
    ("prop_lacking_care", 91.30, 93.70, 92.29, 0.62),
    ("prop_low_cohesion", 33.01, 54.54, 42.87, 5.61),
    ("prop_unstable", 13.93, 43.27, 30.55, 6.34),
    ("prop_greenspace", 0.01, 0.487, 0.17, 0.12),
    ("prop_under18", 0.28, 0.49, 0.37, 0.05),
    ("area_km2", 2.90, 150.14, 47.68, 32.75),
    ("road_density", 61.23, 258.62, 128.08, 41.78),
    ("manufacturing_density", 3.0, 94.0, 13.82, 16.15),
    ("n_residential", 420, 3816, 1094, 603.35),
    ("residential_density", 6.0, 401.0, 47.88, 73.89),
    ("n_manufacturing", 195, 730, 401, 127.83),
    ("n_transport_stations", 282, 1821, 957.40, 353.16),
    ("transport_density", 10.0, 97.0, 13.82, 16.02),
    ("n_pubs", 28, 447, 123.10, 82.46),
    ("pub_density", 0.62, 76.10, 6.37, 13.39),
    ("n_retail", 486, 3536, 1282, 522.86),
    ("retail_density", 8.0, 167.0, 44.94, 42.29),
    ("n_schools", 8, 171, 102.20, 29.56),
    ("school_density", 0.85, 8.00, 2.98, 1.83),
]
N_BOROUGHS = 33
DEFAULT_SEED = 20240607


def _draw(rng, lo, hi, mean, sd, n):
    # clipped normal; heavy right skews in the table are not reproduced
    return np.clip(rng.normal(mean, sd, n), lo, hi)


def synthetic_rows(seed=DEFAULT_SEED, n=N_BOROUGHS):
    """Header and string rows of a null-effect borough table."""
    rng = np.random.default_rng(seed)
    treatment = _draw(rng, 1.89, 17.59, 12.64, 6.92, n)
    di = _draw(rng, 1.66, 12.58, 4.12, 2.46, n)
    cols = [_draw(rng, lo, hi, m, s, n) for _, lo, hi, m, s in COLUMNS]
    header = ["name", "di", "treatment"] + [c[0] for c in COLUMNS]
    rows = []
    for i in range(n):
        row = [f"Borough {i + 1:02d}", f"{di[i]:.4g}", f"{treatment[i]:.4g}"]
        row += [f"{c[i]:.6g}" for c in cols]
        rows.append(row)
    return header, rows


def write_synthetic(path, seed=DEFAULT_SEED, n=N_BOROUGHS):
    header, rows = synthetic_rows(seed, n)
    lines = [",".join(header)] + [",".join(r) for r in rows]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
