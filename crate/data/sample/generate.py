"""Regenerates the synthetic FluSight-format fixtures in this directory.

The files mimic the layout of 2016/17 national submissions (all seven
targets, point rows, 131 wILI bins, 33 week bins plus "none" for onset).
The probabilities and the truth values are made up; they are not real
forecasts or surveillance data.
"""
import math
from pathlib import Path

HERE = Path(__file__).parent
TEAM = "SYNTH"
ISSUES = [(2016, 49), (2016, 50), (2017, 6), (2017, 7)]
SEASON_WEEKS = list(range(40, 53)) + list(range(1, 21))


def discretized_normal(centers, mean, sd):
    w = [math.exp(-0.5 * ((c - mean) / sd) ** 2) for c in centers]
    s = sum(w)
    return [x / s for x in w]


def rounded(ps):
    out = [round(p, 6) for p in ps]
    return out


def wili_rows(target, mean, sd):
    centers = [k / 10 + 0.05 for k in range(130)] + [14.0]
    ps = rounded(discretized_normal(centers, mean, sd))
    rows = []
    for k, p in enumerate(ps):
        lo = k / 10 if k < 130 else 13
        hi = (k + 1) / 10 if k < 130 else 100
        rows.append(f"US National,{target},Bin,percent,{lo:g},{hi:g},{p}")
    rows.append(f"US National,{target},Point,percent,NA,NA,{mean:.1f}")
    return rows


def week_rows(target, mean_idx, sd, none_mass=None):
    ps = discretized_normal(range(len(SEASON_WEEKS)), mean_idx, sd)
    if none_mass is not None:
        ps = [p * (1 - none_mass) for p in ps]
    ps = rounded(ps)
    rows = [
        f"US National,{target},Bin,week,{w},{w + 1},{p}"
        for w, p in zip(SEASON_WEEKS, ps)
    ]
    if none_mass is not None:
        rows.append(f"US National,{target},Bin,week,none,none,{none_mass}")
    rows.append(f"US National,{target},Point,week,NA,NA,{SEASON_WEEKS[round(mean_idx)]}")
    return rows


def main():
    header = "Location,Target,Type,Unit,Bin_start_incl,Bin_end_notincl,Value"
    for i, (year, week) in enumerate(ISSUES):
        late = year == 2017
        rows = [header]
        base = 2.2 + 0.3 * i if not late else 4.6 + 0.2 * (i - 2)
        for h in range(1, 5):
            rows += wili_rows(f"{h} wk ahead", base + 0.15 * h, 0.25 + 0.2 * h)
        rows += week_rows("Season onset", 10.4 + 0.3 * i, 1.1 - 0.2 * i, 0.01)
        rows += week_rows("Season peak week", 18.3 + 0.2 * i, 2.4 - 0.3 * i)
        rows += wili_rows("Season peak percentage", 4.9 + 0.05 * i, 0.6 - 0.1 * i)
        name = f"EW{week:02d}-{year}-{TEAM}.csv"
        (HERE / name).write_text("\n".join(rows) + "\n")

    truth = ["Location,Target,Forecast_week,Value"]
    observed = {(2016, 49): [2.4, 2.6, 2.9, 3.3], (2016, 50): [2.6, 2.9, 3.3, 3.4],
                (2017, 6): [5.0, 4.8, 4.5, 4.1], (2017, 7): [4.8, 4.5, 4.1, 3.6]}
    for (year, week), vals in observed.items():
        for h, v in enumerate(vals, start=1):
            truth.append(f"US National,{h} wk ahead,{year}-EW{week:02d},{v}")
    truth.append("US National,Season onset,,2016-EW50")
    truth.append("US National,Season peak week,,2017-EW06")
    truth.append("US National,Season peak percentage,,5.1")
    (HERE / "truth.csv").write_text("\n".join(truth) + "\n")

    windows = ["Target,Issue_week"]
    for target in ["1 wk ahead", "2 wk ahead", "3 wk ahead", "4 wk ahead",
                   "Season peak week", "Season peak percentage"]:
        for year, week in ISSUES:
            windows.append(f"{target},{year}-EW{week:02d}")
    for year, week in ISSUES[:2]:
        windows.append(f"Season onset,{year}-EW{week:02d}")
    (HERE / "windows.csv").write_text("\n".join(windows) + "\n")


if __name__ == "__main__":
    main()
