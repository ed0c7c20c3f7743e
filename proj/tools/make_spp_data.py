#!/usr/bin/env python3
"""Writes synthetic SPP-like hourly data for 2019 and 2020.

data/rto/spp_<year>.csv       Mar 1 - Jun 30, local (UTC-6) timestamps
data/rto/spp_mapping.json     column roles for those files
data/profiles/spp_<year>.csv  24-hour mean profile scaled to a 100 MW bus

Wind dominates at night, so the renewable share peaks in the early morning
hours. The 2020 series has lower demand and about 8 points more renewable
share than 2019.

    python3 tools/make_spp_data.py data
"""
import datetime as dt
import json
import math
import os
import sys

import numpy as np

PROFILE_MEAN_MW = 100.0


def series(year, rng):
    start = dt.datetime(year, 3, 1)
    rows = []
    for k in range(122 * 24):
        t = start + dt.timedelta(hours=k)
        h = t.hour
        night = 0.5 * (1 + math.cos(2 * math.pi * (h - 4) / 24))
        day = 0.5 * (1 + math.cos(2 * math.pi * (h - 13) / 24))
        base = 30000.0 if year == 2019 else 28500.0
        load = base * (1 + 0.14 * math.cos(2 * math.pi * (h - 17) / 24)) * (1 + 0.03 * rng.standard_normal())
        share = (0.27 if year == 2019 else 0.35) + 0.17 * night + 0.03 * rng.standard_normal()
        share = min(max(share, 0.05), 0.8)
        solar = load * 0.02 * day
        wind = max(load * share - solar, 0.0)
        rows.append((t.strftime("%Y-%m-%d %H:%M"), load, solar, wind))
    return rows


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data"
    os.makedirs(os.path.join(out, "rto"), exist_ok=True)
    os.makedirs(os.path.join(out, "profiles"), exist_ok=True)
    rng = np.random.default_rng(2020)
    for year in (2019, 2020):
        rows = series(year, rng)
        with open(os.path.join(out, "rto", "spp_%d.csv" % year), "w") as f:
            f.write("Timestamp,Load (MW),Solar (MW),Wind (MW)\n")
            for ts, load, solar, wind in rows:
                f.write("%s,%.1f,%.1f,%.1f\n" % (ts, load, solar, wind))
        load = np.zeros(24)
        ren = np.zeros(24)
        for ts, l, s, w in rows:
            h = int(ts[11:13])
            load[h] += l
            ren[h] += s + w
        scale = PROFILE_MEAN_MW / load.mean()
        with open(os.path.join(out, "profiles", "spp_%d.csv" % year), "w") as f:
            f.write("hour,load_mw,renewable_mw\n")
            for h in range(24):
                f.write("%d,%.4f,%.4f\n" % (h, load[h] * scale, ren[h] * scale))
    with open(os.path.join(out, "rto", "spp_mapping.json"), "w") as f:
        json.dump({"region": "SPP", "timestamp": "Timestamp", "load": "Load (MW)", "solar": "Solar (MW)",
                   "wind": "Wind (MW)", "utc_offset_hours": -6}, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
