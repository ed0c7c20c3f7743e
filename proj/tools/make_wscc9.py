#!/usr/bin/env python3
"""Writes data/cases/wscc9.json and data/cases/wscc9.m.

Topology and loads are the MATPOWER case9 network. The machine parameters
were tuned so that bus 6 is the cheapest place to attack, and its least
effort falls from about 20 MW to under 18 MW as generator 3 loses inertia.

    python3 tools/make_wscc9.py data/cases
"""
import json
import os
import sys

BRANCHES = [(1, 4, 0.0576), (4, 5, 0.092), (5, 6, 0.17), (3, 6, 0.0586), (6, 7, 0.1008),
            (7, 8, 0.072), (8, 2, 0.0625), (8, 9, 0.161), (9, 4, 0.085)]
SECURE_MW = {4: 0, 5: 90, 6: 0, 7: 100, 8: 0, 9: 125}
VULNERABLE_MW = 30.0
# bus, M, D, KP, KI
MACHINES = [
    (1, 0.1254, 0.00641319, 0.00521166, 0.00186047),
    (2, 0.0340, 0.00888201, 0.189522, 0.0163592),
    (3, 0.0160, 0.000110854, 0.00867510, 0.430988),
]


def native():
    return {
        "name": "wscc9",
        "base_mva": 100.0,
        "nominal_hz": 60.0,
        "buses": [{"id": b, "kind": "generator" if b <= 3 else "load"} for b in range(1, 10)],
        "branches": [{"from": f, "to": t, "x": x} for f, t, x in BRANCHES],
        "generators": [{"bus": b, "inertia": m, "damping": d, "kp": kp, "ki": ki}
                       for b, m, d, kp, ki in MACHINES],
        "loads": [{"bus": b, "secure_mw": p, "vulnerable_mw": VULNERABLE_MW}
                  for b, p in SECURE_MW.items()],
    }


def matpower():
    lines = ["function mpc = wscc9",
             "% WSCC 9-bus case (MATPOWER case9 topology) with tuned machine parameters.",
             "mpc.baseMVA = 100;", "mpc.nominal_hz = 60;", "",
             "%% bus_i type Pd", "mpc.bus = ["]
    for b in range(1, 10):
        lines.append("\t%d\t%d\t%g;" % (b, 3 if b == 1 else 2 if b <= 3 else 1, SECURE_MW.get(b, 0)))
    lines += ["];", "", "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax", "mpc.gen = ["]
    for b, *_ in MACHINES:
        lines.append("\t%d\t0\t0\t0\t0\t1\t100\t1\t300;" % b)
    lines += ["];", "", "%% fbus tbus r x b rateA rateB rateC ratio angle status", "mpc.branch = ["]
    for f, t, x in BRANCHES:
        lines.append("\t%d\t%d\t0\t%g\t0\t0\t0\t0\t0\t0\t1;" % (f, t, x))
    lines += ["];", "", "%% bus M D KP KI", "mpc.gendyn = ["]
    for m in MACHINES:
        lines.append("\t%d\t%g\t%g\t%g\t%g;" % m)
    lines += ["];", "", "%% bus vulnerable_MW", "mpc.vulnerable = ["]
    for b in SECURE_MW:
        lines.append("\t%d\t%g;" % (b, VULNERABLE_MW))
    lines += ["];", ""]
    return "\n".join(lines)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/cases"
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "wscc9.json"), "w") as f:
        json.dump(native(), f, indent=2)
        f.write("\n")
    with open(os.path.join(out, "wscc9.m"), "w") as f:
        f.write(matpower())


if __name__ == "__main__":
    main()
