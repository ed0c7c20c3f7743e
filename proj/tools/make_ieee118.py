#!/usr/bin/env python3
"""Writes data/cases/ieee118.m from PYPOWER's copy of the IEEE 118-bus case.

Only the columns the DC dynamic model reads are kept. Units with zero active
dispatch (synchronous condensers) are written out of service, so their
buses are treated as load buses. Dynamic parameters follow the machine
rating: H = 4 s, 5 % droop, unit damping, integral gain 0.1 per unit of
rating. A fixed share of each bus load is marked vulnerable.

    pip install pypower
    python3 tools/make_ieee118.py > data/cases/ieee118.m
"""
import math
import sys

from pypower.case118 import case118

H_SECONDS = 4.0
DROOP = 0.05
KI_PER_RATING = 0.1
VULNERABLE_SHARE = 0.3


def main():
    c = case118()
    base = c["baseMVA"]
    ws = 2 * math.pi * 60.0
    out = sys.stdout
    out.write("function mpc = ieee118\n")
    out.write("% IEEE 118-bus test case, DC columns only (from PYPOWER case118).\n")
    out.write("% Zero-dispatch units are marked out of service (status 0).\n")
    out.write("mpc.baseMVA = %g;\nmpc.nominal_hz = 60;\n\n" % base)

    out.write("%% bus_i type Pd\nmpc.bus = [\n")
    for r in c["bus"]:
        out.write("\t%d\t%d\t%g;\n" % (r[0], r[1], r[2]))
    out.write("];\n\n")

    out.write("%% bus Pg Qg Qmax Qmin Vg mBase status Pmax\nmpc.gen = [\n")
    live = []
    for r in c["gen"]:
        status = 1 if r[1] > 0 else 0
        if status:
            live.append((int(r[0]), r[8]))
        out.write("\t%d\t%g\t0\t0\t0\t1\t%g\t%d\t%g;\n" % (r[0], r[1], r[6], status, r[8]))
    out.write("];\n\n")

    out.write("%% fbus tbus r x b rateA rateB rateC ratio angle status\nmpc.branch = [\n")
    for r in c["branch"]:
        out.write("\t%d\t%d\t%g\t%g\t0\t0\t0\t0\t0\t0\t%d;\n" % (r[0], r[1], r[2], r[3], r[10]))
    out.write("];\n\n")

    out.write("%% bus M D KP KI  (per unit on the system base)\nmpc.gendyn = [\n")
    for bus, pmax in sorted(live):
        s = pmax / base
        out.write("\t%d\t%.6g\t%.6g\t%.6g\t%.6g;\n" % (
            bus, 2 * H_SECONDS * s / ws, s / ws, s / (DROOP * ws), KI_PER_RATING * s))
    out.write("];\n\n")

    gen_buses = {b for b, _ in live}
    out.write("%% bus vulnerable_MW\nmpc.vulnerable = [\n")
    for r in c["bus"]:
        if int(r[0]) not in gen_buses and r[2] > 0:
            out.write("\t%d\t%g;\n" % (r[0], round(VULNERABLE_SHARE * r[2], 6)))
    out.write("];\n")


if __name__ == "__main__":
    main()
