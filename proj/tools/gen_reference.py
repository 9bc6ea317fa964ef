#!/usr/bin/env python3
"""Regenerate the frozen SGP4 reference fixtures under tests/data.

Uses the `sgp4` package (Vallado's C++ SGP4 behind a Python wrapper) as the
independent oracle. The C++ test suites only read the CSVs this writes; they
never call Python.

    pip install sgp4
    python3 tools/gen_reference.py
"""

import csv
import math
import pathlib

from sgp4.api import Satrec, WGS72, accelerated

DATA = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"


def checksum(line):
    total = 0
    for c in line[:68]:
        if c.isdigit():
            total += int(c)
        elif c == "-":
            total += 1
    return total % 10


def read_verification(path):
    """Yields (line1, line2, start, stop, step) for every catalogue entry."""
    lines = [l.rstrip("\n") for l in open(path) if not l.startswith("#") and l.strip()]
    for i in range(0, len(lines), 2):
        l1, l2 = lines[i], lines[i + 1]
        start, stop, step = (float(x) for x in l2[69:].split())
        yield l1, l2[:69], start, stop, step


def verification_grid(start, stop, step):
    """Time grid used by the published catalogue output: epoch first, then
    start..stop by step with the last point clipped to stop."""
    grid = [0.0]
    t = start
    if abs(t) > 1e-8:
        grid.append(t)
    while t < stop:
        t = t + step
        if t > stop:
            t = stop
        grid.append(t)
    return grid


def fmt(x):
    return repr(float(x))


def write_catalogue_reference():
    out = DATA / "sgp4_reference.csv"
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["catalog", "t_min", "x_km", "y_km", "z_km", "vx", "vy", "vz", "error"])
        for l1, l2, start, stop, step in read_verification(DATA / "sgp4_verification.tle"):
            if checksum(l1) != int(l1[68]) or checksum(l2) != int(l2[68]):
                continue
            sat = Satrec.twoline2rv(l1, l2, WGS72)
            if sat.method != "n":
                continue
            for t in verification_grid(start, stop, step):
                e, r, v = sat.sgp4_tsince(t)
                if e != 0 and e != 6:
                    w.writerow([l1[2:7], fmt(t), "", "", "", "", "", "", e])
                    break
                w.writerow([l1[2:7], fmt(t)] + [fmt(c) for c in r] + [fmt(c) for c in v] + [e])
                if e != 0:
                    break
    print("wrote", out)


def write_tle_fields():
    out = DATA / "tle_fields.csv"
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["catalog", "no_kozai", "ecco", "inclo", "nodeo", "argpo", "mo", "bstar",
                    "ndot", "nddot", "epochyr", "epochdays", "jdsatepoch", "jdsatepochF"])
        files = [DATA / "sgp4_verification.tle"]
        for l1, l2, *_ in read_verification(files[0]):
            if checksum(l1) != int(l1[68]) or checksum(l2) != int(l2[68]):
                continue
            s = Satrec.twoline2rv(l1, l2, WGS72)
            w.writerow([l1[2:7]] + [fmt(x) for x in (
                s.no_kozai, s.ecco, s.inclo, s.nodeo, s.argpo, s.mo, s.bstar, s.ndot, s.nddot)]
                + [s.epochyr, fmt(s.epochdays), fmt(s.jdsatepoch), fmt(s.jdsatepochF)])
    print("wrote", out)


def write_leo48_reference():
    out = DATA / "leo48_reference.csv"
    tles = [l.rstrip("\n") for l in open(DATA / "leo48.tle") if l.strip()]
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["catalog", "t_min", "x_km", "y_km", "z_km", "vx", "vy", "vz", "error"])
        for i in range(0, len(tles), 3):
            name, l1, l2 = tles[i], tles[i + 1], tles[i + 2]
            assert checksum(l1) == int(l1[68]) and checksum(l2) == int(l2[68]), name
            sat = Satrec.twoline2rv(l1, l2, WGS72)
            assert sat.method == "n", name
            for k in range(0, 48 * 60 + 1):
                t = float(k)
                e, r, v = sat.sgp4_tsince(t)
                assert e == 0, (name, t, e)
                w.writerow([l1[2:7], fmt(t)] + [fmt(c) for c in r] + [fmt(c) for c in v] + [e])
    print("wrote", out)


if __name__ == "__main__":
    assert accelerated, "expected the compiled Vallado backend"
    write_catalogue_reference()
    write_tle_fields()
    write_leo48_reference()
