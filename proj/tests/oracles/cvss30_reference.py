#!/usr/bin/env python3
"""Independent CVSS v3.0 base-score oracle.

Mirrors the published v3.0 reference calculator (ceil-to-one-decimal round-up)
using Python's decimal-free float arithmetic, the same as the JavaScript
calculator. Prints the frozen table used by the C++ tests; with --all, every base
vector and its score (tests/fixtures/cvss30_all.txt).
"""
import math
import sys

AV = {"N": 0.85, "A": 0.62, "L": 0.55, "P": 0.2}
AC = {"L": 0.77, "H": 0.44}
PR_U = {"N": 0.85, "L": 0.62, "H": 0.27}
PR_C = {"N": 0.85, "L": 0.68, "H": 0.50}
UI = {"N": 0.85, "R": 0.62}
CIA = {"H": 0.56, "L": 0.22, "N": 0.0}


def score(vector):
    parts = dict(p.split(":") for p in vector.split("/")[1:])
    changed = parts["S"] == "C"
    pr = (PR_C if changed else PR_U)[parts["PR"]]
    isc_base = 1 - ((1 - CIA[parts["C"]]) * (1 - CIA[parts["I"]]) * (1 - CIA[parts["A"]]))
    if changed:
        impact = 7.52 * (isc_base - 0.029) - 3.25 * math.pow(isc_base - 0.02, 15)
    else:
        impact = 6.42 * isc_base
    expl = 8.22 * AV[parts["AV"]] * AC[parts["AC"]] * pr * UI[parts["UI"]]
    if impact <= 0:
        return 0.0
    if changed:
        return math.ceil(min(1.08 * (impact + expl), 10) * 10) / 10
    return math.ceil(min(impact + expl, 10) * 10) / 10


def band(s):
    if s == 0:
        return "None"
    if s < 4:
        return "Low"
    if s < 7:
        return "Medium"
    if s < 9:
        return "High"
    return "Critical"


SUITE = [
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:C/C:H/I:H/A:H",
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:N",
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:R/S:C/C:L/I:L/A:N",
    "CVSS:3.0/AV:L/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:N/AC:H/PR:N/UI:N/S:U/C:H/I:N/A:N",
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:N/I:N/A:H",
    "CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:L/I:N/A:N",
    "CVSS:3.0/AV:P/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:N/AC:L/PR:L/UI:N/S:C/C:L/I:L/A:N",
    "CVSS:3.0/AV:N/AC:L/PR:H/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:A/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:N/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H",
    "CVSS:3.0/AV:L/AC:H/PR:H/UI:R/S:C/C:L/I:N/A:N",
    "CVSS:3.0/AV:N/AC:L/PR:H/UI:N/S:U/C:N/I:H/A:N",
    "CVSS:3.0/AV:N/AC:H/PR:N/UI:N/S:U/C:N/I:L/A:N",
    "CVSS:3.0/AV:P/AC:H/PR:H/UI:R/S:U/C:L/I:N/A:N",
    "CVSS:3.0/AV:A/AC:H/PR:L/UI:R/S:C/C:H/I:L/A:L",
]

def every_vector():
    for av in "NALP":
        for ac in "LH":
            for pr in "NLH":
                for ui in "NR":
                    for sc in "UC":
                        for c in "HLN":
                            for i in "HLN":
                                for a in "HLN":
                                    yield f"CVSS:3.0/AV:{av}/AC:{ac}/PR:{pr}/UI:{ui}/S:{sc}/C:{c}/I:{i}/A:{a}"


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "--all":
        for v in every_vector():
            print(f"{v} {score(v):.1f}")
        sys.exit(0)
    for v in SUITE:
        s = score(v)
        print(f'    {{"{v}", {s:.1f}, "{band(s)}"}},')
