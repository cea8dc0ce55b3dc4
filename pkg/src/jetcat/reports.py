"""The stable machine-readable report schema (version jetcat_report_v1).

Every command emits the same top-level keys; rationals are rendered as
"p/q" strings and polynomials through the canonical text form, so reports
are byte-identical across runs with the same inputs and seeds.
"""

from __future__ import annotations

import json
from fractions import Fraction

VERSION = "jetcat_report_v1"


def rational_str(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return "%d/%d" % (q.numerator, q.denominator)


def system_summary(system_file):
    from jetcat.dsl import render_expr

    return {
        "name": system_file.name,
        "base": list(system_file.base_names),
        "fiber": list(system_file.fiber_names),
        "order": system_file.order,
        "equations": [render_expr(system_file, p) for p in system_file.equations],
    }


def base_report(command, system_file=None, order=None, working_order=None):
    return {
        "version": VERSION,
        "command": command,
        "system": system_summary(system_file) if system_file is not None else None,
        "order": order if order is not None else (
            system_file.order if system_file is not None else None
        ),
        "working_order": working_order,
        "tower_sizes": [],
        "status": "ok",
        "method": None,
        "obstructions": [],
        "witnesses": [],
        "laws": {
            "counit": None,
            "coaction": None,
            "beck": None,
            "samples": 0,
            "failures": [],
        },
    }


def attach_verdict(report, verdict, render):
    report["status"] = verdict.status
    report["method"] = verdict.method
    report["working_order"] = verdict.working_order
    report["tower_sizes"] = list(verdict.tower_sizes)
    report["obstructions"] = [render(p) for p in verdict.obstructions]
    report["witnesses"] = [render(p) for p in verdict.witnesses]
    if verdict.reason:
        report["reason"] = verdict.reason
    return report


def attach_laws(report, law_report):
    report["laws"] = {
        "counit": law_report.counit,
        "coaction": law_report.coaction,
        "beck": law_report.beck,
        "samples": law_report.samples,
        "failures": list(law_report.failures),
    }
    return report


def dump(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
