#!/usr/bin/env python3
"""Solve an LP/MILP file with HiGHS and write the assignment as JSON.

Output: {"status": ..., "objective": ..., "values": {name: value}}.
Exit status: 0 optimal, 1 infeasible, 2 anything else.
"""
import argparse
import json
import os
import sys
import tempfile


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("-o", "--out", help="write JSON here instead of stdout")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    try:
        import highspy
    except ImportError:
        print(json.dumps({"error": "highspy not installed"}), file=sys.stderr)
        return 2

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("threads", 1)
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print(json.dumps({"error": "cannot read " + args.lp}), file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    doc = {"status": h.modelStatusToString(status).lower()}
    code = 2
    if status == highspy.HighsModelStatus.kOptimal:
        code = 0
        lp = h.getLp()
        sol = h.getSolution()
        doc["objective"] = h.getInfo().objective_function_value
        doc["values"] = dict(zip(lp.col_names_, sol.col_value))
    elif status == highspy.HighsModelStatus.kInfeasible:
        code = 1

    text = json.dumps(doc, sort_keys=True)
    if args.out:
        fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(args.out)))
        with os.fdopen(fd, "w") as f:
            f.write(text + "\n")
        os.replace(tmp, args.out)
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
