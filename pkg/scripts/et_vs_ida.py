"""ET curve of a bilinear SDOF against an IDA over synthetic records.

Runs the desk-scale generation (or loads --etef), then compares the ET curve
with the IDA median for several post-yield ratios and record-suite seeds.
Prints the correlation and mean relative error of each combination and
writes the curves of the first combination as CSV.

    python3 scripts/et_vs_ida.py --out runs/et_vs_ida --ratios 0 0.05 0.1 0.2 --suites 0 1 2 3 4
"""

import argparse
import json
from pathlib import Path

from etforge.analysis import (
    compare_et_vs_ida,
    run_et_analysis,
    run_ida,
    synthetic_records,
    write_et_csv,
    write_ida_csv,
)
from etforge.generator import desk_problem, generate
from etforge.sdof import SDOFModel
from etforge.signal import read_record_csv, write_record_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/et_vs_ida")
    ap.add_argument("--etef", help="record CSV; generated when omitted")
    ap.add_argument("--period", type=float, default=0.5)
    ap.add_argument("--yield-level", type=float, default=0.7, help="yield strength as a fraction of the target Sa")
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.1])
    ap.add_argument("--suites", type=int, nargs="+", default=[0])
    ap.add_argument("--records", type=int, default=5)
    ap.add_argument("--edp", default="roof")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    problem = desk_problem()
    if args.etef:
        etef = read_record_csv(args.etef)
    else:
        etef, _ = generate(problem)
        write_record_csv(etef, out / f"{etef.name}.csv")
    profile = problem.profile
    base = problem.target.base
    lambdas = [0.25 * k for k in range(1, 9)]

    rows = []
    for r in args.ratios:
        model = SDOFModel(args.period, 0.05, "bilinear",
                          yield_accel=args.yield_level * float(base.accel(args.period)), post_yield_ratio=r)
        et = run_et_analysis(model, etef, args.edp, profile)
        for suite in args.suites:
            records = synthetic_records(base, count=args.records, seed=suite)
            ida = run_ida(model, records, lambdas, args.edp)
            rep = compare_et_vs_ida(et, profile, ida)
            rows.append({"post_yield_ratio": r, "suite": suite, **rep})
            print(f"r={r:<5} suite={suite}  pearson {rep['correlation']:.3f}  "
                  f"mean rel. error {rep['mean_relative_error']:.3f}")
            if len(rows) == 1:
                write_et_csv(et, out / "et_curve.csv", profile)
                write_ida_csv(ida, out / "ida.csv")
    (out / "comparison.json").write_text(json.dumps(rows, indent=2, default=float) + "\n")


if __name__ == "__main__":
    main()
