#!/usr/bin/env python3
# tools/compare_fits.py
"""Side-by-side posterior table for fit directories, with DIC when a dic.json is given.

    python tools/compare_fits.py out/fit-spatial out/fit-diffusion --dic out/dic/dic.json
"""
import argparse
import json
import sys
from pathlib import Path

import pandas as pd

SCALARS = ("mu", "beta", "beta_tilde", "sigma", "sigma_tilde", "tau2", "tau")


def load_summary(run: Path) -> dict:
    path = run / "summary.json"
    if not path.is_file():
        print(f"ERROR: {path} not found", file=sys.stderr)
        sys.exit(3)
    return json.loads(path.read_text(encoding="utf-8"))


def table(runs, dic_path=None) -> pd.DataFrame:
    dic = {}
    if dic_path is not None:
        dic = json.loads(Path(dic_path).read_text(encoding="utf-8"))["runs"]
    rows = []
    for run in runs:
        summary = load_summary(Path(run))
        row = {"run": str(run), "model": summary["model"], "draws": summary["draws"]}
        for name in SCALARS:
            p = summary["parameters"].get(name)
            if p is not None:
                row[name] = f"{p['mean']:.2f} ({p['sd']:.2f})"
        if str(run) in dic:
            row["DIC"] = round(dic[str(run)]["dic"], 2)
            row["pD"] = round(dic[str(run)]["p_d"], 2)
        rows.append(row)
    return pd.DataFrame(rows).fillna("-")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("runs", nargs="+", type=Path)
    ap.add_argument("--dic", type=Path)
    ap.add_argument("--csv", type=Path, help="also write the table here")
    args = ap.parse_args()

    frame = table(args.runs, args.dic)
    print(frame.to_string(index=False))
    if args.csv:
        frame.to_csv(args.csv, index=False, lineterminator="\n")
        print("\nSaved:", args.csv)


if __name__ == "__main__":
    main()
