"""Prepare the public two-year recidivism export for training.

Usage:
  python3 scripts/prepare_compas.py --raw compas-scores-two-years.csv --out compas.csv

Applies the standard cleaning of that export: screening date within 30
days of arrest, unresolved recidivism flags dropped, ordinary-traffic
charges dropped, rows without a score dropped, and only the five named
race categories kept. Writes a numeric feature table with a binary
"label" column (two-year recidivism) that load_dataset() can read.
"""

import argparse

import pandas as pd

RACES = ["African-American", "Caucasian", "Hispanic", "Asian",
         "Native American"]


def prepare(raw_path: str) -> pd.DataFrame:
    df = pd.read_csv(raw_path)
    df = df[(df.days_b_screening_arrest <= 30)
            & (df.days_b_screening_arrest >= -30)
            & (df.is_recid != -1)
            & (df.c_charge_degree != "O")
            & df.score_text.notna()]
    df = df[df.race.isin(RACES)]
    used = ["sex", "age", "race", "juv_fel_count", "juv_misd_count",
            "juv_other_count", "priors_count", "c_charge_degree",
            "two_year_recid"]
    df = df[used].dropna()

    out = pd.DataFrame()
    out["sex_male"] = (df.sex == "Male").astype(int)
    out["age"] = df.age.astype(int)
    for race in RACES:
        key = "race_" + race.lower().replace("-", "_").replace(" ", "_")
        out[key] = (df.race == race).astype(int)
    out["juv_fel_count"] = df.juv_fel_count.astype(int)
    out["juv_misd_count"] = df.juv_misd_count.astype(int)
    out["juv_other_count"] = df.juv_other_count.astype(int)
    out["priors_count"] = df.priors_count.astype(int)
    out["charge_felony"] = (df.c_charge_degree == "F").astype(int)
    out["label"] = df.two_year_recid.astype(int)
    return out


def main():
    ap = argparse.ArgumentParser(
        description="clean the public recidivism export into a feature table")
    ap.add_argument("--raw", required=True, help="raw two-year export csv")
    ap.add_argument("--out", required=True, help="where to write the table")
    args = ap.parse_args()
    table = prepare(args.raw)
    table.to_csv(args.out, index=False)
    print(f"wrote {len(table)} records to {args.out} "
          f"(base rate {table.label.mean():.3f})")


if __name__ == "__main__":
    main()
