#!/usr/bin/env python3
"""Regenerate the canonical benchmark CSVs under data/.

Two public datasets are used by the example configs and the acceptance suite:

  * cmc: UCI Contraceptive Method Choice, via the PMLB mirror
    (order-preserving integer recode of the UCI file, 1473 rows).
    The three-class target (0 none / 1 long-term / 2 short-term) is merged
    to binary "uses contraception" (1 if target >= 1), 844 ones / 629 zeros.
  * breast_cancer: Ljubljana breast cancer (286 rows, original labels).
    Missing cells ('nan' in the mirror) become empty strings; the class
    column becomes binary "recurrence" (recurrence-events -> 1).

Run with no arguments to download, or --from-dir DIR if the raw files were
fetched by other means. Raw downloads are checksum-verified before use.
"""

import argparse
import csv
import gzip
import hashlib
import io
import sys
import urllib.request
from pathlib import Path

RAWS = {
    "cmc": {
        "url": "https://raw.githubusercontent.com/EpistasisLab/pmlb/master/datasets/contraceptive_method/contraceptive_method.tsv.gz",
        "file": "contraceptive_method.tsv.gz",
        "sha256": "713cf4ebab2cc2c3ebbc31fa42159f16df41a345eb8588e11b680dafc46b3103",
    },
    "breast_cancer": {
        "url": "https://raw.githubusercontent.com/jbrownlee/Datasets/master/breast-cancer.csv",
        "file": "breast-cancer.csv",
        "sha256": "4523656d14e91168a602301490a8c89674a9b14384c29a5f652ba1a2bec844a9",
    },
}

CMC_HEADER = [
    "wife_age", "wife_education", "husband_education", "num_children",
    "wife_religion", "wife_works", "husband_occupation", "standard_of_living",
    "media_exposure", "contraceptive_use",
]

BC_HEADER = [
    "age", "menopause", "tumor_size", "inv_nodes", "node_caps",
    "deg_malig", "breast", "breast_quad", "irradiat", "recurrence",
]


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def obtain(name: str, from_dir: Path | None) -> bytes:
    spec = RAWS[name]
    if from_dir is not None:
        data = (from_dir / spec["file"]).read_bytes()
    else:
        with urllib.request.urlopen(spec["url"]) as r:
            data = r.read()
    got = sha256(data)
    if got != spec["sha256"]:
        sys.exit(f"{name}: checksum mismatch ({got}, expected {spec['sha256']})")
    return data


def write_cmc(raw: bytes, out: Path) -> None:
    text = gzip.decompress(raw).decode()
    rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
    head, body = rows[0], rows[1:]
    assert head[-1] == "target" and len(head) == 10, head
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CMC_HEADER)
        for r in body:
            w.writerow(r[:-1] + ["1" if int(r[-1]) >= 1 else "0"])
    print(f"wrote {out} ({len(body)} rows)")


def write_breast_cancer(raw: bytes, out: Path) -> None:
    rows = list(csv.reader(io.StringIO(raw.decode())))
    assert len(rows[0]) == 10, rows[0]
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(BC_HEADER)
        for r in rows:
            vals = [("" if v == "nan" else v.strip("'")) for v in r[:-1]]
            vals.append("1" if r[-1].strip("'") == "recurrence-events" else "0")
            w.writerow(vals)
    print(f"wrote {out} ({len(rows)} rows)")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--from-dir", type=Path, default=None,
                    help="directory holding pre-downloaded raw files")
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_cmc(obtain("cmc", args.from_dir), args.out_dir / "cmc.csv")
    write_breast_cancer(obtain("breast_cancer", args.from_dir), args.out_dir / "breast_cancer.csv")


if __name__ == "__main__":
    main()
