# Copyright 2026 The echoloc Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recompute summary.csv from report.csv and check that the two agree.

Values in both files carry nine significant digits, so comparisons allow
for that rounding.
"""

import csv
import math
import sys
from pathlib import Path


def main() -> int:
    out_dir = Path(sys.argv[1])
    with open(out_dir / "report.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    with open(out_dir / "summary.csv", newline="") as f:
        summary = next(csv.DictReader(f))

    errors = [float(r["error_m"]) for r in rows]
    n = len(errors)
    mean = sum(errors) / n
    std = math.sqrt(sum((e - mean) ** 2 for e in errors) / n)
    conv = sum(int(r["converged"]) for r in rows) / n

    checks = [
        ("frames", n, int(summary["frames"])),
        ("mean_error_m", mean, float(summary["mean_error_m"])),
        ("std_error_m", std, float(summary["std_error_m"])),
        ("convergence_rate", conv, float(summary["convergence_rate"])),
    ]
    ok = True
    for name, want, got in checks:
        if not math.isclose(want, got, rel_tol=1e-7, abs_tol=1e-9):
            print(f"{name}: report gives {want}, summary has {got}")
            ok = False
    for r in rows:
        gt = [float(r[k]) for k in ("gt_x", "gt_y", "gt_z")]
        est = [float(r[k]) for k in ("est_x", "est_y", "est_z")]
        if not math.isclose(math.dist(gt, est), float(r["error_m"]), abs_tol=1e-7):
            print(f"frame {r['frame']}: error_m does not match the positions")
            ok = False
    print("summary consistent" if ok else "summary inconsistent")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
