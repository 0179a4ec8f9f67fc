"""Solves the exported integer programs with HiGHS and certifies the schedules via the CLI."""

import re
import subprocess
import sys
import tempfile
from pathlib import Path

import highspy

EXPECTED = {"const-uni": -120, "dec-div": 332, "dec-uni": -45, "inc-div": 242, "inc-uni": -132}


def main() -> int:
    cli = sys.argv[1]
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for name, want in EXPECTED.items():
            lp = Path(tmp) / f"{name}.lp"
            sol = Path(tmp) / f"{name}.sol"
            subprocess.run([cli, "solve", "--scenario", name, "--export-ip", str(lp)], check=True,
                           stdout=subprocess.DEVNULL)
            h = highspy.Highs()
            h.setOptionValue("output_flag", False)
            h.readModel(str(lp))
            h.run()
            objective = h.getInfo().objective_function_value
            h.writeSolution(str(sol), 0)
            out = subprocess.run([cli, "solve", "--scenario", name, "--import-solution", str(sol)], check=True,
                                 capture_output=True, text=True).stdout
            match = re.search(r"total reward (-?[0-9.]+)", out)
            certified = float(match.group(1)) if match else None
            ok = round(objective) == want and certified == want
            failures += not ok
            print(f"{'ok' if ok else 'MISMATCH'} {name}: MILP {objective:g}, certificate {certified}, expected {want}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
