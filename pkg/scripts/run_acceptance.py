"""Run the nine acceptance criteria and print one PASS/FAIL line each."""

import runpy
import sys
from pathlib import Path

if __name__ == "__main__":
    target = Path(__file__).resolve().parent.parent / "tests" / "test_acceptance.py"
    sys.argv = [str(target)]
    runpy.run_path(str(target), run_name="__main__")
