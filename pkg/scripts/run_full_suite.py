"""Run the full deterministic suite and the Monte Carlo check, saving both reports.

Usage: python scripts/run_full_suite.py [outdir]
"""

import sys
from pathlib import Path

from wiener_gfft.suite import SuiteConfig, mc_check, run_suite


def main(outdir="reports"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = SuiteConfig()
    verify = run_suite(cfg)
    (out / "verify.json").write_text(verify.to_json() + "\n")
    print(verify.to_text())
    mc = mc_check(cfg)
    (out / "mc_check.json").write_text(mc.to_json() + "\n")
    print(mc.to_text())
    return max(verify.exit_status, mc.exit_status)


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
