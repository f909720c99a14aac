"""Print residuals of the built-in kernel families over a range of grid sizes."""

from wiener_gfft.kernels import Grid
from wiener_gfft.suite import list_families

for n in (64, 256, 1024, 4096):
    for row in list_families(None, Grid(1.0, n)):
        worst = max(row["residuals"])
        print(f"n={n:5d}  {row['name']:16s}  max residual {worst:.2e}  "
              f"{'ok' if row['passed'] else 'FAIL'}")
