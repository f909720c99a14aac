"""Monte Carlo against closed form for one functional, as the sample count grows.

The absolute error should shrink roughly like n^(-1/2) and stay within a few
standard errors.
"""

from wiener_gfft import CylinderFunctional, McConfig, builtin_family
from wiener_gfft.kernels import Grid
from wiener_gfft.oracle import closed_form_wiener_integral, mc_generalized_wiener_integral

grid = Grid(1.0, 256)
fam = builtin_family("trig1", grid)
F = CylinderFunctional.from_atoms(grid, [(0.7 + 0.3j, 0.8 * fam.s2), (-0.5j, 0.6 * fam.h)])
lam = 1.0
exact = closed_form_wiener_integral(F, fam.k1, lam)
print(f"closed form {exact:.6f}")
for n in (1_000, 10_000, 100_000):
    est = mc_generalized_wiener_integral(F, fam.k1, lam, McConfig(n, 7, grid=grid))
    err = abs(est.mean - exact)
    print(f"n={n:7d}  mc {est.mean:.6f}  |err| {err:.2e}  s.e. {est.std_error:.2e}  "
          f"z {err / est.std_error:.2f}")
