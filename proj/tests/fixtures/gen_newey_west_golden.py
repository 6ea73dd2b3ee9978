"""Prints the frozen 12-point AR(1) regression fixture and reference HAC
standard errors from statsmodels (Bartlett kernel, no small-sample correction).
"""

import numpy as np
import statsmodels.api as sm

rng = np.random.default_rng(12)
n = 12
x = np.zeros(n)
e = np.zeros(n)
for t in range(n):
    x[t] = (0.6 * x[t - 1] if t else 0.0) + rng.normal()
    e[t] = (0.5 * e[t - 1] if t else 0.0) + rng.normal()
x = np.round(x, 6)
y = np.round(1.0 + 0.5 * x + e, 6)

print("x =", ", ".join(repr(float(v)) for v in x))
print("y =", ", ".join(repr(float(v)) for v in y))
X = sm.add_constant(x)
for lag in (0, 1, 2, 3):
    fit = sm.OLS(y, X).fit(cov_type="HAC", cov_kwds={"maxlags": lag, "use_correction": False})
    print(f"lag {lag}: beta={fit.params[1]!r} intercept={fit.params[0]!r} "
          f"se_beta={fit.bse[1]!r} se_intercept={fit.bse[0]!r}")
white = sm.OLS(y, X).fit(cov_type="HC0")
print(f"HC0: se_beta={white.bse[1]!r} se_intercept={white.bse[0]!r}")
