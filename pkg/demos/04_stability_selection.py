# coding: utf-8

# # Stability selection for count data
#
# A negative binomial model with 50 covariates, only six informative. Each
# half-sample fit stops once q distinct (parameter, covariate) pairs have
# entered, and pairs chosen often enough are called stable.

from distboost import BoostConfig, generate, make_scenario, resolve_triple, run_stabsel, tp_fp

data, truth = generate(make_scenario("2A", n=1000, p_total=50, seed=3))

# Two distribution parameters times 50 covariates gives 100 candidates.
# Fix q and the error bound, and the threshold follows.

cfg = resolve_triple(100, q=14, pfer=2.5, B=50, seed=0)
print(f"pi_thr = {cfg.pi_thr:.3f}")

# Asking for more than the bound allows fails loudly instead of clipping.

try:
    resolve_triple(100, q=12, pfer=1.0)
except ValueError as exc:
    print(exc)

res = run_stabsel(cfg, BoostConfig("negbin", "inner", 1), data)
for (k, j), f in res.ranked()[:14]:
    print(("mu", "sigma")[k], data.column_names[j], f)

print("TP, FP:", tp_fp(res, truth))

# Lowering the threshold trades false positives for true ones.

for pi in (0.6, 0.75, 0.9):
    print(pi, tp_fp(res.stable_set(pi), truth))
