# coding: utf-8

# # Choosing the stopping iteration
#
# Out-of-bag risk on half-sample folds. A noncyclical path is fit once per
# fold and read off at every grid point; the cyclical model needs a grid
# over one stopping value per parameter.

from distboost import BoostConfig, MstopGrid, ResamplingPlan, cv_risk, generate, make_grid, make_scenario

data, _ = generate(make_scenario("1A", n=300, p_total=20, seed=2))
plan = ResamplingPlan("subsample", folds=5, seed=0)

res = cv_risk(BoostConfig("normal", "inner", 1), data, plan, MstopGrid.scalar(range(0, 601, 5)))
print("noncyclical: best total", res.best, "using", res.path_fits, "fits")

grid = make_grid(300, 10, 2)
res = cv_risk(BoostConfig("normal", "cyclical", 1), data, plan, grid)
print("cyclical: best", res.best, "total", sum(res.best))
print(res.evaluations, "grid evaluations from", res.path_fits, "fits")
