"""Walk through one V1 visit: build the schedule, the vector x0 = x_2, and certify three returns to B(y0, delta)."""

import mpmath

from backshift.analyze.visit import VisitQuery, certified_visits, cross_check, visit_thresholds
from backshift.config import load_config
from backshift.construct.schedule import validate_schedule


def main():
    cfg = load_config(preset="v1-flagship")
    sched = cfg.build_schedule()
    print(f"schedule: {sched.depth} levels, last index {sched.end}, violations {len(validate_schedule(sched))}")
    for lv in sched.levels:
        print(f"  level {lv.k}: {lv.count} interval(s), first {lv.first.to_list()}, last {lv.last.to_list()}")

    ctx = cfg.context(sched)
    for q in (1, 2, 3):
        built = ctx.build(q)
        print(f"x_{q}: unit coordinate at {built.distinguished}, {len(built.vector.entries)} entries, "
              f"||xt_{q}|| = {mpmath.nstr(built.tilde.p_norm_mp(), 6)}, tail <= {mpmath.nstr(built.tail_bound, 3)}")

    vq = VisitQuery(cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]))
    th = visit_thresholds(ctx, vq)
    print(f"eta0 = {mpmath.nstr(th.eta0, 6)}, l0 = {th.l0}, l1 = {th.l1}, s0 = {th.s0}, {len(th.admissible)} exponents above s0")

    reports = certified_visits(ctx, vq, 3)
    for r in reports:
        terms = ", ".join(f"{lab} = {mpmath.nstr(t, 6)}" for lab, t in zip(r.labels, r.terms))
        print(f"s' = {r.s_prime}: {terms}; distance {mpmath.nstr(r.final_distance, 8)} < {vq.delta}: {r.passed}")
    print(f"direct return-set evaluation agrees: {cross_check(ctx, vq, reports)}")


if __name__ == "__main__":
    main()
