"""One vector against B_{w_mu} for two values of mu, and why the smaller one needs a deeper schedule."""

import mpmath

from backshift.analyze.family import family_certificate
from backshift.config import load_config


def main():
    cfg = load_config(preset="v3-family")
    ctx = cfg.context()
    for lv in ctx.schedule.levels:
        fiber = ctx.schedule.fibers.rho(lv.k) if lv.k % 2 == 0 else None
        print(f"level {lv.k}: {lv.count} interval(s) from {lv.first.lo}, fiber {fiber}")
    reports = family_certificate(ctx, cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]), cfg.y1(), cfg.mus(), visits_per_mu=3)
    for rep in reports:
        print(f"mu = {rep.mu}: non-FHC {rep.non_fhc.passed}")
        for c in rep.v_sequence:
            print(f"  v = {c.r}: window {c.value}, refinement stable {c.refinement_passed}")
        for v in rep.visits:
            print(f"  s' = {v.s_prime}: {v.labels[0]} = {mpmath.nstr(v.terms[0], 6)}, distance {mpmath.nstr(v.final_distance, 6)}")
        if rep.error:
            print(f"  {rep.error}")


if __name__ == "__main__":
    main()
