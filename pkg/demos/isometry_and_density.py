"""The embedding T on a V2 schedule: near-isometry on random lambda, then the upper-density certificate."""

from backshift.analyze.density_checks import non_ufhc_certificate
from backshift.config import load_config
from backshift.vectors.context import apply_T, isometry_report


def main():
    cfg = load_config(preset="v2-isometry")
    ctx = cfg.context()
    rep = isometry_report(ctx, trials=100, support_cap=8, seed=0)
    print(f"||T lambda|| / ||lambda|| over 100 trials: [{rep.min_ratio:.9f}, {rep.max_ratio:.9f}] "
          f"within [{rep.lower_limit}, {rep.upper_limit}]: {rep.passed}")

    x0 = apply_T(ctx, cfg.lam())
    cert = non_ufhc_certificate(ctx.schedule, x0, samples=1000)
    for d in cert.densities[:6]:
        print(f"  level {d.level}: complement density {float(d.density):.6f} >= {d.floor}")
    for m in cert.min_location:
        print(f"  level {m['level']}: density on [{m['lo']}, {m['hi']}) smallest at {m['argmin']} (g = {m['g']}, {m['mode']})")
    print(f"pi_1 vanishes on {cert.structural.samples} sampled exponents: {cert.structural.passed}")


if __name__ == "__main__":
    main()
