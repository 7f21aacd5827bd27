"""Does the closed-form aged-CSI SINR match a link-level simulation?

Draws Gauss-Markov channels, builds the precoders from stale estimates and
compares the empirical moment terms against the closed forms, per age.
"""

from csisched import SystemConfig, UserLink, validate_closed_form

M, K, C = 64, 40, 50
SNR_DB = 10.0
RHO = 0.8
AGES = (0, 1, 2, 5)
TRIALS = 10_000
SEED = 7


def main():
    users = [UserLink(snr=10 ** (SNR_DB / 10), rho=RHO)] * K
    for precoder in ("mf", "zf"):
        cfg = SystemConfig(M=M, K=K, C=C, precoder=precoder)
        print(f"\n{precoder.upper()}  M={M} K={K} SNR={SNR_DB:.0f} dB rho={RHO}, "
              f"{TRIALS} trials per age")
        print("  age   SINR (sim)   SINR (closed)   rel err")
        for age in AGES:
            rep = validate_closed_form(cfg, users, age, trials=TRIALS, seed=SEED + age)
            print(f"  {age:3d}   {rep.sinr_emp:10.4f}   {rep.sinr_cf:13.4f}   "
                  f"{rep.sinr_rel_err:7.3%}")


if __name__ == "__main__":
    main()
