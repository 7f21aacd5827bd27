"""How fast does the downlink rate decay as CSI ages?

Prints the closed-form per-user rate R(n) for both precoders at a few
temporal correlation levels.  ZF loses its interference-nulling as the
estimate ages, so it decays much faster than MF.
"""

import numpy as np

from csisched import SystemConfig, UserLink, rate, total_snr

M, K, C = 64, 40, 50
SNR_DB = 10.0
RHOS = (0.6, 0.75, 0.9, 0.99)
AGES = np.arange(0, 9)


def main():
    snr = 10 ** (SNR_DB / 10)
    users = [UserLink(snr=snr, rho=0.8)] * K  # only the sum SNR matters here
    isum = total_snr(users)
    for precoder in ("mf", "zf"):
        cfg = SystemConfig(M=M, K=K, C=C, precoder=precoder)
        print(f"\n{precoder.upper()} rate [bit/channel use], M={M} K={K} SNR={SNR_DB:.0f} dB")
        print("rho \\ age " + "".join(f"{n:>7d}" for n in AGES))
        for rho in RHOS:
            u = UserLink(snr=snr, rho=rho)
            row = rate(cfg, u, isum, AGES)
            print(f"  {rho:4.2f}    " + "".join(f"{r:7.3f}" for r in row))


if __name__ == "__main__":
    main()
