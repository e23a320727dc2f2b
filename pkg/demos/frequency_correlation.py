#!/usr/bin/env python3
"""Show how repeater delay reshapes the channel's frequency structure.

Each repeater adds a delayed two-hop branch, which shifts part of the
average power delay profile out in delay and therefore decorrelates the
channel faster across subcarriers.  The printed table gives |R[lag]|, the
magnitude of the subcarrier correlation (DFT of the power delay profile),
and the 50%-coherence lag for each scenario.
"""

import numpy as np

from replink import average_pdp, frequency_correlation, table1_config


def coherence_lag(corr, level=0.5):
    mags = np.abs(corr[: len(corr) // 2])
    below = np.nonzero(mags < level)[0]
    return int(below[0]) if len(below) else len(mags)


def main():
    cfg = table1_config()
    lags = [0, 2, 4, 8, 16, 32]
    print(f"{'lag':>12} " + " ".join(f"{lag:>8}" for lag in lags) + "  coh50")
    for name, channel in cfg.scenarios:
        pdp = average_pdp(channel)
        corr = frequency_correlation(pdp, channel.n_fft)
        row = " ".join(f"{abs(corr[lag]):8.3f}" for lag in lags)
        print(f"{name:>12} {row} {coherence_lag(corr):6d}")

    print("\npower delay profiles (tap index: average power):")
    for name, channel in cfg.scenarios:
        pdp = average_pdp(channel)
        taps = " ".join(f"{p:.3f}" for p in pdp.powers)
        print(f"  {name}: {taps}")


if __name__ == "__main__":
    main()
