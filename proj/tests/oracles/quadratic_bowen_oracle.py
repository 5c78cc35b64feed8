"""Independent oracle for the Bowen root of z^2 + c (c small, real).

Exact preimage tree to depth 20 (2^20 leaves) in numpy, spherical
derivative products, pressure from the ratio of consecutive level sums.

Usage: python3 quadratic_bowen_oracle.py [c]
"""
import sys
import numpy as np
from scipy.optimize import brentq


def levels(c, depth, base):
    z = np.array([base], dtype=complex)
    logd = np.zeros(1)
    out = []
    for _ in range(depth):
        r = np.sqrt(z - c)
        pre = np.concatenate([r, -r])
        parent_z = np.concatenate([z, z])
        parent_l = np.concatenate([logd, logd])
        fx = 2 * np.abs(pre) * (1 + np.abs(pre) ** 2) / (1 + np.abs(parent_z) ** 2)
        logd = parent_l + np.log(fx)
        z = pre
        out.append(logd.copy())
    return out


def pressure(lv, t):
    s = [np.log(np.sum(np.exp(-t * l))) for l in lv[-2:]]
    return s[1] - s[0]


if __name__ == "__main__":
    c = float(sys.argv[1]) if len(sys.argv) > 1 else 0.1
    # base: repelling fixed point (1 + sqrt(1 - 4c)) / 2 lies in J
    base = (1 + np.sqrt(1 - 4 * c)) / 2
    lv = levels(c, 20, base)
    for t in (0.0, 0.5, 1.0, 1.5, 2.0):
        print(f"t={t} P={pressure(lv, t):.9f}")
    s = brentq(lambda t: pressure(lv, t), 0.5, 1.5, xtol=1e-12)
    print(f"s={s:.9f}  ruelle={1 + c * c / (4 * np.log(2)):.9f}")
