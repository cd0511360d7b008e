#!/usr/bin/env python3
"""Writes data/engine_efficiency.csv, a gridded engine efficiency map.

The map follows a Willans line: fuel power = (T + T_loss(w)) * w / e with a
friction torque T_loss(w) = T0 + k*w, so efficiency
    eta(w, T) = e * T / (T + T_loss(w))
is low at part load and approaches e at full torque. The T = 0 row holds a
small positive floor so that interpolated efficiencies stay in (0, 1).
"""
import sys

PEAK = 0.40           # Willans slope e
LOSS_TORQUE = 12.0    # N m at zero speed
LOSS_SLOPE = 0.02     # N m per rad/s
FLOOR = 0.02
TORQUES = [0, 5, 10, 20, 30, 40, 50, 60, 80, 100, 120, 140, 160, 180, 199]
SPEEDS = [0, 50, 100, 150, 200, 250, 300, 350, 400, 450, 503]


def eta(w, t):
    if t == 0:
        return FLOOR
    return PEAK * t / (t + LOSS_TORQUE + LOSS_SLOPE * w)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/engine_efficiency.csv"
    with open(out, "w", newline="\n") as f:
        f.write("torque_Nm\\speed_radps," + ",".join(str(w) for w in SPEEDS) + "\n")
        for t in TORQUES:
            f.write(str(t) + "," + ",".join(f"{eta(w, t):.5f}" for w in SPEEDS) + "\n")


if __name__ == "__main__":
    main()
