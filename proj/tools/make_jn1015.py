#!/usr/bin/env python3
"""Writes data/jn1015.csv: the Japanese 10-15 mode as a 1 Hz piecewise-linear trace.

Segments are (duration_s, end_speed_kmh); speed ramps linearly from the
previous end speed. Three 10-mode blocks are followed by one 15-mode block.
"""
import sys

TEN_MODE = [
    (20, 0), (7, 20), (15, 20), (7, 0), (16, 0), (14, 40), (15, 40),
    (10, 20), (2, 20), (12, 40), (4, 40), (13, 0),
]
FIFTEEN_MODE = [
    (45, 0), (20, 50), (10, 50), (8, 40), (4, 40), (16, 60), (6, 60),
    (9, 70), (10, 70), (13, 50), (10, 50), (16, 70), (6, 70), (30, 0), (49, 0),
]


def build():
    segments = [(3, 0)] + TEN_MODE * 3 + FIFTEEN_MODE
    speeds = [0.0]
    for duration, end_kmh in segments:
        start = speeds[-1]
        end = end_kmh / 3.6
        for i in range(1, duration + 1):
            speeds.append(start + (end - start) * i / duration)
    return speeds


def main():
    speeds = build()
    out = sys.argv[1] if len(sys.argv) > 1 else "data/jn1015.csv"
    with open(out, "w", newline="\n") as f:
        f.write("t_s,v_mps\n")
        for t, v in enumerate(speeds):
            f.write(f"{t},{v:.4f}\n")
    dist = sum(speeds[:-1])
    print(f"samples={len(speeds)} duration={len(speeds)-1} distance={dist:.2f} max={max(speeds):.4f}",
          file=sys.stderr)


if __name__ == "__main__":
    main()
