#!/usr/bin/env python3
"""Writes the synthetic 30 m x 20 m corridor-and-rooms office map."""
import sys

RES = 0.25
W, H = 120, 80  # cells

def main(path):
    free = [[True] * W for _ in range(H)]  # free[row][col], row 0 = lowest y

    def block(x0, x1, y0, y1):
        for r in range(int(round(y0 / RES)), int(round(y1 / RES))):
            for c in range(int(round(x0 / RES)), int(round(x1 / RES))):
                free[r][c] = False

    def clear(x0, x1, y0, y1):
        for r in range(int(round(y0 / RES)), int(round(y1 / RES))):
            for c in range(int(round(x0 / RES)), int(round(x1 / RES))):
                free[r][c] = True

    # outer walls
    block(0, 30, 0, RES)
    block(0, 30, 20 - RES, 20)
    block(0, RES, 0, 20)
    block(30 - RES, 30, 0, 20)
    # corridor walls (corridor spans y in [8.5, 11.5])
    block(0, 30, 8.25, 8.5)
    block(0, 30, 11.5, 11.75)
    # room dividers
    for x in (6, 12, 18, 24):
        block(x, x + RES, 0, 8.25)
        block(x, x + RES, 11.75, 20)
    # one 1.5 m door per room on each side of the corridor
    for x0 in (0.25, 6.25, 12.25, 18.25, 24.25):
        clear(x0 + 2.25, x0 + 3.75, 8.25, 8.5)
        clear(x0 + 2.25, x0 + 3.75, 11.5, 11.75)

    with open(path, "w") as f:
        f.write(f"resolution {RES} origin 0 0\n")
        for r in reversed(range(H)):
            f.write("".join("." if v else "#" for v in free[r]) + "\n")

if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "office.map")
