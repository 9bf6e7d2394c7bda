"""Write the regular 45x85 benchmark fabric.

Junctions sit on a 4-cell lattice joined by 3-cell channels. Each
horizontal channel has a trap above and below its middle cell, so every
lattice block holds two traps that reach the surrounding channels.
"""

import argparse
from pathlib import Path


def tile_fabric(rows=45, cols=85, pitch=4):
    grid = [["."] * cols for _ in range(rows)]
    for r in range(rows):
        for c in range(cols):
            on_row, on_col = r % pitch == 0, c % pitch == 0
            if on_row and on_col:
                grid[r][c] = "J"
            elif on_row or on_col:
                grid[r][c] = "C"
    mid = pitch // 2
    for r in range(0, rows, pitch):
        for c in range(mid, cols, pitch):
            for rr in (r - 1, r + 1):
                if 0 <= rr < rows and grid[rr][c] == ".":
                    grid[rr][c] = "T"
    return "".join("".join(row) + "\n" for row in grid)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=45)
    ap.add_argument("--cols", type=int, default=85)
    ap.add_argument("--pitch", type=int, default=4)
    ap.add_argument("-o", "--out", default="data/fabric_45x85.txt")
    args = ap.parse_args()
    Path(args.out).write_text(tile_fabric(args.rows, args.cols, args.pitch))
