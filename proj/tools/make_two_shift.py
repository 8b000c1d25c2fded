"""Writes data/two_shift.csv: yearly curves of 52 weekly values with two
level shifts (after 1939 and after 1984)."""

import sys

import numpy as np


def main(path="data/two_shift.csv", seed=2013):
    rng = np.random.default_rng(seed)
    years = np.arange(1900, 2020)
    weeks = np.arange(1, 53)
    t = (weeks - 1) / 51.0
    season = 8.0 - 6.0 * np.cos(2 * np.pi * t)
    rows = []
    for year in years:
        shift = 0.0
        if year >= 1940:
            shift += 2.0
        if year >= 1985:
            shift += 0.6 + 0.6 * np.sin(np.pi * t)
        # smooth year-to-year weather: a few random Fourier modes plus noise
        coef = rng.normal(size=4) / np.arange(1, 5)
        weather = sum(c * np.sin((j + 1) * np.pi * t + 0.3 * j) for j, c in enumerate(coef))
        noise = 0.3 * rng.normal(size=t.size)
        rows.append(season + shift + weather + noise)
    with open(path, "w") as out:
        out.write("year," + ",".join(str(w) for w in weeks) + "\n")
        for year, row in zip(years, rows):
            out.write(str(year) + "," + ",".join(f"{v:.4f}" for v in row) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
