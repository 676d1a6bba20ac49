#!/usr/bin/env python3
"""Regenerate the dispersion tables shipped in src/tandemfilm/data/.

SiO2 follows the Malitson (1965) fused-silica Sellmeier fit; TiO2 follows the
Devore (1951) ordinary-ray fit.  Both are tabulated on 400-800 nm at 5 nm
spacing.  Extinction is negligible for both materials over this window, so the
files carry no k column (k = 0 implied).  SiO2 is rounded to 4 decimals and
TiO2 to 3, which reproduces the customary 600 nm literature values 1.458 and
2.605 exactly.  The manifest records sources and content hashes.
"""

import hashlib
import math
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "tandemfilm" / "data"

WL_START, WL_STOP, WL_STEP = 400, 800, 5


def sio2_n(wl_nm: float) -> float:
    l2 = (wl_nm / 1000.0) ** 2
    n2 = (
        1.0
        + 0.6961663 * l2 / (l2 - 0.0684043**2)
        + 0.4079426 * l2 / (l2 - 0.1162414**2)
        + 0.8974794 * l2 / (l2 - 9.896161**2)
    )
    return math.sqrt(n2)


def tio2_n(wl_nm: float) -> float:
    l2 = (wl_nm / 1000.0) ** 2
    return math.sqrt(5.913 + 0.2441 / (l2 - 0.0803))


def write_table(name: str, func, decimals: int) -> Path:
    path = DATA_DIR / name
    lines = ["wl,n"]
    for wl in range(WL_START, WL_STOP + 1, WL_STEP):
        lines.append(f"{wl},{func(float(wl)):.{decimals}f}")
    path.write_text("\n".join(lines) + "\n", newline="\n")
    return path


def write_air() -> Path:
    path = DATA_DIR / "air.csv"
    path.write_text("wl,n\n400,1.0\n800,1.0\n", newline="\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    sio2 = write_table("sio2.csv", sio2_n, 4)
    tio2 = write_table("tio2.csv", tio2_n, 3)
    air = write_air()

    manifest = f"""# Shipped dispersion tables (tables-v1)

[SiO2]
file = sio2.csv
source = Malitson 1965 fused-silica Sellmeier fit, 400-800 nm / 5 nm, n to 4 decimals, k = 0
sha256 = {sha256(sio2)}

[TiO2]
file = tio2.csv
source = Devore 1951 rutile ordinary-ray fit, 400-800 nm / 5 nm, n to 3 decimals, k = 0
sha256 = {sha256(tio2)}

[Air]
file = air.csv
source = vacuum approximation, n = 1 everywhere, k = 0
sha256 = {sha256(air)}
"""
    (DATA_DIR / "manifest.txt").write_text(manifest, newline="\n")
    for p in (sio2, tio2, air):
        print(f"wrote {p} ({sha256(p)[:12]})")


if __name__ == "__main__":
    main()
