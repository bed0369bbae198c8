#!/usr/bin/env python3
"""Write the deterministic fixture corpus as PGM files.

Usage: python scripts/make_fixtures.py [outdir]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import synthimg  # noqa: E402

from sjnd360.raster import save_image  # noqa: E402


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, plane in synthimg.corpus():
        save_image(plane, outdir / f"{name}.pgm")
        print(f"wrote {outdir / (name + '.pgm')} ({plane.width}x{plane.height})")
    save_image(synthimg.constant_noise_frame(), outdir / "flatnoise_2048.pgm")
    print(f"wrote {outdir / 'flatnoise_2048.pgm'} (2048x1024)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
