"""
Manual smoke run of the four reference figures.
Run with:
    python scripts/reproduce_figures.py [output_dir]
Bound the worker pool with FRACPOW_THREADS, e.g.:
    export FRACPOW_THREADS=4
"""

import os
import sys

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from fracpow.config import RuntimeSettings
from fracpow.figures import build_figure
from fracpow.logger import configure_logging


def main() -> None:
    settings = RuntimeSettings.from_env()
    configure_logging(settings)
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(ROOT, "figures")
    os.makedirs(out_dir, exist_ok=True)

    tables = {}
    for figure in (1, 2, 3, 4):
        table = tables[figure] = build_figure(figure, max_workers=settings.threads)
        path = os.path.join(out_dir, f"figure{figure}.csv")
        with open(path, "w", encoding="utf-8", newline="") as stream:
            table.write(stream)
        print(f"Figure {figure}: {len(table.rows)} rows -> {path}")

    # Equal-cost comparison at n = 100 on the artificial operator.
    for alpha, n, inv_de, inv_se, err_de, err_se, fest in tables[4].rows:
        if n == 100:
            print(
                f"alpha={alpha}: err_de={err_de:.3e} ({inv_de} solves) "
                f"err_se={err_se:.3e} ({inv_se} solves) fest={fest:.3e}"
            )


if __name__ == "__main__":
    main()
