# Ergodic sum rate versus SNR for the three runnable schemes.
#
# Reduced draw count so the script finishes in about a minute; bump DRAWS
# for smoother curves. Writes sweep.csv / sweep.json next to this file.
from pathlib import Path

import numpy as np

from rsmimo.evaluate import ExperimentConfig, run_experiment, write_csv, write_json
from rsmimo.solver import SolverConfig

DRAWS = 50
SNR_GRID = tuple(float(s) for s in range(0, 45, 5))


def main():
    cfg = ExperimentConfig(
        M=8,
        N=2,
        K=4,
        snr_db_grid=SNR_GRID,
        sigma_e2_grid=(0.1,),
        draws=DRAWS,
        schemes=("proposed", "rwmmse", "mrt"),
        seed=7,
        solver=SolverConfig(max_iters=100, obj_tol=1e-4),
        workers=4,
    )
    result = run_experiment(cfg)

    by_scheme = {s: [] for s in cfg.schemes}
    for cell in result.cells:
        by_scheme[cell.scheme].append((cell.snr_db, cell.esr_bits, cell.std_err))

    print(f"ergodic sum rate, M=8 N=2 K=4, sigma_e2=0.1, {DRAWS} paired draws")
    header = "snr_db | " + " | ".join(f"{s:>12s}" for s in cfg.schemes)
    print(header)
    print("-" * len(header))
    for i, snr in enumerate(SNR_GRID):
        row = f"{snr:6.0f} | "
        row += " | ".join(f"{by_scheme[s][i][1]:7.2f}±{by_scheme[s][i][2]:4.2f}" for s in cfg.schemes)
        print(row)

    # the all-private curve flattens at high SNR while splitting keeps climbing
    for s in ("proposed", "rwmmse"):
        pts = dict((snr, esr) for snr, esr, _ in by_scheme[s])
        slope = (pts[40.0] - pts[30.0]) / 10.0
        print(f"{s}: high-SNR slope {slope:.3f} bits/dB")

    out = Path(__file__).resolve().parent
    write_csv(result, out / "sweep.csv")
    write_json(result, out / "sweep.json")
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep.json'}")


if __name__ == "__main__":
    main()
