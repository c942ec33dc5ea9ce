"""Plot the artifacts written by `redres plan` and `redres simulate`.

    python scripts/plot_run.py out/ [figure.png]

Draws the k = 0 slice of the feasibility atlas with the planned q7 branch on
top, the normalised joint angles over time, and the position error at each
sampling point.
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

Q_MIN = [-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973]
Q_MAX = [2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973]


def main(out: Path, figure: Path) -> None:
    atlas = pd.read_csv(out / "atlas.csv")
    traj = pd.read_csv(out / "trajectory.csv")
    samples = pd.read_csv(out / "samples.csv")
    errors = pd.read_csv(out / "audit.csv")

    fig, axes = plt.subplots(3, 1, figsize=(9, 10), constrained_layout=True)

    k0 = atlas[atlas.k == 0]
    grid = k0.pivot(index="j", columns="i", values="feasible").astype(float)
    axes[0].imshow(grid, origin="lower", aspect="auto", cmap="Greys", interpolation="nearest")
    axes[0].plot(samples.i, samples.j, color="tab:red", lw=1.2, label="planned branch")
    axes[0].set_xlabel("sampling point i")
    axes[0].set_ylabel("q7 grid index j")
    axes[0].set_title("feasible cells at zero adjustment")
    axes[0].legend(loc="upper right")

    for c in range(7):
        q = traj[f"q{c + 1}"]
        axes[1].plot(traj.t, (2 * q - (Q_MAX[c] + Q_MIN[c])) / (Q_MAX[c] - Q_MIN[c]), lw=0.8, label=f"q{c + 1}")
    axes[1].axhline(1.0, color="k", lw=0.5, ls="--")
    axes[1].axhline(-1.0, color="k", lw=0.5, ls="--")
    axes[1].set_xlabel("t [s]")
    axes[1].set_ylabel("normalised angle")
    axes[1].legend(ncol=7, fontsize="small", loc="lower center")

    axes[2].plot(errors.i, errors.err_m * 1e3, marker=".", lw=0.8)
    axes[2].set_xlabel("sampling point i")
    axes[2].set_ylabel("position error [mm]")

    fig.savefig(figure, dpi=120)
    print(f"wrote {figure}")


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    out_dir = Path(sys.argv[1])
    main(out_dir, Path(sys.argv[2]) if len(sys.argv) > 2 else out_dir / "run.png")
