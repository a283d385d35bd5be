"""Sample plotting script (documentation, not part of the tested library).

Renders CSV files produced by the CLI, e.g.:

    agecalc figure fig3  --out fig3.csv  > fig3_summary.json
    agecalc figure fig6b --out fig6b.csv > fig6b_summary.json
    python demos/plot_figures.py fig3.csv fig6b.csv

Requires matplotlib, which the library itself does not depend on.
"""

import csv
import sys
from collections import defaultdict

try:
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("plot_figures.py needs matplotlib (pip install matplotlib)")


def load(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def plot_file(path):
    rows = [r for r in load(path) if r["value"]]
    curves = defaultdict(list)
    for r in rows:
        key = (r["policy"], r["metric"], r["source"])
        curves[key].append((float(r["axis_value"]), float(r["value"])))
    axis = rows[0]["axis"]

    fig, ax = plt.subplots(figsize=(6, 4))
    for (policy, metric, source), pts in sorted(curves.items()):
        pts.sort()
        xs, ys = zip(*pts)
        style = {"bound": "-", "exact": "--", "simulation": ":"}[source]
        if axis == "epsilon":
            # tail decay plots: metric value on x, epsilon on y
            ax.semilogy(ys, xs, style, label="%s %s %s" % (policy, metric, source))
            ax.set_xlabel("metric value")
            ax.set_ylabel("epsilon")
        else:
            ax.semilogy(xs, ys, style, label="%s %s %s" % (policy, metric, source))
            ax.set_xlabel(axis)
            ax.set_ylabel("bound value")
    ax.legend(fontsize=7)
    ax.set_title(path)
    out = path.rsplit(".", 1)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print("wrote", out)


if __name__ == "__main__":
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    for p in sys.argv[1:]:
        plot_file(p)
